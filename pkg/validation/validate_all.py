"""Run every validation script and summarize the results."""

import sys
from pathlib import Path

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

sys.path.append(str(Path(__file__).parent))

import validate_policies
import validate_runtime
import validate_solvers

console = Console()

SUITES = {
    "solvers": validate_solvers.main,
    "policies": validate_policies.main,
    "runtime": validate_runtime.main,
}


def main() -> int:
    console.print(Panel.fit("[bold]DRRPVT validation[/bold]", border_style="blue"))
    results = {}
    for name, run in SUITES.items():
        console.rule(name)
        results[name] = run() == 0

    table = Table(title="Summary")
    table.add_column("Suite")
    table.add_column("Status")
    for name, ok in results.items():
        table.add_row(name, "[green]PASS[/green]" if ok else "[red]FAIL[/red]")
    console.print(table)
    return 0 if all(results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
