"""Runtime validation: MILP against LDD by city size, and the speedup from main stations."""

import sys
from pathlib import Path

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

# Add src to path relative to this script
sys.path.append(str(Path(__file__).parent.parent / "src"))

from drrpvt.orchestrator import ExperimentConfig, run_experiment

console = Console()

MIN_SPEEDUP = 2.0


def frame_table(frame, title: str) -> Table:
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(*(f"{v:.4g}" if isinstance(v, float) else str(v) for v in row))
    return table


def run_runtime_sweep() -> bool:
    """LDD beats the MILP on wall time at the largest size the MILP still finishes."""
    config = ExperimentConfig(name="runtime-sweep", sizes=[5, 10, 15, 20, 25, 30], time_limit_s=60.0)
    result = run_experiment(config)
    console.print(frame_table(result.table, "MILP and LDD runtime by station count"))
    crossover = result.summary["crossover_stations"]
    largest = result.summary["largest_completed"]
    lines = [f"MILP first misses its {config.time_limit_s:.0f}s limit at: {crossover if crossover is not None else 'never'}"]
    if largest is None:
        lines.append("MILP finished at no size")
    else:
        lines.append(
            f"at {largest['stations']} stations: MILP {largest['milp_seconds']:.2f}s, LDD {largest['ldd_seconds']:.2f}s"
        )
    console.print(Panel.fit("\n".join(lines), border_style="blue"))
    return largest is not None and bool(largest["ldd_faster"])


def run_speedup() -> bool:
    """Main stations at least halve planning time on 30 stations without breaking feasibility."""
    config = ExperimentConfig(name="main-stations", stations=30, clusters=6, seeds=[0, 1, 2])
    result = run_experiment(config)
    console.print(frame_table(result.table, "Planning with and without main stations"))
    speedup = result.summary["mean_runtime_without_ms"] / max(result.summary["mean_runtime_with_ms"], 1e-9)
    console.print(Panel.fit(f"Mean speedup: {speedup:.1f}x (need {MIN_SPEEDUP:.0f}x)", border_style="blue"))
    feasible = bool(result.table["feasible_with_ms"].all()) and bool(result.table["feasible_without_ms"].all())
    return feasible and speedup >= MIN_SPEEDUP


def main() -> int:
    ok = run_runtime_sweep()
    ok &= run_speedup()
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
