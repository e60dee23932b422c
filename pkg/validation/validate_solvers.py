"""Solver validation: exact MILP against the enumeration oracle, LDD against the exact optimum."""

import sys
from itertools import cycle, islice
from pathlib import Path

from rich.console import Console
from rich.table import Table

# Add src to path relative to this script
sys.path.append(str(Path(__file__).parent.parent / "src"))

from drrpvt.errors import SolverNumericalError
from drrpvt.ingest import SyntheticConfig, generate_synthetic
from drrpvt.ldd import LddParams, run_ldd
from drrpvt.milp import enumerate_milp
from drrpvt.model import build_milp, check_solution, solve_exact

console = Console()

# (stations, epochs) cycled over the oracle family
SHAPES = ((2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (4, 2))
ORACLE_CASES = 56
LDD_SEEDS = range(5)
LDD_STATIONS = (10, 15, 20)
GAP_TARGET = 0.01
VALUE_TOL = 1e-6


def oracle_config(seed: int, n_stations: int, horizon: int) -> SyntheticConfig:
    """One vehicle, one trailer, capacities at most 4: small enough to enumerate."""
    return SyntheticConfig(
        n_stations=n_stations,
        n_vehicles=1,
        n_trailers=1,
        horizon=horizon,
        demand_intensity=1.0,
        capacity_range=(2, 4),
        vehicle_capacity=2,
        trailer_capacity_range=(1, 2),
        extent_km=2.0,
        budget=3.0,
        seed=seed,
    )


def oracle_family():
    shapes = islice(cycle(SHAPES), ORACLE_CASES)
    return [generate_synthetic(oracle_config(seed, s, t)) for seed, (s, t) in enumerate(shapes)]


def run_oracle_sweep(instances) -> tuple[bool, dict[int, float]]:
    """Native and HiGHS optima equal enumeration; returns the optima by case."""
    table = Table(title=f"Exact MILP against enumeration ({len(instances)} instances)")
    for column in ("Case", "S/T/V/W", "Oracle", "Native", "HiGHS", "Status"):
        table.add_column(column)
    optima: dict[int, float] = {}
    all_ok = True
    for case, instance in enumerate(instances):
        shape = f"{instance.n_stations}/{instance.horizon}/{instance.n_vehicles}/{instance.n_trailers}"
        try:
            oracle = enumerate_milp(build_milp(instance)).incumbent_value
        except SolverNumericalError:
            # Unchecked cases fail the sweep
            all_ok = False
            table.add_row(str(case), shape, "-", "-", "-", "[red]UNCHECKED[/red]")
            continue
        native = solve_exact(instance, backend="native").value
        highs = solve_exact(instance, backend="highs").value
        ok = abs(native - oracle) <= VALUE_TOL and abs(highs - oracle) <= VALUE_TOL
        all_ok &= ok
        optima[case] = oracle
        table.add_row(
            str(case),
            shape,
            f"{oracle:.4f}",
            f"{native:.4f}",
            f"{highs:.4f}",
            "[green]PASS[/green]" if ok else "[red]FAIL[/red]",
        )
    console.print(table)
    return all_ok, optima


def run_ldd_sandwich(instances, optima: dict[int, float]) -> bool:
    """LDD primal within 1% of the optimum, and dual <= optimum <= primal at every iteration."""
    table = Table(title="LDD against the exact optimum")
    for column in ("Case", "Optimum", "LDD primal", "Shortfall", "Iterations", "Bounds hold", "Status"):
        table.add_column(column)
    params = LddParams(relative_delta=GAP_TARGET, max_iterations=200)
    all_ok = True
    for case, instance in enumerate(instances):
        if case not in optima:
            continue
        opt = optima[case]
        result = run_ldd(instance, params)
        # Trace rows are in the minimization frame, where the optimum is -opt
        bounds = all(row.dual <= -opt + VALUE_TOL and row.primal >= -opt - VALUE_TOL for row in result.gap_trace)
        shortfall = (opt - result.primal_value) / max(abs(opt), 1.0)
        ok = bounds and shortfall <= GAP_TARGET + VALUE_TOL
        all_ok &= ok
        table.add_row(
            str(case),
            f"{opt:.4f}",
            f"{result.primal_value:.4f}",
            f"{shortfall:.2%}",
            str(result.iterations_used),
            str(bounds),
            "[green]PASS[/green]" if ok else "[red]FAIL[/red]",
        )
    console.print(table)
    return all_ok


def run_ldd_gap() -> bool:
    table = Table(title=f"LDD duality gap on larger cities (target {GAP_TARGET:.0%})")
    for column in ("Stations", "Seed", "Primal", "Dual bound", "Gap", "Iterations", "Feasible", "Status"):
        table.add_column(column)
    params = LddParams(relative_delta=GAP_TARGET)
    all_ok = True
    for n in LDD_STATIONS:
        for seed in LDD_SEEDS:
            instance = generate_synthetic(SyntheticConfig(n_stations=n, horizon=4, seed=seed))
            result = run_ldd(instance, params)
            relative = result.gap / max(abs(result.primal_value), 1.0)
            feasible = not check_solution(instance, result.solution)
            ok = feasible and relative <= GAP_TARGET
            all_ok &= ok
            table.add_row(
                str(n),
                str(seed),
                f"{result.primal_value:.3f}",
                f"{-result.dual_bound:.3f}",
                f"{relative:.2%}",
                str(result.iterations_used),
                str(feasible),
                "[green]PASS[/green]" if ok else "[red]FAIL[/red]",
            )
    console.print(table)
    return all_ok


def main() -> int:
    instances = oracle_family()
    ok, optima = run_oracle_sweep(instances)
    ok &= run_ldd_sandwich(instances, optima)
    ok &= run_ldd_gap()
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
