"""Policy validation: planning-level dominance, bike conservation and the profit identity in simulation."""

import sys
from pathlib import Path

from rich.console import Console
from rich.table import Table

# Add src to path relative to this script
sys.path.append(str(Path(__file__).parent.parent / "src"))

from drrpvt.contracts.instance import OperatingMode
from drrpvt.contracts.plan import EpochPlan
from drrpvt.ingest import SyntheticConfig, generate_synthetic
from drrpvt.ldd import LddParams
from drrpvt.model import solve_exact
from drrpvt.simulator import Planner, Policy, SystemState, realized_demand, run_policy, step

console = Console()

DOMINANCE_SEEDS = range(20)
SIMULATION_SEEDS = range(100)
VALUE_TOL = 1e-6
PROFIT_RTOL = 1e-9


def small_city(seed: int, n_stations: int = 6):
    return generate_synthetic(SyntheticConfig(n_stations=n_stations, n_trailers=3, horizon=3, seed=seed))


def run_dominance() -> bool:
    """Joint planning is never worse than either resource alone, and strictly better somewhere."""
    table = Table(title="Joint plan against single-resource plans")
    for column in ("Seed", "Stations", "Joint", "Vehicles", "Trailers", "Status"):
        table.add_column(column)
    all_ok = True
    strict = 0
    for seed in DOMINANCE_SEEDS:
        instance = small_city(seed, n_stations=4 + seed % 3)
        values = {mode: solve_exact(instance, mode, backend="highs").value for mode in OperatingMode}
        joint = values[OperatingMode.JOINT]
        best_single = max(values[OperatingMode.VEHICLES_ONLY], values[OperatingMode.TRAILERS_ONLY])
        ok = joint >= best_single - VALUE_TOL
        strict += joint > best_single + VALUE_TOL
        all_ok &= ok
        table.add_row(
            str(seed),
            str(instance.n_stations),
            f"{joint:.3f}",
            f"{values[OperatingMode.VEHICLES_ONLY]:.3f}",
            f"{values[OperatingMode.TRAILERS_ONLY]:.3f}",
            "[green]PASS[/green]" if ok else "[red]FAIL[/red]",
        )
    console.print(table)
    console.print(f"joint strictly better than both single-resource plans on {strict}/{len(DOMINANCE_SEEDS)} instances")
    return all_ok and strict >= 1


def run_conservation() -> bool:
    """Bikes are conserved, requests are served or lost, and profit is the sum of its epoch parts."""
    table = Table(title=f"Conservation over {len(SIMULATION_SEEDS)} simulated horizons")
    for column in ("Seed", "Policy", "Bikes", "Demand", "Served + lost", "Profit", "Status"):
        table.add_column(column)
    params = LddParams(backend="highs")
    policies = list(Policy)
    all_ok = True
    for seed in SIMULATION_SEEDS:
        instance = small_city(seed, n_stations=5)
        realized = realized_demand(instance, seed)

        state = SystemState.initial(instance)
        total = state.total_bikes()
        for t in range(instance.horizon):
            state, _, _ = step(state, EpochPlan(epoch=t), realized[:, :, t], instance)
        bikes_ok = state.total_bikes() == total

        policy = policies[seed % len(policies)]
        report = run_policy(instance, policy, seed, Planner.EXACT, params=params, realized=realized)
        demand = sum(e.demand for e in report.epochs)
        parts = sum(e.revenue - e.routing_cost - e.trailer_payment for e in report.epochs)
        profit_ok = abs(parts - report.profit) <= PROFIT_RTOL * max(abs(report.profit), 1.0)
        ok = bikes_ok and profit_ok and report.served + report.lost == demand
        all_ok &= ok
        table.add_row(
            str(seed),
            policy.value,
            str(total),
            str(demand),
            str(report.served + report.lost),
            f"{report.profit:.4f}",
            "[green]PASS[/green]" if ok else "[red]FAIL[/red]",
        )
    console.print(table)
    return all_ok


def main() -> int:
    ok = run_dominance()
    ok &= run_conservation()
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
