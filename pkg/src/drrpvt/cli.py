"""CLI for DRRPVT."""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from drrpvt.config import settings
from drrpvt.contracts.envelope import CommandOutput
from drrpvt.contracts.instance import OperatingMode
from drrpvt.util.logging import init_default_logging

app = typer.Typer(
    name="drrpvt",
    help="Dynamic bike repositioning with carrier vehicles and crowdsourced bike trailers",
    no_args_is_help=True,
)
console = Console(stderr=True)


@dataclass
class GlobalOptions:
    seed: int = 0
    jobs: int = 1
    output_dir: Path = Path(settings.OUTPUT_DIR)


class PolicyChoice(str, Enum):
    DRRPVT = "drrpvt"
    DRRPV = "drrpv"
    DRRPT = "drrpt"
    NOOP = "noop"
    ALL = "all"


class ExperimentName(str, Enum):
    MAIN_STATIONS = "main-stations"
    RUNTIME_SWEEP = "runtime-sweep"
    RATIO_SWEEP = "ratio-sweep"


class RatioAxis(str, Enum):
    MAIN_STATIONS = "main-stations"
    VEHICLES = "vehicles"
    TRAILERS = "trailers"


@app.callback()
def main(
    ctx: typer.Context,
    seed: int = typer.Option(0, "--seed", help="Seed for every random choice"),
    jobs: int = typer.Option(1, "--jobs", "-j", min=1, help="Parallel workers for sweeps and cluster solves"),
    output_dir: Path = typer.Option(Path(settings.OUTPUT_DIR), "--output-dir", "-o", help="Artifact directory"),
):
    """Dynamic bike repositioning with carrier vehicles and crowdsourced bike trailers."""
    ctx.obj = GlobalOptions(seed=seed, jobs=jobs, output_dir=output_dir)


def _options(ctx: typer.Context, seed: Optional[int] = None) -> GlobalOptions:
    opts = ctx.obj if isinstance(ctx.obj, GlobalOptions) else GlobalOptions()
    if seed is not None:
        opts = GlobalOptions(seed=seed, jobs=opts.jobs, output_dir=opts.output_dir)
    return opts


def _fail(command: str, error: Exception, opts: GlobalOptions) -> None:
    """Print the failure envelope as JSON, save it as error.json and exit 1."""
    output = CommandOutput.from_exception(command, error)
    text = output.model_dump_json(indent=2)
    typer.echo(text)
    try:
        path = Path(opts.output_dir) / command / "error.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
    except OSError:
        pass
    raise typer.Exit(1)


def _print_paths(paths: list[Path]) -> None:
    for path in paths:
        typer.echo(str(path))


@app.command()
def ingest(
    ctx: typer.Context,
    stations: Path = typer.Option(..., "--stations", "-s", exists=True, help="Station CSV"),
    trips: Path = typer.Option(..., "--trips", "-t", exists=True, help="Trip CSV"),
    mapping: Optional[Path] = typer.Option(None, "--mapping", "-m", help="JSON column mapping"),
    epoch_minutes: int = typer.Option(30, "--epoch-minutes", help="Epoch length"),
    window_start: int = typer.Option(0, "--window-start", help="First hour of the day window"),
    window_end: int = typer.Option(24, "--window-end", help="Hour the day window ends"),
    vehicles: int = typer.Option(2, "--vehicles", help="Carrier vehicles"),
    trailers: int = typer.Option(7, "--trailers", help="Bike trailers"),
    budget: float = typer.Option(20.0, "--budget", help="Trailer budget"),
    name: str = typer.Option("ingested", "--name", help="Instance name"),
):
    """Build an instance from station and trip CSVs."""
    init_default_logging()
    opts = _options(ctx)
    try:
        from drrpvt.artifacts import ArtifactStore
        from drrpvt.demand import fit_empirical, load_column_mapping, read_trips
        from drrpvt.ingest import SyntheticConfig, build_instance, read_stations

        columns = load_column_mapping(mapping)
        records, station_issues = read_stations(stations, columns)
        trip_records, trip_issues = read_trips(trips, columns)
        model = fit_empirical(trip_records, [r.id for r in records], epoch_minutes, (window_start, window_end))
        config = SyntheticConfig(n_vehicles=vehicles, n_trailers=trailers, budget=budget, seed=opts.seed)
        instance = build_instance(records, model, config, name)

        store = ArtifactStore(opts.output_dir, "ingest")
        store.save_metadata(
            {"stations": stations, "trips": trips, "mapping": mapping}, opts.seed, [stations, trips, mapping]
        )
        store.save_instance(instance)
        diagnostics = CommandOutput.success(
            {"stations": len(records), "fit": model.diagnostics.model_dump()},
            warnings=station_issues + trip_issues,
            trace={"command": "ingest", "stations": str(stations), "trips": str(trips)},
        )
        store.save_json("diagnostics.json", diagnostics)
    except Exception as e:
        _fail("ingest", e, opts)

    console.print(
        f"[green]{len(records)} stations, {model.diagnostics.retained} trips over {model.diagnostics.days} day(s); "
        f"{len(station_issues) + len(trip_issues)} rows rejected[/green]"
    )
    _print_paths(store.written)


@app.command()
def synth(
    ctx: typer.Context,
    stations: int = typer.Option(60, "--stations", help="Base stations"),
    vehicles: int = typer.Option(2, "--vehicles", help="Carrier vehicles"),
    trailers: int = typer.Option(7, "--trailers", help="Bike trailers"),
    horizon: int = typer.Option(12, "--horizon", help="Epochs"),
    intensity: float = typer.Option(2.0, "--intensity", help="Mean departures per station and epoch"),
    extent_km: float = typer.Option(6.0, "--extent-km", help="Side of the service area"),
    budget: float = typer.Option(20.0, "--budget", help="Trailer budget"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Overrides the global seed"),
    name: Optional[str] = typer.Option(None, "--name", help="Instance name"),
):
    """Generate a synthetic instance."""
    init_default_logging()
    opts = _options(ctx, seed)
    try:
        from drrpvt.artifacts import ArtifactStore
        from drrpvt.ingest import SyntheticConfig, generate_synthetic

        config = SyntheticConfig(
            n_stations=stations,
            n_vehicles=vehicles,
            n_trailers=trailers,
            horizon=horizon,
            demand_intensity=intensity,
            extent_km=extent_km,
            budget=budget,
            seed=opts.seed,
        )
        instance = generate_synthetic(config, name)
        store = ArtifactStore(opts.output_dir, "synth")
        store.save_metadata(config.model_dump(mode="json"), opts.seed)
        store.save_instance(instance)
    except Exception as e:
        _fail("synth", e, opts)
    _print_paths(store.written)


@app.command()
def cluster(
    ctx: typer.Context,
    instance_path: Path = typer.Option(..., "--instance", "-i", exists=True, help="Instance JSON"),
    k: Optional[int] = typer.Option(None, "--k", help="Main stations (default: one per 5 stations)"),
    max_diameter_km: Optional[float] = typer.Option(None, "--max-diameter-km", help="Split wider clusters"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Overrides the global seed"),
):
    """Compute main stations."""
    init_default_logging()
    opts = _options(ctx, seed)
    try:
        from drrpvt.artifacts import ArtifactStore
        from drrpvt.clustering import clustering_frame, compute_main_stations
        from drrpvt.ingest import load_instance

        instance = load_instance(instance_path)
        clustering = compute_main_stations(instance.stations, k, opts.seed, max_diameter_km)
        store = ArtifactStore(opts.output_dir, "cluster")
        store.save_metadata({"instance": instance_path, "k": k, "max_diameter_km": max_diameter_km}, opts.seed, instance_path)
        store.save_frame("clustering.csv", clustering_frame(clustering, instance.stations))
        store.save_json("clustering.json", clustering)
    except Exception as e:
        _fail("cluster", e, opts)

    console.print(f"[green]{clustering.k} main stations for {instance.n_stations} stations[/green]")
    _print_paths(store.written)


@app.command()
def solve(
    ctx: typer.Context,
    instance_path: Path = typer.Option(..., "--instance", "-i", exists=True, help="Instance JSON"),
    solver: str = typer.Option("milp", "--solver", help="milp, ldd or clustered"),
    mode: OperatingMode = typer.Option(OperatingMode.JOINT, "--mode", help="Resources the plan may use"),
    backend: Optional[str] = typer.Option(None, "--backend", help="auto, native or highs"),
    k: Optional[int] = typer.Option(None, "--k", help="Main stations for the clustered solver"),
    gamma0: float = typer.Option(settings.LDD_GAMMA0, "--gamma0", help="Initial LDD step size"),
    delta: float = typer.Option(settings.LDD_RELATIVE_DELTA, "--delta", help="Relative LDD stopping gap"),
    max_iterations: int = typer.Option(settings.LDD_MAX_ITERATIONS, "--max-iterations", help="LDD iteration cap"),
    time_limit: float = typer.Option(settings.MILP_TIME_LIMIT_S, "--time-limit", help="Seconds per MILP solve"),
    dump_milp: Optional[Path] = typer.Option(None, "--dump-milp", help="Also write the MILP as JSON to this path"),
):
    """Plan the whole horizon once and write the solution."""
    init_default_logging()
    opts = _options(ctx)
    try:
        from drrpvt.artifacts import ArtifactStore
        from drrpvt.ingest import load_instance
        from drrpvt.ldd import LddParams
        from drrpvt.model import build_milp
        from drrpvt.orchestrator import solve_instance, write_solve_artifacts
        from drrpvt.util.canonical_json import canonical_dumps

        instance = load_instance(instance_path)
        params = LddParams(
            gamma0=gamma0,
            relative_delta=delta,
            max_iterations=max_iterations,
            time_limit_s=time_limit,
        )
        outcome = solve_instance(instance, solver, mode, params, backend, k, opts.seed, opts.jobs)

        store = ArtifactStore(opts.output_dir, "solve")
        store.save_metadata(
            {"instance": instance_path, "solver": solver, "mode": mode.value, "backend": backend, "k": k},
            opts.seed,
            instance_path,
        )
        write_solve_artifacts(store, outcome, instance)
        if dump_milp is not None:
            dump_milp.parent.mkdir(parents=True, exist_ok=True)
            dump_milp.write_text(canonical_dumps(build_milp(instance, mode).to_json_dict()), encoding="utf-8")
    except Exception as e:
        _fail("solve", e, opts)

    table = Table(title=f"{outcome.solver} / {outcome.mode}")
    table.add_column("Objective")
    table.add_column("Wall time (s)")
    table.add_column("Optimal")
    table.add_row(f"{outcome.objective:.4f}", f"{outcome.wall_time:.2f}", str(outcome.optimal))
    console.print(table)
    _print_paths(store.written)


@app.command()
def simulate(
    ctx: typer.Context,
    instance_path: Path = typer.Option(..., "--instance", "-i", exists=True, help="Instance JSON"),
    policy: PolicyChoice = typer.Option(PolicyChoice.DRRPVT, "--policy", "-p", help="Policy, or all"),
    planner: str = typer.Option("clustered", "--planner", help="clustered, ldd or exact"),
    k: Optional[int] = typer.Option(None, "--k", help="Main stations for the clustered planner"),
    window: int = typer.Option(settings.PLANNING_WINDOW, "--window", help="Epochs planned ahead"),
    sampling: str = typer.Option("poisson", "--sampling", help="poisson or bootstrap"),
    time_limit: float = typer.Option(settings.MILP_TIME_LIMIT_S, "--time-limit", help="Seconds per MILP solve"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Overrides the global seed"),
):
    """Simulate a policy over the horizon on a sampled demand scenario."""
    init_default_logging()
    opts = _options(ctx, seed)
    try:
        from drrpvt.artifacts import ArtifactStore
        from drrpvt.ingest import load_instance
        from drrpvt.ldd import LddParams
        from drrpvt.orchestrator import simulate as run_simulation

        instance = load_instance(instance_path)
        store = ArtifactStore(opts.output_dir, "simulate")
        store.save_metadata(
            {"instance": instance_path, "policy": policy.value, "planner": planner, "k": k, "window": window},
            opts.seed,
            instance_path,
        )
        reports, comparison = run_simulation(
            instance,
            policy.value,
            store,
            opts.seed,
            planner=planner,
            clusters=k,
            window=window,
            params=LddParams(time_limit_s=time_limit),
            sampling=sampling,
            jobs=opts.jobs,
        )
    except Exception as e:
        _fail("simulate", e, opts)

    table = Table(title=f"Simulation of '{instance.name}' (seed {opts.seed})")
    for column in ("Policy", "Profit", "Revenue", "Routing", "Payments", "Served", "Lost"):
        table.add_column(column)
    for report in reports.values():
        table.add_row(
            report.policy,
            f"{report.profit:.3f}",
            f"{report.revenue:.3f}",
            f"{report.routing_cost:.3f}",
            f"{report.trailer_payments:.3f}",
            str(report.served),
            str(report.lost),
        )
    console.print(table)
    if comparison is not None:
        console.print(Panel.fit(
            "  ".join(f"{k}={'n/a' if v is None else f'{v:.2%}'}" for k, v in comparison.as_dict().items()),
            title="Joint policy against baselines",
            border_style="blue",
        ))
    _print_paths(store.written)


@app.command()
def experiment(
    ctx: typer.Context,
    name: Optional[ExperimentName] = typer.Argument(None, help="main-stations, runtime-sweep or ratio-sweep"),
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", exists=True, help="YAML experiment config"),
    axis: RatioAxis = typer.Option(RatioAxis.MAIN_STATIONS, "--axis", help="Ratio sweep axis"),
    stations: int = typer.Option(30, "--stations", help="Base stations"),
    clusters: int = typer.Option(6, "--clusters", help="Main stations"),
    sizes: str = typer.Option("5,10,15,20,25,30", "--sizes", help="Station counts for the runtime sweep"),
    ratios: str = typer.Option("2,3,5,10", "--ratios", help="Ratios for the ratio sweep"),
    horizon: int = typer.Option(4, "--horizon", help="Epochs per instance"),
    seeds: Optional[str] = typer.Option(None, "--seeds", help="Comma-separated seeds (default: the global seed)"),
    time_limit: float = typer.Option(settings.MILP_TIME_LIMIT_S, "--time-limit", help="Seconds per solve"),
    no_simulate: bool = typer.Option(False, "--no-simulate", help="Skip simulated profit in main-stations"),
):
    """Run a sweep on synthetic instances and write its table as CSV."""
    init_default_logging()
    opts = _options(ctx)
    if name is None and config_path is None:
        raise typer.BadParameter("give an experiment name or --config")
    try:
        from drrpvt.artifacts import ArtifactStore
        from drrpvt.orchestrator import ExperimentConfig, run_experiment

        if config_path is not None:
            config = ExperimentConfig.from_yaml(config_path)
        else:
            config = ExperimentConfig(
                name=name.value,
                seeds=[int(s) for s in seeds.split(",")] if seeds else [opts.seed],
                stations=stations,
                clusters=clusters,
                sizes=[int(s) for s in sizes.split(",") if s.strip()],
                axis=axis.value,
                ratios=[float(r) for r in ratios.split(",") if r.strip()],
                horizon=horizon,
                time_limit_s=time_limit,
                simulate=not no_simulate,
            )
        result = run_experiment(config, opts.jobs)
        store = ArtifactStore(opts.output_dir, "experiment")
        store.save_metadata(config.model_dump(mode="json"), opts.seed, config_path)
        store.save_frame(f"{config.name}.csv", result.table)
        store.save_json(f"{config.name}.json", result.summary)
    except Exception as e:
        _fail("experiment", e, opts)

    console.print(_frame_table(result.table, title=config.name))
    _print_paths(store.written)


def _frame_table(frame, title: str, max_rows: int = 20) -> Table:
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.head(max_rows).itertuples(index=False):
        table.add_row(*(f"{v:.4g}" if isinstance(v, float) else str(v) for v in row))
    return table


@app.command()
def report(
    ctx: typer.Context,
    directory: Path = typer.Argument(..., exists=True, file_okay=False, help="Run directory"),
):
    """Render a run directory's JSON and CSV artifacts as tables."""
    init_default_logging()
    opts = _options(ctx)
    try:
        import json

        import pandas as pd

        from drrpvt.artifacts import list_artifacts

        paths = list_artifacts(directory)
        for path in paths:
            name = str(path.relative_to(directory))
            if path.suffix == ".csv":
                console.print(_frame_table(pd.read_csv(path), title=name))
                continue
            with open(path) as f:
                data = json.load(f)
            table = Table(title=name)
            table.add_column("Key")
            table.add_column("Value")
            if isinstance(data, dict):
                for key, value in data.items():
                    text = json.dumps(value) if isinstance(value, (dict, list)) else str(value)
                    table.add_row(str(key), text if len(text) <= 80 else text[:77] + "...")
            else:
                table.add_row("(value)", str(data)[:80])
            console.print(table)
    except Exception as e:
        _fail("report", e, opts)
    if not paths:
        console.print(f"[yellow]No JSON or CSV artifacts under {directory}[/yellow]")


if __name__ == "__main__":
    app()
