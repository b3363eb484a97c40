"""Command-line client for the simulation service.

The CLI is a thin client over the service layer: it resolves a config
(preset or YAML file), sends it through the same request/response models
the HTTP endpoints use, and writes whatever comes back to disk. By default
requests are handled in-process, so no server is needed; pass ``--server``
to talk to a running instance instead. ``CACHEBANDIT_OUT`` sets the
default output directory.
"""

from __future__ import annotations

import csv as _csv
import os
from pathlib import Path

import click

from .config import ExperimentConfig, SweepSpec, load_config
from .presets import PRESET_NAMES
from .service import handlers
from .service.schemas import (
    SimulateRequest,
    SimulateResponse,
    SolveRequest,
    ValidateSpoRequest,
    ValidateSpoResponse,
)

OUT_ENV = "CACHEBANDIT_OUT"


class ServiceClient:
    """Dispatches requests either in-process or to a remote server."""

    def __init__(self, server: str | None = None):
        self.server = server.rstrip("/") if server else None
        if self.server:
            import httpx

            self._http = httpx.Client(base_url=self.server, timeout=None)

    def simulate(self, req: SimulateRequest) -> SimulateResponse:
        if self.server is None:
            return handlers.simulate(req)
        r = self._http.post("/simulate", json=req.model_dump(mode="json"))
        r.raise_for_status()
        return SimulateResponse.model_validate(r.json())

    def solve(self, req: SolveRequest):
        if self.server is None:
            return handlers.solve(req)
        r = self._http.post("/solve", json=req.model_dump(mode="json"))
        r.raise_for_status()
        return r.json()

    def validate_spo(self, req: ValidateSpoRequest) -> ValidateSpoResponse:
        if self.server is None:
            return handlers.validate_spo(req)
        r = self._http.post("/spo/validate", json=req.model_dump(mode="json"))
        r.raise_for_status()
        return ValidateSpoResponse.model_validate(r.json())


def _out_dir(out: str | None, default_name: str) -> Path:
    base = out or os.environ.get(OUT_ENV) or "."
    path = Path(base)
    if out is None and os.environ.get(OUT_ENV) is None:
        path = path / f"{default_name}_results"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_config(preset_name, config_path, scale, seed):
    if (preset_name is None) == (config_path is None):
        raise click.UsageError("provide exactly one of --preset or --config")
    if preset_name is not None:
        try:
            return handlers.preset_config(preset_name, scale=scale, seed=seed)
        except KeyError:
            raise click.ClickException(
                f"unknown preset {preset_name!r}; choose from {', '.join(PRESET_NAMES)}"
            )
    cfg = load_config(config_path)
    updates = {}
    if seed is not None:
        updates["master_seed"] = seed
    if updates:
        cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **updates})
    return cfg


def _write(path: Path, content: str):
    path.write_text(content, encoding="utf-8")
    click.echo(f"wrote {path}")


def _run_simulation(client: ServiceClient, cfg, out_dir: Path):
    resp = client.simulate(SimulateRequest(config=cfg))
    _write(out_dir / "results.csv", resp.results_csv)
    _write(out_dir / "config.echo", resp.config_echo)
    for fname, text in sorted(resp.traces.items()):
        _write(out_dir / fname, text)
    for fname, text in sorted(resp.plots.items()):
        _write(out_dir / fname, text)
    degraded = {k: v for k, v in resp.oracle_statuses.items() if v != "optimal"}
    if degraded:
        click.echo(f"note: oracle not proven optimal at {degraded}")
    click.echo(f"fingerprint: {resp.fingerprint}")


def _run_spo_validation(client: ServiceClient, req: ValidateSpoRequest, out_dir: Path | None):
    resp = client.validate_spo(req)
    click.echo(f"instances:         {resp.instances}")
    click.echo(f"mean value ratio:  {resp.mean_ratio:.6f}")
    click.echo(f"min value ratio:   {resp.min_ratio:.6f}")
    click.echo(f"closed optimally:  {100 * resp.optimal_fraction:.1f}%")
    click.echo(f"median speedup:    {resp.median_speedup:.1f}x (greedy vs B&B)")
    click.echo(f"bound violations:  {resp.bound_violations}")
    if out_dir is not None:
        _write(out_dir / "spo_validation.csv", resp.records_csv)


@click.group()
def main():
    """Cache placement experiments under unknown popularity."""


@main.command()
@click.option("--preset", "preset_name", type=str, default=None, help="Preset name.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--scale", type=float, default=0.01, show_default=True,
              help="Replication scale factor for presets.")
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option("--server", type=str, default=None, help="Remote service URL.")
def simulate(preset_name, config_path, scale, seed, out, server):
    """Run a preset or config file and write results.csv and friends."""
    cfg = _resolve_config(preset_name, config_path, scale, seed)
    client = ServiceClient(server)
    out_dir = _out_dir(out, getattr(cfg, "name", "run"))
    if isinstance(cfg, ExperimentConfig):
        _run_simulation(client, cfg, out_dir)
    else:
        req = ValidateSpoRequest(config=cfg)
        _run_spo_validation(client, req, out_dir)


@main.command()
@click.option("--preset", "preset_name", type=str, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--axis", type=click.Choice(["gamma", "cache_size", "users", "files"]),
              required=True)
@click.option("--grid", type=str, required=True,
              help="Comma-separated sweep values, e.g. 1,2.5,5,10,20.")
@click.option("--scale", type=float, default=0.01, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--server", type=str, default=None)
def sweep(preset_name, config_path, axis, grid, scale, seed, out, server):
    """Like simulate, with an explicit sweep axis and grid."""
    cfg = _resolve_config(preset_name, config_path, scale, seed)
    if not isinstance(cfg, ExperimentConfig):
        raise click.ClickException("sweep requires a simulation config")
    try:
        values = [float(v) for v in grid.split(",") if v.strip()]
        cfg = ExperimentConfig.model_validate(
            {**cfg.model_dump(), "sweep": SweepSpec(axis=axis, values=values).model_dump()}
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))
    client = ServiceClient(server)
    _run_simulation(client, cfg, _out_dir(out, cfg.name))


@main.command()
@click.argument("instance_csv", type=click.Path(exists=True))
@click.option("--capacity", type=int, required=True)
@click.option("--solver", type=click.Choice(["greedy", "bnb", "bruteforce", "lp"]),
              default="bnb", show_default=True)
@click.option("--timeout", "timeout_s", type=float, default=50.0, show_default=True)
@click.option("--server", type=str, default=None)
def solve(instance_csv, capacity, solver, timeout_s, server):
    """Solve one placement instance from a CSV of value,weight rows."""
    values, weights = _read_instance(instance_csv)
    client = ServiceClient(server)
    try:
        resp = client.solve(
            SolveRequest(values=values, weights=weights, capacity=capacity,
                         solver=solver, timeout_s=timeout_s)
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))
    data = resp if isinstance(resp, dict) else resp.model_dump()
    click.echo(f"chosen indices: {data['chosen']}")
    click.echo(f"value:          {data['value']}")
    click.echo(f"weight:         {data['weight']}")
    click.echo(f"status:         {data['status']}")
    click.echo(
        f"guarantee:      alpha={data['alpha_guarantee']} beta={data['beta_guarantee']}"
    )


@main.command("validate-spo")
@click.option("--instances", type=int, default=200, show_default=True)
@click.option("--timeout", "timeout_s", type=float, default=5.0, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Also write the per-instance CSV here.")
@click.option("--server", type=str, default=None)
def validate_spo(instances, timeout_s, seed, out, server):
    """Compare greedy and branch&bound on random placement instances."""
    client = ServiceClient(server)
    req = ValidateSpoRequest(instances=instances, timeout_s=timeout_s, seed=seed)
    out_dir = _out_dir(out, "spo_validation") if out is not None else None
    _run_spo_validation(client, req, out_dir)


@main.command()
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


def _read_instance(path: str) -> tuple[list[float], list[int]]:
    values: list[float] = []
    weights: list[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(_csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise click.ClickException(f"line {i + 1}: expected value,weight")
            try:
                v, w = float(row[0]), int(row[1])
            except ValueError:
                if i == 0:
                    continue  # header row
                raise click.ClickException(f"line {i + 1}: malformed value,weight row")
            if w <= 0:
                raise click.ClickException(f"line {i + 1}: weights must be positive")
            if v < 0:
                raise click.ClickException(f"line {i + 1}: values must be nonnegative")
            values.append(v)
            weights.append(w)
    if not values:
        raise click.ClickException("instance CSV contains no rows")
    return values, weights


if __name__ == "__main__":
    main()
