"""Experiment orchestration and result serialization.

``run_experiment`` expands a config into sweep points, runs every policy
at every point through the replication engine, and renders the artifacts
of record: ``results.csv`` (one row per sweep value, policy, metric and
checkpoint), optional per-policy ``trace_<label>.csv`` period series,
``config.echo`` (the resolved config, YAML), and optional SVG line charts.
Everything is returned in memory; writing to disk is the caller's job
(the CLI client), so the service stays stateless.

The CSV is the contract of record: fixed column order, floats rendered
with ``repr`` (shortest round-trip), newline-joined with ``\\n``. Reruns
with the same config and master seed are byte-identical regardless of
parallelism.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .catalog import zipf_profile
from .config import ExperimentConfig, dump_config, resolve_sweep
from .validation import SpoValidationResult

__all__ = ["RESULT_COLUMNS", "TRACE_COLUMNS", "RunArtifacts", "run_experiment", "validation_csv"]

RESULT_COLUMNS = (
    "sweep_value",
    "policy",
    "metric",
    "checkpoint",
    "mean",
    "stderr",
    "replications",
    "master_seed",
)
TRACE_COLUMNS = (
    "period",
    "expected_reward_mean",
    "acc_expected_reward_mean",
    "regret_mean",
    "realized_reward_mean",
    "acc_realized_reward_mean",
)
VALIDATION_COLUMNS = (
    "num_files",
    "gamma",
    "capacity",
    "greedy_value",
    "bnb_value",
    "value_ratio",
    "gap_bound",
    "bnb_status",
    "greedy_seconds",
    "bnb_seconds",
)

ORACLE_TIMEOUT_S = 20.0


@dataclass
class RunArtifacts:
    """Everything one experiment run produces, as serialized text."""

    name: str
    fingerprint: str
    results_csv: str
    config_echo: str
    traces: dict[str, str] = field(default_factory=dict)
    plots: dict[str, str] = field(default_factory=dict)
    oracle_statuses: dict[str, str] = field(default_factory=dict)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def run_experiment(config: ExperimentConfig) -> RunArtifacts:
    """Run every (sweep point, policy) cell and serialize the results."""
    fingerprint = config.fingerprint()
    points = resolve_sweep(config)
    rows = []
    traces: dict[str, str] = {}
    oracle_statuses: dict[str, str] = {}
    sweep_results: dict[str, list[tuple[float, engine.AggregateResult]]] = {}

    for point_index, (sweep_value, point) in enumerate(points):
        catalog = point.build_catalog(point_index)
        profile = zipf_profile(catalog.num_files, point.gamma, point.users)
        oracle = engine.oracle_reward(
            catalog, profile, point.cache_size, timeout_s=ORACLE_TIMEOUT_S
        )
        oracle_statuses[f"point_{point_index}"] = oracle[1]
        checkpoints = sorted(point.regret_checkpoints) or [point.horizon]
        keep_series = config.traces and config.sweep.axis == "none"

        for policy_index, policy in enumerate(point.policies):
            agg = engine.run_replications(
                policy.to_spec(),
                catalog,
                profile,
                point.cache_size,
                point.horizon,
                point.replications,
                point.master_seed,
                burn_in=point.burn_in,
                checkpoints=checkpoints,
                parallelism=point.parallelism,
                keep_series=keep_series,
                oracle=oracle,
                point_key=point_index,
                policy_key=policy_index,
                config_fingerprint=fingerprint,
            )
            sweep_results.setdefault(policy.name, []).append((sweep_value, agg))

            rows.append(
                (
                    sweep_value,
                    policy.name,
                    "hit_rate_pct",
                    point.horizon,
                    agg.hit_rate_mean,
                    agg.hit_rate_stderr,
                    agg.replications,
                    point.master_seed,
                )
            )
            for j, cp in enumerate(agg.checkpoints):
                rows.append(
                    (
                        sweep_value,
                        policy.name,
                        "regret",
                        cp,
                        float(agg.regret_mean[j]),
                        float(agg.regret_stderr[j]),
                        agg.replications,
                        point.master_seed,
                    )
                )
                rows.append(
                    (
                        sweep_value,
                        policy.name,
                        "acc_reward",
                        cp,
                        float(agg.acc_reward_mean[j]),
                        float(agg.acc_reward_stderr[j]),
                        agg.replications,
                        point.master_seed,
                    )
                )

            if keep_series and agg.series is not None:
                traces[f"trace_{policy.name}.csv"] = _trace_csv(point.horizon, agg)

    artifacts = RunArtifacts(
        name=config.name,
        fingerprint=fingerprint,
        results_csv=_csv(RESULT_COLUMNS, rows),
        config_echo=dump_config(config),
        traces=traces,
        oracle_statuses=oracle_statuses,
    )
    if config.plots:
        artifacts.plots[f"plot_{config.name}.svg"] = _render_plot(
            config, sweep_results, fingerprint
        )
    return artifacts


def _trace_csv(horizon: int, agg: engine.AggregateResult) -> str:
    s = agg.series
    rows = zip(
        range(1, horizon + 1),
        s["expected_mean"].tolist(),
        s["acc_expected_mean"].tolist(),
        s["regret_mean"].tolist(),
        s["realized_mean"].tolist(),
        s["acc_realized_mean"].tolist(),
    )
    return _csv(TRACE_COLUMNS, rows)


def _render_plot(config, sweep_results, fingerprint) -> str:
    """One SVG line chart: period series, or hit-rate over the sweep axis."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = fingerprint

    fig, ax = plt.subplots(figsize=(7, 4.5))
    if config.sweep.axis == "none":
        for name, entries in sweep_results.items():
            agg = entries[0][1]
            if agg.series is not None:
                ax.plot(
                    np.arange(1, config.horizon + 1),
                    agg.series["expected_mean"],
                    label=name,
                    linewidth=1.0,
                )
            else:
                ax.plot(
                    agg.checkpoints, agg.acc_reward_mean / np.array(agg.checkpoints),
                    marker="o", label=name,
                )
        ax.set_xlabel("period")
        ax.set_ylabel("expected reward per period")
    else:
        for name, entries in sweep_results.items():
            xs = [v for v, _ in entries]
            ys = [a.hit_rate_mean for _, a in entries]
            es = [a.hit_rate_stderr for _, a in entries]
            ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=name)
        ax.set_xlabel(config.sweep.axis)
        ax.set_ylabel("hit rate (%)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    ax.set_title(config.name)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def validation_csv(result: SpoValidationResult) -> str:
    rows = [
        (
            r.num_files,
            r.gamma,
            r.capacity,
            r.greedy_value,
            r.bnb_value,
            r.value_ratio,
            r.gap_bound,
            r.bnb_status,
            r.greedy_seconds,
            r.bnb_seconds,
        )
        for r in result.records
    ]
    return _csv(VALIDATION_COLUMNS, rows)
