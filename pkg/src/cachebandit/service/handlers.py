"""Endpoint implementations, callable directly or through the HTTP app.

Keeping these as plain functions over the request/response models lets the
CLI run in-process by default (no server round-trip) while the FastAPI
routes stay one-liners.
"""

from __future__ import annotations

import numpy as np

from .. import spo
from ..config import ExperimentConfig, SpoValidationConfig
from ..presets import PRESET_NAMES, preset
from ..runner import run_experiment, validation_csv
from ..validation import run_spo_validation
from .schemas import (
    PresetSummary,
    SimulateRequest,
    SimulateResponse,
    SolveRequest,
    SolveResponse,
    ValidateSpoRequest,
    ValidateSpoResponse,
)

__all__ = ["solve", "simulate", "validate_spo", "list_presets", "preset_config"]


def solve(req: SolveRequest) -> SolveResponse:
    inst = spo.SpoInstance(
        np.asarray(req.values, dtype=np.float64),
        np.asarray(req.weights, dtype=np.int64),
        req.capacity,
    )
    if req.solver == "greedy":
        sol = spo.solve_greedy(inst)
    elif req.solver == "bruteforce":
        sol = spo.solve_bruteforce(inst)
    elif req.solver == "lp":
        lp = spo.solve_lp(inst)
        frac = {} if lp.frac_index is None else {lp.frac_index: lp.beta}
        chosen = np.flatnonzero(lp.x >= 1.0)
        return SolveResponse(
            chosen=chosen.tolist(),
            value=lp.value,
            weight=int(inst.weights[chosen].sum()),
            status="fractional" if frac else "optimal",
            alpha_guarantee=1.0,
            beta_guarantee=1.0,
        )
    else:
        sol = spo.solve_bnb(inst, timeout_s=req.timeout_s)
    return SolveResponse(
        chosen=sol.chosen.tolist(),
        value=sol.value,
        weight=sol.weight,
        status=sol.status,
        alpha_guarantee=sol.alpha_guarantee,
        beta_guarantee=sol.beta_guarantee,
    )


def simulate(req: SimulateRequest) -> SimulateResponse:
    artifacts = run_experiment(req.config)
    return SimulateResponse(
        name=artifacts.name,
        fingerprint=artifacts.fingerprint,
        results_csv=artifacts.results_csv,
        config_echo=artifacts.config_echo,
        traces=artifacts.traces,
        plots=artifacts.plots,
        oracle_statuses=artifacts.oracle_statuses,
    )


def validate_spo(req: ValidateSpoRequest) -> ValidateSpoResponse:
    result = run_spo_validation(req.resolved())
    return ValidateSpoResponse(
        instances=result.instances,
        mean_ratio=result.mean_ratio,
        min_ratio=result.min_ratio,
        optimal_fraction=result.optimal_fraction,
        median_speedup=result.median_speedup,
        bound_violations=result.bound_violations,
        records_csv=validation_csv(result),
    )


def list_presets() -> list[PresetSummary]:
    out = []
    for name in PRESET_NAMES:
        cfg = preset(name, scale=0.001)
        kind = "spo_validation" if isinstance(cfg, SpoValidationConfig) else "experiment"
        out.append(PresetSummary(name=name, kind=kind))
    return out


def preset_config(name: str, scale: float = 1.0, seed: int | None = None):
    """Resolved preset config; raises KeyError for unknown names."""
    return preset(name, scale=scale, seed=seed)
