"""Period loop, reward accounting, regret, and the replication driver.

A period has a user-request phase followed by a zero-duration replacement
phase: demands are sampled, rewards are credited for cached files only,
the policy observes the cached files' demands, and then chooses the next
cache. Expected rewards (true mean demand times size, summed over the
cache) drive the regret series; realized rewards drive the hit-rate.

Episodes are deterministic functions of (seed, configuration). Every
episode owns two RNG streams spawned from its seed: one for demand
sampling and one for policy randomness, so demand realizations are paired
across policies run under the same replication seed. Replications are
embarrassingly parallel and are reduced in replication order, making
aggregate results independent of worker scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import policies as pol
from . import spo
from .catalog import Catalog, PopularityProfile, sample_demands

__all__ = [
    "EpisodeTrace",
    "RegretSeries",
    "AggregateResult",
    "run_episode",
    "regret_of",
    "hit_rate",
    "oracle_reward",
    "run_replications",
]


@dataclass
class EpisodeTrace:
    """Per-period record of one episode.

    ``expected[t]`` is the true expected reward of the cache held in
    period ``t+1``, ``realized[t]`` the bytes actually served from it, and
    ``demanded[t]`` the bytes requested in total (served or not).
    """

    policy: str
    horizon: int
    expected: np.ndarray
    realized: np.ndarray
    demanded: np.ndarray
    acc_expected: np.ndarray
    caches: np.ndarray | None = None

    def __post_init__(self):
        if not (
            len(self.expected) == len(self.realized) == len(self.demanded) == self.horizon
        ):
            raise ValueError("per-period series must have horizon entries")
        if np.any(self.realized > self.demanded):
            raise ValueError("cannot serve more bytes than were demanded")


@dataclass
class RegretSeries:
    """Accumulated expected-reward gap to the informed optimum, per period."""

    oracle_per_period: float
    values: np.ndarray


@dataclass
class AggregateResult:
    """Seeded replication summary for one policy at one parameter point."""

    policy: str
    replications: int
    master_seed: int
    hit_rate_mean: float
    hit_rate_stderr: float
    checkpoints: list[int]
    regret_mean: np.ndarray
    regret_stderr: np.ndarray
    acc_reward_mean: np.ndarray
    acc_reward_stderr: np.ndarray
    oracle_per_period: float
    oracle_status: str
    config_fingerprint: str = ""
    series: dict[str, np.ndarray] | None = None


def oracle_reward(
    catalog: Catalog,
    profile: PopularityProfile,
    capacity: int,
    solver: str = "bnb",
    timeout_s: float = 30.0,
) -> tuple[float, str]:
    """Best known single-period expected reward for the informed policy."""
    inst = spo.SpoInstance(profile.theta * catalog.sizes, catalog.sizes, capacity)
    if solver == "bnb":
        sol = spo.solve_bnb(inst, timeout_s=timeout_s)
    elif solver == "greedy":
        sol = spo.solve_greedy(inst)
    else:
        raise ValueError(f"unknown oracle solver {solver!r}")
    return sol.value, sol.status


def run_episode(
    spec: pol.PolicySpec,
    catalog: Catalog,
    profile: PopularityProfile,
    capacity: int,
    horizon: int,
    seed,
    *,
    policy_seed=None,
    record_caches: bool = False,
) -> EpisodeTrace:
    """Simulate one seeded episode of ``horizon`` periods.

    ``seed`` may be an int or a ``numpy.random.SeedSequence``; it is split
    into independent demand and policy streams. Supplying ``policy_seed``
    dedicates ``seed`` to the demand stream instead, which lets callers
    pair demand realizations across policies while keeping policy
    randomness distinct. Bandit policies start with the deterministic
    warm-up that caches every file once (those periods count toward the
    horizon and the period counter) unless ``warm_start`` seeds their
    estimates from the true profile instead.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    if policy_seed is None:
        demand_rng, policy_rng = (np.random.default_rng(c) for c in ss.spawn(2))
    else:
        demand_rng = np.random.default_rng(ss)
        policy_rng = np.random.default_rng(policy_seed)

    num_files = catalog.num_files
    sizes = catalog.sizes
    theta_sizes = profile.theta * sizes
    users = profile.users

    spec = pol.resolve_gamma_hat(spec, profile.gamma)
    state = pol.PolicyState.fresh(num_files)

    warmup: list[np.ndarray] = []
    if spec.kind in ("cucb", "mcucb"):
        if spec.warm_start:
            state.reward_mean = theta_sizes.copy()
            state.placements = np.ones(num_files, dtype=np.int64)
            state.period = 1
        else:
            warmup = pol.warmup_schedule(catalog, capacity)

    true_values = theta_sizes if spec.kind == "iub" else None
    # the informed placement is stationary; solve it once per episode
    iub_mask = (
        pol.select_cache(spec, state, catalog, capacity, policy_rng, users, true_values=true_values)
        if spec.kind == "iub"
        else None
    )

    fit_pending = spec.kind == "mcucb" and spec.fit_gamma

    def next_cache(t: int) -> np.ndarray:
        if t <= len(warmup):
            return warmup[t - 1]
        if iub_mask is not None:
            return iub_mask
        return pol.select_cache(
            spec, state, catalog, capacity, policy_rng, users, true_values=true_values
        )

    expected = np.empty(horizon, dtype=np.float64)
    realized = np.empty(horizon, dtype=np.int64)
    demanded = np.empty(horizon, dtype=np.int64)
    caches = np.zeros((horizon, num_files), dtype=bool) if record_caches else None

    mask = next_cache(1)
    for t in range(1, horizon + 1):
        if int(sizes[mask].sum()) > capacity:
            raise RuntimeError(f"policy {spec.name} chose an infeasible cache")
        demands = sample_demands(profile, demand_rng)
        expected[t - 1] = theta_sizes[mask].sum()
        realized[t - 1] = (demands[mask] * sizes[mask]).sum()
        demanded[t - 1] = demands @ sizes
        if caches is not None:
            caches[t - 1] = mask
        pol.observe(state, mask, demands, catalog)
        if fit_pending and t >= len(warmup):
            spec = replace(spec, gamma_hat=pol.estimate_gamma(state.reward_mean, sizes))
            fit_pending = False
        if t < horizon:
            mask = next_cache(t + 1)

    return EpisodeTrace(
        policy=spec.name,
        horizon=horizon,
        expected=expected,
        realized=realized,
        demanded=demanded,
        acc_expected=np.cumsum(expected),
        caches=caches,
    )


def regret_of(trace: EpisodeTrace, oracle_per_period: float) -> RegretSeries:
    """Accumulated expected reward of the informed optimum minus the policy's."""
    periods = np.arange(1, trace.horizon + 1, dtype=np.float64)
    return RegretSeries(
        oracle_per_period=float(oracle_per_period),
        values=periods * oracle_per_period - trace.acc_expected,
    )


def hit_rate(trace: EpisodeTrace, burn_in: int = 2000) -> float:
    """Percent of demanded bytes served from the cache after ``burn_in``."""
    if not 0 <= burn_in < trace.horizon:
        raise ValueError("burn_in must lie in [0, horizon)")
    served = int(trace.realized[burn_in:].sum())
    wanted = int(trace.demanded[burn_in:].sum())
    return 100.0 * served / wanted


def _episode_summary(args):
    (spec, catalog, profile, capacity, horizon, seed, policy_seed, burn_in, keep_series) = args
    trace = run_episode(spec, catalog, profile, capacity, horizon, seed, policy_seed=policy_seed)
    out = {
        "hit_rate": hit_rate(trace, burn_in),
        "acc_expected": trace.acc_expected,
    }
    if keep_series:
        out["expected"] = trace.expected
        out["realized"] = trace.realized
        out["demanded"] = trace.demanded
    return out


def run_replications(
    spec: pol.PolicySpec,
    catalog: Catalog,
    profile: PopularityProfile,
    capacity: int,
    horizon: int,
    replications: int,
    master_seed: int,
    *,
    burn_in: int = 2000,
    checkpoints: list[int] | None = None,
    parallelism: int = 0,
    keep_series: bool = False,
    oracle: tuple[float, str] | None = None,
    point_key: int = 0,
    policy_key: int = 0,
    config_fingerprint: str = "",
) -> AggregateResult:
    """Run seeded independent episodes and aggregate deterministically.

    Replication ``r`` draws its demand stream from
    ``(master_seed, point_key, r, 0)`` -- shared by every policy at the
    same parameter point, so demand realizations are paired across
    policies -- and its policy stream from
    ``(master_seed, point_key, r, 1 + policy_key)``. Results are
    reproducible and independent of ``parallelism``. ``oracle`` is the
    informed per-period reward used for regret; if omitted it is computed
    here (branch and bound with a greedy incumbent fallback, status
    recorded).
    """
    if replications < 1:
        raise ValueError("replications must be at least 1")
    checkpoints = sorted(checkpoints or [horizon])
    if checkpoints[-1] > horizon or checkpoints[0] < 1:
        raise ValueError("checkpoints must lie in [1, horizon]")
    if oracle is None:
        oracle = oracle_reward(catalog, profile, capacity)
    oracle_value, oracle_status = oracle

    jobs = [
        (
            spec,
            catalog,
            profile,
            capacity,
            horizon,
            np.random.SeedSequence(master_seed, spawn_key=(point_key, rep, 0)),
            np.random.SeedSequence(master_seed, spawn_key=(point_key, rep, 1 + policy_key)),
            burn_in,
            keep_series,
        )
        for rep in range(replications)
    ]

    workers = parallelism if parallelism > 0 else (os.cpu_count() or 1)
    workers = min(workers, replications)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, replications // (workers * 4))
            summaries = list(pool.map(_episode_summary, jobs, chunksize=chunk))
    else:
        summaries = [_episode_summary(job) for job in jobs]

    hit = np.array([s["hit_rate"] for s in summaries])
    acc = np.stack([s["acc_expected"] for s in summaries])
    cp = np.array(checkpoints)
    acc_cp = acc[:, cp - 1]
    regret_cp = cp * oracle_value - acc_cp

    def stderr(a: np.ndarray) -> np.ndarray:
        if replications < 2:
            return np.zeros(a.shape[1:] if a.ndim > 1 else ())
        return a.std(axis=0, ddof=1) / np.sqrt(replications)

    series = None
    if keep_series:
        expected = np.stack([s["expected"] for s in summaries])
        realized = np.stack([s["realized"] for s in summaries]).astype(np.float64)
        demanded = np.stack([s["demanded"] for s in summaries]).astype(np.float64)
        acc_mean = acc.mean(axis=0)
        periods = np.arange(1, horizon + 1, dtype=np.float64)
        series = {
            "expected_mean": expected.mean(axis=0),
            "acc_expected_mean": acc_mean,
            "regret_mean": periods * oracle_value - acc_mean,
            "realized_mean": realized.mean(axis=0),
            "acc_realized_mean": np.cumsum(realized.mean(axis=0)),
            "demanded_mean": demanded.mean(axis=0),
        }

    return AggregateResult(
        policy=spec.name,
        replications=replications,
        master_seed=master_seed,
        hit_rate_mean=float(hit.mean()),
        hit_rate_stderr=float(stderr(hit)),
        checkpoints=checkpoints,
        regret_mean=regret_cp.mean(axis=0),
        regret_stderr=stderr(regret_cp),
        acc_reward_mean=acc_cp.mean(axis=0),
        acc_reward_stderr=stderr(acc_cp),
        oracle_per_period=oracle_value,
        oracle_status=oracle_status,
        config_fingerprint=config_fingerprint,
        series=series,
    )
