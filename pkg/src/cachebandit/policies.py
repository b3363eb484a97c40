"""Cache-content selection policies.

All policies speak the same protocol: ``select_cache`` maps the current
state to a feasible cache mask for the next period, and ``observe`` folds
one period's demands for the *cached* files back into the state (demands
for uncached files are never seen, so their estimates cannot move).

Estimates live in reward scale: ``reward_mean[f]`` tracks the mean of the
observed per-period reward ``demand * size`` of file ``f``, so it feeds
the placement knapsack directly as the value of caching ``f``.

The bandit policies (``cucb``, ``mcucb``) add an optimism bonus to the
reward means before solving the knapsack; ``eps_greedy`` mixes the plain
estimate-greedy placement with random exploration; ``iub`` solves on the
true expected rewards and upper-bounds everything else; ``myopic`` keeps
whatever was requested last period and refills the rest randomly;
``random`` refills everything randomly.

Placement knapsacks are solved with ties broken in file-id order rather
than popularity-rank order, so a policy facing all-equal values (e.g. the
untrained eps_greedy) cannot accidentally pick the most popular files.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import spo
from .catalog import Catalog

__all__ = [
    "POLICY_KINDS",
    "PolicySpec",
    "PolicyState",
    "cucb_index",
    "mcucb_index",
    "observe",
    "select_cache",
    "warmup_schedule",
    "random_feasible",
    "estimate_gamma",
]

POLICY_KINDS = ("cucb", "mcucb", "eps_greedy", "iub", "myopic", "random")
LEARNING_KINDS = ("cucb", "mcucb", "eps_greedy")


@dataclass(frozen=True)
class PolicySpec:
    """Which policy to run and with which knobs.

    ``gamma_hat`` is the skewness estimate used by mcucb's bonus; leave it
    ``None`` to have the engine substitute the configured true value (or a
    warm-up fit, see ``fit_gamma``). ``solver`` picks the knapsack route
    for the placement step.
    """

    kind: str
    epsilon: float = 0.07
    gamma_hat: float | None = None
    fit_gamma: bool = False
    solver: str = "greedy"
    solver_timeout_s: float = 50.0
    warm_start: bool = False
    label: str | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.solver not in ("greedy", "bnb"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.gamma_hat is not None and self.gamma_hat < 0:
            raise ValueError("gamma_hat must be nonnegative")

    @property
    def name(self) -> str:
        return self.label if self.label else self.kind


@dataclass
class PolicyState:
    """Per-episode learning state.

    ``reward_mean[f]`` is the sample mean of observed rewards of file
    ``f``, ``placements[f]`` how many periods it has been cached, and
    ``period`` how many periods have been observed. ``last_cache`` and
    ``last_demands`` keep the most recent observation for the myopic rule
    (demands of uncached files are stored as 0 = unobserved).
    """

    reward_mean: np.ndarray
    placements: np.ndarray
    period: int = 0
    last_cache: np.ndarray | None = None
    last_demands: np.ndarray | None = None

    @classmethod
    def fresh(cls, num_files: int) -> "PolicyState":
        return cls(
            reward_mean=np.zeros(num_files, dtype=np.float64),
            placements=np.zeros(num_files, dtype=np.int64),
        )


def cucb_index(mu_hat, placements, period, users, sizes):
    """Optimistic reward index: mean plus a bonus shrinking with placements.

    Returns ``mu_hat + users * sizes * sqrt(3 ln(period) / (2 placements))``
    (natural log). Accepts scalars or aligned arrays. Files never placed
    get an index dominating every placed file of the same size, standing
    in for the +infinity the formula would give.
    """
    t = max(int(period), 1)
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    placements = np.asarray(placements, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.float64)
    scale = users * sizes
    pad = scale * np.sqrt(3.0 * np.log(t) / (2.0 * np.maximum(placements, 1.0)))
    # never-placed files must dominate any placed file's index
    pad_one = scale * np.sqrt(1.5 * np.log(t + 1.0))
    never = users * sizes + pad_one + scale
    out = np.where(placements > 0, mu_hat + pad, never)
    return out if out.ndim else float(out)


def mcucb_index(mu_hat, placements, period, users, sizes, gamma_hat, num_files):
    """Skew-aware variant of ``cucb_index``.

    The bonus is damped by ``num_files ** gamma_hat`` (strong skew means
    few files matter, so exploration can be cut) and by the per-period
    sample count ``users``:

        mu_hat + (users * sizes / F^gamma_hat)
               * sqrt(3 ln(users * period) / (2 users placements))
    """
    t = max(int(period), 1)
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    placements = np.asarray(placements, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.float64)
    scale = users * sizes / float(num_files) ** float(gamma_hat)
    pad = scale * np.sqrt(
        3.0 * np.log(users * t) / (2.0 * users * np.maximum(placements, 1.0))
    )
    # never-placed files must dominate any placed file's index
    pad_one = scale * np.sqrt(3.0 * np.log(users * (t + 1.0)) / (2.0 * users))
    never = users * sizes + pad_one + scale
    out = np.where(placements > 0, mu_hat + pad, never)
    return out if out.ndim else float(out)


def observe(
    state: PolicyState,
    cache: np.ndarray,
    demands: np.ndarray,
    catalog: Catalog,
) -> PolicyState:
    """Fold one period's observed rewards into the state (in place).

    Only files in ``cache`` are updated: their reward means absorb
    ``demand * size`` and their placement counts increment. The period
    counter always advances by one.
    """
    idx = np.flatnonzero(cache)
    rewards = demands[idx] * catalog.sizes[idx]
    t_f = state.placements[idx].astype(np.float64)
    state.reward_mean[idx] = (state.reward_mean[idx] * t_f + rewards) / (t_f + 1.0)
    state.placements[idx] += 1
    state.period += 1
    state.last_cache = np.array(cache, dtype=bool)
    observed = np.zeros_like(demands)
    observed[idx] = demands[idx]
    state.last_demands = observed
    return state


def warmup_schedule(catalog: Catalog, capacity: int) -> list[np.ndarray]:
    """Deterministic cache sequence that places every file at least once.

    Each cache is packed greedily in descending size order (ties by file
    id) from the files not yet covered; the union over the sequence is the
    whole catalog. Requires the largest file to fit.
    """
    if capacity < catalog.max_size:
        raise ValueError("capacity below the largest file size; cannot cover catalog")
    order = np.lexsort((catalog.ids, -catalog.sizes))
    pending = np.ones(catalog.num_files, dtype=bool)
    schedule = []
    while pending.any():
        mask = np.zeros(catalog.num_files, dtype=bool)
        rem = capacity
        for f in order:
            if pending[f] and catalog.sizes[f] <= rem:
                mask[f] = True
                pending[f] = False
                rem -= int(catalog.sizes[f])
            if rem < catalog.size_classes[-1]:
                break
        schedule.append(mask)
    return schedule


def random_feasible(
    rng: np.random.Generator,
    sizes: np.ndarray,
    capacity: int,
    *,
    base: np.ndarray | None = None,
) -> np.ndarray:
    """Random feasible cache: permute candidates, keep whatever still fits.

    ``base`` files are kept unconditionally (they must already fit) and
    the permutation runs over the rest.
    """
    if base is not None:
        mask = np.array(base, dtype=bool)
        rem = capacity - int(sizes[mask].sum())
        if rem < 0:
            raise ValueError("base selection exceeds capacity")
        candidates = np.flatnonzero(~mask)
    else:
        mask = np.zeros(sizes.size, dtype=bool)
        rem = capacity
        candidates = np.arange(sizes.size)
    perm = rng.permutation(candidates)
    cum = np.cumsum(sizes[perm])
    k = int(np.searchsorted(cum, rem, side="right"))
    mask[perm[:k]] = True
    if k:
        rem -= int(cum[k - 1])
    for j in perm[k:]:
        if sizes[j] <= rem:
            mask[j] = True
            rem -= int(sizes[j])
            if rem < 1:
                break
    return mask


def _solve_placement(
    values: np.ndarray, catalog: Catalog, capacity: int, spec: PolicySpec
) -> np.ndarray:
    """Solve the placement knapsack with ties broken in file-id order."""
    ids = catalog.ids
    v = np.empty(catalog.num_files, dtype=np.float64)
    w = np.empty(catalog.num_files, dtype=np.int64)
    v[ids] = values
    w[ids] = catalog.sizes
    inst = spo.SpoInstance(v, w, capacity)
    if spec.solver == "bnb":
        sol = spo.solve_bnb(inst, timeout_s=spec.solver_timeout_s)
    else:
        sol = spo.solve_greedy(inst)
    return sol.x.astype(bool)[ids]


def select_cache(
    spec: PolicySpec,
    state: PolicyState,
    catalog: Catalog,
    capacity: int,
    rng: np.random.Generator,
    users: int,
    *,
    true_values: np.ndarray | None = None,
) -> np.ndarray:
    """Choose the next period's cache as a boolean mask over ranks.

    The returned mask always satisfies the capacity budget. ``true_values``
    (expected rewards) must be supplied for ``iub`` and is ignored -- never
    read -- by every learning policy.
    """
    kind = spec.kind
    if kind == "cucb":
        values = cucb_index(
            state.reward_mean, state.placements, state.period, users, catalog.sizes
        )
        return _solve_placement(values, catalog, capacity, spec)
    if kind == "mcucb":
        if spec.gamma_hat is None:
            raise ValueError("mcucb needs gamma_hat resolved before selection")
        values = mcucb_index(
            state.reward_mean,
            state.placements,
            state.period,
            users,
            catalog.sizes,
            spec.gamma_hat,
            catalog.num_files,
        )
        return _solve_placement(values, catalog, capacity, spec)
    if kind == "eps_greedy":
        if rng.random() < spec.epsilon:
            return random_feasible(rng, catalog.sizes, capacity)
        return _solve_placement(state.reward_mean, catalog, capacity, spec)
    if kind == "iub":
        if true_values is None:
            raise ValueError("iub requires the true expected rewards")
        return _solve_placement(true_values, catalog, capacity, spec)
    if kind == "myopic":
        if state.last_cache is None:
            return random_feasible(rng, catalog.sizes, capacity)
        keep = state.last_cache & (state.last_demands >= 1)
        return random_feasible(rng, catalog.sizes, capacity, base=keep)
    if kind == "random":
        return random_feasible(rng, catalog.sizes, capacity)
    raise ValueError(f"unknown policy kind {kind!r}")


def estimate_gamma(reward_mean: np.ndarray, sizes: np.ndarray) -> float:
    """Least-squares Zipf skewness fit from reward-mean estimates.

    Converts reward means back to request-rate estimates, sorts them
    descending, and regresses log-rate on log-rank; the negated slope is
    the skewness (clamped to be nonnegative). Needs at least two positive
    estimates.
    """
    rates = reward_mean / sizes
    rates = np.sort(rates[rates > 0])[::-1]
    if rates.size < 2:
        raise ValueError("need at least two positive estimates to fit gamma")
    ranks = np.arange(1, rates.size + 1, dtype=np.float64)
    slope = np.polyfit(np.log(ranks), np.log(rates), 1)[0]
    return max(0.0, -float(slope))


def resolve_gamma_hat(spec: PolicySpec, default_gamma: float) -> PolicySpec:
    """Fill in mcucb's gamma_hat with the configured default when unset."""
    if spec.kind != "mcucb" or spec.gamma_hat is not None:
        return spec
    return replace(spec, gamma_hat=float(default_gamma))
