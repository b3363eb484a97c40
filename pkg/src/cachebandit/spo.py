"""0/1 knapsack solvers for single-period cache placement.

An instance carries nonnegative real values, positive integer weights (the
file sizes), and an integer capacity. Four solution routes are provided:

* ``solve_lp``: the linear relaxation, solved in closed form by filling a
  prefix of the value-density order; at most one coordinate is fractional.
* ``solve_greedy``: the floor of the LP optimum (fill the density prefix,
  drop the fractional item). With densities sorted this is a 1/2
  approximation, and it is exact when all weights are equal.
* ``solve_bnb``: depth-first branch and bound. The incumbent starts at the
  greedy solution, each node is bounded by the LP value of its restricted
  instance, and branching follows the node's fractional variable
  (include-branch first). A timeout returns the best incumbent found.
* ``solve_bruteforce``: exhaustive subset enumeration for small instances,
  used as the independent testing oracle.

All tie-breaking is by ascending index, so every solver is a pure,
deterministic function of its instance. Solution values are computed with
exactly-rounded summation (``math.fsum``) so equal selections compare
equal regardless of summation order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .catalog import Catalog

__all__ = [
    "SpoInstance",
    "FractionalSolution",
    "SpoSolution",
    "solve_lp",
    "solve_greedy",
    "solve_bnb",
    "solve_bruteforce",
    "delta_bound",
]

STATUS_OPTIMAL = "optimal"
STATUS_APPROXIMATE = "approximate"
STATUS_TIMEOUT = "timeout-incumbent"

_BRUTEFORCE_LIMIT = 25
_ENUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class SpoInstance:
    """One placement problem: maximize value within the size budget."""

    values: np.ndarray
    weights: np.ndarray
    capacity: int

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.int64)
        if values.size < 1 or values.size != weights.size:
            raise ValueError("values and weights must be nonempty and equal length")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("values must be finite and nonnegative")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive integers")
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")
        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "capacity", int(self.capacity))

    @property
    def num_items(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class FractionalSolution:
    """LP-relaxation optimum: a 0/1 vector except for at most one entry."""

    x: np.ndarray
    value: float
    frac_index: int | None
    beta: float | None


@dataclass(frozen=True)
class SpoSolution:
    """A binary placement with its value, weight and optimality metadata.

    ``alpha_guarantee`` is the claimed fraction of the optimum this
    solution attains, and ``beta_guarantee`` the probability the claim
    holds; ``status`` is "optimal" only when proven.
    """

    x: np.ndarray
    value: float
    weight: int
    status: str
    alpha_guarantee: float
    beta_guarantee: float

    @property
    def chosen(self) -> np.ndarray:
        return np.flatnonzero(self.x)


def solution_value(inst: SpoInstance, chosen: np.ndarray) -> float:
    """Exactly-rounded value of a selection (order-independent)."""
    return math.fsum(inst.values[chosen].tolist())


def _density_order(inst: SpoInstance) -> np.ndarray:
    # stable sort keeps equal densities in ascending-index order
    return np.argsort(-(inst.values / inst.weights), kind="stable")


def solve_lp(inst: SpoInstance) -> FractionalSolution:
    """Closed-form LP relaxation: fill the density order, split one item.

    After sorting by descending value density (ties by ascending index),
    the optimum takes whole items until the first one that does not fit,
    of which it takes the fitting fraction ``beta``; everything later is
    zero. The returned vector is in original index order.
    """
    order = _density_order(inst)
    cum = np.cumsum(inst.weights[order])
    k = int(np.searchsorted(cum, inst.capacity, side="right"))
    used = int(cum[k - 1]) if k else 0

    x = np.zeros(inst.num_items, dtype=np.float64)
    x[order[:k]] = 1.0
    value = math.fsum(inst.values[order[:k]].tolist())
    frac_index = None
    beta = None
    if k < inst.num_items:
        rem = inst.capacity - used
        if rem > 0:
            j = int(order[k])
            beta = rem / float(inst.weights[j])
            x[j] = beta
            frac_index = j
            value += beta * float(inst.values[j])
    return FractionalSolution(x=x, value=value, frac_index=frac_index, beta=beta)


def solve_greedy(inst: SpoInstance, *, skip_and_continue: bool = False) -> SpoSolution:
    """Floor of the LP optimum: the density prefix, fractional item dropped.

    ``skip_and_continue`` keeps scanning past the first non-fitting item
    and adds anything that still fits; that variant can only gain value
    but carries no approximation-factor claim.
    """
    order = _density_order(inst)
    cum = np.cumsum(inst.weights[order])
    k = int(np.searchsorted(cum, inst.capacity, side="right"))
    used = int(cum[k - 1]) if k else 0

    x = np.zeros(inst.num_items, dtype=np.int8)
    x[order[:k]] = 1
    if skip_and_continue:
        rem = inst.capacity - used
        for j in order[k:]:
            w = int(inst.weights[j])
            if w <= rem:
                x[j] = 1
                used += w
                rem -= w
            if rem < 1:
                break

    chosen = np.flatnonzero(x)
    return SpoSolution(
        x=x,
        value=solution_value(inst, chosen),
        weight=used,
        status=STATUS_APPROXIMATE,
        alpha_guarantee=0.0 if skip_and_continue else 0.5,
        beta_guarantee=1.0,
    )


def solve_bruteforce(inst: SpoInstance) -> SpoSolution:
    """Exact optimum by subset enumeration; rejects more than 25 items."""
    n = inst.num_items
    if n > _BRUTEFORCE_LIMIT:
        raise ValueError(f"bruteforce limited to {_BRUTEFORCE_LIMIT} items, got {n}")

    shifts = np.arange(n, dtype=np.uint32)
    values = inst.values
    weights = inst.weights.astype(np.float64)
    best_val = -1.0
    best_code = 0
    total = 1 << n
    for start in range(0, total, _ENUM_CHUNK):
        codes = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.uint32)
        bits = ((codes[:, None] >> shifts) & 1).astype(np.float64)
        vals = bits @ values
        vals[bits @ weights > inst.capacity] = -1.0
        top = float(vals.max())
        if top < 0:
            continue
        # re-evaluate near-maximal candidates with exact summation so the
        # winner does not depend on dot-product rounding
        window = vals >= top - 1e-9 * max(1.0, abs(top))
        cand_codes = codes[window][:4096]
        for code in cand_codes.tolist():
            chosen = np.flatnonzero((code >> shifts) & 1)
            v = solution_value(inst, chosen)
            if v > best_val:
                best_val = v
                best_code = code

    x = ((best_code >> shifts) & 1).astype(np.int8)
    chosen = np.flatnonzero(x)
    return SpoSolution(
        x=x,
        value=max(best_val, 0.0),
        weight=int(inst.weights[chosen].sum()),
        status=STATUS_OPTIMAL,
        alpha_guarantee=1.0,
        beta_guarantee=1.0,
    )


def solve_bnb(inst: SpoInstance, timeout_s: float = 50.0) -> SpoSolution:
    """Depth-first branch and bound with LP bounds.

    The greedy solution seeds the incumbent. Each node solves the LP
    relaxation of its restricted instance (forced-in items removed from
    the budget, forced-out items removed from the item set); integral LP
    optima raise the incumbent, nodes whose bound cannot beat it are
    pruned, and branching fixes the node's fractional variable,
    include-branch first. On timeout the best incumbent is returned with
    status "timeout-incumbent".
    """
    if timeout_s <= 0:
        raise ValueError("timeout_s must be positive")
    deadline = time.monotonic() + timeout_s

    greedy = solve_greedy(inst)
    incumbent_chosen = greedy.chosen
    incumbent_val = greedy.value

    if int(inst.weights.sum()) <= inst.capacity:
        x = np.ones(inst.num_items, dtype=np.int8)
        return SpoSolution(
            x=x,
            value=solution_value(inst, np.arange(inst.num_items)),
            weight=int(inst.weights.sum()),
            status=STATUS_OPTIMAL,
            alpha_guarantee=1.0,
            beta_guarantee=1.0,
        )

    values = inst.values
    weights = inst.weights
    root_free = np.arange(inst.num_items)
    root_in = np.empty(0, dtype=np.int64)
    # node: (free indices, forced-in indices, remaining capacity, forced-in value)
    stack: list[tuple[np.ndarray, np.ndarray, int, float]] = [
        (root_free, root_in, inst.capacity, 0.0)
    ]
    timed_out = False
    best_open_bound = -math.inf

    def consider(chosen: np.ndarray):
        nonlocal incumbent_chosen, incumbent_val
        v = solution_value(inst, chosen)
        if v > incumbent_val:
            incumbent_val = v
            incumbent_chosen = chosen

    while stack:
        if time.monotonic() > deadline:
            timed_out = True
            best_open_bound = max(
                [best_open_bound]
                + [fixed + float(values[free].sum()) for free, _, _, fixed in stack]
            )
            break
        free, forced_in, cap, fixed = stack.pop()

        if free.size == 0 or cap == 0:
            consider(forced_in)
            continue

        lp = solve_lp(SpoInstance(values[free], weights[free], cap))
        if fixed + lp.value <= incumbent_val:
            continue

        if lp.frac_index is None:
            consider(np.concatenate([forced_in, free[lp.x > 0.5]]))
            continue

        j = int(free[lp.frac_index])
        rest = np.delete(free, lp.frac_index)
        stack.append((rest, forced_in, cap, fixed))
        if weights[j] <= cap:
            stack.append(
                (rest, np.append(forced_in, j), cap - int(weights[j]), fixed + float(values[j]))
            )

    x = np.zeros(inst.num_items, dtype=np.int8)
    x[incumbent_chosen] = 1
    if timed_out:
        bound = max(best_open_bound, incumbent_val)
        alpha = incumbent_val / bound if bound > 0 else 1.0
        status = STATUS_TIMEOUT
    else:
        alpha = 1.0
        status = STATUS_OPTIMAL
    return SpoSolution(
        x=x,
        value=incumbent_val,
        weight=int(inst.weights[incumbent_chosen].sum()),
        status=status,
        alpha_guarantee=alpha,
        beta_guarantee=1.0,
    )


def delta_bound(catalog: Catalog, capacity: int, gamma: float) -> float:
    """Upper bound on optimum/greedy for Zipf-valued placement instances.

    For values ``theta[f] * size[f]`` with a Zipf profile of skewness
    ``gamma``, the gap of the greedy placement is bounded by the largest
    value the dropped fractional item can carry relative to the floor of
    at least ``capacity // s_max`` top files:

        1 + (s_max / s_min) * ceil(M/s_max)^(-gamma)
                            / sum_{i=1}^{floor(M/s_max)} i^(-gamma)

    Requires ``capacity >= s_max`` (the largest file must fit at all).
    The bound tends to 1 as the capacity grows past the largest file size.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    s_max = catalog.size_classes[0]
    s_min = catalog.size_classes[-1]
    if capacity < s_max:
        raise ValueError("capacity must be at least the largest file size")
    k_floor = capacity // s_max
    k_ceil = -(-capacity // s_max)
    numerator = float(k_ceil) ** (-gamma)
    denominator = math.fsum(float(i) ** (-gamma) for i in range(1, k_floor + 1))
    return 1.0 + (s_max / s_min) * numerator / denominator
