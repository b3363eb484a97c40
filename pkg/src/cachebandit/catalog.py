"""Content catalog, Zipf popularity model, and per-period demand sampling.

Files are indexed by popularity rank: position ``f`` in every per-file
array refers to the ``f``-th most popular file (0-based; the Zipf formula
uses rank ``f+1``). A catalog additionally carries a file-id permutation so
that consumers which must not exploit popularity order (the learning
policies) can break ties by id instead of rank.

Each period, every one of the ``U`` users independently requests exactly
one file, drawn from the rank probabilities. Demand counts are the
multinomial tally, so counts always sum to ``U``, each count lies in
``[0, U]``, and file ``f`` sees ``theta[f]`` requests per period on
average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Catalog",
    "PopularityProfile",
    "build_catalog",
    "zipf_profile",
    "sample_demands",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Catalog:
    """Immutable file universe; every array is indexed by popularity rank.

    ``sizes[f]`` is the size of the rank-``f`` file, ``ids[f]`` its file id
    (a permutation of ``0..F-1``), and ``size_classes`` the distinct sizes
    in strictly decreasing order.
    """

    sizes: np.ndarray
    ids: np.ndarray
    size_classes: tuple[int, ...]

    def __post_init__(self):
        sizes = _frozen_array(self.sizes, np.int64)
        ids = _frozen_array(self.ids, np.int64)
        classes = tuple(int(s) for s in self.size_classes)
        if sizes.size < 1:
            raise ValueError("catalog needs at least one file")
        if sizes.size != ids.size:
            raise ValueError("sizes and ids must have equal length")
        if np.any(sizes <= 0):
            raise ValueError("file sizes must be positive")
        if not classes or any(nxt >= prev for nxt, prev in zip(classes[1:], classes)):
            raise ValueError("size_classes must be strictly decreasing")
        if not set(sizes.tolist()) <= set(classes):
            raise ValueError("every file size must be a listed size class")
        if sorted(ids.tolist()) != list(range(sizes.size)):
            raise ValueError("ids must be a permutation of 0..F-1")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "size_classes", classes)

    @property
    def num_files(self) -> int:
        return int(self.sizes.size)

    @property
    def total_size(self) -> int:
        return int(self.sizes.sum())

    @property
    def max_size(self) -> int:
        return self.size_classes[0]

    @property
    def files(self) -> tuple[tuple[int, int], ...]:
        """(file id, size) pairs in popularity-rank order."""
        return tuple(zip(self.ids.tolist(), self.sizes.tolist()))


@dataclass(frozen=True)
class PopularityProfile:
    """Zipf popularity over a catalog's ranks.

    ``theta[f]`` is the expected number of requests per period for the
    rank-``f`` file and ``probs[f] = theta[f] / users`` the probability
    that a single user requests it. ``gamma`` is the skewness: 0 gives a
    uniform profile, larger values concentrate demand on the top ranks.
    """

    gamma: float
    users: int
    theta: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        theta = _frozen_array(self.theta, np.float64)
        probs = _frozen_array(self.probs, np.float64)
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.users < 1:
            raise ValueError("users must be positive")
        if theta.size != probs.size or theta.size < 1:
            raise ValueError("theta and probs must be nonempty and equal length")
        if np.any(theta <= 0) or np.any(theta > self.users * (1 + 1e-12)):
            raise ValueError("theta entries must lie in (0, users]")
        if np.any(np.diff(theta) > 1e-12):
            raise ValueError("theta must be nonincreasing in rank")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("request probabilities must sum to 1")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "probs", probs)

    @property
    def num_files(self) -> int:
        return int(self.theta.size)


def build_catalog(
    classes: list[tuple[int, int]],
    *,
    size_assignment: str = "round_robin",
    shuffle_ids: bool = False,
    seed: int | None = None,
) -> Catalog:
    """Build a catalog from ``(size, count)`` class specs.

    Sizes are assigned to popularity ranks round-robin over the classes in
    descending size order, so every popularity band mixes sizes; pass
    ``size_assignment="random"`` for a seeded random assignment instead.
    ``shuffle_ids`` draws a seeded random rank->id permutation (default is
    the identity).
    """
    if not classes:
        raise ValueError("at least one size class is required")
    sizes_given = [int(s) for s, _ in classes]
    counts = [int(c) for _, c in classes]
    if len(set(sizes_given)) != len(sizes_given):
        raise ValueError("size classes must be distinct")
    if any(s <= 0 for s in sizes_given):
        raise ValueError("sizes must be positive")
    if any(c < 1 for c in counts):
        raise ValueError("counts must be at least 1")
    if size_assignment not in ("round_robin", "random"):
        raise ValueError(f"unknown size_assignment {size_assignment!r}")
    if (size_assignment == "random" or shuffle_ids) and seed is None:
        raise ValueError("random size assignment / id shuffling requires a seed")

    by_size = sorted(zip(sizes_given, counts), reverse=True)
    num_files = sum(counts)
    rng = np.random.default_rng(seed) if seed is not None else None

    if size_assignment == "round_robin":
        remaining = [c for _, c in by_size]
        sizes = np.empty(num_files, dtype=np.int64)
        k = 0
        for rank in range(num_files):
            while remaining[k % len(by_size)] == 0:
                k += 1
            sizes[rank] = by_size[k % len(by_size)][0]
            remaining[k % len(by_size)] -= 1
            k += 1
    else:
        pool = np.repeat([s for s, _ in by_size], [c for _, c in by_size])
        sizes = rng.permutation(pool).astype(np.int64)

    ids = np.arange(num_files, dtype=np.int64)
    if shuffle_ids:
        ids = rng.permutation(ids)

    return Catalog(sizes=sizes, ids=ids, size_classes=tuple(s for s, _ in by_size))


def zipf_profile(num_files: int, gamma: float, users: int) -> PopularityProfile:
    """Expected per-period request counts ``users / (rank^gamma * H)``.

    ``H`` is the generalized harmonic normalizer ``sum(1/i^gamma)`` over
    ranks ``1..num_files``, so the counts sum to ``users``.
    """
    if num_files < 1:
        raise ValueError("num_files must be at least 1")
    if users < 1:
        raise ValueError("users must be at least 1")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    ranks = np.arange(1, num_files + 1, dtype=np.float64)
    weights = ranks ** (-float(gamma))
    theta = users * weights / weights.sum()
    return PopularityProfile(gamma=float(gamma), users=int(users), theta=theta, probs=theta / users)


def sample_demands(profile: PopularityProfile, rng: np.random.Generator) -> np.ndarray:
    """Draw one period of demand counts (one categorical request per user)."""
    return rng.multinomial(profile.users, profile.probs).astype(np.int64)
