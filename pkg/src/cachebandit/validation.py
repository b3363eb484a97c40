"""Randomized knapsack validation: greedy quality versus branch and bound.

Draws placement instances across a grid of catalog sizes, skewness values
and cache budgets (values are the true expected rewards of a Zipf profile),
solves each with the greedy route and with branch and bound, and reports
value ratios, runtimes, and the per-instance analytic gap bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import spo
from .catalog import Catalog, PopularityProfile, build_catalog, zipf_profile
from .config import SpoValidationConfig

__all__ = ["InstanceRecord", "SpoValidationResult", "draw_instance", "run_spo_validation"]


@dataclass(frozen=True)
class InstanceRecord:
    num_files: int
    gamma: float
    capacity: int
    greedy_value: float
    bnb_value: float
    bnb_status: str
    greedy_seconds: float
    bnb_seconds: float
    gap_bound: float

    @property
    def value_ratio(self) -> float:
        """greedy value / B&B value, in (0, 1]."""
        return self.greedy_value / self.bnb_value if self.bnb_value > 0 else 1.0


@dataclass
class SpoValidationResult:
    records: list[InstanceRecord] = field(default_factory=list)

    @property
    def instances(self) -> int:
        return len(self.records)

    @property
    def mean_ratio(self) -> float:
        return float(np.mean([r.value_ratio for r in self.records]))

    @property
    def min_ratio(self) -> float:
        return float(min(r.value_ratio for r in self.records))

    @property
    def optimal_fraction(self) -> float:
        closed = sum(r.bnb_status == spo.STATUS_OPTIMAL for r in self.records)
        return closed / len(self.records)

    @property
    def median_speedup(self) -> float:
        """Median of per-instance B&B time over greedy time."""
        return float(np.median([r.bnb_seconds / r.greedy_seconds for r in self.records]))

    @property
    def speedup_of_medians(self) -> float:
        """Median B&B runtime over median greedy runtime."""
        med_b = float(np.median([r.bnb_seconds for r in self.records]))
        med_g = float(np.median([r.greedy_seconds for r in self.records]))
        return med_b / med_g

    @property
    def bound_violations(self) -> int:
        return sum(
            r.bnb_value / r.greedy_value > r.gap_bound + 1e-9
            for r in self.records
            if r.greedy_value > 0
        )


def draw_instance(
    rng: np.random.Generator, cfg: SpoValidationConfig
) -> tuple[spo.SpoInstance, Catalog, PopularityProfile]:
    """One random placement instance from the configured grids."""
    num_files = int(rng.choice(cfg.file_grid))
    gamma = float(rng.choice(cfg.gamma_grid))
    lo, hi = cfg.cache_fraction_range
    per_class = num_files // len(cfg.size_classes)
    catalog = build_catalog([(c.size, per_class) for c in cfg.size_classes])
    low = max(catalog.max_size, round(lo * catalog.total_size))
    high = max(low, round(hi * catalog.total_size))
    capacity = int(rng.integers(low, high + 1))
    profile = zipf_profile(num_files, gamma, cfg.users)
    inst = spo.SpoInstance(profile.theta * catalog.sizes, catalog.sizes, capacity)
    return inst, catalog, profile


def run_spo_validation(cfg: SpoValidationConfig) -> SpoValidationResult:
    """Solve ``cfg.instances`` random instances both ways and collect stats."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed))
    fill = cfg.greedy_variant == "fill"
    result = SpoValidationResult()
    for _ in range(cfg.instances):
        inst, catalog, profile = draw_instance(rng, cfg)

        t0 = time.perf_counter()
        greedy = spo.solve_greedy(inst, skip_and_continue=fill)
        t1 = time.perf_counter()
        bnb = spo.solve_bnb(inst, timeout_s=cfg.timeout_s)
        t2 = time.perf_counter()

        result.records.append(
            InstanceRecord(
                num_files=inst.num_items,
                gamma=profile.gamma,
                capacity=inst.capacity,
                greedy_value=greedy.value,
                bnb_value=bnb.value,
                bnb_status=bnb.status,
                greedy_seconds=max(t1 - t0, 1e-9),
                bnb_seconds=max(t2 - t1, 1e-9),
                gap_bound=spo.delta_bound(catalog, inst.capacity, profile.gamma),
            )
        )
    return result
