"""Experiment configuration: validated models, YAML round-trip, sweeps.

A single config fully determines a run: the catalog (size classes and
counts), the popularity skewness, the user count, the cache budget, the
horizon and burn-in, the policy list, the replication count, and the
master seed. Exactly one sweep axis may be active; sweep points derive a
concrete per-point config (for the ``files`` axis the cache budget is
re-derived each point to hold 5% of the total content size). The resolved
config serializes to YAML (``config.echo``) and parses back to an equal
model, and its canonical-JSON SHA-256 fingerprints every result row.
"""

from __future__ import annotations

import hashlib
import json
from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .catalog import Catalog, build_catalog
from .policies import PolicySpec

__all__ = [
    "SizeClassSpec",
    "PolicyConfig",
    "SweepSpec",
    "ExperimentConfig",
    "SpoValidationConfig",
    "load_config",
    "dump_config",
    "resolve_sweep",
]

FILES_SWEEP_CACHE_FRACTION = 0.05


class SizeClassSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    size: int = Field(gt=0)
    count: int = Field(ge=1)


class PolicyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["cucb", "mcucb", "eps_greedy", "iub", "myopic", "random"]
    epsilon: float = Field(0.07, ge=0.0, le=1.0)
    gamma_hat: Optional[float] = Field(None, ge=0.0)
    fit_gamma: bool = False
    solver: Literal["greedy", "bnb"] = "greedy"
    solver_timeout_s: float = Field(50.0, gt=0.0)
    warm_start: bool = False
    label: Optional[str] = None

    @property
    def name(self) -> str:
        return self.label if self.label else self.kind

    def to_spec(self) -> PolicySpec:
        return PolicySpec(
            kind=self.kind,
            epsilon=self.epsilon,
            gamma_hat=self.gamma_hat,
            fit_gamma=self.fit_gamma,
            solver=self.solver,
            solver_timeout_s=self.solver_timeout_s,
            warm_start=self.warm_start,
            label=self.name,
        )


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    axis: Literal["none", "gamma", "cache_size", "users", "files"] = "none"
    values: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self):
        if self.axis == "none" and self.values:
            raise ValueError("sweep values given without a sweep axis")
        if self.axis != "none" and not self.values:
            raise ValueError(f"sweep axis {self.axis!r} needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError("sweep values must be distinct")
        return self


class ExperimentConfig(BaseModel):
    """One experiment: catalog, demand model, policies, and run shape.

    ``cache_size`` is in size units. Sweep value semantics per axis:
    ``gamma`` is the skewness itself, ``cache_size`` a percentage of the
    total content size, ``users`` a user count, and ``files`` a catalog
    size (divisible by the number of size classes; the cache is resized to
    5% of the content each point).
    """

    model_config = ConfigDict(extra="forbid")

    name: str = "experiment"
    size_classes: list[SizeClassSpec] = Field(min_length=1)
    gamma: float = Field(0.56, ge=0.0)
    users: int = Field(100, ge=1)
    cache_size: int = Field(256, ge=1)
    horizon: int = Field(ge=1)
    burn_in: int = Field(2000, ge=0)
    policies: list[PolicyConfig] = Field(min_length=1)
    replications: int = Field(ge=1)
    master_seed: int = 2024
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    regret_checkpoints: list[int] = Field(default_factory=list)
    traces: bool = False
    plots: bool = False
    parallelism: int = Field(0, ge=0)
    shuffle_ids: bool = True
    size_assignment: Literal["round_robin", "random"] = "round_robin"

    @property
    def num_files(self) -> int:
        return sum(c.count for c in self.size_classes)

    @property
    def total_size(self) -> int:
        return sum(c.size * c.count for c in self.size_classes)

    @property
    def max_file_size(self) -> int:
        return max(c.size for c in self.size_classes)

    @model_validator(mode="after")
    def _check(self):
        sizes = [c.size for c in self.size_classes]
        if len(set(sizes)) != len(sizes):
            raise ValueError("size classes must have distinct sizes")
        if self.burn_in >= self.horizon:
            raise ValueError("burn_in must be smaller than the horizon")
        if self.sweep.axis != "cache_size" and self.cache_size < self.max_file_size:
            raise ValueError("cache_size must fit the largest file")
        if any(not 1 <= c <= self.horizon for c in self.regret_checkpoints):
            raise ValueError("regret checkpoints must lie in [1, horizon]")
        labels = [p.name for p in self.policies]
        if len(set(labels)) != len(labels):
            raise ValueError("policy labels must be unique (set `label` to disambiguate)")
        if self.sweep.axis == "files":
            k = len(self.size_classes)
            for v in self.sweep.values:
                if v != int(v) or int(v) < k or int(v) % k:
                    raise ValueError(
                        "files sweep values must be multiples of the class count"
                    )
        if self.sweep.axis == "users" and any(v != int(v) or v < 1 for v in self.sweep.values):
            raise ValueError("users sweep values must be positive integers")
        if self.sweep.axis == "cache_size":
            for v in self.sweep.values:
                if not 0 < v <= 100:
                    raise ValueError("cache_size sweep values are percentages in (0, 100]")
                if round(v / 100.0 * self.total_size) < self.max_file_size:
                    raise ValueError("swept cache size must fit the largest file")
        if self.sweep.axis == "gamma" and any(v < 0 for v in self.sweep.values):
            raise ValueError("gamma sweep values must be nonnegative")
        return self

    def fingerprint(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()

    def build_catalog(self, point_index: int = 0) -> Catalog:
        """Build this config's catalog; randomization seeds derive from
        the master seed and the sweep point index."""
        seed = None
        if self.shuffle_ids or self.size_assignment == "random":
            seed = int(
                np.random.SeedSequence(
                    self.master_seed, spawn_key=(0xCA7A106, point_index)
                ).generate_state(1)[0]
            )
        return build_catalog(
            [(c.size, c.count) for c in self.size_classes],
            size_assignment=self.size_assignment,
            shuffle_ids=self.shuffle_ids,
            seed=seed,
        )


class SpoValidationConfig(BaseModel):
    """Random placement-knapsack sweep comparing greedy against B&B."""

    model_config = ConfigDict(extra="forbid")

    name: str = "spo_validation"
    instances: int = Field(ge=1)
    timeout_s: float = Field(5.0, gt=0.0)
    master_seed: int = 7
    users: int = Field(100, ge=1)
    greedy_variant: Literal["fill", "floor"] = "fill"
    file_grid: list[int] = Field(default_factory=lambda: [50, 100, 200, 500, 1000])
    gamma_grid: list[float] = Field(
        default_factory=lambda: [round(0.2 * k, 1) for k in range(13)] + [0.56]
    )
    # capacities are drawn uniformly over this fraction of the content size
    cache_fraction_range: tuple[float, float] = (0.01, 0.25)
    size_classes: list[SizeClassSpec] = Field(
        default_factory=lambda: [SizeClassSpec(size=s, count=1) for s in (9, 7, 5, 3, 1)]
    )

    @model_validator(mode="after")
    def _check(self):
        k = len(self.size_classes)
        if any(f % k for f in self.file_grid):
            raise ValueError("file grid entries must be multiples of the class count")
        return self


def resolve_sweep(config: ExperimentConfig) -> list[tuple[float, ExperimentConfig]]:
    """Expand a config into ``(sweep_value, concrete point config)`` pairs.

    A point config always has ``sweep.axis == "none"`` and reflects the
    axis override; configs without a sweep yield a single point whose
    value echoes the swept quantity's resting value (gamma).
    """
    none = SweepSpec()
    if config.sweep.axis == "none":
        return [(config.gamma, config.model_copy(update={"sweep": none}))]

    points = []
    for v in config.sweep.values:
        update: dict = {"sweep": none}
        if config.sweep.axis == "gamma":
            update["gamma"] = float(v)
        elif config.sweep.axis == "users":
            update["users"] = int(v)
        elif config.sweep.axis == "cache_size":
            update["cache_size"] = int(round(v / 100.0 * config.total_size))
        elif config.sweep.axis == "files":
            per_class = int(v) // len(config.size_classes)
            classes = [
                SizeClassSpec(size=c.size, count=per_class) for c in config.size_classes
            ]
            total = sum(c.size * c.count for c in classes)
            update["size_classes"] = classes
            update["cache_size"] = max(
                config.max_file_size, int(round(FILES_SWEEP_CACHE_FRACTION * total))
            )
        points.append((float(v), config.model_copy(update=update)))
    return points


def load_config(text_or_path, *, from_path: bool = True) -> ExperimentConfig:
    """Parse an experiment config from a YAML file (or literal text)."""
    if from_path:
        with open(text_or_path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    else:
        data = yaml.safe_load(text_or_path)
    return ExperimentConfig.model_validate(data)


def dump_config(config: BaseModel) -> str:
    """Canonical YAML form of a config; parsing it back yields an equal model."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=True)
