"""Named experiment presets for the reported numerical studies.

The canonical setup is a 1000-file catalog with 200 files of each size in
{1,3,5,7,9}, 100 users, skewness 0.56, and a 256-unit cache (about 5.12%
of the 5000-unit content), with hit-rates measured after a 2000-period
learning stage. Full-scale runs average 20000 replications; the ``scale``
factor reduces the replication count (never the horizon) for desk runs.

Presets::

    fig1_convergence  learning curves at the canonical setup (traces on)
    fig2_cucb_small   adds the slow plain-bonus bandit on a reduced
                      problem (125-unit cache, 100 files)
    fig3_gamma        hit-rate versus popularity skewness
    fig4_cache        hit-rate versus cache size (percent of content)
    fig5_users        hit-rate versus user count
    fig6_files        hit-rate versus catalog size, cache pinned at 5%
    spo_validation    random knapsack sweep, greedy versus branch&bound
"""

from __future__ import annotations

from .config import (
    ExperimentConfig,
    PolicyConfig,
    SizeClassSpec,
    SpoValidationConfig,
    SweepSpec,
)

__all__ = ["PRESET_NAMES", "preset", "default_size_classes", "default_config"]

FULL_REPLICATIONS = 20000
DEFAULT_SEED = 2024


def default_size_classes(files_per_class: int = 200) -> list[SizeClassSpec]:
    return [SizeClassSpec(size=s, count=files_per_class) for s in (9, 7, 5, 3, 1)]


def _policy(kind: str, **kw) -> PolicyConfig:
    return PolicyConfig(kind=kind, **kw)


def default_config(**overrides) -> ExperimentConfig:
    """The canonical setup; keyword overrides replace individual fields."""
    base = dict(
        name="default",
        size_classes=default_size_classes(),
        gamma=0.56,
        users=100,
        cache_size=256,
        horizon=3000,
        burn_in=2000,
        policies=[_policy("mcucb"), _policy("eps_greedy"), _policy("iub")],
        replications=200,
        master_seed=DEFAULT_SEED,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def _scaled(replications: int, scale: float) -> int:
    return max(1, round(replications * scale))


def preset(name: str, scale: float = 1.0, seed: int | None = None):
    """Resolve a preset to a runnable config at the given scale.

    Returns an ``ExperimentConfig`` (or ``SpoValidationConfig`` for the
    knapsack validation study). Unknown names raise ``KeyError``.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    master_seed = DEFAULT_SEED if seed is None else seed
    reps = _scaled(FULL_REPLICATIONS, scale)

    if name == "fig1_convergence":
        return default_config(
            name=name,
            horizon=5000,
            replications=reps,
            master_seed=master_seed,
            policies=[
                _policy("mcucb"),
                _policy("eps_greedy", epsilon=0.07),
                _policy("iub", solver="greedy", label="iub(greedy)"),
                _policy("iub", solver="bnb", label="iub(bnb)"),
            ],
            regret_checkpoints=[500, 1000, 2000, 3000, 4000, 5000],
            traces=True,
            plots=True,
        )
    if name == "fig2_cucb_small":
        return default_config(
            name=name,
            size_classes=default_size_classes(20),
            cache_size=125,
            horizon=5000,
            replications=reps,
            master_seed=master_seed,
            policies=[
                _policy("cucb"),
                _policy("mcucb"),
                _policy("eps_greedy", epsilon=0.07),
                _policy("iub"),
            ],
            regret_checkpoints=[250, 500, 1000, 2000, 4000, 5000],
            traces=True,
            plots=True,
        )
    if name == "fig3_gamma":
        return default_config(
            name=name,
            horizon=4000,
            replications=reps,
            master_seed=master_seed,
            policies=[
                _policy("mcucb"),
                _policy("eps_greedy"),
                _policy("iub"),
                _policy("myopic"),
                _policy("random"),
            ],
            sweep=SweepSpec(axis="gamma", values=[round(0.2 * k, 1) for k in range(13)]),
            plots=True,
        )
    if name == "fig4_cache":
        return default_config(
            name=name,
            horizon=4000,
            replications=reps,
            master_seed=master_seed,
            policies=[
                _policy("mcucb"),
                _policy("eps_greedy"),
                _policy("iub"),
                _policy("myopic"),
                _policy("random"),
            ],
            sweep=SweepSpec(axis="cache_size", values=[1.0, 2.5, 5.0, 10.0, 20.0]),
            plots=True,
        )
    if name == "fig5_users":
        return default_config(
            name=name,
            horizon=4000,
            replications=reps,
            master_seed=master_seed,
            policies=[
                _policy("mcucb"),
                _policy("eps_greedy"),
                _policy("iub"),
                _policy("random"),
            ],
            sweep=SweepSpec(axis="users", values=[1, 2, 3, 5, 8, 13, 25, 50, 100]),
            plots=True,
        )
    if name == "fig6_files":
        return default_config(
            name=name,
            horizon=4000,
            replications=reps,
            master_seed=master_seed,
            policies=[
                _policy("mcucb"),
                _policy("eps_greedy"),
                _policy("iub"),
                _policy("random"),
            ],
            sweep=SweepSpec(axis="files", values=[50, 100, 250, 500, 1000, 2000]),
            plots=True,
        )
    if name == "spo_validation":
        return SpoValidationConfig(
            name=name, instances=reps, timeout_s=5.0, master_seed=master_seed
        )
    raise KeyError(f"unknown preset {name!r}")


PRESET_NAMES = (
    "fig1_convergence",
    "fig2_cucb_small",
    "fig3_gamma",
    "fig4_cache",
    "fig5_users",
    "fig6_files",
    "spo_validation",
)
