"""Cache placement under unknown content popularity.

A small-cell base station holds a cache of ``M`` size units out of a much
larger content catalog. Each period, users request files; requests for
cached files are served locally (and observed), everything else goes to
the macro network (and is invisible to the controller). The package
provides the demand model, exact and approximate knapsack solvers for the
informed single-period placement, bandit-style learning policies for the
uninformed case, and a replication engine plus service/CLI front ends for
running seeded experiments.
"""

__version__ = "0.1.0"

from .catalog import Catalog, PopularityProfile, build_catalog, sample_demands, zipf_profile
from .spo import (
    FractionalSolution,
    SpoInstance,
    SpoSolution,
    delta_bound,
    solve_bnb,
    solve_bruteforce,
    solve_greedy,
    solve_lp,
)

__all__ = [
    "Catalog",
    "PopularityProfile",
    "build_catalog",
    "zipf_profile",
    "sample_demands",
    "SpoInstance",
    "FractionalSolution",
    "SpoSolution",
    "solve_lp",
    "solve_greedy",
    "solve_bnb",
    "solve_bruteforce",
    "delta_bound",
]
