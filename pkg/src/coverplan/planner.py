"""Estimator-style front end: fit a scenario offline, plan queries online.

CoverPlanner follows the scikit-learn parameter conventions (keyword-only
constructor params stored verbatim, get_params/set_params, fitted state
on trailing-underscore attributes) so it composes with that ecosystem's
tooling, without depending on scikit-learn itself.
"""

from __future__ import annotations

import time
from typing import Callable

from . import cspace
from .cover import Library, preprocess
from .cspace import Scenario
from .errors import NotFittedError
from .online import PotentialStateIndex, QueryRequest, QueryResult, query, update_potential_index
from .search import DEFAULT_DELTA, Path


class CoverPlanner:
    """Constant-time planner with anytime refinement.

    fit() preprocesses the scenario into a goal-region cover library;
    plan() answers start -> goal queries by lookup plus bounded descent
    and refines within the time budget. Sequential use registers each
    executed path so the next query may start anywhere along it.

    Parameters
    ----------
    seed : rng seed for attractor sampling during fit.
    rep_path_weight : heuristic inflation of the offline path planner.
    delta : singularity guard in the refinement inflation schedule.
    """

    def __init__(self, *, seed: int = 0, rep_path_weight: float = 3.0, delta: float = DEFAULT_DELTA):
        self.seed = seed
        self.rep_path_weight = rep_path_weight
        self.delta = delta

    # -- scikit-learn parameter protocol ------------------------------------

    def get_params(self, deep: bool = True) -> dict:
        return {"seed": self.seed, "rep_path_weight": self.rep_path_weight, "delta": self.delta}

    def set_params(self, **params) -> "CoverPlanner":
        valid = self.get_params()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for CoverPlanner")
            setattr(self, key, value)
        return self

    # -- offline -------------------------------------------------------------

    def fit(self, scenario: Scenario, y=None) -> "CoverPlanner":
        """Preprocess the scenario; idempotent for a fixed seed."""
        cspace.check_scenario(scenario)
        self.scenario_ = scenario
        self.library_ = preprocess(scenario, seed=self.seed, rep_path_weight=self.rep_path_weight)
        self.index_ = PotentialStateIndex(scenario, self.library_)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "library_"):
            raise NotFittedError("call fit(scenario) before planning")

    # -- online --------------------------------------------------------------

    def plan(
        self,
        goal,
        start=None,
        *,
        budget_ms: float = 100.0,
        refine: bool = True,
        clock: Callable[[], float] = time.monotonic,
    ) -> QueryResult:
        """Plan from ``start`` (home when omitted) to ``goal``."""
        self._check_fitted()
        goal = cspace.check_config(self.scenario_, goal)
        start = (
            self.scenario_.s_home if start is None else cspace.check_config(self.scenario_, start)
        )
        request = QueryRequest(start=start, goal=goal, budget_ms=budget_ms, refine=refine)
        return query(self.scenario_, self.library_, request, index=self.index_, clock=clock)

    def register_executed(self, path: Path) -> None:
        """Mark a returned path as executed; its states become valid starts."""
        self._check_fitted()
        update_potential_index(self.index_, path)

    @property
    def fitted_library(self) -> Library:
        self._check_fitted()
        return self.library_
