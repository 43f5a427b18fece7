"""Online strategies: NN, CI, k-NN and the dual-fitting algorithm.

Each step function handles one arrival against a mutable
:class:`SimulationState` and returns a :class:`StepReport`. Ties are broken
toward the lowest point index everywhere.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ArrivalInstance,
    AssignmentTrace,
    RangeChange,
    check_alpha,
    within_range,
)

KINDS = ("nn", "ci", "knn", "dual")
TIGHT_TOL = 1e-9

COVERED = "covered"
RAISED = "raised"


@dataclass(frozen=True)
class StrategyConfig:
    """Which online rule to run, and its parameters.

    ``k`` is only read for ``knn`` and ``gamma`` only for ``dual``. NN and
    k-NN never look at ``alpha``; it is kept for cost accounting.
    """

    kind: str
    alpha: float = 2.0
    k: float = 1.0
    gamma: float = 4.0
    tie_rule: str = field(default="lowest-index", init=False)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind == "2nn":
            kind = "knn"
            object.__setattr__(self, "k", 2.0)
        if kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if kind == "knn" and not self.k >= 1:
            raise ValueError(f"k-NN expansion factor must be >= 1, got {self.k}")
        if kind == "dual" and not self.gamma > 1:
            raise ValueError(f"dual algorithm needs gamma > 1, got {self.gamma}")

    @property
    def label(self) -> str:
        if self.kind == "knn":
            return f"knn(k={self.k:g})"
        if self.kind == "dual":
            return f"dual(gamma={self.gamma:g})"
        return self.kind

    def with_alpha(self, alpha: float) -> "StrategyConfig":
        return StrategyConfig(self.kind, alpha=alpha, k=self.k, gamma=self.gamma)


@dataclass(frozen=True)
class StepReport:
    j: int
    action: str
    center: int | None = None
    old_range: float | None = None
    new_range: float | None = None
    cost_delta: float = 0.0
    y: float | None = None
    tight: tuple[int, float] | None = None

    CSV_HEADER = ("j", "action", "center", "old_range", "new_range", "cost_delta", "y_j")

    def csv_row(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [
            str(self.j),
            self.action,
            "" if self.center is None else str(self.center),
            fmt(self.old_range),
            fmt(self.new_range),
            repr(float(self.cost_delta)),
            fmt(self.y),
        ]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(StepReport.CSV_HEADER)
    for rep in reports:
        w.writerow(rep.csv_row())
    return buf.getvalue()


class SimulationState:
    """Ranges (and dual values) of the points inserted so far."""

    def __init__(self, instance: ArrivalInstance, alpha: float):
        self.instance = instance
        self.alpha = check_alpha(alpha)
        self.ranges: list[float] = [0.0]
        self.y: list[float] = [0.0]  # y[0] is a placeholder, the source has no dual

    @property
    def inserted(self) -> int:
        return len(self.ranges)

    def insert(self, j: int) -> None:
        if j != self.inserted:
            raise ValueError(f"expected arrival {self.inserted}, got {j}")
        self.ranges.append(0.0)
        self.y.append(0.0)

    def covered(self, j: int) -> bool:
        row = self.instance.dist_row(j, j)
        return bool(np.any(within_range(row, np.asarray(self.ranges[:j]))))

    def nearest(self, j: int) -> tuple[int, float]:
        row = self.instance.dist_row(j, j)
        i = int(np.argmin(row))
        return i, float(row[i])

    def set_range(self, j: int, center: int, new: float, **extra) -> StepReport:
        old = self.ranges[center]
        if not new > old:
            return StepReport(j, COVERED, **extra)
        self.ranges[center] = new
        delta = new**self.alpha - old**self.alpha
        return StepReport(j, RAISED, center, old, new, delta, **extra)


def _ensure_inserted(state: SimulationState, j: int) -> None:
    if j < 1:
        raise ValueError("the source p_0 has no step")
    if state.inserted == j:
        state.insert(j)


def knn_step(state: SimulationState, j: int, k: float) -> StepReport:
    """Raise the nearest predecessor to ``k`` times its distance, if ``p_j`` is uncovered."""
    _ensure_inserted(state, j)
    if state.covered(j):
        return StepReport(j, COVERED)
    i, d = state.nearest(j)
    # inert for an uncovered arrival (d > old range), kept for monotonicity
    return state.set_range(j, i, max(state.ranges[i], k * d))


def nn_step(state: SimulationState, j: int) -> StepReport:
    return knn_step(state, j, 1.0)


def ci_step(state: SimulationState, j: int) -> StepReport:
    """Raise the predecessor whose extension to ``p_j`` costs the least."""
    _ensure_inserted(state, j)
    if state.covered(j):
        return StepReport(j, COVERED)
    row = state.instance.dist_row(j, j)
    increase = row**state.alpha - np.asarray(state.ranges[:j]) ** state.alpha
    i = int(np.argmin(increase))
    return state.set_range(j, i, float(row[i]))


def _center_sets(state: SimulationState, i: int, j: int):
    """Radii and current dual loads of the sets centred at ``p_i``.

    Only distances to points that have arrived are used as radii. Between two
    such distances the load is constant while ``r**alpha`` grows, so no other
    radius can be tight or realise a smaller slack.
    """
    d = state.instance.dist_row(i, j + 1)[i + 1 :]
    y = np.asarray(state.y[i + 1 : j + 1])
    radii = np.unique(d)
    members = within_range(d[None, :], radii[:, None])
    loads = members.astype(float) @ y
    return radii, loads, float(state.instance.dist(i, j))


def _is_tight(load, cap):
    return np.abs(load - cap) <= TIGHT_TOL * np.maximum(1.0, cap)


def dual_step(state: SimulationState, j: int, gamma: float) -> StepReport:
    """One arrival of the primal-dual algorithm.

    ``y_j`` is set to the smallest slack over the sets containing ``p_j``
    (zero if one is already tight); then the lowest-index centre owning a
    tight set that contains ``p_j`` gets ``gamma`` times its largest tight
    radius. Exactly one centre is considered per arrival.
    """
    _ensure_inserted(state, j)
    alpha = state.alpha
    sets = [_center_sets(state, i, j) for i in range(j)]

    def tight_center():
        for i, (radii, loads, dij) in enumerate(sets):
            caps = radii**alpha
            tight = _is_tight(loads, caps)
            if np.any(tight & within_range(dij, radii)):
                return i, float(radii[tight].max())
        return None

    choice = tight_center()
    if choice is None:
        best = None
        for i, (radii, loads, dij) in enumerate(sets):
            contains = within_range(dij, radii)
            slack = radii[contains] ** alpha - loads[contains]
            m = int(np.argmin(slack))
            if best is None or slack[m] < best[0]:
                best = (float(slack[m]), i, float(radii[contains][m]))
        slack, i_min, r_min = best
        y_j = max(0.0, slack)
        state.y[j] = y_j
        sets = [_center_sets(state, i, j) for i in range(j)]
        choice = tight_center()
        if choice is None or choice[0] > i_min:
            # roundoff kept the minimiser just outside the tolerance band
            radii, loads, _ = sets[i_min]
            tight = _is_tight(loads, radii**alpha)
            r_max = max([r_min, *radii[tight].tolist()])
            choice = (i_min, r_max)
    center, r_max = choice
    new = max(state.ranges[center], gamma * r_max)
    return state.set_range(j, center, new, y=state.y[j], tight=(center, r_max))


def step(state: SimulationState, j: int, config: StrategyConfig) -> StepReport:
    if config.kind == "nn":
        return nn_step(state, j)
    if config.kind == "ci":
        return ci_step(state, j)
    if config.kind == "knn":
        return knn_step(state, j, config.k)
    return dual_step(state, j, config.gamma)


def simulate(instance: ArrivalInstance, config: StrategyConfig):
    """Run ``config`` over the arrival sequence and return ``(trace, reports)``.

    ``reports[j - 1]`` describes arrival ``j``; for the dual strategy it also
    carries ``y_j`` (see :func:`dual_values`).
    """
    state = SimulationState(instance, config.alpha)
    reports = []
    changes = [()]
    increments = [0.0]
    for j in range(1, instance.n):
        state.insert(j)
        rep = step(state, j, config)
        reports.append(rep)
        if rep.action == RAISED:
            changes.append((RangeChange(rep.center, rep.old_range, rep.new_range),))
        else:
            changes.append(())
        increments.append(rep.cost_delta)
    trace = AssignmentTrace(
        n=instance.n,
        alpha=config.alpha,
        changes=tuple(changes),
        increments=tuple(increments),
        strategy=config.label,
    )
    return trace, reports


def dual_values(reports) -> list[float]:
    """The dual vector ``[y_1, ..., y_{n-1}]`` recorded by a ``dual`` run."""
    return [0.0 if r.y is None else r.y for r in reports]
