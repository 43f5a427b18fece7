"""Spaces, arrival instances, range assignments and broadcast feasibility.

Every other module speaks in terms of :class:`ArrivalInstance` (an ordered
point sequence whose element 0 is the source) and plain range vectors.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SPACES = ("line", "plane", "metric")

# a point is within range iff dist <= r * (1 + REL_TOL) + ABS_TOL
REL_TOL = 1e-12
ABS_TOL = 1e-12
TRIANGLE_TOL = 1e-9
# exact solver limit and bitset limit
MAX_ORACLE_N = 20
MAX_BITSET_N = 64


class InstanceError(ValueError):
    """Raised for malformed instances (duplicates, non-metric matrices, ...)."""


def within_range(d, r):
    """Coverage test with the shared roundoff slack; works on scalars and arrays."""
    return d <= r * (1.0 + REL_TOL) + ABS_TOL


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValueError(f"distance-power gradient must exceed 1, got {alpha}")
    return alpha


@dataclass(frozen=True, eq=False)
class ArrivalInstance:
    """An ordered point sequence in a line, the plane, or a finite metric.

    For ``line`` and ``plane`` the coordinates are kept in ``coords`` with
    shape ``(n, 1)`` or ``(n, 2)``; for ``metric`` the points are the indices
    of ``matrix``. Arrays are made read-only on construction.
    """

    space: str
    coords: np.ndarray | None = None
    matrix: np.ndarray | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.space not in SPACES:
            raise InstanceError(f"unknown space {self.space!r}; expected one of {SPACES}")
        if self.space == "metric":
            if self.matrix is None:
                raise InstanceError("metric instance needs a distance matrix")
            m = np.array(self.matrix, dtype=float)
            _validate_matrix(m)
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
            object.__setattr__(self, "coords", None)
        else:
            if self.coords is None:
                raise InstanceError(f"{self.space} instance needs coordinates")
            dim = 1 if self.space == "line" else 2
            c = np.array(self.coords, dtype=float)
            if c.ndim == 1 and dim == 1:
                c = c.reshape(-1, 1)
            if c.ndim != 2 or c.shape[1] != dim:
                raise InstanceError(
                    f"{self.space} points must have {dim} coordinate(s), got shape {c.shape}"
                )
            if c.shape[0] == 0:
                raise InstanceError("instance needs at least the source point")
            if not np.all(np.isfinite(c)):
                raise InstanceError("coordinates must be finite")
            if np.unique(c, axis=0).shape[0] != c.shape[0]:
                raise InstanceError("points must be pairwise distinct")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)
            object.__setattr__(self, "matrix", None)

    # constructors -----------------------------------------------------------

    @classmethod
    def line(cls, xs: Iterable[float], name: str = "") -> "ArrivalInstance":
        return cls("line", coords=np.asarray(list(xs), dtype=float).reshape(-1, 1), name=name)

    @classmethod
    def plane(cls, pts: Iterable[Sequence[float]], name: str = "") -> "ArrivalInstance":
        return cls("plane", coords=np.asarray(list(pts), dtype=float).reshape(-1, 2), name=name)

    @classmethod
    def metric(cls, matrix, name: str = "") -> "ArrivalInstance":
        return cls("metric", matrix=np.asarray(matrix, dtype=float), name=name)

    # geometry -----------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.matrix.shape[0] if self.space == "metric" else self.coords.shape[0]

    def __len__(self) -> int:
        return self.n

    def _check_index(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"point index {i} out of range for n={self.n}")
        return int(i)

    def dist(self, i: int, j: int) -> float:
        i, j = self._check_index(i), self._check_index(j)
        if self.space == "metric":
            return float(self.matrix[i, j])
        if self.space == "line":
            return float(abs(self.coords[i, 0] - self.coords[j, 0]))
        d = self.coords[i] - self.coords[j]
        return float(np.hypot(d[0], d[1]))

    def dist_row(self, i: int, stop: int | None = None) -> np.ndarray:
        """Distances from point ``i`` to points ``0 .. stop-1`` (all by default).

        Uses the same floating-point formula as :meth:`dist`, so entries agree
        bit for bit.
        """
        i = self._check_index(i)
        stop = self.n if stop is None else stop
        if "distance_matrix" in self.__dict__:
            return self.distance_matrix[i, :stop]
        if self.space == "metric":
            return self.matrix[i, :stop]
        d = self.coords[:stop] - self.coords[i]
        if self.space == "line":
            return np.abs(d[:, 0])
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        if self.space == "metric":
            return self.matrix
        m = np.stack([self.dist_row(i) for i in range(self.n)])
        m.setflags(write=False)
        return m

    # interchange --------------------------------------------------------------

    def to_dict(self) -> dict:
        if self.space == "metric":
            return {"space": "metric", "matrix": self.matrix.tolist()}
        return {"space": self.space, "points": self.coords.tolist()}

    @classmethod
    def from_dict(cls, doc: dict, name: str = "") -> "ArrivalInstance":
        try:
            space = doc["space"]
        except KeyError:
            raise InstanceError("instance document lacks the 'space' field") from None
        if space == "metric":
            if "matrix" not in doc:
                raise InstanceError("metric instance document lacks 'matrix'")
            return cls("metric", matrix=np.asarray(doc["matrix"], dtype=float), name=name)
        if "points" not in doc:
            raise InstanceError(f"{space} instance document lacks 'points'")
        pts = [[p] if isinstance(p, (int, float)) else list(p) for p in doc["points"]]
        return cls(space, coords=np.asarray(pts, dtype=float), name=name)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=None) + "\n"

    @classmethod
    def loads(cls, text: str, name: str = "") -> "ArrivalInstance":
        return cls.from_dict(json.loads(text), name=name)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ArrivalInstance":
        path = Path(path)
        return cls.loads(path.read_text(), name=path.stem)

    def prefix(self, length: int) -> "ArrivalInstance":
        if self.space == "metric":
            return ArrivalInstance("metric", matrix=self.matrix[:length, :length], name=self.name)
        return ArrivalInstance(self.space, coords=self.coords[:length], name=self.name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArrivalInstance) or other.space != self.space:
            return NotImplemented if not isinstance(other, ArrivalInstance) else False
        a, b = (self.matrix, other.matrix) if self.space == "metric" else (self.coords, other.coords)
        return a.shape == b.shape and bool(np.array_equal(a, b))

    __hash__ = None

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<ArrivalInstance{label} {self.space} n={self.n}>"


def _validate_matrix(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InstanceError(f"distance matrix must be square and non-empty, got shape {m.shape}")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise InstanceError("distances must be finite and nonnegative")
    if not np.array_equal(m, m.T):
        raise InstanceError("distance matrix must be symmetric")
    if np.any(np.diag(m) != 0):
        raise InstanceError("distance matrix must be zero on the diagonal")
    off = m + np.eye(m.shape[0])
    if np.any(off <= 0):
        raise InstanceError("points must be pairwise distinct (off-diagonal distance 0)")
    for k in range(m.shape[0]):
        # m[i, j] <= m[i, k] + m[k, j]
        if np.any(m > m[:, k : k + 1] + m[k : k + 1, :] + TRIANGLE_TOL):
            raise InstanceError("distance matrix violates the triangle inequality")


# assignments --------------------------------------------------------------------


@dataclass(frozen=True)
class RangeAssignment:
    """Nonnegative transmission ranges, one per (inserted) point."""

    ranges: tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(v) for v in self.ranges)
        if any(not v >= 0 for v in r):
            raise ValueError("ranges must be nonnegative")
        object.__setattr__(self, "ranges", r)

    def __len__(self) -> int:
        return len(self.ranges)

    def __getitem__(self, i):
        return self.ranges[i]

    def __iter__(self):
        return iter(self.ranges)

    def cost(self, alpha: float) -> float:
        return cost_alpha(self, alpha)


def cost_alpha(assignment, alpha: float) -> float:
    """Sum of ranges raised to ``alpha``."""
    alpha = check_alpha(alpha)
    return float(sum(float(r) ** alpha for r in assignment))


def is_broadcast_feasible(instance: ArrivalInstance, prefix_len: int, assignment) -> bool:
    """True iff every point ``< prefix_len`` is reachable from the source.

    Edges are ``i -> j`` whenever ``dist(i, j)`` is within ``assignment[i]``.
    """
    if prefix_len <= 1:
        return True
    if len(assignment) < prefix_len:
        raise ValueError(f"assignment covers {len(assignment)} points, need {prefix_len}")
    ranges = np.asarray([float(assignment[i]) for i in range(prefix_len)])
    seen = np.zeros(prefix_len, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        if ranges[i] <= 0:
            continue
        reach = within_range(instance.dist_row(i, prefix_len), ranges[i]) & ~seen
        for j in np.flatnonzero(reach):
            seen[j] = True
            queue.append(int(j))
    return bool(seen.all())


def is_priority_feasible(instance: ArrivalInstance, assignment) -> bool:
    """Every point ``j >= 1`` lies within range of some earlier point."""
    for j in range(1, instance.n):
        row = instance.dist_row(j, j)
        if not np.any(within_range(row, np.asarray(assignment[:j], dtype=float))):
            return False
    return True


def candidate_ranges(instance: ArrivalInstance, i: int) -> list[float]:
    """Ascending distinct distances from ``p_i`` to every later point."""
    instance._check_index(i)
    row = instance.dist_row(i)[i + 1 :]
    return [float(v) for v in np.unique(row)]


# traces -------------------------------------------------------------------------


@dataclass(frozen=True)
class RangeChange:
    center: int
    old: float
    new: float


@dataclass(frozen=True)
class AssignmentTrace:
    """Per-arrival history of a range assignment.

    Only the changes are stored; ``snapshot(j)`` rebuilds ``r_j``. ``changes[j]``
    lists the range updates made on the arrival of ``p_j`` (empty when nothing
    changed) and ``increments[j]`` the cost added at that arrival.
    """

    n: int
    alpha: float
    changes: tuple[tuple[RangeChange, ...], ...]
    increments: tuple[float, ...]
    strategy: str = ""

    def snapshot(self, j: int) -> RangeAssignment:
        if not 0 <= j < self.n:
            raise IndexError(f"arrival {j} out of range for n={self.n}")
        ranges = [0.0] * (j + 1)
        for step in self.changes[: j + 1]:
            for ch in step:
                ranges[ch.center] = ch.new
        return RangeAssignment(tuple(ranges))

    @property
    def snapshots(self) -> list[RangeAssignment]:
        out, ranges = [], []
        for step in self.changes:
            ranges.append(0.0)
            for ch in step:
                ranges[ch.center] = ch.new
            out.append(RangeAssignment(tuple(ranges)))
        return out

    @property
    def final(self) -> RangeAssignment:
        return self.snapshot(self.n - 1)

    @property
    def total_cost(self) -> float:
        return cost_alpha(self.final, self.alpha)


def verify_trace(instance: ArrivalInstance, trace: AssignmentTrace, single_touch: bool = True) -> list[str]:
    """Check monotonicity, single-touch, bookkeeping and per-snapshot feasibility.

    Returns a list of human-readable violations; empty means the trace is sound.
    """
    problems = []
    if trace.n != instance.n:
        return [f"trace has {trace.n} arrivals but instance has {instance.n} points"]
    prev = None
    prev_cost = 0.0
    for j, snap in enumerate(trace.snapshots):
        if len(snap) != j + 1:
            problems.append(f"snapshot {j} has {len(snap)} entries")
        if snap[j] != 0.0 and not any(ch.center == j for ch in trace.changes[j]):
            problems.append(f"p_{j} did not start with range 0")
        if prev is not None:
            dec = [i for i in range(j) if snap[i] < prev[i]]
            if dec:
                problems.append(f"range of p_{dec[0]} decreased at arrival {j}")
            touched = sum(1 for i in range(j) if snap[i] != prev[i])
            if single_touch and touched > 1:
                problems.append(f"{touched} ranges changed at arrival {j}")
        cost = cost_alpha(snap, trace.alpha)
        expect = prev_cost + trace.increments[j]
        if abs(cost - expect) > 1e-9 * max(1.0, abs(cost)):
            problems.append(f"cost bookkeeping off at arrival {j}: {cost} vs {expect}")
        if not is_broadcast_feasible(instance, j + 1, snap):
            problems.append(f"snapshot {j} is not broadcast feasible")
        prev, prev_cost = snap, cost
    return problems
