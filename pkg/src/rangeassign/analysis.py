"""Charging disks, nearest-predecessor sums and the ratio harness."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .core import ArrivalInstance, AssignmentTrace, check_alpha, within_range
from .oracle import solve_optimal
from .strategies import StrategyConfig, simulate

TWO_NN = "two-nn"
MIDPOINT_NN = "midpoint-nn"
GAMMA_LIMIT = (3.0 - math.sqrt(7.0)) / 4.0


@dataclass(frozen=True)
class ChargingDisk:
    owner: int
    center: tuple[float, float]
    radius: float
    variant: str
    empty: bool = False

    def intersects(self, other: "ChargingDisk", tol: float = 1e-9) -> bool:
        if self.empty or other.empty:
            return False
        gap = math.dist(self.center, other.center) - (self.radius + other.radius)
        return gap < -tol


def charging_disks(
    instance: ArrivalInstance,
    trace: AssignmentTrace,
    variant: str = TWO_NN,
    gamma: float | None = None,
) -> list[ChargingDisk]:
    """One disk per arrival ``j >= 1`` (empty when the arrival was already covered).

    ``two-nn`` disks sit on the arriving point with half the nearest-neighbour
    distance and pair with a 2-NN trace. ``midpoint-nn`` disks sit on the
    midpoint of the point and its nearest neighbour with radius ``gamma``
    times that distance and pair with an NN trace.
    """
    if instance.space != "plane":
        raise ValueError("charging disks are defined for planar instances")
    if variant == TWO_NN:
        if trace.strategy != "knn(k=2)":
            raise ValueError(f"two-nn disks need a 2-NN trace, got {trace.strategy!r}")
    elif variant == MIDPOINT_NN:
        if trace.strategy not in ("nn", "knn(k=1)"):
            raise ValueError(f"midpoint-nn disks need an NN trace, got {trace.strategy!r}")
        if gamma is None or not 0 < gamma < GAMMA_LIMIT:
            raise ValueError(f"gamma must lie in (0, {GAMMA_LIMIT:.6f}), got {gamma}")
    else:
        raise ValueError(f"unknown variant {variant!r}")

    pts = instance.coords
    disks = []
    for j in range(1, instance.n):
        if not trace.changes[j]:
            disks.append(ChargingDisk(j, tuple(pts[j]), 0.0, variant, empty=True))
            continue
        row = instance.dist_row(j, j)
        nn = int(np.argmin(row))
        d = float(row[nn])
        if variant == TWO_NN:
            disks.append(ChargingDisk(j, (float(pts[j, 0]), float(pts[j, 1])), d / 2.0, variant))
        else:
            mid = (pts[j] + pts[nn]) / 2.0
            disks.append(ChargingDisk(j, (float(mid[0]), float(mid[1])), gamma * d, variant))
    return disks


def check_disjoint(disks, tol: float = 1e-9):
    """``None`` if the non-empty disks are pairwise disjoint, else the first overlapping pair."""
    live = [d for d in disks if not d.empty]
    if len({d.variant for d in live}) > 1:
        raise ValueError("disks of different variants cannot be compared")
    if len(live) < 2:
        return None
    c = np.array([d.center for d in live])
    r = np.array([d.radius for d in live])
    for a in range(len(live) - 1):
        gap = np.hypot(*(c[a + 1 :] - c[a]).T) - (r[a] + r[a + 1 :])
        bad = np.flatnonzero(gap < -tol)
        if bad.size:
            return live[a], live[a + 1 + int(bad[0])]
    return None


def check_containment(instance: ArrivalInstance, disks, assignment, scale: float, tol: float = 1e-9):
    """``None`` if each charging disk fits in a scaled disk of a covering predecessor.

    For disk ``k`` some ``i < k`` with ``p_k`` inside ``assignment[i]`` must
    satisfy ``disk_k`` within ``ball(p_i, scale * assignment[i])``. Final
    ranges are used; they dominate the ranges at time ``k`` because ranges
    only grow, so a pass here is implied by the per-time statement.
    Returns the first disk without such a witness.
    """
    pts = instance.coords
    ranges = np.asarray([float(v) for v in assignment])
    for disk in disks:
        if disk.empty:
            continue
        k = disk.owner
        covering = within_range(instance.dist_row(k, k), ranges[:k])
        reach = np.hypot(*(pts[:k] - np.asarray(disk.center)).T) + disk.radius
        fits = reach <= scale * ranges[:k] + tol
        if not np.any(covering & fits):
            return disk
    return None


def f_alpha_sum(instance: ArrivalInstance, alpha: float, subset=None) -> float:
    """Sum over the subset (minus its first element) of nearest-earlier-member distance ** alpha.

    The lowest index of ``subset`` acts as the predecessor present from the
    start; by default the whole sequence with ``p_0`` in that role.
    """
    alpha = check_alpha(alpha)
    idx = np.arange(instance.n) if subset is None else np.array(sorted(set(subset)), dtype=int)
    total = 0.0
    for pos in range(1, idx.size):
        j = int(idx[pos])
        row = instance.dist_row(j)[idx[:pos]]
        total += float(row.min()) ** alpha
    return total


def instance_digest(instance: ArrivalInstance) -> str:
    return hashlib.sha256(instance.dumps().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RatioReport:
    strategy: str
    alpha: float
    cost: float
    oracle_cost: float
    ratio: float
    increments: tuple[float, ...]
    digest: str


def competitive_ratio(instance: ArrivalInstance, strategy: StrategyConfig, oracle_cost: float | None = None) -> RatioReport:
    """Strategy cost over the exact offline optimum on one instance."""
    trace, _ = simulate(instance, strategy)
    if oracle_cost is None:
        oracle_cost = solve_optimal(instance, strategy.alpha).cost
    cost = trace.total_cost
    if oracle_cost > 0:
        ratio = cost / oracle_cost
    else:
        ratio = 1.0 if cost == 0 else math.inf
    return RatioReport(
        strategy=strategy.label,
        alpha=strategy.alpha,
        cost=cost,
        oracle_cost=oracle_cost,
        ratio=ratio,
        increments=trace.increments,
        digest=instance_digest(instance),
    )
