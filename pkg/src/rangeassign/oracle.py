"""Offline solvers for priority broadcast range assignment.

The offline (incremental) optimum is a minimum-cost set cover: element
``j >= 1`` may only be covered by a set ``S(i, r) = {j > i : dist(i, j) <= r}``
of cost ``r ** alpha``. :func:`solve_optimal` solves it exactly by dynamic
programming over covered-element bitsets; :func:`approx_5alpha` is the
primal-dual 5^alpha approximation built from a maximal dual solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    MAX_ORACLE_N,
    ArrivalInstance,
    RangeAssignment,
    candidate_ranges,
    check_alpha,
    cost_alpha,
    is_broadcast_feasible,
    within_range,
)

TIGHT_TOL = 1e-9
POSITIVE_Y = 1e-12


class InstanceTooLarge(ValueError):
    def __init__(self, n: int, limit: int = MAX_ORACLE_N):
        super().__init__(f"instance too large for the exact solver: n={n} > limit {limit}")
        self.n = n
        self.limit = limit


@dataclass(frozen=True, order=True)
class CoverSet:
    center: int
    radius: float

    def members(self, instance: ArrivalInstance) -> frozenset[int]:
        row = instance.dist_row(self.center)
        idx = np.flatnonzero(within_range(row, self.radius))
        return frozenset(int(j) for j in idx if j > self.center)

    def cost(self, alpha: float) -> float:
        return self.radius**alpha


@dataclass(frozen=True)
class OracleResult:
    cost: float
    assignment: RangeAssignment
    cover: tuple[CoverSet, ...]
    states_expanded: int


@dataclass(frozen=True)
class DualSolution:
    """Dual values ``y[j]`` for ``j = 1 .. n-1``; ``y[0]`` is unused and zero."""

    y: tuple[float, ...]

    @property
    def total(self) -> float:
        return float(sum(self.y[1:]))

    def load(self, instance: ArrivalInstance, s: CoverSet) -> float:
        return float(sum(self.y[j] for j in s.members(instance)))

    def is_tight(self, instance: ArrivalInstance, s: CoverSet, alpha: float) -> bool:
        cap = s.radius**alpha
        return abs(self.load(instance, s) - cap) <= TIGHT_TOL * max(1.0, cap)


def all_cover_sets(instance: ArrivalInstance) -> list[CoverSet]:
    return [
        CoverSet(i, r) for i in range(instance.n - 1) for r in candidate_ranges(instance, i)
    ]


def _bitsets(instance: ArrivalInstance, sets):
    """Membership bitmask of every set; element ``j`` maps to bit ``j - 1``."""
    masks = []
    for s in sets:
        m = 0
        for j in s.members(instance):
            m |= 1 << (j - 1)
        masks.append(m)
    return masks


def solve_optimal(instance: ArrivalInstance, alpha: float, limit: int = MAX_ORACLE_N) -> OracleResult:
    """Exact offline optimum by subset DP.

    ``best[mask]`` is the cheapest way to cover the elements missing from
    ``mask``. The transition always covers the lowest missing element, so
    masks are processed grouped by that element, from the highest down, and
    every group is evaluated with vectorised gathers.
    """
    alpha = check_alpha(alpha)
    n = instance.n
    if n > limit:
        raise InstanceTooLarge(n, limit)
    if n == 1:
        return OracleResult(0.0, RangeAssignment((0.0,)), (), 0)
    m = n - 1
    sets = all_cover_sets(instance)
    masks = _bitsets(instance, sets)
    costs = [s.cost(alpha) for s in sets]
    # keep the cheapest set per distinct membership
    cheapest: dict[int, int] = {}
    for k, mk in enumerate(masks):
        if mk and (mk not in cheapest or costs[k] < costs[cheapest[mk]]):
            cheapest[mk] = k
    by_element = [[] for _ in range(m)]
    for mk, k in cheapest.items():
        for e in range(m):
            if mk >> e & 1:
                by_element[e].append(k)

    full = (1 << m) - 1
    best = np.full(1 << m, np.inf)
    choice = np.full(1 << m, -1, dtype=np.int32)
    best[full] = 0.0
    expanded = 0
    for e in range(m - 1, -1, -1):
        # masks whose lowest unset bit is e: bits 0..e-1 set, bit e clear
        high = np.arange(1 << (m - e - 1), dtype=np.int64) << (e + 1)
        group = high | ((1 << e) - 1)
        expanded += group.size
        for k in by_element[e]:
            cand = costs[k] + best[group | masks[k]]
            better = cand < best[group]
            best[group[better]] = cand[better]
            choice[group[better]] = k
    if not np.isfinite(best[0]):
        raise RuntimeError("no feasible cover; every point should have a predecessor")

    chosen, mask = [], 0
    while mask != full:
        k = int(choice[mask])
        chosen.append(sets[k])
        mask |= masks[k]
    ranges = [0.0] * n
    for s in chosen:
        ranges[s.center] = max(ranges[s.center], s.radius)
    assignment = RangeAssignment(tuple(ranges))
    cover = tuple(sorted(chosen))
    return OracleResult(cost_alpha(assignment, alpha), assignment, cover, expanded)


def brute_force_optimal(instance: ArrivalInstance, alpha: float) -> tuple[float, RangeAssignment]:
    """Independent exhaustive search over radii ``{0} u candidate_ranges(i)``.

    Feasibility is tested as "every prefix has a broadcast tree" with the
    final ranges, which is the incremental requirement stated directly.
    Branch-and-bound on the running cost keeps it exact.
    """
    alpha = check_alpha(alpha)
    n = instance.n
    if n == 1:
        return 0.0, RangeAssignment((0.0,))
    options = [[0.0, *candidate_ranges(instance, i)] for i in range(n - 1)]
    best = [np.inf, None]
    ranges = [0.0] * n

    def search(i, spent):
        if spent >= best[0]:
            return
        if i == n - 1:
            best[0], best[1] = spent, tuple(ranges)
            return
        for r in options[i]:
            ranges[i] = r
            # ranges of p_0..p_i are now final; prefix p_0..p_{i+1} must work
            if is_broadcast_feasible(instance, i + 2, ranges):
                search(i + 1, spent + r**alpha)
        ranges[i] = 0.0

    search(0, 0.0)
    return float(best[0]), RangeAssignment(best[1])


def maximal_dual(instance: ArrivalInstance, alpha: float) -> DualSolution:
    """Raise ``y_1, ..., y_{n-1}`` in arrival order, each as far as feasible."""
    alpha = check_alpha(alpha)
    n = instance.n
    y = [0.0] * n
    sets = all_cover_sets(instance)
    members = [s.members(instance) for s in sets]
    caps = [s.cost(alpha) for s in sets]
    for j in range(1, n):
        slack = min(
            caps[k] - sum(y[t] for t in mem)
            for k, mem in enumerate(members)
            if j in mem
        )
        y[j] = max(0.0, slack)
    return DualSolution(tuple(y))


def tight_sets(instance: ArrivalInstance, alpha: float, dual: DualSolution) -> list[CoverSet]:
    return [s for s in all_cover_sets(instance) if dual.is_tight(instance, s, alpha)]


def minimal_tight_cover(instance: ArrivalInstance, alpha: float, dual: DualSolution) -> list[CoverSet]:
    """A minimally feasible cover made of tight sets, one per centre at most.

    Each element starts with the largest tight set of the lowest centre that
    reaches it; redundant sets are then dropped cheapest first.
    """
    alpha = check_alpha(alpha)
    n = instance.n
    if n == 1:
        return []
    largest: dict[int, CoverSet] = {}
    for s in tight_sets(instance, alpha, dual):
        if s.center not in largest or s.radius > largest[s.center].radius:
            largest[s.center] = s
    mem = {c: s.members(instance) for c, s in largest.items()}
    picked: dict[int, CoverSet] = {}
    for j in range(1, n):
        owner = next((c for c in sorted(largest) if j in mem[c]), None)
        if owner is None:
            raise ValueError(f"element {j} lies in no tight set; the dual is not maximal")
        picked[owner] = largest[owner]

    cover = sorted(picked.values(), key=lambda s: (s.radius, s.center))
    count = {j: 0 for j in range(1, n)}
    for s in cover:
        for j in mem[s.center]:
            count[j] += 1
    kept = []
    for s in cover:
        if all(count[j] > 1 for j in mem[s.center]):
            for j in mem[s.center]:
                count[j] -= 1
        else:
            kept.append(s)
    return sorted(kept)


@dataclass(frozen=True)
class ApproxCertificate:
    cover: tuple[CoverSet, ...]
    independent: tuple[int, ...]
    clusters: dict
    sum_y: float
    dual: DualSolution

    def bound(self, alpha: float) -> float:
        return 5.0**alpha * self.sum_y


def approx_5alpha(instance: ArrivalInstance, alpha: float):
    """Offline 5^alpha approximation; returns ``(assignment, certificate)``.

    The cover's centres are visited by decreasing radius (ties by index).
    A centre joins the independent set ``I`` if it conflicts with no member;
    its cluster takes every later centre that conflicts with it but not with
    ``I`` as it stood before. The earliest point of each cluster receives five
    times the cluster head's radius.
    """
    alpha = check_alpha(alpha)
    n = instance.n
    dual = maximal_dual(instance, alpha)
    cover = minimal_tight_cover(instance, alpha, dual)
    radius = {s.center: s.radius for s in cover}
    positive = {
        s.center: frozenset(j for j in s.members(instance) if dual.y[j] > POSITIVE_Y)
        for s in cover
    }

    def conflicts(a, b):
        return bool(positive[a] & positive[b])

    order = sorted(radius, key=lambda c: (-radius[c], c))
    independent: list[int] = []
    clusters: dict[int, tuple[int, ...]] = {}
    for pos, i in enumerate(order):
        if any(conflicts(i, j) for j in independent):
            continue
        members = [i] + [
            j
            for j in order[pos + 1 :]
            if conflicts(j, i) and not any(conflicts(j, t) for t in independent)
        ]
        clusters[i] = tuple(members)
        independent.append(i)

    ranges = [0.0] * n
    for i in independent:
        head = min(clusters[i])
        ranges[head] = 5.0 * radius[i]
    cert = ApproxCertificate(
        cover=tuple(cover),
        independent=tuple(independent),
        clusters=clusters,
        sum_y=dual.total,
        dual=dual,
    )
    return RangeAssignment(tuple(ranges)), cert


def dual_violations(instance: ArrivalInstance, alpha: float, y, slack: float = 1e-9) -> list[CoverSet]:
    """Sets whose dual constraint ``sum y <= r**alpha`` fails (beyond ``slack``).

    ``y`` is indexed by point; entries past ``len(y)`` count as not yet arrived.
    """
    arrived = len(y)
    bad = []
    for s in all_cover_sets(instance):
        load = sum(y[j] for j in s.members(instance) if j < arrived)
        if load > s.radius**alpha + slack:
            bad.append(s)
    return bad

