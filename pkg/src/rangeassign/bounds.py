"""Closed-form constants and adversarial instance generators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ArrivalInstance, check_alpha
from .oracle import solve_optimal
from .strategies import StrategyConfig, simulate

GRID_POINTS = 10_000
DELTA_MAX = 1000.0
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo: float, hi: float, tol: float, maximize: bool = False):
    """Locate the extremum of a unimodal ``f`` on ``[lo, hi]`` to width ``tol``.

    Returns ``(x, f(x), iterations)``.
    """
    sign = -1.0 if maximize else 1.0
    g = lambda t: sign * f(t)  # noqa: E731
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    gc, gd = g(c), g(d)
    it = 0
    while b - a > tol and it < 500:
        it += 1
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - INV_PHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + INV_PHI * (b - a)
            gd = g(d)
    x = (a + b) / 2.0
    return x, f(x), it


def _grid_then_refine(f, grid: np.ndarray, tol: float, maximize: bool):
    values = np.array([f(t) for t in grid])
    k = int(np.argmax(values) if maximize else np.argmin(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    return golden_section(f, float(lo), float(hi), tol, maximize=maximize)


def adversary_ratios(delta: float, alpha: float) -> tuple[float, float, float]:
    """Ratios forced by the three adversary outcomes at spread ``delta``.

    In order: ALG already spans ``delta * x`` (stop after three points), ALG
    grows ``p_0`` for the fourth point, ALG grows ``p_1`` for it.
    """
    da = delta**alpha
    return (
        da / (1.0 + (delta - 1.0) ** alpha),
        (da + (delta - 1.0) ** alpha) / da,
        (1.0 + (delta + 1.0) ** alpha) / da,
    )


@dataclass(frozen=True)
class UniversalConstants:
    alpha: float
    c_alpha: float
    delta_alpha: float
    iterations: int

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "c": self.c_alpha,
            "delta": self.delta_alpha,
            "iterations": self.iterations,
        }


def universal_constants(alpha: float, tol: float = 1e-10) -> UniversalConstants:
    """Lower bound ``c_alpha`` valid for every online algorithm on the line.

    Maximises the minimum of :func:`adversary_ratios` over ``delta`` in
    ``(1, 1000]``: a log-spaced grid picks the bracket, golden section
    refines it (the objective has kinks where the branches cross).
    """
    alpha = check_alpha(alpha)
    if not tol > 0:
        raise ValueError("tol must be positive")
    f = lambda d: min(adversary_ratios(d, alpha))  # noqa: E731
    grid = np.logspace(0.0, math.log10(DELTA_MAX), GRID_POINTS + 1)[1:]
    delta, c, it = _grid_then_refine(f, grid, tol, maximize=True)
    return UniversalConstants(alpha, c, delta, it)


def c2_closed_form() -> tuple[float, float]:
    """``(c_2, delta_2)`` from their radical expressions."""
    s = math.sqrt(183.0)
    c2 = (4.0 + np.cbrt(496.0 - 24.0 * s) + 2.0 * np.cbrt(62.0 + 3.0 * s)) / 12.0
    d2 = (5.0 + np.cbrt(62.0 - 3.0 * s) + np.cbrt(62.0 + 3.0 * s)) / 3.0
    return float(c2), float(d2)


def f_star_upper(alpha):
    """Upper bound on the normalised nearest-predecessor sum inside a disk.

    ``alpha * (2**alpha - 3) / (2**(alpha - 1) - alpha)``, defined for
    ``alpha > 2``. Integer ``alpha`` is evaluated in exact arithmetic.
    """
    if not alpha > 2:
        raise ValueError(f"bound only holds for alpha > 2, got {alpha}")
    if float(alpha).is_integer():
        a = int(alpha)
        num, den = a * (2**a - 3), 2 ** (a - 1) - a
        return num // den if num % den == 0 else num / den
    alpha = float(alpha)
    den = 2.0 ** (alpha - 1.0) - alpha
    if den <= 0:
        raise ValueError(f"denominator vanishes at alpha={alpha}")
    return alpha * (2.0**alpha - 3.0) / den


def alpha_star(tol: float = 1e-10) -> tuple[float, float]:
    """Minimiser of :func:`f_star_upper` over ``(2, 10]`` and the minimum."""
    f = lambda a: f_star_upper(float(a))  # noqa: E731
    grid = np.linspace(2.0, 10.0, GRID_POINTS + 1)[1:]
    a, v, _ = _grid_then_refine(f, grid, tol, maximize=False)
    return a, v


def nn_plane_lower_bound(alpha: float) -> float:
    """Limit of NN's ratio on :func:`gen_2d_nn_lb` as ``epsilon -> 0``."""
    return 6.0 * (1.0 + ((math.sqrt(6.0) - math.sqrt(2.0)) / 2.0) ** alpha)


# generators ---------------------------------------------------------------------


def gen_1d_universal(alpha: float, x: float, branch: str = "F1", delta: float | None = None) -> ArrivalInstance:
    """Three points ``0, x, delta*x`` (F1), plus ``-delta*x`` for F2."""
    if not x >= 1:
        raise ValueError(f"x must be at least 1, got {x}")
    if delta is None:
        delta = universal_constants(alpha).delta_alpha
    branch = branch.upper()
    pts = [0.0, x, delta * x]
    if branch == "F2":
        pts.append(-delta * x)
    elif branch != "F1":
        raise ValueError(f"branch must be F1 or F2, got {branch!r}")
    return ArrivalInstance.line(pts, name=f"universal-{branch.lower()}")


def gen_1d_nn_lb(delta: float, x: float) -> ArrivalInstance:
    """``0, delta*x, x, -x``: NN pays ``(1 - delta)**alpha + 1`` times the optimum."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    return ArrivalInstance.line([0.0, delta * x, x, -x], name="nn-lb-1d")


def gen_2d_nn_lb(epsilon: float) -> ArrivalInstance:
    """The 19-point planar instance where NN pays about 7.6 against 1."""
    if not 0 < epsilon < 0.1:
        raise ValueError(f"epsilon must lie in (0, 0.1), got {epsilon}")
    polar = [(0.0, 0.0)]
    polar += [(epsilon, k * math.pi / 3) for k in range(6)]
    polar += [(1.0, k * math.pi / 3) for k in range(6)]
    polar += [(1.0, math.pi / 6 - epsilon + k * math.pi / 3) for k in range(6)]
    pts = [(r * math.cos(t), r * math.sin(t)) for r, t in polar]
    return ArrivalInstance.plane(pts, name="nn-lb-2d")


def gen_recursive_squares(rounds: int) -> ArrivalInstance:
    """Source at the origin, then the centres of ever finer subsquares.

    The inscribed square of the unit disk (centre-to-corner distance 1) is
    split into four per round; round ``k`` adds ``4**k`` centres row by row,
    each at distance ``2**-k`` from its parent centre.
    """
    if not 1 <= rounds <= 6:
        raise ValueError(f"rounds must lie in 1..6, got {rounds}")
    half = 1.0 / math.sqrt(2.0)
    pts = [(0.0, 0.0)]
    for k in range(1, rounds + 1):
        cells = 2**k
        side = 2.0 * half / cells
        for row in range(cells):
            for col in range(cells):
                pts.append((-half + (col + 0.5) * side, half - (row + 0.5) * side))
    return ArrivalInstance.plane(pts, name=f"recursive-squares-{rounds}")


# adaptive adversary ----------------------------------------------------------------


@dataclass(frozen=True)
class AdversaryOutcome:
    instance: ArrivalInstance
    strategy: str
    strategy_cost: float
    reference_cost: float
    ratio: float
    branch: str


def run_adaptive_adversary(strategy: StrategyConfig, alpha: float, x: float) -> AdversaryOutcome:
    """Play F1, then extend to F2 unless the strategy already spans ``delta * x``."""
    alpha = check_alpha(alpha)
    config = strategy.with_alpha(alpha)
    delta = universal_constants(alpha).delta_alpha
    f1 = gen_1d_universal(alpha, x, "F1", delta=delta)
    trace, _ = simulate(f1, config)
    span = delta * x
    if max(trace.final) >= span * (1.0 - 1e-12):
        played, branch, final_trace = f1, "F1", trace
    else:
        played = gen_1d_universal(alpha, x, "F2", delta=delta)
        final_trace, reports = simulate(played, config)
        last = reports[-1]
        if last.action == "raised" and last.center in (0, 1):
            branch = f"F2/p{last.center}"
        else:
            branch = "F2/other"
    cost = final_trace.total_cost
    ref = solve_optimal(played, alpha).cost
    return AdversaryOutcome(played, config.label, cost, ref, cost / ref, branch)
