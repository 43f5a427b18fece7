"""Covering LP and its dual, as matrices and as CPLEX-style LP text.

Variables are ``x_i_k`` (set centred at ``p_i`` with the ``k``-th smallest
candidate radius) and ``y_j`` (one per non-source point).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ArrivalInstance, candidate_ranges, check_alpha
from .oracle import CoverSet

FMT = "%.17g"


@dataclass(frozen=True)
class CoveringLP:
    """``min c.x  s.t.  A x >= 1, x >= 0`` with rows = elements, columns = sets."""

    sets: tuple[CoverSet, ...]
    names: tuple[str, ...]
    costs: np.ndarray
    matrix: np.ndarray  # (n-1) x len(sets), 0/1


def covering_lp(instance: ArrivalInstance, alpha: float) -> CoveringLP:
    alpha = check_alpha(alpha)
    sets, names, cols = [], [], []
    for i in range(instance.n - 1):
        for k, r in enumerate(candidate_ranges(instance, i)):
            s = CoverSet(i, r)
            col = np.zeros(instance.n - 1)
            for j in s.members(instance):
                col[j - 1] = 1.0
            sets.append(s)
            names.append(f"x_{i}_{k}")
            cols.append(col)
    matrix = np.column_stack(cols) if cols else np.zeros((max(instance.n - 1, 0), 0))
    costs = np.array([s.radius**alpha for s in sets])
    return CoveringLP(tuple(sets), tuple(names), costs, matrix)


def _terms(coefs, names) -> str:
    parts = [f"{'+' if c >= 0 else '-'} {FMT % abs(c)} {v}" for c, v in zip(coefs, names)]
    return " ".join(parts) if parts else "0"


def primal_lp_text(instance: ArrivalInstance, alpha: float) -> str:
    lp = covering_lp(instance, alpha)
    lines = ["\\ covering LP: one row per non-source point", "Minimize", f" cost: {_terms(lp.costs, lp.names)}", "Subject To"]
    for row in range(lp.matrix.shape[0]):
        cols = np.flatnonzero(lp.matrix[row])
        lhs = _terms([1.0] * cols.size, [lp.names[c] for c in cols])
        lines.append(f" cover_{row + 1}: {lhs} >= 1")
    lines.append("Bounds")
    lines.extend(f" {v} >= 0" for v in lp.names)
    lines.append("End")
    return "\n".join(lines) + "\n"


def dual_lp_text(instance: ArrivalInstance, alpha: float) -> str:
    lp = covering_lp(instance, alpha)
    ys = [f"y_{j}" for j in range(1, instance.n)]
    lines = ["\\ packing LP dual to the covering LP", "Maximize", f" value: {_terms([1.0] * len(ys), ys)}", "Subject To"]
    for col, name in enumerate(lp.names):
        rows = np.flatnonzero(lp.matrix[:, col])
        lhs = _terms([1.0] * rows.size, [ys[r] for r in rows])
        lines.append(f" pack_{name[2:]}: {lhs} <= {FMT % lp.costs[col]}")
    lines.append("Bounds")
    lines.extend(f" {v} >= 0" for v in ys)
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(instance: ArrivalInstance, alpha: float, which: str = "primal") -> str:
    if which == "primal":
        return primal_lp_text(instance, alpha)
    if which == "dual":
        return dual_lp_text(instance, alpha)
    raise ValueError(f"expected 'primal' or 'dual', got {which!r}")
