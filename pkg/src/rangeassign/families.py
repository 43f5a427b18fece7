"""Seeded random instance families."""

from __future__ import annotations

import numpy as np

from .core import ArrivalInstance

DEFAULT_REGION = {
    "line": ((-1.0, 1.0), (0.0,)),
    "plane": ((0.0, 1.0), (0.5, 0.5)),
    "metric": ((0.1, 1.0), None),
}


def random_instance(
    rng: np.random.Generator,
    space: str,
    n: int,
    low: float | None = None,
    high: float | None = None,
    source=None,
) -> ArrivalInstance:
    """Uniform points in ``[low, high]`` (or its square) after a fixed source.

    For ``metric`` the matrix is the shortest-path closure of a complete graph
    with edge weights uniform in ``[low, high]``, which is a metric by
    construction and generally not Euclidean.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    (dlo, dhi), dsrc = DEFAULT_REGION[space]
    low = dlo if low is None else float(low)
    high = dhi if high is None else float(high)
    if not high > low:
        raise ValueError(f"empty region [{low}, {high}]")
    if space == "metric":
        if low <= 0:
            raise ValueError("metric edge weights must be positive")
        w = rng.uniform(low, high, size=(n, n))
        w = np.triu(w, 1)
        d = w + w.T
        for k in range(n):
            d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
        return ArrivalInstance.metric(d, name="random-metric")

    dim = 1 if space == "line" else 2
    src = np.asarray(dsrc if source is None else source, dtype=float).reshape(dim)
    pts = [src]
    seen = {tuple(src)}
    while len(pts) < n:
        p = rng.uniform(low, high, size=dim)
        if tuple(p) in seen:
            continue
        seen.add(tuple(p))
        pts.append(p)
    if space == "line":
        return ArrivalInstance.line([p[0] for p in pts], name="random-line")
    return ArrivalInstance.plane(pts, name="random-plane")


def random_nonnegative_line(rng: np.random.Generator, n: int) -> ArrivalInstance:
    """Source at 0 followed by points in ``(0, 1]``."""
    return random_instance(rng, "line", n, low=0.0, high=1.0, source=(0.0,))
