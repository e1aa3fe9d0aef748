"""Drop states that never attain a lower envelope.

A state of type ``k`` is the affine function ``reward + q . x`` (the ``-x_k``
term is common to every type-``k`` state).  Lift each state to the point
``(q_1, ..., q_{m-1}, reward)``; the pointwise minimum over states only
depends on the lower convex hull of these points.  Qhull proposes the hull
vertices, and every point we discard gets an exact certificate: its ``q`` is
a convex combination of the vertices of one lower facet whose interpolated
reward does not exceed its own.  The envelope is therefore unchanged
everywhere, not just approximately.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .core import solve_exact


def _certify(point, facet_points) -> bool:
    """Exact check that ``point`` lies on or above the facet's plane inside its simplex."""
    d = len(point) - 1
    matrix = [[Fraction(fp[i]) for fp in facet_points] for i in range(d)]
    matrix.append([Fraction(1)] * len(facet_points))
    rhs = [Fraction(c) for c in point[:d]] + [Fraction(1)]
    try:
        lam = solve_exact(matrix, rhs)
    except ZeroDivisionError:
        return False
    if any(v < 0 for v in lam):
        return False
    interp = sum(v * Fraction(fp[d]) for v, fp in zip(lam, facet_points))
    return Fraction(point[d]) >= interp


def lower_envelope_support(points: Sequence[Sequence]) -> list[int]:
    """Indices of points to keep; the lower envelope of the kept set equals the full one.

    ``points`` are ``(c_1, ..., c_d, value)`` with exact (int or Fraction)
    entries and pairwise distinct coordinate parts.  Falls back to keeping
    everything when Qhull cannot handle the input (too few or degenerate
    points).
    """
    n = len(points)
    if n == 0:
        return []
    d = len(points[0]) - 1
    if n <= d + 2:
        return list(range(n))
    arr = np.array([[float(v) for v in p] for p in points])
    try:
        hull = ConvexHull(arr)
    except (QhullError, ValueError):
        return list(range(n))

    lower = [simp for simp, eq in zip(hull.simplices, hull.equations) if eq[d] < -1e-12]
    keep = set()
    for simp in lower:
        keep.update(int(i) for i in simp)

    # float barycentric prescreen, exact certificate decides
    inverses = []
    for simp in lower:
        mat = np.vstack([arr[simp, :d].T, np.ones(len(simp))])
        try:
            inverses.append((simp, np.linalg.inv(mat)))
        except np.linalg.LinAlgError:
            continue

    for i in range(n):
        if i in keep:
            continue
        target = np.append(arr[i, :d], 1.0)
        certified = False
        for simp, inv in inverses:
            if np.all(inv @ target >= -1e-9) and _certify(points[i], [points[j] for j in simp]):
                certified = True
                break
        if not certified:
            keep.add(i)
    return sorted(keep)
