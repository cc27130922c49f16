"""Gauss quadrature on segments and triangles with optional splitting at straight lines.

Benchmark dual fields are smooth away from a straight discontinuity line,
so integration domains are clipped at such lines and each smooth piece is
integrated with a standard rule.  Segment rules are Gauss-Legendre; the
triangle rule is a collapsed tensor-product (Duffy) rule built from
Gauss-Legendre, exact for polynomials of the requested total degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "JumpLine",
    "side_average",
    "triangle_integral",
    "clip_side_fraction",
    "segment_rule",
    "triangle_rule",
    "batched_segment_rule",
]

# Crossings this close (in arc-length parameter) to a segment endpoint are
# treated as no split; degenerate slivers otherwise poison the sub-rules.
_PARAM_TOL = 1e-12


@dataclass(frozen=True)
class JumpLine:
    """Straight line base + span(tangent) with a fixed unit normal."""

    base: tuple[float, float]
    tangent: tuple[float, float]
    normal: tuple[float, float]

    def __post_init__(self):
        t = np.asarray(self.tangent)
        n = np.asarray(self.normal)
        if abs(np.hypot(*t) - 1.0) > 1e-14 or abs(np.hypot(*n) - 1.0) > 1e-14:
            raise ValueError("tangent and normal must be unit vectors")
        if abs(float(t @ n)) > 1e-14:
            raise ValueError("tangent and normal must be orthogonal")

    @classmethod
    def from_tangent(cls, base, tangent) -> "JumpLine":
        """Line through ``base`` along ``tangent``; normal is tangent rotated by -90 degrees."""
        t = np.asarray(tangent, dtype=float)
        t = t / np.hypot(*t)
        return cls(base=(float(base[0]), float(base[1])),
                   tangent=(float(t[0]), float(t[1])),
                   normal=(float(t[1]), float(-t[0])))

    def signed_distance(self, x) -> np.ndarray:
        """(x - base) . normal, vectorized over leading axes of x."""
        x = np.asarray(x, dtype=float)
        return (x[..., 0] - self.base[0]) * self.normal[0] + (
            x[..., 1] - self.base[1]
        ) * self.normal[1]


def _as_lines(split) -> list[JumpLine]:
    if split is None:
        return []
    if isinstance(split, JumpLine):
        return [split]
    return list(split)


@lru_cache(maxsize=None)
def segment_rule(order: int):
    """Gauss-Legendre nodes/weights on [0, 1]; ``order`` points, exact to degree 2*order-1."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Nodes (M, 2) and weights (M,) on the reference triangle, exact to total ``degree``.

    Collapsed coordinates x = u*(1-v), y = v carry a (1-v) Jacobian, so the
    v-direction needs one extra polynomial degree.
    """
    if degree < 1:
        raise ValueError("quadrature degree must be >= 1")
    nu = (degree + 2) // 2
    nv = (degree + 3) // 2
    u, wu = segment_rule(nu)
    v, wv = segment_rule(nv)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    nodes = np.column_stack([(uu * (1.0 - vv)).ravel(), vv.ravel()])
    weights = (np.outer(wu, wv) * (1.0 - vv)).ravel()
    return nodes, weights


def _crossing_param(a, b, line: JumpLine):
    """Arc-length parameter in (0, 1) where segment a-b crosses the line, else None."""
    da = float(line.signed_distance(a))
    db = float(line.signed_distance(b))
    den = db - da
    if den == 0.0:
        return None
    t = -da / den
    if t <= _PARAM_TOL or t >= 1.0 - _PARAM_TOL:
        return None
    if da * db > 0.0:
        return None
    return t


def side_average(f: Callable, a, b, split=None, order: int = 5) -> np.ndarray:
    """Average of f over the segment a-b, split at any crossing jump lines.

    f must accept an (N, 2) array of points and return (N,) or (N, d) values.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    breaks = sorted({0.0, 1.0} | {t for line in _as_lines(split)
                                  if (t := _crossing_param(a, b, line)) is not None})
    x, w = segment_rule(order)
    nodes, weights = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        t = lo + (hi - lo) * x
        nodes.append(a + t[:, None] * (b - a))
        weights.append((hi - lo) * w)
    values = np.asarray(f(np.vstack(nodes)))
    weights = np.concatenate(weights)
    if values.ndim == 1:
        return float(weights @ values)
    return weights @ values


def batched_segment_rule(a, b, lines: Sequence[JumpLine], order: int):
    """Split-aware averaging rule for many segments at once.

    Parameters
    ----------
    a, b : (E, 2) arrays of segment endpoints.
    lines : jump lines to split at (may be empty).
    order : Gauss points per sub-segment.

    Returns
    -------
    nodes : (E, M, 2) and weights (E, M) with per-row weight sum 1, so that
        ``einsum('em,em...->e...', weights, f(nodes))`` is the segment average.
        Crossing parameters of non-crossing lines collapse to zero-length
        sub-segments with zero weight, keeping the shapes fixed.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n_seg = len(a)
    params = [np.zeros(n_seg), np.ones(n_seg)]
    for line in lines:
        da = line.signed_distance(a)
        db = line.signed_distance(b)
        den = db - da
        safe = np.where(den == 0.0, 1.0, den)
        t = np.where(den == 0.0, 1.0, -da / safe)
        crosses = (da * db < 0.0) & (t > _PARAM_TOL) & (t < 1.0 - _PARAM_TOL)
        params.append(np.where(crosses, t, 1.0))
    breaks = np.sort(np.column_stack(params), axis=1)  # (E, L)
    frac = np.diff(breaks, axis=1)  # (E, L-1), rows sum to 1
    x, w = segment_rule(order)
    t_nodes = breaks[:, :-1, None] + frac[:, :, None] * x  # (E, L-1, O)
    weights = (frac[:, :, None] * w).reshape(n_seg, -1)
    direction = (b - a)[:, None, None, :]
    nodes = a[:, None, None, :] + t_nodes[..., None] * direction
    return nodes.reshape(n_seg, -1, 2), weights


def clip_side_fraction(a, b, line: JumpLine) -> float:
    """Fraction of the segment a-b lying on the normal-negative side of the line.

    A segment contained in the line itself counts as fraction 0.
    """
    t = _crossing_param(a, b, line)
    if t is None:
        mid = 0.5 * (np.asarray(a, dtype=float) + np.asarray(b, dtype=float))
        return 1.0 if float(line.signed_distance(mid)) < 0.0 else 0.0
    if float(line.signed_distance(a)) < 0.0:
        return float(np.clip(t, 0.0, 1.0))
    return float(np.clip(1.0 - t, 0.0, 1.0))


def _clip_polygon(poly: np.ndarray, line: JumpLine, keep_negative: bool):
    """Sutherland-Hodgman clip of a convex polygon against one halfplane."""
    dist = line.signed_distance(poly)
    scale = max(1.0, float(np.abs(poly).max()))
    on = np.abs(dist) <= 1e-14 * scale
    sign = -dist if keep_negative else dist
    sign = np.where(on, 0.0, sign)
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        pi, pj = poly[i], poly[j]
        si, sj = sign[i], sign[j]
        if si >= 0.0:
            out.append(pi)
        if (si > 0.0 and sj < 0.0) or (si < 0.0 and sj > 0.0):
            t = si / (si - sj)
            out.append(pi + t * (pj - pi))
    if len(out) < 3:
        return None
    return np.asarray(out)


def _fan_triangles(poly: np.ndarray):
    for i in range(1, len(poly) - 1):
        yield np.asarray([poly[0], poly[i], poly[i + 1]])


def _polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def triangle_integral(f: Callable, tri, split=None, order: int = 6) -> np.ndarray:
    """Integral of f over a triangle, clipped into smooth pieces at jump lines.

    ``tri`` is a (3, 2) array of corners; f maps (N, 2) points to (N,) or
    (N, d) values.
    """
    tri = np.asarray(tri, dtype=float)
    pieces = [tri]
    for line in _as_lines(split):
        next_pieces = []
        for poly in pieces:
            area = _polygon_area(poly)
            for keep_negative in (False, True):
                clipped = _clip_polygon(poly, line, keep_negative)
                if clipped is not None and _polygon_area(clipped) > 1e-15 * max(area, 1e-30):
                    next_pieces.append(clipped)
        pieces = next_pieces
    ref_nodes, ref_weights = triangle_rule(order)
    nodes, weights = [], []
    for poly in pieces:
        for sub in _fan_triangles(poly):
            origin, e1, e2 = sub[0], sub[1] - sub[0], sub[2] - sub[0]
            doubled = abs(float(e1[0] * e2[1] - e1[1] * e2[0]))
            nodes.append(origin + np.outer(ref_nodes[:, 0], e1) + np.outer(ref_nodes[:, 1], e2))
            weights.append(ref_weights * doubled)
    values = np.asarray(f(np.vstack(nodes)))
    weights = np.concatenate(weights)
    if values.ndim == 1:
        return float(weights @ values)
    return weights @ values
