"""Measurements: midpoint L2 errors, convergence orders, dual-interpolant admissibility.

The dual-interpolant checks quantify how far the element means of the
interpolated exact dual field leave the unit ball with vanishing mesh
size.  For an element cut by the discontinuity line of a piecewise
constant, normal-continuous field the interpolant is a constant vector
with a closed form; a classifier reports which sufficient condition, if
any, certifies an O(h) excess for such an element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .benchmarks import BenchmarkSpec, exact_dual, jump_lines, one_sided_dual
from .fespace import CrFunction, Rt0Field, rt_interpolate
from .mesh import Mesh
from .quadrature import JumpLine, clip_side_fraction

__all__ = [
    "midpoint_error_sq",
    "eoc",
    "fit_decay_exponent",
    "interp_sup_norm",
    "unit_excess",
    "cut_element_interpolant",
    "CutElement",
    "find_cut_elements",
    "case_classifier",
    "classify_benchmark_elements",
    "ClassifierThresholds",
    "rt_min_modulus_point",
    "RateRow",
    "RateTable",
]


def midpoint_error_sq(u_exact, u_h: CrFunction) -> float:
    """Squared L2 distance between the exact solution at barycenters and the element means.

    ``u_exact`` maps (N, 2) points to (N,) values.
    """
    mesh = u_h.mesh
    diff = np.asarray(u_exact(mesh.barycenters)) - u_h.barycenter_values()
    return float(mesh.areas @ diff**2)


def eoc(errors, hs) -> np.ndarray:
    """Experimental orders of convergence log(e_{k-1}/e_k) / log(h_{k-1}/h_k).

    Returns one entry per consecutive pair; pairs with non-positive errors
    are reported as nan.
    """
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape:
        raise ValueError("errors and mesh sizes must have equal length")
    out = np.full(len(errors) - 1, np.nan)
    for i in range(1, len(errors)):
        if errors[i - 1] > 0.0 and errors[i] > 0.0:
            out[i - 1] = np.log(errors[i - 1] / errors[i]) / np.log(hs[i - 1] / hs[i])
    return out


def fit_decay_exponent(hs, values, floor: float = 1e-12) -> float:
    """Least-squares slope of log(values) against log(h), ignoring entries below ``floor``.

    Returns +inf when fewer than two entries remain (decay faster than any
    power fits).
    """
    hs = np.asarray(hs, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > floor
    if keep.sum() < 2:
        return float("inf")
    slope = np.polyfit(np.log(hs[keep]), np.log(values[keep]), 1)[0]
    return float(slope)


def interp_sup_norm(mesh: Mesh, spec: BenchmarkSpec, order: int = 10):
    """Sup norm of the element means of the interpolated exact dual field.

    Side fluxes are integrated with splitting at the jump line(s); the
    circular kinks of the field are absorbed by the quadrature order.
    Returns (sup, per_element_modulus).
    """
    lines = jump_lines(spec)
    interp = rt_interpolate(mesh, lambda x: exact_dual(spec, x), split=lines, order=order)
    means = interp.barycenter_values()
    moduli = np.hypot(means[:, 0], means[:, 1])
    return float(moduli.max()), moduli


def unit_excess(mesh: Mesh, z, lines=None, order: int = 10) -> float:
    """Excess max(0, sup_T |element mean of the interpolant| - 1) for an admissible field."""
    interp = rt_interpolate(mesh, z, split=lines, order=order)
    means = interp.barycenter_values()
    return max(0.0, float(np.hypot(means[:, 0], means[:, 1]).max()) - 1.0)


def _side_endpoints(tri: np.ndarray, local: int):
    """Endpoints of the local side opposite vertex ``local``."""
    return tri[(local + 1) % 3], tri[(local + 2) % 3]


def _unit_normal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    return np.array([d[1], -d[0]]) / np.hypot(*d)


def cut_element_interpolant(z_a, z_b, line: JumpLine, tri, s1: int, s2: int) -> np.ndarray:
    """Constant interpolant of a two-valued normal-continuous field on a cut triangle.

    ``tri`` holds the corners (3, 2); local side ``s1`` is crossed by the
    line, ``s2`` is not.  ``z_b`` is the field value on the halfplane
    containing side s2, ``z_a`` the value on the other side.  The result
    solves the two flux equations of sides s1 and s2; normal continuity
    makes the interpolant divergence free, hence constant, so these two
    determine it.
    """
    tri = np.asarray(tri, dtype=float)
    z_a = np.asarray(z_a, dtype=float)
    z_b = np.asarray(z_b, dtype=float)
    t_gamma = np.asarray(line.tangent)
    n_gamma = np.asarray(line.normal)
    if abs(float((z_a - z_b) @ n_gamma)) > 1e-9:
        raise ValueError("field values must share the normal component across the line")
    a1, b1 = _side_endpoints(tri, s1)
    a2, b2 = _side_endpoints(tri, s2)
    side_b = float(line.signed_distance(0.5 * (a2 + b2)))
    if side_b == 0.0:
        raise ValueError("side s2 lies on the line; element is not a one-line cut")
    rho = clip_side_fraction(a1, b1, line)
    if side_b > 0.0:
        rho = 1.0 - rho
    n1 = _unit_normal(a1, b1)
    n2 = _unit_normal(a2, b2)
    m = np.column_stack([n1, n2])
    if abs(float(np.linalg.det(m))) < 1e-12:
        raise ValueError("side normals are parallel; degenerate triangle")
    correction = np.linalg.solve(m.T, np.array([1.0, 0.0]))
    jump = float((z_a - z_b) @ t_gamma)
    return z_b + (1.0 - rho) * jump * float(t_gamma @ n1) * correction


@dataclass
class CutElement:
    """Geometry of one element genuinely cut by a single straight line."""

    index: int
    corners: np.ndarray  # (3, 2)
    crossed: list[int]  # local sides whose interior the line crosses
    uncut: list[int]  # local sides fully on one halfplane
    chord_midpoint: np.ndarray


def find_cut_elements(mesh: Mesh, line: JumpLine) -> list[CutElement]:
    """Elements whose open interior meets the line, with crossed/uncut side bookkeeping."""
    dist = line.signed_distance(mesh.vertices)
    scale = 1e-12 * max(1.0, float(np.abs(mesh.vertices).max()))
    sign = np.where(np.abs(dist) <= scale, 0.0, np.sign(dist))
    tri_signs = sign[mesh.triangles]  # (T, 3)
    cut_mask = (tri_signs.min(axis=1) < 0.0) & (tri_signs.max(axis=1) > 0.0)
    out = []
    for t in np.flatnonzero(cut_mask):
        corners = mesh.vertices[mesh.triangles[t]]
        s = tri_signs[t]
        crossed, uncut, points = [], [], []
        for local in range(3):
            i, j = (local + 1) % 3, (local + 2) % 3
            if s[i] * s[j] < 0.0:
                crossed.append(local)
                ratio = dist[mesh.triangles[t, i]] / (
                    dist[mesh.triangles[t, i]] - dist[mesh.triangles[t, j]])
                points.append(corners[i] + ratio * (corners[j] - corners[i]))
            else:
                uncut.append(local)
        points.extend(corners[k] for k in range(3) if s[k] == 0.0)
        chord = np.asarray(points)
        out.append(CutElement(index=int(t), corners=corners, crossed=crossed,
                              uncut=uncut, chord_midpoint=chord.mean(axis=0)))
    return out


@dataclass
class ClassifierThresholds:
    """Constants replacing the asymptotic O(h) conditions of the certificates."""

    alignment: float = 2.0  # |t . n1| <= alignment * h
    coverage: float = 2.0  # 1 - rho <= coverage * h
    interior: float = 2.0  # correction norm <= 1 - |z_b| + interior * h
    orthogonality: float = 2.0  # ||M^-T - M||_F <= orthogonality * h and t = +-n1 + O(h)


def case_classifier(cut: CutElement, line: JumpLine, z_by_side, h: float,
                    thresholds: ClassifierThresholds | None = None) -> str:
    """Certificate for a bounded unit-ball excess on one cut element.

    ``z_by_side(sign)`` returns the one-sided field value for the
    halfplane with that normal sign.  Tries every admissible labeling of
    the crossed and uncut sides and returns the first certificate that
    applies ('ii.a', 'ii.b', 'ii.c', 'ii.d'), else 'none'.
    """
    th = thresholds or ClassifierThresholds()
    t_gamma = np.asarray(line.tangent)
    for s2 in cut.uncut:
        a2, b2 = _side_endpoints(cut.corners, s2)
        side_b = float(np.sign(line.signed_distance(0.5 * (a2 + b2))))
        if side_b == 0.0:
            continue
        z_b = np.asarray(z_by_side(side_b))
        z_a = np.asarray(z_by_side(-side_b))
        n2 = _unit_normal(a2, b2)
        for s1 in cut.crossed:
            a1, b1 = _side_endpoints(cut.corners, s1)
            n1 = _unit_normal(a1, b1)
            rho = clip_side_fraction(a1, b1, line)
            if side_b > 0.0:
                rho = 1.0 - rho
            if abs(float(t_gamma @ n1)) <= th.alignment * h:
                return "ii.a"
            if 1.0 - rho <= th.coverage * h:
                return "ii.b"
            m = np.column_stack([n1, n2])
            if abs(float(np.linalg.det(m))) < 1e-12:
                continue
            correction = np.linalg.solve(m.T, np.array([1.0, 0.0]))
            jump = float((z_a - z_b) @ t_gamma)
            term = (1.0 - rho) * jump * float(t_gamma @ n1) * correction
            z_b_mod = float(np.hypot(*z_b))
            if z_b_mod < 1.0 and float(np.hypot(*term)) <= 1.0 - z_b_mod + th.interior * h:
                return "ii.c"
            ortho = float(np.linalg.norm(np.linalg.inv(m.T) - m))
            aligned = min(float(np.hypot(*(t_gamma - n1))), float(np.hypot(*(t_gamma + n1))))
            if ortho <= th.orthogonality * h and aligned <= th.orthogonality * h:
                return "ii.d"
    return "none"


def classify_benchmark_elements(mesh: Mesh, spec: BenchmarkSpec,
                                thresholds: ClassifierThresholds | None = None) -> dict[int, str]:
    """Classify every cut element of the benchmark dual field on the mesh.

    Elements met by more than one jump line are labeled 'unsupported';
    uncut elements do not appear ('resolved' situation).
    """
    lines = jump_lines(spec)
    per_line = [find_cut_elements(mesh, line) for line in lines]
    seen: dict[int, tuple[JumpLine, CutElement]] = {}
    labels: dict[int, str] = {}
    for line, cuts in zip(lines, per_line):
        for cut in cuts:
            if cut.index in seen:
                labels[cut.index] = "unsupported"
            else:
                seen[cut.index] = (line, cut)
    for index, (line, cut) in seen.items():
        if labels.get(index) == "unsupported":
            continue
        x_gamma = cut.chord_midpoint

        def z_by_side(sign, _x=x_gamma, _line=line):
            return one_sided_dual(spec, _x, _line, int(sign))

        labels[index] = case_classifier(cut, line, z_by_side, mesh.h_max, thresholds)
    return labels


def rt_min_modulus_point(field: Rt0Field, t: int) -> np.ndarray:
    """Point of the triangle where the affine field modulus is smallest.

    The field is a + c (x - x_T); the minimizer is its zero if that lies
    inside, otherwise a point on an edge (possibly a vertex).
    """
    mesh = field.mesh
    a = field.barycenter_values()[t]
    c = 0.5 * field.divergence().values[t]
    x_t = mesh.barycenters[t]
    corners = mesh.triangle_corners(t)
    if c != 0.0:
        zero = x_t - a / c
        lam = np.linalg.solve(
            np.column_stack([corners[1] - corners[0], corners[2] - corners[0]]),
            zero - corners[0])
        if lam.min() >= 0.0 and lam.sum() <= 1.0:
            return zero
    best, best_val = None, np.inf
    for i in range(3):
        v0, v1 = corners[i], corners[(i + 1) % 3]
        w = a + c * (v0 - x_t)
        d = v1 - v0
        denom = c * c * float(d @ d)
        s = 0.0 if denom == 0.0 else float(np.clip(-c * (w @ d) / denom, 0.0, 1.0))
        x = v0 + s * d
        val = float(np.hypot(*(a + c * (x - x_t))))
        if val < best_val:
            best, best_val = x, val
    return best


@dataclass
class RateRow:
    level: int
    n_vertices: int
    h: float
    err_sq: float
    eoc: float
    energy: float
    steps: int
    gap: float


@dataclass
class RateTable:
    """Per-level results of a convergence run; the eoc column is derived from err_sq."""

    rows: list[RateRow] = field(default_factory=list)

    def add(self, level: int, n_vertices: int, h: float, err_sq: float,
            energy: float, steps: int, gap: float) -> RateRow:
        previous = self.rows[-1] if self.rows else None
        value = np.nan
        if previous is not None and previous.err_sq > 0.0 and err_sq > 0.0:
            value = float(np.log(previous.err_sq / err_sq) / np.log(previous.h / h))
        row = RateRow(level, n_vertices, h, err_sq, value, energy, steps, gap)
        self.rows.append(row)
        return row
