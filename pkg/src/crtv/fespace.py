"""Discrete spaces on a triangulation: element-wise constants, Crouzeix-Raviart, lowest-order Raviart-Thomas.

Crouzeix-Raviart functions carry one value per side (the value at the side
midpoint) and are affine on each element; Raviart-Thomas fields carry one
signed normal flux per side and are of the form a + c*x on each element.
The element-mean projection, the two interpolation operators defined via
side averages, and the bilinear-form assemblies for the gradient flow all
live here.

Conventions: on a triangle the local side i is the one opposite local
vertex i, the scalar basis on side i is 1 - 2*(barycentric coordinate of
vertex i), and the vector basis on side i is sign * |S_i|/(2|T|) * (x - p_i)
with the sign aligning its normal trace with the global side normal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import SparseMatrix, SparseMatrixBuilder
from .mesh import Mesh
from .quadrature import JumpLine, batched_segment_rule, triangle_integral

__all__ = [
    "P0Function",
    "CrFunction",
    "Rt0Field",
    "p0_project",
    "cr_interpolate",
    "rt_interpolate",
    "cr_gradient",
    "cr_mass_diagonal",
    "fidelity_matrix",
    "fidelity_load",
    "cr_stiffness",
    "cr_stiffness_triplets",
    "cr_basis_gradients",
]


@dataclass
class P0Function:
    """Element-wise constant scalar or vector field; values has shape (T,) or (T, d)."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != self.mesh.n_triangles:
            raise ValueError("one value per triangle expected")

    def norm_l2(self) -> float:
        sq = self.values**2
        if sq.ndim > 1:
            sq = sq.sum(axis=-1)
        return float(np.sqrt(self.mesh.areas @ sq))

    def sup_norm(self) -> float:
        v = self.values
        mag = np.abs(v) if v.ndim == 1 else np.hypot(v[:, 0], v[:, 1])
        return float(mag.max())


@dataclass
class CrFunction:
    """Piecewise affine function continuous at side midpoints; one dof per side."""

    mesh: Mesh
    values: np.ndarray
    dirichlet: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_sides,):
            raise ValueError("one value per side expected")
        if self.dirichlet and np.any(self.values[self.mesh.boundary_side] != 0.0):
            raise ValueError("dirichlet flag requires zero boundary values")

    @classmethod
    def zeros(cls, mesh: Mesh, dirichlet: bool = False) -> "CrFunction":
        return cls(mesh, np.zeros(mesh.n_sides), dirichlet=dirichlet)

    def barycenter_values(self) -> np.ndarray:
        """Values at element barycenters; equals the element means of the function."""
        return self.values[self.mesh.side_of_triangle].mean(axis=1)

    def element_means(self) -> P0Function:
        return P0Function(self.mesh, self.barycenter_values())

    def gradient(self) -> P0Function:
        return cr_gradient(self)

    def evaluate(self, t: int, x) -> np.ndarray:
        """Value of the affine reconstruction on triangle t at points x (N, 2)."""
        lam = _barycentric(self.mesh, t, np.atleast_2d(np.asarray(x, dtype=float)))
        phi = 1.0 - 2.0 * lam
        dofs = self.values[self.mesh.side_of_triangle[t]]
        return phi @ dofs

    def norm_l2(self) -> float:
        """Exact L2 norm (the side-midpoint rule is exact for per-element quadratics)."""
        return float(np.sqrt(cr_mass_diagonal(self.mesh) @ self.values**2))


@dataclass
class Rt0Field:
    """Lowest-order Raviart-Thomas field; one signed normal flux per side."""

    mesh: Mesh
    fluxes: np.ndarray

    def __post_init__(self):
        self.fluxes = np.asarray(self.fluxes, dtype=float)
        if self.fluxes.shape != (self.mesh.n_sides,):
            raise ValueError("one flux per side expected")

    @classmethod
    def zeros(cls, mesh: Mesh) -> "Rt0Field":
        return cls(mesh, np.zeros(mesh.n_sides))

    def _local_coeffs(self):
        """Per-element basis scaling sign*|S_i|/(2|T|), shape (T, 3)."""
        m = self.mesh
        return m.orientation * m.side_lengths[m.side_of_triangle] / (2.0 * m.areas[:, None])

    def barycenter_values(self) -> np.ndarray:
        """Field values at element barycenters, shape (T, 2); equals the element means."""
        m = self.mesh
        coeff = self._local_coeffs() * self.fluxes[m.side_of_triangle]
        offsets = m.barycenters[:, None, :] - m.vertices[m.triangles]
        return np.einsum("ti,tid->td", coeff, offsets)

    def element_means(self) -> P0Function:
        return P0Function(self.mesh, self.barycenter_values())

    def divergence(self) -> P0Function:
        m = self.mesh
        coeff = m.orientation * m.side_lengths[m.side_of_triangle]
        div = np.einsum("ti,ti->t", coeff, self.fluxes[m.side_of_triangle]) / m.areas
        return P0Function(m, div)

    def evaluate(self, t: int, x) -> np.ndarray:
        """Field value on triangle t at points x inside it; raises if x lies outside."""
        m = self.mesh
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lam = _barycentric(m, t, x)
        scale = m.element_diameters[t]
        if np.any(lam < -1e-12) or np.any(lam > 1.0 + 1e-12):
            raise ValueError(f"point outside triangle {t} (relative scale {scale:.3g})")
        coeff = self._local_coeffs()[t] * self.fluxes[m.side_of_triangle[t]]
        corners = m.vertices[m.triangles[t]]
        return np.einsum("i,nid->nd", coeff, x[:, None, :] - corners[None, :, :])

    def scaled(self, factor: float) -> "Rt0Field":
        return Rt0Field(self.mesh, factor * self.fluxes)


def _barycentric(mesh: Mesh, t: int, x: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points x (N, 2) in triangle t, shape (N, 3)."""
    p = mesh.triangle_corners(t)
    d = np.column_stack([p[1] - p[0], p[2] - p[0]])
    lam12 = np.linalg.solve(d, (x - p[0]).T).T
    return np.column_stack([1.0 - lam12.sum(axis=1), lam12])


def cr_basis_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the three local scalar basis functions per element, shape (T, 3, 2)."""
    corners = mesh.vertices[mesh.triangles]
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    det = (2.0 * mesh.areas)[:, None]
    grad_lam1 = np.column_stack([e2[:, 1], -e2[:, 0]]) / det
    grad_lam2 = np.column_stack([-e1[:, 1], e1[:, 0]]) / det
    grad_lam0 = -grad_lam1 - grad_lam2
    return -2.0 * np.stack([grad_lam0, grad_lam1, grad_lam2], axis=1)


def cr_gradient(u: CrFunction) -> P0Function:
    """Element-wise gradient of the affine reconstruction, a vector-valued P0 field."""
    m = u.mesh
    grads = cr_basis_gradients(m)
    values = np.einsum("ti,tid->td", u.values[m.side_of_triangle], grads)
    return P0Function(m, values)


def p0_project(mesh: Mesh, f, split=None, order: int = 6) -> P0Function:
    """L2 projection onto element-wise constants, i.e. exact element means.

    f is either a callable on (N, 2) point arrays or an object exposing
    element_means() (discrete fields are per-element affine, so their mean
    is the barycenter value).
    """
    if hasattr(f, "element_means"):
        return f.element_means()
    means = [
        np.asarray(triangle_integral(f, mesh.triangle_corners(t), split=split, order=order))
        / mesh.areas[t]
        for t in range(mesh.n_triangles)
    ]
    return P0Function(mesh, np.asarray(means))


_CHUNK = 65536  # sides per batch in interpolation loops, bounds peak memory


def _side_averages(mesh: Mesh, f: Callable, split, order: int) -> np.ndarray:
    """Average of f over every side, split at jump lines; returns (E,) or (E, d)."""
    if split is None:
        lines = []
    elif isinstance(split, JumpLine):
        lines = [split]
    else:
        lines = list(split)
    a_all = mesh.vertices[mesh.sides[:, 0]]
    b_all = mesh.vertices[mesh.sides[:, 1]]
    out = None
    for start in range(0, mesh.n_sides, _CHUNK):
        sl = slice(start, min(start + _CHUNK, mesh.n_sides))
        nodes, weights = batched_segment_rule(a_all[sl], b_all[sl], lines, order)
        values = np.asarray(f(nodes.reshape(-1, 2)))
        values = values.reshape(nodes.shape[0], nodes.shape[1], -1).squeeze(-1) \
            if values.ndim == 1 else values.reshape(nodes.shape[0], nodes.shape[1], -1)
        avg = np.einsum("em,em...->e...", weights, values)
        if out is None:
            out = np.empty((mesh.n_sides,) + avg.shape[1:])
        out[sl] = avg
    return out


def cr_interpolate(mesh: Mesh, v, split=None, order: int = 5,
                   dirichlet: bool = False) -> CrFunction:
    """Interpolation by side averages; preserves element means of gradients.

    v maps (N, 2) points to (N,) values.  With ``dirichlet`` the boundary
    dofs are forced to zero.
    """
    values = _side_averages(mesh, v, split, order)
    if values.ndim != 1:
        raise ValueError("cr_interpolate expects a scalar function")
    if dirichlet:
        values = values.copy()
        values[mesh.boundary_side] = 0.0
    return CrFunction(mesh, values, dirichlet=dirichlet)


def rt_interpolate(mesh: Mesh, z, split=None, order: int = 5) -> Rt0Field:
    """Interpolation by side-averaged normal fluxes; preserves element means of divergences.

    z maps (N, 2) points to (N, 2) vectors.
    """
    averages = _side_averages(mesh, z, split, order)
    if averages.ndim != 2:
        raise ValueError("rt_interpolate expects a vector field")
    return Rt0Field(mesh, np.einsum("ed,ed->e", averages, mesh.side_normals))


def cr_mass_diagonal(mesh: Mesh) -> np.ndarray:
    """Diagonal of the CR mass matrix, M_SS = sum of |T|/3 over adjacent elements.

    The side-midpoint rule is exact for per-element quadratics and makes
    the basis orthogonal, so this is the exact L2 mass, not a lumping.
    """
    diag = np.zeros(mesh.n_sides)
    np.add.at(diag, mesh.side_of_triangle.ravel(),
              np.repeat(mesh.areas / 3.0, 3))
    return diag


def _element_triplets(mesh: Mesh):
    sot = mesh.side_of_triangle
    rows = np.repeat(sot, 3, axis=1).ravel()
    cols = np.tile(sot, (1, 3)).ravel()
    return rows, cols


def cr_stiffness_triplets(mesh: Mesh):
    """COO pattern and per-element Gram blocks |T| grad(phi_i).grad(phi_j).

    Returns (rows, cols, gram) with gram of shape (T, 3, 3); scaling gram
    by per-element weights and flattening yields the weighted stiffness.
    """
    grads = cr_basis_gradients(mesh)
    gram = np.einsum("tid,tjd->tij", grads, grads) * mesh.areas[:, None, None]
    rows, cols = _element_triplets(mesh)
    return rows, cols, gram


def cr_stiffness(mesh: Mesh, weights) -> SparseMatrix:
    """Weighted stiffness matrix K = sum_T w_T |T| grad(phi_i).grad(phi_j)."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (mesh.n_triangles,):
        raise ValueError("one weight per triangle expected")
    if np.any(weights <= 0.0):
        raise ValueError("stiffness weights must be strictly positive")
    rows, cols, gram = cr_stiffness_triplets(mesh)
    builder = SparseMatrixBuilder(mesh.n_sides)
    builder.add(rows, cols, (weights[:, None, None] * gram).ravel())
    return builder.finalize()


def fidelity_matrix(mesh: Mesh) -> SparseMatrix:
    """Matrix of the element-mean pairing (mean u, mean v); couples the 3 sides of each element.

    The scalar basis takes the value 1/3 at the barycenter, so each element
    contributes the block |T|/9 times the all-ones 3x3 matrix.
    """
    rows, cols = _element_triplets(mesh)
    data = np.repeat(mesh.areas / 9.0, 9)
    builder = SparseMatrixBuilder(mesh.n_sides)
    builder.add(rows, cols, data)
    return builder.finalize()


def fidelity_load(mesh: Mesh, g: P0Function) -> np.ndarray:
    """Load vector of (g, mean v) for element-wise constant data g."""
    if g.values.ndim != 1:
        raise ValueError("scalar data expected")
    load = np.zeros(mesh.n_sides)
    np.add.at(load, mesh.side_of_triangle.ravel(),
              np.repeat(mesh.areas * g.values / 3.0, 3))
    return load
