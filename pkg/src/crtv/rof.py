"""Discrete primal and dual energies of the total-variation denoising model.

The primal functional is the L1 norm of the (regularized) element-wise
gradient modulus plus a quadratic fidelity term in the element means; the
dual functional is a negative quadratic in the divergence, finite only on
fields whose element means stay inside the unit ball.  Both are exact sums
over elements because every integrand involved is element-wise constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fespace import CrFunction, P0Function, Rt0Field, cr_gradient
from .mesh import Mesh

__all__ = [
    "RofProblem",
    "reg_modulus",
    "primal_energy",
    "dual_energy",
    "dual_reconstruction",
    "DualReconstruction",
    "duality_gap",
    "feasible_rescaling",
    "coercivity_check",
    "INFEASIBLE",
]

#: Marker value returned by :func:`dual_energy` for fields violating the unit-ball constraint.
INFEASIBLE = float("-inf")


@dataclass
class RofProblem:
    """Denoising problem: fidelity weight alpha, element-wise data, gradient regularization eps."""

    mesh: Mesh
    alpha: float
    data: P0Function
    eps: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("fidelity weight alpha must be positive")
        if self.eps < 0.0:
            raise ValueError("regularization eps must be non-negative")
        if self.data.values.ndim != 1 or len(self.data.values) != self.mesh.n_triangles:
            raise ValueError("data must be a scalar element-wise constant field")


def reg_modulus(a, eps: float):
    """Regularized modulus (|a|^2 + eps^2)^(1/2); the last axis of a is the vector axis."""
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    a = np.asarray(a, dtype=float)
    return np.sqrt((a**2).sum(axis=-1) + eps**2)


def primal_energy(p: RofProblem, u: CrFunction) -> float:
    """Regularized primal energy; eps = 0 gives the plain total-variation functional."""
    grad = cr_gradient(u).values
    tv = float(p.mesh.areas @ reg_modulus(grad, p.eps))
    misfit = u.barycenter_values() - p.data.values
    return tv + 0.5 * p.alpha * float(p.mesh.areas @ misfit**2)


def dual_energy(p: RofProblem, y, feas_tol: float = 1e-10) -> float:
    """Dual energy of a Raviart-Thomas (or element-wise affine) field.

    Returns the infeasibility marker -inf when some element mean of y
    leaves the unit ball by more than feas_tol.  For y = 0 the value is
    exactly 0 by construction.
    """
    means = y.barycenter_values()
    if float(np.hypot(means[:, 0], means[:, 1]).max()) > 1.0 + feas_tol:
        return INFEASIBLE
    div = y.divergence().values
    areas = p.mesh.areas
    g = p.data.values
    quad = float(areas @ (div + p.alpha * g) ** 2)
    return -quad / (2.0 * p.alpha) + 0.5 * p.alpha * float(areas @ g**2)


@dataclass
class DualReconstruction:
    """Element-wise affine dual candidate a_T + c_T (x - x_T) built from a primal iterate.

    The element-mean part a_T is the normalized gradient and the divergence
    2 c_T equals alpha * (mean(u) - g) exactly, by construction.  The field
    is generally discontinuous across sides; ``as_rt0`` averages the two
    one-sided normal fluxes into a conforming field and ``conformity_defect``
    reports their largest discrepancy.
    """

    mesh: Mesh
    mean_part: np.ndarray  # (T, 2)
    div: np.ndarray  # (T,)

    def barycenter_values(self) -> np.ndarray:
        return self.mean_part

    def element_means(self) -> P0Function:
        return P0Function(self.mesh, self.mean_part)

    def divergence(self) -> P0Function:
        return P0Function(self.mesh, self.div)

    def _one_sided_fluxes(self) -> np.ndarray:
        """Normal fluxes (E, 2) from each adjacent element; nan where there is none."""
        m = self.mesh
        tos = m.triangles_of_side
        fluxes = np.full((m.n_sides, 2), np.nan)
        for k in range(2):
            tri = tos[:, k]
            valid = tri >= 0
            t = tri[valid]
            offset = m.side_midpoints[valid] - m.barycenters[t]
            value = self.mean_part[t] + 0.5 * self.div[t, None] * offset
            fluxes[valid, k] = np.einsum("ed,ed->e", value, m.side_normals[valid])
        return fluxes

    def as_rt0(self) -> Rt0Field:
        """Conforming field with side fluxes averaged over adjacent elements."""
        fluxes = self._one_sided_fluxes()
        return Rt0Field(self.mesh, np.nanmean(fluxes, axis=1))

    def conformity_defect(self) -> float:
        """Largest jump of the one-sided normal fluxes across interior sides."""
        fluxes = self._one_sided_fluxes()
        interior = ~self.mesh.boundary_side
        if not interior.any():
            return 0.0
        return float(np.abs(fluxes[interior, 0] - fluxes[interior, 1]).max())


def dual_reconstruction(p: RofProblem, u: CrFunction) -> DualReconstruction:
    """Dual candidate from a primal iterate: normalized gradient plus a divergence correction.

    Per element the field is grad(u)/|grad(u)|_eps plus
    (alpha/2) (mean(u) - g) (x - x_T); its element mean is strictly inside
    the unit ball and its divergence is alpha (mean(u) - g).
    """
    if p.eps <= 0.0:
        raise ValueError("dual reconstruction requires eps > 0")
    grad = cr_gradient(u).values
    mean_part = grad / reg_modulus(grad, p.eps)[:, None]
    div = p.alpha * (u.barycenter_values() - p.data.values)
    return DualReconstruction(p.mesh, mean_part, div)


def duality_gap(p: RofProblem, u: CrFunction, y) -> float:
    """Primal minus dual energy; +inf when y is infeasible."""
    dual = dual_energy(p, y)
    if dual == INFEASIBLE:
        return float("inf")
    return primal_energy(p, u) - dual


def feasible_rescaling(y: Rt0Field) -> Rt0Field:
    """Scale a field by 1/max(1, sup of element-mean modulus) to enforce feasibility."""
    means = y.barycenter_values()
    gamma = max(1.0, float(np.hypot(means[:, 0], means[:, 1]).max()))
    return y.scaled(1.0 / gamma)


def coercivity_check(p: RofProblem, u_min: CrFunction, v: CrFunction,
                     slack: float | None = None) -> bool:
    """Check the quadratic growth of the primal energy around the computed minimizer.

    The unregularized energy satisfies
    (alpha/2) ||mean(v - u)||^2 <= energy(v) - energy(u) at the exact
    minimizer; ``slack`` absorbs the regularization offset eps*|Omega| and
    the finite stopping tolerance of the solver.
    """
    if slack is None:
        slack = p.eps * float(p.mesh.areas.sum()) + p.mesh.h_max / 20.0
    plain = RofProblem(p.mesh, p.alpha, p.data, eps=0.0)
    diff = v.barycenter_values() - u_min.barycenter_values()
    lhs = 0.5 * p.alpha * float(p.mesh.areas @ diff**2)
    rhs = primal_energy(plain, v) - primal_energy(plain, u_min) + slack
    return lhs <= rhs
