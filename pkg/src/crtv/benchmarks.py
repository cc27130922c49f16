"""Closed-form benchmark problems with known primal and singular dual solutions.

The two-disk problem has data +1/-1 on two disks of radius r touching at a
point, the four-disk problem four disks in a checkerboard sign pattern.
Both admit an explicit piecewise-smooth dual vector field of unit length
that is discontinuous across the line (or line pair) through the touching
point(s): inside each disk the field is radial, outside it decays like a
2D point vortex potential and is divergence free.  A rigid rotation and
shift of the whole configuration is applied through a change of variables;
vector fields transform contravariantly, which preserves normal fluxes and
the divergence identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import JumpLine

__all__ = [
    "BenchmarkSpec",
    "data_g",
    "exact_primal",
    "exact_dual",
    "dual_divergence",
    "optimality_residual",
    "jump_lines",
    "one_sided_dual",
    "primal_coefficient",
]

_ONE_SIDED_OFFSET = 1e-9


def primal_coefficient(alpha: float, r: float) -> float:
    """Scaling max(0, 1 - 2/(alpha r)) of the data in the exact minimizer."""
    return max(0.0, 1.0 - 2.0 / (alpha * r))


@dataclass(frozen=True)
class BenchmarkSpec:
    """Benchmark configuration: disk radius, fidelity weight, rotation angle, shift.

    Requires alpha * r > 2 (so the exact minimizer is a nonzero multiple of
    the data and the explicit dual field applies) and all transformed disks
    compactly inside the square (-1, 1)^2.
    """

    kind: str = "two_disk"
    r: float = 0.4
    alpha: float = 10.0
    phi: float = 0.0
    shift: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("two_disk", "four_disk"):
            raise ValueError(f"unknown benchmark kind {self.kind!r}")
        if self.r <= 0.0:
            raise ValueError("disk radius must be positive")
        if self.alpha * self.r <= 2.0:
            raise ValueError("alpha * r must exceed 2")
        for center in self._world_centers():
            if np.abs(center).max() + self.r >= 1.0:
                raise ValueError("transformed disks must lie compactly inside (-1,1)^2")

    def _reference_centers(self) -> np.ndarray:
        r = self.r
        if self.kind == "two_disk":
            return np.array([[r, 0.0], [-r, 0.0]])
        return np.array([[r, r], [-r, -r], [r, -r], [-r, r]])

    def _rotation(self) -> np.ndarray:
        c, s = np.cos(self.phi), np.sin(self.phi)
        return np.array([[c, -s], [s, c]])

    def _world_centers(self) -> np.ndarray:
        return np.asarray(self.shift) + self._reference_centers() @ self._rotation().T

    def to_reference(self, x) -> np.ndarray:
        """Pull world points back to the untransformed frame (rotate by -phi, unshift)."""
        x = np.asarray(x, dtype=float)
        return (x - np.asarray(self.shift)) @ self._rotation()

    @property
    def coefficient(self) -> float:
        return primal_coefficient(self.alpha, self.r)

    def exact_total_variation(self) -> float:
        """Total variation of the exact minimizer: jump height times total circle perimeter."""
        n_disks = 2 if self.kind == "two_disk" else 4
        return self.coefficient * n_disks * 2.0 * np.pi * self.r


def _two_disk_data(y: np.ndarray, r: float) -> np.ndarray:
    plus = np.hypot(y[..., 0] - r, y[..., 1]) < r
    minus = np.hypot(y[..., 0] + r, y[..., 1]) < r
    return plus.astype(float) - minus.astype(float)


def _two_disk_dual(y: np.ndarray, r: float) -> np.ndarray:
    """Reference dual field: radial inside each disk, vortex-like decay outside.

    The halfplane x1 >= 0 uses the disk at +r e1 with an inward radial
    sign, the other halfplane mirrors it; the normal component matches
    across the dividing axis while the tangential component jumps.
    """
    pos = y[..., 0] >= 0.0
    sign = np.where(pos, -1.0, 1.0)
    center_x = np.where(pos, r, -r)
    d = np.stack([y[..., 0] - center_x, y[..., 1]], axis=-1)
    q2 = (d**2).sum(axis=-1)
    near = q2 < r * r
    safe_q2 = np.where(q2 == 0.0, 1.0, q2)
    factor = np.where(near, sign / r, sign * r / safe_q2)
    return factor[..., None] * d


def _two_disk_div(y: np.ndarray, r: float) -> np.ndarray:
    pos = y[..., 0] >= 0.0
    sign = np.where(pos, -1.0, 1.0)
    center_x = np.where(pos, r, -r)
    q2 = (y[..., 0] - center_x) ** 2 + y[..., 1] ** 2
    return np.where(q2 < r * r, 2.0 * sign / r, 0.0)


def _four_disk(y: np.ndarray, r: float, evaluator):
    """Compose the two-disk evaluator with a vertical shift and sign flip per halfplane."""
    top = y[..., 1] >= 0.0
    sign = np.where(top, 1.0, -1.0)
    shifted = y.copy()
    shifted[..., 1] = y[..., 1] - sign * r
    values = evaluator(shifted, r)
    if values.ndim == y.ndim:  # vector values
        return sign[..., None] * values
    return sign * values


def data_g(spec: BenchmarkSpec, x) -> np.ndarray:
    """Transformed data: +-1 inside the respective disks, 0 outside."""
    y = spec.to_reference(np.asarray(x, dtype=float))
    if spec.kind == "two_disk":
        return _two_disk_data(y, spec.r)
    return _four_disk(y, spec.r, _two_disk_data)


def exact_primal(spec: BenchmarkSpec, x) -> np.ndarray:
    """Exact minimizer: coefficient max(0, 1 - 2/(alpha r)) times the data."""
    return spec.coefficient * data_g(spec, x)


def exact_dual(spec: BenchmarkSpec, x) -> np.ndarray:
    """Exact dual field in world coordinates (contravariant transform of the reference field)."""
    x = np.asarray(x, dtype=float)
    y = spec.to_reference(x)
    if spec.kind == "two_disk":
        z = _two_disk_dual(y, spec.r)
    else:
        z = _four_disk(y, spec.r, _two_disk_dual)
    return z @ spec._rotation().T


def dual_divergence(spec: BenchmarkSpec, x) -> np.ndarray:
    """Divergence of the exact dual: +-2/r inside the disks, 0 outside (rotation invariant)."""
    y = spec.to_reference(np.asarray(x, dtype=float))
    if spec.kind == "two_disk":
        return _two_disk_div(y, spec.r)
    return _four_disk(y, spec.r, _two_disk_div)


def jump_lines(spec: BenchmarkSpec) -> list[JumpLine]:
    """Discontinuity line(s) of the transformed dual field in world coordinates."""
    tangent = np.array([-np.sin(spec.phi), np.cos(spec.phi)])
    lines = [JumpLine.from_tangent(spec.shift, tangent)]
    if spec.kind == "four_disk":
        lines.append(JumpLine.from_tangent(spec.shift, (np.cos(spec.phi), np.sin(spec.phi))))
    return lines


def one_sided_dual(spec: BenchmarkSpec, x, line: JumpLine, side: int) -> np.ndarray:
    """One-sided limit of the dual across a jump line, via a tiny offset along its normal."""
    if side not in (-1, 1):
        raise ValueError("side must be +1 or -1")
    x = np.asarray(x, dtype=float)
    return exact_dual(spec, x + side * _ONE_SIDED_OFFSET * np.asarray(line.normal))


def optimality_residual(spec: BenchmarkSpec, n_samples: int = 1000,
                        rng: np.random.Generator | None = None) -> float:
    """Max of |div z - alpha (u - g)| over random points away from the singular set.

    Points within 1e-6 of a jump line or a disk boundary are resampled; the
    residual of the exact pair vanishes up to rounding there.
    """
    rng = rng or np.random.default_rng(0)
    lines = jump_lines(spec)
    centers = spec._world_centers()
    accepted = np.empty((0, 2))
    while len(accepted) < n_samples:
        x = rng.uniform(-1.0, 1.0, size=(4 * n_samples, 2))
        ok = np.ones(len(x), dtype=bool)
        for line in lines:
            ok &= np.abs(line.signed_distance(x)) > 1e-6
        for c in centers:
            ok &= np.abs(np.hypot(x[:, 0] - c[0], x[:, 1] - c[1]) - spec.r) > 1e-6
        accepted = np.vstack([accepted, x[ok]])
    x = accepted[:n_samples]
    residual = dual_divergence(spec, x) - spec.alpha * (exact_primal(spec, x) - data_g(spec, x))
    return float(np.abs(residual).max())
