"""Conforming simplicial meshes of the square (-1,1)^2 with uniform red refinement.

All connectivity and geometry (side adjacency, areas, barycenters, side
midpoints, lengths, oriented unit normals) is precomputed as flat numpy
arrays at construction time.  Meshes are immutable; refinement returns a
new mesh.  Since every mesh in this package is a dyadic refinement of an
exact square, all vertex coordinates are exactly representable and no
tolerance-based geometry predicates are needed.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Mesh",
    "initial_square_mesh",
    "red_refine",
    "barycenter",
    "side_midpoint",
    "side_normal",
    "element_diameter",
    "dump",
]


class Mesh:
    """Conforming 2D triangulation.

    Attributes
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array
        Vertex indices, counter-clockwise.
    sides : (E, 2) int array
        Deduplicated vertex pairs, each sorted ascending; rows are in
        lexicographic order.
    side_of_triangle : (T, 3) int array
        Local side i of a triangle is the side opposite local vertex i.
    triangles_of_side : (E, 2) int array
        Adjacent triangles in ascending index order; second entry is -1
        for boundary sides.
    boundary_side : (E,) bool array
    areas, barycenters, side_midpoints, side_lengths : geometry arrays
    side_normals : (E, 2) float array
        Unit normals.  For interior sides the normal points from the
        lower-indexed adjacent triangle to the higher-indexed one; for
        boundary sides it points out of the domain.
    orientation : (T, 3) float array
        +1 where the global side normal is outward for that triangle,
        -1 where it is inward.
    h_max : float
        Maximal element diameter.
    """

    def __init__(self, vertices, triangles):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("vertices must have shape (V, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must have shape (T, 3)")

        corners = self.vertices[self.triangles]  # (T, 3, 2)
        e1 = corners[:, 1] - corners[:, 0]
        e2 = corners[:, 2] - corners[:, 0]
        doubled = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if np.any(doubled <= 0.0):
            raise ValueError("all triangles must be counter-clockwise with positive area")
        self.areas = 0.5 * doubled
        self.barycenters = corners.mean(axis=1)

        # Local side i sits opposite local vertex i.
        raw = np.stack(
            [self.triangles[:, [1, 2]], self.triangles[:, [2, 0]], self.triangles[:, [0, 1]]],
            axis=1,
        ).reshape(-1, 2)
        self.sides, inverse = np.unique(np.sort(raw, axis=1), axis=0, return_inverse=True)
        self.side_of_triangle = inverse.reshape(-1, 3)

        n_tri = len(self.triangles)
        n_side = len(self.sides)
        flat_sides = self.side_of_triangle.ravel()
        flat_tris = np.repeat(np.arange(n_tri), 3)
        order = np.argsort(flat_sides, kind="stable")  # keeps triangle indices ascending per side
        first = np.searchsorted(flat_sides[order], np.arange(n_side), side="left")
        last = np.searchsorted(flat_sides[order], np.arange(n_side), side="right")
        counts = last - first
        if np.any(counts > 2) or np.any(counts < 1):
            raise ValueError("mesh is not conforming: a side belongs to more than two triangles")
        self.triangles_of_side = np.full((n_side, 2), -1, dtype=np.int64)
        self.triangles_of_side[:, 0] = flat_tris[order][first]
        interior = counts == 2
        self.triangles_of_side[interior, 1] = flat_tris[order][last[interior] - 1]
        self.boundary_side = ~interior

        a = self.vertices[self.sides[:, 0]]
        b = self.vertices[self.sides[:, 1]]
        self.side_midpoints = 0.5 * (a + b)
        diff = b - a
        self.side_lengths = np.hypot(diff[:, 0], diff[:, 1])
        normals = np.column_stack([diff[:, 1], -diff[:, 0]]) / self.side_lengths[:, None]
        # Orient from the lower-indexed adjacent triangle outward.
        towards = self.side_midpoints - self.barycenters[self.triangles_of_side[:, 0]]
        flip = np.sign(np.sum(normals * towards, axis=1))
        self.side_normals = normals * flip[:, None]

        tri_sides = self.side_of_triangle
        outward = self.side_midpoints[tri_sides] - self.barycenters[:, None, :]
        self.orientation = np.sign(
            np.einsum("tid,tid->ti", self.side_normals[tri_sides], outward)
        )
        self.element_diameters = self.side_lengths[tri_sides].max(axis=1)
        self.h_max = float(self.element_diameters.max())

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_sides(self) -> int:
        return len(self.sides)

    def triangle_corners(self, t: int) -> np.ndarray:
        """Corner coordinates of triangle t, shape (3, 2)."""
        return self.vertices[self.triangles[self._check_tri(t)]]

    def _check_tri(self, t: int) -> int:
        if not 0 <= t < self.n_triangles:
            raise IndexError(f"triangle index {t} out of range [0, {self.n_triangles})")
        return t

    def _check_side(self, s: int) -> int:
        if not 0 <= s < self.n_sides:
            raise IndexError(f"side index {s} out of range [0, {self.n_sides})")
        return s

    def __repr__(self) -> str:
        return (
            f"Mesh(V={self.n_vertices}, T={self.n_triangles}, E={self.n_sides}, "
            f"h_max={self.h_max:.6g})"
        )


def initial_square_mesh() -> Mesh:
    """Two-triangle triangulation of (-1,1)^2, split along the (-1,-1)-(1,1) diagonal."""
    vertices = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    triangles = np.array([[0, 1, 2], [0, 2, 3]])
    return Mesh(vertices, triangles)


def red_refine(m: Mesh) -> Mesh:
    """Split every triangle into four congruent children via edge midpoints.

    Midpoint vertices are created exactly once per parent side and shared
    between neighbours, so the result is conforming by construction and
    the mesh size halves exactly.
    """
    new_vertices = np.vstack([m.vertices, m.side_midpoints])
    mid = m.n_vertices + m.side_of_triangle  # midpoint vertex ids, mid[:, i] opposite vertex i
    t = m.triangles
    children = np.concatenate(
        [
            np.stack([t[:, 0], mid[:, 2], mid[:, 1]], axis=1),
            np.stack([t[:, 1], mid[:, 0], mid[:, 2]], axis=1),
            np.stack([t[:, 2], mid[:, 1], mid[:, 0]], axis=1),
            mid,
        ]
    )
    return Mesh(new_vertices, children)


def refined_square_mesh(level: int) -> Mesh:
    """The initial square mesh red-refined ``level`` times."""
    if level < 0:
        raise ValueError("refinement level must be non-negative")
    m = initial_square_mesh()
    for _ in range(level):
        m = red_refine(m)
    return m


def barycenter(m: Mesh, t: int) -> np.ndarray:
    return m.barycenters[m._check_tri(t)]


def side_midpoint(m: Mesh, s: int) -> np.ndarray:
    return m.side_midpoints[m._check_side(s)]


def side_normal(m: Mesh, s: int) -> np.ndarray:
    return m.side_normals[m._check_side(s)]


def element_diameter(m: Mesh, t: int) -> float:
    return float(m.element_diameters[m._check_tri(t)])


def dump(m: Mesh) -> str:
    """Plain-text mesh dump for debugging: one 'v x y' and 't i j k' line each."""
    lines = [f"v {x!r} {y!r}" for x, y in m.vertices]
    lines += [f"t {i} {j} {k}" for i, j, k in m.triangles]
    return "\n".join(lines) + "\n"
