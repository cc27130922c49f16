import numpy as np
import pytest

from crtv.fespace import (CrFunction, P0Function, Rt0Field, cr_basis_gradients,
                          cr_gradient, cr_interpolate, cr_mass_diagonal, cr_stiffness,
                          fidelity_load, fidelity_matrix, p0_project, rt_interpolate)
from crtv.mesh import Mesh, initial_square_mesh, refined_square_mesh
from crtv.quadrature import triangle_integral

REF = Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))


def random_quadratic(rng):
    c = rng.standard_normal(6)
    return lambda x: (c[0] + c[1] * x[..., 0] + c[2] * x[..., 1]
                      + c[3] * x[..., 0] ** 2 + c[4] * x[..., 0] * x[..., 1]
                      + c[5] * x[..., 1] ** 2)


def random_quadratic_field(rng):
    f1, f2 = random_quadratic(rng), random_quadratic(rng)
    return lambda x: np.stack([f1(x), f2(x)], axis=-1)


# ---------------------------------------------------------------- projection


def test_p0_project_affine_is_barycenter_value():
    p = p0_project(REF, lambda x: x[:, 0] + 2.0 * x[:, 1], order=2)
    assert p.values[0] == pytest.approx(1.0, abs=1e-14)


def test_p0_project_constant():
    m = refined_square_mesh(2)
    p = p0_project(m, lambda x: np.full(len(x), 2.5), order=1)
    assert np.allclose(p.values, 2.5)


def test_p0_project_x1_squared():
    p = p0_project(REF, lambda x: x[:, 0] ** 2, order=3)
    assert p.values[0] == pytest.approx(1.0 / 6.0, abs=1e-14)  # (1/12) / (1/2)


def test_p0_projection_contracts_l2():
    # element means contract the L2 norm of CR functions
    rng = np.random.default_rng(0)
    m = refined_square_mesh(3)
    for _ in range(10):
        u = CrFunction(m, rng.standard_normal(m.n_sides))
        assert u.element_means().norm_l2() <= u.norm_l2() + 1e-12


# ---------------------------------------------------------------- CR space


def test_cr_gradient_of_coordinate():
    m = refined_square_mesh(2)
    u = cr_interpolate(m, lambda x: x[:, 0], order=2)
    g = cr_gradient(u).values
    assert np.allclose(g[:, 0], 1.0, atol=1e-13)
    assert np.allclose(g[:, 1], 0.0, atol=1e-13)


def test_cr_gradient_of_constant():
    m = refined_square_mesh(1)
    u = CrFunction(m, np.ones(m.n_sides))
    assert np.allclose(cr_gradient(u).values, 0.0, atol=1e-14)


def test_cr_gradient_matches_affine_reconstruction():
    # compare with the gradient of the affine function interpolating the
    # three midpoint values, computed by solving a 3x3 system
    rng = np.random.default_rng(4)
    dofs = rng.standard_normal(3)
    u = CrFunction(REF, np.zeros(3))
    u.values[REF.side_of_triangle[0]] = dofs
    mids = REF.side_midpoints[REF.side_of_triangle[0]]
    coeffs = np.linalg.solve(np.column_stack([np.ones(3), mids]), dofs)
    assert np.allclose(cr_gradient(u).values[0], coeffs[1:], atol=1e-12)


def test_cr_basis_kronecker():
    grads = cr_basis_gradients(REF)
    u = CrFunction(REF, np.zeros(3))
    for i in range(3):
        u.values[:] = 0.0
        u.values[REF.side_of_triangle[0, i]] = 1.0
        mids = REF.side_midpoints[REF.side_of_triangle[0]]
        vals = u.evaluate(0, mids)
        expected = np.zeros(3)
        expected[i] = 1.0
        assert np.allclose(vals, expected, atol=1e-14)
    assert grads.shape == (1, 3, 2)


def test_cr_interpolate_reproduces_affine():
    m = refined_square_mesh(2)
    u = cr_interpolate(m, lambda x: x[:, 0], order=3)
    for t in [0, 5, 17]:
        pts = m.barycenters[[t]]
        assert u.evaluate(t, pts)[0] == pytest.approx(pts[0, 0], abs=1e-13)


def test_cr_interpolate_quadratic_gradient_identity():
    # gradient of the interpolant equals the element mean of the gradient
    m = refined_square_mesh(2)
    u = cr_interpolate(m, lambda x: x[..., 0] ** 2, order=4)
    g = cr_gradient(u).values
    assert np.allclose(g[:, 0], 2.0 * m.barycenters[:, 0], atol=1e-13)
    assert np.allclose(g[:, 1], 0.0, atol=1e-13)


def test_cr_interpolate_indicator_side_inside():
    m = refined_square_mesh(3)
    disk = lambda x: (np.hypot(x[..., 0], x[..., 1]) < 0.9).astype(float)
    u = cr_interpolate(m, disk, order=5)
    inside = np.hypot(m.side_midpoints[:, 0], m.side_midpoints[:, 1]) < 0.5
    assert np.allclose(u.values[inside], 1.0)


def test_commuting_gradient_exact_quadratics():
    # gradient fields of quadratics are affine, so their element means are
    # the barycenter values; the interpolant's gradient must match them
    rng = np.random.default_rng(21)
    m = refined_square_mesh(2)
    for _ in range(20):
        c = rng.standard_normal(6)
        f = lambda x: (c[0] + c[1] * x[..., 0] + c[2] * x[..., 1]
                       + c[3] * x[..., 0] ** 2 + c[4] * x[..., 0] * x[..., 1]
                       + c[5] * x[..., 1] ** 2)
        grad_at = lambda x: np.stack([c[1] + 2 * c[3] * x[..., 0] + c[4] * x[..., 1],
                                      c[2] + c[4] * x[..., 0] + 2 * c[5] * x[..., 1]],
                                     axis=-1)
        u = cr_interpolate(m, f, order=5)
        assert np.allclose(cr_gradient(u).values, grad_at(m.barycenters), atol=1e-12)


def test_cr_sup_norm_bound():
    # interpolation by side averages blows up the sup norm by at most 3 in 2D
    rng = np.random.default_rng(3)
    m = refined_square_mesh(3)
    pts = rng.uniform(-1, 1, (500, 2))
    for _ in range(10):
        c = rng.standard_normal(6)
        f = lambda x: (c[0] + c[1] * x[..., 0] + c[2] * x[..., 1]
                       + c[3] * x[..., 0] ** 2 + c[4] * x[..., 0] * x[..., 1]
                       + c[5] * x[..., 1] ** 2)
        grid = np.stack(np.meshgrid(np.linspace(-1, 1, 201), np.linspace(-1, 1, 201)),
                        axis=-1).reshape(-1, 2)
        sup_f = np.abs(f(grid)).max() * (1.0 + 1e-6)
        u = cr_interpolate(m, f, order=5)
        corners = m.vertices[m.triangles]
        sup_u = max(np.abs(u.evaluate(t, corners[t])).max() for t in range(m.n_triangles))
        assert sup_u <= 3.0 * sup_f


def test_dirichlet_interpolation():
    m = refined_square_mesh(2)
    u = cr_interpolate(m, lambda x: np.ones(x.shape[:-1]), order=2, dirichlet=True)
    assert np.all(u.values[m.boundary_side] == 0.0)
    assert np.all(u.values[~m.boundary_side] == 1.0)


# ---------------------------------------------------------------- RT space


def test_rt_constant_reproduction():
    m = refined_square_mesh(2)
    z = rt_interpolate(m, lambda x: np.broadcast_to([1.0, 0.0], x.shape), order=2)
    vals = z.barycenter_values()
    assert np.allclose(vals, [1.0, 0.0], atol=1e-13)
    assert np.allclose(z.divergence().values, 0.0, atol=1e-12)


def test_rt_divergence_commutes():
    m = refined_square_mesh(2)
    z = rt_interpolate(m, lambda x: np.stack([x[..., 0] ** 2, np.zeros(x.shape[:-1])],
                                             axis=-1), order=5)
    assert np.allclose(z.divergence().values, 2.0 * m.barycenters[:, 0], atol=1e-12)


def test_rt_zero_fluxes_zero_field():
    z = Rt0Field.zeros(REF)
    assert np.allclose(z.evaluate(0, REF.barycenters[[0]]), 0.0)


def test_commuting_divergence_random_quadratics():
    rng = np.random.default_rng(8)
    m = refined_square_mesh(2)
    for _ in range(20):
        c = rng.standard_normal((2, 6))

        def field(x, c=c):
            comps = [c[i, 0] + c[i, 1] * x[..., 0] + c[i, 2] * x[..., 1]
                     + c[i, 3] * x[..., 0] ** 2 + c[i, 4] * x[..., 0] * x[..., 1]
                     + c[i, 5] * x[..., 1] ** 2 for i in range(2)]
            return np.stack(comps, axis=-1)

        def div_at(x, c=c):
            return (c[0, 1] + 2 * c[0, 3] * x[..., 0] + c[0, 4] * x[..., 1]
                    + c[1, 2] + c[1, 4] * x[..., 0] + 2 * c[1, 5] * x[..., 1])

        z = rt_interpolate(m, field, order=5)
        # div of a quadratic field is affine; its element mean is the barycenter value
        assert np.allclose(z.divergence().values, div_at(m.barycenters), atol=1e-12)


def test_rt_local_representation():
    # value at x equals value at the barycenter plus (div/2)(x - x_T)
    rng = np.random.default_rng(17)
    m = refined_square_mesh(2)
    z = Rt0Field(m, rng.standard_normal(m.n_sides))
    div = z.divergence().values
    vals_t = z.barycenter_values()
    for t in range(0, m.n_triangles, 3):
        lam = rng.dirichlet(np.ones(3), size=10)
        pts = lam @ m.vertices[m.triangles[t]]
        got = z.evaluate(t, pts)
        expected = vals_t[t] + 0.5 * div[t] * (pts - m.barycenters[t])
        assert np.allclose(got, expected, atol=1e-12)


def test_rt_divergence_free_element_is_constant():
    m = initial_square_mesh()
    # fluxes of the constant field e1 are divergence free on each element
    z = rt_interpolate(m, lambda x: np.broadcast_to([1.0, 0.0], x.shape), order=2)
    rng = np.random.default_rng(1)
    lam = rng.dirichlet(np.ones(3), size=20)
    pts = lam @ m.vertices[m.triangles[0]]
    vals = z.evaluate(0, pts)
    assert np.allclose(vals, vals[0], atol=1e-13)


def test_rt_basis_kronecker():
    m = initial_square_mesh()
    for s in range(m.n_sides):
        z = Rt0Field.zeros(m)
        z.fluxes[s] = 1.0
        for s_other in range(m.n_sides):
            t = m.triangles_of_side[s_other, 0]
            if s_other not in m.side_of_triangle[t]:
                continue
            val = z.evaluate(t, m.side_midpoints[[s_other]])[0]
            expected = 1.0 if s_other == s else 0.0
            assert val @ m.side_normals[s_other] == pytest.approx(expected, abs=1e-13)


def test_rt_evaluate_outside_raises():
    z = Rt0Field.zeros(REF)
    with pytest.raises(ValueError):
        z.evaluate(0, np.array([[2.0, 2.0]]))


def test_rt_means_equal_barycenter_values():
    # element means of the affine field coincide with barycenter evaluation
    rng = np.random.default_rng(23)
    m = refined_square_mesh(2)
    z = Rt0Field(m, rng.standard_normal(m.n_sides))
    for t in range(0, m.n_triangles, 5):
        mean = triangle_integral(lambda x, t=t: z.evaluate(t, x),
                                 m.triangle_corners(t), order=3) / m.areas[t]
        assert np.allclose(mean, z.barycenter_values()[t], atol=1e-13)


def test_rt_interpolation_is_a_projection():
    # reinterpolating a field that already lies in the discrete space
    # reproduces its fluxes, so admissible element means stay admissible
    rng = np.random.default_rng(29)
    m = refined_square_mesh(2)
    z = Rt0Field(m, 0.3 * rng.standard_normal(m.n_sides))

    def as_function(x):
        # evaluate through the first adjacent element of the matching side;
        # only called at side quadrature nodes
        out = np.empty_like(x)
        node_count = x.shape[0] // m.n_sides
        for s in range(m.n_sides):
            t = m.triangles_of_side[s, 0]
            rows = slice(s * node_count, (s + 1) * node_count)
            out[rows] = z.evaluate(t, x[rows])
        return out

    again = rt_interpolate(m, as_function, order=3)
    assert np.allclose(again.fluxes, z.fluxes, atol=1e-13)
    means = again.barycenter_values()
    original = z.barycenter_values()
    assert np.hypot(means[:, 0], means[:, 1]).max() <= \
        np.hypot(original[:, 0], original[:, 1]).max() + 1e-12


def test_p0_project_vector_field():
    m = refined_square_mesh(1)
    p = p0_project(m, lambda x: np.stack([x[:, 0], 3.0 * np.ones(len(x))], axis=-1),
                   order=2)
    assert p.values.shape == (m.n_triangles, 2)
    assert np.allclose(p.values[:, 0], m.barycenters[:, 0], atol=1e-14)
    assert np.allclose(p.values[:, 1], 3.0, atol=1e-14)


# ---------------------------------------------------------------- approximation rates


def test_interpolation_error_decay():
    v = lambda x: np.sin(np.pi * x[..., 0]) * np.cos(np.pi * x[..., 1])
    grad = lambda x: np.pi * np.stack(
        [np.cos(np.pi * x[..., 0]) * np.cos(np.pi * x[..., 1]),
         -np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 1])], axis=-1)
    errs_p0, errs_cr, errs_rt, hs = [], [], [], []
    for level in range(2, 6):
        m = refined_square_mesh(level)
        p0 = p0_project(m, v, order=6)
        err_sq = sum(
            triangle_integral(lambda x, t=t: (v(x) - p0.values[t]) ** 2,
                              m.triangle_corners(t), order=6)
            for t in range(m.n_triangles))
        errs_p0.append(np.sqrt(err_sq))
        u = cr_interpolate(m, v, order=6)
        err_sq = sum(
            triangle_integral(lambda x, t=t: (v(x) - u.evaluate(t, x)) ** 2,
                              m.triangle_corners(t), order=6)
            for t in range(m.n_triangles))
        errs_cr.append(np.sqrt(err_sq))
        z = rt_interpolate(m, grad, order=6)
        err_sq = sum(
            triangle_integral(
                lambda x, t=t: ((grad(x) - z.evaluate(t, x)) ** 2).sum(axis=-1),
                m.triangle_corners(t), order=6)
            for t in range(m.n_triangles))
        errs_rt.append(np.sqrt(err_sq))
        hs.append(m.h_max)
    for errs in (errs_p0, errs_cr, errs_rt):
        rates = np.log(np.array(errs[:-1]) / errs[1:]) / np.log(2.0)
        assert rates.min() >= 0.9


# ---------------------------------------------------------------- assemblies


def test_mass_diagonal_total():
    m = refined_square_mesh(3)
    assert cr_mass_diagonal(m).sum() == pytest.approx(4.0, abs=1e-12)


def test_fidelity_element_block():
    m = initial_square_mesh()
    f = fidelity_matrix(m).toarray()
    for t in range(m.n_triangles):
        sides = m.side_of_triangle[t]
        block = f[np.ix_(sides, sides)]
        # both elements contribute |T|/9 on the shared side pattern
        assert block.min() >= m.areas[t] / 9.0 - 1e-15


def test_fidelity_against_dense_oracle():
    m = refined_square_mesh(1)
    f = fidelity_matrix(m).toarray()
    expected = np.zeros_like(f)
    for t in range(m.n_triangles):
        sides = m.side_of_triangle[t]
        expected[np.ix_(sides, sides)] += m.areas[t] / 9.0
    assert np.allclose(f, expected, atol=1e-15)


def test_stiffness_annihilates_constants():
    m = refined_square_mesh(2)
    k = cr_stiffness(m, np.ones(m.n_triangles))
    assert np.abs(k @ np.ones(m.n_sides)).max() < 1e-12


def test_stiffness_rejects_nonpositive_weights():
    m = initial_square_mesh()
    with pytest.raises(ValueError):
        cr_stiffness(m, np.array([1.0, 0.0]))


def test_stiffness_symmetric():
    m = refined_square_mesh(2)
    rng = np.random.default_rng(2)
    k = cr_stiffness(m, rng.uniform(0.5, 2.0, m.n_triangles))
    assert k.symmetry_error() < 1e-12


def test_fidelity_load_constant_data():
    m = refined_square_mesh(2)
    g = P0Function(m, np.ones(m.n_triangles))
    load = fidelity_load(m, g)
    # pairing of 1 with the mean of v sums to the integral of v's means
    u = CrFunction(m, np.ones(m.n_sides))
    assert load @ u.values == pytest.approx(4.0, abs=1e-12)
