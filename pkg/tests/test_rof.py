import numpy as np
import pytest

from crtv.benchmarks import BenchmarkSpec, data_g
from crtv.fespace import CrFunction, P0Function, Rt0Field
from crtv.flow import FlowConfig, flow_run
from crtv.mesh import refined_square_mesh
from crtv.rof import (INFEASIBLE, RofProblem, coercivity_check, dual_energy,
                      dual_reconstruction, duality_gap, feasible_rescaling,
                      primal_energy, reg_modulus)


@pytest.fixture(scope="module")
def two_disk_level3():
    spec = BenchmarkSpec()
    mesh = refined_square_mesh(3)
    g = P0Function(mesh, data_g(spec, mesh.barycenters))
    problem = RofProblem(mesh, spec.alpha, g, eps=mesh.h_max)
    u, trace = flow_run(problem, cfg=FlowConfig())
    return problem, u, trace


def test_reg_modulus_values():
    assert reg_modulus(np.array([0.0, 0.0]), 0.1) == pytest.approx(0.1)
    assert reg_modulus(np.array([3.0, 4.0]), 0.0) == pytest.approx(5.0)


def test_reg_modulus_bracket():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((100, 2))
    plain = reg_modulus(a, 0.0)
    for eps in (0.0, 0.02, 1.0):
        diff = reg_modulus(a, eps) - plain
        assert np.all(diff >= 0.0) and np.all(diff <= eps + 1e-15)


def test_reg_modulus_rejects_negative_eps():
    with pytest.raises(ValueError):
        reg_modulus(np.zeros(2), -0.1)


def test_primal_energy_zero_iterate():
    mesh = refined_square_mesh(2)
    rng = np.random.default_rng(5)
    g = P0Function(mesh, rng.standard_normal(mesh.n_triangles))
    u = CrFunction.zeros(mesh)
    p0 = RofProblem(mesh, 2.0, g, eps=0.0)
    assert primal_energy(p0, u) == pytest.approx(1.0 * g.norm_l2() ** 2)
    p1 = RofProblem(mesh, 2.0, g, eps=0.3)
    assert primal_energy(p1, u) == pytest.approx(4.0 * 0.3 + g.norm_l2() ** 2)


def test_primal_energy_constant_shift():
    mesh = refined_square_mesh(2)
    g = P0Function(mesh, np.zeros(mesh.n_triangles))
    p = RofProblem(mesh, 3.0, g, eps=0.0)
    c = 0.7
    u = CrFunction(mesh, np.full(mesh.n_sides, c))
    assert primal_energy(p, u) == pytest.approx(0.5 * 3.0 * 4.0 * c * c)


def test_dual_energy_zero_field_is_exactly_zero(two_disk_level3):
    problem, _, _ = two_disk_level3
    assert dual_energy(problem, Rt0Field.zeros(problem.mesh)) == 0.0


def test_dual_energy_infeasible_marker():
    mesh = refined_square_mesh(2)
    g = P0Function(mesh, np.zeros(mesh.n_triangles))
    p = RofProblem(mesh, 1.0, g)
    z = Rt0Field(mesh, 2.0 * mesh.side_normals[:, 0])  # means approximate 2*e1
    assert dual_energy(p, z) == INFEASIBLE
    assert duality_gap(p, CrFunction.zeros(mesh), z) == float("inf")


def test_weak_duality_on_converged_run(two_disk_level3):
    problem, u, _ = two_disk_level3
    candidate = feasible_rescaling(dual_reconstruction(problem, u).as_rt0())
    gap = duality_gap(problem, u, candidate)
    assert gap >= -1e-10


def test_reconstruction_identities(two_disk_level3):
    problem, u, _ = two_disk_level3
    rec = dual_reconstruction(problem, u)
    grad = u.gradient().values
    expected_mean = grad / reg_modulus(grad, problem.eps)[:, None]
    assert np.allclose(rec.barycenter_values(), expected_mean, atol=1e-12)
    moduli = np.hypot(rec.mean_part[:, 0], rec.mean_part[:, 1])
    assert moduli.max() < 1.0
    misfit = problem.alpha * (u.barycenter_values() - problem.data.values)
    assert np.allclose(rec.divergence().values, misfit, atol=1e-12)


def test_reconstruction_rt0_divergence_identity(two_disk_level3):
    # flux averaging preserves the element divergences exactly: the one-sided
    # normal fluxes have equal means over each side pair by symmetry of the
    # averaging, so checking div(as_rt0) stays close to the broken divergence
    problem, u, _ = two_disk_level3
    rec = dual_reconstruction(problem, u)
    conforming = rec.as_rt0()
    defect = rec.conformity_defect()
    diff = np.abs(conforming.divergence().values - rec.div)
    scale = problem.mesh.side_lengths.max() / problem.mesh.areas.min()
    assert diff.max() <= 1.5 * defect * scale


def test_reconstruction_trivial_zero():
    mesh = refined_square_mesh(2)
    g = P0Function(mesh, np.zeros(mesh.n_triangles))
    p = RofProblem(mesh, 1.0, g, eps=0.1)
    rec = dual_reconstruction(p, CrFunction.zeros(mesh))
    assert np.allclose(rec.as_rt0().fluxes, 0.0)
    assert dual_energy(p, rec.as_rt0()) == 0.0


def test_reconstruction_requires_positive_eps():
    mesh = refined_square_mesh(1)
    g = P0Function(mesh, np.zeros(mesh.n_triangles))
    p = RofProblem(mesh, 1.0, g, eps=0.0)
    with pytest.raises(ValueError):
        dual_reconstruction(p, CrFunction.zeros(mesh))


def test_coercivity_at_minimizer(two_disk_level3):
    problem, u, _ = two_disk_level3
    assert coercivity_check(problem, u, u)


def test_coercivity_random_perturbations(two_disk_level3):
    problem, u, _ = two_disk_level3
    rng = np.random.default_rng(42)
    for scale in (0.01, 0.1, 1.0):
        values = u.values + scale * rng.standard_normal(problem.mesh.n_sides)
        values[problem.mesh.boundary_side] = 0.0
        v = CrFunction(problem.mesh, values, dirichlet=True)
        assert coercivity_check(problem, u, v)


def test_regularized_weak_duality_slack():
    # dual values never exceed primal values by more than the regularization offset
    spec = BenchmarkSpec()
    mesh = refined_square_mesh(3)
    g = P0Function(mesh, data_g(spec, mesh.barycenters))
    p = RofProblem(mesh, spec.alpha, g, eps=mesh.h_max)
    rng = np.random.default_rng(11)
    u, _ = flow_run(p, cfg=FlowConfig())
    for _ in range(5):
        y = Rt0Field(mesh, 0.2 * rng.standard_normal(mesh.n_sides))
        d = dual_energy(p, y)
        if d == INFEASIBLE:
            continue
        assert d <= primal_energy(p, u) + p.eps * 4.0


def test_problem_validation():
    mesh = refined_square_mesh(1)
    g = P0Function(mesh, np.zeros(mesh.n_triangles))
    with pytest.raises(ValueError):
        RofProblem(mesh, 0.0, g)
    with pytest.raises(ValueError):
        RofProblem(mesh, 1.0, g, eps=-1.0)
