import numpy as np
import pytest

from mtschwarz.discretization import (SourceSpec, apply_operator, assemble_global,
                                      assemble_local, derivative, faraday_residual,
                                      recover_electric_field, source_to_rhs)
from mtschwarz.geometry import INTERIOR, build_grid, decompose
from mtschwarz.local_solver import factor, solve_dirichlet
from mtschwarz.schwarz import monolithic_solve
from oracles import dense_operator

PI = np.pi


def test_single_unknown(unit_square):
    g = unit_square(0.5)
    f = np.arange(g.n_nodes, dtype=float)
    p = assemble_global(g, 1.0, f)
    assert p.operator.shape == (1, 1)
    assert p.operator.toarray()[0, 0] == -16 - 1j
    center = int(np.flatnonzero(g.classes == INTERIOR)[0])
    np.testing.assert_array_equal(p.rhs, [f[center]])


@pytest.mark.parametrize("rects,h", [([(0, 1, 0, 1)], 0.25),
                                     ([(0, 1, 0, 1), (1, 2, 0, 1), (0, 1, 1, 2)], 0.25)])
def test_matches_dense_oracle(rects, h):
    g = build_grid(rects, h)
    p = assemble_global(g, 1.0)
    A, B, interior = dense_operator(g, 1.0)
    np.testing.assert_array_equal(p.dof_map, interior)
    np.testing.assert_array_equal(p.operator.toarray(), A)
    assert p.operator.nnz == np.count_nonzero(A)
    Bdense = np.zeros_like(B)
    Bdense[:, p.boundary_nodes] = p.coupling.toarray()
    np.testing.assert_array_equal(Bdense, B)


def test_complex_symmetric_not_hermitian(unit_square):
    A = assemble_global(unit_square(0.25), 1.0).operator
    assert (A - A.T).count_nonzero() == 0
    assert (A - A.conj().T).count_nonzero() > 0
    assert max(np.diff(A.tocsr().indptr)) <= 5


def test_zero_omega_rejected(unit_square):
    with pytest.raises(ValueError, match="non-zero"):
        assemble_global(unit_square(0.25), 0.0)
    with pytest.raises(ValueError):
        apply_operator(np.zeros(25), unit_square(0.25), 0)


def test_zero_source_gives_zero(two_square_grid):
    u = monolithic_solve(two_square_grid, 1.0, np.zeros(two_square_grid.n_nodes))
    assert not np.any(u)


def test_second_order_convergence():
    errs = []
    for n in (16, 32):
        g = build_grid([(0, 1, 0, 1)], 1 / n)
        exact = g.sample(lambda x, z: np.sin(PI * x) * np.sin(PI * z))
        f = (-2 * PI ** 2 - 1j) * exact
        errs.append(np.max(np.abs(monolithic_solve(g, 1.0, f) - exact)))
    assert 3.4 <= errs[0] / errs[1] <= 4.6


def test_local_equals_global_for_single_tile(two_square_grid):
    (sd,) = decompose(two_square_grid, [(0, 2, 0, 1)], 3)
    loc = assemble_local(two_square_grid, sd, 2.0)
    glob = assemble_global(two_square_grid, 2.0)
    assert (loc.operator != glob.operator).nnz == 0
    np.testing.assert_array_equal(loc.dof_map, glob.dof_map)


def test_local_unknown_count(two_square_grid):
    sd1, _ = decompose(two_square_grid, [(0, 1, 0, 1), (1, 2, 0, 1)], 6)
    p = assemble_local(two_square_grid, sd1, 1.0)
    assert p.n_unknowns == 34 * 28
    np.testing.assert_array_equal(p.boundary_nodes[:sd1.interface.size], sd1.interface)


def test_local_solve_superposition(two_square_grid, rng):
    g = two_square_grid
    sd1, _ = decompose(g, [(0, 1, 0, 1), (1, 2, 0, 1)], 6)
    fact = factor(assemble_local(g, sd1, 1.0), n_interface=sd1.interface.size)
    f = rng.standard_normal(g.n_nodes) + 1j * rng.standard_normal(g.n_nodes)
    g1 = rng.standard_normal(sd1.interface.size)
    g2 = 1j * rng.standard_normal(sd1.interface.size)
    zero = np.zeros(g.n_nodes)
    lhs = solve_dirichlet(fact, f, g1 + g2, sd1)
    rhs = (solve_dirichlet(fact, f, g1, sd1) + solve_dirichlet(fact, zero, g2, sd1))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * np.abs(lhs).max())
    np.testing.assert_allclose(solve_dirichlet(fact, f, g1 + g2, sd1),
                               solve_dirichlet(fact, f, g1, sd1) + solve_dirichlet(fact, f, g2, sd1)
                               - solve_dirichlet(fact, f, 0 * g1, sd1), atol=1e-10)


def test_apply_operator_matches_assembled(unit_square, rng):
    g = unit_square(0.25)
    A, Bfull, interior = dense_operator(g, 1.0)
    u = rng.standard_normal(g.n_nodes) + 1j * rng.standard_normal(g.n_nodes)
    r = apply_operator(u, g, 1.0)
    expected = A @ u[interior] + Bfull @ u
    np.testing.assert_allclose(r[interior], expected, rtol=1e-14, atol=1e-14 * np.abs(expected).max())
    assert not np.any(r[g.boundary])
    assert not np.any(apply_operator(np.zeros(g.n_nodes), g, 1.0))


def test_apply_operator_matches_sparse_matvec(two_square_grid, rng):
    g = two_square_grid
    p = assemble_global(g, 3.0)
    u = rng.standard_normal(g.n_nodes) + 1j * rng.standard_normal(g.n_nodes)
    mv = p.operator @ u[p.dof_map] + p.coupling @ u[p.boundary_nodes]
    r = apply_operator(u, g, 3.0)[p.dof_map]
    assert np.max(np.abs(r - mv)) <= 1e-14 * np.max(np.abs(mv))


def test_exact_discrete_solution_has_tiny_residual(two_square_grid):
    g = two_square_grid
    f = g.sample(lambda x, z: np.cos(PI * x) * (1 + z)).astype(complex)
    u = monolithic_solve(g, 1.0, f)
    r = apply_operator(u, g, 1.0) - f
    assert np.linalg.norm(r[g.interior]) <= 1e-10 * np.linalg.norm(f[g.interior])


def _currents(g, jx, jz):
    return SourceSpec(jx=g.sample(jx), jz=g.sample(jz))


def test_source_constant_currents(two_square_grid):
    f = source_to_rhs(_currents(two_square_grid, lambda x, z: 2.0 + 0 * x,
                                lambda x, z: -1.5 + 0 * x), two_square_grid)
    np.testing.assert_allclose(f, 0.0, atol=1e-10)


def test_source_quadratic_exact():
    g = build_grid([(0, 1, 0, 1), (1, 2, 0, 1), (0, 1, 1, 2)], 0.125)
    f = source_to_rhs(_currents(g, lambda x, z: z ** 2, lambda x, z: 0 * x), g)
    np.testing.assert_allclose(f, -2 * g.z, atol=1e-11)


def test_source_sine_second_order():
    defects = []
    for n in (16, 32, 64):
        g = build_grid([(0, 1, 0, 1)], 1 / n)
        f = source_to_rhs(_currents(g, lambda x, z: 0 * x, lambda x, z: np.sin(PI * x)), g)
        defects.append(np.max(np.abs(f - PI * np.cos(PI * g.x))))
    for a, b in zip(defects, defects[1:]):
        assert 3.5 <= a / b <= 4.5


def test_derivative_rejects_bad_axis(unit_square):
    with pytest.raises(ValueError):
        derivative(np.zeros(25), unit_square(0.25), "y")


def test_electric_field_trivial(two_square_grid):
    g = two_square_grid
    zero = np.zeros(g.n_nodes)
    ex, ez = recover_electric_field(zero, SourceSpec(zero, zero), g)
    assert not np.any(ex) and not np.any(ez)
    ex, ez = recover_electric_field(g.z.copy(), SourceSpec(zero, zero), g)
    np.testing.assert_allclose(ex, -1.0, atol=1e-12)
    np.testing.assert_allclose(ez, 0.0, atol=1e-12)


def test_faraday_residual_second_order():
    omega = 1.0
    # u = sin(pi x) sin(pi z) solves the equation for f = -dJx/dz with this J_x
    jx = lambda x, z: -(-2 * PI ** 2 - 1j * omega) * np.sin(PI * x) * (-np.cos(PI * z) / PI)  # noqa: E731
    res = []
    for n in (16, 32, 64):
        g = build_grid([(0, 1, 0, 1)], 1 / n)
        src = SourceSpec(jx=g.sample(jx), jz=np.zeros(g.n_nodes))
        f_exact = (-2 * PI ** 2 - 1j * omega) * g.sample(lambda x, z: np.sin(PI * x) * np.sin(PI * z))
        assert np.max(np.abs(source_to_rhs(src, g) - f_exact)) < 40 / n ** 2
        u = g.sample(lambda x, z: np.sin(PI * x) * np.sin(PI * z)).astype(complex)
        ex, ez = recover_electric_field(u, src, g)
        r = faraday_residual(u, ex, ez, g, omega)
        i, k = g.ik
        deep = (i >= 2) & (i <= g.nx - 3) & (k >= 2) & (k <= g.nz - 3)
        res.append(np.max(np.abs(r[deep])))
    for a, b in zip(res, res[1:]):
        assert 3.5 <= a / b <= 4.5


def test_nonfinite_source_rejected(unit_square):
    g = unit_square(0.25)
    bad = np.zeros(g.n_nodes)
    bad[3] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        SourceSpec(bad, np.zeros(g.n_nodes))
    with pytest.raises(ValueError, match="non-finite"):
        assemble_global(g, 1.0, bad)
