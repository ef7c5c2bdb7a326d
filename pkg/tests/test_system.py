import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from c1vem import generate_structured_cube
from c1vem.element import dof_scaling, local_forms
from c1vem.study.problems import get_problem
from c1vem.system import (
    ConfigError,
    LinearSystem,
    SolverError,
    apply_dirichlet,
    assemble,
    check_coefficients,
    dirichlet_vertices,
    energy_norm,
    lagrange_solve,
    number_dofs,
    solve,
    surface_gradient,
)


def zero(x):
    return np.zeros(len(x))


def zero_grad(x):
    return np.zeros((len(x), 3))


def affine(g, c0=0.0):
    g = np.asarray(g, dtype=float)
    return (lambda x: x @ g + c0), (lambda x: np.tile(g, (len(x), 1)))


def test_dof_counts(voronoi):
    assert number_dofs(generate_structured_cube(2)).ndofs == 108
    assert number_dofs(generate_structured_cube(1)).ndofs == 32
    assert number_dofs(voronoi).ndofs == 4 * voronoi.n_vertices


@pytest.mark.parametrize("strategy", [("mean", "hP"), ("max", "he"), ("min", "hf")])
def test_numbering_is_deterministic(strategy):
    mesh = generate_structured_cube(3)
    a, b = number_dofs(mesh, strategy), number_dofs(mesh, strategy)
    np.testing.assert_array_equal(a.hnu, b.hnu)
    assert a.strategy == strategy


def test_dofmap_interpolation_roundtrip(rng):
    mesh = generate_structured_cube(2)
    dm = number_dofs(mesh)
    g = rng.normal(size=3)
    u, gu = affine(g, 0.5)
    x = dm.interpolate(u, gu, mesh.vertices)
    np.testing.assert_allclose(dm.values(x), mesh.vertices @ g + 0.5)
    np.testing.assert_allclose(dm.gradients(x), np.tile(g, (mesh.n_vertices, 1)), rtol=1e-15)
    np.testing.assert_array_equal(dm.scaling, dof_scaling(dm.hnu))


def test_single_cube_equals_local_form(disc_cache):
    disc = disc_cache(1)
    dm = number_dofs(disc.mesh)
    A = assemble(disc, dm, (1.0, 0.0, 0.0)).matrix.toarray()
    ops = disc.elements[0]
    idx = dm.local(ops.vertex_ids)
    K = local_forms(ops, dm.hnu[ops.vertex_ids]).k_delta
    np.testing.assert_allclose(A[np.ix_(idx, idx)], K, rtol=1e-15, atol=1e-15 * np.abs(K).max())
    assert sorted(idx) == list(range(32))


def test_symmetry_on_4cube(disc_cache):
    disc = disc_cache(4)
    sys_ = assemble(disc, number_dofs(disc.mesh), (1.0, 1.0, 1.0))
    assert sys_.asymmetry() < 1e-12


def test_constant_in_kernel(disc_cache):
    disc = disc_cache(4)
    dm = number_dofs(disc.mesh)
    A = assemble(disc, dm, (1.0, 1.0, 0.0)).matrix
    one = dm.interpolate(lambda x: np.ones(len(x)), zero_grad, disc.mesh.vertices)
    assert np.abs(A @ one).max() < 1e-10


def test_global_p1_has_zero_delta_energy(disc_cache, rng):
    disc = disc_cache(4)
    dm = number_dofs(disc.mesh)
    A = assemble(disc, dm, (1.0, 0.0, 0.0)).matrix
    for _ in range(3):
        u, gu = affine(rng.normal(size=3), rng.normal())
        x = dm.interpolate(u, gu, disc.mesh.vertices)
        assert abs(x @ (A @ x)) < 1e-10


def test_load_of_constant_sums_to_volume(disc_cache):
    disc = disc_cache(2)
    dm = number_dofs(disc.mesh)
    rhs = assemble(disc, dm, (1.0, 0.0, 0.0), lambda x: np.ones(len(x))).rhs
    one = dm.interpolate(lambda x: np.ones(len(x)), zero_grad, disc.mesh.vertices)
    assert rhs @ one == pytest.approx(1.0, rel=1e-13)


def test_assembly_is_bitwise_reproducible(disc_cache):
    disc = disc_cache(2)
    dm = number_dofs(disc.mesh)
    f = lambda x: np.sin(x[:, 0]) + x[:, 1]
    a = assemble(disc, dm, (1.0, 0.5, 0.25), f)
    b = assemble(disc, dm, (1.0, 0.5, 0.25), f)
    assert (a.matrix != b.matrix).nnz == 0
    np.testing.assert_array_equal(a.rhs, b.rhs)


@pytest.mark.parametrize("coeffs", [(0.0, 0.0, 1.0), (-1.0, 0.0, 0.0), (1.0, -0.1, 0.0), (1.0, 0.0, -1.0)])
def test_inadmissible_coefficients(coeffs, disc_cache):
    with pytest.raises(ConfigError):
        check_coefficients(*coeffs)
    disc = disc_cache(1)
    with pytest.raises(ConfigError):
        assemble(disc, number_dofs(disc.mesh), coeffs)


def test_second_order_mode_is_admissible():
    check_coefficients(0.0, 1.0, 0.0)
    check_coefficients(0.0, 1.0, 1.0)


def test_dirichlet_zero_data(disc_cache, rng):
    disc = disc_cache(3)
    dm = number_dofs(disc.mesh)
    sys_ = assemble(disc, dm, (1.0, 0.0, 1.0), lambda x: np.cos(x[:, 0]))
    con = apply_dirichlet(sys_, dm, disc.mesh, zero, zero_grad)
    free = np.setdiff1d(np.arange(dm.ndofs), con.constrained)
    np.testing.assert_array_equal(con.rhs[free], sys_.rhs[free])
    np.testing.assert_array_equal(con.rhs[con.constrained], 0.0)
    assert con.asymmetry() < 1e-12


def test_dirichlet_linear_data(disc_cache):
    disc = disc_cache(2)
    mesh = disc.mesh
    dm = number_dofs(mesh)
    u, gu = affine([1.0, 0.0, 0.0])
    con = apply_dirichlet(assemble(disc, dm, (1.0, 0.0, 0.0)), dm, mesh, u, gu)
    verts = dirichlet_vertices(mesh)
    assert len(verts) == 26
    vals = con.values.reshape(-1, 4)
    np.testing.assert_array_equal(vals[:, 0], mesh.vertices[verts, 0])
    np.testing.assert_allclose(vals[:, 1:], dm.hnu[verts, None] * [1.0, 0.0, 0.0], rtol=1e-15)
    A = con.matrix.toarray()
    np.testing.assert_array_equal(A[np.ix_(con.constrained, con.constrained)], np.eye(len(con.constrained)))


def test_example2_closure_rule():
    """Vertices on x in {0, 1} are free only if they avoid every other boundary plane."""
    mesh = generate_structured_cube(4)
    prob = get_problem("example2")
    verts = set(dirichlet_vertices(mesh, prob.dirichlet_region).tolist())
    for v, p in enumerate(mesh.vertices):
        on_x = np.isclose(p[0], 0) or np.isclose(p[0], 1)
        on_other = np.any(np.isclose(p[1:], 0) | np.isclose(p[1:], 1))
        if on_other:
            assert v in verts
        elif on_x:
            assert v not in verts
        else:
            assert v not in verts
    assert len(verts) == 5**3 - 3**3 - 2 * 3**2


def test_dirichlet_rejects_nonfinite_data(disc_cache):
    disc = disc_cache(1)
    dm = number_dofs(disc.mesh)
    sys_ = assemble(disc, dm, (1.0, 0.0, 0.0))
    with pytest.raises(ConfigError):
        apply_dirichlet(sys_, dm, disc.mesh, lambda x: np.full(len(x), np.nan), zero_grad)


@pytest.mark.parametrize("name", ["example1", "example2", "example3"])
def test_elimination_matches_lagrange(name, disc_cache):
    disc = disc_cache(3)
    prob = get_problem(name)
    dm = number_dofs(disc.mesh)
    sys_ = assemble(disc, dm, prob.coeffs, prob.f)
    con = apply_dirichlet(sys_, dm, disc.mesh, prob.u, prob.grad, prob.dirichlet_region)
    x, _ = solve(con)
    ref = lagrange_solve(sys_, con.constrained, con.values)
    assert np.abs(x - ref).max() <= 1e-9 * max(1.0, np.abs(ref).max())


def test_identity_system(rng):
    b = rng.normal(size=7)
    for method in ("cholesky", "cg"):
        x, rep = solve(LinearSystem(sp.identity(7, format="csr"), b.copy()), method)
        np.testing.assert_allclose(x, b, rtol=1e-15)
        assert rep.iterations == 0


def test_one_by_one():
    x, rep = solve(LinearSystem(sp.csr_matrix([[2.0]]), np.array([4.0])))
    assert x[0] == pytest.approx(2.0, rel=1e-15)
    assert rep.method == "cholesky"
    assert rep.residual < 1e-15


def test_patch_test_solve_is_exact(disc_cache):
    disc = disc_cache(3)
    prob = get_problem("patch-p2")
    dm = number_dofs(disc.mesh)
    con = apply_dirichlet(assemble(disc, dm, prob.coeffs, prob.f), dm, disc.mesh, prob.u, prob.grad)
    x, rep = solve(con)
    exact = dm.interpolate(prob.u, prob.grad, disc.mesh.vertices)
    assert np.abs(x - exact).max() < 1e-9
    assert rep.residual <= 1e-10


def test_indefinite_matrix_detected():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(SolverError):
        solve(LinearSystem(A, np.ones(2)), "cholesky")
    with pytest.raises(SolverError):
        solve(LinearSystem(sp.csr_matrix(np.diag([1.0, -1.0])), np.ones(2)), "cg")


def test_cg_iteration_cap():
    n = 50
    A = sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")
    with pytest.raises(SolverError):
        solve(LinearSystem(A, np.ones(n)), "cg", maxiter=3)


def test_unknown_solver():
    with pytest.raises(ConfigError):
        solve(LinearSystem(sp.identity(2, format="csr"), np.ones(2)), "gmres")


def test_cg_matches_direct(disc_cache):
    disc = disc_cache(4)
    prob = get_problem("example1")
    dm = number_dofs(disc.mesh)
    con = apply_dirichlet(assemble(disc, dm, prob.coeffs, prob.f), dm, disc.mesh, prob.u, prob.grad)
    xd, _ = solve(con, "cholesky")
    xc, rep = solve(con, "cg", tol=1e-12)
    assert rep.iterations > 0
    assert energy_norm(con.matrix, xd - xc) <= 1e-8 * energy_norm(con.matrix, xd)


@given(n=st.integers(1, 12), seed=st.integers(0, 10**6))
def test_solvers_on_random_spd(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    A = sp.csr_matrix(M @ M.T + n * np.eye(n))
    b = rng.normal(size=n)
    xd, _ = solve(LinearSystem(A, b), "cholesky")
    xc, _ = solve(LinearSystem(A, b), "cg", tol=1e-12)
    ref = np.linalg.solve(A.toarray(), b)
    np.testing.assert_allclose(xd, ref, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(xc, ref, rtol=1e-8, atol=1e-10)


def test_diagonal_ratio_is_refinement_independent(disc_cache):
    ratios = []
    for n in (4, 8, 16):
        disc = disc_cache(n)
        d = assemble(disc, number_dofs(disc.mesh), (1.0, 0.0, 0.0)).matrix.diagonal()
        ratios.append(d.max() / d.min())
    assert max(ratios) / min(ratios) <= 4.0, ratios


def test_surface_gradient_flat_face():
    mesh = generate_structured_cube(2)
    g = np.array([0.3, -0.7, 1.1])
    u, gu = affine(g)
    # face centers of the six boundary planes are the only non-edge boundary vertices
    centers = [v for v, p in enumerate(mesh.vertices) if np.sum(np.isclose(p, 0) | np.isclose(p, 1)) == 1]
    assert len(centers) == 6
    for v in centers:
        p = mesh.vertices[v]
        axis = int(np.flatnonzero(np.isclose(p, 0) | np.isclose(p, 1))[0])
        n = np.zeros(3)
        n[axis] = 1.0 if p[axis] > 0.5 else -1.0
        got = surface_gradient(mesh, np.array([v]), gu, lambda x: np.array([g @ n]))
        np.testing.assert_allclose(got[0], g, atol=1e-15)


def test_surface_gradient_rejects_edges_and_interior():
    mesh = generate_structured_cube(2)
    corner = int(np.flatnonzero(np.all(mesh.vertices == 0, axis=1))[0])
    inner = int(np.flatnonzero(np.all(np.isclose(mesh.vertices, 0.5), axis=1))[0])
    for v in (corner, inner):
        with pytest.raises(ConfigError):
            surface_gradient(mesh, np.array([v]), zero_grad, lambda x: np.zeros(1))
