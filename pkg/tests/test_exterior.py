from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import subspace_angles

from anosovlab.exterior import (
    DimensionError,
    SymplecticStructure,
    darboux_frame,
    exterior_power,
    gap_ratio,
    induced_wedge_form,
    invariant_bilinear_form,
    line_alignment,
    merge_sign,
    omega_eval,
    plucker_point,
    preserves_form,
    singular_values,
    standard_symplectic,
    subspace_angle,
    top_form_pairing,
    wedge_basis,
    wedge_product,
)
from anosovlab.representations import rotation, sym_power_sl2


def rng(seed=0):
    return np.random.default_rng(seed)


def random_unitary(n, r, complex_=False):
    A = r.standard_normal((n, n))
    if complex_:
        A = A + 1j * r.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / abs(np.diag(R)))


def minors_oracle(M, k):
    """Compound matrix straight from the definition, one determinant per entry."""
    d = M.shape[0]
    subsets = list(combinations(range(d), k))
    out = np.empty((len(subsets), len(subsets)), dtype=np.result_type(M, float))
    for a, I in enumerate(subsets):
        for b, J in enumerate(subsets):
            out[a, b] = np.linalg.det(M[np.ix_(I, J)])
    return out


# ---- symplectic form ---------------------------------------------------------


def test_standard_symplectic_m1():
    assert standard_symplectic(1).form.tolist() == [[0, 1], [-1, 0]]


def test_standard_symplectic_m2():
    W = standard_symplectic(2).form
    expected = np.zeros((4, 4), dtype=int)
    expected[0, 2] = expected[1, 3] = 1
    expected[2, 0] = expected[3, 1] = -1
    assert np.array_equal(W, expected)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_standard_symplectic_skew(m):
    W = standard_symplectic(m).form
    assert np.array_equal(W.T, -W)
    assert np.array_equal(W @ W, -np.eye(2 * m, dtype=int))


def test_structure_rejects_degenerate_and_symmetric():
    with pytest.raises(ValueError):
        SymplecticStructure(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        SymplecticStructure(np.eye(2))
    with pytest.raises(ValueError):
        SymplecticStructure(np.zeros((3, 3)))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_omega_on_basis(m):
    S = standard_symplectic(m)
    E = np.eye(2 * m)
    assert omega_eval(E[0], E[m], S) == 1
    assert omega_eval(E[m], E[0], S) == -1


def test_omega_same_lagrangian_block():
    E = np.eye(4)
    assert omega_eval(E[0], E[1], standard_symplectic(2)) == 0


def test_omega_sum_formula():
    # sum u_i v_{i+m} - u_{i+m} v_i
    r = rng(3)
    m = 3
    u, v = r.standard_normal(2 * m), r.standard_normal(2 * m)
    direct = sum(u[i] * v[i + m] - u[i + m] * v[i] for i in range(m))
    assert omega_eval(u, v, standard_symplectic(m)) == pytest.approx(direct, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.booleans())
def test_omega_alternating(m, seed, cplx):
    r = rng(seed)
    u = r.standard_normal(2 * m) + (1j * r.standard_normal(2 * m) if cplx else 0)
    v = r.standard_normal(2 * m) + (1j * r.standard_normal(2 * m) if cplx else 0)
    S = standard_symplectic(m)
    assert abs(omega_eval(u, v, S) + omega_eval(v, u, S)) <= 1e-12
    assert abs(omega_eval(u, u, S)) <= 1e-12


def test_omega_is_bilinear_not_sesquilinear():
    S = standard_symplectic(1)
    u = np.array([1j, 0])
    v = np.array([0, 1])
    assert omega_eval(u, v, S) == 1j


def test_omega_integer_inputs_are_exact():
    S = standard_symplectic(2)
    u = np.array([3, 1, 4, 1])
    v = np.array([5, 9, 2, 6])
    assert omega_eval(u, v, S) == 3 * 2 + 1 * 6 - 4 * 5 - 1 * 9


def test_preserves_form_examples():
    W = standard_symplectic(2).form
    assert preserves_form(W, W) == (0.0, True)
    assert preserves_form(np.eye(4), W) == (0.0, True)
    D = np.diag([4.0, 0.25])
    res, ok = preserves_form(D, standard_symplectic(1).form)
    assert ok and res == 0.0
    res, ok = preserves_form(np.diag([2.0, 1.0]), standard_symplectic(1).form)
    assert not ok and res == pytest.approx(1.0)


def test_preserves_form_shape_mismatch():
    with pytest.raises(DimensionError):
        preserves_form(np.eye(3), standard_symplectic(1).form)


def test_darboux_frame_on_rotated_form():
    r = rng(5)
    Q = random_unitary(6, r)
    J = 2.5 * Q @ standard_symplectic(3).form @ Q.T
    D = darboux_frame(J)
    assert np.allclose(D.T @ D, np.eye(6), atol=1e-13)
    C = D.T @ J @ D
    c = C[0, 3]
    assert np.allclose(C, c * standard_symplectic(3).form, atol=1e-12)


# ---- singular values -----------------------------------------------------------


def test_singular_values_diagonal():
    assert np.allclose(singular_values(np.diag([4.0, 0.25])).values, [4, 0.25], atol=1e-15)


def test_singular_values_unitary():
    U = random_unitary(5, rng(1), complex_=True)
    assert np.allclose(singular_values(U).values, 1, atol=1e-13)


def test_singular_values_frames():
    r = rng(2)
    M = r.standard_normal((4, 4))
    p = singular_values(M)
    assert np.allclose(p.left @ np.diag(p.values) @ p.right.conj().T, M, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.booleans())
def test_singular_values_square_roots_of_gram_eigenvalues(n, seed, cplx):
    r = rng(seed)
    M = r.standard_normal((n, n)) + (1j * r.standard_normal((n, n)) if cplx else 0)
    s = singular_values(M).values
    lam = np.sort(np.linalg.eigvalsh(M @ M.conj().T))[::-1]
    assert np.allclose(s**2, lam, rtol=1e-10, atol=1e-10 * s[0] ** 2)


def test_gap_ratio_examples():
    assert gap_ratio(np.diag([4.0, 1.0, 0.25]), 1) == pytest.approx(4)
    assert gap_ratio(np.diag([9.0, 3.0, 1.0]), 2) == pytest.approx(3)
    assert gap_ratio(np.diag([1.0, 0.0]), 1) == np.inf
    with pytest.raises(ValueError):
        gap_ratio(np.eye(3), 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_gap_ratio_invariances(n, seed, c):
    r = rng(seed)
    M = r.standard_normal((n, n))
    U, V = random_unitary(n, r, True), random_unitary(n, r, True)
    for k in range(1, n):
        g = gap_ratio(M, k)
        assert gap_ratio(c * M, k) == pytest.approx(g, rel=1e-10)
        assert gap_ratio(U @ M @ V, k) == pytest.approx(g, rel=1e-10)


# ---- exterior powers -------------------------------------------------------------


def test_wedge_basis_lex_order():
    B = wedge_basis(4, 2)
    assert B.index_list == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert B.position((1, 3)) == 4
    assert B.labels()[0] == "{1,2}"


def test_merge_sign():
    assert merge_sign((0,), (1,)) == 1
    assert merge_sign((1,), (0,)) == -1
    assert merge_sign((0, 2), (1,)) == -1
    assert merge_sign((1, 2), (0,)) == 1
    assert merge_sign((0,), (0,)) == 0


@pytest.mark.parametrize("d,k", [(3, 1), (4, 2), (5, 3), (6, 3)])
def test_exterior_power_identity(d, k):
    E = exterior_power(np.eye(d), k)
    assert np.array_equal(E, np.eye(comb(d, k)))


def test_exterior_power_diagonal():
    a, b, c = 2.0, 3.0, 5.0
    E = exterior_power(np.diag([a, b, c]), 2)
    assert np.allclose(E, np.diag([a * b, a * c, b * c]))


def test_exterior_power_top_is_det():
    M = np.array([[2, 7], [1, 3]])
    assert exterior_power(M, 2).tolist() == [[-1]]


def test_exterior_power_matches_minor_oracle():
    r = rng(4)
    M = r.standard_normal((5, 5)) + 1j * r.standard_normal((5, 5))
    for k in range(1, 6):
        assert np.allclose(exterior_power(M, k), minors_oracle(M, k), atol=1e-12)


def test_exterior_power_integer_exact():
    M = np.array([[10**6, 3, 1], [7, 10**6, 2], [5, 11, 10**6]], dtype=np.int64)
    E = exterior_power(M, 3)
    expected = round(np.linalg.det(M.astype(object).astype(float)))
    # exact big integer, compared with a hand expansion
    a, b, c = M.tolist()
    exact = (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
             + a[2] * (b[0] * c[1] - b[1] * c[0]))
    assert int(E[0, 0]) == exact
    assert abs(exact - expected) / exact < 1e-12


def test_exterior_power_guard():
    with pytest.raises(DimensionError):
        exterior_power(np.eye(20), 10)
    with pytest.raises(ValueError):
        exterior_power(np.eye(3), 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.data())
def test_exterior_power_functorial(d, seed, data):
    k = data.draw(st.integers(1, d))
    r = rng(seed)
    A, B = r.standard_normal((d, d)), r.standard_normal((d, d))
    lhs = exterior_power(A @ B, k)
    rhs = exterior_power(A, k) @ exterior_power(B, k)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.data())
def test_exterior_power_determinant(d, seed, data):
    k = data.draw(st.integers(1, d))
    A = rng(seed).standard_normal((d, d))
    lhs = np.linalg.det(exterior_power(A, k))
    rhs = np.linalg.det(A) ** comb(d - 1, k - 1)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.data())
def test_exterior_power_singular_values(d, seed, data):
    k = data.draw(st.integers(1, d - 1))
    A = rng(seed).standard_normal((d, d))
    s = np.linalg.svd(A, compute_uv=False)
    E = exterior_power(A, k)
    assert np.linalg.svd(E, compute_uv=False)[0] == pytest.approx(np.prod(s[:k]), rel=1e-9)
    assert gap_ratio(E, 1) == pytest.approx(gap_ratio(A, k), rel=1e-9)


def test_induced_form_first_power():
    W = standard_symplectic(2).form
    assert np.array_equal(induced_wedge_form(W, 1), W)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_odd_wedges_of_omega_are_skew(m):
    W = standard_symplectic(m).form
    for k in range(1, m + 1, 2):
        F = induced_wedge_form(W, k)
        assert F.dtype.kind in "iO"
        assert np.array_equal(F.T, -F)


def test_even_wedge_of_omega_is_symmetric():
    F = induced_wedge_form(standard_symplectic(2).form, 2)
    assert np.array_equal(F.T, F)
    assert np.any(F != 0)


# ---- Pluecker points and wedge products -----------------------------------------


def test_plucker_coordinate_frame():
    F = np.eye(5)[:, :3]
    p = plucker_point(F)
    assert p[0] == 1 and np.count_nonzero(p) == 1


def test_plucker_orientation():
    E = np.eye(4)
    p = plucker_point(E[:, [0, 1]])
    q = plucker_point(E[:, [1, 0]])
    assert np.array_equal(p, -q)
    assert line_alignment(p, q) == 1


def test_plucker_rank_deficient():
    with pytest.raises(ValueError):
        plucker_point(np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.data())
def test_plucker_unit_and_basis_independent(d, seed, data):
    k = data.draw(st.integers(1, d - 1))
    r = rng(seed)
    F = np.linalg.qr(r.standard_normal((d, k)))[0]
    p = plucker_point(F)
    assert abs(np.linalg.norm(p) - 1) <= 1e-12
    G = F @ random_unitary(k, r)
    assert line_alignment(p, plucker_point(G)) == pytest.approx(1, abs=1e-12)


def test_plucker_transforms_by_compound():
    r = rng(9)
    A = r.standard_normal((5, 5))
    F = np.linalg.qr(r.standard_normal((5, 2)))[0]
    lhs = plucker_point(A @ F)
    rhs = exterior_power(A, 2) @ plucker_point(F)
    assert line_alignment(lhs, rhs) == pytest.approx(1, abs=1e-12)


def test_top_form_pairing_d2():
    u, v = np.array([2.0, 3.0]), np.array([5.0, 7.0])
    assert top_form_pairing(u, v, 2) == 2 * 7 - 3 * 5


def test_top_form_pairing_odd_alternating():
    u = rng(1).standard_normal(20)
    assert top_form_pairing(u, u, 6) == pytest.approx(0, abs=1e-12)


def test_top_form_pairing_matches_determinant():
    # for decomposable u = x1^x2^x3, v = y1^y2^y3 the pairing is det[x | y]
    r = rng(8)
    X, Y = r.standard_normal((6, 3)), r.standard_normal((6, 3))

    def decomposable(F):
        return np.array([np.linalg.det(F[list(I), :]) for I in combinations(range(6), 3)])

    val = top_form_pairing(decomposable(X), decomposable(Y), 6)
    assert val == pytest.approx(np.linalg.det(np.hstack([X, Y])), rel=1e-12)


def test_wedge_product_associative_and_graded():
    r = rng(11)
    d = 5
    a, b, c = (r.standard_normal(d) for _ in range(3))
    ab = wedge_product(a, b, d, 1, 1)
    assert np.allclose(ab, -wedge_product(b, a, d, 1, 1))
    lhs = wedge_product(ab, c, d, 2, 1)
    rhs = wedge_product(a, wedge_product(b, c, d, 1, 1), d, 1, 2)
    assert np.allclose(lhs, rhs, atol=1e-14)


# ---- invariant forms ------------------------------------------------------------


def test_invariant_form_single_sp2_element():
    W = standard_symplectic(1).form
    res = invariant_bilinear_form([W.astype(float)])
    assert res is not None and res.kind == "skew"
    assert line_alignment(res.matrix.ravel(), W.ravel()) == pytest.approx(1, abs=1e-10)


def test_invariant_form_rotations_symmetric():
    mats = [rotation(0.3), rotation(1.1)]
    res = invariant_bilinear_form(mats, prefer="symmetric")
    assert res.kind == "symmetric"
    assert line_alignment(res.matrix.ravel(), np.eye(2).ravel()) == pytest.approx(1, abs=1e-10)


def test_invariant_form_rotations_tie_flagged():
    # SO(2) preserves both the identity and Omega_1; the default tie rule picks the skew one
    res = invariant_bilinear_form([rotation(0.3), rotation(1.1)])
    assert res.ambiguous and res.nullity == 2 and res.kind == "skew"


def test_invariant_form_sym3_generic():
    r = rng(12)
    mats = []
    for _ in range(2):
        A = r.standard_normal((2, 2))
        A /= np.sqrt(abs(np.linalg.det(A)))
        if np.linalg.det(A) < 0:
            A[:, 0] *= -1
        mats.append(sym_power_sl2(A, 4))
    res = invariant_bilinear_form(mats)
    assert res is not None and res.kind == "skew" and not res.ambiguous
    assert res.residual <= 1e-8
    for M in mats:
        assert preserves_form(M, res.matrix, 1e-8)[1]


def test_invariant_form_absent():
    r = rng(13)
    mats = [r.standard_normal((3, 3)) for _ in range(2)]
    assert invariant_bilinear_form(mats) is None


# ---- principal angles -----------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7), st.integers(0, 2**32 - 1), st.data())
def test_subspace_angle_against_scipy(d, seed, data):
    k = data.draw(st.integers(1, d - 1))
    r = rng(seed)
    A, B = r.standard_normal((d, k)), r.standard_normal((d, k))
    assert subspace_angle(A, B) == pytest.approx(subspace_angles(A, B).max(), abs=1e-12)


def test_subspace_angle_small():
    e = 1e-9
    a = np.array([[1.0], [0.0]])
    b = np.array([[np.cos(e)], [np.sin(e)]])
    assert subspace_angle(a, b) == pytest.approx(e, rel=1e-6)
