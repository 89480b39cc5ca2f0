"""Dense linear algebra over R or C: singular values, symplectic forms,
compound (exterior power) matrices, Pluecker coordinates and wedge pairings.

Real and complex inputs are both accepted; the field is whatever numpy dtype
the caller passes in. Bilinear forms are never conjugated, the Hermitian inner
product always is.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Optional, Sequence

import numpy as np

# identity checks on well-conditioned inputs
DEFAULT_TOL = 1e-10
# solve-based recovery (invariant forms)
SOLVE_TOL = 1e-8
# refuse compound matrices larger than this on a side
MAX_WEDGE_DIM = 10**4


class DimensionError(ValueError):
    pass


def _as_matrix(M) -> np.ndarray:
    A = np.asarray(M)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    return A


def _square(M) -> np.ndarray:
    A = _as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def is_integer_array(A: np.ndarray) -> bool:
    return np.issubdtype(A.dtype, np.integer) or A.dtype == object


# --------------------------------------------------------------------------
# symplectic structures


@dataclass(frozen=True, eq=False)
class SymplecticStructure:
    """A nondegenerate skew form ``omega(u, v) = u^T B v`` on K^{2m}."""

    form: np.ndarray

    def __post_init__(self):
        B = _square(self.form)
        n = B.shape[0]
        if n == 0 or n % 2:
            raise DimensionError(f"symplectic form needs even positive dimension, got {n}")
        scale = np.linalg.norm(B)
        if scale == 0:
            raise ValueError("zero form")
        if np.linalg.norm(B + B.T) > 1e-12 * scale:
            raise ValueError("form matrix is not skew-symmetric")
        if np.linalg.svd(B.astype(complex), compute_uv=False)[-1] <= 1e-12 * scale:
            raise ValueError("form matrix is degenerate")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "form", B)

    @property
    def dim(self) -> int:
        return self.form.shape[0]

    @property
    def m(self) -> int:
        return self.dim // 2

    def is_standard(self) -> bool:
        return self.form.shape == (self.dim, self.dim) and np.array_equal(
            self.form, standard_symplectic(self.m).form
        )


def standard_symplectic(m: int) -> SymplecticStructure:
    """Return the form with block matrix [[0, I_m], [-I_m, 0]] (integer entries)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    B = np.zeros((2 * m, 2 * m), dtype=np.int64)
    B[:m, m:] = np.eye(m, dtype=np.int64)
    B[m:, :m] = -np.eye(m, dtype=np.int64)
    return SymplecticStructure(B)


def _form_matrix(S) -> np.ndarray:
    return S.form if isinstance(S, SymplecticStructure) else _square(S)


def omega_eval(u, v, S):
    """Bilinear pairing ``u^T B v``; no conjugation, even over C."""
    B = _form_matrix(S)
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != (B.shape[0],) or v.shape != (B.shape[0],):
        raise DimensionError(
            f"vectors of shape {u.shape}, {v.shape} do not match form of dimension {B.shape[0]}"
        )
    return u @ (B @ v)


def preserves_form(M, B, tol: float = DEFAULT_TOL) -> tuple[float, bool]:
    """Relative Frobenius residual of ``M^T B M = B`` and the verdict at ``tol``."""
    M = _square(M)
    B = _form_matrix(B)
    if M.shape != B.shape:
        raise DimensionError(f"matrix {M.shape} and form {B.shape} differ in size")
    residual = float(np.linalg.norm(M.T @ B @ M - B) / np.linalg.norm(B))
    return residual, residual <= tol


def darboux_frame(J, tol: float = SOLVE_TOL) -> np.ndarray:
    """Orthogonal Q with ``Q^T J Q = c * Omega_m`` for a real skew J proportional
    to an orthogonal matrix.

    Raises ValueError when J is not (up to scale) orthogonal, since then no
    orthogonal change of basis can reach the standard form.
    """
    J = np.real_if_close(_square(J))
    if np.iscomplexobj(J):
        raise ValueError("darboux_frame works on real forms only")
    n = J.shape[0]
    if n % 2:
        raise DimensionError("odd dimension")
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] <= 0 or (s[0] - s[-1]) > tol * s[0]:
        raise ValueError("form is not a multiple of an orthogonal matrix")
    K = J / s[0]
    m = n // 2
    us: list[np.ndarray] = []
    vs: list[np.ndarray] = []
    for e in np.eye(n):
        x = e.copy()
        for w in us + vs:
            x -= (w @ x) * w
        norm = np.linalg.norm(x)
        if norm < 0.5:
            continue
        u = x / norm
        # K^2 = -I, so span(u, K^T u) is K-invariant and its complement is too
        us.append(u)
        vs.append(K.T @ u)
        if len(us) == m:
            break
    # K is orthogonal only up to the recovery error; snap Q to the nearest orthogonal matrix
    U, _, Vh = np.linalg.svd(np.column_stack(us + vs))
    return U @ Vh


# --------------------------------------------------------------------------
# singular values


@dataclass(frozen=True, eq=False)
class SingularProfile:
    values: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __len__(self):
        return len(self.values)


def fix_phases(U: np.ndarray, V: Optional[np.ndarray] = None):
    """Make the largest-magnitude entry of each column of U positive real,
    applying the same unit scalars to V so that ``U S V^*`` is unchanged."""
    U = U.copy()
    idx = np.argmax(np.abs(U), axis=0)
    pivots = U[idx, np.arange(U.shape[1])]
    phases = pivots / np.where(np.abs(pivots) == 0, 1, np.abs(pivots))
    phases = np.where(np.abs(pivots) == 0, 1, phases)
    U = U / phases
    if V is None:
        return U
    return U, V / phases


def singular_values(M, check: bool = True, tol: float = DEFAULT_TOL) -> SingularProfile:
    """SVD with a deterministic phase convention.

    With ``check`` the squared values are compared against an independent
    Hermitian eigensolve of ``M M^*``.
    """
    A = _as_matrix(M)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    U, s, Vh = np.linalg.svd(A)
    V = Vh.conj().T
    U_k, V_k = fix_phases(U[:, : len(s)], V[:, : len(s)])
    U = np.concatenate([U_k, fix_phases(U[:, len(s):])], axis=1) if U.shape[1] > len(s) else U_k
    V = np.concatenate([V_k, fix_phases(V[:, len(s):])], axis=1) if V.shape[1] > len(s) else V_k
    if check and s.size:
        lam = np.linalg.eigvalsh(A @ A.conj().T)[::-1][: len(s)]
        err = np.max(np.abs(s**2 - np.abs(lam))) / max(s[0] ** 2, np.finfo(float).tiny)
        if err > tol:
            raise ArithmeticError(f"singular values disagree with eigenvalues of MM* ({err:.2e})")
    return SingularProfile(values=s, left=U, right=V)


def gap_ratio(M, k: int) -> float:
    """sigma_k / sigma_{k+1}; ``inf`` when sigma_{k+1} vanishes."""
    A = _square(M)
    d = A.shape[0]
    if not 1 <= k < d:
        raise ValueError(f"k={k} out of range for dimension {d}")
    s = np.linalg.svd(A, compute_uv=False)
    if s[k] == 0:
        return float("inf")
    return float(s[k - 1] / s[k])


# --------------------------------------------------------------------------
# exterior powers


@dataclass(frozen=True)
class WedgeBasis:
    """Lexicographically ordered k-subsets of {0, ..., d-1} (zero-based)."""

    d: int
    k: int
    index_list: tuple

    def __len__(self):
        return len(self.index_list)

    def position(self, subset) -> int:
        return _wedge_positions(self.d, self.k)[tuple(subset)]

    def labels(self) -> list[str]:
        return ["{" + ",".join(str(i + 1) for i in I) + "}" for I in self.index_list]


@lru_cache(maxsize=None)
def wedge_basis(d: int, k: int) -> WedgeBasis:
    if not 0 <= k <= d:
        raise ValueError(f"degree {k} out of range for dimension {d}")
    return WedgeBasis(d, k, tuple(itertools.combinations(range(d), k)))


@lru_cache(maxsize=None)
def _wedge_positions(d: int, k: int) -> dict:
    return {I: n for n, I in enumerate(wedge_basis(d, k).index_list)}


def merge_sign(I: Sequence[int], J: Sequence[int]) -> int:
    """Sign of the permutation sorting the concatenation I + J (both sorted); 0 if they overlap."""
    if set(I) & set(J):
        return 0
    inversions = sum(1 for i in I for j in J if i > j)
    return -1 if inversions % 2 else 1


def _bareiss_det(A) -> int:
    A = [[int(x) for x in row] for row in A]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for i in range(n - 1):
        if A[i][i] == 0:
            for r in range(i + 1, n):
                if A[r][i] != 0:
                    A[i], A[r] = A[r], A[i]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                A[r][c] = (A[r][c] * A[i][i] - A[r][i] * A[i][c]) // prev
        prev = A[i][i]
    return sign * A[n - 1][n - 1]


def exterior_power(M, k: int) -> np.ndarray:
    """k-th compound matrix: entry (I, J) is the minor on rows I, columns J.

    Integer input is handled in exact integer arithmetic.
    """
    A = _square(M)
    d = A.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range for dimension {d}")
    n = comb(d, k)
    if n > MAX_WEDGE_DIM:
        raise DimensionError(f"exterior power dimension C({d},{k})={n} exceeds guard {MAX_WEDGE_DIM}")
    subsets = np.array(wedge_basis(d, k).index_list, dtype=np.intp)
    if is_integer_array(A):
        out = np.empty((n, n), dtype=object)
        for a, I in enumerate(subsets):
            rows = A[I]
            for b, J in enumerate(subsets):
                out[a, b] = _bareiss_det(rows[:, J])
        if all(abs(x) < 2**62 for x in out.flat):
            return out.astype(np.int64)
        return out
    if k == 1:
        return A.copy()
    out = np.empty((n, n), dtype=np.result_type(A.dtype, np.float64))
    # chunk over rows to bound the k x k stack size
    chunk = max(1, 200_000 // n)
    for start in range(0, n, chunk):
        I = subsets[start:start + chunk]
        sub = A[I[:, None, :, None], subsets[None, :, None, :]]
        out[start:start + chunk] = np.linalg.det(sub)
    return out


def induced_wedge_form(B, k: int) -> np.ndarray:
    """The bilinear form on k-vectors induced by B, i.e. the compound matrix of B.

    Skew B with odd k gives a skew result; even k gives a symmetric one.
    """
    return exterior_power(B, k)


def plucker_point(F, basis: Optional[WedgeBasis] = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Unit-norm k x k minors of a d x k frame, in lexicographic order."""
    F = _as_matrix(F)
    d, k = F.shape
    basis = basis or wedge_basis(d, k)
    if (basis.d, basis.k) != (d, k):
        raise DimensionError(f"basis is for ({basis.d},{basis.k}), frame is {F.shape}")
    if k == 0:
        return np.ones(1, dtype=F.dtype)
    subsets = np.array(basis.index_list, dtype=np.intp)
    minors = np.linalg.det(F[subsets])
    norm = np.linalg.norm(minors)
    scale = np.prod(np.linalg.norm(F, axis=0))
    if norm <= tol * max(scale, np.finfo(float).tiny):
        raise ValueError("frame is rank deficient")
    return minors / norm


@lru_cache(maxsize=64)
def _wedge_tables(d: int, k1: int, k2: int):
    b1 = wedge_basis(d, k1).index_list
    b2 = wedge_basis(d, k2).index_list
    pos = _wedge_positions(d, k1 + k2)
    ii, jj, kk, sg = [], [], [], []
    for a, I in enumerate(b1):
        sI = set(I)
        for b, J in enumerate(b2):
            if sI.isdisjoint(J):
                ii.append(a)
                jj.append(b)
                kk.append(pos[tuple(sorted(I + J))])
                sg.append(merge_sign(I, J))
    return (np.array(ii, dtype=np.intp), np.array(jj, dtype=np.intp),
            np.array(kk, dtype=np.intp), np.array(sg, dtype=np.int8))


def wedge_product(u, v, d: int, k1: int, k2: int) -> np.ndarray:
    """Coordinates of u ^ v in the lex basis of the (k1+k2)-th exterior power."""
    u = np.asarray(u)
    v = np.asarray(v)
    if k1 + k2 > d:
        raise ValueError("degrees exceed ambient dimension")
    if u.shape != (comb(d, k1),) or v.shape != (comb(d, k2),):
        raise DimensionError("coordinate vectors do not match the wedge bases")
    ii, jj, kk, sg = _wedge_tables(d, k1, k2)
    out = np.zeros(comb(d, k1 + k2), dtype=np.result_type(u, v, np.int8))
    np.add.at(out, kk, sg * u[ii] * v[jj])
    return out


def wedge_covector(eta, d: int, k: int) -> np.ndarray:
    """Vector c with ``u ^ eta = c . u`` (top coefficient, bilinear) for u in the k-th power
    and eta in the (d-k)-th power."""
    eta = np.asarray(eta)
    if eta.shape != (comb(d, d - k),):
        raise DimensionError("eta does not match the wedge basis")
    ii, jj, _, sg = _wedge_tables(d, k, d - k)
    c = np.zeros(comb(d, k), dtype=np.result_type(eta, np.int8))
    np.add.at(c, ii, sg * eta[jj])
    return c


def top_form_pairing(u, v, d: int):
    """Coefficient of e_1 ^ ... ^ e_d in u ^ v for u, v in the (d/2)-th exterior power."""
    if d % 2:
        raise ValueError("top_form_pairing needs even d")
    return wedge_product(u, v, d, d // 2, d // 2)[0]


# --------------------------------------------------------------------------
# invariant forms


@dataclass(frozen=True, eq=False)
class InvariantForm:
    matrix: np.ndarray
    residual: float
    kind: str  # "skew", "symmetric" or "mixed"
    nullity: int
    ambiguous: bool


def _classify(J: np.ndarray, tol: float) -> str:
    if np.linalg.norm(J + J.T) <= tol:
        return "skew"
    if np.linalg.norm(J - J.T) <= tol:
        return "symmetric"
    return "mixed"


def invariant_bilinear_form(mats, tol: float = SOLVE_TOL, prefer: str = "skew") -> Optional[InvariantForm]:
    """Find J != 0 with ``M^T J M = J`` for every M in ``mats``.

    Solves the stacked linear constraint on the d^2 entries of J through its
    smallest singular directions. If the solution space has dimension > 1 the
    candidate closest to the ``prefer`` class ("skew" or "symmetric") is
    returned and flagged ambiguous. Returns None when no form fits within tol.
    """
    mats = [_square(M) for M in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    d = mats[0].shape[0]
    if any(M.shape != (d, d) for M in mats):
        raise DimensionError("matrices differ in size")
    if prefer not in ("skew", "symmetric"):
        raise ValueError("prefer must be 'skew' or 'symmetric'")
    eye = np.eye(d * d)
    # row-major vec(M^T J M) = (M^T kron M^T) vec(J)
    L = np.vstack([np.kron(M.T, M.T) - eye for M in mats])
    _, s, Vh = np.linalg.svd(L)
    s_full = np.concatenate([s, np.zeros(d * d - len(s))]) if len(s) < d * d else s
    null = Vh[s_full <= tol].conj()
    if null.shape[0] == 0:
        return None
    nullity = null.shape[0]
    if nullity == 1:
        j = null[0]
    else:
        # the vec of J^T is a fixed permutation of vec(J)
        perm = np.arange(d * d).reshape(d, d).T.ravel()
        sign = -1 if prefer == "skew" else 1
        proj = 0.5 * (null + sign * null[:, perm])
        # unit combination c of the null basis maximizing the preferred part;
        # the solution space is closed under transpose, so that part is a solution too
        _, _, wh = np.linalg.svd(proj.T)
        c = wh[0].conj()
        j = c @ proj
        if np.linalg.norm(j) <= np.sqrt(tol):
            j = c @ null
    J = (j / np.linalg.norm(j)).reshape(d, d)
    J = fix_phases(J.reshape(-1, 1)).reshape(d, d)
    J = np.real_if_close(J, tol=1000)
    residual = float(np.sqrt(sum(np.linalg.norm(M.T @ J @ M - J) ** 2 for M in mats)))
    if residual > tol:
        return None
    return InvariantForm(J, residual, _classify(J, tol), nullity, nullity > 1)


# --------------------------------------------------------------------------
# subspace comparison


def orthonormal_frame(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis for the column span of A (QR based, full rank required)."""
    A = _as_matrix(A)
    if A.shape[1] == 0:
        return A.copy()
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    if diag.min() <= tol * max(diag.max(), np.finfo(float).tiny):
        raise ValueError("columns are linearly dependent")
    return Q


def orthogonal_complement(F) -> np.ndarray:
    F = _as_matrix(F)
    d, k = F.shape
    U, _, _ = np.linalg.svd(F, full_matrices=True)
    return U[:, k:]


def subspace_angle(A, B) -> float:
    """Largest principal angle from span(A) into span(B) for dim A <= dim B.

    Zero iff span(A) is contained in span(B). The sine (norm of the residual
    after projecting onto B) and the cosine (smallest singular value of the
    cross Gram matrix) are combined with arctan2, accurate near 0 and pi/2.
    """
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape[0] != B.shape[0]:
        raise DimensionError("ambient dimensions differ")
    if A.shape[1] > B.shape[1]:
        raise DimensionError("first subspace must not be larger than the second")
    if A.shape[1] == 0:
        return 0.0
    QA = orthonormal_frame(A)
    QB = orthonormal_frame(B) if B.shape[1] else B
    C = QB.conj().T @ QA
    sine = np.linalg.norm(QA - QB @ C, 2)
    cosine = np.linalg.svd(C, compute_uv=False).min() if C.size else 0.0
    return float(np.arctan2(sine, cosine))


def line_alignment(a, b) -> float:
    """|<a, b>| / (|a| |b|), one for equal projective points."""
    a = np.asarray(a)
    b = np.asarray(b)
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
