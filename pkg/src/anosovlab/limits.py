"""Boundary maps of Anosov representations, approximated along periodic rays,
and the checks built on them: transversality, symplectic pairings, lifts to
the unit sphere, Pluecker compatibility and hyperconvexity.

The limit subspace of dimension k at the ray ``prefix * period^inf`` is
approximated by the span of the top k left singular vectors of
rho(prefix * period^n), for growing n. Products of long words lose their
lower singular directions to rounding, so the frame is computed by orthogonal
iteration applied factor by factor with a QR step after every factor instead
of from the SVD of the formed product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Optional, Sequence

import numpy as np

from .exterior import (
    SymplecticStructure,
    fix_phases,
    gap_ratio,
    omega_eval,
    orthogonal_complement,
    plucker_point,
    subspace_angle,
    wedge_covector,
    wedge_product,
)
from .representations import Representation, evaluate, exterior_power_rep
from .words import BoundaryRay, boundary_ray_word

DEFAULT_MAX_DEPTH = 30
DEFAULT_FLAG_TOL = 1e-10


class FlagConvergenceError(RuntimeError):
    """Successive approximants never came within tolerance; ``diagnostics`` has the gaps."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class NonTransverseError(ValueError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


def _orth(Y: np.ndarray) -> np.ndarray:
    Q, _ = np.linalg.qr(Y)
    return Q


def dominant_frame(rep: Representation, letters: Sequence[int], k: int,
                   sweeps: int = 6, tol: float = 1e-15) -> np.ndarray:
    """Orthonormal d x k frame of the top-k left singular space of rho(letters)."""
    d = rep.dim
    if k == 0:
        return np.zeros((d, 0), dtype=complex if rep.field == "complex" else float)
    if k == d:
        return np.eye(d, dtype=complex if rep.field == "complex" else float)
    mats = [rep.letter(x) for x in letters]
    U, _, _ = np.linalg.svd(evaluate(rep, letters).unit)
    X = U[:, :k]
    for _ in range(sweeps):
        Y = X
        # g^* = A_n^* ... A_1^*, then g = A_1 ... A_n
        for A in mats:
            Y = _orth(A.conj().T @ Y)
        for A in reversed(mats):
            Y = _orth(A @ Y)
        change = subspace_angle(Y, X)
        X = Y
        if change <= tol:
            break
    return fix_phases(X)


@dataclass(frozen=True, eq=False)
class FlagSample:
    ray: BoundaryRay
    k: int
    frame: np.ndarray
    depth: int
    convergence_gap: float
    dual_frame: Optional[np.ndarray] = None
    dual_gap: Optional[float] = None
    history: tuple = ()

    @property
    def line(self) -> np.ndarray:
        if self.k != 1:
            raise ValueError("line is defined for k = 1 only")
        return self.frame[:, 0]

    def compatibility_angle(self) -> float:
        """Angle of the k-space out of the (d-k)-space at the same point; zero when nested."""
        if self.dual_frame is None:
            raise ValueError("dual frame was not computed")
        if self.dual_frame.shape[1] < self.k:
            return subspace_angle(self.dual_frame, self.frame)
        return subspace_angle(self.frame, self.dual_frame)


def flag_approx(rep: Representation, ray: BoundaryRay, k: int,
                max_depth: int = DEFAULT_MAX_DEPTH, tol: float = DEFAULT_FLAG_TOL,
                with_dual: bool = True) -> FlagSample:
    """Approximate the k- and (d-k)-dimensional limit spaces at ``ray``.

    Uses the smallest depth n <= max_depth at which both frames moved by less
    than ``tol`` (largest principal angle) since depth n - 1.
    """
    d = rep.dim
    P = rep.presentation
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range for dimension {d}")
    if k == d:
        full = np.eye(d, dtype=complex if rep.field == "complex" else float)
        return FlagSample(ray, k, full, 1, 0.0, full[:, :0] if with_dual else None, 0.0 if with_dual else None)
    if gap_ratio(evaluate(rep, ray.period).unit, k) <= 1 + 1e-9:
        raise ValueError(f"period {ray.label(P)} shows no gap between singular values {k} and {k + 1}")
    history = []
    prev = prev_dual = None
    for n in range(1, max_depth + 1):
        letters = boundary_ray_word(P, ray, n).letters
        F = dominant_frame(rep, letters, k)
        D = dominant_frame(rep, letters, d - k) if with_dual else None
        if prev is not None:
            gap = subspace_angle(F, prev)
            dual_gap = subspace_angle(D, prev_dual) if with_dual else 0.0
            history.append((n, gap, dual_gap))
            if max(gap, dual_gap) < tol:
                return FlagSample(ray, k, F, n, gap, D, dual_gap if with_dual else None, tuple(history))
        prev, prev_dual = F, D
    raise FlagConvergenceError(
        f"no convergence for {ray.label(P)} within depth {max_depth}",
        {"ray": ray.label(P), "k": k, "tol": tol, "history": history},
    )


def transversality_gap(F1, F2) -> float:
    """Smallest singular value of [F1 | F2]; positive iff the spans are complementary."""
    F1 = np.asarray(F1)
    F2 = np.asarray(F2)
    if F1.shape[0] != F2.shape[0] or F1.shape[1] + F2.shape[1] != F1.shape[0]:
        raise ValueError(f"frames {F1.shape} and {F2.shape} do not split the ambient space")
    return float(np.linalg.svd(np.hstack([F1, F2]), compute_uv=False)[-1])


def independence_gap(*frames) -> float:
    """Smallest singular value of the concatenated frames (any total width <= d)."""
    M = np.hstack(frames)
    if M.shape[1] > M.shape[0]:
        raise ValueError("more columns than the ambient dimension")
    if M.shape[1] == 0:
        return 1.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


# --------------------------------------------------------------------------
# symplectic pairing


def normalized_pairing(u, v, S) -> float:
    """|omega(u, v)| / (|B|_2 |u| |v|): in [0, 1], blind to scalars on u and v."""
    B = S.form if isinstance(S, SymplecticStructure) else np.asarray(S)
    scale = np.linalg.norm(B.astype(complex), 2) * np.linalg.norm(u) * np.linalg.norm(v)
    return float(abs(omega_eval(u, v, S)) / scale)


@dataclass(frozen=True)
class PairRecord:
    i: int
    j: int
    value: float
    dist: Optional[float]


@dataclass(frozen=True, eq=False)
class PairingReport:
    labels: tuple
    depths: tuple  # per ray, None when the flag did not converge
    records: tuple
    minimum: Optional[float]
    argmin: Optional[tuple]
    failed_rays: tuple = ()
    skipped_pairs: int = 0

    @property
    def total_pairs(self) -> int:
        n = len(self.labels)
        return n * (n - 1) // 2

    def table(self) -> np.ndarray:
        n = len(self.labels)
        T = np.full((n, n), np.nan)
        for r in self.records:
            T[r.i, r.j] = T[r.j, r.i] = r.value
        return T


def _check_distinct(P, rays: Sequence[BoundaryRay]) -> None:
    keys = [(r.normalized().prefix, r.normalized().period) for r in rays]
    if len(set(keys)) != len(keys):
        raise ValueError("rays must be pairwise distinct")


def pairing_scan(rep: Representation, rays: Sequence[BoundaryRay],
                 max_depth: int = DEFAULT_MAX_DEPTH, tol: float = DEFAULT_FLAG_TOL) -> PairingReport:
    """Normalized |omega| between the limit lines of every unordered pair of rays.

    Alongside each value, ``dist`` is the distance |<u_x, n_y>| from the line
    at x to the limit hyperplane at y (n_y its unit normal), computed from the
    independently approximated hyperplane; for the standard form the two agree.
    """
    if rep.structure is None:
        raise ValueError("pairing scan needs a declared symplectic form")
    _check_distinct(rep.presentation, rays)
    labels = tuple(r.label(rep.presentation) for r in rays)
    samples: list[Optional[FlagSample]] = []
    failed = []
    for idx, ray in enumerate(rays):
        try:
            samples.append(flag_approx(rep, ray, 1, max_depth, tol, with_dual=True))
        except FlagConvergenceError as exc:
            samples.append(None)
            failed.append((idx, exc.diagnostics))
    standard = rep.structure.is_standard()
    records = []
    skipped = 0
    for i, j in combinations(range(len(rays)), 2):
        a, b = samples[i], samples[j]
        if a is None or b is None:
            skipped += 1
            continue
        value = normalized_pairing(a.line, b.line, rep.structure)
        dist = None
        if standard:
            normal = orthogonal_complement(b.dual_frame)[:, 0]
            dist = float(abs(np.vdot(normal, a.line)))
        records.append(PairRecord(i, j, value, dist))
    if records:
        best = min(records, key=lambda r: r.value)
        minimum, argmin = best.value, (best.i, best.j)
    else:
        minimum, argmin = None, None
    return PairingReport(labels, tuple(s.depth if s else None for s in samples), tuple(records),
                         minimum, argmin, tuple(failed), skipped)


def pairing_distance_identity(u, v, S: SymplecticStructure, tol: float = 1e-10) -> tuple[float, float]:
    """Both sides of |omega(u, v)| = dist([u], v^omega) for unit u, v and the standard form.

    The omega-orthogonal complement of v has unit normal conj(Omega v), since
    Omega is orthogonal; dist is the modulus of the Hermitian inner product
    of u with that normal.
    """
    if not S.is_standard():
        raise ValueError("identity is stated for the standard form")
    u = np.asarray(u)
    v = np.asarray(v)
    if abs(np.linalg.norm(u) - 1) > tol or abs(np.linalg.norm(v) - 1) > tol:
        raise ValueError("u and v must be unit vectors")
    pairing = float(abs(omega_eval(u, v, S)))
    normal = np.conj(S.form @ v)
    dist = float(abs(np.vdot(normal, u)))
    return pairing, dist


# --------------------------------------------------------------------------
# lifts


def lift_section(points, W=None, g=None, tol: float = 1e-10) -> list[np.ndarray]:
    """Lift projective points (given by any representatives) to unit vectors.

    With ``g`` such that W = g <e_2, ..., e_d>, write each point as
    [a g e_1 + g v] with v in <e_2, ..., e_d> and return
    (g e_1 + a^-1 g v) / |g e_1 + a^-1 g v|. If only an orthonormal frame W
    of the hyperplane is given, g = [n | W] with n the unit normal.
    """
    if g is None and W is None:
        raise ValueError("need the hyperplane W or the matrix g")
    if g is None:
        W = np.asarray(W)
        n = orthogonal_complement(W)
        if n.shape[1] != 1:
            raise ValueError("W must be a hyperplane")
        g = np.hstack([n, W])
    g = np.asarray(g)
    d = g.shape[0]
    Wg = g[:, 1:]
    if W is not None and subspace_angle(np.asarray(W), Wg) > 1e-8:
        raise ValueError("W is not g <e_2, ..., e_d>")
    Wq = np.linalg.qr(Wg)[0]
    out = []
    for idx, p in enumerate(points):
        p = np.asarray(p)
        if p.shape != (d,):
            raise ValueError(f"point {idx} has shape {p.shape}, expected ({d},)")
        unit = p / np.linalg.norm(p)
        if transversality_gap(unit[:, None], Wq) <= tol:
            raise NonTransverseError(f"point {idx} lies in the hyperplane", idx)
        coords = np.linalg.solve(g, p)
        a, v = coords[0], coords[1:]
        x = g[:, 0] + (Wg @ v) / a
        out.append(x / np.linalg.norm(x))
    return out


# --------------------------------------------------------------------------
# Pluecker compatibility


def plucker_compatibility(rep: Representation, ray: BoundaryRay, k: int,
                          max_depth: int = DEFAULT_MAX_DEPTH, tol: float = DEFAULT_FLAG_TOL,
                          wedge_rep: Optional[Representation] = None) -> float:
    """Angle between the Pluecker image of the k-space at ``ray`` and the limit
    line of the k-th exterior power at the same ray."""
    sample = flag_approx(rep, ray, k, max_depth, tol, with_dual=False)
    point = plucker_point(sample.frame)
    E = wedge_rep if wedge_rep is not None else exterior_power_rep(rep, k)
    line = flag_approx(E, ray, 1, max_depth, tol, with_dual=False).frame
    return subspace_angle(point[:, None], line)


# --------------------------------------------------------------------------
# hyperconvexity


def hyperplane_lift(F_p, F_hyper, F_rest) -> tuple:
    """Return (f, V0): f the lifted unit p-vector of span(F_p) relative to the
    hyperplane of p-vectors wedging to zero with span(F_hyper) (dimension d-p),
    and V0 the unit (d-2p)-vector of span(F_rest)."""
    d, p = F_p.shape
    eta = plucker_point(F_hyper)
    c = wedge_covector(eta, d, p)
    normal = np.conj(c) / np.linalg.norm(c)
    W = orthogonal_complement(normal[:, None])
    g = np.hstack([normal[:, None], W])
    f = lift_section([plucker_point(F_p)], g=g)[0]
    return f, plucker_point(F_rest)


def signed_triple(F_x, F_y, F_hyper, F_rest) -> tuple:
    """H(x, y) = f(x) ^ f(y) ^ V0 and H(y, x), for p-frames at x, y and the
    (d-p)- and (d-2p)-frames at the base point."""
    d, p = F_x.shape
    fx, V0 = hyperplane_lift(F_x, F_hyper, F_rest)
    fy, _ = hyperplane_lift(F_y, F_hyper, F_rest)
    r = d - 2 * p

    def H(a, b):
        ab = wedge_product(a, b, d, p, p)
        return wedge_product(ab, V0, d, 2 * p, r)[0]

    return H(fx, fy), H(fy, fx)


@dataclass(frozen=True)
class TripleRecord:
    x: int
    y: int
    w: int
    gap: float
    H_xy: Optional[complex] = None
    H_yx: Optional[complex] = None

    @property
    def antisymmetry_residual(self) -> Optional[float]:
        if self.H_xy is None:
            return None
        scale = max(abs(self.H_xy), abs(self.H_yx), np.finfo(float).tiny)
        return float(abs(self.H_xy + self.H_yx) / scale)


@dataclass(frozen=True, eq=False)
class HyperconvexReport:
    p: int
    q: int
    r: int
    labels: tuple
    records: tuple
    min_gap: Optional[float]
    argmin: Optional[tuple]
    max_antisymmetry_residual: Optional[float]
    failed_rays: tuple = ()
    skipped_triples: int = 0


def hyperconvexity_scan(rep: Representation, p: int, q: int, r: int, rays: Sequence[BoundaryRay],
                        max_depth: int = DEFAULT_MAX_DEPTH, tol: float = DEFAULT_FLAG_TOL,
                        max_triples: Optional[int] = None) -> HyperconvexReport:
    """Direct-sum gap of xi^p(x) + xi^q(y) + xi^{d-r}(w) over ordered distinct triples.

    For p = q odd and r = 2p the signed wedge H(x, y) with base point w is
    evaluated in both orders as well.
    """
    d = rep.dim
    if not (1 <= p and 1 <= q and p + q <= r <= d):
        raise ValueError("need 1 <= p, q and p + q <= r <= d")
    if len(rays) < 3:
        raise ValueError("need at least 3 rays")
    _check_distinct(rep.presentation, rays)
    signed = p == q and r == 2 * p and p % 2 == 1
    dims = {p, q, d - r}
    if signed:
        dims.add(d - p)
    frames: dict = {}
    failed = []
    for idx, ray in enumerate(rays):
        for kk in sorted(dims):
            if kk == 0:
                frames[idx, kk] = np.zeros((d, 0))
                continue
            try:
                frames[idx, kk] = flag_approx(rep, ray, kk, max_depth, tol, with_dual=False).frame
            except FlagConvergenceError as exc:
                failed.append((idx, kk, exc.diagnostics))
    bad = {f[0] for f in failed}
    records = []
    skipped = 0
    for x, y, w in permutations(range(len(rays)), 3):
        if max_triples is not None and len(records) + skipped >= max_triples:
            break
        if bad & {x, y, w}:
            skipped += 1
            continue
        gap = independence_gap(frames[x, p], frames[y, q], frames[w, d - r])
        if signed:
            hxy, hyx = signed_triple(frames[x, p], frames[y, p], frames[w, d - p], frames[w, d - r])
            records.append(TripleRecord(x, y, w, gap, hxy, hyx))
        else:
            records.append(TripleRecord(x, y, w, gap))
    labels = tuple(ray.label(rep.presentation) for ray in rays)
    if records:
        best = min(records, key=lambda t: t.gap)
        min_gap, argmin = best.gap, (best.x, best.y, best.w)
    else:
        min_gap, argmin = None, None
    max_res = max((t.antisymmetry_residual for t in records), default=None) if signed else None
    return HyperconvexReport(p, q, r, labels, tuple(records), min_gap, argmin, max_res, tuple(failed), skipped)
