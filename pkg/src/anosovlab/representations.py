"""Matrix representations of free and surface groups.

Constructions: Schottky (ping-pong) subgroups of SL_2(R), rotation-only
unitary examples, symmetric powers of SL_2, exterior powers, complexification.
Words are evaluated as scaled products so long words never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, log, sqrt
from typing import Optional, Sequence

import numpy as np

from .exterior import (
    MAX_WEDGE_DIM,
    SOLVE_TOL,
    SymplecticStructure,
    darboux_frame,
    exterior_power,
    invariant_bilinear_form,
    preserves_form,
    standard_symplectic,
)
from .words import GroupPresentation, Word, free_group

EPS = np.finfo(float).eps
DET_TOL = 1e-9
INVERSE_TOL = 1e-10
FORM_TOL = 1e-9


class ValidationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ScaledMatrix:
    """The matrix ``exp(log_scale) * unit`` with ``unit`` of Frobenius norm one."""

    unit: np.ndarray
    log_scale: float

    @classmethod
    def from_matrix(cls, M) -> "ScaledMatrix":
        M = np.asarray(M)
        n = np.linalg.norm(M)
        if n == 0 or not np.isfinite(n):
            raise ValueError("cannot scale a zero or non-finite matrix")
        return cls(M / n, log(n))

    @classmethod
    def identity(cls, d: int, dtype=float) -> "ScaledMatrix":
        return cls(np.eye(d, dtype=dtype) / sqrt(d), 0.5 * log(d))

    @property
    def represented(self) -> np.ndarray:
        return np.exp(self.log_scale) * self.unit

    def __matmul__(self, other):
        if isinstance(other, ScaledMatrix):
            P = self.unit @ other.unit
            extra = other.log_scale
        else:
            P = self.unit @ np.asarray(other)
            extra = 0.0
        n = np.linalg.norm(P)
        return ScaledMatrix(P / n, self.log_scale + extra + log(n))


@dataclass(frozen=True, eq=False)
class Representation:
    presentation: GroupPresentation
    field: str
    images: tuple
    inverses: tuple
    structure: Optional[SymplecticStructure] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown field tag {self.field!r}")
        if len(self.images) != self.presentation.rank or len(self.inverses) != self.presentation.rank:
            raise ValidationError("need one image and one inverse per generator")
        dtype = complex if self.field == "complex" else float
        imgs, invs = [], []
        for A, B in zip(self.images, self.inverses):
            A = np.array(A, dtype=dtype)
            B = np.array(B, dtype=dtype)
            A.setflags(write=False)
            B.setflags(write=False)
            imgs.append(A)
            invs.append(B)
        object.__setattr__(self, "images", tuple(imgs))
        object.__setattr__(self, "inverses", tuple(invs))
        d = imgs[0].shape[0]
        if any(A.shape != (d, d) or B.shape != (d, d) for A, B in zip(imgs, invs)):
            raise ValidationError("generator images must be square of one size")
        if self.structure is not None and self.structure.dim != d:
            raise ValidationError("declared form has the wrong dimension")

    @property
    def dim(self) -> int:
        return self.images[0].shape[0]

    def letter(self, x: int) -> np.ndarray:
        if x == 0 or abs(x) > len(self.images):
            raise IndexError(f"generator index {x} out of range")
        return self.images[x - 1] if x > 0 else self.inverses[-x - 1]

    def validation_report(self) -> dict:
        """Residuals of the determinant, inverse and form checks per generator.

        Tolerances grow with the condition number: a backward stable product
        of matrices with norm N carries errors of order eps * N^2.
        """
        d = self.dim
        out = []
        for i, (A, B) in enumerate(zip(self.images, self.inverses)):
            s = np.linalg.svd(A, compute_uv=False)
            cond = s[0] / s[-1] if s[-1] > 0 else np.inf
            slack = 10 * d * EPS * cond
            _, logdet = np.linalg.slogdet(A)
            det_err = abs(np.expm1(logdet))
            inv_err = float(np.linalg.norm(A @ B - np.eye(d)) / sqrt(d))
            rec = {
                "generator": self.presentation.names[i],
                "det_residual": float(det_err),
                "det_ok": bool(det_err <= DET_TOL + slack),
                "inverse_residual": inv_err,
                "inverse_ok": bool(inv_err <= INVERSE_TOL + slack),
            }
            if self.structure is not None:
                res, _ = preserves_form(A, self.structure.form)
                rec["form_residual"] = res
                rec["form_ok"] = bool(res <= FORM_TOL + 10 * d * EPS * s[0] ** 2)
            out.append(rec)
        return {"generators": out, "ok": all(all(v for k, v in r.items() if k.endswith("_ok")) for r in out)}

    def validate(self) -> "Representation":
        report = self.validation_report()
        if not report["ok"]:
            bad = [r for r in report["generators"] if not all(v for k, v in r.items() if k.endswith("_ok"))]
            raise ValidationError(f"representation fails validation: {bad}")
        return self


def make_representation(P: GroupPresentation, images: Sequence, structure=None, provenance=None,
                        field: Optional[str] = None, inverses: Optional[Sequence] = None,
                        validate: bool = True) -> Representation:
    images = [np.asarray(A) for A in images]
    if field is None:
        field = "complex" if any(np.iscomplexobj(A) for A in images) else "real"
    if inverses is None:
        inverses = [np.linalg.inv(A) for A in images]
    if structure is not None and not isinstance(structure, SymplecticStructure):
        structure = SymplecticStructure(np.asarray(structure))
    rep = Representation(P, field, tuple(images), tuple(inverses), structure, dict(provenance or {}))
    return rep.validate() if validate else rep


def evaluate(rep: Representation, w) -> ScaledMatrix:
    """Left-to-right product of generator images, renormalized after every step."""
    letters = w.letters if isinstance(w, Word) else tuple(w)
    dtype = complex if rep.field == "complex" else float
    acc = ScaledMatrix.identity(rep.dim, dtype)
    for x in letters:
        acc = acc @ rep.letter(x)
    return acc


# --------------------------------------------------------------------------
# constructions


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def schottky_angles(n: int, seed=None) -> np.ndarray:
    """Axis angles (i - 1) pi / (2n) for generators i = 1..n; a seed adds jitter of at most 0.05 rad."""
    angles = np.arange(n) * np.pi / (2 * n)
    if seed is not None:
        angles = angles + np.random.default_rng(seed).uniform(-0.05, 0.05, size=n)
    return angles


def schottky_rep(n: int, lam: float, seed=None) -> Representation:
    """Free group of rank n in SL_2(R): generator i is R_i diag(lam, 1/lam) R_i^-1.

    The 2n fixed points in RP^1 are evenly spaced, so ping-pong holds once
    lam^2 >= cot^2(pi / 4n) (lam >= 1 + sqrt 2 for n = 2).
    """
    if n < 2:
        raise ValueError("rank must be at least 2")
    if lam < 2:
        raise ValueError("lambda must be at least 2")
    D = np.diag([lam, 1.0 / lam])
    Dinv = np.diag([1.0 / lam, lam])
    images, inverses = [], []
    for theta in schottky_angles(n, seed):
        R = rotation(theta)
        images.append(R @ D @ R.T)
        inverses.append(R @ Dinv @ R.T)
    prov = {"construction": "schottky", "parameters": {"rank": n, "lambda": lam}, "seed": seed}
    return make_representation(free_group(n), images, provenance=prov, inverses=inverses)


def rotation_rep(n: int, angles: Optional[Sequence[float]] = None) -> Representation:
    """Free group of rank n acting by rotations: every image is orthogonal, so no gaps."""
    if n < 2:
        raise ValueError("rank must be at least 2")
    if angles is None:
        angles = [0.7 * (i + 1) for i in range(n)]
    images = [rotation(t) for t in angles]
    inverses = [rotation(-t) for t in angles]
    prov = {"construction": "rotation", "parameters": {"rank": n, "angles": list(map(float, angles))}, "seed": None}
    return make_representation(free_group(n), images, provenance=prov, inverses=inverses)


def sym_power_sl2(A, d: int) -> np.ndarray:
    """Action of a 2x2 matrix on degree-(d-1) binary forms.

    Basis x^{d-1-j} y^j weighted by sqrt(C(d-1, j)), which turns rotations into
    orthogonal matrices.
    """
    A = np.asarray(A)
    if A.shape != (2, 2):
        raise ValueError("sym_power_sl2 needs a 2x2 matrix")
    if d < 2:
        raise ValueError("target dimension must be at least 2")
    n = d - 1
    a, b, c, e = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    dtype = np.result_type(A.dtype, float)
    M = np.zeros((d, d), dtype=dtype)
    col_a = np.array([a, c], dtype=dtype)  # image of x, coefficients in (x, y)
    col_b = np.array([b, e], dtype=dtype)  # image of y
    for j in range(d):
        poly = np.ones(1, dtype=dtype)
        for _ in range(n - j):
            poly = np.convolve(poly, col_a)
        for _ in range(j):
            poly = np.convolve(poly, col_b)
        M[:, j] = poly
    w = np.sqrt([comb(n, j) for j in range(d)])
    return (M * w[None, :]) / w[:, None]


def sym_power_rep(rep: Representation, d: int) -> Representation:
    if rep.dim != 2:
        raise ValueError("symmetric powers are built from 2-dimensional representations")
    images = [sym_power_sl2(A, d) for A in rep.images]
    inverses = [sym_power_sl2(B, d) for B in rep.inverses]
    prov = {"construction": "sym-power", "parameters": {"dim": d, "base": rep.provenance}, "seed": rep.provenance.get("seed")}
    return make_representation(rep.presentation, images, provenance=prov, inverses=inverses, field=rep.field)


def conjugate_rep(rep: Representation, Q, structure=None) -> Representation:
    """Q^-1 rho Q; pass the transformed form explicitly if one should be declared."""
    Q = np.asarray(Q)
    Qinv = np.linalg.inv(Q)
    images = [Qinv @ A @ Q for A in rep.images]
    inverses = [Qinv @ B @ Q for B in rep.inverses]
    field = "complex" if rep.field == "complex" or np.iscomplexobj(Q) else "real"
    return make_representation(rep.presentation, images, structure=structure, provenance=rep.provenance,
                               inverses=inverses, field=field)


def _snap_to_pattern(J: np.ndarray, mats, tol: float = 1e-8) -> np.ndarray:
    """Replace J by the nearby matrix with entries in {-1, 0, 1} (scaled) if it is still invariant."""
    scale = np.max(np.abs(J))
    snapped = np.round(J / scale)
    if np.max(np.abs(J / scale - snapped)) > tol:
        return J
    snapped = snapped / np.linalg.norm(snapped)
    residual = np.sqrt(sum(np.linalg.norm(M.T @ snapped @ M - snapped) ** 2 for M in mats))
    return snapped if residual <= tol else J


def sym_pipeline(n: int, lam: float, d: int, seed=None, standardize: bool = True) -> Representation:
    """Sym^{d-1} of a rank-n Schottky group, with its invariant form recovered.

    For even d the recovered form is skew; with ``standardize`` the
    representation is conjugated by an orthogonal matrix so that it preserves
    the standard form [[0, I], [-I, 0]] exactly as declared structure.
    """
    base = schottky_rep(n, lam, seed)
    rep = sym_power_rep(base, d)
    # constraint residuals carry rounding of order eps * |M|^2
    norm2 = max(np.linalg.norm(A, 2) ** 2 for A in rep.images)
    tol = SOLVE_TOL * max(1.0, norm2 / 1e6)
    found = invariant_bilinear_form(rep.images, tol=tol)
    prov = {"construction": "pipeline", "parameters": {"rank": n, "lambda": lam, "dim": d}, "seed": seed}
    if found is None:
        return make_representation(rep.presentation, rep.images, provenance=prov, inverses=rep.inverses)
    prov["invariant_form"] = {"kind": found.kind, "residual": found.residual, "nullity": found.nullity}
    if found.kind != "skew":
        return make_representation(rep.presentation, rep.images, provenance=prov, inverses=rep.inverses)
    J = _snap_to_pattern(np.real(found.matrix), rep.images, tol)
    if standardize:
        Q = darboux_frame(J)
        images = [Q.T @ A @ Q for A in rep.images]
        inverses = [Q.T @ B @ Q for B in rep.inverses]
        return make_representation(rep.presentation, images, structure=standard_symplectic(d // 2),
                                   provenance=prov, inverses=inverses)
    return make_representation(rep.presentation, rep.images, structure=SymplecticStructure(J),
                               provenance=prov, inverses=rep.inverses)


def exterior_power_rep(rep: Representation, k: int) -> Representation:
    """The k-th exterior power; odd k carries a declared symplectic form along."""
    d = rep.dim
    if not 1 <= k <= d // 2:
        raise ValueError(f"k={k} out of range 1..{d // 2}")
    if comb(d, k) > MAX_WEDGE_DIM:
        raise ValueError(f"C({d},{k}) exceeds guard {MAX_WEDGE_DIM}")
    if k == 1:
        return rep
    images = [exterior_power(A, k) for A in rep.images]
    inverses = [exterior_power(B, k) for B in rep.inverses]
    structure = None
    if rep.structure is not None and k % 2 == 1:
        W = exterior_power(rep.structure.form, k)
        if not np.array_equal(W, -W.T) and np.linalg.norm(W + W.T) > 1e-12 * np.linalg.norm(W):
            raise ValidationError("induced form is not skew")
        structure = SymplecticStructure(W)
    prov = {"construction": "exterior", "parameters": {"k": k, "base": rep.provenance}, "seed": rep.provenance.get("seed")}
    return make_representation(rep.presentation, images, structure=structure, provenance=prov,
                               inverses=inverses, field=rep.field)


def complexify(rep: Representation) -> Representation:
    if rep.field == "complex":
        raise ValueError("representation is already complex")
    prov = {"construction": "complexify", "parameters": {"base": rep.provenance}, "seed": rep.provenance.get("seed")}
    return make_representation(rep.presentation, [A.astype(complex) for A in rep.images],
                               structure=rep.structure, provenance=prov,
                               inverses=[B.astype(complex) for B in rep.inverses], field="complex")


def contragredient(rep: Representation) -> Representation:
    """gamma -> rho(gamma)^{-*}; its singular values are the reciprocals of rho's, reversed."""
    images = [B.conj().T for B in rep.inverses]
    inverses = [A.conj().T for A in rep.images]
    prov = {"construction": "contragredient", "parameters": {"base": rep.provenance}, "seed": rep.provenance.get("seed")}
    return make_representation(rep.presentation, images, provenance=prov, inverses=inverses, field=rep.field)
