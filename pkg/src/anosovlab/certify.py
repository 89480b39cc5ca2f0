"""Finite-ball evidence for the k-th singular value gap growing exponentially
in word length.

A certificate never proves the Anosov property; it records how the ratio
sigma_k / sigma_{k+1} behaves on every reduced word up to a radius and
whether an exponential lower bound fits those minima.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .representations import Representation, ScaledMatrix
from .words import DEFAULT_SPHERE_CAP, GuardExceeded

THREADS_ENV = "ANOSOVLAB_THREADS"


@dataclass
class LengthStats:
    """Associative summary of ratios at one word length."""

    count: int = 0
    min_ratio: float = math.inf
    max_ratio: float = -math.inf
    sum_log: float = 0.0

    def add(self, ratio: float) -> None:
        self.count += 1
        self.min_ratio = min(self.min_ratio, ratio)
        self.max_ratio = max(self.max_ratio, ratio)
        self.sum_log += math.log(ratio)

    def merge(self, other: "LengthStats") -> "LengthStats":
        return LengthStats(
            self.count + other.count,
            min(self.min_ratio, other.min_ratio),
            max(self.max_ratio, other.max_ratio),
            self.sum_log + other.sum_log,
        )

    @property
    def geo_mean(self) -> float:
        return math.exp(self.sum_log / self.count) if self.count else math.nan


@dataclass(frozen=True)
class LengthRecord:
    length: int
    count: int
    min_ratio: float
    geo_mean_ratio: float
    max_ratio: float


@dataclass(frozen=True)
class GapProfile:
    k: int
    radius: int
    records: tuple
    kind: str = "free"

    def minima(self) -> np.ndarray:
        return np.array([r.min_ratio for r in self.records])

    def lengths(self) -> np.ndarray:
        return np.array([r.length for r in self.records])

    def csv_rows(self) -> list[list]:
        return [[r.length, r.count, r.min_ratio, r.geo_mean_ratio, r.max_ratio] for r in self.records]


CSV_HEADER = ["length", "count", "min_ratio", "geo_mean_ratio", "max_ratio"]


def _ratio(M: np.ndarray, k: int) -> float:
    s = np.linalg.svd(M, compute_uv=False)
    return math.inf if s[k] == 0 else float(s[k - 1] / s[k])


def _partition_stats(rep: Representation, k: int, R: int, first: int) -> list[LengthStats]:
    P = rep.presentation
    d = rep.dim
    order = P.letters_in_order()
    stats = [LengthStats() for _ in range(R)]
    word: list[int] = []
    # sigma_k / sigma_{k+1}(g) = sigma_{d-k} / sigma_{d-k+1}(g^-1); past the middle of the
    # spectrum the inverse product keeps the ratio on its large, accurately computed values
    flip = 2 * k > d
    kk = d - k if flip else k

    def rec(acc: ScaledMatrix):
        ell = len(word)
        stats[ell - 1].add(_ratio(acc.unit, kk))
        if ell == R:
            return
        for x in order:
            if P._extension_ok(word, x):
                word.append(x)
                step = ScaledMatrix.from_matrix(rep.letter(-x)) @ acc if flip else acc @ rep.letter(x)
                rec(step)
                word.pop()

    word.append(first)
    rec(ScaledMatrix.from_matrix(rep.letter(-first if flip else first)))
    return stats


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def gap_profile(rep: Representation, k: int, R: int, cap: int = DEFAULT_SPHERE_CAP,
                workers: Optional[int] = None) -> GapProfile:
    """Min, geometric mean and max of sigma_k / sigma_{k+1} on every sphere of radius 1..R.

    Spheres are split by first letter; the per-length summaries merge
    associatively, so the result does not depend on ``workers``.

    Ratios come from the SVD of the rounded product, so sigma_k / sigma_{k+1}
    has relative error of order eps * sigma_1 / sigma_{k+1}. For k = 1 that is
    eps times the ratio itself; for lower gaps of long words it can dominate,
    and certifying the k-th gap of the k-th exterior power at k = 1 is the
    accurate route.
    """
    d = rep.dim
    if not 1 <= k < d:
        raise ValueError(f"k={k} out of range for dimension {d}")
    if R < 1:
        raise ValueError("radius must be at least 1")
    P = rep.presentation
    for r in range(1, R + 1):
        n = P.sphere_count(r)
        if n is not None and n > cap:
            raise GuardExceeded(f"sphere of radius {r} has {n} words, cap is {cap}")
    if P.kind != "free":
        # surface spheres are only known by enumeration
        total = 0
        for r in range(1, R + 1):
            for _ in P.enumerate_sphere(r, cap=cap):
                total += 1
    firsts = P.letters_in_order()
    workers = workers or default_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda x: _partition_stats(rep, k, R, x), firsts))
    else:
        parts = [_partition_stats(rep, k, R, x) for x in firsts]
    merged = parts[0]
    for part in parts[1:]:
        merged = [a.merge(b) for a, b in zip(merged, part)]
    records = tuple(
        LengthRecord(ell + 1, s.count, s.min_ratio, s.geo_mean, s.max_ratio) for ell, s in enumerate(merged)
    )
    return GapProfile(k, R, records, P.kind)


class GrowthFit(NamedTuple):
    mu_hat: float
    log_c_hat: float
    fit_quality: float


def fit_gap_growth(profile: GapProfile, burn_in: int = 2) -> GrowthFit:
    """Least squares of log(min ratio) against length over lengths >= burn_in."""
    lengths = profile.lengths()
    mask = lengths >= burn_in
    if mask.sum() < 3:
        raise ValueError(f"need at least 3 lengths past burn-in {burn_in}, have {int(mask.sum())}")
    x = lengths[mask].astype(float)
    y = np.log(profile.minima()[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-24 * max(1.0, float(y @ y)):
        quality = 1.0 if ss_res <= 1e-24 * max(1.0, float(y @ y)) else 0.0
    else:
        quality = 1.0 - ss_res / ss_tot
    return GrowthFit(float(slope), float(intercept), float(quality))


@dataclass(frozen=True)
class Thresholds:
    """Engineering policy for finite-ball evidence; none of these come from theory."""

    mu_min: float = 0.05
    min_radius: int = 4
    burn_in: int = 2


@dataclass(frozen=True)
class GapCertificate:
    k: int
    radius: int
    mu_hat: Optional[float]
    log_c_hat: Optional[float]
    fit_quality: Optional[float]
    min_observed_ratio: float
    monotone: bool
    verdict: str  # "pass", "fail" or "inconclusive"
    thresholds: Thresholds
    profile: GapProfile
    notes: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "radius": self.radius,
            "verdict": self.verdict,
            "mu_hat": self.mu_hat,
            "log_c_hat": self.log_c_hat,
            "fit_quality": self.fit_quality,
            "min_observed_ratio": self.min_observed_ratio,
            "monotone_minima": self.monotone,
            "thresholds": asdict(self.thresholds),
            "notes": list(self.notes),
        }


def _monotone(profile: GapProfile, burn_in: int, strict: bool = False) -> bool:
    mins = profile.minima()[profile.lengths() >= burn_in]
    diffs = np.diff(mins)
    slack = 1e-12 * np.abs(mins[1:])
    return bool(np.all(diffs > slack)) if strict else bool(np.all(diffs >= -slack))


def strictly_increasing_minima(profile: GapProfile) -> bool:
    return _monotone(profile, 1, strict=True)


def certify(rep: Representation, k: int, R: int, thresholds: Optional[Thresholds] = None,
            cap: int = DEFAULT_SPHERE_CAP, workers: Optional[int] = None) -> GapCertificate:
    """Combine the profile, the growth fit and the monotonicity rule into a verdict.

    pass: fitted rate >= mu_min, minima non-decreasing past burn-in, every ratio > 1.
    inconclusive: radius below policy minimum, too few lengths to fit, or a
    positive rate whose minima are not monotone.
    fail: fitted rate below mu_min.
    """
    th = thresholds or Thresholds()
    d = rep.dim
    if not 1 <= k <= d // 2:
        raise ValueError(f"k={k} out of range 1..{d // 2}")
    profile = gap_profile(rep, k, R, cap=cap, workers=workers)
    notes = ["finite-ball evidence over words of length <= radius; not a proof"]
    if profile.kind == "surface":
        notes.append("lengths are Dehn-reduced representative lengths; "
                     "group elements may repeat across representatives")
    min_ratio = float(profile.minima().min())
    monotone = _monotone(profile, th.burn_in)
    try:
        fit = fit_gap_growth(profile, th.burn_in)
    except ValueError:
        fit = None
    if R < th.min_radius or fit is None:
        verdict = "inconclusive"
        notes.append(f"radius {R} below policy minimum {th.min_radius}" if R < th.min_radius
                     else "too few lengths past burn-in to fit a rate")
    elif fit.mu_hat < th.mu_min:
        verdict = "fail"
    elif monotone and min_ratio > 1:
        verdict = "pass"
    else:
        verdict = "inconclusive"
        notes.append("positive rate but minima not monotone or a ratio equals 1")
    return GapCertificate(
        k=k,
        radius=R,
        mu_hat=None if fit is None else fit.mu_hat,
        log_c_hat=None if fit is None else fit.log_c_hat,
        fit_quality=None if fit is None else fit.fit_quality,
        min_observed_ratio=min_ratio,
        monotone=monotone,
        verdict=verdict,
        thresholds=th,
        profile=profile,
        notes=tuple(notes),
    )
