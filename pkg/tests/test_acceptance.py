"""Acceptance criteria, one test each, at the stated tolerances and time budgets.

Each test also prints a PASS/FAIL line; the run summary collects them.
"""

import time
from math import comb

import numpy as np
import pytest
from scipy.linalg import null_space

from anosovlab.certify import certify, strictly_increasing_minima
from anosovlab.exterior import (exterior_power, induced_wedge_form, singular_values, standard_symplectic,
                                top_form_pairing)
from anosovlab.limits import (NonTransverseError, hyperconvexity_scan, lift_section, pairing_distance_identity,
                              pairing_scan, plucker_compatibility, signed_triple)
from anosovlab.representations import complexify, exterior_power_rep, sym_pipeline
from anosovlab.words import free_group, sample_boundary

pytestmark = pytest.mark.acceptance

F2 = free_group(2)

# frozen regression floors; observed minima were 4.14e-8 (pairing) and 8.60e-6 (hyperconvex)
PAIRING_FLOOR = 3.7e-8
HYPERCONVEX_FLOOR = 7.7e-6


def report(request, name, ok, detail):
    request.node.user_properties.append(("detail", detail))
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def random_det1(r, d):
    G = r.standard_normal((d, d))
    if np.linalg.det(G) < 0:
        G[:, 0] *= -1
    return G / np.linalg.det(G) ** (1 / d)


def unit(r, n, cplx):
    v = r.standard_normal(n) + (1j * r.standard_normal(n) if cplx else 0)
    return v / np.linalg.norm(v)


@pytest.mark.criterion("skew induced forms")
def test_skew_induced_forms(request):
    t0 = time.perf_counter()
    checked = []
    ok = True
    for m in (1, 2, 3, 4):
        W = standard_symplectic(m).form
        for k in range(1, m + 1, 2):
            F = induced_wedge_form(W, k)
            ok &= F.dtype.kind in "iO" and bool(np.array_equal(F.T, -F)) and F.shape == (comb(2 * m, k),) * 2
            checked.append(f"m={m},k={k}")
    F = induced_wedge_form(standard_symplectic(2).form, 2)
    ok &= bool(np.array_equal(F.T, F)) and bool(np.any(F))
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1
    report(request, "skew induced forms", ok,
           f"exactly skew for {', '.join(checked)}; m=2,k=2 symmetric; {elapsed:.3f} s")


@pytest.mark.criterion("top-form invariance")
def test_top_form_invariance(request):
    t0 = time.perf_counter()
    r = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        A = random_det1(r, 6)
        E = exterior_power(A, 3)
        u, v = r.standard_normal(20), r.standard_normal(20)
        before = top_form_pairing(u, v, 6)
        after = top_form_pairing(E @ u, E @ v, 6)
        worst = max(worst, abs(after - before) / abs(before))
    elapsed = time.perf_counter() - t0
    report(request, "top-form invariance", worst <= 1e-9 and elapsed < 5,
           f"max relative deviation {worst:.2e} over 100 det-1 matrices (wedge dim 20); {elapsed:.2f} s")


@pytest.mark.criterion("gap certification")
def test_gap_certification(request, monkeypatch):
    monkeypatch.setenv("ANOSOVLAB_THREADS", "1")
    t0 = time.perf_counter()
    rep = sym_pipeline(2, 4.0, 4)
    form_residual = rep.provenance["invariant_form"]["residual"]
    cert = certify(rep, 1, 6, workers=1)
    counts = [rec.count for rec in cert.profile.records]
    expected = [4 * 3 ** (ell - 1) for ell in range(1, 7)]
    elapsed = time.perf_counter() - t0
    ok = (rep.dim == 4 and rep.provenance["invariant_form"]["kind"] == "skew" and form_residual <= 1e-8
          and cert.verdict == "pass" and cert.mu_hat > 0.5 and strictly_increasing_minima(cert.profile)
          and counts == expected and elapsed < 60)
    report(request, "gap certification", ok,
           f"form residual {form_residual:.1e}, verdict {cert.verdict}, mu_hat {cert.mu_hat:.4f}, "
           f"counts {counts}, {elapsed:.2f} s")


@pytest.mark.criterion("pairing positivity")
def test_pairing_positivity(request):
    t0 = time.perf_counter()
    rep = sym_pipeline(2, 4.0, 4)
    rays = sample_boundary(F2, 20, 6, seed=0, max_overlap=2)
    real = pairing_scan(rep, rays)
    cplx = pairing_scan(complexify(rep), rays)
    values = np.array([rec.value for rec in real.records])
    cvalues = np.array([rec.value for rec in cplx.records])
    same_pairs = [(a.i, a.j) for a in real.records] == [(b.i, b.j) for b in cplx.records]
    field_diff = float(np.max(np.abs(values - cvalues))) if same_pairs else np.inf
    elapsed = time.perf_counter() - t0
    ok = (len(values) == 190 and real.skipped_pairs == 0 and bool(np.all(values > 0))
          and real.minimum >= PAIRING_FLOOR and field_diff <= 1e-12 and elapsed < 120)
    i, j = real.argmin
    report(request, "pairing positivity", ok,
           f"190 pairs, min {real.minimum:.4e} at {real.labels[i]} / {real.labels[j]} (floor {PAIRING_FLOOR:.1e}), "
           f"complex vs real {field_diff:.1e}, {elapsed:.2f} s")


@pytest.mark.criterion("pairing-distance identity")
def test_pairing_distance_identity(request):
    t0 = time.perf_counter()
    r = np.random.default_rng(77)
    worst = 0.0
    oracle = 0.0
    n = 0
    for m in (1, 2, 3):
        S = standard_symplectic(m)
        for cplx in (False, True):
            for i in range(10_000 // 6 + 1):
                u, v = unit(r, 2 * m, cplx), unit(r, 2 * m, cplx)
                a, b = pairing_distance_identity(u, v, S)
                worst = max(worst, abs(a - b))
                n += 1
                if i % 10 == 0:
                    # distance from [u] to the omega-complement of v, built as a null space
                    H = null_space((S.form @ v)[None, :])
                    resid = np.linalg.norm(u - H @ (H.conj().T @ u))
                    oracle = max(oracle, abs(resid - a))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and oracle <= 1e-12 and n >= 10_000 and elapsed < 5
    report(request, "pairing-distance identity", ok,
           f"{n} pairs over m=1,2,3 real and complex, max |pairing - dist| {worst:.1e}, "
           f"null-space oracle {oracle:.1e}, {elapsed:.2f} s")


@pytest.mark.criterion("lift construction")
def test_lift_construction(request):
    e = np.eye(3)
    x = lift_section([2 * e[0] + e[1]], g=np.eye(3))[0]
    target = (e[0] + 0.5 * e[1]) / np.linalg.norm(e[0] + 0.5 * e[1])
    fixture_err = max(np.abs(x - target).max(), np.abs(lift_section([e[0]], g=np.eye(3))[0] - e[0]).max())
    try:
        lift_section([e[1]], g=np.eye(3))
        rejected = False
    except NonTransverseError as exc:
        rejected = exc.index == 0
    r = np.random.default_rng(11)
    d = 4
    g = np.linalg.qr(r.standard_normal((d, d)))[0]
    direction = g[:, 1:] @ r.standard_normal(d - 1)
    direction /= np.linalg.norm(direction)
    ts = np.linspace(-1.4, 1.4, 100)
    pts = [np.exp(1j * r.uniform(0, 2 * np.pi)) * (np.cos(t) * g[:, 0] + np.sin(t) * direction) for t in ts]
    lifts = lift_section(pts, g=g.astype(complex))
    inner = min(np.real(np.vdot(a, b)) for a, b in zip(lifts, lifts[1:]))
    ok = fixture_err <= 1e-15 and rejected and inner > 0.9
    report(request, "lift construction", ok,
           f"fixture error {fixture_err:.1e}, non-transverse rejected {rejected}, "
           f"min adjacent inner product {inner:.4f} over 100 samples")


@pytest.mark.criterion("Pluecker compatibility")
def test_plucker_compatibility(request):
    rep = sym_pipeline(2, 4.0, 6)
    wedge = exterior_power_rep(rep, 2)
    rays = sample_boundary(F2, 10, 5, seed=1, max_overlap=2)
    angles = [plucker_compatibility(rep, ray, 2, max_depth=12, wedge_rep=wedge) for ray in rays]
    worst = max(angles)
    report(request, "Pluecker compatibility", worst <= 1e-6,
           f"max angle {worst:.1e} over {len(rays)} rays, Sym^5 (d=6), k=2, depth <= 12")


@pytest.mark.criterion("hyperconvexity antisymmetry")
def test_hyperconvexity(request):
    r = np.random.default_rng(5)
    worst = 0.0
    for p in (1, 3):
        d = 2 * p + 1
        for _ in range(50):
            frames = [np.linalg.qr(r.standard_normal((d, w)))[0] for w in (p, p, d - p, d - 2 * p)]
            hxy, hyx = signed_triple(*frames)
            worst = max(worst, abs(hxy + hyx) / abs(hxy))
    rep = sym_pipeline(2, 4.0, 5)
    rays = sample_boundary(F2, 6, 4, seed=0, max_overlap=1)
    scan = hyperconvexity_scan(rep, 1, 1, 2, rays)
    ok = (worst <= 1e-10 and len(scan.records) == 120 and scan.skipped_triples == 0
          and scan.min_gap > 0 and scan.min_gap >= HYPERCONVEX_FLOOR)
    report(request, "hyperconvexity antisymmetry", ok,
           f"random-frame residual {worst:.1e} (p=1,3); Sym^4 (1,1,2) scan min gap {scan.min_gap:.3e} over "
           f"{len(scan.records)} triples (floor {HYPERCONVEX_FLOOR:.1e}), scan residual "
           f"{scan.max_antisymmetry_residual:.1e}")


@pytest.mark.criterion("oracle equivalences")
def test_oracle_equivalences(request):
    r = np.random.default_rng(99)
    functor = 0.0
    for _ in range(100):
        A, B = r.standard_normal((6, 6)), r.standard_normal((6, 6))
        for k in range(1, 7):
            lhs = exterior_power(A @ B, k)
            rhs = exterior_power(A, k) @ exterior_power(B, k)
            functor = max(functor, np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
    eig = 0.0
    dual = 0.0
    for _ in range(100):
        d = int(r.integers(2, 8))
        M = r.standard_normal((d, d)) + (1j * r.standard_normal((d, d)) if r.random() < 0.5 else 0)
        s = singular_values(M).values
        lam = np.sort(np.linalg.eigvalsh(M @ M.conj().T))[::-1]
        eig = max(eig, np.max(np.abs(s**2 - lam)) / s[0] ** 2)
        t = singular_values(np.linalg.inv(M)).values
        dual = max(dual, np.max(np.abs(t - 1 / s[::-1]) / t))
    ok = functor <= 1e-9 and eig <= 1e-10 and dual <= 1e-9
    report(request, "oracle equivalences", ok,
           f"functoriality {functor:.1e} (100 pairs, k=1..6), sigma^2 vs eig {eig:.1e}, duality {dual:.1e}")
