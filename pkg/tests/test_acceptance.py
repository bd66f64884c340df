"""The twelve acceptance criteria, one test each.

Every test appends a ``criterion N: PASS|FAIL ...`` line that the terminal
summary prints in order, then asserts.
"""

import hashlib
import math
import time

import numpy as np

from conftest import BUILD_SECONDS, REPORT_SECONDS, cached_ball, cached_report
from oracles import busemann_limit, random_disk_points, shadow_half_width_np
from psworkbench.cli import main
from psworkbench.groups import annuli_counts, get_preset
from psworkbench.hyperbolic import ORIGIN, BoundaryPoint, DiskPoint, busemann, geodesic_between, gromov_product
from psworkbench.measures import (
    annulus_bound_audit,
    cocycle_audit,
    equivariance_audit,
    ps_histogram,
    shadow_lemma_audit,
)
from psworkbench.series import estimate_delta_counting, estimate_delta_partial_sum, partial_sums, poincare_partial

RNG_SEED = 20261016


def record(log, n, ok, detail):
    log.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def test_criterion_01_busemann_closed_form(acceptance_log):
    rng = np.random.default_rng(RNG_SEED)
    t0 = time.perf_counter()
    P, X = random_disk_points(rng, 1000), random_disk_points(rng, 1000)
    theta = rng.uniform(0, 2 * math.pi, 1000)
    exact = busemann(theta, P, X)
    oracle = np.array([float(busemann_limit(t, p, x, 30)) for t, p, x in zip(theta, P, X)])
    err = float(np.max(np.abs(exact - oracle)))
    secs = time.perf_counter() - t0
    record(acceptance_log, 1, err <= 1e-6 and secs < 5, f"sup error {err:.2e} at t_max=30, {secs:.2f} s")


def test_criterion_02_busemann_bound(acceptance_log):
    rng = np.random.default_rng(RNG_SEED + 1)
    n = 100_000
    P, X = random_disk_points(rng, n, 0.99), random_disk_points(rng, n, 0.99)
    theta = rng.uniform(0, 2 * math.pi, n)
    b = busemann(theta, P, X)
    d = np.arccosh(1 + 2 * np.abs(P - X) ** 2 / ((1 - np.abs(P) ** 2) * (1 - np.abs(X) ** 2)))
    bad = int(np.count_nonzero(np.abs(b) > d + 1e-9))
    record(acceptance_log, 2, bad == 0, f"{bad} violations of |beta| <= d on {n} triples")


def test_criterion_03_gromov_witness(acceptance_log):
    rng = np.random.default_rng(RNG_SEED + 2)
    worst = 0.0
    for _ in range(1000):
        p = DiskPoint.from_complex(random_disk_points(rng, 1)[0])
        a, gap = rng.uniform(0, 2 * math.pi), rng.uniform(0.05, 2 * math.pi - 0.05)
        xi, eta = BoundaryPoint(a), BoundaryPoint(a + gap)
        g = geodesic_between(xi, eta)
        ref = gromov_product(p, xi, eta)
        for t in rng.uniform(-3, 3, 2):
            w = DiskPoint.from_complex(g.point(t))
            worst = max(worst, abs(gromov_product(p, xi, eta, witness=w) - ref))
    record(acceptance_log, 3, worst <= 1e-9, f"max witness spread {worst:.2e} over 1000 configurations")


def test_criterion_04_shadow_law(acceptance_log):
    rng = np.random.default_rng(RNG_SEED + 3)
    z = random_disk_points(rng, 1000, 0.97)
    D = np.arccosh(1 + 2 * np.abs(z) ** 2 / (1 - np.abs(z) ** 2))
    R = rng.uniform(0.05, 0.95, 1000) * D
    law = np.arcsin(np.sinh(R) / np.sinh(D))
    search = shadow_half_width_np(z, R)
    err = float(np.max(np.abs(law - search)))
    record(acceptance_log, 4, err <= 1e-6, f"max |psi_law - psi_search| = {err:.2e} on 1000 cases")


def test_criterion_05_cyclic_exactness(acceptance_log, cyclic_ball):
    ball = get_preset("cyclic_axial").ball(10.0)
    target = 1 + 2 * sum(math.exp(-2 * n) for n in range(1, 6))
    err = abs(poincare_partial(ball, 1.0) - target)
    dc = estimate_delta_counting(annuli_counts(cyclic_ball)).value
    ok = len(ball) == 11 and err <= 1e-12 and dc <= 0.05
    record(acceptance_log, 5, ok, f"{len(ball)} elements at radius 10, partial sum error {err:.1e}, "
                                  f"delta_hat {dc:.4f} at radius {cyclic_ball.radius:g}")


def test_criterion_06_critical_exponents(acceptance_log, modular_ball, parabolic_ball):
    t0 = time.perf_counter()
    dm = estimate_delta_counting(annuli_counts(modular_ball)).value
    secs = BUILD_SECONDS.get(("modular", 14.0), float("nan")) + time.perf_counter() - t0
    dp = estimate_delta_counting(annuli_counts(parabolic_ball)).value
    gaps = {}
    for name, R in [("cyclic_axial", 30.0), ("cyclic_parabolic", 16.0), ("modular", 14.0),
                    ("schottky_perp", 14.0), ("zcover_schottky", 14.0)]:
        ball = cached_ball(name, R)
        gaps[name] = abs(estimate_delta_counting(annuli_counts(ball)).value - estimate_delta_partial_sum(ball))
    worst = max(gaps.values())
    ok = 0.9 <= dm <= 1.05 and secs < 60 and 0.43 <= dp <= 0.57 and worst <= 0.07
    record(acceptance_log, 6, ok, f"modular {dm:.4f} ({secs:.1f} s), parabolic {dp:.4f}, "
                                  f"max estimator gap {worst:.3f} ({max(gaps, key=gaps.get)})")


def test_criterion_07_cocycle(acceptance_log, modular_ball):
    s = estimate_delta_counting(annuli_counts(modular_ball)).value + 0.05
    q = DiskPoint(0.3, 0.0)
    mu = ps_histogram(modular_ball, s, q, 1024)
    same = cocycle_audit(mu, ps_histogram(modular_ball, s, q, 1024))
    exact = bool(np.all(same.deviations == 0.0))
    means = []
    for R in (10.0, 12.0, 14.0):
        ball = modular_ball.prefix(R)
        means.append(cocycle_audit(ps_histogram(ball, s, ORIGIN, 1024), ps_histogram(ball, s, q, 1024)).mean_deviation)
    dec = all(b < a for a, b in zip(means, means[1:]))
    record(acceptance_log, 7, exact and dec,
           f"p=q zeros {exact}; mean deviation R10/12/14 = " + "/".join(f"{m:.3f}" for m in means))


def test_criterion_08_equivariance(acceptance_log, modular_ball):
    details, ok = [], True
    cyc = get_preset("cyclic_axial")
    tv = []
    for R in (10.0, 20.0, 30.0):
        ball = cached_ball("cyclic_axial", 30.0).prefix(R) if R < 30 else cached_ball("cyclic_axial", 30.0)
        rep = equivariance_audit(ball, 0.1, ORIGIN, cyc.generators[0], 1024)
        ok &= rep.within_bound
        tv.append(rep.total_variation)
    ok &= all(b < a for a, b in zip(tv, tv[1:]))
    details.append("cyclic TV " + "/".join(f"{v:.4f}" for v in tv))
    s = estimate_delta_counting(annuli_counts(modular_ball)).value + 0.05
    for k, gen in enumerate(modular_ball.generators):
        tv = []
        for R in (10.0, 12.0, 14.0):
            rep = equivariance_audit(modular_ball.prefix(R), s, ORIGIN, gen, 1024)
            ok &= rep.within_bound
            tv.append(rep.total_variation)
        # S fixes the base point and preserves every ball, so its error is rounding only
        trend = all(b < a for a, b in zip(tv, tv[1:])) if tv[0] > 1e-12 else max(tv) < 1e-12
        ok &= trend
        details.append(f"modular gen {k + 1} TV " + "/".join(f"{v:.2e}" for v in tv))
    record(acceptance_log, 8, bool(ok), "; ".join(details) + " (all within edge-mass bound)")


def test_criterion_09_shadow_lemma(acceptance_log, modular_ball):
    dc = estimate_delta_counting(annuli_counts(modular_ball)).value
    mu = ps_histogram(modular_ball, dc + 0.05, ORIGIN, 1024)
    a = shadow_lemma_audit(modular_ball, mu, R=1.5, r=dc)
    b = shadow_lemma_audit(modular_ball, mu.rebin(2048), R=1.5, r=dc)
    ratio = max(a.spread_log10, b.spread_log10) / min(a.spread_log10, b.spread_log10)
    ann = annulus_bound_audit(modular_ball, dc)
    ok = math.isfinite(a.c_emp) and math.isfinite(b.c_emp) and ratio <= 2 and ann.ratio <= 20
    record(acceptance_log, 9, ok, f"C_emp {a.c_emp:.3g} / {b.c_emp:.3g} at 1024/2048 bins, log-spread ratio "
                                  f"{ratio:.2f}, annulus max/median {ann.ratio:.2f}")


def test_criterion_10_dichotomy(acceptance_log):
    details, ok = [], True
    secs = 0.0
    for name in ("modular", "schottky_perp"):
        rep = cached_report(name)
        key = (name, 14.0, 0)
        secs = max(secs, BUILD_SECONDS[key[:2]] + REPORT_SECONDS[key])
        d = rep.to_dict()
        readings = [v["reading"] for v in d["indicators"].values()]
        med = d["myrberg"]["median_eps"]
        cf = d["indicators"]["conical_fraction"]["value"]
        this = (all(r == "conservative-consistent" for r in readings) and cf >= 0.9
                and med[1] < med[0] and not d["myrberg_subset_of_conical_violations"])
        ok &= this
        details.append(f"{name}: conical {cf:.2f}, Myrberg median {med[0]:.3f}->{med[1]:.3f}")
    for name in ("cyclic_axial", "cyclic_parabolic"):
        d = cached_report(name).to_dict()
        ok &= d["verdict"] == "elementary"
        details.append(f"{name}: {d['verdict']}")
    ok &= secs < 300
    record(acceptance_log, 10, bool(ok), "; ".join(details) + f"; slowest pipeline {secs:.0f} s")


def test_criterion_11_monotonicity(acceptance_log):
    bad = 0
    checked = 0
    for name in ("modular", "schottky_perp"):
        for rec in cached_report(name).records:
            c = [v for _, v in rec.conical_profile]
            bad += sum(b > a for a, b in zip(c, c[1:]))
            for pid in {q for q, _, _ in rec.myrberg_profile}:
                e = [v for q, _, v in rec.myrberg_profile if q == pid]
                bad += sum(b > a for a, b in zip(e, e[1:]))
            checked += 1
    for name, R in [("cyclic_axial", 30.0), ("cyclic_parabolic", 16.0), ("modular", 14.0),
                    ("schottky_perp", 14.0), ("zcover_schottky", 14.0)]:
        ball = cached_ball(name, R)
        for s in np.round(np.arange(0, 1.21, 0.05), 2):
            bad += int(np.count_nonzero(np.diff(partial_sums(ball, s)) < 0))
            checked += 1
    record(acceptance_log, 11, bad == 0, f"{bad} monotonicity violations across {checked} profiles")


def test_criterion_12_determinism(acceptance_log, tmp_path):
    mismatched = []
    for preset, radius in (("cyclic_axial", "30"), ("modular", "10")):
        for verb in ("orbit", "delta", "measure", "classify"):
            outs = []
            for k in range(2):
                out = tmp_path / f"{preset}_{verb}_{k}"
                assert main([verb, "--preset", preset, "--radius", radius, "--seed", "3", "--out", str(out)]) == 0
                outs.append({p.name: hashlib.sha256(p.read_bytes()).digest() for p in out.iterdir()})
            if outs[0] != outs[1]:
                mismatched.append(f"{preset}/{verb}")
    record(acceptance_log, 12, not mismatched,
           "8 verb runs byte-identical" if not mismatched else f"differs: {mismatched}")
