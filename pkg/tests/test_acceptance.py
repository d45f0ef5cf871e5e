"""Acceptance criteria 1-10, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed outside output capture.
"""
import io
import math
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from ccmeasure import control as C
from ccmeasure import curves as cv
from ccmeasure import derivative as dv
from ccmeasure import measures as ms
from ccmeasure import rectifiability as rc
from ccmeasure import spaces as sp
from ccmeasure.cli import run

FOUR_PI = 4 * math.pi
VERTICAL_EPS = (0.16, 0.08, 0.04, 0.02, 0.01)
SEGMENT_EPS = (0.016, 0.008, 0.004, 0.002, 0.001)
TILTED_EPS = (0.16, 0.08, 0.04, 0.02)


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def acceptance_curves():
    """(name, space, curve, k, eps schedule)"""
    return [
        ("vertical", sp.heisenberg(), cv.heisenberg_vertical(), 2, VERTICAL_EPS),
        ("segment", sp.euclidean(2), cv.euclidean_segment([0.6, 0.8]), 1, SEGMENT_EPS),
        ("tilted", sp.heisenberg(),
         cv.custom_coordinate_curve("heisenberg", ["t", "0", "t"], -1, 1, name="tilted"),
         2, TILTED_EPS),
    ]


@pytest.fixture(scope="module")
def vertical_report():
    t0 = time.perf_counter()
    rep = ms.verify_main_theorem(sp.heisenberg(), cv.heisenberg_vertical(), 2,
                                 ms.TheoremConfig(VERTICAL_EPS))
    return rep, time.perf_counter() - t0


def test_1_heisenberg_anchor(capsys, rng):
    t0 = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = run(["space", "dist", "--p", "0,0,0", "--q", "0,0,1"])
    value = float(buf.getvalue().splitlines()[1].split(",")[0])
    H = sp.heisenberg()
    n = 1000
    P, Q, G = rng.normal(size=(3, n, 3))
    lam = rng.uniform(0.1, 4, size=n)
    w = np.array([1, 1, 2])
    d, _ = sp.distances(H, P, Q)
    dl, _ = sp.distances(H, P * lam[:, None] ** w, Q * lam[:, None] ** w)
    dg, _ = sp.distances(H, sp.group_compose(H, G, P), sp.group_compose(H, G, Q))
    hom = float(np.max(np.abs(dl - lam * d)))
    inv = float(np.max(np.abs(dg - d)))
    dt = time.perf_counter() - t0
    ok = (code == 0 and abs(value - 3.544907701811) <= 1e-9 and hom <= 1e-9 and inv <= 1e-9
          and dt < 1.0)
    report(capsys, 1, ok, f"d={value:.12f} homogeneity={hom:.1e} invariance={inv:.1e} "
                          f"time={dt:.2f}s")


def test_2_metric_derivative(capsys):
    t0 = time.perf_counter()
    H, c = sp.heisenberg(), cv.heisenberg_vertical()
    grid = np.linspace(0, 1, 16)
    prof = np.array([e.value for e in dv.meas_profile(H, c, 2, grid)])
    err2 = float(np.max(np.abs(prof - FOUR_PI)) / FOUR_PI)
    k3 = max(dv.meas_k_estimate(H, c, t, 3).value for t in grid)
    div = [dv.meas_k_estimate(H, c, t, 1.5) for t in (0.25, 0.5, 0.75)]
    flagged = all(e.limit == "infinite" and not e.converged for e in div)
    dt = time.perf_counter() - t0
    ok = err2 <= 0.005 and k3 <= 1e-3 and flagged and dt < 5
    report(capsys, 2, ok, f"k=2 rel.err={err2:.1e} k=3 max={k3:.1e} k=1.5 divergent={flagged} "
                          f"time={dt:.2f}s")


def test_3_main_theorem_vertical(capsys, vertical_report):
    rep, dt = vertical_report
    q = rep.quantities()
    worst = max(abs(a - b) for a in q.values() for b in q.values()) / FOUR_PI
    ok = rep.verdict and worst <= 0.05 and dt < 60
    vals = " ".join(f"{k}={v:.5f}" for k, v in q.items())
    report(capsys, 3, ok, f"{vals} max pairwise={worst:.2%} time={dt:.1f}s")


def test_4_euclidean_control(capsys):
    t0 = time.perf_counter()
    E = sp.euclidean(2)
    seg = cv.euclidean_segment([0.6, 0.8])
    rep = ms.verify_main_theorem(E, seg, 1, ms.TheoremConfig(SEGMENT_EPS))
    worst = max(abs(v - 1.0) for v in rep.quantities().values())
    k2 = max(dv.meas_k_estimate(E, seg, t, 2).value for t in np.linspace(0, 1, 16))
    dt = time.perf_counter() - t0
    ok = rep.verdict and worst <= 0.005 and k2 <= 1e-6 and dt < 5
    report(capsys, 4, ok, f"max |q-1|={worst:.1e} k=2 max={k2:.1e} time={dt:.2f}s")


def test_5_degree_detection(capsys):
    t0 = time.perf_counter()
    H, E = sp.heisenberg(), sp.engel()
    kv = dv.degree_estimate(H, cv.heisenberg_vertical(), 0.5)[0]
    kz = dv.degree_estimate(E, cv.engel_z_axis(), 0.5)[0]
    kw = dv.degree_estimate(E, cv.engel_w_axis(), 0.5)[0]
    dt = time.perf_counter() - t0
    ok = (1.98 <= kv <= 2.02 and 1.98 <= kz <= 2.02 and 2.9 <= kw <= 3.1 and dt < 600)
    report(capsys, 5, ok, f"vertical={kv:.4f} engel_z={kz:.4f} engel_w={kw:.4f} time={dt:.1f}s")


def test_6_engel_weierstrass(capsys, rng):
    t0 = time.perf_counter()
    p = cv.WeierstrassParams(0.2, 5.2)
    curve = cv.engel_weierstrass(p, "t")
    rep = dv.mc1k_check(sp.engel(), curve, 3, np.linspace(0, 1, 16),
                        ladder=dv.ScaleLadder(0.1, 0.25, 20))
    prof = rep.profile
    spread = float((prof.max() - prof.min()) / prof.max())
    t = rng.uniform(0, 1, 10_000)
    h = 10 ** rng.uniform(-8, -1, 10_000) * rng.choice([-1, 1], 10_000)
    ratio = (np.abs(cv.weierstrass_eval(p, t + h) - cv.weierstrass_eval(p, t))
             / np.abs(h) ** p.exponent)
    Cfit = 1.5 * float(ratio[:5000].max())  # fitted on half, checked on all
    holder = bool(np.all(ratio <= Cfit))
    dt = time.perf_counter() - t0
    ok = p.exponent > 2 / 3 and rep.passed and spread <= 0.15 and holder and dt < 900
    report(capsys, 6, ok, f"xi={p.exponent:.4f} mc1k={rep.passed} profile spread={spread:.2%} "
                          f"C={Cfit:.2f} holder={holder} time={dt:.1f}s")


def test_7_density(capsys):
    t0 = time.perf_counter()
    H, c = sp.heisenberg(), cv.heisenberg_vertical()
    radii = [0.2, 0.1, 0.05, 0.02]
    interior = [ms.density_profile(H, c, 2, t, radii) for t in (0.25, 0.5, 0.75)]
    end = ms.density_profile(H, c, 2, 0.0, radii)
    dev = max(float(np.max(np.abs(p.ratios[-2:] - 1))) for p in interior)
    edev = float(np.max(np.abs(end.ratios[-2:] - 0.5)))
    dt = time.perf_counter() - t0
    ok = (dev <= 0.05 and all(p.side == "interior" for p in interior) and edev <= 0.05
          and end.side == "left_endpoint" and dt < 30)
    report(capsys, 7, ok, f"interior max|r-1|={dev:.1e} endpoint max|r-0.5|={edev:.1e} "
                          f"side={end.side} time={dt:.1f}s")


def test_8_sandwiches(capsys, vertical_report):
    problems, checked = [], 0
    for name, space, curve, k, eps in acceptance_curves():
        if name == "vertical":
            sched = vertical_report[0].schedule
            S_e, Hm = sched["spherical"], sched["matched_hausdorff"]
            counts = sched["chain_counts"]
        else:
            S_e, Hm, counts = [], [], []
            for e in eps:
                cert = ms.interpolation_complexity(space, curve, e)
                s = ms.spherical_upper(space, curve, k, e, cert.times)
                S_e.append(s.cost)
                Hm.append(s.matched_hausdorff_cost)
                counts.append(cert.count)
        S = S_e[-1]
        T = curve.length
        dm, dp, _ = ms.holder_bounds_estimate(space, curve, k, 0.1)
        for e, n, s, h in zip(eps, counts, S_e, Hm):
            ek = e**k
            net = ms.metric_entropy(space, curve, e).count
            checked += 1
            # point counts carry one extra point over arc counts; allow one eps^k
            if not (dm**k * T - ek <= ek * n <= dp**k * T + 2 * ek):
                problems.append(f"{name} chain eps={e}: {ek * n:.5g}")
            if not (S / 2**k - ek <= ek * net <= S / 2 + ek):
                problems.append(f"{name} entropy eps={e}: {ek * net:.5g} vs S={S:.5g}")
            if not (h <= s * (1 + 1e-9) and s <= 2**k * h * (1 + 1e-9)):
                problems.append(f"{name} ordering eps={e}: H={h:.5g} S={s:.5g}")
    report(capsys, 8, not problems,
           f"{checked} (curve, eps) cases; violations: {problems or 'none'}")


def test_9_crossing_rectifiability(capsys):
    t0 = time.perf_counter()
    rep = rc.density_bounds_check(sp.heisenberg(), rc.crossing_segments(), sample_count=32,
                                  radius_schedule=[0.1, 0.05, 0.02, 0.01], seed=0)
    n = len(rep.sample_points)
    lo, hi = float(rep.lower.min()), float(rep.upper.max())
    dt = time.perf_counter() - t0
    ok = rep.verdict and n == 64 and lo >= 2 * 0.95 and hi <= 4 * 1.05 and dt < 120
    report(capsys, 9, ok, f"samples={n} densities in [{lo:.4f}, {hi:.4f}] time={dt:.1f}s")


def test_10_oracles(capsys, rng):
    problems = []
    dp_eps = {"vertical": (0.5, 0.3, 0.16), "segment": (0.3, 0.1, 0.016),
              "tilted": (1.0, 0.5, 0.3)}
    for name, space, curve, k, _ in acceptance_curves():
        for e in dp_eps[name]:
            cert = ms.interpolation_complexity(space, curve, e)
            dp = ms.interpolation_complexity_bruteforce(space, curve, e, 2000,
                                                        extra_times=cert.times)
            if not dp <= cert.count <= dp + 1:
                problems.append(f"{name} eps={e}: dp={dp} greedy={cert.count}")
    cfg = C.SolverConfig(nodes=32, restarts=3)
    worst = 0.0
    for q in rng.uniform(-1, 1, size=(50, 3)):
        L, gap, _ = C.bvp_with_gap("heisenberg", q, cfg)
        exact = sp.heisenberg_norm(q)
        worst = max(worst, abs(L - exact) - gap)
        if not (exact - 1e-9 <= L <= exact + gap + 1e-9):
            problems.append(f"oracle target {q}: exact={exact:.6g} oracle={L:.6g} gap={gap:.2g}")
    report(capsys, 10, not problems,
           f"DP/greedy on 9 cases, 50 oracle targets (max excess over gap {worst:.1e}); "
           f"violations: {problems or 'none'}")
