"""Exit criteria for the artifact, one test per criterion at its stated tolerance."""

import csv
import math

import numpy as np
import pytest

from risgroup import SystemParams, cli
from risgroup.channel import complex_normal, group_cascade
from risgroup.estimation import composite_channel, ls_error_variance, ls_estimate, pilot_matrix, simulate_pilots
from risgroup.channel import sample_channels
from risgroup.optimizer import (
    fit_z_power,
    lambert_w0,
    optimal_group_brute_force,
    optimal_group_closed_form,
)
from risgroup.rate import rate_upper_bound, z_ratio

P_GRID = (-10, -5, 0, 5, 10, 15, 20)
TC_GRID = (300, 500, 700, 900, 1200, 1600, 2000)
B_GRID = (1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 24, 32, 48, 64)
KP_GRID = (15, 30, 45, 60, 90)
TRIALS = 10_000
SEED = 2022


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def sweep_three_times(tmp_path_factory, name, spec, extra=()):
    d = tmp_path_factory.mktemp(name)
    outs = []
    for i, workers in enumerate(("1", "1", "4")):
        out = d / f"{name}{i}.csv"
        argv = ["sweep", "--sweep", spec, "--trials", str(TRIALS), "--seed", str(SEED), "--workers", workers, "--out", str(out)]
        assert cli.main(argv + list(extra)) == 0
        outs.append(out)
    return outs


@pytest.fixture(scope="module")
def b_sweep(tmp_path_factory):
    return sweep_three_times(tmp_path_factory, "fig1a", "B=" + ",".join(map(str, B_GRID)))


@pytest.fixture(scope="module")
def kp_sweep(tmp_path_factory):
    return sweep_three_times(tmp_path_factory, "fig1b", "Kp=" + ",".join(map(str, KP_GRID)), ["--onoff"])


def test_c1_design_number(criterion):
    res = optimal_group_closed_form(SystemParams.from_scenario(K=360, T_c=500))
    ok = abs(res.b_star - 8) <= 1 and abs(res.k_prime - 45) <= 6
    criterion("1 design number T_c=500", ok, f"B*={res.b_star} (8+-1), K'={res.k_prime} (45+-6)")


def test_c2_constant_chain(criterion):
    fit = fit_z_power(64)
    c = 0.8759**2
    ok = (
        abs(fit.kappa - 0.8759) <= 0.01
        and abs(fit.eta - 0.5) <= 0.02
        and abs(c - 0.7671) <= 5e-4
        and abs(math.e * 0.7671 - 2.08) <= 0.01
    )
    criterion(
        "2 constant chain",
        ok,
        f"kappa={fit.kappa:.4f} eta={fit.eta:.3f} kappa0^2={c:.5f} e*0.7671={math.e * 0.7671:.4f}",
    )


def test_c3_moment_identities(criterion):
    rng = np.random.default_rng(SEED)
    n = 100_000
    worst = 0.0
    for B in (1, 2, 4, 8):
        z = z_ratio(B)
        for kp in (1, 4, 16):
            K = kp * B
            first, total, hd = [], [], []
            for _ in range(10):
                m = n // 10
                a = np.abs(group_cascade(complex_normal(rng, (m, K)) * complex_normal(rng, (m, K)), B))
                first.append(a[:, 0])
                total.append(a.sum(axis=1))
                hd.append(np.abs(complex_normal(rng, m)))
            a0, s, h = map(np.concatenate, (first, total, hd))
            checks = [
                (a0**2, B),
                (a0, z),
                (s**2, kp * B + kp * (kp - 1) * z * z),
                (h * s, 0.5 * math.sqrt(math.pi) * kp * z),
            ]
            for x, expected in checks:
                se = x.std(ddof=1) / math.sqrt(n)
                worst = max(worst, abs(x.mean() - expected) / se)
    criterion("3 moment identities", worst <= 3.0, f"max |MC - formula| = {worst:.2f} std errors (<= 3)")


def test_c4_bound_dominance_and_tightness(b_sweep, criterion):
    rows = read_csv(b_sweep[0])
    assert [int(r["B"]) for r in rows] == list(B_GRID)
    margins = []
    for r in rows:
        assert r["skipped"] == ""
        margins.append((float(r["upper_bound"]) - float(r["mc_rate"])) / float(r["mc_stderr"]))
    best = max(rows, key=lambda r: float(r["upper_bound"]))
    gap = (float(best["upper_bound"]) - float(best["mc_rate"])) / float(best["upper_bound"])
    ok = min(margins) >= -3.0 and gap <= 0.10
    criterion(
        "4 bound dominance/tightness",
        ok,
        f"min (bound - MC)/stderr = {min(margins):.2f} (>= -3); gap at B={best['B']}: {gap:.2%} (<= 10%)",
    )


def test_c5_closed_vs_brute(criterion):
    ratios = []
    for p in P_GRID:
        params = SystemParams.from_scenario(P_dbm=p, T_c=900)
        ratios.append(optimal_group_closed_form(params).rate_bound / optimal_group_brute_force(params).rate_bound)
    for tc in TC_GRID:
        params = SystemParams.from_scenario(P_dbm=0, T_c=tc)
        ratios.append(optimal_group_closed_form(params).rate_bound / optimal_group_brute_force(params).rate_bound)
    criterion("5 closed form vs brute force", min(ratios) >= 0.99, f"min R(closed)/R(brute) = {min(ratios):.5f} (>= 0.99)")


def test_c6_monotonicity(criterion):
    bp = [optimal_group_closed_form(SystemParams.from_scenario(P_dbm=p)).b_star for p in P_GRID]
    bt = [optimal_group_closed_form(SystemParams.from_scenario(T_c=t)).b_star for t in TC_GRID]
    ok = all(a <= b for a, b in zip(bp, bp[1:])) and all(a >= b for a, b in zip(bt, bt[1:]))
    criterion("6 monotonicity", ok, f"B*(P)={bp}, B*(T_c)={bt}")


def test_c7_grouping_beats_onoff(kp_sweep, criterion):
    rows = read_csv(kp_sweep[0])
    assert [int(r["K_prime"]) for r in rows] == list(KP_GRID)
    z = []
    for r in rows:
        assert r["skipped"] == ""
        gap = float(r["mc_rate"]) - float(r["onoff_rate"])
        se = math.hypot(float(r["mc_stderr"]), float(r["onoff_stderr"]))
        z.append(gap / se)
    criterion("7 grouping beats On-Off", min(z) > 3.0, f"min gap = {min(z):.1f} combined std errors (> 3)")


def test_c8_estimator(criterion):
    worst_rel = 0.0
    for kp in range(1, 65):
        rng = np.random.default_rng(kp)
        params = SystemParams.from_scenario(K=kp, B=1, noise_dbm=-math.inf)
        r = sample_channels(kp, rng).grouped(1)
        s = pilot_matrix(kp)
        est = ls_estimate(simulate_pilots(r, s, params, rng), s, params)
        truth = composite_channel(r, params)
        got = np.concatenate([[est.h_d_hat], est.v_grouped_hat])
        worst_rel = max(worst_rel, float(np.max(np.abs(got - truth) / np.abs(truth))))

    params = SystemParams.from_scenario(K=8, B=2, P_tr_dbm=-10.0)
    rng = np.random.default_rng(SEED)
    s = pilot_matrix(4)
    r = sample_channels(8, rng).grouped(2)
    truth = composite_channel(r, params)
    n = 100_000
    sq = np.empty((n, 5))
    for i in range(n):
        e = ls_estimate(simulate_pilots(r, s, params, rng), s, params)
        sq[i] = np.abs(np.concatenate([[e.h_d_hat], e.v_grouped_hat]) - truth) ** 2
    target = ls_error_variance(4, params)
    zs = np.abs(sq.mean(axis=0) - target) / (sq.std(axis=0, ddof=1) / math.sqrt(n))
    ok = worst_rel <= 1e-10 and zs.max() <= 3.0
    criterion("8 LS estimator", ok, f"zero-noise rel err {worst_rel:.1e} (<= 1e-10); noisy variance off by {zs.max():.2f} se (<= 3)")


def test_c9_lambert(criterion):
    xs = np.logspace(-6, 12, 1000)
    worst = max(abs(lambert_w0(x) * math.exp(lambert_w0(x)) - x) / max(1.0, x) for x in xs)
    e_err = abs(lambert_w0(math.e) - 1.0)
    ok = worst <= 1e-12 and lambert_w0(0.0) == 0.0 and e_err <= 1e-14
    criterion("9 Lambert W", ok, f"max scaled residual {worst:.1e} (<= 1e-12); |W(e)-1| = {e_err:.1e}")


def test_c10_determinism(b_sweep, kp_sweep, criterion):
    same = []
    for runs in (b_sweep, kp_sweep):
        data = [p.read_bytes() for p in runs]
        same.append(data[0] == data[1] == data[2])
    criterion("10 determinism", all(same), "sweep files byte-identical: 2 runs at 1 worker and 1 run at 4 workers")
