"""
Acceptance criteria, each at its stated tolerance.

Every test prints one ``ACCEPTANCE <id> PASS|FAIL`` line, visible even when
pytest captures output, and then asserts.
"""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import integrate, optimize

from blockboot.asymptotics import (
    are_sb_vs_cbb,
    asymptotic_mse,
    asymptotic_variance,
    optimal_block,
    variance_constant,
)
from blockboot.estimators import cbb_estimate, conditional_variance_mc, nbb_estimate, sb_estimate, sb_weights
from blockboot.lagweights import fejer_convolution_quadrature, kernel_K, theorem2_Mn, weights_for
from blockboot.series import Ar1Model, ar1_long_run_G, ar1_spectral_density, cov_product_sum, simulate_ar1
from blockboot.simulation import ExperimentConfig, run

pytestmark = pytest.mark.slow

FIG1_PHIS = (0.0, 0.3, -0.5)


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {name} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def figure1():
    reports = {}
    for i, phi in enumerate(FIG1_PHIS):
        config = ExperimentConfig.model_validate(
            {"model": {"phi": phi}, "replications": 5000, "master_seed": 100 + i,
             "methods": ["sb", "nbb", "mbb"], "block_rule": "cuberoot", "experiment": "ratio"}
        )
        reports[phi] = run(config)
    return reports


def test_1_sb_nbb_ratio_tends_to_one(figure1, verdict):
    big = {phi: r.row(10_000, "sb").ratio_to_nbb for phi, r in figure1.items()}
    small = {phi: r.row(100, "sb").ratio_to_nbb for phi, r in figure1.items()}
    in_band = all(0.8 <= v <= 1.2 for v in big.values())
    closer = sum(abs(big[p] - 1) <= abs(small[p] - 1) for p in FIG1_PHIS)
    detail = ", ".join(f"phi={p}: {small[p]:.3f} -> {big[p]:.3f}" for p in FIG1_PHIS)
    verdict("1", in_band and closer >= 2, f"SB/NBB at n=100 -> 1e4: {detail}; {closer}/3 closer to 1")


def test_2_mbb_nbb_ratio_two_thirds(figure1, verdict):
    vals = {phi: r.row(10_000, "mbb").ratio_to_nbb for phi, r in figure1.items()}
    ok = all(0.55 <= v <= 0.80 for v in vals.values())
    verdict("2", ok, "MBB/NBB at n=1e4: " + ", ".join(f"phi={p}: {v:.3f}" for p, v in vals.items()))


def test_3_variance_constants(verdict):
    config = ExperimentConfig.model_validate(
        {"model": {"phi": 0.0}, "n_grid": [10_000], "replications": 5000, "master_seed": 3,
         "methods": ["sb", "nbb", "mbb", "cbb"], "block_rule": 22, "experiment": "coefficient"}
    )
    report = run(config)
    norm = {r.method: 10_000 / 22 * r.mc_variance for r in report.rows}
    bands = {"sb": (1.6, 2.4), "nbb": (1.6, 2.4), "mbb": (1.07, 1.60), "cbb": (1.07, 1.60)}
    ok = all(lo <= norm[m] <= hi for m, (lo, hi) in bands.items())
    verdict("3", ok, "(n/ell) Var: " + ", ".join(f"{m}={v:.3f}" for m, v in norm.items()))


def test_4_bias(verdict):
    config = ExperimentConfig.model_validate(
        {"model": {"phi": 0.5}, "n_grid": [10_000], "replications": 5000, "master_seed": 4,
         "methods": ["sb"], "block_rule": 25, "experiment": "coefficient"}
    )
    row = run(config).row(10_000, "sb")
    bias = row.mc_mean - row.true_sigma2
    target = -ar1_long_run_G(Ar1Model(0.5)) / 25
    ok = bias < 0 and abs(bias - target) <= 0.35 * abs(target)
    verdict("4", ok, f"E(SB) - sigma_n^2 = {bias:.5f} vs -G/ell = {target:.5f} (MC se {row.se_mean:.5f})")


def test_5_closed_forms_vs_resampling(verdict):
    x = simulate_ar1(Ar1Model(0.5), 32, 7)
    sb_mc = conditional_variance_mc(x, "sb", 4, 200_000, 51)
    sb_cf = sb_estimate(x, 4)
    four = [1.0, 2.0, 3.0, 4.0]
    nbb_mc, nbb_se = conditional_variance_mc(four, "nbb", 2, 200_000, 52, return_se=True)
    cbb_mc, cbb_se = conditional_variance_mc(four, "cbb", 2, 200_000, 53, return_se=True)
    nbb_cf, cbb_cf = nbb_estimate(four, 2), cbb_estimate(four, 2)
    ok = (
        abs(sb_mc / sb_cf - 1) <= 0.02
        and nbb_cf == 2.0
        and abs(nbb_mc - nbb_cf) <= 3 * nbb_se
        and abs(cbb_mc - cbb_cf) <= 3 * cbb_se
    )
    verdict(
        "5", ok,
        f"SB {sb_mc:.5f} vs {sb_cf:.5f}; NBB {nbb_mc:.4f}+-{nbb_se:.4f} vs {nbb_cf}; "
        f"CBB {cbb_mc:.4f}+-{cbb_se:.4f} vs {cbb_cf}",
    )


def test_6_frequency_domain_variance(verdict):
    model = Ar1Model(0.3)
    config = ExperimentConfig.model_validate(
        {"model": {"phi": 0.3}, "n_grid": [2000], "replications": 5000, "master_seed": 6,
         "methods": ["sb", "mbb"], "block_rule": 12, "experiment": "coefficient"}
    )
    report = run(config)
    ratios = {}
    for m in ("sb", "mbb"):
        ratios[m] = report.row(2000, m).mc_variance / theorem2_Mn(weights_for(m, 2000, 12), model)
    ok = all(abs(r - 1) <= 0.15 for r in ratios.values())
    verdict("6", ok, "Var_MC(T_n)/M_n: " + ", ".join(f"{m}={r:.3f}" for m, r in ratios.items()))


def test_7_kernel_identities(verdict):
    problems = []
    grid = np.linspace(-math.pi, math.pi, 2**14 + 1)
    for scheme in (("sb", 200, 6.0), ("mbb", 200, 8), ("cbb", 120, 10), ("tbb", 150, 12)):
        total = integrate.trapezoid(kernel_K(weights_for(*scheme), grid), grid)
        if abs(total - 1) > 1e-6:
            problems.append(f"int K {scheme} = {total}")
    for phi in (0.0, 0.5, -0.5):
        m = Ar1Model(phi)
        for d in range(11):
            quad, _ = integrate.quad(lambda w: math.cos(d * w) * ar1_spectral_density(m, w) ** 2,
                                     -math.pi, math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
            if abs(quad - cov_product_sum(m, d)) > 1e-8:
                problems.append(f"cov products phi={phi} d={d}")
    for n in (5, 16, 50):
        for k in (0, 1, n // 2, n - 1, n):
            for om in (-2.5, 0.0, 0.4, 3.0):
                exact = (1 - k / n) * complex(math.cos(k * om), math.sin(k * om))
                if abs(fejer_convolution_quadrature(n, k, om) - exact) > 1e-6:
                    problems.append(f"fejer n={n} k={k} om={om}")
    for n, ell in ((10, 3.0), (97, 7.5), (1000, 1.2)):
        q = sb_weights(n, ell)
        if not np.array_equal(q, q[::-1]):
            problems.append(f"q symmetry n={n}")
    verdict("7", not problems, "all identities hold" if not problems else "; ".join(problems[:5]))


def test_8_asymptotics_coherence(verdict):
    m = Ar1Model(0.5)
    problems = []
    if variance_constant("mbb") / variance_constant("sb") != 2 / 3:
        problems.append("constant ratio")
    # one multiply and one divide: the ratio can sit an ulp away from fl(2/3)
    for n, ell in ((1000, 10), (12345, 3.7), (1e6, 100)):
        r = asymptotic_variance(m, "mbb", n, ell) / asymptotic_variance(m, "sb", n, ell)
        if not math.isclose(r, 2 / 3, rel_tol=4 * sys.float_info.epsilon, abs_tol=0.0):
            problems.append(f"2/3 ratio at n={n}: {r!r}")
    are = are_sb_vs_cbb()
    coherent = asymptotic_mse(m, "cbb", 1000, optimal_block(m, "cbb", 1000)) / asymptotic_mse(
        m, "sb", 1000, optimal_block(m, "sb", 1000))
    if abs(are - (2 / 3) ** (2 / 3)) > 1e-12 or abs(coherent - are) > 1e-12:
        problems.append(f"ARE {are} vs {coherent}")
    mins = [
        optimize.minimize_scalar(lambda ell, meth=meth: asymptotic_mse(m, meth, 1e6, ell), bounds=(1, 1e4),
                                 method="bounded", options={"xatol": 1e-10}).fun
        for meth in ("cbb", "sb")
    ]
    if abs(mins[0] / mins[1] - are) > 1e-6:
        problems.append(f"numeric ARE {mins[0] / mins[1]}")
    ell_opt = optimal_block(m, "sb", 1000)
    if abs(ell_opt - 12.114) > 1e-3:
        problems.append(f"ell_opt {ell_opt}")
    step = 0.001
    grid = np.arange(1.0, 1000.0, step)
    best = grid[np.argmin(asymptotic_mse(m, "sb", 1000, grid))]
    if abs(best - ell_opt) > step:
        problems.append(f"grid minimum {best}")
    verdict("8", not problems, f"ell_opt={ell_opt:.4f}, ARE={are:.7f}" if not problems else "; ".join(problems))


def test_9_byte_identical_across_workers(tmp_path, verdict):
    config = tmp_path / "det.json"
    config.write_text(json.dumps({"model": {"phi": -0.5}, "n_grid": [50, 200], "replications": 300,
                                  "master_seed": 99, "methods": ["sb", "nbb", "mbb", "cbb"]}))
    outputs = []
    for workers in ("1", "2", "4"):
        out = tmp_path / f"out{workers}"
        env = dict(os.environ, BLOCKBOOT_WORKERS=workers)
        res = subprocess.run([sys.executable, "-m", "blockboot", "simulate", "--config", str(config),
                              "--out", str(out)], env=env, capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        outputs.append((out / "report.csv").read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    verdict("9", ok, f"report.csv identical for BLOCKBOOT_WORKERS=1,2,4 ({len(outputs[0])} bytes)")
