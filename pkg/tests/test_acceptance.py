"""Acceptance gate: ten top-level guarantees, one pass/fail line each.

Every test measures the advertised quantity with its tolerance pinned in
the assertion and registers a single summary line (printed in the
"acceptance criteria" section at the end of the run).  Two guarantees are
not met by the current search heuristics; their tests fail honestly with
the measured values on record instead of loosening the thresholds:

* criterion 6, second clause: the un-normalized witness statistic grows
  1.4879x from n = 4 to n = 1024, short of the required 1.5x;
* criterion 8: the fitted growth exponent is 0.2617, below [0.35, 0.65].

Both shortfalls stem from the same asymmetry: at n = 4 the search is
exhaustive-exact while at large n it reaches only the balanced-tree
family, whose value per added level shrinks as the level count grows.
"""

import json
import math
import os
import time
from collections import defaultdict

import numpy as np
import pytest

from weyl_lab import (SearchConfig, brute_force_A, estimate_A,
                      estimate_A_sweep, fit_growth)
from weyl_lab.cli import main
from weyl_lab.dyadic import SampledFunction, lp_norm, make_grid
from weyl_lab.lemmas import (check_block_domination, check_convolution_inequality,
                             check_cz_kernel, check_good_lambda,
                             check_indicator_decay,
                             check_interaction_coarse_by_fine,
                             check_interaction_fine_by_coarse,
                             check_kernel_block, check_littlewood_paley,
                             check_vector_maximal, pooled_good_lambda)
from weyl_lab.operators import (IndexChain, chain_maximal, coefficients,
                                dyadic_maximal, haar_partial, haar_square,
                                haar_square_coefficients, haar_transform,
                                hl_maximal, random_haar_polynomial,
                                random_step_function)
from weyl_lab.systems import build_franklin, build_haar, verify_wavelet_type

SEED = 20260814


def _register(log, line):
    log.append(line)
    print(line)


@pytest.fixture(scope="module")
def sng_sweep():
    """Shared growth experiment: sng estimates on the depth-11 Haar pool."""
    system = build_haar(2048, make_grid(11))
    cfg = SearchConfig(variant="sng", p=2.0, n=4, restarts=32, iterations=40,
                       seed=SEED)
    t0 = time.monotonic()
    records = estimate_A_sweep(system, (4, 16, 64, 256, 1024), cfg, threads=4)
    return records, time.monotonic() - t0


# ---------------------------------------------------------------------------
# 1. Haar construction: orthonormality and Parseval


def test_criterion_01_haar_orthonormal_parseval(acceptance_log):
    t0 = time.monotonic()
    grid = make_grid(12)
    system = build_haar(1024, grid)
    V = system.values
    gram = (V @ V.T) / grid.cells
    gram_err = float(np.max(np.abs(gram - np.eye(system.size))))

    parseval_err = 0.0
    for i in range(100):
        coarse = random_step_function(make_grid(10), pieces=16, seed=SEED + i)
        f = SampledFunction(grid, np.repeat(coarse.values, 4))
        c = coefficients(f, system)
        e2 = float(np.mean(f.values ** 2))
        parseval_err = max(parseval_err, abs(e2 - float(c @ c)) / e2)

    elapsed = time.monotonic() - t0
    line = (f"criterion 1 PASS ({elapsed:.1f}s < 10s): haar N=1024 J=12 "
            f"gram_err={gram_err:.2e} <= 1e-12, "
            f"parseval_err={parseval_err:.2e} <= 1e-10 on 100 steps")
    if not (gram_err <= 1e-12 and parseval_err <= 1e-10 and elapsed < 10.0):
        line = line.replace("PASS", "FAIL", 1)
    _register(acceptance_log, line)
    assert gram_err <= 1e-12
    assert parseval_err <= 1e-10
    assert elapsed < 10.0


# ---------------------------------------------------------------------------
# 2. Franklin construction: orthonormality, admissibility, refinement


def test_criterion_02_franklin_admissibility(acceptance_log):
    t0 = time.monotonic()
    franklin = build_franklin(256, make_grid(14), delta=0.9, alpha=1.0)
    V = franklin.values
    gram_err = float(np.max(np.abs(V @ V.T / franklin.grid.cells
                                   - np.eye(franklin.size))))
    report = verify_wavelet_type(franklin, 0.9, 1.0)

    refined = build_franklin(256, make_grid(15), delta=0.9, alpha=1.0)
    report15 = verify_wavelet_type(refined, 0.9, 1.0)
    decay_drift = report15.decay_constant / report.decay_constant
    holder_drift = report15.holder_constant / report.holder_constant

    haar14 = verify_wavelet_type(build_haar(256, make_grid(14)), 0.9, 1.0)
    haar15 = verify_wavelet_type(build_haar(256, make_grid(15)), 0.9, 1.0)
    haar_growth = haar15.holder_constant / haar14.holder_constant

    elapsed = time.monotonic() - t0
    ok = (gram_err <= 1e-8 and report.passed
          and 1 / 1.1 <= decay_drift <= 1.1 and 1 / 1.1 <= holder_drift <= 1.1
          and haar_growth >= 1.3 and elapsed < 120.0)
    line = (f"criterion 2 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 120s): "
            f"franklin N=256 J=14 gram_err={gram_err:.2e} <= 1e-8, "
            f"conditions passed={report.passed}, refit drift "
            f"decay={decay_drift:.4f} holder={holder_drift:.4f} in [0.909,1.1], "
            f"haar holder growth={haar_growth:.3f} >= 1.3")
    _register(acceptance_log, line)
    assert gram_err <= 1e-8
    assert report.passed
    assert 1 / 1.1 <= decay_drift <= 1.1
    assert 1 / 1.1 <= holder_drift <= 1.1
    assert haar_growth >= 1.3
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# 3. Convolution bound: 1000 random pairs plus the equality pair


def test_criterion_03_convolution_bound(acceptance_log):
    t0 = time.monotonic()
    worst = 0.0
    for i in range(1000):
        rng = np.random.default_rng([SEED, i])
        a = rng.standard_normal(int(rng.integers(1, 33)))
        b = rng.standard_normal(int(rng.integers(1, 33)))
        worst = max(worst, check_convolution_inequality(a, b).ratio_sup)
    equality = check_convolution_inequality((1.0, 1.0), (1.0,)).ratio_sup

    elapsed = time.monotonic() - t0
    ok = worst <= 1.0 + 1e-12 and equality == 1.0 and elapsed < 1.0
    line = (f"criterion 3 {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s < 1s): "
            f"1000 random pairs worst ratio={worst:.15f} <= 1+1e-12, "
            f"equality pair a=(1,1), b=(1) ratio={equality}")
    _register(acceptance_log, line)
    assert worst <= 1.0 + 1e-12
    assert equality == 1.0
    assert elapsed < 1.0


# ---------------------------------------------------------------------------
# 4. Inequality battery on Franklin, stable under grid refinement


def _lemma_battery(level):
    grid = make_grid(level)
    system = build_franklin(128, grid, delta=0.9, alpha=1.0)
    rng = np.random.default_rng(SEED)
    signs = rng.choice([-1.0, 1.0], size=system.size)
    out = {}
    for m in range(1, 8):
        out[f"kernel_block.m{m}"] = check_kernel_block(system, m).ratio_sup
    family = [random_haar_polynomial(grid, 5, seed=100 + i) for i in range(8)]
    out["vector_maximal"] = check_vector_maximal(family, 2.0, 1.0).ratio_sup
    for m in range(1, 8):
        dec = check_indicator_decay(system, m, (0.25, 0.5))
        out[f"indicator.edge.m{m}"] = dec["edge_decay"].ratio_sup
        out[f"indicator.far.m{m}"] = dec["far_field"].ratio_sup
    for m in range(1, 8):
        for n in range(m, 8):
            out[f"fine_by_coarse.m{m}n{n}"] = check_interaction_fine_by_coarse(
                system, signs, m, n).ratio_sup
        for n in range(1, m + 1):
            out[f"coarse_by_fine.m{m}n{n}"] = check_interaction_coarse_by_fine(
                system, signs, m, n).ratio_sup
    lp = check_littlewood_paley(
        system, random_haar_polynomial(grid, 5, seed=7), 2.0)
    for key, est in lp.items():
        out[f"littlewood_paley.{key}"] = est.ratio_sup
    for key, est in check_block_domination(system, signs, 2).items():
        out[f"block_domination.{key}"] = est.ratio_sup
    for key, est in check_cz_kernel(system).items():
        out[f"cz_kernel.{key}"] = est.ratio_sup
    return out


def test_criterion_04_lemma_battery_stability(acceptance_log):
    t0 = time.monotonic()
    coarse = _lemma_battery(11)
    fine = _lemma_battery(12)
    assert set(coarse) == set(fine)
    finite = all(np.isfinite(v) for v in list(coarse.values()) + list(fine.values()))
    drifts = {k: fine[k] / coarse[k] for k in coarse}
    violations = {k: r for k, r in drifts.items() if not 0.75 <= r <= 1.25}

    elapsed = time.monotonic() - t0
    ok = finite and not violations and elapsed < 600.0
    line = (f"criterion 4 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 600s): "
            f"franklin N=128, {len(coarse)} constants all finite={finite}, "
            f"refinement drift J=11->12 in [{min(drifts.values()):.4f}, "
            f"{max(drifts.values()):.4f}] within [0.75, 1.25], "
            f"violations={len(violations)}")
    _register(acceptance_log, line)
    assert finite
    assert not violations, violations
    assert elapsed < 600.0


# ---------------------------------------------------------------------------
# 5. Good-lambda comparison: pooled regression and exact monotonicity


def test_criterion_05_good_lambda_pooled(acceptance_log):
    t0 = time.monotonic()
    grid = make_grid(11)
    reports = []
    for i in range(100):
        f = random_haar_polynomial(grid, (i % 10) + 1, seed=3000 + i)
        reports.append(check_good_lambda(f, quantiles=20))
    c, r2, _table = pooled_good_lambda(reports)

    monotone_violations = 0
    for rep in reports:
        by_lam = defaultdict(list)
        for eps, lam, lhs, _rhs, _ratio in rep.rows:
            by_lam[lam].append((eps, lhs))
        for pairs in by_lam.values():
            pairs.sort()
            for (_e1, l1), (_e2, l2) in zip(pairs, pairs[1:]):
                if l2 < l1:
                    monotone_violations += 1

    elapsed = time.monotonic() - t0
    ok = c > 0.0 and r2 >= 0.5 and monotone_violations == 0 and elapsed < 120.0
    line = (f"criterion 5 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 120s): "
            f"100 polynomials, pooled fit c={c:.4f} > 0, r2={r2:.4f} >= 0.5, "
            f"eps-monotonicity violations={monotone_violations} (exact)")
    _register(acceptance_log, line)
    assert c > 0.0
    assert r2 >= 0.5
    assert monotone_violations == 0
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# 6. Flat-ratio law: random pairs stay bounded, witnesses must grow


def test_criterion_06_flat_ratio_law(acceptance_log, sng_sweep):
    t0 = time.monotonic()
    grid = make_grid(14)
    systems = {"haar": build_haar(1024, grid),
               "franklin": build_franklin(1024, grid)}
    growth = {}
    for name, system in systems.items():
        stat = {}
        for n in (4, 64, 1024):
            best = {p: 0.0 for p in (1.5, 2.0, 3.0)}
            for trial in range(50):
                rng = np.random.default_rng([SEED, n, trial])
                support = rng.permutation(np.arange(1, system.size + 1))[:n]
                g = rng.standard_normal(n)
                f = SampledFunction(grid, g @ system.values[support - 1])
                cm = chain_maximal(f, system, IndexChain.prefixes(support))
                for p in best:
                    ratio = lp_norm(cm, p) / (math.sqrt(math.log2(n + 1))
                                              * lp_norm(f, p))
                    best[p] = max(best[p], ratio)
            stat[n] = best
        for p in (1.5, 2.0, 3.0):
            growth[(name, p)] = stat[1024][p] / stat[4][p]
    worst_pair_growth = max(growth.values())

    records, sweep_elapsed = sng_sweep
    v4, v1024 = records[0].best_value, records[-1].best_value
    witness_growth = v1024 / v4

    elapsed = time.monotonic() - t0 + sweep_elapsed
    pairs_ok = worst_pair_growth <= 2.0
    witness_ok = witness_growth >= 1.5
    ok = pairs_ok and witness_ok and elapsed < 600.0
    line = (f"criterion 6 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 600s): "
            f"normalized random-pair growth n=4->1024 max={worst_pair_growth:.4f}"
            f" <= 2 over 2 systems x 3 exponents; un-normalized witness growth "
            f"{v1024:.5f}/{v4:.5f}={witness_growth:.4f} "
            f"{'>=' if witness_ok else '< required'} 1.5")
    _register(acceptance_log, line)
    assert pairs_ok, growth
    assert elapsed < 600.0
    if not witness_ok:
        pytest.fail(
            f"witness growth {witness_growth:.4f} < 1.5: the n=4 estimate "
            f"({v4:.5f}) is exhaustive-exact while the n=1024 estimate "
            f"({v1024:.5f}) is the converged balanced-tree fixed point; "
            f"deeper localized families were measured lower (1.86-1.91), "
            f"so the shortfall is structural, not a missed seed",
            pytrace=False)


# ---------------------------------------------------------------------------
# 7. Search oracle equivalence at brute-forceable size


def test_criterion_07_search_oracle_equivalence(acceptance_log):
    t0 = time.monotonic()
    system = build_haar(32, make_grid(5))
    cfg = SearchConfig(variant="sng", p=2.0, n=4, restarts=8, iterations=40,
                       seed=SEED, active=(2, 3, 4, 5))
    found = estimate_A(system, cfg)
    oracle = brute_force_A(system, cfg)
    value_equal = found.best_value == oracle.best_value
    witness_equal = found.witness == oracle.witness

    elapsed = time.monotonic() - t0
    ok = value_equal and witness_equal and elapsed < 30.0
    line = (f"criterion 7 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 30s): "
            f"search vs 4! x 2^4 brute force on indices (2,3,4,5): value "
            f"{found.best_value:.6f} equal={value_equal}, "
            f"witness equal={witness_equal} (exact)")
    _register(acceptance_log, line)
    assert value_equal
    assert witness_equal
    assert elapsed < 30.0


# ---------------------------------------------------------------------------
# 8. Growth exponent of the estimate sequence


def test_criterion_08_growth_exponent(acceptance_log, sng_sweep):
    records, elapsed = sng_sweep
    fit = fit_growth(records)
    slope = fit["slope"]
    values = ", ".join(f"{r.best_value:.5f}" for r in records)

    ok = 0.35 <= slope <= 0.65 and elapsed < 900.0
    line = (f"criterion 8 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 900s): "
            f"n in (4,16,64,256,1024), 32 restarts, values [{values}], "
            f"fitted slope={slope:.4f} {'in' if ok else 'outside'} "
            f"[0.35, 0.65] (r2={fit['r2']:.4f})")
    _register(acceptance_log, line)
    assert elapsed < 900.0
    if not 0.35 <= slope <= 0.65:
        pytest.fail(
            f"slope {slope:.4f} outside [0.35, 0.65]: the n=4 value 1.31143 "
            f"is already 61% of the aligned-family ceiling at depth 11, so "
            f"the remaining headroom spreads over three decades of n and "
            f"flattens the fitted exponent; raising it would need either a "
            f"deeper index pool than the 4096-cell cap allows or a value at "
            f"n=1024 above the measured family ceiling (~2.16)",
            pytrace=False)


# ---------------------------------------------------------------------------
# 9. Operator identities


def test_criterion_09_operator_identities(acceptance_log):
    t0 = time.monotonic()
    grid = make_grid(9)

    avg_err = 0.0
    for i in range(20):
        f = random_step_function(grid, pieces=16, seed=SEED + i)
        for n in range(0, 10):
            a = haar_partial(f, n, method="average")
            b = haar_partial(f, n, method="coeffs")
            avg_err = max(avg_err, float(np.max(np.abs(a.values - b.values))))

    dominated = True
    for i in range(100):
        if i % 2 == 0:
            f = random_step_function(grid, pieces=12, seed=2 * SEED + i)
        else:
            f = random_haar_polynomial(grid, 6, seed=2 * SEED + i)
        md = dyadic_maximal(f).values
        m1 = hl_maximal(f, 1.0, mode="exact").values
        m2 = hl_maximal(f, 2.0, mode="exact").values
        dominated = dominated and bool(np.all(md <= m1 + 1e-12))
        dominated = dominated and bool(np.all(np.abs(f.values) <= m1 + 1e-12))
        dominated = dominated and bool(np.all(np.abs(f.values) <= m2 + 1e-12))

    sign_exact = True
    small_grid = make_grid(3)
    rng = np.random.default_rng(SEED)
    base = rng.standard_normal(small_grid.cells)
    s_base = haar_square_coefficients(small_grid, base).values
    for bits in range(1 << small_grid.cells):
        lam = np.array([1.0 if bits >> k & 1 else -1.0
                        for k in range(small_grid.cells)])
        flipped = haar_square_coefficients(small_grid, base * lam).values
        sign_exact = sign_exact and bool(np.array_equal(s_base, flipped))
    for i in range(100):
        rng = np.random.default_rng([SEED, i])
        f = random_haar_polynomial(grid, 6, seed=3 * SEED + i)
        b = haar_transform(f)
        lam = rng.choice([-1.0, 1.0], size=grid.cells)
        sa = haar_square(f).values
        sb = haar_square_coefficients(grid, b * lam).values
        sign_exact = sign_exact and bool(np.array_equal(sa, sb))

    elapsed = time.monotonic() - t0
    ok = avg_err <= 1e-12 and dominated and sign_exact and elapsed < 60.0
    line = (f"criterion 9 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 60s): "
            f"partial-sum averaging vs coefficients err={avg_err:.2e} <= 1e-12; "
            f"Md <= M1 and |f| <= Mq on 100 inputs: {dominated}; "
            f"square function sign-invariant (256 vertices + 100 random): "
            f"{sign_exact} (exact)")
    _register(acceptance_log, line)
    assert avg_err <= 1e-12
    assert dominated
    assert sign_exact
    assert elapsed < 60.0


# ---------------------------------------------------------------------------
# 10. CLI determinism: same seed twice, threads 1 vs 8


def _run_cli_case(base, tag, args_fn, threads):
    """Run one subcommand into base/tag with fixed basenames; return bytes."""
    work = base / tag
    work.mkdir(parents=True)
    argv, outputs = args_fn(work)
    assert main(argv + ["--threads", str(threads)]) == 0
    return [
        (name, (work / name).read_bytes()) for name in outputs
    ]


def test_criterion_10_cli_determinism(acceptance_log, tmp_path, capsys):
    t0 = time.monotonic()
    source = tmp_path / "shared"
    source.mkdir()
    system_path = source / "sys.wts"
    assert main(["build", "--system", "haar", "--n", "64", "--levels", "8",
                 "--out", str(system_path)]) == 0
    table_path = source / "table.csv"
    assert main(["estimate", "--system", str(system_path), "--variant", "sng",
                 "--n", "2,4,8,16", "--restarts", "2", "--seed", str(SEED),
                 "--report", str(table_path)]) == 0

    cases = {
        "build": lambda d: (
            ["build", "--system", "franklin", "--n", "16", "--levels", "9",
             "--delta", "0.9", "--alpha", "1.0", "--out", str(d / "out.wts")],
            ["out.wts"]),
        "verify": lambda d: (
            ["verify", "--in", str(system_path), "--delta", "0.9",
             "--alpha", "1.0", "--report", str(d / "report.json")],
            ["report.json"]),
        "op": lambda d: (
            ["op", "--in", str(system_path), "--f", "haarpoly:5,4",
             "--op", "square", "--out", str(d / "out.csv")],
            ["out.csv"]),
        "check": lambda d: (
            ["check", "--lemma", "CWW", "--system", str(system_path),
             "--params", '{"count": 4, "levels": 5}', "--seed", str(SEED),
             "--report", str(d / "report.json")],
            ["report.json"]),
        "estimate": lambda d: (
            ["estimate", "--system", str(system_path), "--variant", "sng",
             "--n", "2,4", "--restarts", "4", "--seed", str(SEED),
             "--report", str(d / "table.csv")],
            ["table.csv", "table.witnesses.json"]),
        "fit": lambda d: (
            ["fit", "--in", str(table_path),
             "--report", str(d / "report.json")],
            ["report.json"]),
    }

    mismatches = []
    for sub, args_fn in cases.items():
        first = _run_cli_case(tmp_path, f"{sub}-a", args_fn, 1)
        again = _run_cli_case(tmp_path, f"{sub}-b", args_fn, 1)
        wide = _run_cli_case(tmp_path, f"{sub}-t8", args_fn, 8)
        if first != again:
            mismatches.append(f"{sub}: repeat run differs")
        if first != wide:
            mismatches.append(f"{sub}: threads 1 vs 8 differ")
    capsys.readouterr()

    elapsed = time.monotonic() - t0
    ok = not mismatches and elapsed < 300.0
    line = (f"criterion 10 {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < 300s): "
            f"6 subcommands, same seed twice and threads 1 vs 8 "
            f"byte-identical, mismatches={mismatches or 'none'}")
    _register(acceptance_log, line)
    assert not mismatches, mismatches
    assert elapsed < 300.0
