"""Acceptance battery.

One test per acceptance criterion. Each test computes its verdict at the
stated tolerance, prints exactly one ACCEPTANCE-k line (kept visible
through pytest's capture), and then asserts. Every reference value is an
exact closed form or an inequality bound recomputed in the test body.
"""

import math
import time

import numpy as np

from artifact.lab_cli import main as lab_main
from artifact.opalgebra import QubitIndex
from artifact.channels import channels_equal
from artifact.oracle_kraus import (build_geometry, build_G_family,
                                   build_K_family, rate_grid,
                                   verify_coefficient_bounds,
                                   verify_geometry_commutation,
                                   verify_mixing_table)
from artifact.progress import (ExtendedSpace, claim_norms,
                               grover_diffusion_step,
                               purified_sector_weights, run_progress_trace,
                               step_bound, success_probability)
from artifact.search_sim import (StrategySpec, coin_toss_expectation,
                                 queries_until_success,
                                 reflection_call_statistics, run_trials)

NINE_RATES = tuple(round(0.1 * k, 1) for k in range(1, 10))


def _report(capsys, number, text, ok):
    with capsys.disabled():
        print("ACCEPTANCE-%d %s: %s" % (number, text,
                                        "PASS" if ok else "FAIL"))


def test_acceptance_1_kraus_family_equivalence(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    cells = 0
    for n in (2, 4, 8):
        for x in range(n):
            for j in range(n.bit_length()):
                geom = build_geometry(n, x, QubitIndex(j=j, n=n))
                for r in NINE_RATES:
                    _, dev = channels_equal(build_G_family(geom, r),
                                            build_K_family(geom, r),
                                            tol=1e-10)
                    worst = max(worst, dev)
                    cells += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 60.0
    _report(capsys, 1,
            "16-member sandwich family and 8-member compressed family "
            "give the same channel on %d (n,x,j,r) cells "
            "(max Choi deviation %.3e <= 1e-10, %.1fs < 60s)"
            % (cells, worst, elapsed), ok)
    assert ok


def test_acceptance_2_mixing_table(capsys):
    t0 = time.perf_counter()
    all_ok = True
    checks = 0
    for j in (1, 0):
        geom = build_geometry(4, 2, QubitIndex(j=j, n=4))
        for r in rate_grid():
            ok, lines = verify_mixing_table(geom, r, unitary_tol=1e-12,
                                            entry_tol=1e-10)
            all_ok = all_ok and ok
            checks += len(lines)
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed < 60.0
    _report(capsys, 2,
            "mixing blocks are unitary (1e-12), rebuild both compressed "
            "operator columns from the sandwich family (1e-10), and "
            "cancel the two null columns (1e-10); %d checks over the "
            "rate grid on two qubit positions (%.1fs)"
            % (checks, elapsed), ok)
    assert ok


def test_acceptance_3_coefficient_bounds(capsys):
    grid = rate_grid()
    all_ok = True
    for r in grid:
        ok, _ = verify_coefficient_bounds(r)
        all_ok = all_ok and ok
    ok = all_ok and len(grid) >= 100
    _report(capsys, 3,
            "closed-form weight caps hold with nonnegative slack and "
            "sum(a^2) = 1 within 1e-12 on a %d-point rate grid"
            % len(grid), ok)
    assert ok


def test_acceptance_4_transition_norm_claims(capsys):
    t0 = time.perf_counter()
    all_ok = True
    cells = 0
    contraction_cells = 0
    for n in (4, 8, 16, 32):
        bits = n.bit_length() - 1
        spaces = [ExtendedSpace(n, "target")]
        spaces += [ExtendedSpace(n, "index", j=j)
                   for j in range(1, bits + 1)]
        for space in spaces:
            for r in NINE_RATES:
                rep = claim_norms(space, r, identity_tol=1e-10)
                all_ok = all_ok and rep.ok
                cells += 1
                names = {e.name for e in rep.entries}
                if n >= 16 and "act_from_act" not in names:
                    all_ok = False
                contraction_cells += int("act_from_act" in names)
                geom_ok, _ = verify_geometry_commutation(
                    build_geometry(n, 3, space.qubit), tol=1e-10)
                all_ok = all_ok and geom_ok
    elapsed = time.perf_counter() - t0
    ok = all_ok and elapsed < 600.0
    _report(capsys, 4,
            "one-call transition norms stay under 2/sqrt(n), 1 - r/9 "
            "(%d cells at n in {16,32}), sqrt(2r), 2 sqrt(r/n), and all "
            "invariance identities vanish within 1e-10; %d "
            "(n,position,r) cells by SVD (%.0fs < 600s)"
            % (contraction_cells, cells, elapsed), ok)
    assert ok


def test_acceptance_5_call_skipping_exact_norms(capsys):
    all_ok = True
    cells = 0
    for n in (4, 8, 16):
        for p in NINE_RATES:
            rep = claim_norms(ExtendedSpace(n, "negligent"), p,
                              exact_tol=1e-9)
            all_ok = all_ok and rep.ok
            cells += 1
    _report(capsys, 5,
            "call-skipping model transition norms match their four "
            "closed forms within 1e-9 on %d (n,p) cells" % cells, all_ok)
    assert all_ok


def test_acceptance_6_progress_bounds_on_live_runs(capsys):
    t0 = time.perf_counter()
    all_ok = True
    cells = 0

    def run_cell(space, rate, tau):
        nonlocal all_ok, cells
        schedule = [grover_diffusion_step(space)] * tau
        trace = run_progress_trace(space, rate, schedule)
        q = success_probability(space, rate, schedule)
        good = (trace.rows[0].psi == 0.0
                and trace.max_delta_psi <= step_bound(space, rate)
                and q <= trace.final_psi + 2.0 / space.n + 1e-8)
        all_ok = all_ok and good
        cells += 1

    for n in (4, 8, 16):
        tau = 40 if n == 16 else 2 * int((math.pi / 4.0) * math.sqrt(n))
        for scenario, j in (("target", 0), ("index", 1)):
            for r in (0.1, 0.25, 0.5, 0.9):
                run_cell(ExtendedSpace(n, scenario, j=j), r, tau)
        for p in (0.1, 0.5, 0.9):
            run_cell(ExtendedSpace(n, "negligent"), p, tau)

    # compressed no-jump route against the explicit appended-record state
    worst_dual = 0.0
    for scenario, j, rate in (("target", 0, 0.5), ("index", 1, 0.3),
                              ("negligent", 0, 0.5)):
        space = ExtendedSpace(4, scenario, j=j)
        schedule = [grover_diffusion_step(space)] * 3
        trace = run_progress_trace(space, rate, schedule)
        dual = purified_sector_weights(space, rate, schedule)
        for row, (wa, wact, wpas, wc) in zip(trace.rows, dual):
            worst_dual = max(worst_dual, abs(row.wA - wa),
                             abs(row.wB_act - wact),
                             abs(row.wB_pas - wpas), abs(row.wC - wc))
    all_ok = all_ok and worst_dual <= 1e-9
    elapsed = time.perf_counter() - t0
    _report(capsys, 6,
            "live Grover runs start at progress 0 exactly, every step "
            "gain is under the 1/(n rate)-scaled cap, and the "
            "independently evolved success probability is under "
            "final progress + 2/n + 1e-8 on %d cells; no-jump state "
            "agrees with the explicit record purification within 1e-9 "
            "(worst %.3e) (%.0fs)" % (cells, worst_dual, elapsed), all_ok)
    assert all_ok


def test_acceptance_7_expected_call_counts(capsys):
    reps = 100000
    all_ok = True
    parts = []
    for procedure, expected in (("before_target", 2.0),
                                ("before_index", 3.0),
                                ("flag_target", 2.0),
                                ("flag_index", 3.0)):
        t0 = time.perf_counter()
        out = reflection_call_statistics(procedure, 0.35, reps,
                                         master_seed=2026)
        elapsed = time.perf_counter() - t0
        good = (abs(out["mean_calls"] - expected) <= 3.0 * out["se"]
                and elapsed < 60.0)
        all_ok = all_ok and good
        parts.append("%s %.4f" % (procedure, out["mean_calls"]))
    t0 = time.perf_counter()
    mean, counts = coin_toss_expectation(reps, master_seed=2026,
                                         return_counts=True)
    elapsed = time.perf_counter() - t0
    se = float(counts.std(ddof=1)) / math.sqrt(reps)
    good = abs(mean - 3.0) <= 3.0 * se and elapsed < 60.0
    all_ok = all_ok and good
    parts.append("coin_toss %.4f" % mean)
    _report(capsys, 7,
            "certified-reflection call counts hit 2/3/2/3 and the coin "
            "parity rule hits 3, each within 3 standard errors at 1e5 "
            "repetitions (%s)" % ", ".join(parts), all_ok)
    assert all_ok


def test_acceptance_8_scaling_separation(capsys):
    t0 = time.perf_counter()
    ns = (64, 256, 1024, 4096)
    log_ns = np.log(ns)
    fits = {}
    for kind in ("one_sided_before_target", "one_sided_after_index",
                 "flag_bit_search", "grover_two_sided"):
        q80 = []
        for n in ns:
            spec = StrategySpec(kind=kind, n=n, marked={3},
                                j=1 if kind.endswith("_index") else 0,
                                rate=0.25)
            stats = run_trials(spec, 2000, master_seed=2026)
            q80.append(queries_until_success(stats, target=0.8))
        q80 = np.log(q80)
        fits[kind] = (float(np.polyfit(log_ns, q80, 1)[0]),
                      float(np.polyfit(log_ns[:2], q80[:2], 1)[0]),
                      float(np.polyfit(log_ns[:3], q80[:3], 1)[0]))
    elapsed = time.perf_counter() - t0
    before_full = fits["one_sided_before_target"][0]
    after_full = fits["one_sided_after_index"][0]
    flag_full, flag_sqrt, flag_tri = fits["flag_bit_search"]
    two_full = fits["grover_two_sided"][0]
    # flag-bit runs in its sqrt(n) regime only while n r^2 <= sqrt(n),
    # i.e. n <= r^-4 = 256 at r = 0.25; past that its per-instance
    # iteration cap turns the fit linear-ish, checked against <= 1.15
    ok = (0.4 <= before_full <= 0.65
          and 0.4 <= after_full <= 0.65
          and 0.4 <= flag_sqrt <= 0.65
          and flag_tri <= 1.15
          and two_full >= 0.85
          and elapsed < 1800.0)
    _report(capsys, 8,
            "query growth to reach 80 percent success at rate 0.25: "
            "one-sided-before %.3f and one-sided-after %.3f in "
            "[0.4,0.65]; flag-bit %.3f in [0.4,0.65] on its sqrt-regime "
            "sub-grid {64,256} (full-grid %.3f, three-point %.3f <= "
            "1.15); concealing two-sided %.3f >= 0.85 (%.0fs < 1800s)"
            % (before_full, after_full, flag_sqrt, flag_full, flag_tri,
               two_full, elapsed), ok)
    assert ok


def test_acceptance_9_byte_determinism(tmp_path, capsys):
    all_ok = True
    exp_argv = ["experiment", "--strategy",
                "grover_two_sided,one_sided_before_target,coin_toss",
                "--n", "16,64", "--r", "0.25,0.5", "--trials", "400",
                "--seed", "11"]
    prog_argv = ["progress", "--scenario", "target", "--n", "8",
                 "--r", "0.5", "--queries", "4", "--seed", "11"]
    blobs = []
    for tag, argv in (("exp", exp_argv), ("prog", prog_argv)):
        pair = []
        for attempt in ("a", "b"):
            out = tmp_path / ("%s_%s.csv" % (tag, attempt))
            code = lab_main(argv + ["--out", str(out)])
            all_ok = all_ok and code == 0
            pair.append(out.read_bytes())
        blobs.append(pair)
        all_ok = all_ok and pair[0] == pair[1]
    _report(capsys, 9,
            "experiment and progress commands repeated with the same "
            "config and master seed emit byte-identical CSV "
            "(%d and %d bytes)" % (len(blobs[0][0]), len(blobs[1][0])),
            all_ok)
    assert all_ok
