import math

import numpy as np
import pytest

from artifact.opalgebra import CMatrix
from artifact.progress import (AlgorithmStep, ExtendedSpace, claim_norms,
                               corollary_bound_check,
                               extended_oracle_isometry,
                               grover_diffusion_step, initial_no_jump_state,
                               purified_sector_weights, run_progress_trace,
                               step_bound, success_probability)


def _grover_schedule(space, steps):
    return [grover_diffusion_step(space)] * steps


def test_space_validation():
    with pytest.raises(ValueError):
        ExtendedSpace(16, "bogus")
    with pytest.raises(ValueError):
        ExtendedSpace(6, "target")
    with pytest.raises(ValueError):
        ExtendedSpace(16, "index", j=0)
    with pytest.raises(ValueError):
        ExtendedSpace(16, "index", j=5)
    with pytest.raises(ValueError):
        ExtendedSpace(16, "target", j=1)
    with pytest.raises(ValueError):
        ExtendedSpace(16, "target", w_dim=0)
    assert ExtendedSpace(16, "negligent").record_dim == 2
    assert ExtendedSpace(16, "target").record_dim == 8


def test_call_isometry_columns():
    for scenario, j in (("target", 0), ("index", 1), ("negligent", 0)):
        space = ExtendedSpace(4, scenario, j=j)
        v = extended_oracle_isometry(space, 0.3).entries
        assert v.shape == (space.tq_dim * space.record_dim, space.tq_dim)
        dev = np.abs(v.conj().T @ v - np.eye(space.tq_dim)).max()
        assert dev <= 1e-12
    with pytest.raises(ValueError):
        extended_oracle_isometry(ExtendedSpace(32, "target"), 0.3)


def test_step_bounds():
    assert step_bound(ExtendedSpace(16, "target"), 0.25) == 500.0
    assert step_bound(ExtendedSpace(16, "negligent"), 0.5) == pytest.approx(
        1.75, abs=1e-15)
    assert step_bound(ExtendedSpace(16, "target"), 0.0) == math.inf


def test_claim_norms_frozen_main():
    rep = claim_norms(ExtendedSpace(16, "target"), 0.5)
    assert rep.ok
    vals = {e.name: e.value for e in rep.entries}
    assert vals["act_from_start"] == pytest.approx(
        0.3753718394567484, rel=1e-12)
    assert vals["act_from_act"] == pytest.approx(
        0.6467207804432634, rel=1e-12)
    assert vals["written_from_act"] == pytest.approx(
        0.747017880833996, rel=1e-12)
    assert vals["written_from_start"] == pytest.approx(
        0.1928791874526149, rel=1e-12)
    assert vals["persist_leak"] == 0.0
    assert vals["persist_cross"] == 0.0
    assert vals["passive_invariance"] == 0.0


def test_claim_norms_frozen_index_small_n():
    rep = claim_norms(ExtendedSpace(4, "index", j=2), 0.5)
    assert rep.ok
    vals = {e.name: e.value for e in rep.entries}
    assert "act_from_act" not in vals
    assert any("n >= 12" in note for note in rep.notices)
    assert vals["act_from_start"] == pytest.approx(
        0.6725927091345492, rel=1e-12)
    assert vals["written_from_act"] == pytest.approx(
        0.7715167498104595, rel=1e-12)
    assert vals["written_from_start"] == pytest.approx(
        0.5455447255899809, rel=1e-12)
    assert rep.dense_agreement <= 1e-10


def test_claim_norms_frozen_negligent():
    rep = claim_norms(ExtendedSpace(4, "negligent"), 0.5)
    assert rep.ok
    vals = {e.name: e.value for e in rep.entries}
    assert vals["act_from_start"] == pytest.approx(
        math.sqrt(3) / 4, rel=1e-12)
    assert vals["act_from_act"] == pytest.approx(0.25, rel=1e-12)
    assert vals["written_from_act"] == pytest.approx(
        math.sqrt(3) / 2, rel=1e-12)
    assert vals["written_from_start"] == pytest.approx(0.5, rel=1e-12)
    assert rep.dense_agreement <= 1e-10


def test_claim_norms_rejects_boundary_rates():
    with pytest.raises(ValueError):
        claim_norms(ExtendedSpace(16, "target"), 0.0)
    with pytest.raises(ValueError):
        claim_norms(ExtendedSpace(16, "target"), 1.0)


def test_corollary_bound():
    rep = corollary_bound_check(12, 1.0)
    assert rep.lhs == 37.0 / 72.0
    assert rep.ok
    rep = corollary_bound_check(1024, 0.01)
    assert rep.slack == pytest.approx(0.007728974389441423, rel=1e-10)
    assert rep.ok
    with pytest.raises(ValueError):
        corollary_bound_check(8, 0.5)


def test_trace_starts_exactly_at_zero():
    for scenario, rate in (("target", 0.25), ("index", 0.4),
                           ("negligent", 0.5)):
        space = ExtendedSpace(8, scenario, j=1 if scenario == "index" else 0)
        trace = run_progress_trace(space, rate, _grover_schedule(space, 2))
        row0 = trace.rows[0]
        assert row0.psi == 0.0
        assert row0.wA == 1.0
        assert (row0.wB_act, row0.wB_pas, row0.wC) == (0.0, 0.0, 0.0)


def test_trace_frozen_main_grover():
    space = ExtendedSpace(16, "target")
    trace = run_progress_trace(space, 0.25, _grover_schedule(space, 40))
    assert len(trace.rows) == 41
    assert trace.final_psi == pytest.approx(1.1542790357004953, rel=1e-12)
    assert trace.max_delta_psi == pytest.approx(9.405800762882404, rel=1e-12)
    bound = step_bound(space, 0.25)
    assert trace.max_delta_psi <= bound
    q = success_probability(space, 0.25, _grover_schedule(space, 40))
    assert q == pytest.approx(0.5000016184922166, rel=1e-12)
    assert q <= trace.final_psi + 2.0 / 16 + 1e-8


def test_trace_frozen_negligent_grover():
    space = ExtendedSpace(16, "negligent")
    trace = run_progress_trace(space, 0.5, _grover_schedule(space, 40))
    assert trace.final_psi == pytest.approx(0.9999754185518179, rel=1e-12)
    assert trace.max_delta_psi == pytest.approx(0.1922607421874999, rel=1e-12)
    assert trace.max_delta_psi <= step_bound(space, 0.5)


def test_success_probability_noiseless_grover():
    space = ExtendedSpace(16, "target")
    q = success_probability(space, 0.0, _grover_schedule(space, 3))
    assert q == pytest.approx(math.sin(7 * math.asin(0.25)) ** 2, abs=1e-12)


def test_trace_csv_shape():
    space = ExtendedSpace(4, "target")
    trace = run_progress_trace(space, 0.5, _grover_schedule(space, 5))
    text = trace.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "t,psi,wA,wB_act,wB_pas,wC,delta_psi,bound"
    assert len(lines) == 7
    first = lines[1].split(",")
    assert len(first) == 8
    assert first[0] == "0" and first[1] == "0"


def test_no_jump_matches_purified_route():
    for scenario, rate in (("target", 0.5), ("index", 0.3),
                           ("negligent", 0.5)):
        space = ExtendedSpace(4, scenario, j=1 if scenario == "index" else 0)
        schedule = _grover_schedule(space, 3)
        trace = run_progress_trace(space, rate, schedule)
        dual = purified_sector_weights(space, rate, schedule)
        assert len(dual) == len(trace.rows)
        worst = 0.0
        for row, (wa, wact, wpas, wc) in zip(trace.rows, dual):
            worst = max(worst, abs(row.wA - wa), abs(row.wB_act - wact),
                        abs(row.wB_pas - wpas), abs(row.wC - wc))
        assert worst <= 1e-9, (scenario, worst)


def test_purified_route_memory_cap():
    space = ExtendedSpace(16, "target")
    with pytest.raises(ValueError):
        purified_sector_weights(space, 0.5, _grover_schedule(space, 8))


def test_state_trace_never_grows():
    space = ExtendedSpace(8, "target")
    state = initial_no_jump_state(space)
    assert state.trace == pytest.approx(1.0, abs=1e-12)
    trace = run_progress_trace(space, 0.5, _grover_schedule(space, 6))
    # wC is the cumulative written-record weight, monotone by construction
    wc = [row.wC for row in trace.rows]
    assert all(b >= a - 1e-12 for a, b in zip(wc, wc[1:]))


def test_step_rejects_nonunitary():
    with pytest.raises(ValueError):
        AlgorithmStep(unitary=CMatrix.from_array(np.ones((4, 4))))
