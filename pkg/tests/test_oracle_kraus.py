import math

import numpy as np
import pytest

from artifact.opalgebra import QubitIndex
from artifact.channels import apply, channels_equal, depolarizing_noise
from artifact.oracle_kraus import (SignalingNoiseSpec, build_geometry,
                                   build_G_family, build_K_family,
                                   kraus_coefficients, negligent_kraus,
                                   rate_grid, signaling_noise,
                                   mixing_table_blocks,
                                   verify_coefficient_bounds,
                                   verify_geometry_commutation,
                                   verify_mixing_table)


def _geom(n=4, x=2, j=1):
    return build_geometry(n, x, QubitIndex(j=j, n=n))


def test_geometry_splits_the_oracle():
    for j in (0, 1, 2):
        g = _geom(j=j)
        oracle = g.oracle_matrix
        # sign flip exactly on the marked pair
        diag = np.real(np.diag(oracle))
        assert diag[2 * 2 + 1] == -1.0
        assert (diag == 1.0).sum() == 7
        np.testing.assert_allclose(g.pi @ g.pi, g.pi, atol=1e-14)
        np.testing.assert_allclose(g.pi + g.xi @ g.xi, np.eye(8),
                                   atol=1e-14)
        np.testing.assert_allclose(g.xi @ g.xi @ g.xi, g.xi, atol=1e-14)


def test_geometry_commutation_battery():
    for n in (2, 4, 8):
        for x in range(n):
            for j in range(n.bit_length()):
                ok, lines = verify_geometry_commutation(
                    build_geometry(n, x, QubitIndex(j=j, n=n)))
                assert ok, lines


def test_coefficients_frozen_forms():
    r = 0.5
    c = kraus_coefficients(r)
    s1 = math.sqrt(4 - 6 * r + 3 * r * r)
    assert c.a["I"] == pytest.approx(s1 / 2, abs=1e-15)
    assert c.b["I"] == pytest.approx((2 - r) * (1 - r) / s1, abs=1e-15)
    assert c.c["I"] == pytest.approx(
        r * math.sqrt(8 - 12 * r + 5 * r * r) / (2 * s1), abs=1e-15)
    assert c.a["X"] == pytest.approx(math.sqrt(r * (2 - r)) / 2, abs=1e-15)
    assert c.b["X"] == 0.0 and c.b["Y"] == 0.0
    assert c.b["Z"] == pytest.approx((1 - r) * math.sqrt(r)
                                     / math.sqrt(2 - r), abs=1e-15)
    assert c.c["Z"] == pytest.approx(r * math.sqrt(4 - 3 * r)
                                     / (2 * math.sqrt(2 - r)), abs=1e-15)


def test_coefficient_bounds_over_grid():
    for r in rate_grid():
        ok, lines = verify_coefficient_bounds(r)
        assert ok, [ln for ln in lines if "FAIL" in ln]


def test_g_and_k_families_same_channel_sample():
    for (n, x, j, r) in ((2, 1, 0, 0.3), (4, 2, 1, 0.5), (8, 5, 3, 0.8)):
        geom = build_geometry(n, x, QubitIndex(j=j, n=n))
        same, dev = channels_equal(build_G_family(geom, r),
                                   build_K_family(geom, r))
        assert same and dev <= 1e-10, (n, x, j, r, dev)


def test_k_family_labels_and_count():
    fam = build_K_family(_geom(), 0.5)
    assert len(fam.kraus_ops) == 8
    assert fam.labels[:4] == ((0, "I"), (0, "X"), (0, "Y"), (0, "Z"))
    assert fam.labels[4:] == ((1, "I"), (1, "X"), (1, "Y"), (1, "Z"))


def test_g_family_zero_members_kept():
    fam = build_G_family(_geom(), 0.0)
    assert len(fam.kraus_ops) == 16
    nonzero = [lab for lab, k in zip(fam.labels, fam.kraus_ops)
               if np.abs(k).max() > 1e-15]
    assert nonzero == [("I", "I")]


def test_mixing_table_frozen_cell_and_refusal():
    table = mixing_table_blocks(0.5)
    assert table.blocks["I"][1, 1].real == pytest.approx(
        0.1889822365046136, abs=1e-15)
    with pytest.raises(ValueError):
        mixing_table_blocks(0.0)
    limit = mixing_table_blocks(0.0, allow_limit=True)
    for block in limit.blocks.values():
        dev = np.abs(block.conj().T @ block - np.eye(4)).max()
        assert dev <= 1e-12


def test_mixing_table_verification_sample():
    for r in (0.1, 0.5, 0.9, 1.0):
        for j in (0, 1):
            ok, lines = verify_mixing_table(_geom(j=j), r)
            assert ok, [ln for ln in lines if "FAIL" in ln]


def test_negligent_kraus_frozen_weight():
    fam = negligent_kraus(4, 2, 0.3)
    assert fam.labels == ((0,), (1,))
    k1 = fam.kraus_ops[1]
    assert float(np.abs(k1).max()) == pytest.approx(
        0.91651513899116799, abs=1e-15)
    assert k1[2 * 2 + 1, 2 * 2 + 1].real == pytest.approx(
        2 * math.sqrt(0.3 * 0.7), abs=1e-15)


def test_negligent_against_convex_mixture():
    # the two record-labeled operators realize apply-with-prob-(1-p)
    n, x, p = 4, 1, 0.35
    fam = negligent_kraus(n, x, p)
    rng = np.random.default_rng(3)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    oracle = np.eye(8, dtype=np.complex128)
    oracle[2 * x + 1, 2 * x + 1] = -1.0
    direct = p * rho + (1 - p) * (oracle @ rho @ oracle.conj().T)
    np.testing.assert_allclose(apply(fam, rho), direct, atol=1e-12)


def test_signaling_noise_flag_marginal_frozen():
    n, r = 4, 0.35
    q = QubitIndex(j=1, n=n)
    ch = signaling_noise(SignalingNoiseSpec(qubit=q, rate=r))
    rng = np.random.default_rng(5)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    out = apply(ch, rho)
    # flag marginal: trace over Q of the flag-diagonal blocks
    diag = np.real(np.diag(out))
    p_flag1 = diag[1::2].sum()
    assert p_flag1 == pytest.approx(r, abs=1e-12)
    # two independent sides: joint flag distribution at rate 0.35
    probs = np.outer([1 - r, r], [1 - r, r])
    np.testing.assert_allclose(
        probs, [[0.4225, 0.2275], [0.2275, 0.1225]], atol=1e-15)


def test_signaling_traces_back_to_depolarizing():
    n, r = 2, 0.6
    q = QubitIndex(j=0, n=n)
    sig = signaling_noise(SignalingNoiseSpec(qubit=q, rate=r))
    plain = depolarizing_noise(q, r)
    rng = np.random.default_rng(6)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    big = apply(sig, rho)
    traced = big.reshape(4, 2, 4, 2).trace(axis1=1, axis2=3)
    np.testing.assert_allclose(traced, apply(plain, rho), atol=1e-12)
