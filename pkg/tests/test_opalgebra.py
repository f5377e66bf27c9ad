import numpy as np
import pytest

from artifact.opalgebra import (CMatrix, PauliLabel, PAULI_LABELS,
                                QubitIndex, embed_on_qubit, kron,
                                spectral_norm)


def test_cmatrix_round_trip_and_write_protection():
    arr = np.array([[1.0, 2.0j], [0.0, -1.0]])
    m = CMatrix.from_array(arr)
    assert m.shape == (2, 2)
    assert m.entries.dtype == np.complex128
    np.testing.assert_array_equal(np.asarray(m), arr)
    with pytest.raises(ValueError):
        m.entries[0, 0] = 5.0


def test_cmatrix_rejects_non_finite():
    with pytest.raises(ValueError):
        CMatrix.from_array(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        CMatrix.from_array(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_pauli_label_order_and_matrices():
    assert tuple(lab.name for lab in PAULI_LABELS) == ("I", "X", "Y", "Z")
    assert [int(lab) for lab in PAULI_LABELS] == [0, 1, 2, 3]
    x, y, z = (PauliLabel.X.matrix, PauliLabel.Y.matrix,
               PauliLabel.Z.matrix)
    np.testing.assert_allclose(x @ x, np.eye(2))
    np.testing.assert_allclose(y @ y, np.eye(2))
    np.testing.assert_allclose(x @ y, 1j * z)
    np.testing.assert_allclose(PauliLabel.I.matrix, np.eye(2))


def test_qubit_index_validation_and_flip():
    q = QubitIndex(j=2, n=8)
    assert q.num_index_bits == 3
    assert q.flip(0) == 2
    assert q.flip(7) == 5
    with pytest.raises(ValueError):
        QubitIndex(j=4, n=8)
    with pytest.raises(ValueError):
        QubitIndex(j=0, n=6)
    with pytest.raises(ValueError):
        QubitIndex(j=0, n=8).flip(3)


def test_embed_on_target_qubit():
    q = QubitIndex(j=0, n=4)
    z = embed_on_qubit(PauliLabel.Z, q).entries
    expected = np.kron(np.eye(4), PauliLabel.Z.matrix)
    np.testing.assert_allclose(z, expected)


def test_embed_on_index_qubit_weights():
    # bit j of the element has weight 2^(j-1); the output qubit is the
    # last tensor factor
    n = 8
    for j in (1, 2, 3):
        q = QubitIndex(j=j, n=n)
        x_emb = embed_on_qubit(PauliLabel.X, q).entries
        for x in range(n):
            src = 2 * x + 1
            dst = 2 * (x ^ (1 << (j - 1))) + 1
            assert x_emb[dst, src] == 1.0


def test_kron_matches_numpy():
    a = CMatrix.from_array(np.array([[1.0, 2.0], [3.0, 4.0]]))
    b = CMatrix.from_array(np.array([[0.0, 1.0j], [1.0, 0.0]]))
    np.testing.assert_allclose(kron(a, b).entries,
                               np.kron(a.entries, b.entries))


def test_spectral_norm_against_svd():
    rng = np.random.default_rng(4)
    m = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
    assert spectral_norm(m) == pytest.approx(
        np.linalg.svd(m, compute_uv=False)[0], abs=1e-13)
    assert spectral_norm(np.zeros((3, 3))) == 0.0
