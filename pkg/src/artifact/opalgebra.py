"""Dense complex matrix primitives for multi-qubit operator algebra.

Conventions used throughout the package:

* The query register Q holds log2(n) index qubits followed by one target
  qubit. A computational basis state |x, y> (x in [0, n), y in {0, 1}) has
  flat index 2*x + y. Tensor slots are ordered with the index qubits most
  significant first and the target qubit last.
* Qubit positions are addressed by a 1-based weight convention on the
  index part: position j >= 1 refers to the bit of x with weight 2**(j-1),
  and position 0 refers to the target qubit.
* All matrices are dense numpy complex128. No sparse representations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CMatrix",
    "PauliLabel",
    "QubitIndex",
    "kron",
    "embed_on_qubit",
    "spectral_norm",
]


def _as_2d_complex(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError("matrix entries must be two-dimensional")
    return arr


@dataclass(frozen=True)
class CMatrix:
    """Validated dense complex matrix with row-major entries.

    Constructors reject NaN and Inf entries. The entry array is marked
    read-only so shared instances cannot drift.
    """

    rows: int
    cols: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_2d_complex(self.entries)
        if arr.shape != (self.rows, self.cols):
            raise ValueError(
                "entries shape %s does not match (%d, %d)"
                % (arr.shape, self.rows, self.cols))
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("non-finite matrix entry")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_array(cls, arr) -> "CMatrix":
        arr = _as_2d_complex(arr)
        return cls(arr.shape[0], arr.shape[1], arr)

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.entries.astype(dtype)
        return self.entries

    @property
    def shape(self):
        return (self.rows, self.cols)


class PauliLabel(enum.IntEnum):
    """Single-qubit Pauli labels with the fixed order I < X < Y < Z."""

    I = 0
    X = 1
    Y = 2
    Z = 3

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI_MATS[self.value]

    def __str__(self):
        return self.name


_PAULI_MATS = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)
for _m in _PAULI_MATS:
    _m.setflags(write=False)

PAULI_LABELS = (PauliLabel.I, PauliLabel.X, PauliLabel.Y, PauliLabel.Z)


@dataclass(frozen=True)
class QubitIndex:
    """Position of one qubit in the query register for domain size n.

    j = 0 is the target qubit; j in {1, .., log2 n} addresses the index
    bit of weight 2**(j-1). n must be a power of two, at least 2.
    """

    j: int
    n: int

    def __post_init__(self):
        n = self.n
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError("domain size must be a power of two >= 2")
        if not 0 <= self.j <= n.bit_length() - 1:
            raise ValueError("qubit position %d out of range for n=%d"
                             % (self.j, n))

    @property
    def num_index_bits(self) -> int:
        return self.n.bit_length() - 1

    def flip(self, x: int) -> int:
        """Index x with this qubit's bit toggled. Identity demand for j=0
        is a caller error since the target is not part of x."""
        if self.j == 0:
            raise ValueError("target qubit does not address an index bit")
        return x ^ (1 << (self.j - 1))


def _entries(m) -> np.ndarray:
    if isinstance(m, CMatrix):
        return m.entries
    return _as_2d_complex(m)


def kron(a, b) -> CMatrix:
    """Kronecker product, first factor most significant."""
    return CMatrix.from_array(np.kron(_entries(a), _entries(b)))


def embed_on_qubit(label: PauliLabel, qubit: QubitIndex) -> CMatrix:
    """The single-qubit Pauli acting on one slot of Q, identity elsewhere.

    Returns a 2n x 2n matrix following the slot order documented in the
    module header. Built by direct index arithmetic rather than repeated
    kron so the hot callers stay cheap.
    """
    n = qubit.n
    dim = 2 * n
    label = PauliLabel(label)
    if label is PauliLabel.I:
        return CMatrix.from_array(np.eye(dim, dtype=np.complex128))
    out = np.zeros((dim, dim), dtype=np.complex128)
    if qubit.j == 0:
        pm = label.matrix
        for x in range(n):
            out[2 * x: 2 * x + 2, 2 * x: 2 * x + 2] = pm
        return CMatrix.from_array(out)
    bit = 1 << (qubit.j - 1)
    for x in range(n):
        v = (x >> (qubit.j - 1)) & 1
        xf = x ^ bit
        for y in (0, 1):
            col = 2 * x + y
            if label is PauliLabel.X:
                out[2 * xf + y, col] = 1.0
            elif label is PauliLabel.Y:
                # sigma_Y |v> = i (-1)^v |1-v>
                out[2 * xf + y, col] = 1j * (-1.0) ** v
            else:
                out[col, col] = (-1.0) ** v
    return CMatrix.from_array(out)


def spectral_norm(m) -> float:
    """Largest singular value.

    Relative accuracy 1e-12 or better on conditioned inputs; the all-zero
    and empty matrices report exactly 0.0.
    """
    arr = _entries(m)
    if arr.size == 0 or not arr.any():
        return 0.0
    return float(np.linalg.svd(arr, compute_uv=False)[0])
