"""Quantum channels in Kraus form, with Choi-matrix comparison.

A channel maps density operators on a d_in-dimensional space to density
operators on a d_out-dimensional space. Kraus operators may be rectangular
(d_out x d_in). Operators with zero coefficient are kept in the list as
explicit zero matrices so positional labels stay aligned across parameter
values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .opalgebra import CMatrix, PAULI_LABELS, QubitIndex, _entries

__all__ = [
    "KrausChannel",
    "ChoiMatrix",
    "apply",
    "compose",
    "choi",
    "channels_equal",
    "depolarizing_noise",
    "phase_oracle",
    "DEFAULT_CHOI_TOL",
]

DEFAULT_CHOI_TOL = 1e-10
_COMPLETENESS_KINDS = ("exact_cptp", "sub_cptp")
_COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    """A channel given by its Kraus operators.

    completeness:
      * "exact_cptp": sum_i K_i^dag K_i = I within 1e-10 (trace preserving)
      * "sub_cptp":   sum_i K_i^dag K_i <= I within 1e-10 (trace non-increasing)
    """

    kraus_ops: tuple
    labels: tuple | None = None
    completeness: str = "exact_cptp"

    def __post_init__(self):
        if self.completeness not in _COMPLETENESS_KINDS:
            raise ValueError("unknown completeness kind %r" % (self.completeness,))
        ops = tuple(np.ascontiguousarray(_entries(k)) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        for k in ops:
            if k.shape != shape:
                raise ValueError("Kraus operators must share one shape")
            if not np.all(np.isfinite(k.view(np.float64))):
                raise ValueError("non-finite Kraus entry")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(ops):
                raise ValueError("label count %d != operator count %d"
                                 % (len(labels), len(ops)))
            object.__setattr__(self, "labels", labels)
        gram = sum(k.conj().T @ k for k in ops)
        eye = np.eye(shape[1])
        if self.completeness == "exact_cptp":
            dev = np.abs(gram - eye).max()
            if dev > _COMPLETENESS_TOL:
                raise ValueError("completeness violated by %.3e" % dev)
        else:
            w = np.linalg.eigvalsh(eye - gram)
            if w.min() < -_COMPLETENESS_TOL:
                raise ValueError("trace increase of %.3e" % -w.min())

    @property
    def d_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass(frozen=True)
class ChoiMatrix:
    """Choi matrix sum_i vec(K_i) vec(K_i)^dag, vec = row-major flatten.

    Equals (Channel (x) Id) applied to the unnormalized maximally entangled
    pair on the input space. Hermitian and positive semidefinite by
    construction; validated within 1e-9.
    """

    matrix: np.ndarray = field(repr=False)
    d_in: int = 0
    d_out: int = 0

    def __post_init__(self):
        m = np.ascontiguousarray(_entries(self.matrix))
        if m.shape != (self.d_in * self.d_out, self.d_in * self.d_out):
            raise ValueError("Choi matrix shape %s does not match dims (%d, %d)"
                             % (m.shape, self.d_in, self.d_out))
        if np.abs(m - m.conj().T).max() > 1e-9:
            raise ValueError("Choi matrix not hermitian")
        w = np.linalg.eigvalsh(m)
        if w.min() < -1e-9:
            raise ValueError("Choi matrix not PSD (min eig %.3e)" % w.min())
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def apply(channel: KrausChannel, rho) -> np.ndarray:
    """Apply the channel to a density matrix."""
    rho = _entries(rho)
    d = channel.d_in
    if rho.shape != (d, d):
        raise ValueError("state dimension %s does not match channel input %d"
                         % (rho.shape, d))
    out = np.zeros((channel.d_out, channel.d_out), dtype=np.complex128)
    for k in channel.kraus_ops:
        out += k @ rho @ k.conj().T
    return out


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """The channel `second after first`. Labels pair up as tuples."""
    if first.d_out != second.d_in:
        raise ValueError("cannot compose: inner dimensions %d != %d"
                         % (first.d_out, second.d_in))
    ops = []
    labels = []
    have_labels = first.labels is not None and second.labels is not None
    for i, b in enumerate(second.kraus_ops):
        for j, a in enumerate(first.kraus_ops):
            ops.append(b @ a)
            if have_labels:
                labels.append((second.labels[i], first.labels[j]))
    kind = ("exact_cptp"
            if first.completeness == second.completeness == "exact_cptp"
            else "sub_cptp")
    return KrausChannel(tuple(ops), tuple(labels) if have_labels else None, kind)


def choi(channel: KrausChannel) -> ChoiMatrix:
    flat = np.stack([k.reshape(-1) for k in channel.kraus_ops])
    m = flat.T @ flat.conj()
    return ChoiMatrix(m, d_in=channel.d_in, d_out=channel.d_out)


def channels_equal(a: KrausChannel, b: KrausChannel,
                   tol: float = DEFAULT_CHOI_TOL) -> tuple[bool, float]:
    """Choi-matrix equality test. Returns (equal, max entrywise deviation).

    Insensitive to Kraus representation choice; this is the only sanctioned
    way to compare channels in this package.
    """
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise ValueError("channel dimensions differ")
    dev = float(np.abs(choi(a).matrix - choi(b).matrix).max())
    return dev <= tol, dev


def depolarizing_noise(qubit: QubitIndex, rate: float) -> KrausChannel:
    """Single-qubit depolarizing noise on one slot of Q, strength rate.

    With probability `rate` the qubit is replaced by the maximally mixed
    state. Kraus weights: sqrt(4 - 3 rate)/2 on identity, sqrt(rate)/2 on
    each embedded Pauli. All four operators are always present, zero-weight
    ones included, so labels align across rates.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("noise rate must lie in [0, 1]")
    from .opalgebra import embed_on_qubit
    wI = np.sqrt(4.0 - 3.0 * rate) / 2.0
    wP = np.sqrt(rate) / 2.0
    ops = []
    labels = []
    for lab in PAULI_LABELS:
        w = wI if lab.name == "I" else wP
        ops.append(w * embed_on_qubit(lab, qubit).entries)
        labels.append(lab.name)
    return KrausChannel(tuple(ops), tuple(labels), "exact_cptp")


def phase_oracle(n: int, marked) -> KrausChannel:
    """Unitary phase-flip oracle: |x, y> +-> (-1)^{f(x) y} |x, y>.

    f is the indicator of `marked` inside [0, n). Returned as a channel
    with a single unitary Kraus operator.
    """
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError("domain size must be a power of two >= 2")
    marked = frozenset(int(x) for x in marked)
    for x in marked:
        if not 0 <= x < n:
            raise ValueError("marked element %d outside [0, %d)" % (x, n))
    diag = np.ones(2 * n, dtype=np.complex128)
    for x in marked:
        diag[2 * x + 1] = -1.0
    return KrausChannel((np.diag(diag),), ("oracle",), "exact_cptp")
