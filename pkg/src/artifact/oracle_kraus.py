"""Kraus families of the noisy single-marked-element oracle.

The faultless oracle on Q splits into two pieces determined by the noisy
qubit position: a projector onto the subspace the oracle leaves alone and
a reflector carrying the sign action (`pi` and `xi` below). Sandwiching
the oracle between two depolarizing applications yields a 16-member Kraus
family; mixing that family by a block unitary compresses it to 8 members
whose labels (beta, P) separate a "no new record" branch (beta = 0) from a
"record written" branch (beta = 1). Closed-form coefficients of the
compressed family are implemented here together with their invariants.

Sign conventions for the beta = 1 operators follow the fixed source of
truth for this package (there is a global-phase freedom per operator that
the mixing table resolves one way; all tests pin that choice).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .opalgebra import PauliLabel, PAULI_LABELS, QubitIndex, embed_on_qubit
from .channels import KrausChannel

__all__ = [
    "OracleGeometry",
    "KrausCoefficients",
    "SignalingNoiseSpec",
    "MixingTable",
    "build_geometry",
    "kraus_coefficients",
    "build_G_family",
    "build_K_family",
    "mixing_table_blocks",
    "verify_coefficient_bounds",
    "negligent_kraus",
    "signaling_noise",
    "rate_grid",
    "format_check_line",
    "verify_mixing_table",
    "verify_geometry_commutation",
]

_GEOM_TOL = 1e-12


@dataclass(frozen=True)
class OracleGeometry:
    """Projector/reflector split of the faultless oracle for one marked
    element and one noisy qubit position.

    Invariants, enforced at construction within 1e-12:
      oracle = pi + xi          (pi leaves, xi flips-with-sign)
      identity = pi + xi @ xi
      pi is an orthogonal projector, xi is hermitian with xi^3 = xi.
    pi commutes with every Pauli embedded on the noisy qubit; xi commutes
    with I and Z there and anticommutes with X and Y.
    """

    n: int
    x: int
    qubit: QubitIndex
    pi: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.qubit.n != self.n:
            raise ValueError("qubit register size disagrees with n")
        if not 0 <= self.x < self.n:
            raise ValueError("marked element outside the domain")
        pi = np.ascontiguousarray(self.pi, dtype=np.complex128)
        xi = np.ascontiguousarray(self.xi, dtype=np.complex128)
        dim = 2 * self.n
        if pi.shape != (dim, dim) or xi.shape != (dim, dim):
            raise ValueError("geometry blocks must be 2n x 2n")
        eye = np.eye(dim)
        if np.abs(pi @ pi - pi).max() > _GEOM_TOL:
            raise ValueError("pi is not a projector")
        if np.abs(pi - pi.conj().T).max() > _GEOM_TOL:
            raise ValueError("pi is not hermitian")
        if np.abs(xi - xi.conj().T).max() > _GEOM_TOL:
            raise ValueError("xi is not hermitian")
        if np.abs(xi @ xi @ xi - xi).max() > _GEOM_TOL:
            raise ValueError("xi is not a partial reflection")
        if np.abs(pi + xi @ xi - eye).max() > _GEOM_TOL:
            raise ValueError("pi + xi^2 != identity")
        pi.setflags(write=False)
        xi.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "xi", xi)

    @property
    def oracle_matrix(self) -> np.ndarray:
        return self.pi + self.xi


def build_geometry(n: int, x: int, qubit: QubitIndex) -> OracleGeometry:
    """Construct the split for marked element x and noisy qubit position.

    Target position (j = 0): pi misses the two |x, y> levels; xi acts as
    +1 on |x, 0> and -1 on |x, 1>.
    Index positions (j >= 1): pi misses |x, 1> and its bit-j partner
    |x^j, 1>; xi is +1 on the partner and -1 on |x, 1>.
    """
    dim = 2 * n
    pi = np.eye(dim, dtype=np.complex128)
    xi = np.zeros((dim, dim), dtype=np.complex128)
    if qubit.j == 0:
        pi[2 * x, 2 * x] = 0.0
        pi[2 * x + 1, 2 * x + 1] = 0.0
        xi[2 * x, 2 * x] = 1.0
        xi[2 * x + 1, 2 * x + 1] = -1.0
    else:
        xf = qubit.flip(x)
        pi[2 * x + 1, 2 * x + 1] = 0.0
        pi[2 * xf + 1, 2 * xf + 1] = 0.0
        xi[2 * xf + 1, 2 * xf + 1] = 1.0
        xi[2 * x + 1, 2 * x + 1] = -1.0
    return OracleGeometry(n=n, x=x, qubit=qubit, pi=pi, xi=xi)


@dataclass(frozen=True)
class KrausCoefficients:
    """Closed-form weights (a_P, b_P, c_P) of the compressed family at one
    noise rate.

    K_{0,P} = sigma_P (a_P pi + b_P xi), K_{1,P} = sigma_P c_P xi.
    Enforced at construction: sum a^2 = 1 within 1e-12, sum b^2 <= 1 and
    sum c^2 <= 2 r within 1e-12, and b_X = b_Y = 0 exactly.
    """

    rate: float
    a: dict
    b: dict
    c: dict

    def __post_init__(self):
        r = self.rate
        sa = sum(v * v for v in self.a.values())
        sb = sum(v * v for v in self.b.values())
        sc = sum(v * v for v in self.c.values())
        if abs(sa - 1.0) > 1e-12:
            raise ValueError("sum of a^2 = %.17g is not 1" % sa)
        if sb > 1.0 + 1e-12:
            raise ValueError("sum of b^2 = %.17g exceeds 1" % sb)
        if sc > 2.0 * r + 1e-12:
            raise ValueError("sum of c^2 = %.17g exceeds 2r" % sc)
        if self.b["X"] != 0.0 or self.b["Y"] != 0.0:
            raise ValueError("b_X and b_Y must vanish identically")


def kraus_coefficients(rate: float) -> KrausCoefficients:
    if not 0.0 <= rate <= 1.0:
        raise ValueError("noise rate must lie in [0, 1]")
    r = rate
    s1 = math.sqrt(4.0 - 6.0 * r + 3.0 * r * r)
    a = {"I": s1 / 2.0}
    b = {"I": (2.0 - r) * (1.0 - r) / s1}
    c = {"I": r * math.sqrt(8.0 - 12.0 * r + 5.0 * r * r) / (2.0 * s1)}
    axyz = math.sqrt(r * (2.0 - r)) / 2.0
    for name in ("X", "Y", "Z"):
        a[name] = axyz
    b["X"] = 0.0
    b["Y"] = 0.0
    b["Z"] = (1.0 - r) * math.sqrt(r) / math.sqrt(2.0 - r)
    c["X"] = math.sqrt(r * (2.0 - r)) / 2.0
    c["Y"] = math.sqrt(r * (2.0 - r)) / 2.0
    c["Z"] = r * math.sqrt(4.0 - 3.0 * r) / (2.0 * math.sqrt(2.0 - r))
    return KrausCoefficients(rate=r, a=a, b=b, c=c)


def _depol_weight(name: str, r: float) -> float:
    if name == "I":
        return math.sqrt(4.0 - 3.0 * r) / 2.0
    return math.sqrt(r) / 2.0


def build_G_family(geom: OracleGeometry, rate: float) -> KrausChannel:
    """The 16 sandwich operators d_P d_P' sigma_P oracle sigma_P'.

    Labels are (after_pauli, before_pauli) name pairs in lexicographic
    order. Zero-weight members are kept as zero matrices.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("noise rate must lie in [0, 1]")
    oracle = geom.oracle_matrix
    embeds = {lab.name: embed_on_qubit(lab, geom.qubit).entries
              for lab in PAULI_LABELS}
    ops = []
    labels = []
    for after in PAULI_LABELS:
        for before in PAULI_LABELS:
            w = _depol_weight(after.name, rate) * _depol_weight(before.name, rate)
            ops.append(w * (embeds[after.name] @ oracle @ embeds[before.name]))
            labels.append((after.name, before.name))
    return KrausChannel(tuple(ops), tuple(labels), "exact_cptp")


def build_K_family(geom: OracleGeometry, rate: float) -> KrausChannel:
    """The compressed 8-member family with record labels (beta, P).

    beta = 0 carries a_P pi + b_P xi behind sigma_P; beta = 1 carries
    c_P xi behind sigma_P. Same channel as the sandwich family.
    """
    coef = kraus_coefficients(rate)
    embeds = {lab.name: embed_on_qubit(lab, geom.qubit).entries
              for lab in PAULI_LABELS}
    ops = []
    labels = []
    for beta in (0, 1):
        for lab in PAULI_LABELS:
            name = lab.name
            if beta == 0:
                core = coef.a[name] * geom.pi + coef.b[name] * geom.xi
            else:
                core = coef.c[name] * geom.xi
            ops.append(embeds[name] @ core)
            labels.append((beta, name))
    return KrausChannel(tuple(ops), tuple(labels), "exact_cptp")


# === mixing table ===

_TABLE_ROWS = {
    "I": (("I", "I"), ("X", "X"), ("Y", "Y"), ("Z", "Z")),
    "X": (("I", "X"), ("X", "I"), ("Y", "Z"), ("Z", "Y")),
    "Y": (("I", "Y"), ("Y", "I"), ("Z", "X"), ("X", "Z")),
    "Z": (("Z", "I"), ("I", "Z"), ("X", "Y"), ("Y", "X")),
}

TABLE_COLUMN_ROLES = ("beta1", "beta0", "null", "null")


@dataclass(frozen=True)
class MixingTable:
    """Four 4x4 unitary blocks turning the sandwich family into the
    compressed family.

    For block P with rows (after, before) as in `row_labels`, column 0
    combines the four sandwich operators into K_{1,P}, column 1 into
    K_{0,P}, and columns 2 and 3 annihilate the family. Each block is
    unitary at every rate.
    """

    rate: float
    blocks: dict
    row_labels: dict = field(default_factory=lambda: dict(_TABLE_ROWS))
    column_roles: tuple = TABLE_COLUMN_ROLES


def mixing_table_blocks(rate: float, allow_limit: bool = False) -> MixingTable:
    """Mixing blocks at one noise rate.

    At rate 0 the sandwich family collapses (every member with a Pauli
    factor has weight zero), so verifying the blocks against it is
    degenerate; the call is refused unless allow_limit is set, in which
    case the rate -> 0 limiting blocks are returned.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("noise rate must lie in [0, 1]")
    if rate == 0.0 and not allow_limit:
        raise ValueError(
            "mixing blocks are degenerate at rate 0; pass allow_limit=True "
            "for the limiting values")
    r = rate
    s1 = math.sqrt(4.0 - 6.0 * r + 3.0 * r * r)
    s2 = math.sqrt(8.0 - 12.0 * r + 5.0 * r * r)
    t = math.sqrt(2.0 - r)
    q = math.sqrt(4.0 - 3.0 * r)
    s = math.sqrt(r)
    rt2 = math.sqrt(2.0)
    blocks = {
        "I": np.array([
            [r * (4 - 3 * r) / (2 * s1 * s2), (4 - 3 * r) / (2 * s1),
             r / (rt2 * s2), 0],
            [-s2 / (2 * s1), r / (2 * s1), 0, 1 / rt2],
            [-s2 / (2 * s1), r / (2 * s1), 0, -1 / rt2],
            [r * r / (2 * s1 * s2), r / (2 * s1), -(4 - 3 * r) / (rt2 * s2), 0],
        ], dtype=np.complex128),
        "X": np.array([
            [-q / (2 * t), q / (2 * t), s / (rt2 * t), 0],
            [q / (2 * t), q / (2 * t), 0, s / (rt2 * t)],
            [-1j * s / (2 * t), -1j * s / (2 * t), 0, 1j * q / (rt2 * t)],
            [-1j * s / (2 * t), 1j * s / (2 * t), -1j * q / (rt2 * t), 0],
        ], dtype=np.complex128),
        "Y": np.array([
            [-q / (2 * t), q / (2 * t), s / (rt2 * t), 0],
            [q / (2 * t), q / (2 * t), 0, s / (rt2 * t)],
            [1j * s / (2 * t), -1j * s / (2 * t), 1j * q / (rt2 * t), 0],
            [1j * s / (2 * t), 1j * s / (2 * t), 0, -1j * q / (rt2 * t)],
        ], dtype=np.complex128),
        "Z": np.array([
            [s / (2 * t), q / (2 * t), 1 / rt2, 0],
            [s / (2 * t), q / (2 * t), -1 / rt2, 0],
            [1j * q / (2 * t), -1j * s / (2 * t), 0, 1 / rt2],
            [-1j * q / (2 * t), 1j * s / (2 * t), 0, 1 / rt2],
        ], dtype=np.complex128),
    }
    for m in blocks.values():
        m.setflags(write=False)
    return MixingTable(rate=rate, blocks=blocks)


def rate_grid() -> tuple:
    """Canonical noise-rate grid for verification sweeps: one percent steps
    across (0, 1) plus near-boundary points and the boundary 1 itself."""
    pts = [round(0.01 * k, 2) for k in range(1, 100)]
    pts.extend([1e-4, 1.0 - 1e-4, 1.0])
    return tuple(pts)


def format_check_line(check_id: str, params: str, ok: bool,
                      deviation: float) -> str:
    return "%s %s %s %.3e" % (check_id, params, "PASS" if ok else "FAIL",
                              deviation)


def verify_coefficient_bounds(rate: float) -> tuple[bool, list]:
    """Pointwise bound battery for the closed-form weights at one rate.

    Checks, each reported as `<check-id> <params> <status> <max-deviation>`
    where deviation is the amount by which the bound is exceeded (0 when
    satisfied, up to float dust):
      coef-sum-a       |sum a^2 - 1|
      coef-sum-b       max(sum b^2 - 1, 0)
      coef-sum-c       max(sum c^2 - 2r, 0)
      coef-cap-half    max over {a_I, b_I} of excess above 1 - r/2
      coef-cap-sqrt    max over the eight small weights of excess above
                       sqrt(r/2)
      coef-zero-bxy    |b_X| + |b_Y| (must be exactly 0)
    """
    coef = kraus_coefficients(rate)
    r = rate
    lines = []
    ok_all = True

    def emit(check_id, dev, tol):
        nonlocal ok_all
        good = dev <= tol
        ok_all = ok_all and good
        lines.append(format_check_line(check_id, "r=%.6g" % r, good, dev))

    sa = sum(v * v for v in coef.a.values())
    emit("coef-sum-a", abs(sa - 1.0), 1e-12)
    sb = sum(v * v for v in coef.b.values())
    emit("coef-sum-b", max(sb - 1.0, 0.0), 1e-12)
    sc = sum(v * v for v in coef.c.values())
    emit("coef-sum-c", max(sc - 2.0 * r, 0.0), 1e-12)
    cap_half = 1.0 - r / 2.0
    dev_half = max(coef.a["I"] - cap_half, coef.b["I"] - cap_half, 0.0)
    emit("coef-cap-half", dev_half, 1e-12)
    cap_sqrt = math.sqrt(r / 2.0)
    small = [coef.a["X"], coef.a["Y"], coef.a["Z"], coef.b["Z"],
             coef.c["I"], coef.c["X"], coef.c["Y"], coef.c["Z"]]
    dev_sqrt = max(max(v - cap_sqrt for v in small), 0.0)
    emit("coef-cap-sqrt", dev_sqrt, 1e-12)
    emit("coef-zero-bxy", abs(coef.b["X"]) + abs(coef.b["Y"]), 0.0)
    return ok_all, lines


def verify_mixing_table(geom: OracleGeometry, rate: float,
                        unitary_tol: float = 1e-12,
                        entry_tol: float = 1e-10) -> tuple[bool, list]:
    """Checks the mixing blocks against the two concrete families.

    Per block: unitarity within unitary_tol; column 0 recombines the
    four sandwich operators into the record-written member and column 1
    into the record-clean member, entrywise within entry_tol; columns 2
    and 3 recombine to zero within entry_tol. Returns (all passed,
    report lines). Refuses rate 0 like mixing_table_blocks does.
    """
    table = mixing_table_blocks(rate)
    g_fam = build_G_family(geom, rate)
    k_fam = build_K_family(geom, rate)
    g_ops = dict(zip(g_fam.labels, g_fam.kraus_ops))
    k_ops = dict(zip(k_fam.labels, k_fam.kraus_ops))
    params_base = "n=%d x=%d j=%d r=%.6g" % (geom.n, geom.x,
                                             geom.qubit.j, rate)
    lines = []
    ok_all = True

    def emit(check_id, params, dev, tol):
        nonlocal ok_all
        good = dev <= tol
        ok_all = ok_all and good
        lines.append(format_check_line(check_id, params, good, dev))

    eye4 = np.eye(4)
    for name, block in table.blocks.items():
        params = params_base + " block=%s" % name
        emit("table-unitary", params,
             float(np.abs(block.conj().T @ block - eye4).max()),
             unitary_tol)
        rows = table.row_labels[name]
        combos = [sum(block[i, col] * g_ops[rows[i]] for i in range(4))
                  for col in range(4)]
        emit("table-rebuild-written", params,
             float(np.abs(combos[0] - k_ops[(1, name)]).max()), entry_tol)
        emit("table-rebuild-clean", params,
             float(np.abs(combos[1] - k_ops[(0, name)]).max()), entry_tol)
        emit("table-null-columns", params,
             max(float(np.abs(combos[2]).max()),
                 float(np.abs(combos[3]).max())), entry_tol)
    return ok_all, lines


def verify_geometry_commutation(geom: OracleGeometry,
                                tol: float = 1e-10) -> tuple[bool, list]:
    """Commutation battery for the projector/reflector split.

    The projector commutes with every Pauli embedded on the noisy qubit;
    the reflector commutes with I and Z there and anticommutes with X
    and Y. Returns (all passed, report lines).
    """
    params = "n=%d x=%d j=%d" % (geom.n, geom.x, geom.qubit.j)
    lines = []
    ok_all = True

    def emit(check_id, dev):
        nonlocal ok_all
        good = dev <= tol
        ok_all = ok_all and good
        lines.append(format_check_line(check_id, params, good, dev))

    for lab in PAULI_LABELS:
        sig = embed_on_qubit(lab, geom.qubit).entries
        emit("geom-pi-commute-%s" % lab.name,
             float(np.abs(geom.pi @ sig - sig @ geom.pi).max()))
        if lab.name in ("I", "Z"):
            emit("geom-xi-commute-%s" % lab.name,
                 float(np.abs(geom.xi @ sig - sig @ geom.xi).max()))
        else:
            emit("geom-xi-anticommute-%s" % lab.name,
                 float(np.abs(geom.xi @ sig + sig @ geom.xi).max()))
    return ok_all, lines


def negligent_kraus(n: int, x: int, skip_probability: float) -> KrausChannel:
    """Two-member family of the oracle that silently skips each call.

    With probability `skip_probability` the call applies nothing; the
    caller cannot observe which branch happened. Mixing the two unitary
    branches by the rotation [[sqrt(1-p), sqrt(p)], [-sqrt(p), sqrt(1-p)]]
    yields record-labeled operators
        K_0 = I - 2 (1 - p) |x, 1><x, 1|
        K_1 = 2 sqrt(p (1 - p)) |x, 1><x, 1|
    returned with labels (0,) and (1,).
    """
    p = skip_probability
    if not 0.0 <= p <= 1.0:
        raise ValueError("skip probability must lie in [0, 1]")
    if not 0 <= x < n:
        raise ValueError("marked element outside the domain")
    dim = 2 * n
    k0 = np.eye(dim, dtype=np.complex128)
    k0[2 * x + 1, 2 * x + 1] = 1.0 - 2.0 * (1.0 - p)
    k1 = np.zeros((dim, dim), dtype=np.complex128)
    k1[2 * x + 1, 2 * x + 1] = 2.0 * math.sqrt(p * (1.0 - p))
    return KrausChannel((k0, k1), ((0,), (1,)), "exact_cptp")


@dataclass(frozen=True)
class SignalingNoiseSpec:
    """Parameters of the error-signaling noise: same qubit marginal as the
    depolarizing channel, plus a classical flag that records whether the
    error branch fired."""

    qubit: QubitIndex
    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("noise rate must lie in [0, 1]")


def signaling_noise(spec: SignalingNoiseSpec) -> KrausChannel:
    """Channel Q -> Q (x) flag. Flag 0 carries sqrt(1-r) identity; flag 1
    carries sqrt(r)/2 times each embedded Pauli. The flag marginal is
    Bernoulli(rate) for every input state, and tracing the flag out
    reproduces the plain depolarizing channel.

    Output ordering: the flag qubit is the least significant factor
    (row index = 2 q + flag).
    """
    r = spec.rate
    n = spec.qubit.n
    dim = 2 * n
    ops = []
    labels = []
    k = np.zeros((dim * 2, dim), dtype=np.complex128)
    k[0::2, :] = math.sqrt(1.0 - r) * np.eye(dim)
    ops.append(k)
    labels.append((0, "I"))
    for lab in PAULI_LABELS:
        k = np.zeros((dim * 2, dim), dtype=np.complex128)
        k[1::2, :] = (math.sqrt(r) / 2.0) * embed_on_qubit(lab, spec.qubit).entries
        ops.append(k)
        labels.append((1, lab.name))
    return KrausChannel(tuple(ops), tuple(labels), "exact_cptp")
