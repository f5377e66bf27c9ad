"""Monte-Carlo trajectory simulator and the concrete search strategies.

Noise is unraveled into pure-state trajectories: a depolarizing event
applies a uniformly random Pauli (identity included) on the noisy qubit,
a call-skipping event drops the oracle application, and the signaling
flavor additionally reveals one classical flag per noise side. Classical
control (mid-run measurement, certified-reflection loops, early
stopping) runs in ordinary Python around the state vector.

Strategies keep the smallest faithful state: full query register for the
concealing two-sided model, index-register amplitudes for procedures
that reinitialize the noisy qubit every call, half-space amplitudes for
the paired-instance index procedures.

Reproducibility: every trial owns a counter-based generator seeded by
(master_seed, trial_index), so trial sets are order-independent and
byte-stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "STRATEGY_KINDS",
    "LOOP_CAP_FACTOR",
    "Trajectory",
    "StrategySpec",
    "TrajectoryOutcome",
    "RunStatistics",
    "RUN_CSV_HEADER",
    "LoopCapExceeded",
    "trial_rng",
    "wilson_interval",
    "noisy_oracle_trajectory_step",
    "grover_iterations",
    "grover_run",
    "one_sided_after",
    "one_sided_before",
    "coin_toss_expectation",
    "flag_bit_reflection",
    "flag_bit_search",
    "run_strategy",
    "run_trials",
    "reflection_call_statistics",
    "queries_until_success",
]

STRATEGY_KINDS = (
    "grover_faultless",
    "grover_two_sided",
    "one_sided_after_target",
    "one_sided_after_index",
    "one_sided_before_target",
    "one_sided_before_index",
    "flag_bit_search",
    "negligent_grover",
)

# loop caps convert astronomically unlikely infinite loops into
# diagnosable aborts
LOOP_CAP_FACTOR = 64

RUN_CSV_HEADER = ("strategy,n,r,j,trials,success_rate,ci_lo,ci_hi,"
                  "mean_queries,se_queries,seed")


class LoopCapExceeded(RuntimeError):
    """A certified-reflection loop ran past LOOP_CAP_FACTOR times its
    expected length; probability of a legitimate occurrence is below
    2^-60, so this indicates a defect or a broken RNG."""


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Counter-based per-trial generator; independent of trial order."""
    seq = np.random.SeedSequence((master_seed, trial_index))
    return np.random.Generator(np.random.Philox(seed=seq))


def wilson_interval(successes: int, trials: int, z: float = 1.96):
    """95 percent score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials
                         + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class Trajectory:
    """One pure-state sample path with its own RNG stream."""

    state: np.ndarray
    rng: np.random.Generator
    query_count: int = 0
    flag_log: list = field(default_factory=list)

    def check_norm(self):
        nrm = float(np.linalg.norm(self.state))
        if abs(nrm - 1.0) > 1e-10:
            raise AssertionError("trajectory norm drifted to %.17g" % nrm)


@dataclass(frozen=True)
class StrategySpec:
    """Parameters of one search strategy instance.

    rate means the depolarizing rate for the noisy kinds, the skip
    probability for negligent_grover, and the per-side flag probability
    for flag_bit_search. iterations/instances override the built-in
    schedule constants when set.
    """

    kind: str
    n: int
    marked: frozenset
    j: int = 0
    rate: float = 0.0
    iterations: int = None
    instances: int = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError("unknown strategy kind %r" % (self.kind,))
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two, at least 2")
        marked = frozenset(int(x) for x in self.marked)
        if not all(0 <= x < self.n for x in marked):
            raise ValueError("marked elements outside the domain")
        object.__setattr__(self, "marked", marked)
        bits = self.n.bit_length() - 1
        if self.kind.endswith("_index"):
            if not 1 <= self.j <= bits:
                raise ValueError("index kinds require 1 <= j <= log2(n)")
        elif not 0 <= self.j <= bits:
            raise ValueError("j out of range")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must lie in [0, 1]")
        if self.iterations is not None and self.iterations < 0:
            raise ValueError("iterations override must be nonnegative")
        if self.instances is not None and self.instances < 1:
            raise ValueError("instances override must be positive")


@dataclass(frozen=True)
class TrajectoryOutcome:
    success: bool
    queries: int
    candidate: int = None
    aborted_instances: int = 0


@dataclass(frozen=True)
class RunStatistics:
    """Aggregate over independent trials of one strategy."""

    strategy: str
    n: int
    rate: float
    j: int
    trials: int
    successes: int
    success_rate: float
    ci_lo: float
    ci_hi: float
    mean_queries: float
    se_queries: float
    master_seed: int
    query_histogram: dict

    def __post_init__(self):
        if not 0.0 <= self.success_rate <= 1.0:
            raise ValueError("success rate outside [0, 1]")

    def csv_row(self) -> str:
        return ",".join((
            self.strategy, "%d" % self.n, "%.17g" % self.rate,
            "%d" % self.j, "%d" % self.trials, "%.17g" % self.success_rate,
            "%.17g" % self.ci_lo, "%.17g" % self.ci_hi,
            "%.17g" % self.mean_queries, "%.17g" % self.se_queries,
            "%d" % self.master_seed))


# === elementary state operations (full query register, dimension 2n) ===

def _apply_pauli(state: np.ndarray, n: int, j: int, pauli: int):
    """In-place Pauli on qubit j of the query register. state has shape
    (2n,), basis index 2x + y."""
    if pauli == 0:
        return
    two_col = state.reshape(n, 2)
    if j == 0:
        if pauli == 1:
            two_col[:, [0, 1]] = two_col[:, [1, 0]]
        elif pauli == 3:
            two_col[:, 1] *= -1.0
        else:
            c0 = two_col[:, 0].copy()
            two_col[:, 0] = -1j * two_col[:, 1]
            two_col[:, 1] = 1j * c0
        return
    bit = 1 << (j - 1)
    xs = np.arange(n)
    flipped = xs ^ bit
    if pauli == 1:
        state[:] = state.reshape(n, 2)[flipped].reshape(-1)
    elif pauli == 3:
        signs = np.where(xs & bit, -1.0, 1.0)
        two_col *= signs[:, None]
    else:
        src = two_col[xs].copy()
        phase = np.where(xs & bit, -1j, 1j)
        two_col[flipped] = src * phase[:, None]


def _apply_oracle(state: np.ndarray, n: int, marked):
    for x in marked:
        state[2 * x + 1] *= -1.0


def _apply_diffusion_full(state: np.ndarray, n: int):
    two_col = state.reshape(n, 2)
    two_col[:] = 2.0 * two_col.mean(axis=0)[None, :] - two_col


def noisy_oracle_trajectory_step(traj: Trajectory, spec: StrategySpec):
    """One oracle call on a full-register trajectory, with the noise
    flavor implied by spec.kind sampled from the trajectory's RNG.

    Depolarizing sides draw (error? Bernoulli(rate)) then a uniform
    Pauli; the skipping flavor drops the call with probability rate; the
    signaling flavor records the pair of error flags. Mutates and
    returns the trajectory.
    """
    rng = traj.rng
    kind = spec.kind
    n, j, r = spec.n, spec.j, spec.rate
    signaling = kind == "flag_bit_search"
    pre = kind in ("grover_two_sided", "one_sided_before_target",
                   "one_sided_before_index") or signaling
    post = kind in ("grover_two_sided", "one_sided_after_target",
                    "one_sided_after_index") or signaling
    if kind == "negligent_grover":
        if rng.random() >= r:
            _apply_oracle(traj.state, n, spec.marked)
        traj.query_count += 1
        return traj
    f_pre = f_post = 0
    if pre:
        f_pre = int(rng.random() < r)
        if f_pre:
            _apply_pauli(traj.state, n, j, int(rng.integers(4)))
    _apply_oracle(traj.state, n, spec.marked)
    if post:
        f_post = int(rng.random() < r)
        if f_post:
            _apply_pauli(traj.state, n, j, int(rng.integers(4)))
    if signaling:
        traj.flag_log.append((f_pre, f_post))
    traj.query_count += 1
    return traj


def grover_iterations(n: int, n_marked: int) -> int:
    """Standard iteration count; single-marked fallback when the marked
    count is zero."""
    m = n_marked if n_marked > 0 else 1
    return int(math.floor((math.pi / 4.0) * math.sqrt(n / m)))


def _measure_index(state: np.ndarray, n: int, rng) -> int:
    probs = np.abs(state.reshape(n, 2)) ** 2
    probs = probs.sum(axis=1)
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise AssertionError("measurement probabilities sum to %.17g"
                             % total)
    return int(rng.choice(n, p=probs / total))


def grover_run(spec: StrategySpec, rng: np.random.Generator
               ) -> TrajectoryOutcome:
    """Uniform start, alternate (noisy) oracle call and diffusion,
    measure the index register once at the end."""
    if spec.kind not in ("grover_faultless", "grover_two_sided",
                         "negligent_grover"):
        raise ValueError("grover_run does not handle kind %r" % spec.kind)
    n = spec.n
    state = np.zeros(2 * n, dtype=np.complex128)
    state[1::2] = 1.0 / math.sqrt(n)
    traj = Trajectory(state=state, rng=rng)
    iters = spec.iterations if spec.iterations is not None \
        else grover_iterations(n, len(spec.marked))
    for _ in range(iters):
        noisy_oracle_trajectory_step(traj, spec)
        _apply_diffusion_full(traj.state, n)
    traj.check_norm()
    cand = _measure_index(traj.state, n, rng)
    return TrajectoryOutcome(success=cand in spec.marked,
                             queries=traj.query_count, candidate=cand)


# === one-sided noise after the call ===

def _half_space_members(n: int, j: int, b: int):
    """Elements x with bit j equal to b, as (x, z) with z the compressed
    coordinate over the remaining bits."""
    bit = 1 << (j - 1)
    low = bit - 1
    out = []
    for z in range(n // 2):
        x = ((z & ~low) << 1) | (b * bit) | (z & low)
        out.append((x, z))
    return out


def one_sided_after(spec: StrategySpec, rng: np.random.Generator
                    ) -> TrajectoryOutcome:
    """Noise only after each call, defeated by reinitializing the noisy
    qubit before the next call.

    Target flavor: resetting the output qubit to one makes the run an
    exact faultless Grover search. Index flavor: two half-space searches
    (bit j pinned to 0 and to 1), each reset every call; succeeds when
    either instance measures a marked element.
    """
    n = spec.n
    if spec.kind == "one_sided_after_target":
        amp = np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
        iters = spec.iterations if spec.iterations is not None \
            else grover_iterations(n, len(spec.marked))
        queries = 0
        for _ in range(iters):
            for x in spec.marked:
                amp[x] = -amp[x]
            amp = 2.0 * amp.mean() - amp
            queries += 1
        cand = int(rng.choice(n, p=np.abs(amp) ** 2 / np.abs(amp @ amp.conj())))
        return TrajectoryOutcome(success=cand in spec.marked,
                                 queries=queries, candidate=cand)
    if spec.kind != "one_sided_after_index":
        raise ValueError("one_sided_after does not handle kind %r"
                         % spec.kind)
    half = n // 2
    queries = 0
    success = False
    candidate = None
    for b in (0, 1):
        members = _half_space_members(n, spec.j, b)
        marked_z = [z for (x, z) in members if x in spec.marked]
        amp = np.full(half, 1.0 / math.sqrt(half), dtype=np.complex128)
        if spec.iterations is not None:
            iters = spec.iterations
        else:
            m = len(marked_z) if marked_z else 1
            iters = int(math.ceil((math.pi / 4.0) * math.sqrt(half / m)))
        for _ in range(iters):
            for z in marked_z:
                amp[z] = -amp[z]
            amp = 2.0 * amp.mean() - amp
            queries += 1
        zc = int(rng.choice(half, p=np.abs(amp) ** 2
                            / float(np.abs(amp @ amp.conj()))))
        xc = next(x for (x, z) in members if z == zc)
        if xc in spec.marked:
            success = True
            candidate = xc
    return TrajectoryOutcome(success=success, queries=queries,
                             candidate=candidate)


# === one-sided noise before the call ===

def _before_target_reflection(amp: np.ndarray, marked_idx, rng) -> int:
    """Certified full-space reflection under before-the-call noise at
    the maximal rate: set the output qubit to one, call, measure it; the
    call reflected exactly when the measured value is one. Returns the
    number of calls used."""
    cap = LOOP_CAP_FACTOR * 2
    for calls in range(1, cap + 1):
        if rng.integers(2) == 1:
            for i in marked_idx:
                amp[i] = -amp[i]
            return calls
    raise LoopCapExceeded("no certified reflection in %d calls" % cap)


def _before_index_reflection(amp: np.ndarray, marked_z_by_v, b: int,
                             rng) -> int:
    """Certified half-space reflection under before-the-call noise on an
    index bit at the maximal rate.

    Each call reflects the marked elements of the half the randomized
    bit landed in (value read out by measuring the bit). Reflections
    commute, so stopping when side b has seen an odd count and the other
    side an even count leaves exactly one net reflection of side b.
    Returns the number of calls used."""
    cap = LOOP_CAP_FACTOR * 3
    counts = [0, 0]
    for calls in range(1, cap + 1):
        v = int(rng.integers(2))
        for z in marked_z_by_v[v]:
            amp[z] = -amp[z]
        counts[v] += 1
        if counts[b] % 2 == 1 and counts[1 - b] % 2 == 0:
            return calls
    raise LoopCapExceeded("no certified reflection in %d calls" % cap)


def one_sided_before(spec: StrategySpec, rng: np.random.Generator
                     ) -> TrajectoryOutcome:
    """Noise only before each call; the procedure deliberately drives
    the noisy qubit to the maximal rate so the measured qubit reveals
    what the call did, making every Grover reflection certifiable at a
    constant expected call overhead (2 per reflection for the output
    qubit, 3 for an index bit)."""
    n = spec.n
    if spec.kind == "one_sided_before_target":
        amp = np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
        iters = spec.iterations if spec.iterations is not None \
            else grover_iterations(n, len(spec.marked))
        queries = 0
        marked_idx = sorted(spec.marked)
        for _ in range(iters):
            queries += _before_target_reflection(amp, marked_idx, rng)
            amp = 2.0 * amp.mean() - amp
        cand = int(rng.choice(n, p=np.abs(amp) ** 2
                              / float(np.abs(amp @ amp.conj()))))
        return TrajectoryOutcome(success=cand in spec.marked,
                                 queries=queries, candidate=cand)
    if spec.kind != "one_sided_before_index":
        raise ValueError("one_sided_before does not handle kind %r"
                         % spec.kind)
    half = n // 2
    queries = 0
    success = False
    candidate = None
    for b in (0, 1):
        members = _half_space_members(n, spec.j, b)
        other = _half_space_members(n, spec.j, 1 - b)
        marked_z_by_v = {
            b: [z for (x, z) in members if x in spec.marked],
            1 - b: [z for (x, z) in other if x in spec.marked],
        }
        amp = np.full(half, 1.0 / math.sqrt(half), dtype=np.complex128)
        if spec.iterations is not None:
            iters = spec.iterations
        else:
            m = len(marked_z_by_v[b]) if marked_z_by_v[b] else 1
            iters = int(math.ceil((math.pi / 4.0) * math.sqrt(half / m)))
        for _ in range(iters):
            queries += _before_index_reflection(amp, marked_z_by_v, b, rng)
            amp = 2.0 * amp.mean() - amp
        zc = int(rng.choice(half, p=np.abs(amp) ** 2
                            / float(np.abs(amp @ amp.conj()))))
        xc = next(x for (x, z) in members if z == zc)
        if xc in spec.marked:
            success = True
            candidate = xc
    return TrajectoryOutcome(success=success, queries=queries,
                             candidate=candidate)


def coin_toss_expectation(trials: int, master_seed: int = 0,
                          return_counts: bool = False):
    """Mean number of fair coin tosses until heads has come up an odd
    number of times and tails an even number of times. With
    return_counts the per-trial toss counts come back as well, for
    standard-error estimates."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    counts = np.zeros(trials)
    cap = LOOP_CAP_FACTOR * 3
    for i in range(trials):
        rng = trial_rng(master_seed, i)
        heads = tails = 0
        for _ in range(cap):
            if rng.integers(2) == 0:
                heads += 1
            else:
                tails += 1
            if heads % 2 == 1 and tails % 2 == 0:
                break
        else:
            raise LoopCapExceeded("coin sequence exceeded %d tosses" % cap)
        counts[i] = heads + tails
    mean = float(counts.mean())
    if return_counts:
        return mean, counts
    return mean


# === flag-bit procedures (signaling noise) ===

def _sample_flags(rng, r: float, condition_no_double: bool):
    while True:
        f_pre = int(rng.random() < r)
        f_post = int(rng.random() < r)
        if not condition_no_double or not (f_pre and f_post):
            return f_pre, f_post


@dataclass(frozen=True)
class ReflectionOutcome:
    certified: bool
    aborted: bool
    calls: int


def flag_bit_reflection(traj: Trajectory, spec: StrategySpec,
                        side: str = "target", instance_half: int = 0,
                        condition_no_double: bool = False
                        ) -> ReflectionOutcome:
    """Loop oracle calls under signaling noise until one net reflection
    is certified from the flags, or a double error aborts the attempt.

    Per call: choose a uniform bit, load it into the noisy qubit (the
    output qubit for side "target", index bit j for side "index" with
    the output qubit held at one), call, read the qubit back. The flag
    pair tells which reading is trustworthy: no pre-error means the
    loaded bit reached the oracle; pre-error with clean post side means
    the read-back value is what the oracle saw; both flags set means
    neither, and the attempt is abandoned. Side "target" certifies when
    the oracle-time value was one; side "index" accumulates per-value
    reflection counts and stops at odd-for-this-half, even-for-the-other
    (commuting reflections cancel pairwise). The classification is
    asserted against the value actually used to update the state.

    traj.state holds full-space index amplitudes for side "target" and
    half-space amplitudes for side "index" (the half selected by
    instance_half). condition_no_double draws flag pairs conditioned on
    not-(1,1); statistics harnesses use it to measure the per-call
    claims, search runs leave it off.
    """
    rng = traj.rng
    r = spec.rate
    n = spec.n
    if side == "target":
        marked_by_v = {1: sorted(spec.marked), 0: []}
        cap = LOOP_CAP_FACTOR * 2
    elif side == "index":
        b = instance_half
        members = _half_space_members(n, spec.j, b)
        other = _half_space_members(n, spec.j, 1 - b)
        marked_by_v = {
            b: [z for (x, z) in members if x in spec.marked],
            1 - b: [z for (x, z) in other if x in spec.marked],
        }
        cap = LOOP_CAP_FACTOR * 3
    else:
        raise ValueError("side must be 'target' or 'index'")
    counts = [0, 0]
    for calls in range(1, cap + 1):
        f_pre, f_post = _sample_flags(rng, r, condition_no_double)
        traj.query_count += 1
        traj.flag_log.append((f_pre, f_post))
        if f_pre and f_post:
            return ReflectionOutcome(certified=False, aborted=True,
                                     calls=calls)
        beta = int(rng.integers(2))
        value = int(rng.integers(2)) if f_pre else beta
        readback = value if not f_post else int(rng.integers(2))
        classified = readback if f_pre else beta
        if classified != value:
            raise AssertionError("flag classification disagrees with the "
                                 "applied reflection")
        for i in marked_by_v.get(value, ()):
            traj.state[i] = -traj.state[i]
        if side == "target":
            if value == 1:
                return ReflectionOutcome(certified=True, aborted=False,
                                         calls=calls)
        else:
            counts[value] += 1
            if counts[b] % 2 == 1 and counts[1 - b] % 2 == 0:
                return ReflectionOutcome(certified=True, aborted=False,
                                         calls=calls)
    raise LoopCapExceeded("no certified reflection in %d calls" % cap)


def _certified_candidate_check(rng, r: float) -> int:
    """Calls until a no-error call certifies a candidate's oracle value.
    Geometric with success probability (1-r)^2. Returns calls used."""
    succ = (1.0 - r) ** 2
    cap = LOOP_CAP_FACTOR * max(1, int(math.ceil(1.0 / max(succ, 1e-6))))
    for calls in range(1, cap + 1):
        f_pre = rng.random() < r
        f_post = rng.random() < r
        if not f_pre and not f_post:
            return calls
    raise LoopCapExceeded("candidate check exceeded %d calls" % cap)


def _flag_bit_single(spec: StrategySpec, rng: np.random.Generator
                     ) -> TrajectoryOutcome:
    """One full flag-bit search: sequential certified-reflection Grover
    instances with early stop on a verified marked candidate."""
    n = spec.n
    r = spec.rate
    if r == 0.0:
        base = StrategySpec(kind="grover_faultless", n=n,
                            marked=spec.marked,
                            iterations=spec.iterations)
        return grover_run(base, rng)
    k_instances = spec.instances if spec.instances is not None \
        else int(math.ceil(8.0 * max(1.0, n * r ** 4)))
    if spec.iterations is not None:
        l_iters = spec.iterations
    else:
        l_iters = min(int(math.ceil((math.pi / 4.0) * math.sqrt(n / 2.0))),
                      int(math.ceil(1.0 / (2.0 * r * r))))
    queries = 0
    aborted = 0
    for _ in range(k_instances):
        traj = Trajectory(
            state=np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128),
            rng=rng)
        instance_dead = False
        for _ in range(l_iters):
            out = flag_bit_reflection(traj, spec, side="target")
            queries += out.calls
            if out.aborted:
                instance_dead = True
                aborted += 1
                break
            traj.state = 2.0 * traj.state.mean() - traj.state
        if instance_dead:
            continue
        traj.check_norm()
        probs = np.abs(traj.state) ** 2
        cand = int(rng.choice(n, p=probs / probs.sum()))
        queries += _certified_candidate_check(rng, r)
        if cand in spec.marked:
            return TrajectoryOutcome(success=True, queries=queries,
                                     candidate=cand,
                                     aborted_instances=aborted)
    return TrajectoryOutcome(success=False, queries=queries,
                             aborted_instances=aborted)


def run_strategy(spec: StrategySpec, rng: np.random.Generator
                 ) -> TrajectoryOutcome:
    """One trial of any strategy kind."""
    if spec.kind in ("grover_faultless", "grover_two_sided",
                     "negligent_grover"):
        return grover_run(spec, rng)
    if spec.kind in ("one_sided_after_target", "one_sided_after_index"):
        return one_sided_after(spec, rng)
    if spec.kind in ("one_sided_before_target", "one_sided_before_index"):
        return one_sided_before(spec, rng)
    return _flag_bit_single(spec, rng)


def run_trials(spec: StrategySpec, trials: int, master_seed: int
               ) -> RunStatistics:
    """Independent trials with per-trial counter RNG; aggregates success
    rate (95 percent score interval) and query-count statistics."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    successes = 0
    counts = np.zeros(trials)
    histogram = {}
    for i in range(trials):
        out = run_strategy(spec, trial_rng(master_seed, i))
        successes += int(out.success)
        counts[i] = out.queries
        histogram[out.queries] = histogram.get(out.queries, 0) + 1
    lo, hi = wilson_interval(successes, trials)
    mean_q = float(counts.mean())
    se_q = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 \
        else 0.0
    return RunStatistics(
        strategy=spec.kind, n=spec.n, rate=spec.rate, j=spec.j,
        trials=trials, successes=successes, success_rate=successes / trials,
        ci_lo=lo, ci_hi=hi, mean_queries=mean_q, se_queries=se_q,
        master_seed=master_seed, query_histogram=histogram)


def flag_bit_search(spec: StrategySpec, trials: int, master_seed: int
                    ) -> RunStatistics:
    if spec.kind != "flag_bit_search":
        raise ValueError("flag_bit_search requires the matching kind")
    return run_trials(spec, trials, master_seed)


def reflection_call_statistics(procedure: str, rate: float,
                               reflections: int, master_seed: int,
                               n: int = 8, marked=(3,), j: int = 1,
                               condition_no_double: bool = True) -> dict:
    """Mean oracle calls per certified reflection for the four
    certified-reflection subroutines, with standard error.

    procedure: "before_target" (expected 2), "before_index" (3),
    "flag_target" (2), "flag_index" (3). The flag procedures measure the
    per-call claim, so their flag pairs are drawn conditioned on no
    double error by default; real search runs do not condition.
    """
    if reflections < 1:
        raise ValueError("reflections must be at least 1")
    counts = np.zeros(reflections)
    if procedure.startswith("flag"):
        side = "target" if procedure == "flag_target" else "index"
        spec = StrategySpec(kind="flag_bit_search", n=n,
                            marked=frozenset(marked), j=j, rate=rate)
        dim = n if side == "target" else n // 2
        for i in range(reflections):
            rng = trial_rng(master_seed, i)
            traj = Trajectory(
                state=np.full(dim, 1.0 / math.sqrt(dim),
                              dtype=np.complex128), rng=rng)
            out = flag_bit_reflection(
                traj, spec, side=side, instance_half=0,
                condition_no_double=condition_no_double)
            if out.aborted:
                raise AssertionError("conditioned sampling cannot abort")
            counts[i] = out.calls
    elif procedure == "before_target":
        for i in range(reflections):
            rng = trial_rng(master_seed, i)
            amp = np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
            counts[i] = _before_target_reflection(amp, sorted(marked), rng)
    elif procedure == "before_index":
        members = _half_space_members(n, j, 0)
        other = _half_space_members(n, j, 1)
        marked_set = frozenset(marked)
        by_v = {0: [z for (x, z) in members if x in marked_set],
                1: [z for (x, z) in other if x in marked_set]}
        for i in range(reflections):
            rng = trial_rng(master_seed, i)
            amp = np.full(n // 2, 1.0 / math.sqrt(n // 2),
                          dtype=np.complex128)
            counts[i] = _before_index_reflection(amp, by_v, 0, rng)
    else:
        raise ValueError("unknown procedure %r" % (procedure,))
    mean = float(counts.mean())
    se = float(counts.std(ddof=1) / math.sqrt(reflections)) \
        if reflections > 1 else 0.0
    return {"procedure": procedure, "mean_calls": mean, "se": se,
            "reflections": reflections}


def queries_until_success(stats: RunStatistics, target: float = 0.8
                          ) -> float:
    """Expected queries to reach the target success probability by
    independent repetition of the measured strategy.

    The repetition factor is the real-valued log(1-target)/log(1-p),
    floored at one run; keeping it unquantized avoids integer-rounding
    bias in scaling fits (round it up for a whole-run budget). The
    per-run success estimate is floored at 1/(2 trials) so a
    zero-success cell yields a finite, pessimistic count."""
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    p = max(stats.success_rate, 1.0 / (2.0 * stats.trials))
    if p >= 1.0:
        reps = 1.0
    else:
        reps = max(1.0, math.log(1.0 - target) / math.log(1.0 - p))
    return stats.mean_queries * reps
