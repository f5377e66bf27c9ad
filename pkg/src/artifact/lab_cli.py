"""Command-line harness: verification suites, progress traces, strategy
experiments, and the coin-toss micro-benchmark.

Configuration comes from an optional flat key=value file (section
headers group keys; a section named after a command scopes its keys to
that command, everything else is common) plus command-line flags, and
flags win. Every CSV starts with one provenance comment line carrying
the tool version, a source revision hint, the master seed, and a digest
of the effective configuration, so identical inputs yield byte-identical
outputs.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import hashlib
import math
import os
import subprocess
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .opalgebra import QubitIndex
from .channels import (KrausChannel, channels_equal, depolarizing_noise,
                       phase_oracle, DEFAULT_CHOI_TOL)
from .oracle_kraus import (SignalingNoiseSpec, build_geometry,
                           build_G_family, build_K_family,
                           format_check_line, negligent_kraus,
                           rate_grid, signaling_noise,
                           verify_coefficient_bounds,
                           verify_geometry_commutation,
                           verify_mixing_table)
from .progress import (ExtendedSpace, claim_norms, corollary_bound_check,
                       grover_diffusion_step, purified_sector_weights,
                       run_progress_trace, success_probability)
from .search_sim import (STRATEGY_KINDS, RUN_CSV_HEADER, StrategySpec,
                         coin_toss_expectation, run_trials)

__all__ = ["LabConfig", "main", "cmd_verify", "cmd_progress",
           "cmd_experiment", "cmd_coin_toss", "load_config_file"]

TRAJECTORY_N_CAP = 2 ** 20
DENSITY_N_CAP = 2 ** 5

_DEFAULT_VERIFY_NS = (2, 4, 8)
_DEFAULT_VERIFY_RS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class LabConfig:
    """Effective parameters of one CLI invocation after merging the
    config file and the flags (flags win)."""

    command: str
    n_values: tuple
    r_values: tuple
    j_values: tuple
    scenario: str
    strategies: tuple
    trials: int
    master_seed: int
    out: str
    tol: float
    queries: int
    marked: tuple
    inject_k1x_sign_error: bool = False

    def __post_init__(self):
        for n in self.n_values:
            if n < 2 or n & (n - 1):
                raise ValueError("n values must be powers of two, got %d"
                                 % n)
        for r in self.r_values:
            if not 0.0 <= r <= 1.0:
                raise ValueError("rates must lie in [0, 1], got %g" % r)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    def digest(self) -> str:
        items = sorted(
            "%s=%r" % (k, v) for k, v in (
                ("command", self.command), ("n", self.n_values),
                ("r", self.r_values), ("j", self.j_values),
                ("scenario", self.scenario),
                ("strategy", self.strategies), ("trials", self.trials),
                ("seed", self.master_seed), ("tol", self.tol),
                ("queries", self.queries), ("marked", self.marked),
                ("inject", self.inject_k1x_sign_error)))
        blob = ";".join(items).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def load_config_file(path: str) -> dict:
    """Flat key=value file with [section] grouping. Returns a mapping
    section -> {key: value}; keys before any section land in 'common'.
    Later duplicates win. '#' starts a comment line."""
    sections = {"common": {}}
    current = "common"
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip().lower()
                sections.setdefault(current, {})
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key=value, got %r"
                                 % (path, lineno, line))
            key, value = line.split("=", 1)
            sections[current][key.strip().lower()] = value.strip()
    return sections


def _parse_int_list(text: str) -> tuple:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_float_list(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_str_list(text: str) -> tuple:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _git_ish() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        proc = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                              capture_output=True, text=True, cwd=here,
                              timeout=5)
        if proc.returncode == 0 and proc.stdout.strip():
            return proc.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _provenance(cfg: LabConfig) -> str:
    return ("# artifact-lab %s, %s, master_seed=%d, config-digest=%s"
            % (__version__, _git_ish(), cfg.master_seed, cfg.digest()))


def _resolve_config(args) -> LabConfig:
    file_cfg = {}
    if args.config:
        sections = load_config_file(args.config)
        file_cfg = dict(sections.get("common", {}))
        file_cfg.update(sections.get(args.command.replace("-", "_"), {}))
        file_cfg.update(sections.get(args.command, {}))

    def pick(flag_value, key, default, parse):
        if flag_value is not None:
            return flag_value
        if key in file_cfg:
            return parse(file_cfg[key])
        return default

    command = args.command
    return LabConfig(
        command=command,
        n_values=pick(args.n, "n", (), _parse_int_list),
        r_values=pick(args.r, "r", (), _parse_float_list),
        j_values=pick(args.j, "j", (), _parse_int_list),
        scenario=pick(args.scenario, "scenario", None, str),
        strategies=pick(getattr(args, "strategy", None), "strategy", (),
                        _parse_str_list),
        trials=pick(args.trials, "trials", 100000, int),
        master_seed=pick(args.seed, "seed", 0, int),
        out=pick(args.out, "out", None, str),
        tol=pick(args.tol, "tol", None, float),
        queries=pick(getattr(args, "queries", None), "queries", None, int),
        marked=pick(getattr(args, "marked", None), "marked", (0,),
                    _parse_int_list),
        inject_k1x_sign_error=bool(getattr(args, "inject_k1x_sign_error",
                                           False)),
    )


def _write_lines(cfg: LabConfig, lines, kind: str) -> None:
    text = "\n".join([_provenance(cfg)] + list(lines)) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
        print("%s: wrote %d lines to %s" % (kind, len(lines), cfg.out))
    else:
        sys.stdout.write(text)


# === verify ===

def _qubit_positions(n: int) -> range:
    return range(n.bit_length())


def cmd_verify(cfg: LabConfig) -> int:
    """Run the full algebraic verification battery in a fixed order and
    report one PASS/FAIL line per check."""
    ns = cfg.n_values or _DEFAULT_VERIFY_NS
    rs = cfg.r_values or _DEFAULT_VERIFY_RS
    choi_tol = cfg.tol if cfg.tol is not None else DEFAULT_CHOI_TOL
    lines = []
    ok_all = True

    def emit(check_id, params, dev, tol):
        nonlocal ok_all
        good = dev <= tol
        ok_all = ok_all and good
        lines.append(format_check_line(check_id, params, good, dev))

    def completeness_dev(channel) -> float:
        acc = sum(k.conj().T @ k for k in channel.kraus_ops)
        return float(np.abs(acc - np.eye(channel.d_in)).max())

    # 1. channel completeness sweep
    for n in ns:
        for j in _qubit_positions(n):
            qubit = QubitIndex(j=j, n=n)
            for r in rs:
                emit("complete-depolarizing",
                     "n=%d j=%d r=%.6g" % (n, j, r),
                     completeness_dev(depolarizing_noise(qubit, r)),
                     choi_tol)
                emit("complete-signaling", "n=%d j=%d r=%.6g" % (n, j, r),
                     completeness_dev(
                         signaling_noise(SignalingNoiseSpec(qubit=qubit,
                                                            rate=r))),
                     choi_tol)
        emit("complete-oracle", "n=%d x=0" % n,
             completeness_dev(phase_oracle(n, {0})), choi_tol)
        for p in (0.25, 0.75):
            emit("complete-negligent", "n=%d x=0 p=%.6g" % (n, p),
                 completeness_dev(negligent_kraus(n, 0, p)), choi_tol)

    # 2. sandwich family vs compressed family, via Choi matrices
    for n in ns:
        for x in range(n):
            for j in _qubit_positions(n):
                geom = build_geometry(n, x, QubitIndex(j=j, n=n))
                for r in rs:
                    g_fam = build_G_family(geom, r)
                    k_fam = build_K_family(geom, r)
                    if cfg.inject_k1x_sign_error:
                        # mutation hook: flip the relative sign between
                        # the two reflector branches of the
                        # record-written X operator (a global sign would
                        # be unobservable; this one must be caught)
                        ops = list(k_fam.kraus_ops)
                        idx = k_fam.labels.index((1, "X"))
                        ops[idx] = ops[idx] @ geom.xi
                        k_fam = KrausChannel(tuple(ops), k_fam.labels,
                                             "exact_cptp")
                    same, dev = channels_equal(g_fam, k_fam, tol=choi_tol)
                    emit("choi-equal", "n=%d x=%d j=%d r=%.6g"
                         % (n, x, j, r), dev, choi_tol)

    # 3. mixing table blocks (degenerate at r = 0: skipped with notice)
    table_geom = build_geometry(4, 2, QubitIndex(j=1, n=4))
    table_geom0 = build_geometry(4, 2, QubitIndex(j=0, n=4))
    for r in rs:
        if r == 0.0:
            lines.append("table-blocks r=0 SKIP sandwich family is "
                         "degenerate at rate 0; nothing to verify against")
            continue
        for geom in (table_geom, table_geom0):
            t_ok, t_lines = verify_mixing_table(geom, r)
            ok_all = ok_all and t_ok
            lines.extend(t_lines)

    # 4. closed-form coefficient bounds on the canonical rate grid
    for r in rate_grid():
        c_ok, c_lines = verify_coefficient_bounds(r)
        ok_all = ok_all and c_ok
        lines.extend(c_lines)

    # 5. projector/reflector commutation relations
    for n in ns:
        for x in range(n):
            for j in _qubit_positions(n):
                geom = build_geometry(n, x, QubitIndex(j=j, n=n))
                g_ok, g_lines = verify_geometry_commutation(geom)
                ok_all = ok_all and g_ok
                lines.extend(g_lines)

    # 6. one-call transition norms, main and call-skipping models
    claim_rs = [r for r in rs if 0.0 < r < 1.0] or [0.25, 0.5]
    claim_ns = [n for n in ns if n <= 32] or [4, 8, 16]
    if any(n > 32 for n in ns):
        lines.append("claim-norms SKIP n>32 cells (transition-norm sweep "
                     "is capped at n=32)")
    for n in claim_ns:
        for scenario, j in (("target", 0), ("index", 1)):
            space = ExtendedSpace(n=n, scenario=scenario, j=j)
            for r in claim_rs:
                report = claim_norms(space, r)
                ok_all = ok_all and report.ok
                lines.extend(report.lines)
        space = ExtendedSpace(n=n, scenario="negligent")
        for p in claim_rs:
            report = claim_norms(space, p)
            ok_all = ok_all and report.ok
            lines.extend(report.lines)

    # 7. combined-coefficient contraction bound
    corollary_ns = [n for n in ns if n >= 12] or [16, 1024]
    for n in corollary_ns:
        for r in rate_grid():
            report = corollary_bound_check(n, r)
            ok_all = ok_all and report.ok
            lines.append(report.line)

    # 8. no-jump compression against the explicit purified evolution
    for scenario, rr in (("target", 0.5), ("negligent", 0.5)):
        space = ExtendedSpace(n=4, scenario=scenario)
        schedule = [grover_diffusion_step(space)] * 3
        trace = run_progress_trace(space, rr, schedule)
        pure = purified_sector_weights(space, rr, schedule)
        dev = 0.0
        for row, (w_a, w_act, w_pas, w_c) in zip(trace.rows, pure):
            dev = max(dev, abs(row.wA - w_a), abs(row.wB_act - w_act),
                      abs(row.wB_pas - w_pas), abs(row.wC - w_c))
        emit("nojump-vs-purified", "scenario=%s n=4 t=3 r=%.6g"
             % (scenario, rr), dev, 1e-9)

    _write_lines(cfg, lines, "verify")
    failed = sum(1 for ln in lines if " FAIL " in ln)
    print("verify: %d checks, %d failed" % (len(lines), failed))
    return 0 if ok_all else 1


# === progress ===

def cmd_progress(cfg: LabConfig) -> int:
    """Evolve the no-jump progress trace for one scenario and emit its
    CSV, then check the start value, the per-step bound, and the final
    success-probability bound."""
    if cfg.scenario not in ("target", "index", "negligent"):
        print("error: progress requires --scenario target|index|negligent",
              file=sys.stderr)
        return 2
    if not cfg.n_values:
        print("error: progress requires --n", file=sys.stderr)
        return 2
    n = cfg.n_values[0]
    if n > DENSITY_N_CAP:
        print("error: progress evolves densities and is capped at n=%d; "
              "got n=%d" % (DENSITY_N_CAP, n), file=sys.stderr)
        return 2
    if not cfg.r_values:
        print("error: progress requires --r", file=sys.stderr)
        return 2
    rate = cfg.r_values[0]
    if rate <= 0.0:
        print("error: the per-step bound scales as 1/(n r), so progress "
              "requires r > 0", file=sys.stderr)
        return 2
    j = cfg.j_values[0] if cfg.j_values else (1 if cfg.scenario == "index"
                                              else 0)
    space = ExtendedSpace(n=n, scenario=cfg.scenario, j=j)
    queries = cfg.queries
    if queries is None:
        queries = min(40, 2 * int(math.floor((math.pi / 4.0)
                                             * math.sqrt(n))))
    schedule = [grover_diffusion_step(space)] * queries
    trace = run_progress_trace(space, rate, schedule)
    csv_lines = trace.to_csv().rstrip("\n").split("\n")
    _write_lines(cfg, csv_lines, "progress")

    ok = True
    psi0 = trace.rows[0].psi
    line = "progress-start n=%d psi0=%.17g %s" % (
        n, psi0, "PASS" if psi0 == 0.0 else "FAIL")
    ok = ok and psi0 == 0.0
    print(line)
    max_delta = trace.max_delta_psi
    bound = trace.rows[0].bound
    good = max_delta <= bound
    ok = ok and good
    print("progress-step-bound n=%d max_delta=%.17g bound=%.17g %s"
          % (n, max_delta, bound, "PASS" if good else "FAIL"))
    q_succ = success_probability(space, rate, schedule)
    cap = trace.final_psi + 2.0 / n + 1e-8
    good = q_succ <= cap
    ok = ok and good
    print("progress-success-bound n=%d q_succ=%.17g cap=%.17g %s"
          % (n, q_succ, cap, "PASS" if good else "FAIL"))
    return 0 if ok else 1


# === experiment ===

def _cell_seed(master_seed: int, strategy: str, n: int, r: float,
               j: int) -> int:
    blob = ("%d|%s|%d|%.17g|%d" % (master_seed, strategy, n, r, j)).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") \
        & (2 ** 63 - 1)


def cmd_experiment(cfg: LabConfig) -> int:
    """Run a strategy grid and emit one CSV row per cell. Each cell gets
    its own seed derived from the master seed and the cell coordinates;
    the row's seed column reproduces that row alone."""
    strategies = cfg.strategies
    if not strategies:
        print("error: experiment requires --strategy", file=sys.stderr)
        return 2
    known = set(STRATEGY_KINDS) | {"coin_toss"}
    for s in strategies:
        if s not in known:
            print("error: unknown strategy %r (known: %s)"
                  % (s, ", ".join(sorted(known))), file=sys.stderr)
            return 2
    ns = cfg.n_values or (64,)
    rs = cfg.r_values or (0.25,)
    rows = [RUN_CSV_HEADER]
    for strategy in strategies:
        if strategy == "coin_toss":
            seed = _cell_seed(cfg.master_seed, strategy, 0, 0.0, 0)
            mean, counts = coin_toss_expectation(cfg.trials, seed,
                                                 return_counts=True)
            se = float(counts.std(ddof=1) / math.sqrt(cfg.trials)) \
                if cfg.trials > 1 else 0.0
            rows.append("coin_toss,0,0,0,%d,1,1,1,%.17g,%.17g,%d"
                        % (cfg.trials, mean, se, seed))
            continue
        for n in ns:
            if n > TRAJECTORY_N_CAP:
                print("error: trajectory strategies are capped at n=%d "
                      "(state vectors get too large); got n=%d"
                      % (TRAJECTORY_N_CAP, n), file=sys.stderr)
                return 2
            marked = frozenset(x for x in cfg.marked if x < n) or \
                frozenset({0})
            if strategy.endswith("_index"):
                j = cfg.j_values[0] if cfg.j_values else 1
            else:
                j = cfg.j_values[0] if cfg.j_values else 0
            for r in rs:
                spec = StrategySpec(kind=strategy, n=n, marked=marked,
                                    j=j, rate=r)
                seed = _cell_seed(cfg.master_seed, strategy, n, r, j)
                stats = run_trials(spec, cfg.trials, seed)
                rows.append(stats.csv_row())
    _write_lines(cfg, rows, "experiment")
    return 0


def cmd_coin_toss(cfg: LabConfig) -> int:
    """Fair-coin parity stopping rule micro-benchmark; the mean stopping
    time is 3."""
    mean, counts = coin_toss_expectation(cfg.trials, cfg.master_seed,
                                         return_counts=True)
    se = float(counts.std(ddof=1) / math.sqrt(cfg.trials)) \
        if cfg.trials > 1 else float("inf")
    good = abs(mean - 3.0) <= 3.0 * se
    line = ("coin-toss trials=%d mean=%.6f se=%.3e expected=3 %s"
            % (cfg.trials, mean, se, "PASS" if good else "FAIL"))
    if cfg.out:
        _write_lines(cfg, [line], "coin-toss")
    print(line)
    return 0 if good else 1


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--n", type=_parse_int_list,
                        help="comma-separated domain sizes (powers of two)")
    common.add_argument("--r", type=_parse_float_list,
                        help="comma-separated rates in [0,1]")
    common.add_argument("--j", type=_parse_int_list,
                        help="comma-separated noisy-qubit positions")
    common.add_argument("--scenario",
                        choices=("target", "index", "negligent"))
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--tol", type=float,
                        help="override the channel-equality tolerance")

    parser = argparse.ArgumentParser(
        prog="artifact-lab",
        description="verification and experiment harness for the noisy "
                    "search laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    p_verify = sub.add_parser("verify", parents=[common],
                              help="run the algebraic check battery")
    p_verify.add_argument("--inject-k1x-sign-error", action="store_true",
                          help=argparse.SUPPRESS)
    p_prog = sub.add_parser("progress", parents=[common],
                            help="emit a progress-measure trace")
    p_prog.add_argument("--queries", type=int,
                        help="schedule length (default: Grover-scaled)")
    p_exp = sub.add_parser("experiment", parents=[common],
                           help="run strategy grids to CSV")
    p_exp.add_argument("--strategy", type=_parse_str_list,
                       help="comma-separated strategy kinds")
    p_exp.add_argument("--marked", type=_parse_int_list,
                       help="comma-separated marked elements (default 0)")
    sub.add_parser("coin-toss", parents=[common],
                   help="parity stopping-rule micro-benchmark")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    handlers = {
        "verify": cmd_verify,
        "progress": cmd_progress,
        "experiment": cmd_experiment,
        "coin-toss": cmd_coin_toss,
    }
    try:
        return handlers[cfg.command](cfg)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except AssertionError as exc:
        print("internal check failed: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
