"""Command-line surface: synthesize filters, trace frontiers, run scans,
check the sequential-measurement equivalence, compute process metrics and
validate against the brute-force oracle.

Exit codes: 0 success, 1 usage error, 2 domain/precondition error, 3 I/O
error. Flags override values read from an optional flat key=value config
file. CSV output uses 12 significant digits and is byte-deterministic for
identical flags and seed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import optics, oracle, synthesis
from .errors import DomainError
from .iterative import KrausSet, compose_iteration, sequential_povm, simulate_sequential
from .statecore import (
    DiagonalFilter,
    EnergySpectrum,
    QubitParams,
    apply_filter,
    coherence,
    filter_to_text,
    mean_energy,
    mixed_qubit_product,
    product_pure_state,
    qstate_from_text,
)
from .svgplot import line_plot
from .synthesis import FilterFamily, FilterTarget

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_IO = 3

THREADS_ENV = "COHERENCE_FORGE_THREADS"

_TARGETS = {
    "energy": FilterTarget.ENERGY,
    "coherence": FilterTarget.COHERENCE,
    "tsallis": FilterTarget.COHERENCE_TSALLIS,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems with exit code 1."""

    def error(self, message: str) -> None:  # noqa: A003 - argparse API
        raise _UsageError(message)


@dataclass
class RunConfig:
    """Shared run parameters resolved from flags, config file and environment."""

    log_base: str = "e"
    threads: int = 1
    seed: int = 0
    config_path: str | None = None
    outputs: list[str] = field(default_factory=list)


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise _UsageError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _parse_spectrum(text: str) -> EnergySpectrum:
    try:
        levels = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise _UsageError(f"cannot parse spectrum {text!r}")
    return EnergySpectrum(np.asarray(levels))


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _coherence_report(value_nats: float, log_base: str) -> str:
    bits = value_nats / math.log(2.0)
    if log_base == "2":
        return f"{_fmt(bits)} bits ({_fmt(value_nats)} nats)"
    return f"{_fmt(value_nats)} nats ({_fmt(bits)} bits)"


def _load_config(path: str) -> list[str]:
    """Flat key=value lines become long flags, prepended so real flags win."""
    tokens: list[str] = []
    text = Path(path).read_text(encoding="utf-8")
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"config line is not key=value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        tokens.extend([f"--{key}", value])
    return tokens


def _splice_config(argv: list[str]) -> list[str]:
    if not argv or "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise _UsageError("--config needs a path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    if not rest:
        raise _UsageError("--config requires a subcommand")
    return [rest[0], *_load_config(path), *rest[1:]]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _describe_filter(filt: DiagonalFilter) -> str:
    c = filt.coeffs
    if (
        filt.dim == 4
        and abs(c[1] - c[2]) < 1e-12
        and abs(c[3] - 1.0) < 1e-12
        and abs(c.imag).max() < 1e-12
    ):
        return f"a = {_fmt(c[0].real)}  b = {_fmt(c[1].real)}"
    return "m = [" + ", ".join(_fmt(v.real) for v in c) + "]"


def _cmd_filter(args: argparse.Namespace, cfg: RunConfig) -> int:
    target = _TARGETS[args.target]
    spectrum = _parse_spectrum(args.spectrum)
    state = product_pure_state(args.p, 2)
    if args.mode == "closed-form":
        if target is FilterTarget.COHERENCE_TSALLIS:
            raise DomainError("no closed form for the tsallis target; use --mode tsallis")
        params = synthesis.two_qubit_closed_form(args.p, args.ps, target)
        filt = params.to_filter()
    elif args.mode == "tsallis" or target is FilterTarget.COHERENCE_TSALLIS:
        filt = synthesis.tsallis_optimal_filter(state, args.ps)
    elif target is FilterTarget.ENERGY:
        filt = synthesis.energy_optimal_filter(state, spectrum, args.ps)
    else:
        filt = synthesis.coherence_optimal_filter_pure(state, args.ps)
    out, p_s = apply_filter(state, filt)
    print(_describe_filter(filt))
    print(f"P_S achieved = {_fmt(p_s)}")
    print(f"output coherence = {_coherence_report(coherence(out), cfg.log_base)}")
    print(f"output mean energy = {_fmt(mean_energy(out, spectrum))}")
    if args.out:
        Path(args.out).write_text(filter_to_text(filt), encoding="utf-8")
        print(f"filter written to {args.out}")
    return EXIT_OK


_FRONTIER_HEADER = "p_success,coherence_nats,mean_energy,a,b,family"


def _frontier_rows(points: list[synthesis.FrontierPoint]) -> list[str]:
    rows = []
    for pt in points:
        c = pt.filter.coeffs
        rows.append(
            ",".join(
                [
                    _fmt(pt.p_success),
                    _fmt(pt.coherence),
                    _fmt(pt.mean_energy),
                    _fmt(c[0].real),
                    _fmt(c[1].real),
                    pt.family.value,
                ]
            )
        )
    return rows


def _cmd_frontier(args: argparse.Namespace, cfg: RunConfig) -> int:
    target = _TARGETS[args.target]
    spectrum = _parse_spectrum(args.spectrum)
    state = product_pure_state(args.p, 2)
    families = (
        [FilterFamily.OPTIMAL, FilterFamily.FACTORIZED]
        if args.family == "both"
        else [FilterFamily(args.family)]
    )
    traced = {
        fam: synthesis.trace_frontier(
            state, spectrum, target, fam, grid=args.grid, threads=cfg.threads
        )
        for fam in families
    }
    lines = [_FRONTIER_HEADER]
    for fam in families:
        lines.extend(_frontier_rows(traced[fam]))
    Path(args.out_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{sum(len(v) for v in traced.values())} rows written to {args.out_csv}")
    if args.out_svg:
        measure = (
            (lambda pt: pt.mean_energy)
            if target is FilterTarget.ENERGY
            else (lambda pt: pt.coherence)
        )
        ylabel = "mean energy" if target is FilterTarget.ENERGY else "coherence (nats)"
        series = [
            (
                fam.value,
                [pt.p_success for pt in traced[fam]],
                [measure(pt) for pt in traced[fam]],
            )
            for fam in families
        ]
        Path(args.out_svg).write_text(
            line_plot(series, "success probability", ylabel, title=f"p = {args.p:g}"),
            encoding="utf-8",
        )
        print(f"plot written to {args.out_svg}")
    return EXIT_OK


_SCAN_HEADER = "p,eta,coherence_nats,mean_energy,b_opt,input_coherence,input_energy"


def _cmd_mixed_scan(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.steps < 2:
        raise _UsageError("--steps must be at least 2")
    spectrum = synthesis.TWO_QUBIT_SPECTRUM
    p_values = np.linspace(args.p_min, args.p_max, args.steps)
    points = synthesis.mixed_scan(args.eta, list(p_values), threads=cfg.threads)
    lines = [_SCAN_HEADER]
    for pt in points:
        state = mixed_qubit_product(QubitParams(p=pt.p, eta=args.eta), 2)
        lines.append(
            ",".join(
                [
                    _fmt(pt.p),
                    _fmt(args.eta),
                    _fmt(pt.coherence),
                    _fmt(pt.mean_energy),
                    _fmt(pt.b_opt),
                    _fmt(coherence(state)),
                    _fmt(mean_energy(state, spectrum)),
                ]
            )
        )
    Path(args.out_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{len(points)} rows written to {args.out_csv}")
    return EXIT_OK


def _cmd_iterate(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.stages not in (1, 2):
        raise _UsageError("--stages must be 1 or 2")
    stage = synthesis.TwoQubitFilterParams(a=args.a, b=args.b).to_filter()
    single = product_pure_state(args.p, 1)
    pair = product_pure_state(args.p, 2)
    if args.stages == 1:
        kraus = KrausSet(operators=(stage.matrix(),))
        sigma = kraus.apply_mixture(pair)
    else:
        kraus, sigma = compose_iteration(stage, stage, single)
    povm = sequential_povm(kraus)
    mixture, p_total, _branches = simulate_sequential(povm, pair)
    residual = float(np.max(np.abs(mixture.matrix * p_total - sigma)))
    iter_coh = coherence(mixture)
    best = oracle.grid_search(
        pair,
        synthesis.TWO_QUBIT_SPECTRUM,
        FilterTarget.COHERENCE,
        p_total,
        grid_step=args.grid_step,
        threads=cfg.threads,
    )
    report = [
        f"stages = {args.stages}, per-stage filter a = {_fmt(args.a)}, b = {_fmt(args.b)}",
        f"total success probability = {_fmt(p_total)}",
        f"iterative output coherence = {_coherence_report(iter_coh, cfg.log_base)}",
        "single-copy optimal coherence at equal P_S = "
        + _coherence_report(best.objective, cfg.log_base),
        f"sequential-equivalence residual (max element) = {residual:.3e}",
    ]
    ok = residual <= 1e-10 and iter_coh <= best.objective + 1e-6
    report.append("PASS" if ok else "FAIL")
    text = "\n".join(report)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_choi(args: argparse.Namespace, cfg: RunConfig) -> int:
    params = synthesis.TwoQubitFilterParams(a=args.a, b=args.b)
    filt = params.to_filter()
    ideal = optics.choi_of_filter(filt)
    if args.phases:
        phases = optics.PhaseProfile(
            phases=np.asarray([float(t) for t in args.phases.split(",")])
        )
        chi = optics.choi_of_filter(filt, phases)
    else:
        chi = ideal
    purity, fidelity = optics.process_metrics(chi, ideal)
    compensated, _profile = optics.compensate_phases(chi)
    _, fidelity_comp = optics.process_metrics(compensated, ideal)
    Path(args.out).write_text(optics.choi_to_text(chi), encoding="utf-8")
    print(f"process matrix written to {args.out}")
    print(f"process purity = {_fmt(purity)}")
    print(f"process fidelity vs ideal = {_fmt(fidelity)}")
    print(f"process fidelity after phase compensation = {_fmt(fidelity_comp)}")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace, cfg: RunConfig) -> int:
    target = _TARGETS[args.target]
    spectrum = _parse_spectrum(args.spectrum)
    if (args.p is None) == (args.state is None):
        raise _UsageError("give exactly one of --p or --state")
    if args.state is not None:
        state = qstate_from_text(Path(args.state).read_text(encoding="utf-8"))
    else:
        state = product_pure_state(args.p, 2)
    if state.dim != spectrum.dim:
        raise DomainError(
            f"spectrum has {spectrum.dim} levels but the state has dimension {state.dim}"
        )
    result = oracle.grid_search(
        state,
        spectrum,
        target,
        args.ps,
        grid_step=args.grid_step,
        tolerance=args.tolerance,
        threads=cfg.threads,
    )
    if target is FilterTarget.ENERGY:
        synth = synthesis.energy_optimal_filter(state, spectrum, args.ps)
    elif target is FilterTarget.COHERENCE:
        synth = synthesis.coherence_optimal_filter_pure(state, args.ps)
    else:
        synth = synthesis.tsallis_optimal_filter(state, args.ps)
    synth_obj = oracle.objective_value(state, spectrum, target, synth)
    shortfall = result.objective - synth_obj
    print(f"oracle filter: {_describe_filter(result.filter)}")
    print(f"oracle objective = {_fmt(result.objective)} at P_S = {_fmt(result.p_success)}")
    print(f"synthesized objective = {_fmt(synth_obj)}")
    print(f"shortfall (oracle - synthesized) = {shortfall:.3e}")
    print("PASS" if shortfall <= 1e-3 else "FAIL")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly and dispatch
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value config file; flags override it")
    sub.add_argument("--log-base", choices=("e", "2"), default="e")
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--seed", type=int, default=0)


def build_parser() -> _Parser:
    parser = _Parser(prog="coherence-forge", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_filter = subs.add_parser("filter", help="synthesize one optimal filter")
    p_filter.add_argument("--p", type=float, required=True)
    p_filter.add_argument("--ps", type=float, required=True)
    p_filter.add_argument("--target", choices=tuple(_TARGETS), required=True)
    p_filter.add_argument(
        "--mode", choices=("closed-form", "general", "tsallis"), default="closed-form"
    )
    p_filter.add_argument("--spectrum", default="0,1,1,2")
    p_filter.add_argument("--out", help="write the filter in text form")
    _add_common(p_filter)

    p_front = subs.add_parser("frontier", help="trace a trade-off frontier to CSV/SVG")
    p_front.add_argument("--p", type=float, required=True)
    p_front.add_argument("--target", choices=tuple(_TARGETS), default="coherence")
    p_front.add_argument(
        "--family", choices=("optimal", "factorized", "both"), default="both"
    )
    p_front.add_argument("--grid", type=int, default=200)
    p_front.add_argument("--out-csv", required=True)
    p_front.add_argument("--out-svg")
    p_front.add_argument("--spectrum", default="0,1,1,2")
    _add_common(p_front)

    p_scan = subs.add_parser("mixed-scan", help="optimize the a=0 family over mixed states")
    p_scan.add_argument("--eta", type=float, required=True)
    p_scan.add_argument("--p-min", type=float, default=0.05)
    p_scan.add_argument("--p-max", type=float, default=0.45)
    p_scan.add_argument("--steps", type=int, required=True)
    p_scan.add_argument("--out-csv", required=True)
    _add_common(p_scan)

    p_iter = subs.add_parser("iterate", help="two-stage pairwise protocol checks")
    p_iter.add_argument("--p", type=float, required=True)
    p_iter.add_argument("--stages", type=int, default=2)
    p_iter.add_argument("--a", type=float, default=0.0)
    p_iter.add_argument("--b", type=float, default=1.0)
    p_iter.add_argument("--grid-step", type=float, default=0.04)
    p_iter.add_argument("--out", help="also write the report to a file")
    _add_common(p_iter)

    p_choi = subs.add_parser("choi", help="process matrix and metrics of an (a, b) filter")
    p_choi.add_argument("--a", type=float, required=True)
    p_choi.add_argument("--b", type=float, required=True)
    p_choi.add_argument("--phases", help="comma-separated basis-state phases (radians)")
    p_choi.add_argument("--out", required=True)
    _add_common(p_choi)

    p_oracle = subs.add_parser("oracle", help="brute-force check of a synthesizer")
    p_oracle.add_argument("--p", type=float)
    p_oracle.add_argument("--state", help="QState text file")
    p_oracle.add_argument("--ps", type=float, required=True)
    p_oracle.add_argument("--target", choices=tuple(_TARGETS), required=True)
    p_oracle.add_argument("--grid-step", type=float, default=0.02)
    p_oracle.add_argument("--tolerance", type=float, default=None)
    p_oracle.add_argument("--spectrum", default="0,1,1,2")
    _add_common(p_oracle)

    return parser


_HANDLERS = {
    "filter": _cmd_filter,
    "frontier": _cmd_frontier,
    "mixed-scan": _cmd_mixed_scan,
    "iterate": _cmd_iterate,
    "choi": _cmd_choi,
    "oracle": _cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _splice_config(argv)
        parser = build_parser()
        args = parser.parse_args(argv)
        cfg = RunConfig(
            log_base=args.log_base,
            threads=args.threads if args.threads is not None else _default_threads(),
            seed=args.seed,
            config_path=getattr(args, "config", None),
        )
        return _HANDLERS[args.command](args, cfg)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
