"""Command-line front end.

Exit codes: 0 success, 1 validation or simulation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import reproduce as rep
from .analytic import DomainError, analyze_network
from .netmodel import (
    NetworkError,
    NetworkSpec,
    check_overtake_free,
    check_stability,
    parse_network,
    solve_traffic,
)
from .reproduce import UNSTABLE, fmt
from .simcore import SimConfig, SimulationError, simulate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


def _writer(out: TextIO):
    return csv.writer(out, lineterminator="\n")


def _load(path: str) -> NetworkSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read spec file {path}: {e.strerror}") from None
    return parse_network(text)


def _require_valid(net: NetworkSpec) -> None:
    problems = [str(v) for v in check_stability(solve_traffic(net), net)]
    problems += [str(v) for v in check_overtake_free(net)]
    if problems:
        raise ValidationFailure("; ".join(problems))


# --- subcommands --------------------------------------------------------------

def cmd_validate(args, out: TextIO) -> int:
    net = _load(args.spec)
    flow = solve_traffic(net)
    out.write("node,lambda,mu,rho\n")
    for n in sorted(net.nodes, key=lambda n: n.id):
        out.write(f"{n.id},{fmt(flow.node_total_rate[n.id])},{fmt(n.mu)},{fmt(flow.node_load[n.id])}\n")
    unstable = check_stability(flow, net)
    overtaking = check_overtake_free(net)
    for v in unstable:
        out.write(f"unstable: {v}\n")
    for v in overtaking:
        out.write(f"overtake violation: {v}\n")
    verdict = ["stable" if not unstable else "unstable",
               "overtake-free (conservative check)" if not overtaking else "not overtake-free"]
    out.write("verdict: " + ", ".join(verdict) + "\n")
    return EXIT_OK if not (unstable or overtaking) else EXIT_INVALID


def cmd_analyze(args, out: TextIO) -> int:
    net = _load(args.spec)
    _require_valid(net)
    reports = analyze_network(net)
    node_ids = sorted(n.id for n in net.nodes)
    w = _writer(out)
    header = ["class", "lambda", "h_left", "h", "h_right", "peak", "peak_kind"]
    for i in node_ids:
        header += [f"wait_{i}", f"service_{i}"]
    w.writerow(header)
    for c in net.classes:
        r = reports[c.name]
        terms = {t.node: t for t in r.per_node_terms}
        row = [c.name, fmt(c.lam), fmt(r.h_left), fmt(r.h), fmt(r.h_right), fmt(r.peak),
               "extended" if r.peak_extended else "exact"]
        for i in node_ids:
            t = terms.get(i)
            row += [fmt(t.waiting), fmt(t.service)] if t else ["", ""]
        w.writerow(row)
    return EXIT_OK


def _sim_config(args) -> SimConfig:
    try:
        return SimConfig(horizon=args.horizon, warmup_fraction=args.warmup_frac,
                         replications=args.replications, master_seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_simulate(args, out: TextIO) -> int:
    net = _load(args.spec)
    _require_valid(net)
    cfg = _sim_config(args)
    stats = simulate(net, cfg, trace=sys.stderr if args.trace else None)
    analytic = analyze_network(net)
    w = _writer(out)
    w.writerow(["class", "lambda", "h_hat", "h_hat_ci", "h_left_hat", "h_right_hat", "peak_hat",
                "d_mean", "d_m2", "sojourn_mean", "departures", "h_analytic"])
    for c in net.classes:
        s = stats.classes[c.name]
        w.writerow([c.name, fmt(c.lam), fmt(s.h_hat.mean), fmt(s.h_hat.half_width),
                    fmt(s.h_left_hat.mean), fmt(s.h_right_hat.mean), fmt(s.peak_hat.mean),
                    fmt(s.d_mean.mean), fmt(s.d_second_moment.mean), fmt(s.sojourn_mean.mean),
                    s.departures_count, fmt(analytic[c.name].h)])
    return EXIT_OK


def parse_grid(text: str) -> tuple[str, list[float]]:
    """``param=start:stop:step`` -> (param, points). Points never exceed ``stop``."""
    name, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or not name or len(parts) != 3:
        raise UsageError(f"malformed grid {text!r}; expected param=start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"malformed grid {text!r}; bounds must be numbers") from None
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise UsageError("grid bounds must be finite")
    if not (start > 0 and step > 0 and start <= stop):
        raise UsageError("grid needs 0 < start <= stop and step > 0")
    count = math.floor((stop - start) / step + 1e-9)
    return name, [round(start + k * step, 12) for k in range(count + 1)]


def _apply_param(net: NetworkSpec, param: str, value: float) -> NetworkSpec:
    kind, _, target = param.partition(".")
    if kind == "lambda":
        if not target:
            if len(net.classes) != 1:
                raise UsageError("bare 'lambda' needs a single-class network; use lambda.<class>")
            target = net.classes[0].name
        try:
            return net.with_class_rate(target, value)
        except KeyError:
            raise UsageError(f"unknown class {target!r} in grid parameter") from None
    if kind == "mu":
        try:
            return net.with_service_rate(int(target), value)
        except (KeyError, ValueError):
            raise UsageError(f"unknown node {target!r} in grid parameter") from None
    raise UsageError(f"unknown grid parameter {param!r}; use lambda.<class> or mu.<node>")


def cmd_sweep(args, out: TextIO) -> int:
    net = _load(args.spec)
    if not args.grid:
        raise UsageError("sweep needs --grid param=start:stop:step")
    param, points = parse_grid(args.grid)
    overtaking = check_overtake_free(net)
    if overtaking:
        raise ValidationFailure("; ".join(map(str, overtaking)))
    cfg = _sim_config(args) if args.simulate else None
    names = [c.name for c in net.classes]
    header = [param] + [f"h_{n}" for n in names]
    if cfg is not None:
        header += [col for n in names for col in (f"h_hat_{n}", f"h_hat_ci_{n}")]
    w = _writer(out)
    w.writerow(header)
    for value in points:
        point = _apply_param(net, param, value)
        if check_stability(solve_traffic(point), point):
            w.writerow([fmt(value)] + [UNSTABLE] * (len(header) - 1))
            continue
        reports = analyze_network(point)
        row = [fmt(value)] + [fmt(reports[n].h) for n in names]
        if cfg is not None:
            stats = simulate(point, cfg)
            for n in names:
                row += [fmt(stats.classes[n].h_hat.mean), fmt(stats.classes[n].h_hat.half_width)]
        w.writerow(row)
    return EXIT_OK


def _write_summary(path: Path, summary: dict[str, str]) -> None:
    path.write_text("".join(f"{k}={v}\n" for k, v in summary.items()), encoding="utf-8")


def cmd_reproduce(args, out: TextIO) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = write_reproduction(args.figure, out_dir)
    except OSError as e:
        out.write(f"error: cannot write to {out_dir}: {e.strerror}\n")
        return EXIT_INVALID
    for p in written:
        out.write(f"{p}\n")
    return EXIT_OK


def write_reproduction(figure: str, out_dir: Path) -> list[Path]:
    written: list[Path] = []
    figures = ("fig3", "fig5a", "fig5b") if figure == "all" else (figure,)
    for fig in figures:
        path = out_dir / f"{fig}.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = _writer(fh)
            if fig == "fig3":
                w.writerow(["lambda", "n", "H"])
                for lam, n, h in rep.fig3_rows():
                    w.writerow([fmt(lam), n, fmt(h)])
            elif fig == "fig5a":
                w.writerow(["lambda_a", "lambda_b", "H_alpha"])
                for p in rep.fig5_points():
                    w.writerow([fmt(p.lambda_a), fmt(p.lambda_b), fmt(p.h_alpha)])
            else:
                w.writerow(["lambda_a", "lambda_b", "H_alpha", "H_beta"])
                for p in rep.fig5_points():
                    w.writerow([fmt(p.lambda_a), fmt(p.lambda_b), fmt(p.h_alpha), fmt(p.h_beta)])
        written.append(path)
    if "fig3" in figures:
        path = out_dir / "fig3_summary.txt"
        _write_summary(path, rep.fig3_summary())
        written.append(path)
    if "fig5a" in figures or "fig5b" in figures:
        path = out_dir / "fig5_summary.txt"
        _write_summary(path, rep.fig5_summary())
        written.append(path)
    return written


# --- argument parsing -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=1, help="master seed (unsigned 64-bit)")
    p.add_argument("--horizon", type=float, default=1e5, help="simulated time per replication")
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--warmup-frac", type=float, default=0.1, help="fraction of horizon discarded")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aoinet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="traffic solution, stability and overtake-free checks")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="closed-form ages per class (CSV)")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="simulated ages per class with confidence intervals (CSV)")
    p.add_argument("--spec", required=True)
    _add_sim_flags(p)
    p.add_argument("--trace", action="store_true", help="write class,gen_time,exit_time per departure to stderr")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="ages over a one-parameter grid (CSV)")
    p.add_argument("--spec", required=True)
    p.add_argument("--grid", required=True, help="param=start:stop:step, param is lambda, lambda.<class> or mu.<node>")
    p.add_argument("--simulate", action="store_true", help="also simulate every stable grid point")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="write the tandem / two-class figure grids and summaries")
    p.add_argument("figure", choices=["fig3", "fig5a", "fig5b", "all"])
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"aoinet: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NetworkError, DomainError, ValidationFailure, SimulationError) as e:
        print(f"aoinet: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
