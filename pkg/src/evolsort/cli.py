"""
Command-line entry point.

Subcommands: run (single trajectory), scale (scaling study), protocol-mdev,
protocol-tdev, lb-mdev, lb-converge, verify (acceptance property suites).
Configuration comes from flags and/or a flat key=value file ('#' comments);
flags override the file.  Exit codes: 0 success, 1 usage error, 2 runtime
error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields

from .aux import DEFAULT_ALPHA
from .model import (
    ALGORITHMS,
    ConfigurationError,
    PerturbationSpec,
    ProcessState,
    StepSchedule,
    TrajectoryRecord,
    run,
)

__all__ = ["RunConfig", "parse_config", "emit_csv", "main"]

CSV_HEADER = "step,phase,mdev,dev,kendall,phi,psi,max_delta,sorts,mixes"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    n: int = 256
    b: int = 1
    algorithm: str = "naive"
    dist: str = "adjacent"
    schedule: str = "fixed"
    steps: int = 100_000
    seed: int = 1
    record_every: int = 0  # 0 = record only the final state
    aux: bool = False
    d: int = 2
    alpha: str = "auto"  # "auto" = log(20)/(d-1)
    start: str = "reverse"
    out: str = "-"

    def validate(self) -> None:
        if self.n < 1:
            raise UsageError(f"n must be >= 1, got {self.n}")
        if self.steps < 0:
            raise UsageError(f"steps must be >= 0, got {self.steps}")
        if self.b < 0:
            raise UsageError(f"b must be >= 0, got {self.b}")
        if self.record_every < 0:
            raise UsageError(f"record_every must be >= 0, got {self.record_every}")
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.d < 2:
            raise UsageError(f"d must be >= 2, got {self.d}")
        if self.start not in ("identity", "reverse"):
            raise UsageError(f"start must be identity or reverse, got {self.start!r}")
        self.resolved_alpha()
        self.perturbation()
        self.step_schedule()

    def resolved_alpha(self) -> float:
        if self.alpha == "auto":
            return DEFAULT_ALPHA / (self.d - 1)
        try:
            value = float(self.alpha)
        except ValueError:
            raise UsageError(f"alpha must be a number or 'auto', got {self.alpha!r}") from None
        if value <= 0:
            raise UsageError(f"alpha must be positive, got {value}")
        return value

    def perturbation(self) -> PerturbationSpec:
        spec = self.dist
        try:
            if spec == "adjacent":
                return PerturbationSpec.adjacent()
            if spec.startswith("geometric:"):
                return PerturbationSpec.geometric(float(spec.split(":", 1)[1]))
            if spec.startswith("table:"):
                return PerturbationSpec.from_table_file(spec.split(":", 1)[1])
        except (ConfigurationError, ValueError, OSError) as exc:
            raise UsageError(f"bad --dist {spec!r}: {exc}") from exc
        raise UsageError(f"bad --dist {spec!r}: expected adjacent, geometric:P or table:PATH")

    def step_schedule(self) -> StepSchedule:
        spec = self.schedule
        try:
            if spec == "fixed":
                return StepSchedule.fixed(self.b)
            if spec.startswith("explicit:"):
                return StepSchedule.explicit_file(spec.split(":", 1)[1], max(1, self.b))
            if spec.startswith("iid:"):
                parts = spec.split(":")
                if parts[1] == "uniform":
                    lo, hi = (int(x) for x in parts[2].split(","))
                    return StepSchedule.iid(max(1, self.b), ("uniform", lo, hi))
                if parts[1] == "poisson":
                    return StepSchedule.iid(max(1, self.b), ("poisson", float(parts[2])))
                if parts[1] == "constant":
                    return StepSchedule.iid(max(1, self.b), ("constant", int(parts[2])))
        except UsageError:
            raise
        except (ConfigurationError, ValueError, OSError, IndexError) as exc:
            raise UsageError(f"bad --schedule {spec!r}: {exc}") from exc
        raise UsageError(f"bad --schedule {spec!r}: expected fixed, explicit:PATH, "
                         "iid:uniform:LO,HI, iid:poisson:MU or iid:constant:K")

    def print_lines(self) -> str:
        parts = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            parts.append(f"{f.name}={value}")
        return "\n".join(parts) + "\n"


_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}
_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    if ftype == "bool":
        if raw.lower() not in _BOOL:
            raise UsageError(f"bad boolean for {key}: {raw!r}")
        return _BOOL[raw.lower()]
    if ftype == "int":
        try:
            return int(raw)
        except ValueError:
            raise UsageError(f"bad integer for {key}: {raw!r}") from None
    return raw


def load_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in _FIELD_TYPES:
                    raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _coerce(key, value)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return values


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Build a RunConfig: defaults, then config file, then explicit flags."""
    config = RunConfig()
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            setattr(config, key, value)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(config, f.name, value)
    config.validate()
    return config


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def emit_csv(records: list[TrajectoryRecord], path: str) -> None:
    """Write the trajectory schema; '-' writes to stdout."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join((
            str(r.step), str(r.phase), str(r.mdev), str(r.dev), str(r.kendall),
            _fmt(r.phi), _fmt(r.psi), _fmt(r.max_delta), str(r.sorts), str(r.mixes))))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--n", type=int)
    parser.add_argument("--b", type=int)
    parser.add_argument("--algorithm", choices=ALGORITHMS)
    parser.add_argument("--dist", help="adjacent | geometric:P | table:PATH")
    parser.add_argument("--schedule",
                        help="fixed | explicit:PATH | iid:uniform:LO,HI | iid:poisson:MU")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--record-every", dest="record_every", type=int)
    parser.add_argument("--aux", dest="aux", action="store_const", const=True)
    parser.add_argument("--no-aux", dest="aux", action="store_const", const=False)
    parser.add_argument("--d", type=int)
    parser.add_argument("--alpha")
    parser.add_argument("--start", choices=("identity", "reverse"))
    parser.add_argument("--out")
    parser.add_argument("--print-config", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="evolsort",
                     description="Sorting on evolving data: simulator and verifier")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("run", "single trajectory to CSV"),
            ("scale", "scaling study over several n"),
            ("protocol-mdev", "group protocol with full target resets"),
            ("protocol-tdev", "shrinking phases with partial target resets"),
            ("lb-mdev", "lower-bound experiment: peak max deviation growth"),
            ("lb-converge", "lower-bound experiment: convergence time"),
            ("verify", "run acceptance property suites")):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "scale":
            p.add_argument("--n-list", default="128,256,512")
            p.add_argument("--seeds", type=int, default=10)
            p.add_argument("--series-dir", dest="series_dir",
                           help="also write per-run trajectory CSVs here")
        if name in ("lb-mdev",):
            p.add_argument("--n-list", default="256,512,1024,2048")
            p.add_argument("--seeds", type=int, default=20)
        if name in ("lb-converge",):
            p.add_argument("--seeds", type=int, default=20)
            p.add_argument("--initial-mdev", dest="initial_mdev", type=int)
        if name in ("protocol-mdev", "protocol-tdev"):
            p.add_argument("--groups", type=int, default=8)
        if name == "verify":
            p.add_argument("--criteria", help="comma-separated criterion ids (default all)")
    return parser


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_run(args, config: RunConfig) -> int:
    from .aux import AuxTracker

    state = ProcessState.from_seed(config.n, config.seed, config.start)
    observers = ()
    if config.aux:
        observers = (AuxTracker(state, d=config.d, alpha=config.resolved_alpha()),)
    records = run(state, config.perturbation(), config.step_schedule(),
                  config.steps, algorithm=config.algorithm, observers=observers,
                  record_every=config.record_every)
    emit_csv(records, config.out)
    return 0


def _cmd_scale(args, config: RunConfig) -> int:
    from .harness import run_scaling_study

    n_list = [int(x) for x in args.n_list.split(",")]
    seeds = range(1001, 1001 + args.seeds)
    rows = run_scaling_study(n_list, config.b, config.perturbation(),
                             algorithm=config.algorithm, seeds=list(seeds),
                             start=config.start, series_dir=args.series_dir)
    lines = ["n,horizon,median_dev_over_n,median_mdev_over_log2n"]
    for row in rows:
        lines.append(f"{row.n},{row.horizon},{row.median_dev_ratio:.6g},"
                     f"{row.median_mdev_ratio:.6g}")
    _write_lines(lines, config.out)
    return 0


def _cmd_protocol_mdev(args, config: RunConfig) -> int:
    from .harness import ProtocolConfig, run_mdev_protocol

    report = run_mdev_protocol(config.n, config.b, config.perturbation(),
                               config.seed, ProtocolConfig(d=config.d),
                               groups=args.groups, start=config.start)
    lines = [f"# n={report.n} b={report.b} k={report.k} cap={report.cap:.6g} "
             f"final_mdev={report.final_mdev} "
             f"monotone_violations={report.monotone_violations}",
             "group,phi_start,phi_end,cap_violations"]
    for g in report.groups:
        lines.append(f"{g.index},{g.phi_start:.6g},{g.phi_end:.6g},{g.cap_violations}")
    _write_lines(lines, config.out)
    return 0


def _cmd_protocol_tdev(args, config: RunConfig) -> int:
    from .harness import ProtocolConfig, run_tdev_protocol

    report = run_tdev_protocol(config.n, config.b, config.perturbation(),
                               config.seed, ProtocolConfig(d=config.d),
                               start=config.start)
    lines = [f"# n={report.n} b={report.b} final_dev={report.final_dev} "
             f"final_mdev={report.final_mdev} "
             f"monotone_violations={report.monotone_violations}",
             "phase,k,theta,phi_end,phi_tilde_end,psi_end,dev_tau,tail,filter_bound_ok"]
    for p in report.phases:
        lines.append(f"{p.index},{p.k},{p.theta:.6g},{p.phi_end:.6g},"
                     f"{p.phi_tilde_end:.6g},{p.psi_end:.6g},{p.dev_tau},"
                     f"{p.tail},{int(p.filter_bound_ok)}")
    _write_lines(lines, config.out)
    return 0


def _cmd_lb_mdev(args, config: RunConfig) -> int:
    from .harness import run_lower_bound_mdev

    n_list = [int(x) for x in args.n_list.split(",")]
    seeds = list(range(2001, 2001 + args.seeds))
    rows = run_lower_bound_mdev(n_list, b=config.b, seeds=seeds)
    lines = ["n,horizon,median_peak_mdev,median_endpoint_mdev"]
    for row in rows:
        lines.append(f"{row.n},{row.horizon},{row.median_peak:.6g},"
                     f"{row.median_endpoint:.6g}")
    _write_lines(lines, config.out)
    return 0


def _cmd_lb_converge(args, config: RunConfig) -> int:
    from .harness import run_lower_bound_convergence

    seeds = list(range(2001, 2001 + args.seeds))
    report = run_lower_bound_convergence(config.n, b=config.b,
                                         initial_mdev=args.initial_mdev,
                                         seeds=seeds)
    lines = [f"# n={report.n} initial_mdev={report.initial_mdev} "
             f"threshold_steps={report.threshold_steps} horizon={report.horizon} "
             f"fraction_slow={report.fraction_slow:.4f}",
             "seed,first_step_below_quarter"]
    for seed, first in zip(seeds, report.first_below):
        lines.append(f"{seed},{first}")
    _write_lines(lines, config.out)
    return 0


def _cmd_verify(args, config: RunConfig) -> int:
    from .acceptance import run_criteria

    ids = None
    if args.criteria:
        try:
            ids = {int(x) for x in args.criteria.split(",")}
        except ValueError:
            raise UsageError(f"bad --criteria {args.criteria!r}") from None
    results = run_criteria(ids, progress=print)
    return 0 if all(r.passed for r in results) else 3


def _write_lines(lines: list[str], path: str) -> None:
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


_COMMANDS = {
    "run": _cmd_run,
    "scale": _cmd_scale,
    "protocol-mdev": _cmd_protocol_mdev,
    "protocol-tdev": _cmd_protocol_tdev,
    "lb-mdev": _cmd_lb_mdev,
    "lb-converge": _cmd_lb_converge,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = parse_config(args)
        if getattr(args, "print_config", False):
            sys.stdout.write(config.print_lines())
            return 0
        return _COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigurationError, RuntimeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
