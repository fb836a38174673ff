"""Command-line entry point: ``oncoflow {simulate,doe,validate,report}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import reports
from .clinic import run_day
from .errors import DataError, ScenarioParseError, ValidationError
from .experiments import (
    compare_scenarios,
    doe_anova,
    run_doe,
    run_replications,
    validation_report,
)
from .scenario import FactorLevels, Scenario, apply_factor_levels, load_scenario, status_quo_scenario
from .stochastics import make_stream


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Command:
    verb: str
    out_path: Path
    scenario_path: Optional[Path] = None
    replications: int = 1
    seed: int = 0
    config_index: int = 0
    factors: Optional[FactorLevels] = None
    real_data_path: Optional[Path] = None
    trace_dir: Optional[Path] = None
    candidate_path: Optional[Path] = None
    reference_path: Optional[Path] = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oncoflow", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    # required flags are checked in parse_args so unknown flags are reported first
    def common(p):
        p.add_argument("--scenario", type=Path, help="scenario JSON (default: status quo)")
        p.add_argument("--replications", type=_positive, help="required")
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--out", type=Path, help="required")

    p = sub.add_parser("simulate", help="replicate one scenario, write per-day KPIs")
    common(p)
    p.add_argument("--factors", help="DOE levels alpha-beta-gamma-delta, e.g. B-A-B-A")
    p.add_argument("--config-index", type=int, default=0, help="stream index (default 0)")
    p.add_argument("--trace", type=Path, metavar="DIR", help="also write day_<i>.csv traces")

    p = sub.add_parser("doe", help="full-factorial campaign; writes doe.csv, marginals.csv, anova.csv")
    common(p)

    p = sub.add_parser("validate", help="compare observed days with the simulation")
    common(p)
    p.add_argument("--real-data", type=Path, help="required")

    p = sub.add_parser("report", help="compare two simulate outputs")
    p.add_argument("--candidate", type=Path, help="required")
    p.add_argument("--reference", type=Path, help="required")
    p.add_argument("--out", type=Path, help="required")
    return parser


_REQUIRED = {
    "simulate": ("replications", "out"),
    "doe": ("replications", "out"),
    "validate": ("replications", "out", "real_data"),
    "report": ("candidate", "reference", "out"),
}


def parse_args(argv: Sequence[str]) -> Command:
    ns = build_parser().parse_args(list(argv))
    missing = ["--" + k.replace("_", "-") for k in _REQUIRED[ns.verb] if getattr(ns, k) is None]
    if missing:
        raise UsageError(f"oncoflow {ns.verb}: the following arguments are required: "
                         + ", ".join(missing))
    if ns.verb == "report":
        return Command("report", ns.out, candidate_path=ns.candidate, reference_path=ns.reference)
    factors = None
    if getattr(ns, "factors", None):
        try:
            factors = FactorLevels.parse(ns.factors)
        except ValidationError as exc:
            raise UsageError(f"--factors: {exc}") from None
    if getattr(ns, "config_index", 0) < 0:
        raise UsageError("--config-index must be >= 0")
    if ns.verb == "doe" and ns.replications < 2:
        raise UsageError("--replications must be >= 2 for doe")
    return Command(
        verb=ns.verb,
        out_path=ns.out,
        scenario_path=ns.scenario,
        replications=ns.replications,
        seed=ns.seed,
        config_index=getattr(ns, "config_index", 0),
        factors=factors,
        real_data_path=getattr(ns, "real_data", None),
        trace_dir=getattr(ns, "trace", None),
    )


def _scenario(cmd: Command) -> Scenario:
    if cmd.scenario_path is None:
        s = status_quo_scenario()
    else:
        try:
            text = cmd.scenario_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read scenario {cmd.scenario_path}: {exc.strerror}") from None
        s = load_scenario(text)
    if cmd.factors is not None:
        s = apply_factor_levels(s, cmd.factors)
    return s


def execute(cmd: Command) -> int:
    if cmd.verb == "simulate":
        s = _scenario(cmd)
        result = run_replications(s, cmd.replications, cmd.seed, cmd.config_index,
                                  scenario_id=cmd.out_path.stem)
        reports.write_replications(cmd.out_path, result)
        if cmd.trace_dir is not None:
            cmd.trace_dir.mkdir(parents=True, exist_ok=True)
            for i in range(cmd.replications):
                day = run_day(s, make_stream(cmd.seed, cmd.config_index, i))
                reports.write_trace(cmd.trace_dir / f"day_{i}.csv", day)
    elif cmd.verb == "doe":
        d = run_doe(_scenario(cmd), cmd.replications, cmd.seed)
        out_dir = cmd.out_path.parent
        reports.write_doe(cmd.out_path, d)
        reports.write_marginals(out_dir / "marginals.csv", d)
        reports.write_anova(out_dir / "anova.csv", doe_anova(d))
    elif cmd.verb == "validate":
        real = reports.read_real_days(cmd.real_data_path)
        sim = run_replications(_scenario(cmd), max(cmd.replications, len(real)), cmd.seed,
                               cmd.config_index)
        reports.write_validation(cmd.out_path, validation_report(real, sim))
    elif cmd.verb == "report":
        a = reports.read_replications(cmd.candidate_path)
        b = reports.read_replications(cmd.reference_path)
        reports.write_comparison(cmd.out_path, compare_scenarios(a, b))
    else:  # pragma: no cover - parser restricts verbs
        raise UsageError(f"unknown command {cmd.verb}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        print(build_parser().format_usage().rstrip(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return execute(cmd)
    except (ScenarioParseError, ValidationError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
