from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from dotenv import load_dotenv

from analysis import (
    ProbeSettings,
    check_contraction,
    check_profile,
    check_tilde_invariance,
    classify,
    convergence_rule,
    detect_cauchy,
    cauchy_equivalent,
    probe_entourages,
)
from config_utils import (
    parse_number,
    read_bool_env,
    read_float_env,
    read_int_env,
    read_number_env,
    read_str_env,
)
from errors import ConfigError, EnumerationBudgetError, InputError, UnsupportedCommandError
from maps import orbit
from oracle import DEFAULT_GRID_DENSITY, DEFAULT_MAX_CARRIER, DEFAULT_SEED, DEFAULT_TRIALS, FiniteInstance, validate_instance
from report_writer import AnalysisReport
from space_config import SpaceConfig, parse_config

COMMANDS = ("check", "iterate", "classify", "validate", "report")
MAX_CARRIER_LIMIT = 5
EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class RunSettings:
    command: str
    alpha: Optional[Fraction]
    settings: ProbeSettings
    seed: int
    as_json: bool
    max_carrier: int
    report_path: Optional[str]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcontract",
        description="Certify Banach G-contractions on uniform spaces with a graph and classify their fixed points.",
    )
    parser.add_argument("--config", help="config file path or bundled fixture name (GCONTRACT_CONFIG)")
    parser.add_argument("--command", choices=COMMANDS, help="what to run (GCONTRACT_COMMAND, default report)")
    parser.add_argument("--alpha", type=parse_number, help="contraction constant to test against alpha*")
    parser.add_argument("--eps", type=parse_number, help="probe entourage scale")
    parser.add_argument("--max-iter", type=int, help="orbit iteration budget")
    parser.add_argument("--window", type=int, help="Cauchy window length")
    parser.add_argument("--seed", type=int, help="seed for randomized oracle trials")
    parser.add_argument("--json", action="store_true", default=None, help="emit the structured report")
    parser.add_argument("--max-carrier", type=int, help="largest carrier enumerated by validate (4 or 5)")
    return parser


def _first(*values):
    return next((value for value in values if value is not None), None)


def resolve_settings(args: argparse.Namespace, config: SpaceConfig) -> RunSettings:
    """Flag, then environment, then the config's [analysis] block, then defaults."""
    base = config.settings
    command = _first(args.command, read_str_env("COMMAND"), "report")
    if command not in COMMANDS:
        raise ConfigError([f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}"])
    settings = ProbeSettings(
        budget=_first(args.max_iter, read_int_env("MAX_ITER", 0) or None, base.budget),
        window=_first(args.window, read_int_env("WINDOW", 0) or None, base.window),
        eps=_first(args.eps, read_number_env("EPS", None), base.eps),
        divergence_bound=read_float_env("DIVERGENCE_BOUND", base.divergence_bound),
        slack=base.slack,
        tiny=base.tiny,
    )
    if settings.budget < 1 or settings.window < 1 or settings.eps <= 0:
        raise ConfigError(["max-iter, window and eps must be positive"])
    alpha = _first(args.alpha, read_number_env("ALPHA", None), config.alpha)
    if alpha is not None and not 0 < alpha < 1:
        raise ConfigError([f"alpha must lie in (0, 1), got {alpha}"])
    max_carrier = _first(args.max_carrier, read_int_env("MAX_CARRIER", 0) or None, config.max_carrier, DEFAULT_MAX_CARRIER)
    if not 1 <= max_carrier <= MAX_CARRIER_LIMIT:
        raise ConfigError([f"max-carrier must lie in 1..{MAX_CARRIER_LIMIT}, got {max_carrier}"])
    return RunSettings(
        command=command,
        alpha=alpha,
        settings=settings,
        seed=_first(args.seed, read_int_env("SEED", 0) or None, config.seed, DEFAULT_SEED),
        as_json=bool(_first(args.json, read_bool_env("JSON", False))),
        max_carrier=max_carrier,
        report_path=read_str_env("REPORT_PATH"),
    )


def _starts(config: SpaceConfig) -> list:
    if config.is_finite:
        return list(config.carrier.labels)
    points = {Fraction(g) for g in config.carrier.grid} | set(config.probes)
    return sorted(p for p in points if config.carrier.contains(p))


def _run_check(config: SpaceConfig, run: RunSettings, report: AnalysisReport) -> None:
    verdict = check_contraction(config.mapping, config.graph, config.family)
    profile = check_profile(config.mapping, config.graph, config.space, config.probes, run.settings, config.basis)
    report.add_section("contraction", verdict)
    report.add_section("continuity_profile", profile)
    if not verdict.is_contraction:
        report.record_violation("contraction")
    if run.alpha is not None:
        admissible = verdict.is_contraction and verdict.alpha_star <= run.alpha
        report.add_section("alpha_check", {"alpha": run.alpha, "admissible": admissible})
        if not admissible:
            report.record_violation("alpha")
    if config.is_finite:
        tilde = check_tilde_invariance(config.mapping, config.graph, config.family)
        report.add_section(
            "reverse_and_closure",
            {
                "reversed_is_contraction": tilde.reversed.is_contraction,
                "undirected_is_contraction": tilde.undirected.is_contraction,
                "consistent": tilde.consistent,
            },
        )


def _run_iterate(config: SpaceConfig, run: RunSettings, report: AnalysisReport) -> None:
    entourages = probe_entourages(config.basis, run.settings.eps)
    rule = convergence_rule(entourages, run.settings.window)
    orbits = {}
    rows = []
    for x in _starts(config):
        path = orbit(config.mapping, x, run.settings.budget, rule, run.settings.divergence_bound)
        cauchy = detect_cauchy(path, entourages, run.settings.window)
        orbits[x] = path
        rows.append(
            {
                "start": x,
                "status": path.describe_status(),
                "steps": path.steps,
                "last": path.last,
                "cauchy": cauchy.describe(),
            }
        )
        if not cauchy.cauchy:
            report.record_violation(f"cauchy:{x}")
    pairs = [
        {"starts": [x, y], "equivalent": cauchy_equivalent(orbits[x], orbits[y], entourages, run.settings.window)}
        for x, y in itertools.combinations(orbits, 2)
    ]
    report.add_section("orbits", rows)
    report.add_section("cauchy_equivalence", pairs)


def _run_classify(config: SpaceConfig, run: RunSettings, report: AnalysisReport) -> None:
    verdict = check_contraction(config.mapping, config.graph, config.family)
    profile = check_profile(config.mapping, config.graph, config.space, config.probes, run.settings, config.basis)
    result = classify(
        config.mapping, config.graph, config.space, profile, verdict, config.probes, run.settings, config.basis
    )
    report.add_section("contraction", verdict)
    report.add_section("continuity_profile", profile)
    report.add_section("classification", result)
    if result.picard.violated:
        report.record_violation("picard")
    if result.weakly_picard.violated:
        report.record_violation("weakly_picard")


def _run_validate(config: SpaceConfig, run: RunSettings, report: AnalysisReport) -> None:
    if not config.is_finite:
        raise UnsupportedCommandError("validate runs the finite-model oracle and needs a finite carrier.")
    instance = FiniteInstance(config.name, config.family, config.graph)
    verdicts = validate_instance(instance, run.seed, run.max_carrier, DEFAULT_GRID_DENSITY, DEFAULT_TRIALS)
    report.add_section("theorems", verdicts)
    for verdict in verdicts:
        if not verdict.holds:
            report.record_violation(verdict.theorem_id)


def execute(config: SpaceConfig, run: RunSettings) -> AnalysisReport:
    report = AnalysisReport(run.command, config.name, config.config_hash, run.seed)
    steps = {
        "check": (_run_check,),
        "iterate": (_run_iterate,),
        "classify": (_run_classify,),
        "validate": (_run_validate,),
        "report": (_run_check, _run_iterate, _run_classify) + ((_run_validate,) if config.is_finite else ()),
    }[run.command]
    for step in steps:
        step(config, run, report)
    logging.info("run_finished command=%s config=%s exit=%d", run.command, config.name, report.exit_code)
    return report


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        source = _first(args.config, read_str_env("CONFIG"))
        if source is None:
            raise ConfigError(["no config given; pass --config or set GCONTRACT_CONFIG"])
        config = parse_config(source)
        settings = resolve_settings(args, config)
        report = execute(config, settings)
    except ConfigError as exc:
        logging.error("config_rejected problems=%d", len(exc.diagnostics))
        for problem in exc.diagnostics:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnsupportedCommandError, EnumerationBudgetError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(report.render_json() if settings.as_json else report.render_text())
    if settings.report_path:
        report.write(settings.report_path, as_json=True)
    return EXIT_VIOLATED if report.exit_code else EXIT_OK


def main() -> None:
    load_dotenv()
    log_level_name = (os.getenv("GCONTRACT_LOG_LEVEL", "WARNING") or "WARNING").upper()
    log_level = getattr(logging, log_level_name, logging.WARNING)
    logging.basicConfig(level=log_level, format="%(asctime)s %(levelname)s %(message)s")
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
