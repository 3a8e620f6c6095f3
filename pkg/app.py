#!/usr/bin/env python3
"""
pssmp-limits - Command-Line Entry Point

Runs one experiment per limit theorem for increasing positive self-similar Markov
processes and writes a JSON report or a CSV table.

Commands:
1. limit-v (logarithmic growth against the V law, scaled age and overshoot)
2. darling-kac (occupation clock against Mittag-Leffler moments)
3. lil (running minimum of log X(t) / log t, lower envelope of xi)
4. expfun (exponential functional moments, mu, left tails)
5. frag (fragmentation and tagged fragments)
6. integral-test (upper-envelope verdicts)
7. short-time (small-time stable limit)
8. ergodic (logarithmic-time averages)
9. tabulate-v and dump-path (tables for plotting)

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 failed --check.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from experiments.config import DEFAULT_PROFILES_PATH, load_document, load_profile, resolve_config
from experiments.darling_kac_experiment import DarlingKacExperiment
from experiments.dump_path_experiment import DumpPathExperiment
from experiments.ergodic_experiment import ErgodicExperiment
from experiments.expfun_experiment import ExpFunctionalExperiment
from experiments.frag_experiment import FragmentationExperiment
from experiments.integral_test_experiment import IntegralTestExperiment
from experiments.lil_experiment import LilExperiment
from experiments.limit_v_experiment import LimitVExperiment
from experiments.short_time_experiment import ShortTimeExperiment
from experiments.tabulate_v_experiment import TabulateVExperiment
from pssmp_limits.errors import PssmpError
from pssmp_limits.report_writer import render_csv, render_json, write_text

COMMANDS = {
    cls.name: cls
    for cls in (
        LimitVExperiment,
        DarlingKacExperiment,
        LilExperiment,
        ExpFunctionalExperiment,
        FragmentationExperiment,
        IntegralTestExperiment,
        ShortTimeExperiment,
        ErgodicExperiment,
        TabulateVExperiment,
        DumpPathExperiment,
    )
}

logger = logging.getLogger("pssmp_limits.app")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pssmp-limits",
        description="Limit-theorem experiments for increasing self-similar Markov processes",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run")
    parser.add_argument("--config", help="JSON or YAML configuration document")
    parser.add_argument("--seed", type=int, help="Master seed (overrides config and profile)")
    parser.add_argument("--out", help="Output file, '-' for stdout, or an existing directory")
    parser.add_argument("--format", choices=["csv", "json"], help="Output format (default json)")
    parser.add_argument("--check", action="store_true", help="Exit 4 when a tolerance check fails")
    parser.add_argument("--jobs", type=int, default=1, help="Worker processes for replicates")
    parser.add_argument("--profile", default="desk", help="Profile in the profiles document")
    parser.add_argument("--profiles", default=DEFAULT_PROFILES_PATH, help="Profiles document")
    parser.add_argument("--timing", action="store_true", help="Report wall-clock runtime")
    return parser


def _output_path(out: Optional[str], experiment) -> Optional[str]:
    if out and os.path.isdir(out):
        return os.path.join(out, experiment.get_output_name())
    return out


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    # ============================================================================
    # STEP 1: Load profile and configure logging
    # ============================================================================
    try:
        profile = load_profile(args.profile, args.profiles)
    except PssmpError as e:
        logging.basicConfig(level=logging.ERROR)
        logger.error(f"Could not load profile: {str(e)}")
        return e.exit_code

    log_level = os.getenv("LOG_LEVEL", profile.get("log_level", "INFO")).upper()
    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )
    logger.info(f"Running {args.command} with profile: {args.profile}")

    experiment_class = COMMANDS[args.command]
    try:
        # ============================================================================
        # STEP 2: Resolve configuration (profile -> config file -> flags)
        # ============================================================================
        user_document = load_document(args.config) if args.config else None
        config = resolve_config(
            args.command,
            args.profile,
            profile,
            experiment_class.PARAMETERS,
            experiment_class.requires_spec,
            user_document,
            {"seed": args.seed, "output": args.out, "format": args.format},
        )

        # ============================================================================
        # STEP 3: Run the experiment
        # ============================================================================
        experiment = experiment_class(config, jobs=args.jobs, timing=args.timing)
        report = experiment.run()

        # ============================================================================
        # STEP 4: Write output (atomically, only after success)
        # ============================================================================
        if config.format == "csv":
            content = render_csv(experiment.rows)
        else:
            content = render_json(report)
        write_text(content, _output_path(config.output, experiment))
        logger.info(f"Verdict: {report['verdict']['status']}")

        # ============================================================================
        # STEP 5: Enforce tolerances in --check mode
        # ============================================================================
        if args.check:
            experiment.enforce(report)
    except PssmpError as e:
        logger.error(f"{args.command} failed: {str(e)}", exc_info=True)
        return e.exit_code
    except ArithmeticError as e:
        logger.error(f"{args.command} failed with a numeric error: {str(e)}", exc_info=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
