import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click

from .._compat import ValidationError
from ..adversary import AttackConfig, AttackConfigError
from ..analysis import (
    DEFAULT_CONTROL_RATES,
    DEFAULT_LENGTHS,
    DEFAULT_TRIALS,
    detection_table,
    leakage_sweep,
    sweep_diagnostics,
    write_csv,
    write_json,
)
from ..core import QubitBudgetError
from ..protocol import ProtocolAbortError, TranscriptParseError
from ..settings import LOG_LEVEL
from ..util import make_rng
from .config import (
    ConfigError,
    ScenarioConfig,
    apply_overrides,
    load_config,
    parse_attack_params,
)
from .replay import replay as replay_transcript
from .runner import ESTIMATES_FILE, SUMMARY_FILE, run_scenario


EXIT_COMPLETED = 0
EXIT_INCONSISTENT = 1
EXIT_EVE_DETECTED = 2
EXIT_CONFIG_ERROR = 3
EXIT_RESOURCE_ERROR = 4

PHASES = ["give", "collect", "share-psi", "share-phi", "full-exam"]
ATTACKS = [
    "none",
    "measure-resend",
    "disturbance",
    "entangle-measure",
    "intercept-resend",
    "masquerade",
]


def _fail(ctx: click.Context, message: str, code: int) -> None:
    click.echo(message, err=True)
    ctx.exit(code)


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _attack(kind: str, params: Tuple[str, ...]) -> AttackConfig:
    try:
        return AttackConfig(kind=kind, **parse_attack_params(params))
    except (ValidationError, AttackConfigError) as e:
        raise ConfigError("attack_params", str(e)) from e


@click.group()
@click.option(
    "--log-level",
    default=LOG_LEVEL,
    show_default=True,
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
)
def cli(log_level: str):
    """Simulate and analyse the quantum exam protocols."""
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--protocol", type=click.Choice(["absolute", "direct"]))
@click.option("--phase", type=click.Choice(PHASES))
@click.option("--students", type=int)
@click.option("--problem-len", type=int)
@click.option("--solution-len", type=int)
@click.option("--control-rate", type=float)
@click.option("--check-fraction", type=float)
@click.option("--attack", type=click.Choice(ATTACKS))
@click.option("--attack-param", "attack_params", multiple=True, metavar="K=V")
@click.option("--seed", type=int)
@click.option("--trials", type=int)
@click.option("--out", type=click.Path(file_okay=False))
@click.option("--workers", type=int)
@click.option("--error-threshold", type=float)
@click.option("--max-restarts", type=int)
@click.option("--direct-max-restarts", type=int)
@click.pass_context
def run(ctx: click.Context, config_path: Optional[str], attack_params: Tuple[str, ...], **flags):
    """Run a scenario and write transcript.jsonl, summary.json and estimates.csv."""
    try:
        base: Optional[ScenarioConfig] = load_config(config_path) if config_path else None
        overrides: Dict[str, Any] = dict(flags)
        if attack_params:
            overrides["attack_params"] = parse_attack_params(attack_params)
        config = apply_overrides(base, overrides)
    except ConfigError as e:
        return _fail(ctx, str(e), EXIT_CONFIG_ERROR)
    except QubitBudgetError as e:
        return _fail(ctx, str(e), EXIT_RESOURCE_ERROR)

    try:
        report = run_scenario(config)
    except (QubitBudgetError, ProtocolAbortError) as e:
        return _fail(ctx, str(e), EXIT_RESOURCE_ERROR)

    counts = ", ".join(f"{status}: {count}" for status, count in report.status_counts.items())
    click.echo(f"Run {report.run_id}: {counts}")
    for name, path in report.artifacts.items():
        click.echo(f"  {name}: {path}")
    if report.resource_error:
        ctx.exit(EXIT_RESOURCE_ERROR)
    if report.eve_detected:
        ctx.exit(EXIT_EVE_DETECTED)
    ctx.exit(EXIT_COMPLETED)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def replay(ctx: click.Context, path: str):
    """Check that every decode in a transcript follows from its records."""
    try:
        verdict = replay_transcript(path)
    except TranscriptParseError as e:
        return _fail(ctx, str(e), EXIT_CONFIG_ERROR)
    if verdict.consistent:
        suffix = f" up to the abort at seq {verdict.aborted_at}" if verdict.aborted_at is not None else ""
        click.echo(f"consistent: {verdict.checked} events checked{suffix}")
        ctx.exit(EXIT_COMPLETED)
    for issue in verdict.issues:
        click.echo(f"seq {issue.seq} ({issue.kind}): {issue.reason}")
    ctx.exit(EXIT_INCONSISTENT)


@cli.command()
@click.option("--attack", type=click.Choice(ATTACKS), default="measure-resend", show_default=True)
@click.option("--attack-param", "attack_params", multiple=True, metavar="K=V")
@click.option("--phase", type=click.Choice(["share-psi", "share-phi"]), default="share-psi", show_default=True)
@click.option("--students", type=int, default=2, show_default=True)
@click.option("--trials", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)
@click.pass_context
def detect(ctx: click.Context, attack: str, attack_params, phase, students, trials, seed, workers, out):
    """Per-basis detection rates of one attack, against the exact oracle."""
    try:
        config = _attack(attack, attack_params)
        estimates = detection_table(
            config, phase.replace("-", "_"), trials, make_rng(seed), students, workers
        )
    except (ConfigError, ValueError) as e:
        return _fail(ctx, str(e), EXIT_CONFIG_ERROR)
    except QubitBudgetError as e:
        return _fail(ctx, str(e), EXIT_RESOURCE_ERROR)
    out_dir = Path(out)
    write_csv(out_dir / ESTIMATES_FILE, estimates)
    write_json(out_dir / SUMMARY_FILE, {"attack": config, "seed": seed, "estimates": estimates})
    for estimate in estimates:
        click.echo(
            f"{estimate.basis}: {estimate.probability:.4f} "
            f"± {estimate.half_width:.4f} (oracle {estimate.oracle:.4f})"
        )


@cli.command()
@click.option("--attack", type=click.Choice(ATTACKS), default="measure-resend", show_default=True)
@click.option("--attack-param", "attack_params", multiple=True, metavar="K=V")
@click.option("--phase", type=click.Choice(["direct-give", "direct-collect"]), default="direct-give", show_default=True)
@click.option("--control-rates", default=",".join(map(str, DEFAULT_CONTROL_RATES)), show_default=True)
@click.option("--lengths", default=",".join(map(str, DEFAULT_LENGTHS)), show_default=True)
@click.option("--students", type=int, default=2, show_default=True)
@click.option("--trials", type=int, default=DEFAULT_TRIALS, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)
@click.pass_context
def sweep(
    ctx: click.Context,
    attack: str,
    attack_params,
    phase,
    control_rates,
    lengths,
    students,
    trials,
    seed,
    workers,
    out,
):
    """Leakage before detection over a grid of control rates and lengths."""
    try:
        config = _attack(attack, attack_params)
        rates: List[float] = list(_floats(control_rates))
        sizes: List[int] = list(_ints(lengths))
        reports = leakage_sweep(
            config,
            rates,
            sizes,
            trials,
            make_rng(seed),
            phase=phase.replace("-", "_"),
            students=students,
            workers=workers,
        )
    except (ConfigError, ValueError) as e:
        return _fail(ctx, str(e), EXIT_CONFIG_ERROR)
    except QubitBudgetError as e:
        return _fail(ctx, str(e), EXIT_RESOURCE_ERROR)
    diagnostics = sweep_diagnostics(reports)
    out_dir = Path(out)
    write_csv(out_dir / ESTIMATES_FILE, reports)
    write_json(
        out_dir / SUMMARY_FILE,
        {
            "attack": config,
            "seed": seed,
            "cells": reports,
            "diagnostics": diagnostics.as_dict(),
        },
    )
    click.echo(
        f"{len(reports)} cells; detection non-decreasing in M: "
        f"{diagnostics.detection_non_decreasing_in_length}; leakage non-increasing in c: "
        f"{diagnostics.leakage_non_increasing_in_rate}"
    )


if __name__ == "__main__":
    cli()
