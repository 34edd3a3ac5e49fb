"""
Command-line front end.

Every command builds a payload plus a flat table. The table is printed with
rich, or written as CSV; the payload goes into a JSON RunReport together with
the resolved settings and seed. Exit codes: 0 success, 1 unexpected failure,
2 invalid configuration, 3 estimator did not converge.
"""

import logging
import sys
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from config import Config
from core.errors import ConfigError, ConvergenceError, DomainError, SimulatorError
from core.states import PHI_PLUS, PSI_PLUS, DensityMatrix, fidelity, ghz
from network import (
    Method,
    Scheme,
    load_layout,
    final_pair_table,
    rate_formula,
    rate_ratio,
    ratio_theory,
    run_enumerate,
    run_sample,
    signal_to_noise,
    twelve_fold_zbasis,
    zbasis_support,
)
from noise import NoiseModel
from pcm import PcmTag, false_bsm_rate, ideal_povm
from sources import twofold_rate
from storage import RunReport, create_run_log_from_config, rows_to_csv, write_csv, write_report
from tomography import (
    TomographySetting,
    all_settings,
    correlator_from_fractions,
    create_povm_estimator_from_config,
    create_state_estimator_from_config,
    fit_visibility,
    fit_final_pair_white_noise,
    fit_white_noise,
    ghz4_state,
    operator_fidelity,
    pauli_fidelity,
    povm_fidelity,
    povm_overlap,
    povm_to_dict,
    simulate_counts,
    simulate_povm_counts,
    simulate_records,
    state_to_dict,
)

from .settings import RunSettings, dump_settings, load_settings


logger = logging.getLogger(__name__)

app = typer.Typer(
    add_completion=False,
    no_args_is_help=False,
    help="All-photonic repeater simulator: rates, tables, tomography and calibration.",
)
console = Console()
err_console = Console(stderr=True)

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class TomoTarget(str, Enum):
    GHZ4 = "ghz4"
    PCM = "pcm"


@dataclass
class CliState:
    config: Config
    settings: RunSettings
    out: Optional[Path]
    fmt: OutputFormat
    seed: int
    quiet: bool
    global_args: list = field(default_factory=list)


@dataclass
class CommandResult:
    title: str
    columns: tuple
    rows: list
    payload: dict


def _fmt_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_table(result: CommandResult) -> None:
    table = Table(title=result.title)
    for col in result.columns:
        table.add_column(col)
    for row in result.rows:
        table.add_row(*(_fmt_cell(v) for v in row))
    console.print(table)


def _argv(name: str, ctx: typer.Context, state: CliState) -> list:
    params = [f"--{k.replace('_', '-')}={v.value if isinstance(v, Enum) else v}" for k, v in sorted(ctx.params.items())]
    return state.global_args + [name] + params


def _execute(ctx: typer.Context, name: str, body: Callable[[CliState], CommandResult]) -> None:
    state: CliState = ctx.obj
    start = time.time()
    exit_code, digest, out_path = EXIT_OK, None, None
    try:
        result = body(state)
        report = RunReport(
            command=name,
            argv=_argv(name, ctx, state),
            config=state.settings.to_dict(include_workers=False),
            seed=state.seed,
            payload=result.payload,
        )
        report.duration_s = round(time.time() - start, 6)
        digest = report.digest()
        if state.out is not None:
            out_path = str(state.out)
            if state.fmt is OutputFormat.CSV:
                write_csv(out_path, result.columns, result.rows)
            else:
                write_report(report, out_path)
        elif state.fmt is OutputFormat.CSV:
            typer.echo(rows_to_csv(result.columns, result.rows), nl=False)
        elif state.quiet:
            typer.echo(report.to_json().decode())
        if not state.quiet and not (state.out is None and state.fmt is OutputFormat.CSV):
            _print_table(result)
    except (ConfigError, DomainError) as e:
        exit_code = EXIT_CONFIG
        err_console.print(f"[red]error:[/red] {e}")
    except ConvergenceError as e:
        exit_code = EXIT_CONVERGENCE
        err_console.print(f"[red]not converged:[/red] {e}")
    except SimulatorError as e:
        exit_code = EXIT_FAILURE
        err_console.print(f"[red]simulation failed:[/red] {e}")
    except Exception as e:
        exit_code = EXIT_FAILURE
        logger.exception(f"Unexpected error in {name}")
        err_console.print(f"[red]unexpected error:[/red] {e}")

    run_log = create_run_log_from_config(state.config)
    if run_log is not None:
        try:
            run_log.log_run(name, _argv(name, ctx, state), state.seed, digest, exit_code,
                            time.time() - start, out_path)
        except Exception as e:
            logger.warning(f"Could not record run: {e}")
    if exit_code != EXIT_OK:
        raise typer.Exit(exit_code)


# =========================
# Global options
# =========================

@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    config_file: Optional[Path] = typer.Option(None, "--config", help="YAML or JSON settings file."),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the result here instead of the console."),
    fmt: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="Output format for --out."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed; overrides engine.seed."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Sampling threads."),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Only warnings and the JSON result."),
    dump_config: bool = typer.Option(False, "--dump-config", help="Print resolved settings and exit."),
):
    if quiet:
        logging.getLogger().setLevel(logging.WARNING)

    config = Config()
    try:
        settings = load_settings(config_file, config).with_engine(seed=seed, workers=workers)
    except (ConfigError, DomainError) as e:
        err_console.print(f"[red]config error:[/red] {e}")
        raise typer.Exit(EXIT_CONFIG)

    if dump_config:
        typer.echo(dump_settings(settings), nl=False)
        raise typer.Exit(EXIT_OK)

    global_args = []
    if config_file is not None:
        global_args.append(f"--config={config_file}")
    if seed is not None:
        global_args.append(f"--seed={seed}")

    ctx.obj = CliState(
        config=config,
        settings=settings,
        out=out,
        fmt=fmt,
        seed=settings.engine.seed,
        quiet=quiet,
        global_args=global_args,
    )
    if ctx.invoked_subcommand is None:
        typer.echo(ctx.get_help())


# =========================
# Rate commands
# =========================

def _scan_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _show_progress(state: CliState) -> bool:
    return not state.quiet and sys.stderr.isatty()


def _network_rate(layout, settings: RunSettings, source, method: Method, trials: int, seed: int,
                  progress: bool = False):
    if method is Method.SAMPLE:
        run = run_sample(
            layout, source, settings.noise,
            trials=trials, seed=seed,
            workers=settings.engine.workers,
            block_size=settings.engine.block_size,
            progress=progress,
            with_states=False,
        )
    else:
        run = run_enumerate(layout, source, settings.noise, budget=settings.engine.budget, with_states=False)
    return run.total()


@app.command("ratio-scan")
def ratio_scan(
    ctx: typer.Context,
    p_min: float = typer.Option(0.0, "--p-min"),
    p_max: float = typer.Option(0.1, "--p-max"),
    steps: int = typer.Option(11, "--steps", min=2),
    method: Optional[Method] = typer.Option(None, "--method"),
    trials: Optional[int] = typer.Option(None, "--trials", min=1),
    theory_conditions: bool = typer.Option(
        False, "--theory-conditions",
        help="Lossless detection and at most one pair per source, where r_theory is exact.",
    ),
):
    """Counting-rate ratio of all-photonic over conventional swapping versus p."""

    def body(state: CliState) -> CommandResult:
        if not 0.0 <= p_min < p_max <= 0.3:
            raise DomainError(f"need 0 <= p_min < p_max <= 0.3 (got {p_min}, {p_max})")
        settings = state.settings.at_theory_conditions() if theory_conditions else state.settings
        comparable = settings.theory_comparable()
        if not comparable:
            logger.warning(
                f"efficiency {settings.noise.efficiency} with multi-pair={settings.noise.include_multi_pair}: "
                f"r_simulated is not comparable to r_theory (use --theory-conditions)"
            )
        how = method or Method(settings.engine.method)
        n_trials = trials or settings.engine.trials
        rows, hz = [], []
        for i, p in enumerate(np.linspace(p_min, p_max, steps)):
            p = float(p)
            source = settings.source.with_p(p)
            seed = _scan_seed(state.seed, i)
            ap = _network_rate(settings.repeater, settings, source, how, n_trials, seed, _show_progress(state))
            conv = _network_rate(settings.baseline, settings, source, how, n_trials, seed, _show_progress(state))
            hz.append({"all_photonic_hz": ap.per_second(source.pulse_rate),
                       "conventional_hz": conv.per_second(source.pulse_rate)})
            if conv.value > 0:
                ratio = rate_ratio(ap, conv)
                r_sim, se = ratio.value, ratio.std_error
            else:
                r_sim, se = None, None
            rows.append((p, ratio_theory(p), r_sim, se))
            logger.info(f"p={p:.4f}: r_theory={ratio_theory(p):.4f} r_simulated={r_sim}")
        columns = ("p", "r_theory", "r_simulated", "std_error")
        return CommandResult(
            title="Rate ratio" if comparable else "Rate ratio (lossy or multi-pair: not comparable to r_theory)",
            columns=columns,
            rows=rows,
            payload={"method": how.value, "trials": n_trials if how is Method.SAMPLE else None,
                     "efficiency": settings.noise.efficiency,
                     "include_multi_pair": settings.noise.include_multi_pair,
                     "theory_comparable": comparable,
                     "rows": [{**dict(zip(columns, r)), **h} for r, h in zip(rows, hz)]},
        )

    _execute(ctx, "ratio-scan", body)


@app.command("rates")
def rates(
    ctx: typer.Context,
    m: int = typer.Option(2, "--M", "-M", help="Parallel channels per segment."),
    n: int = typer.Option(1, "--N", "-N", help="Intermediate nodes."),
    eta: float = typer.Option(1.0, "--eta", help="Per-segment efficiency."),
):
    """Closed-form success rates with and without all-photonic nodes."""

    def body(state: CliState) -> CommandResult:
        conv = rate_formula(m, n, eta, Scheme.CONVENTIONAL)
        ap = rate_formula(m, n, eta, Scheme.ALL_PHOTONIC)
        ratio = ap / conv
        columns = ("M", "N", "eta", "conventional", "all_photonic", "ratio")
        row = (m, n, eta, conv, ap, ratio)
        return CommandResult("Rate laws", columns, [row], dict(zip(columns, row)))

    _execute(ctx, "rates", body)


@app.command("twofold")
def twofold(
    ctx: typer.Context,
    p: Optional[float] = typer.Option(None, "--p"),
    eta: Optional[float] = typer.Option(None, "--eta"),
    pulse_rate: Optional[float] = typer.Option(None, "--pulse-rate"),
):
    """Twofold coincidence rate of one EPR source in Hz."""

    def body(state: CliState) -> CommandResult:
        source = state.settings.source
        changes = {k: v for k, v in (("p", p), ("efficiency", eta), ("pulse_rate", pulse_rate)) if v is not None}
        if changes:
            source = replace(source, **changes)
        rate = twofold_rate(source)
        columns = ("p", "efficiency", "pulse_rate", "twofold_hz")
        row = (source.p, source.efficiency, source.pulse_rate, rate)
        return CommandResult("Twofold rate", columns, [row], dict(zip(columns, row)))

    _execute(ctx, "twofold", body)


@app.command("false-bsm")
def false_bsm(
    ctx: typer.Context,
    p: List[float] = typer.Option([0.0344, 0.0483], "--p"),
    eta: Optional[float] = typer.Option(None, "--eta"),
):
    """Share of Bell readings at a GHZ-EPR station caused by multi-pair emission."""

    def body(state: CliState) -> CommandResult:
        base = state.settings.source
        efficiency = base.efficiency if eta is None else eta
        rows = [(float(x), efficiency, false_bsm_rate(base.with_p(float(x)), efficiency)) for x in p]
        columns = ("p", "efficiency", "false_bsm_rate")
        return CommandResult("False Bell readings", columns, rows,
                             {"rows": [dict(zip(columns, r)) for r in rows]})

    _execute(ctx, "false-bsm", body)


# =========================
# Protocol commands
# =========================

def _outcome_key(condition: str, outcomes) -> tuple:
    return condition, frozenset(outcomes)


@app.command("table")
def table(
    ctx: typer.Context,
    layout: Optional[str] = typer.Option(None, "--layout", help="Built-in name or layout file."),
    verify: bool = typer.Option(True, "--verify/--no-verify", help="Check every row under ideal enumeration."),
):
    """Outcome combination -> final pair and Pauli corrections."""

    def body(state: CliState) -> CommandResult:
        chosen = load_layout(layout) if layout else state.settings.repeater
        rows = final_pair_table(chosen)
        verified = {}
        if verify:
            ideal = NoiseModel(efficiency=1.0, include_multi_pair=False)
            run = run_enumerate(chosen, state.settings.source, ideal, budget=state.settings.engine.budget)
            for rec in run.records:
                outcomes = ((st, o.tag.value) for st, o in rec.outcomes.items())
                verified[_outcome_key(rec.condition, outcomes)] = rec.fidelity()
        out_rows = []
        for row in rows:
            d = row.to_dict()
            outcomes = " ".join(f"{st}={tag}" for st, tag in row.outcomes)
            f = verified.get(_outcome_key(row.condition, row.outcomes)) if verify else None
            out_rows.append((row.condition, outcomes, d["pair"], d["corrections"], f))
        columns = ("condition", "outcomes", "pair", "corrections", "ideal_fidelity")
        payload = {"layout": chosen.name, "rows": [dict(zip(columns, r)) for r in out_rows]}
        return CommandResult(f"Final pairs ({chosen.name})", columns, out_rows, payload)

    _execute(ctx, "table", body)


def _pair_state(run, pair: tuple) -> tuple:
    """Rate-weighted final-pair state; maximally mixed when nothing heralds it."""
    total = 0.0
    acc = np.zeros((4, 4), dtype=complex)
    for rec in run.records:
        if tuple(rec.pair) == tuple(pair) and rec.state is not None and rec.rate.value > 0:
            acc += rec.rate.value * rec.state.entries
            total += rec.rate.value
    if total <= 0:
        return DensityMatrix(2, np.eye(4, dtype=complex) / 4), 0.0
    return DensityMatrix.from_unnormalized(2, acc), total


def _fractions(rho: DensityMatrix, basis: str, shots: int, rng: np.random.Generator) -> tuple:
    counts = simulate_counts(rho, TomographySetting.of(basis * 2), shots, rng=rng).counts
    same = float(counts[0] + counts[3]) / shots
    return same, 1.0 - same


@app.command("fidelity")
def fidelity_cmd(
    ctx: typer.Context,
    layout: Optional[str] = typer.Option(None, "--layout", help="Built-in name or layout file."),
    method: Optional[Method] = typer.Option(None, "--method"),
    trials: Optional[int] = typer.Option(None, "--trials", min=1),
    shots: Optional[int] = typer.Option(None, "--shots", min=1, help="Coincidences per basis and pair."),
    target_fidelity: Optional[float] = typer.Option(
        None, "--target-fidelity",
        help="Fit per-source white noise so the rate-weighted fidelity hits this value (enumerates).",
    ),
):
    """XX/YY/ZZ fraction measurement on every candidate final pair."""

    def body(state: CliState) -> CommandResult:
        settings = state.settings
        chosen = load_layout(layout) if layout else settings.repeater
        how = method or Method(settings.engine.method)
        n_shots = shots or state.config.TOMO_SHOTS
        calibration = None
        if target_fidelity is not None:
            calibration, run = fit_final_pair_white_noise(
                target_fidelity, chosen, settings.source, settings.noise, budget=settings.engine.budget
            )
            how = Method.ENUMERATE
        elif how is Method.SAMPLE:
            run = run_sample(chosen, settings.source, settings.noise,
                             trials=trials or settings.engine.trials, seed=state.seed,
                             workers=settings.engine.workers, block_size=settings.engine.block_size,
                             progress=_show_progress(state))
        else:
            run = run_enumerate(chosen, settings.source, settings.noise, budget=settings.engine.budget)

        rows, weights, estimates = [], [], []
        for i, pair in enumerate(chosen.final_candidates):
            rho, weight = _pair_state(run, pair)
            rng = np.random.default_rng(np.random.SeedSequence(state.seed, spawn_key=(i,)))
            fractions = {b: _fractions(rho, b, n_shots, rng) for b in "XYZ"}
            xx, yy, zz = (correlator_from_fractions(*fractions[b]) for b in "XYZ")
            estimate = pauli_fidelity(xx, yy, zz)
            rows.append((f"{pair[0]}&{pair[1]}", weight, fractions["X"][0], fractions["Y"][0],
                         fractions["Z"][0], estimate, fidelity(rho, PHI_PLUS)))
            weights.append(weight)
            estimates.append(estimate)

        weights = np.asarray(weights)
        overall = float(np.dot(weights, estimates) / weights.sum()) if weights.sum() > 0 else float(np.mean(estimates))
        columns = ("pair", "rate", "same_xx", "same_yy", "same_zz", "fidelity", "exact_fidelity")
        payload = {
            "layout": chosen.name,
            "method": how.value,
            "shots": n_shots,
            "pairs": [dict(zip(columns, r)) for r in rows],
            "overall_fidelity": overall,
            "rate_hz": float(weights.sum()) * settings.source.pulse_rate,
            "average_fidelity": run.average_fidelity(),
            "calibration": calibration.to_dict() if calibration is not None else None,
        }
        logger.info(f"Overall final-pair fidelity {overall:.4f}")
        return CommandResult(f"Final-pair fidelity ({chosen.name}, overall {overall:.4f})", columns, rows, payload)

    _execute(ctx, "fidelity", body)


@app.command("zbasis")
def zbasis(
    ctx: typer.Context,
    v: float = typer.Option(1.0, "--v", help="Coherence of the twelve-photon state."),
):
    """Z-basis distribution of the twelve-photon GHZ state."""

    def body(state: CliState) -> CommandResult:
        probs = twelve_fold_zbasis(v)
        support = zbasis_support(probs)
        snr = signal_to_noise(probs)
        rows = sorted(support.items())
        return CommandResult(
            "Twelve-photon Z basis",
            ("outcome", "probability"),
            rows,
            {"v": v, "support": support, "signal_to_noise": None if np.isinf(snr) else snr},
        )

    _execute(ctx, "zbasis", body)


# =========================
# Tomography
# =========================

@app.command("tomo")
def tomo(
    ctx: typer.Context,
    target: TomoTarget = typer.Argument(..., help="ghz4 or pcm"),
    shots: Optional[int] = typer.Option(None, "--shots", min=1),
    white_noise: Optional[float] = typer.Option(None, "--white-noise", help="Per-source white noise (ghz4)."),
    pbs_visibility: Optional[float] = typer.Option(None, "--pbs-visibility"),
    visibility: Optional[float] = typer.Option(None, "--visibility", help="PCM visibility (pcm)."),
    target_fidelity: Optional[float] = typer.Option(
        None, "--target-fidelity", help="Fit the noise knob to this fidelity first."
    ),
):
    """Synthetic tomography of the four-photon GHZ state or the PCM detector."""

    def body(state: CliState) -> CommandResult:
        noise = state.settings.noise
        n_shots = shots or state.config.TOMO_SHOTS
        if target is TomoTarget.GHZ4:
            return _tomo_ghz4(state, noise, n_shots)
        return _tomo_pcm(state, noise, n_shots)

    def _tomo_ghz4(state: CliState, noise: NoiseModel, n_shots: int) -> CommandResult:
        v_pbs = noise.pbs_visibility if pbs_visibility is None else pbs_visibility
        lam = noise.white_noise if white_noise is None else white_noise
        calibration = None
        if target_fidelity is not None:
            calibration = fit_white_noise(target_fidelity, v_pbs)
            lam = calibration.value
        true_state = ghz4_state(lam, v_pbs)
        settings = all_settings(4)
        records = simulate_records(true_state, n_shots, state.seed, settings)
        result = create_state_estimator_from_config(state.config)(records)
        if not result.converged:
            raise ConvergenceError(f"state MLE stopped after {result.iterations} iterations")
        f_rec = fidelity(result.state, ghz(4))
        f_true = fidelity(true_state, ghz(4))
        rows = [("ghz4", len(settings), n_shots, lam, v_pbs, f_true, f_rec, result.iterations)]
        columns = ("target", "settings", "shots", "white_noise", "pbs_visibility",
                   "true_fidelity", "fidelity", "iterations")
        payload = {
            **dict(zip(columns, rows[0])),
            "log_likelihood": result.log_likelihood,
            "calibration": calibration.to_dict() if calibration else None,
            "state": state_to_dict(result.state),
        }
        return CommandResult("GHZ4 tomography", columns, rows, payload)

    def _tomo_pcm(state: CliState, noise: NoiseModel, n_shots: int) -> CommandResult:
        v = noise.pcm_visibility if visibility is None else visibility
        if target_fidelity is not None:
            v = fit_visibility(target_fidelity)
        povm = ideal_povm(v)
        counts = simulate_povm_counts(povm, n_shots, state.seed)
        result = create_povm_estimator_from_config(state.config)(counts)
        if not result.converged:
            raise ConvergenceError(f"detector MLE stopped after {result.iterations} iterations")
        rows = []
        for tag, ideal in ((PcmTag.PHI_PLUS, PHI_PLUS), (PcmTag.PSI_PLUS, PSI_PLUS)):
            rows.append((
                tag.value,
                povm_fidelity(result.povm[tag], ideal),
                povm_overlap(result.povm[tag], ideal),
                operator_fidelity(result.povm[tag], povm[tag]),
            ))
        columns = ("element", "bell_fidelity", "bell_overlap", "operator_fidelity")
        payload = {
            "target": "pcm",
            "probes": len(counts),
            "shots": n_shots,
            "visibility": v,
            "fidelity_convention": "trace-normalized element; bell_overlap is unnormalized",
            "iterations": result.iterations,
            "log_likelihood": result.log_likelihood,
            "elements": [dict(zip(columns, r)) for r in rows],
            "povm": povm_to_dict(result.povm),
        }
        return CommandResult(f"PCM detector tomography (v={v:.4f})", columns, rows, payload)

    _execute(ctx, "tomo", body)


# =========================
# Run log
# =========================

@app.command("runs")
def runs(limit: int = typer.Option(20, "--limit", min=1), command: Optional[str] = typer.Option(None, "--command")):
    """Recent invocations from the run log."""
    config = Config()
    run_log = create_run_log_from_config(config)
    if run_log is None:
        err_console.print("run log is disabled (RUN_LOG_ENABLED=false)")
        raise typer.Exit(EXIT_CONFIG)
    entries = run_log.get_recent_runs(limit, command)
    stats = run_log.get_stats()

    view = Table(title=f"Runs ({stats['total_runs']} total, {stats['failed_runs']} failed)")
    for col in ("id", "timestamp", "command", "seed", "exit", "duration_s", "digest"):
        view.add_column(col)
    for e in entries:
        view.add_row(str(e.id), e.timestamp, e.command, _fmt_cell(e.seed), str(e.exit_code),
                     f"{e.duration_s:.3f}", (e.digest or "-")[:12])
    console.print(view)
