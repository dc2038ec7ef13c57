"""Command-line front end.

Subcommands::

    teleportsim teleport  [--config C] [--seed N] [--out DIR] [--format csv|json]
    teleportsim bound     ...
    teleportsim verify-s  ...
    teleportsim decompose ...

Each command writes its CSV and JSON files to the output directory and echoes
one of them on stdout according to ``--format``. Exit codes: 0 success,
2 configuration error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from pathlib import Path


from . import __version__
from .classical import (
    Ensemble,
    InvalidPovmError,
    classical_bound,
    max_t,
    optimize_strategy,
    validate_povm,
)
from .config import ConfigError, ExperimentConfig, load_config
from .counts import (
    CLASSICAL_S,
    FitError,
    analytic_s,
    cell_rng,
    estimate_s,
    fit_fringe,
    measure_cell,
    simulate_experiment,
    simulate_sweep,
    write_csv,
)
from .qstate import StateError
from .teleport import OUTCOMES, decompose, prepare_unknown, verifier_setting

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

BOUND_TOL = 1e-6


class InvariantViolation(RuntimeError):
    pass


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _prep_dict(cfg: ExperimentConfig) -> dict:
    return {"theta_deg": cfg.preparation.theta, "gamma_deg": cfg.preparation.gamma}


# -- commands ----------------------------------------------------------------------

def cmd_teleport(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Fringe sweeps for all four outcomes plus a per-outcome summary."""
    spec = cfg.preparation
    extra = [e.build() for e in cfg.elements]
    records = []
    outcomes = {}
    for j, outcome in enumerate(OUTCOMES):
        sweep = simulate_sweep(
            spec, outcome, cfg.analyzer_grid, cfg.noise, cfg.pairs_per_point, cell_rng(cfg.seed, 0, j), extra
        )
        records.extend(sweep)
        setting = verifier_setting(outcome, spec)
        par, perp = measure_cell(spec, outcome, cfg.noise, cfg.pairs_per_point, cell_rng(cfg.seed, 1, j), extra)
        entry = {
            "expected_theta_max_deg": setting.theta_b,
            "gamma_b_deg": setting.gamma_b,
            "i_par": par.count,
            "i_perp": perp.count,
            "fidelity": par.count / (par.count + perp.count) if par.count + perp.count else None,
            "orthogonal_expected_count": perp.expected,
            "dark_level": cfg.noise.dark_rate,
        }
        try:
            fit = fit_fringe(sweep)
            entry.update(
                theta_max_deg=fit.theta_max,
                visibility=fit.visibility,
                visibility_err=fit.visibility_err,
            )
        except FitError as exc:
            entry.update(theta_max_deg=None, visibility=None, visibility_err=None, fit_error=str(exc))
        outcomes[outcome.value] = entry
    summary = {
        "command": "teleport",
        "preparation": _prep_dict(cfg),
        "seed": cfg.seed,
        "pairs_per_point": cfg.pairs_per_point,
        "outcomes": outcomes,
    }
    return write_csv(records), summary


def cmd_bound(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Optimizer and grid oracle on the configured ensemble."""
    ensemble = Ensemble.linear(cfg.ensemble_angles, cfg.ensemble_probs)
    strategy, s_best = optimize_strategy(ensemble, cfg.outcomes, cfg.restarts, rng=cfg.seed)
    diag = validate_povm(strategy.povm)
    oracle = max_t(ensemble, cfg.resolution)
    bound = classical_bound(ensemble, oracle.t_max)
    ok = diag.valid and s_best <= bound + BOUND_TOL
    summary = {
        "command": "bound",
        "ensemble": {"angles_deg": list(cfg.ensemble_angles), "probs": ensemble.probs.tolist()},
        "outcomes": cfg.outcomes,
        "restarts": cfg.restarts,
        "resolution": cfg.resolution,
        "seed": cfg.seed,
        "S_best": s_best,
        "strategy": strategy.to_dict(),
        "povm": {
            "completeness_residual": diag.completeness_residual,
            "mu_sum_residual": diag.mu_sum_residual,
            "mu": list(diag.mu),
        },
        "T_max": oracle.t_max,
        "T_max_argmax": {"phi_c": [_pair(z) for z in oracle.phi_c], "omega": [_pair(z) for z in oracle.omega]},
        "T_max_argmax_count": int(len(oracle.argmax)),
        "S_upper_bound": bound,
        "bound_ok": bool(ok),
    }
    lines = ["quantity,value", f"S_best,{s_best!r}", f"T_max,{oracle.t_max!r}", f"S_upper_bound,{bound!r}"]
    if not ok:
        raise InvariantViolation(_dump(summary))
    return "\n".join(lines) + "\n", summary


def cmd_verify_s(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Twelve-cell (states x outcomes) S measurement."""
    cells = simulate_experiment(cfg.noise, cfg.pairs_per_cell, cfg.seed, cfg.verify_states)
    est = estimate_s(cells, cfg.verify_states)
    records = [r for pair in cells.values() for r in pair]
    summary = {
        "command": "verify-s",
        "seed": cfg.seed,
        "pairs_per_cell": cfg.pairs_per_cell,
        "visibility": cfg.noise.visibility,
        "S": est.value,
        "std_err": est.std_err,
        "sigma_violation": est.sigma_violation,
        "bound": CLASSICAL_S,
        "analytic_S": analytic_s(cfg.noise, cfg.pairs_per_cell),
        "cells": [
            {
                "state_deg": theta,
                "outcome": outcome.value,
                "i_par": cells[(theta, outcome)][0].count,
                "i_perp": cells[(theta, outcome)][1].count,
                "fidelity": f,
            }
            for (theta, outcome), f in est.per_cell.items()
        ],
    }
    return write_csv(records), summary


def cmd_decompose(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Bell-branch coefficients and Bob's conditional path states."""
    joint, prepared = prepare_unknown(cfg.preparation)
    branches = decompose(joint)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["outcome", "coefficient_re", "coefficient_im", "path", "pol", "amp_re", "amp_im"])
    out = {}
    for outcome, (coeff, cond) in branches.items():
        amps = {}
        for entry, amp in cond.as_dict().items():
            mode = entry[0]
            amps[f"{mode.path}{mode.photon}/{mode.pol}"] = _pair(amp)
            w.writerow([outcome.value, repr(coeff.real), repr(coeff.imag), f"{mode.path}{mode.photon}", mode.pol,
                        repr(amp.real), repr(amp.imag)])
        out[outcome.value] = {"coefficient": _pair(coeff), "conditional": amps}
    summary = {
        "command": "decompose",
        "preparation": _prep_dict(cfg),
        "prepared": {"alpha": _pair(prepared.alpha), "beta": _pair(prepared.beta)},
        "branches": out,
    }
    return buf.getvalue(), summary


COMMANDS = {
    "teleport": cmd_teleport,
    "bound": cmd_bound,
    "verify-s": cmd_verify_s,
    "decompose": cmd_decompose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teleportsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        p.add_argument("--config", type=Path, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--out", type=Path, help="output directory (overrides config)")
        p.add_argument("--format", choices=("csv", "json"), default="json", help="what to print on stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed: must be an unsigned 64-bit integer")
            cfg = dataclasses.replace(cfg, seed=args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text, summary = COMMANDS[args.command](cfg)
    except (InvariantViolation, StateError, InvalidPovmError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out if args.out is not None else Path(cfg.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = args.command.replace("-", "_")
    csv_name = cfg.output.csv if args.command == "teleport" else f"{stem}.csv"
    json_name = cfg.output.summary if args.command == "teleport" else f"{stem}.json"
    blob = _dump(summary)
    (out_dir / csv_name).write_text(text, newline="\n")
    (out_dir / json_name).write_text(blob, newline="\n")
    sys.stdout.write(text if args.format == "csv" else blob)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
