"""Batch front end.

    hartogs check-assumptions --config cfg.json [--out DIR]
    hartogs hardy   --config cfg.toml [--seed N]
    hartogs solve   --config cfg.json [--dump-fields]
    hartogs extend  --config cfg.json [--resolution P] [--dump-fields]

Each run writes ``<command>_report.json`` (no timestamps, so identical
inputs give identical bytes) and ``manifest.json`` into the output
directory.  Exit status: 0 all checks pass, 1 a check or hypothesis
fails, 2 usage, config or precondition error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, RunManifest, load_config
from .errors import HypothesisError, PreconditionError
from .extension import extend
from .geometry import check_hypotheses
from .grid import dbar
from .hardy import (off_subspace_points, sample_test_function, subharmonicity_check, verify_hardy,
                    witness_identity_check)
from .io import write_field
from .solver import certify_estimates, solve_minimal

log = logging.getLogger("hartogs")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
SUBHARMONIC_TOL = 1e-8
WITNESS_TOL = 1e-6


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


class _Run:
    """Output directory, report writer and manifest bookkeeping."""

    def __init__(self, command: str, cfg: ExperimentConfig):
        self.command = command
        self.cfg = cfg
        self.out = Path(cfg.run.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(__version__, command, cfg.hash,
                                    datetime.now(timezone.utc).isoformat())
        self._t = time.perf_counter()

    def stage(self, name: str):
        now = time.perf_counter()
        self.manifest.stage_seconds[name] = round(now - self._t, 6)
        self._t = now

    def write_report(self, report: dict) -> Path:
        path = self.out / f"{self.command.replace('-', '_')}_report.json"
        body = dict(_clean(report), config_hash=self.cfg.hash, tool_version=__version__)
        path.write_text(json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n")
        self.manifest.outputs.append(str(path))
        return path

    def dump(self, name: str, field):
        if self.cfg.run.dump_fields:
            files = write_field(field, self.out / name)
            self.manifest.outputs += [str(p) for p in files]

    def finish(self, code: int) -> int:
        self.manifest.finished = datetime.now(timezone.utc).isoformat()
        self.manifest.exit_code = code
        (self.out / "manifest.json").write_text(
            json.dumps(_clean(self.manifest.to_dict()), indent=2, sort_keys=True) + "\n")
        return code


def cmd_check_assumptions(cfg: ExperimentConfig) -> int:
    run = _Run("check-assumptions", cfg)
    ext = cfg.extension()
    report = check_hypotheses(ext)
    run.stage("hypotheses")
    run.write_report({"hypotheses": report.to_dict(), "passed": report.passed})
    if not report.passed:
        log.error("hypotheses fail: %s", ", ".join(report.failed()))
    return run.finish(EXIT_OK if report.passed else EXIT_FAIL)


def cmd_hardy(cfg: ExperimentConfig) -> int:
    run = _Run("hardy", cfg)
    grid, H = cfg.grid(), cfg.subspace()
    opts = cfg.hardy_options()
    families = cfg.hardy_families()
    reports = []
    for fam in families:
        rep = verify_hardy(fam, H, grid, slack=opts["slack"], raise_on_failure=False)
        reports.append(rep)
        log.info("%s x%d: min quotient %.6g (threshold %.6g)", fam.kind, fam.count,
                 rep.min_quotient, rep.constant * (1 - rep.slack))
    run.stage("rayleigh_quotients")
    pts = off_subspace_points(H, opts["witness_points"], grid.spacing, cfg.run.seed or 0)
    witness = witness_identity_check(H, pts, grid.spacing)
    lowest = subharmonicity_check(H, pts, grid.spacing)
    run.stage("witness")
    passed = (all(r.passed for r in reports) and witness <= WITNESS_TOL
              and lowest >= -SUBHARMONIC_TOL)
    run.write_report({
        "passed": passed,
        "codim": H.codim,
        "grid": grid.to_dict(),
        "families": [r.to_dict() for r in reports],
        "witness": {"points": len(pts), "max_rel_error": witness, "tolerance": WITNESS_TOL,
                    "passed": witness <= WITNESS_TOL},
        "subharmonicity": {"min_laplacian": lowest, "tolerance": -SUBHARMONIC_TOL,
                           "passed": lowest >= -SUBHARMONIC_TOL},
    })
    return run.finish(EXIT_OK if passed else EXIT_FAIL)


def cmd_solve(cfg: ExperimentConfig) -> int:
    run = _Run("solve", cfg)
    grid, H = cfg.grid(), cfg.subspace()
    datum = cfg.solve_datum()
    kind = datum["kind"].split("-", 1)[1]
    g = sample_test_function(kind, datum, grid)
    v = dbar(g)
    run.stage("datum")
    u = solve_minimal(v)
    run.stage("solve")
    report = certify_estimates(u, v, H)
    exact = g.samples - g.samples.mean()
    scale = np.linalg.norm(exact)
    oracle = float(np.linalg.norm(u.data[0] - exact) / scale) if scale > 0 else 0.0
    run.stage("certify")
    body = report.to_dict()
    body["exact_oracle_rel"] = oracle
    body["datum"] = {k: (v_.tolist() if isinstance(v_, np.ndarray) else v_) for k, v_ in datum.items()}
    body["grid"] = grid.to_dict()
    body["subspace"] = H.to_dict()
    run.write_report(body)
    run.dump("u", u)
    run.dump("v", v)
    log.info("residual %.3e, distance-bound margin %.6g", report.residual_rel, report.dist_margin)
    return run.finish(EXIT_OK if report.passed else EXIT_FAIL)


def cmd_extend(cfg: ExperimentConfig) -> int:
    run = _Run("extend", cfg)
    ext = cfg.extension()
    f = cfg.function()
    try:
        F, u, report = extend(f, ext)
    except HypothesisError as exc:
        run.write_report({"passed": False, "error": str(exc),
                          "hypotheses": exc.report.to_dict() if exc.report else None})
        log.error("%s", exc)
        return run.finish(EXIT_FAIL)
    run.stage("extend")
    body = report.to_dict()
    run.write_report(body)
    run.dump("F", F)
    run.dump("u", u)
    failed = [k for k, ok in report.checks.items() if not ok]
    if failed:
        log.error("failed checks: %s", ", ".join(failed))
    return run.finish(EXIT_OK if report.passed else EXIT_FAIL)


COMMANDS = {
    "check-assumptions": cmd_check_assumptions,
    "hardy": cmd_hardy,
    "solve": cmd_solve,
    "extend": cmd_extend,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hartogs", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON or TOML experiment file")
        p.add_argument("--out", type=str, help="output directory (default: run.out or ./out)")
        p.add_argument("--resolution", type=int, help="override grid.points_per_axis")
        p.add_argument("--seed", type=int, help="override family / sampling seeds")
        p.add_argument("--dump-fields", action="store_true", help="write binary field dumps")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, resolution=args.resolution, out=args.out,
                          seed=args.seed, dump_fields=args.dump_fields)
        return COMMANDS[args.command](cfg)
    except (ConfigError, PreconditionError) as exc:
        print(f"hartogs {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
