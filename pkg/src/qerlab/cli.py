"""Command-line experiment runner.

    qerlab <kind> [--config FILE] [--out DIR] [--seed N] [--h-list 0.1,0.05] [--resolution N]
    qerlab run --config FILE

Exit codes: 0 when every check of the experiment passes, 2 when a check
fails, 1 on configuration or IO errors.  Artifacts go to ``<out>/<kind>/``;
the output root defaults to ``$QERLAB_OUT`` or ``./qerlab-out``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .experiments import KINDS, run_kind
from .hypersurface import hypersurface_from_dict
from .qer.scaling import _fmt, _jsonable, emit_report

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "run", "main"]

ENV_OUT = "QERLAB_OUT"
SWEEP_KINDS = {"wavefront", "localization", "qer-convergence", "bounds-scaling", "multiplier"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    n: int = 2
    tau: float | None = None
    hypersurface: dict | None = None
    h_list: list | None = None
    ensemble: dict | None = None
    resolution: int | None = None
    out: str | None = None
    seed: int = 0

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {sorted(KINDS)}")
        if self.n not in (1, 2):
            raise ConfigError(f"field 'n' must be 1 or 2, got {self.n!r}")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("field 'tau' must be positive")
        if self.h_list is not None:
            hs = [float(h) for h in self.h_list]
            if not hs or any(h <= 0 for h in hs):
                raise ConfigError("field 'h_list' must hold positive values")
            if any(b >= a for a, b in zip(hs, hs[1:])):
                raise ConfigError("field 'h_list' must be strictly decreasing")
            self.h_list = hs
        if self.resolution is not None and (not isinstance(self.resolution, int) or self.resolution <= 0):
            raise ConfigError("field 'resolution' must be a positive integer")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("field 'seed' must be an unsigned 64-bit integer")
        if self.ensemble is not None:
            extra = set(self.ensemble) - {"draws"}
            if extra:
                raise ConfigError(f"unknown field(s) in 'ensemble': {sorted(extra)}")
            if int(self.ensemble.get("draws", 1)) <= 0:
                raise ConfigError("field 'ensemble.draws' must be positive")
        if self.hypersurface is not None:
            try:
                hypersurface_from_dict(self.hypersurface)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad 'hypersurface': {exc}") from exc
        return self

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def driver_kwargs(self) -> dict:
        kw = {"h_list": self.h_list, "resolution": self.resolution, "seed": self.seed, "tau": self.tau}
        if self.hypersurface is not None:
            kw["hypersurface"] = hypersurface_from_dict(self.hypersurface)
        if self.ensemble is not None:
            kw["draws"] = int(self.ensemble.get("draws", 1))
        if self.h_list is not None:
            kw["h_list"] = tuple(self.h_list)
        return kw


def load_config(path) -> dict:
    """Read a JSON config, rejecting unknown fields and enforcing required ones."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    if "kind" not in data:
        raise ConfigError("missing required field 'kind'")
    if data["kind"] in SWEEP_KINDS and "h_list" not in data:
        raise ConfigError(f"missing required field 'h_list' for kind {data['kind']!r}")
    return data


def _write_table(path: Path, rows: list) -> None:
    cols = list(rows[0]) if rows else []
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in (r[c] for c in cols)) + "\n")


def write_artifacts(outcome, cfg: ExperimentConfig, root: Path) -> Path:
    d = root / outcome.kind
    d.mkdir(parents=True, exist_ok=True)
    summary = {
        "kind": outcome.kind,
        "passed": outcome.passed,
        "config": cfg.as_dict(),
        "checks": {k: {"value": c.value, "bound": c.bound, "passed": c.ok} for k, c in outcome.checks.items()},
        "info": outcome.info,
    }
    with open(d / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    for name, rows in outcome.tables.items():
        _write_table(d / f"{name}.csv", rows)
    for name, fld in outcome.fields.items():
        fld.to_binary(d / f"{name}.psf")
    if outcome.report is not None:
        emit_report(outcome.report, d / "sweep")
    return d


def run(cfg: ExperimentConfig, stream=sys.stdout) -> int:
    root = Path(cfg.out or os.environ.get(ENV_OUT) or "qerlab-out")
    try:
        root.mkdir(parents=True, exist_ok=True)
        if not os.access(root, os.W_OK):
            raise OSError(f"output directory {root} is not writable")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outcome = run_kind(cfg.kind, **cfg.driver_kwargs())
    try:
        d = write_artifacts(outcome, cfg, root)
    except OSError as exc:
        print(f"error: cannot write artifacts: {exc}", file=sys.stderr)
        return 1
    for name, c in outcome.checks.items():
        print(f"  [{'ok' if c.ok else 'FAIL'}] {name}: {c.value} ({c.bound})", file=stream)
    verdict = "PASS" if outcome.passed else "FAIL"
    print(f"{cfg.kind}: {verdict} in {outcome.seconds:.1f}s -> {d}", file=stream)
    return 0 if outcome.passed else 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qerlab", description="Phase-space restriction experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config; flags override its values")
    common.add_argument("--out", help=f"output root (default ${ENV_OUT} or ./qerlab-out)")
    common.add_argument("--seed", type=int)
    common.add_argument("--h-list", help="comma separated, strictly decreasing h values")
    common.add_argument("--resolution", type=int)
    sub = ap.add_subparsers(dest="kind", required=True)
    sub.add_parser("run", parents=[common], help="kind taken from --config")
    for k, fn in KINDS.items():
        sub.add_parser(k, parents=[common], help=(fn.__doc__ or k).strip().splitlines()[0])
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        data = load_config(args.config) if args.config else {}
        if args.kind != "run":
            if data.get("kind", args.kind) != args.kind:
                raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {args.kind!r}")
            data["kind"] = args.kind
        elif "kind" not in data:
            raise ConfigError("missing required field 'kind' (use --config with 'run')")
        if args.h_list:
            try:
                data["h_list"] = [float(v) for v in args.h_list.split(",")]
            except ValueError as exc:
                raise ConfigError(f"bad --h-list: {exc}") from exc
        for key in ("out", "seed", "resolution"):
            if getattr(args, key) is not None:
                data[key] = getattr(args, key)
        cfg = ExperimentConfig(**data).validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
