"""Batch harness: deterministic ensembles, verification runs, SSF export.

Subcommands: gen, verify, extract, report. Exit codes: 0 all-pass,
1 tolerance failure, 2 configuration error, 3 numerical breakdown.
Reports are byte-identical for a fixed (seed, config).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from . import ensembles, linops, paths, ssf
from .config import DEFAULTS, Numerics
from .errors import ConfigError, TraceshiftError

THEOREMS = (
    "unitary-mult",
    "contraction-mult",
    "helton",
    "dissipative",
    "lin-unitary",
    "selfadjoint-resolvent",
)

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class RunConfig:
    """Resolved run configuration; embedded in every report."""

    theorem: str = "unitary-mult"
    dim: int = 4
    n: int = 2
    probes: int = 8
    degree: int = 5
    functions: int = 10
    seed: int = 0
    depth: int | None = None
    nodes: int | None = None
    tol: float | None = None
    grid: int = 512
    out: str | None = None

    def validate(self):
        if self.theorem not in THEOREMS:
            raise ConfigError(f"theorem must be one of {THEOREMS}, got {self.theorem!r}")
        if not 1 <= self.dim <= 12:
            raise ConfigError(f"dim must be in [1, 12], got {self.dim}")
        if not 2 <= self.n <= 6:
            raise ConfigError(f"n must be in [2, 6], got {self.n}")
        if self.probes < self.n + 2:
            raise ConfigError(f"probes must be >= n + 2 = {self.n + 2}, got {self.probes}")
        if self.degree < 0:
            raise ConfigError("degree must be >= 0")
        if self.functions < 1:
            raise ConfigError("functions must be >= 1")
        if self.depth is not None and self.depth < max(self.probes, self.degree) + 1:
            raise ConfigError(
                f"depth must be >= probe range + 1 = {max(self.probes, self.degree) + 1}"
            )
        if self.nodes is not None and self.nodes < 8:
            raise ConfigError("nodes must be >= 8")
        if self.tol is not None and self.tol <= 0:
            raise ConfigError("tol must be positive")
        return self


def _numerics_for(cfg: RunConfig) -> Numerics:
    kwargs = {}
    if cfg.nodes is not None:
        kwargs["quad_nodes"] = cfg.nodes
        kwargs["theta_nodes"] = max(cfg.nodes, 512)
    return DEFAULTS.with_(**kwargs) if kwargs else DEFAULTS


def _test_functions(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed + 10_000)
    return [ensembles.random_laurent(rng, cfg.degree) for _ in range(cfg.functions)]


def _dump_json(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    return text


def run_verify(cfg: RunConfig) -> int:
    """Run one verification; write the report, print a summary line per function."""
    cfg.validate()
    numerics = _numerics_for(cfg)
    instance = ensembles.build_instance(cfg.theorem, cfg.dim, cfg.seed, numerics)
    functions = _test_functions(cfg)
    tolerances = {"prediction": cfg.tol} if cfg.tol else None
    report = ssf.verify(
        cfg.theorem,
        instance,
        functions,
        cfg.n,
        probe_range=cfg.probes,
        depth=cfg.depth,
        numerics=numerics,
        tolerances=tolerances,
    )
    payload = report.to_json()
    payload["config"] = {**asdict(cfg), **payload["config"]}
    payload["version"] = __version__
    _dump_json(payload, cfg.out)
    for row in report.results:
        status = "pass" if row["pass"] else "FAIL"
        print(
            f"[{status}] {cfg.theorem} {row['f_descriptor']}"
            f" abs_err={row['abs_err']:.3e} rel_err={row['rel_err']:.3e}"
        )
    for key, value in sorted(report.diagnostics.items()):
        print(f"  diag {key} = {value:.6e}")
    if cfg.out:
        print(f"report written to {cfg.out}")
    return EXIT_PASS if report.passed else EXIT_TOLERANCE


def run_extract(cfg: RunConfig, csv_out: str | None = None) -> int:
    """Extract shift data for the configured instance; write SSF JSON (+CSV)."""
    cfg.validate()
    numerics = _numerics_for(cfg)
    instance = ensembles.build_instance(cfg.theorem, cfg.dim, cfg.seed, numerics)
    if cfg.theorem in ("unitary-mult", "contraction-mult", "helton", "dissipative"):
        if cfg.theorem == "unitary-mult":
            path = paths.MultiplicativePath(base=instance["u0"], generator=instance["a"])
        elif cfg.theorem == "dissipative":
            from . import cayley as _cayley

            t0 = _cayley.cayley(instance["l0"], numerics=numerics)
            path = paths.MultiplicativePath(base=t0, generator=instance["b"])
        else:
            path = paths.MultiplicativePath(base=instance["t0"], generator=instance["b"])
        data = ssf.extract_mult(path, cfg.n, cfg.probes, numerics)
    else:
        u0 = instance.get("u0")
        if cfg.theorem == "selfadjoint-resolvent":
            from . import cayley as _cayley

            u0, u1 = _cayley.selfadjoint_pair_to_unitaries(instance["h0"], instance["v"])
        else:
            u1 = paths.MultiplicativePath(base=u0, generator=instance["a"]).point(1.0)
        data = ssf.extract_lin(u0, u1, cfg.n, cfg.probes, numerics)
    payload = data.to_json()
    payload["config"] = asdict(cfg)
    payload["version"] = __version__
    text = _dump_json(payload, cfg.out)
    if not cfg.out:
        print(text)
    if csv_out:
        ssf.export_eta_csv(data, csv_out, cfg.grid)
        print(f"eta samples written to {csv_out}")
    return EXIT_PASS


def run_gen(kind: str, dim: int, seed: int, out: str | None) -> int:
    """Draw one instance and write its matrix file(s)."""
    drawn = ensembles.gen_instance(kind, dim, seed)
    items = drawn if isinstance(drawn, tuple) else (drawn,)
    for i, op in enumerate(items):
        path = out or f"{kind}-d{dim}-s{seed}.json"
        if len(items) > 1:
            stem, dot, ext = path.rpartition(".")
            path = f"{stem}-{i}{dot}{ext}" if dot else f"{path}-{i}"
        linops.save_matrix(path, op.matrix)
        print(f"wrote {path}")
    return EXIT_PASS


def run_report(files) -> int:
    """Summarize previously written report files; exit 1 on any failure."""
    ok = True
    for name in files:
        with open(name) as fh:
            payload = json.load(fh)
        rows = payload.get("results", [])
        failed = [r for r in rows if not r.get("pass")]
        ok = ok and not failed
        worst = max((r["rel_err"] for r in rows), default=0.0)
        print(
            f"{name}: theorem={payload.get('theorem')} functions={len(rows)}"
            f" failed={len(failed)} worst_rel_err={worst:.3e}"
        )
    return EXIT_PASS if ok else EXIT_TOLERANCE


def _add_common(p: argparse.ArgumentParser):
    # Defaults stay None so explicitly passed flags can override --config.
    p.add_argument("--theorem", default=None, choices=THEOREMS)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--probes", type=int, default=None)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--functions", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None, help="JSON file with RunConfig fields")


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    fields = set(asdict(cfg))
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        unknown = set(overrides) - fields
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        for key, value in overrides.items():
            setattr(cfg, key, value)
    for key in fields:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="traceshift",
        description="Verification harness for higher-order trace formulas",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="draw a random instance and write matrix files")
    p_gen.add_argument(
        "--kind",
        required=True,
        choices=[
            "unitary",
            "selfadjoint-generator",
            "contraction",
            "dissipative",
            "selfadjoint-pair",
        ],
    )
    p_gen.add_argument("--dim", type=int, default=4)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default=None)

    p_verify = sub.add_parser("verify", help="run one trace-formula verification")
    _add_common(p_verify)

    p_extract = sub.add_parser("extract", help="extract shift data to JSON (+CSV)")
    _add_common(p_extract)
    p_extract.add_argument("--csv", default=None, help="also write eta samples")

    p_report = sub.add_parser("report", help="summarize written report files")
    p_report.add_argument("files", nargs="+")

    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return run_gen(args.kind, args.dim, args.seed, args.out)
        if args.command == "verify":
            return run_verify(_config_from_args(args))
        if args.command == "extract":
            return run_extract(_config_from_args(args), args.csv)
        if args.command == "report":
            return run_report(args.files)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceshiftError as exc:
        print(f"numerical breakdown: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
