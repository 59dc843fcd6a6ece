"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 capacity or budget exhausted, 3 verification failure.
Primary outputs are written to a temporary sibling and renamed into place, so a
failed run never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import main_term, psi3_density, psi3_tail
from .core import CoprimeVector, NormalizationKind, fsineq_rhs, schur_bound
from .errors import FrobdistError, UsageError
from .frobenius import ENGINES, frobenius
from .lattice import check_aliev_henk, kernel_lattice, ratio_statistics, sample_mu2_batch, successive_minima
from .rng import WORKERS_ENV
from .simplex import covering_radii_2d, covering_radius_2d
from .statistics import (
    MAX_RETAINED,
    Box,
    EmpiricalDistribution,
    ExperimentConfig,
    concentration_fraction,
    empirical_psi,
    histogram,
    moment_estimate,
    read_samples_csv,
    sample_coprime,
    stream_summary,
    write_samples_csv,
)
from .verify import SUITES, cover_estimates, run_suite

EXIT_VERIFY = 3


@dataclass
class RunManifest:
    version: str
    command: str
    config: dict
    wall_time: float
    redraws: dict = field(default_factory=dict)
    digests: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig.from_dict(self.config)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- output helpers ----------------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@contextlib.contextmanager
def atomic_path(path):
    """Yield a temporary path next to ``path``; rename on success, delete on failure."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".part", dir=path.parent)
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _write_text(path, text: str):
    with atomic_path(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _emit(text: str, out):
    if out:
        _write_text(out, text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _radii(values) -> list:
    out = []
    for v in values or []:
        out += _floats(v)
    return out


def _load_distribution(path, kind: NormalizationKind) -> EmpiricalDistribution:
    if not Path(path).exists():
        raise UsageError(f"no such file: {path}")
    rec = read_samples_csv(path)
    if len(rec) == 0:
        raise UsageError(f"{path} has no samples")
    return EmpiricalDistribution(rec.column(kind), records=rec, dim=rec.vectors.shape[1])


# --- subcommands ----------------------------------------------------------------------

def cmd_frob(args) -> int:
    a = CoprimeVector(tuple(_ints(args.a)))
    res = frobenius(a, engine=args.engine)
    out = {
        "a": list(a.coeffs),
        "g": res.g,
        "f": res.f,
        "norm_prod": res.norm_prod,
        "norm_s": res.norm_s,
        "schur_bound": schur_bound(a),
        "fsineq_rhs": fsineq_rhs(a) if a.d >= 3 else None,
    }
    sys.stdout.write(_json(out))
    return 0


def _summary(dist_values, config: ExperimentConfig, redraws: dict, bin_width: float, radii, hist=None,
             moments=None) -> dict:
    kind = config.normalization
    if hist is None:
        dist = EmpiricalDistribution(dist_values, config)
        hist = histogram(dist, bin_width)
        moments = {k: moment_estimate(dist, k) for k in range(1, config.d - 1)}
        stats = {"psi_hat": {repr(R): empirical_psi(dist, R) for R in radii}}
        if kind is NormalizationKind.PROD_POWER and config.d >= 3:
            stats["concentration_1.757"] = concentration_fraction(dist, 1.757)
        stats["min"] = float(dist.values[0])
        stats["max"] = float(dist.values[-1])
    else:
        stats = {}
    stats["moments"] = {str(k): v for k, v in moments.items()}
    return {
        "config": config.to_dict(),
        "redraws": redraws,
        "histogram": {"bin_width": hist.bin_width, "total": hist.total,
                      "bins": [[int(k), int(c)] for k, c in sorted(hist.counts.items())]},
        "statistics": stats,
    }


def cmd_sweep(args) -> int:
    config = ExperimentConfig(
        d=args.d,
        T=args.T,
        count=args.count,
        seed=args.seed,
        domain=Box.parse(args.domain, args.d) if args.domain else None,
        normalization=NormalizationKind.parse(args.normalization),
    )
    out = Path(args.out)
    manifest_path = out.with_name(out.name + ".manifest.json")
    summary_path = out.with_name(out.name + ".summary.json")
    radii = _radii(args.R)
    start = time.perf_counter()
    written = []
    try:
        if config.count > MAX_RETAINED:
            res = stream_summary(config, bin_width=args.bin_width, workers=args.workers)
            summary = _summary(None, config, res["redraws"], args.bin_width, radii,
                               hist=res["histogram"], moments=res["moments"])
            redraws = res["redraws"]
        else:
            dist = sample_coprime(config, workers=args.workers)
            with atomic_path(out) as tmp:
                write_samples_csv(tmp, dist.records)
            written.append(out)
            redraws = dist.redraws
            summary = _summary(dist.values, config, redraws, args.bin_width, radii)
        _write_text(summary_path, _json(summary))
        written.append(summary_path)
        manifest = RunManifest(
            version=__version__,
            command="sweep",
            config=config.to_dict(),
            wall_time=time.perf_counter() - start,
            redraws=redraws,
            digests={p.name: sha256_file(p) for p in written},
        )
        _write_text(manifest_path, manifest.to_json())
    except BaseException:
        for p in written:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(p)
        raise
    print(_json({"out": str(out) if out in written else None, "summary": str(summary_path),
                 "manifest": str(manifest_path), "redraws": redraws}), end="")
    return 0


def cmd_density(args) -> int:
    dist = _load_distribution(args.inp, NormalizationKind.parse(args.normalization))
    hist = histogram(dist, args.bin_width)
    _emit(_csv(["bin_lo", "count", "density"], hist.rows()), args.out)
    return 0


def cmd_tail(args) -> int:
    dist = _load_distribution(args.inp, NormalizationKind.parse(args.normalization))
    radii = _radii(args.R)
    if not radii:
        raise UsageError("give at least one --R")
    rows = []
    for R in radii:
        psi = empirical_psi(dist, R)
        mt = main_term(dist.d, R)
        rows.append((R, psi, mt, psi / mt))
    _emit(_csv(["R", "psi_hat", "main_term", "ratio"], rows), args.out)
    return 0


def _table_points(spec: str) -> list:
    parts = _floats(spec.replace(":", ","))
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise UsageError("--table expects lo:hi:step with lo <= hi and step > 0")
    lo, hi, step = parts
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def cmd_psi3(args) -> int:
    if args.table:
        pts = _table_points(args.table)
    else:
        pts = _radii(args.R)
    if not pts:
        raise UsageError("give --R or --table")
    rows = [(R, psi3_density(R), psi3_tail(R)) for R in pts]
    _emit(_csv(["R", "psi3", "Psi3"], rows), args.out)
    return 0


def cmd_lattice(args) -> int:
    if args.ratios:
        if args.d is None:
            raise UsageError("--ratios needs --d")
        rows = ratio_statistics(args.d, args.T, args.count, args.seed)
        _emit(_csv(["j", "r", "fraction"], rows), args.out)
        return 0
    if not args.a:
        raise UsageError("give --a or --ratios")
    a = CoprimeVector(tuple(_ints(args.a)))
    basis = kernel_lattice(a)
    prof = successive_minima(basis)
    lo, val, hi = prof.minkowski_bounds()
    out = {
        "a": list(a.coeffs),
        "basis": [list(map(int, r)) for r in basis.rows],
        "det": basis.det,
        "norm": a.norm,
        "lambdas": list(prof.lambdas),
        "ratios": list(prof.ratios),
        "vectors": [list(map(int, v)) for v in prof.vectors],
        "minkowski": {"lower": lo, "value": val, "upper": hi, "holds": prof.sandwich_holds()},
    }
    if a.d >= 3:
        out["aliev_henk"] = check_aliev_henk(a)
    _emit(_json(out), args.out)
    return 0


def _parse_basis(text: str) -> np.ndarray:
    rows = [_floats(r) for r in text.split(";")]
    M = np.array(rows, dtype=float)
    if M.shape != (2, 2):
        raise UsageError("--basis expects 'b11,b12;b21,b22'")
    return M


def cmd_cover(args) -> int:
    if args.basis:
        c = covering_radius_2d(_parse_basis(args.basis), tol=args.tol)
        sys.stdout.write(_json({"lo": c.lo, "hi": c.hi, "width": c.width, "evaluations": c.evaluations}))
        return 0
    if args.count is None:
        raise UsageError("give --basis or --count")
    lo, hi = covering_radii_2d(sample_mu2_batch(args.seed, args.count), tol=args.tol)
    estimates = [cover_estimates(lo, hi, R) for R in _radii(args.R)]
    for e in estimates:
        e["Psi3"] = psi3_tail(e["R"])
    text = _csv(["index", "lo", "hi"], [(i, a, b) for i, (a, b) in enumerate(zip(lo, hi))])
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    report = _json({"count": args.count, "seed": args.seed, "tol": args.tol, "estimates": estimates})
    if args.summary:
        _write_text(args.summary, report)
    elif args.out:
        sys.stdout.write(report)
    return 0


_SCALES = {
    "inequalities": {"count": "count", "T": "T", "seed": "seed"},
    "ks": {"count": "count", "T": "T", "seed": "seed"},
    "concentration": {"count": "count", "T": "T", "seed": "seed"},
    "cover": {"count": "count", "seed": "seed"},
    "constants": {"count": "samples", "seed": "seed"},
}


def cmd_verify(args) -> int:
    kwargs = {}
    for flag, name in _SCALES.get(args.suite, {}).items():
        v = getattr(args, flag)
        if v is not None:
            kwargs[name] = v
    if args.suite in ("inequalities", "ks", "concentration", "constants"):
        kwargs["workers"] = args.workers
    report = run_suite(args.suite, **kwargs)
    _emit(_json(report.to_dict()), args.out)
    return 0 if report.passed else EXIT_VERIFY


# --- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="frobdist", description="Frobenius numbers of random coprime vectors.")
    p.add_argument("--version", action="version", version=f"frobdist {__version__}")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker threads (default: ${WORKERS_ENV} or the CPU count); never changes output")
    common = _Parser(add_help=False)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    s = sub.add_parser("frob", help="Frobenius number of one vector (JSON)")
    s.add_argument("--a", required=True, help="comma-separated coefficients")
    s.add_argument("--engine", choices=ENGINES, default=ENGINES[0])
    s.set_defaults(fn=cmd_frob)

    s = sub.add_parser("sweep", help="sample normalized Frobenius numbers (CSV + summary + manifest)")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--T", type=int, default=10**5)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--domain", default=None, help="lo:hi for every axis, or one pair per axis")
    s.add_argument("--normalization", default="prod", help="prod or s")
    s.add_argument("--bin-width", type=float, default=0.01)
    s.add_argument("--R", action="append", help="radii for psi_hat in the summary")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_sweep)

    for name, fn, help_ in (("density", cmd_density, "histogram CSV from a sample file"),
                            ("tail", cmd_tail, "tail table from a sample file")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--in", dest="inp", required=True)
        s.add_argument("--normalization", default="prod")
        s.add_argument("--out", default=None)
        if name == "density":
            s.add_argument("--bin-width", type=float, default=0.01)
        else:
            s.add_argument("--R", action="append", required=True)
        s.set_defaults(fn=fn)

    s = sub.add_parser("psi3", help="exact d=3 density and tail")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--R", action="append")
    g.add_argument("--table", help="lo:hi:step")
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_psi3)

    s = sub.add_parser("lattice", help="kernel lattice and successive minima (JSON), or ratio statistics (CSV)")
    s.add_argument("--a")
    s.add_argument("--ratios", action="store_true")
    s.add_argument("--d", type=int)
    s.add_argument("--T", type=int, default=10**4)
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_lattice)

    s = sub.add_parser("cover", help="simplex covering radii of 2-D unimodular lattices")
    s.add_argument("--basis", help="'b11,b12;b21,b22'")
    s.add_argument("--count", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--R", action="append", help="radii for Psi_hat")
    s.add_argument("--tol", type=float, default=1e-3)
    s.add_argument("--out", default=None, help="bracket CSV")
    s.add_argument("--summary", default=None, help="estimates JSON")
    s.set_defaults(fn=cmd_cover)

    s = sub.add_parser("verify", help="run a named invariant suite; exit 3 on failure")
    s.add_argument("--suite", choices=SUITES, required=True)
    s.add_argument("--count", type=int)
    s.add_argument("--T", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.workers is not None and args.workers < 1:
            raise UsageError("--workers must be positive")
        return args.fn(args)
    except FrobdistError as exc:
        print(f"frobdist: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        print("frobdist: interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
