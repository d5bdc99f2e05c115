"""Command-line front end: ``permrec {simulate,sweep,asymptotics,verify,replay}``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .asymptotics import gaussian_slope_bounds, high_noise_rate, low_noise_slope
from .errors import NumericError, PermrecError
from .model import DecoderSpec, NoiseModel
from .rng import THREADS_ENV, Stream, fresh_seed, resolve_threads
from .simulate import ESTIMATORS, ExperimentConfig, pe_limit_high, sweep
from .sources import StandardNormal, parse_source

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

CSV_COLUMNS = (
    "sigma", "n", "method", "trials", "pe", "std_error", "ci_low", "ci_high",
    "pe_over_sigma", "gap_times_sigma", "seed",
)


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


# --- configuration ---------------------------------------------------------


def _resolve_config(args) -> dict:
    """Merge --config JSON with flags (flags win) into a plain, serialisable dict."""
    cfg: dict = {}
    if getattr(args, "config", None):
        raw = _load_json(args.config)
        if not isinstance(raw, dict):
            raise UsageError("--config must hold a JSON object")
        cfg.update({k: raw[k] for k in ("source", "n", "trials", "seed") if k in raw})
        noise = raw.get("noise") or {}
        if "covariance" in noise:
            cfg["covariance"] = noise["covariance"]
        if "sigma" in noise:
            cfg["sigma"] = noise["sigma"]
        dec = raw.get("decoder") or {}
        if "A" in dec:
            cfg["decoder_A"] = dec["A"]
        if "b" in dec:
            cfg["decoder_b"] = dec["b"]
    for key in ("source", "n", "trials", "seed", "sigma"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "noise_cov", None):
        raw = _load_json(args.noise_cov)
        cfg["covariance"] = raw["covariance"] if isinstance(raw, dict) else raw
    if getattr(args, "decoder_a", None):
        raw = _load_json(args.decoder_a)
        cfg["decoder_A"] = raw["A"] if isinstance(raw, dict) else raw
    if getattr(args, "decoder_b", None):
        raw = _load_json(args.decoder_b)
        cfg["decoder_b"] = raw["b"] if isinstance(raw, dict) else raw
    cfg.setdefault("source", "uniform:0,1")
    cfg.setdefault("trials", 10**6)
    if "n" not in cfg:
        if "covariance" in cfg:
            cfg["n"] = len(cfg["covariance"])
        else:
            raise UsageError("--n is required")
    if cfg.get("seed") is None:
        cfg["seed"] = fresh_seed()
    cfg["n"] = int(cfg["n"])
    cfg["trials"] = int(cfg["trials"])
    cfg["seed"] = int(cfg["seed"])
    cfg["inner_orthant_samples"] = int(getattr(args, "inner_samples", 1000) or 1000)
    cfg["confidence_level"] = float(getattr(args, "level", 0.99) or 0.99)
    return cfg


def _build(cfg: dict, threads: int | None, sigma: float | None = None) -> ExperimentConfig:
    n = cfg["n"]
    if "covariance" in cfg:
        if sigma is not None or cfg.get("sigma") is not None:
            raise UsageError("give either a noise covariance or --sigma, not both")
        noise = NoiseModel.general(np.asarray(cfg["covariance"], dtype=float))
    else:
        s = sigma if sigma is not None else cfg.get("sigma")
        if s is None:
            raise UsageError("--sigma (or a noise covariance) is required")
        noise = NoiseModel.isotropic(float(s), n)
    decoder = None
    if "decoder_A" in cfg or "decoder_b" in cfg:
        A = np.asarray(cfg.get("decoder_A", np.eye(n)), dtype=float)
        b = np.asarray(cfg.get("decoder_b", np.zeros(n)), dtype=float)
        decoder = DecoderSpec(A, b)
    return ExperimentConfig(
        source=parse_source(cfg["source"]),
        noise=noise,
        n=n,
        trials=cfg["trials"],
        seed=cfg["seed"],
        decoder=decoder,
        confidence_level=cfg["confidence_level"],
        inner_orthant_samples=cfg["inner_orthant_samples"],
        threads=threads,
    )


# --- output ----------------------------------------------------------------


def _row(sigma, n, method, est, limit) -> dict:
    iso = sigma is not None
    return {
        "sigma": sigma,
        "n": n,
        "method": method,
        "trials": est.trials,
        "pe": est.value,
        "std_error": est.std_error,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "pe_over_sigma": est.value / sigma if iso and sigma > 0 else None,
        "gap_times_sigma": (limit - est.value) * sigma if iso else None,
        "seed": est.seed,
    }


def _render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_num(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _emit(args, text: str, command: str, config: dict) -> None:
    out = getattr(args, "output", None)
    if not out:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    manifest = {
        "command": command,
        "config": config,
        "version": _version(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    Path(str(path) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# --- commands --------------------------------------------------------------


def cmd_simulate(args, cfg: dict | None = None) -> int:
    cfg = cfg or _resolve_config(args)
    cfg["method"] = args.method
    exp = _build(cfg, args.threads)
    if args.method == "isotropic" and not (exp.noise.is_isotropic and exp.decoder.is_identity):
        raise UsageError("--method isotropic needs isotropic noise and the identity decoder")
    est = ESTIMATORS[args.method](exp)
    sigma = exp.noise.sigma if exp.noise.is_isotropic else None
    row = _row(sigma, exp.n, args.method, est, pe_limit_high(exp.n))
    _emit(args, _render_rows([row], args.format), "simulate", {**cfg, "format": args.format})
    return EXIT_OK


def _parse_grid(args) -> list[float]:
    if args.sigma_grid is not None:
        parts = [p for p in args.sigma_grid.split(",") if p.strip()]
        try:
            grid = [float(p) for p in parts]
        except ValueError:
            raise UsageError(f"bad --sigma-grid {args.sigma_grid!r}") from None
    else:
        try:
            lo, hi, count = args.sigma_logspace.split(",")
            grid = np.logspace(math.log10(float(lo)), math.log10(float(hi)), int(count)).tolist()
        except ValueError:
            raise UsageError(f"--sigma-logspace wants lo,hi,count with lo, hi > 0; got {args.sigma_logspace!r}") from None
    if not grid:
        raise UsageError("empty sigma grid")
    if any(not s > 0 for s in grid):
        raise UsageError("sigma grid values must be positive")
    return grid


def cmd_sweep(args, cfg: dict | None = None) -> int:
    if cfg is None:
        if args.sigma_grid is None and args.sigma_logspace is None:
            raise UsageError("give --sigma-grid or --sigma-logspace")
        cfg = _resolve_config(args)
        cfg["sigma_grid"] = _parse_grid(args)
    if "covariance" in cfg:
        raise UsageError("sweeps vary an isotropic noise level; drop the covariance")
    cfg["method"] = args.method
    grid = cfg["sigma_grid"]
    exp = _build(cfg, args.threads, sigma=grid[0])
    rows = [
        _row(r.sigma, r.n, r.method, r.estimate, pe_limit_high(r.n))
        for r in sweep(exp, grid, method=args.method)
    ]
    _emit(args, _render_rows(rows, args.format), "sweep", {**cfg, "format": args.format})
    return EXIT_OK


def cmd_asymptotics(args, cfg: dict | None = None) -> int:
    if cfg is None:
        cfg = {
            "source": args.source,
            "n": args.n,
            "regime": args.regime,
            "samples": args.samples,
            "seed": args.seed if args.seed is not None else fresh_seed(),
        }
    src = parse_source(cfg["source"])
    n = int(cfg["n"])
    report: dict = {"source": src.label(), "n": n, "regime": cfg["regime"]}
    lines = [f"source={src.label()} n={n} regime={cfg['regime']}"]
    if cfg["regime"] == "low":
        res = low_noise_slope(src, n)
        report.update(slope=res.slope, per_i=res.per_i.tolist(), method=res.method, upper_bound=res.upper_bound)
        lines.append(f"slope lim pe/sigma = {res.slope!r} ({res.method})")
        for i, f in enumerate(res.per_i, 1):
            lines.append(f"  f_W{i}(0+) = {float(f)!r}")
        if res.upper_bound is not None:
            lines.append(f"upper bound c n (n-1)/sqrt(pi) = {res.upper_bound!r}")
        if isinstance(src, StandardNormal):
            lo, hi = gaussian_slope_bounds(n)
            inside = lo < res.slope < hi
            report.update(bracket=[lo, hi], inside=inside)
            lines.append(f"gaussian bracket ({lo!r}, {hi!r}): {'inside' if inside else 'OUTSIDE'}")
    else:
        res = high_noise_rate(src, n, cfg["samples"], cfg["samples"], Stream(int(cfg["seed"])), threads=args.threads)
        report.update(
            rate=res.rate, rate_se=res.rate_se, alpha=res.alpha.tolist(), alpha_se=res.alpha_se.tolist(),
            e_w=res.e_w.tolist(), bracket=[res.lower_bound, res.upper_bound], inside=res.within_bounds(),
            seed=int(cfg["seed"]),
        )
        lines.append(f"rate lim sigma (P_e(inf) - P_e(sigma)) = {res.rate!r} +- {res.rate_se!r}")
        for i, (a, w) in enumerate(zip(res.alpha, res.e_w), 1):
            lines.append(f"  alpha_{i} = {float(a)!r}  E[W_{i}] = {float(w)!r}")
        lines.append(
            f"bracket ({res.lower_bound!r}, {res.upper_bound!r}): {'inside' if res.within_bounds() else 'OUTSIDE'}"
        )
        lines.append(f"seed={int(cfg['seed'])}")
    text = json.dumps(report, indent=2) + "\n" if args.format == "json" else "\n".join(lines) + "\n"
    _emit(args, text, "asymptotics", {**cfg, "format": args.format})
    return EXIT_OK


def cmd_verify(args, cfg: dict | None = None) -> int:
    if cfg is None:
        cfg = {
            "suite": args.suite,
            "n": args.n,
            "budget": args.budget,
            "seed": args.seed if args.seed is not None else fresh_seed(),
        }
    ctx = verify_mod.Context(int(cfg["seed"]), cfg["budget"], args.threads, int(cfg["n"]))
    checks = verify_mod.run_suite(cfg["suite"], ctx)
    if args.format == "json":
        text = verify_mod.report_json(checks)
    else:
        text = f"suite={cfg['suite']} budget={cfg['budget']} seed={int(cfg['seed'])}\n" + verify_mod.report_text(checks)
    _emit(args, text, "verify", {**cfg, "format": args.format})
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "asymptotics": cmd_asymptotics,
    "verify": cmd_verify,
}


def cmd_replay(args) -> int:
    manifest = _load_json(args.manifest)
    try:
        command, cfg = manifest["command"], dict(manifest["config"])
    except (KeyError, TypeError):
        raise UsageError(f"{args.manifest} is not a run manifest") from None
    if command not in COMMANDS:
        raise UsageError(f"manifest names unknown command {command!r}")
    ns = argparse.Namespace(
        threads=args.threads,
        output=args.output,
        format=cfg.get("format", "csv"),
        method=cfg.get("method"),
    )
    return COMMANDS[command](ns, cfg)


# --- parser ----------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _add_common(p: argparse.ArgumentParser, fmt_choices=("csv", "json")):
    p.add_argument("--seed", type=int, help="master seed; generated and recorded when omitted")
    p.add_argument("--threads", type=_positive_int, help=f"worker cap (default ${THREADS_ENV} or 1)")
    p.add_argument("--output", help="write results here, plus a <output>.manifest.json sidecar")
    p.add_argument("--format", choices=fmt_choices, default=fmt_choices[0])


def _add_experiment(p: argparse.ArgumentParser, default_method: str):
    p.add_argument("--config", help="JSON with source, n, trials, seed, noise.covariance, decoder.A, decoder.b")
    p.add_argument("--source", help="uniform:a,b | exp:lambda | normal")
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--noise-cov", help="JSON n x n noise covariance")
    p.add_argument("--decoder-a", help="JSON n x n decoder matrix A")
    p.add_argument("--decoder-b", help="JSON length-n decoder offset b")
    p.add_argument("--inner-samples", type=_positive_int, default=1000, help="orthant draws per outer trial")
    p.add_argument("--level", type=float, default=0.99, help="confidence level of the reported interval")
    p.add_argument("--method", choices=sorted(ESTIMATORS), default=default_method)
    _add_common(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permrec", description="Permutation recovery error-probability toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="estimate P_e for one configuration")
    _add_experiment(p, "direct")
    p.add_argument("--sigma", type=float, help="isotropic noise standard deviation")

    p = sub.add_parser("sweep", help="estimate P_e over an isotropic noise grid")
    _add_experiment(p, "isotropic")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sigma-grid", help="comma-separated sigma values")
    g.add_argument("--sigma-logspace", help="lo,hi,count (log-spaced, inclusive)")

    p = sub.add_parser("asymptotics", help="low-noise slope or high-noise rate with bounds")
    p.add_argument("--source", default="uniform:0,1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--regime", choices=("low", "high"), required=True)
    p.add_argument("--samples", type=_positive_int, default=10**6, help="Monte Carlo draws for the high-noise coefficients")
    _add_common(p, ("text", "json"))

    p = sub.add_parser("verify", help="run an acceptance suite")
    p.add_argument("--suite", choices=sorted(verify_mod.SUITES), default="all")
    p.add_argument("--n", type=int, default=3, help="dimension for the low-noise suite")
    p.add_argument("--budget", choices=sorted(verify_mod.BUDGETS), default="standard")
    _add_common(p, ("text", "json"))

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest")
    p.add_argument("--threads", type=_positive_int)
    p.add_argument("--output")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return cmd_replay(args)
        resolve_threads(args.threads)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"permrec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, ArithmeticError) as exc:
        print(f"permrec: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PermrecError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"permrec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
