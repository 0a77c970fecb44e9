"""Command-line runner: coefficient tables, Monte Carlo estimates, sweeps and verification suites."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import engine as E
from . import verify as V
from .config import ConfigError, ExperimentConfig, RunReport, input_hash, make_body
from .intrinsic_volumes import coeff_csv, crofton_coeffs
from .pseudo_linalg import standard_form

SWEEP_CSV_HEADER = ("epsilon", "re", "im", "stderr_re", "stderr_im")


def emit_theorem_table(k_max: int, n_max: int) -> str:
    """Coefficient table as CSV for sigma in {-1, 0, 1}, 1 <= k <= k_max, k <= n <= n_max."""
    if not 1 <= k_max <= n_max <= 10:
        raise ValueError("need 1 <= k_max <= n_max <= 10")
    tables = [crofton_coeffs(k, n, sigma)
              for sigma in (-1, 0, 1)
              for n in range(1, n_max + 1)
              for k in range(1, min(k_max, n) + 1)]
    return coeff_csv(tables)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _body(cfg: ExperimentConfig):
    d = cfg.p + cfg.q if cfg.space == "flat" else cfg.space_form().ambient.dim
    return make_body(cfg.body, d)


def _stratify(cfg: ExperimentConfig):
    return E.Stratification() if cfg.stratify else None


def run(cfg: ExperimentConfig) -> tuple[RunReport, dict[str, str]]:
    """Execute a validated config; returns the report and named CSV tables."""
    results, checks, tables = [], [], {}
    if cfg.kind == "coeffs":
        tables["coeffs"] = coeff_csv([crofton_coeffs(cfg.k, cfg.n, cfg.sigma)])
        results = list(crofton_coeffs(cfg.k, cfg.n, cfg.sigma).rows())
    elif cfg.kind == "table":
        tables["theorem_table"] = emit_theorem_table(cfg.k_max, cfg.n_max)
    elif cfg.kind == "mc-sphere":
        sf = cfg.space_form()
        est = E.estimate_sphere(_body(cfg), sf, cfg.k, cfg.zeta_value(), cfg.N, cfg.seed,
                                cfg.workers, _stratify(cfg))
        results = [_record(cfg, est)]
    elif cfg.kind == "mc-flat":
        eps = cfg.eps[0] if cfg.eps else 0.0
        est = E.estimate_flat(_body(cfg), standard_form((cfg.p, cfg.q)), cfg.k, eps, cfg.N,
                              cfg.seed, cfg.window_R, cfg.workers, _stratify(cfg))
        results = [_record(cfg, est)]
    elif cfg.kind == "sweep":
        setup = standard_form((cfg.p, cfg.q)) if cfg.space == "flat" else cfg.space_form()
        sweep = E.epsilon_sweep(_body(cfg), setup, cfg.k, cfg.eps, cfg.N, cfg.seed, cfg.workers,
                                _stratify(cfg), cfg.window_R, method=cfg.method)
        results = [_record(cfg, e) for e in sweep.estimates]
        results.append({"extrapolated_re": sweep.extrapolated.real,
                        "extrapolated_im": sweep.extrapolated.imag,
                        "error_re": sweep.error_re, "error_im": sweep.error_im,
                        "error_re_minus_im": sweep.error_re_minus_im,
                        "stderr_re": sweep.stderr_re, "stderr_im": sweep.stderr_im,
                        "order_fitted": list(sweep.order_fitted), "order_used": list(sweep.order_used),
                        "monotone": sweep.monotone, "method": sweep.method})
        tables["sweep"] = _csv(SWEEP_CSV_HEADER, sweep.csv_rows())
    elif cfg.kind == "verify":
        try:
            found = V.run_suite(cfg.suite, cfg.tolerances)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from exc
        checks = [c.to_dict() for c in found]
    report = RunReport(cfg.to_dict(), input_hash(cfg), results, checks)
    return report, tables


def _record(cfg: ExperimentConfig, est: E.CroftonEstimate) -> dict:
    return {"body": cfg.body, "p": cfg.p, "q": cfg.q, "k": cfg.k, "seed": cfg.seed, **est.to_record()}


def write_outputs(report: RunReport, tables: dict[str, str], out_dir: Path, wall: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.dumps())
    for name, text in tables.items():
        (out_dir / f"{name}.csv").write_text(text)
    # wall-clock lives outside the report so the report stays byte-reproducible
    (out_dir / "timing.json").write_text(json.dumps({"input_hash": report.input_hash,
                                                     "wall_seconds": wall}, indent=2) + "\n")


# ---------------------------------------------------------------------------
# argument parsing


def _complex_pair(text: str) -> list[float]:
    z = complex(text.replace(" ", "").replace("i", "j"))
    return [z.real, z.imag]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


BODY_PARAMS = ("theta", "radius", "a", "b", "c")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crofton", description=__doc__)
    sub = ap.add_subparsers(dest="kind", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="JSON config; command-line flags override it")
        sp.add_argument("--output", type=Path, help="output directory (default runs/<kind>-<hash>)")
        sp.add_argument("--quiet", action="store_true")

    def mc(sp):
        sp.add_argument("--body", help="catalog name: cap, band, equator, full-sphere, constant, "
                                       "cone, swapped, ellipse, circle, limacon, ball")
        sp.add_argument("--body-json", help="full body descriptor as JSON")
        for name in BODY_PARAMS:
            sp.add_argument(f"--{name}", type=float)
        sp.add_argument("--space", choices=("pseudosphere", "pseudohyperbolic", "flat"))
        sp.add_argument("--p", type=int, help="positive index of the ambient space")
        sp.add_argument("--q", type=int, help="negative index of the ambient space")
        sp.add_argument("--k", type=int)
        sp.add_argument("--N", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--window-R", dest="window_R", type=float)
        sp.add_argument("--no-stratify", dest="stratify", action="store_false", default=None)

    sp = sub.add_parser("coeffs", help="coefficients of one (k, n, sigma)")
    common(sp)
    sp.add_argument("--k", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--sigma", type=float)

    sp = sub.add_parser("table", help="full coefficient table for sigma in {-1, 0, 1}")
    common(sp)
    sp.add_argument("--k-max", dest="k_max", type=int)
    sp.add_argument("--n-max", dest="n_max", type=int)

    sp = sub.add_parser("mc-sphere", help="Monte Carlo estimate on a pseudosphere or pseudohyperbolic space")
    common(sp)
    mc(sp)
    sp.add_argument("--zeta", type=_complex_pair, help="complex parameter, e.g. 1, 1+1j, 0.1j")

    sp = sub.add_parser("mc-flat", help="Monte Carlo estimate in flat space")
    common(sp)
    mc(sp)
    sp.add_argument("--eps", type=_float_list, help="regularisation epsilon (first value used)")

    sp = sub.add_parser("sweep", help="epsilon sweep with extrapolation to zero")
    common(sp)
    mc(sp)
    sp.add_argument("--eps", type=_float_list, help="decreasing list, e.g. 0.2,0.1,0.05,0.025")
    sp.add_argument("--method", choices=("polynomial", "fit"))

    sp = sub.add_parser("verify", help="run a verification suite; exit status 1 on failure")
    common(sp)
    sp.add_argument("--suite", choices=(*V.SUITES, "all"))
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data = json.loads(args.config.read_text()) if args.config else {}
    data.setdefault("schema", 1)
    if data.get("kind", args.kind) != args.kind:
        raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {args.kind!r}")
    data["kind"] = args.kind
    skip = {"config", "output", "quiet", "kind", "body", "body_json", *BODY_PARAMS}
    for key, val in vars(args).items():
        if key not in skip and val is not None:
            data[key] = val
    if getattr(args, "body_json", None):
        data["body"] = json.loads(args.body_json)
    elif getattr(args, "body", None):
        body = {"name": args.body}
        body.update({k: getattr(args, k) for k in BODY_PARAMS if getattr(args, k) is not None})
        if args.body == "band" and "theta" not in body:
            raise ConfigError("band needs --theta")
        data["body"] = body
    if args.kind == "mc-flat":
        data.setdefault("space", "flat")
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        t0 = time.perf_counter()
        report, tables = run(cfg)
        wall = time.perf_counter() - t0
    except (ConfigError, ValueError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = args.output or Path(cfg.output or f"runs/{cfg.kind}-{report.input_hash[:12]}")
    write_outputs(report, tables, out_dir, wall)
    if not args.quiet:
        for c in report.checks:
            print(V.Check(**c).line())
        for name, text in tables.items():
            if cfg.kind in ("coeffs", "sweep"):
                print(text, end="")
        for r in report.results:
            if "extrapolated_re" in r:
                print(f"extrapolated {r['extrapolated_re']:.10g} {r['extrapolated_im']:+.10g}i "
                      f"(error re {r['error_re']:.3g}, im {r['error_im']:.3g})")
            elif "value_re" in r and cfg.kind != "sweep":
                print(f"estimate {r['value_re']:.10g} {r['value_im']:+.10g}i (stderr {r['stderr']:.3g})")
        print(f"wrote {out_dir}")
    if cfg.kind == "verify":
        return 0 if report.passed else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
