"""Command-line pipeline: validate spectra, run analyses, emit reports.

Exit codes: 1 for parse/validation failures, 2 for numerical failures
(factorization), 3 for configuration violations.  Reports are JSON with a
versioned schema; scans can be exported as two-column CSV or a line-plot
SVG.  With --no-timings, identical inputs produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .classify import Verdict, classify
from .exclusion import (
    ExclusionCurve,
    ThresholdIntervals,
    naive_exclusion,
    scan,
    threshold_intervals,
)
from .spectrum import ManifoldData, ManifoldFormatError, load_manifold
from .testfuncs import (
    PairConvolution,
    SincSplineFamily,
    SupportError,
    admissibility_report,
    bump_square,
    combined_test_function,
    gaussian_probe,
)
from .trace import SingularGramError, geometric_side, gram_matrix

SCHEMA_VERSION = 1

EXIT_PARSE = 1
EXIT_NUMERICAL = 2
EXIT_CONFIG = 3


class ConfigError(ValueError):
    pass


@dataclass
class AnalysisConfig:
    """Resolved pipeline parameters; embedded verbatim in every report."""

    R: float = 6.5
    n: int = 19
    delta: Optional[float] = None
    t_window: tuple[float, float] = (0.0, 4.0)
    grid_step: float = 1e-3
    bisection_tol: float = 1e-6
    level: float = 1.0
    s_tilde_inf: float = -4.0
    naive_threshold: float = 0.01
    bump_scale: float = 0.4
    ridge: float = 0.0

    def resolve(self) -> "AnalysisConfig":
        if self.delta is None:
            self.delta = self.R / (2 * self.n + 4)
        if not (self.R > 0 and self.n >= 0):
            raise ConfigError(f"need R > 0 and n >= 0, got R={self.R}, n={self.n}")
        if self.delta * (2 * self.n + 4) > self.R * (1.0 + 1e-12):
            raise ConfigError(
                f"delta * (2n+4) = {self.delta * (2 * self.n + 4)} exceeds R = {self.R}"
            )
        lo, hi = self.t_window
        if not (0 <= lo < hi):
            raise ConfigError(f"bad scan window [{lo}, {hi}]")
        for name in ("grid_step", "bisection_tol", "level", "naive_threshold", "bump_scale"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.ridge < 0:
            raise ConfigError("ridge must be nonnegative")
        if self.s_tilde_inf >= 0:
            raise ConfigError("s_tilde_inf must be negative")
        return self

    def family(self) -> SincSplineFamily:
        assert self.delta is not None
        return SincSplineFamily(delta=self.delta, n=self.n)


def _config_from_args(args: argparse.Namespace) -> AnalysisConfig:
    cfg = AnalysisConfig()
    if getattr(args, "cutoff", None) is not None:
        cfg.R = args.cutoff
    if getattr(args, "n", None) is not None:
        cfg.n = args.n
    if getattr(args, "delta", None) is not None:
        cfg.delta = args.delta
    if getattr(args, "window", None) is not None:
        try:
            lo, hi = args.window.split(":")
            cfg.t_window = (float(lo), float(hi))
        except ValueError as e:
            raise ConfigError(f"--window expects LO:HI, got {args.window!r}") from e
    if getattr(args, "step", None) is not None:
        cfg.grid_step = args.step
    if getattr(args, "tol", None) is not None:
        cfg.bisection_tol = args.tol
    if getattr(args, "level", None) is not None:
        cfg.level = args.level
    if getattr(args, "s_tilde", None) is not None:
        cfg.s_tilde_inf = args.s_tilde
    if getattr(args, "naive", None) is not None:
        cfg.naive_threshold = args.naive
    if getattr(args, "scale", None) is not None:
        cfg.bump_scale = args.scale
    if getattr(args, "ridge", None) is not None:
        cfg.ridge = args.ridge
    return cfg.resolve()


def _read_manifold(path: str) -> ManifoldData:
    text = Path(path).read_text(encoding="utf-8")
    return load_manifold(text)


def _config_dict(cfg: AnalysisConfig) -> dict:
    d = asdict(cfg)
    d["t_window"] = list(cfg.t_window)
    return d


def _trace_dict(ev) -> dict:
    return {
        "identity_term": ev.identity_term,
        "trivial_rep_term": ev.trivial_rep_term,
        "regular_sum": ev.regular_sum,
        "spectral_sum": ev.spectral_sum,
        "term_count": ev.term_count,
        "truncation_flag": ev.truncation_flag,
    }


def _intervals_dict(iv: ThresholdIntervals) -> dict:
    return {
        "level": iv.level,
        "tolerance": iv.tolerance,
        "window": list(iv.window),
        "intervals": [[lo, hi] for lo, hi in iv.intervals],
    }


def _verdict_dict(v: Verdict) -> dict:
    return {
        "kind": v.kind,
        "sw_threshold_t": v.sw_threshold_t,
        "lambda1_window": list(v.lambda1_window) if v.lambda1_window else None,
        "small_t_hits": [[lo, hi] for lo, hi in v.small_t_hits],
        "caveats": list(v.caveats),
        "certifying": v.certifying,
    }


def _emit(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(curve: ExclusionCurve, path: str) -> None:
    lines = [f"{t:.3f}, {j:.12g}" for t, j in zip(curve.t_grid, curve.j_values)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_svg(curve: ExclusionCurve, path: str, level: float = 1.0) -> None:
    """Minimal line plot; no plotting dependency."""
    w, h, pad = 900, 420, 45
    t = curve.t_grid
    j = np.minimum(curve.j_values, 50.0)
    t0, t1 = float(t[0]), float(t[-1])
    j0, j1 = 0.0, float(max(j.max() * 1.05, level * 1.5))

    def sx(x: float) -> float:
        return pad + (x - t0) / (t1 - t0) * (w - 2 * pad)

    def sy(y: float) -> float:
        return h - pad - (y - j0) / (j1 - j0) * (h - 2 * pad)

    pts = " ".join(f"{sx(float(a)):.2f},{sy(float(b)):.2f}" for a, b in zip(t, j))
    yl = sy(level)
    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{pad}" y1="{h-pad}" x2="{w-pad}" y2="{h-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{yl:.2f}" x2="{w-pad}" y2="{yl:.2f}" stroke="red" stroke-dasharray="6,4"/>',
        f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1.2"/>',
        f'<text x="{w-pad}" y="{h-pad+30}" text-anchor="end" font-size="12">t = {t1:g}</text>',
        f'<text x="{pad}" y="{h-pad+30}" font-size="12">t = {t0:g}</text>',
        f'<text x="{pad+4}" y="{yl-4:.2f}" font-size="12" fill="red">level {level:g}</text>',
        f'<text x="{pad+4}" y="{pad-8}" font-size="12">max {float(curve.j_values.max()):.3g}</text>',
        "</svg>",
    ]
    Path(path).write_text("\n".join(svg) + "\n", encoding="utf-8")


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    data = _read_manifold(args.manifold)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "label": data.label,
        "volume": data.volume,
        "cutoff": data.cutoff,
        "geodesic_classes": len(data.geodesics),
        "orientation_factor": data.orientation_factor,
        "valid": True,
    }
    _emit(doc, getattr(args, "out", None))
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = _read_manifold(args.manifold)
    fam = cfg.family()
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    gram = gram_matrix(data, fam)
    if cfg.ridge > 0:
        gram = gram.with_ridge(cfg.ridge)
    timings["gram_seconds"] = time.perf_counter() - t0

    unit = np.zeros(fam.size)
    unit[0] = 1.0
    base_eval = geometric_side(data, combined_test_function(fam, unit))

    t0 = time.perf_counter()
    curve = scan(gram, cfg.t_window[0], cfg.t_window[1], cfg.grid_step)
    intervals = threshold_intervals(
        gram, cfg.level, cfg.bisection_tol,
        cfg.t_window[0], cfg.t_window[1], cfg.grid_step, curve=curve,
    )
    timings["scan_seconds"] = time.perf_counter() - t0

    verdict = classify(intervals, known_non_l_space=args.non_l_space,
                       s_tilde_inf=cfg.s_tilde_inf)

    stride = max(1, args.scan_stride)
    adm = admissibility_report(combined_test_function(fam, unit), sigma=2.6, window=500.0)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "label": data.label,
        "config": _config_dict(cfg),
        "manifold": {
            "volume": data.volume,
            "cutoff": data.cutoff,
            "geodesic_classes": len(data.geodesics),
            "orientation_factor": data.orientation_factor,
        },
        "trace": {"unit_combined_square": _trace_dict(base_eval)},
        "gram": {
            "size": fam.size,
            "condition_estimate": gram.condition_estimate(),
            "min_pivot": float(gram.pivots().min()),
            "trace": float(np.trace(gram.matrix)),
        },
        "curve": {
            "stride": stride,
            "t": [float(x) for x in curve.t_grid[::stride]],
            "j": [float(x) for x in curve.j_values[::stride]],
            "peaks_per_unit": curve.peak_count_per_unit(),
        },
        "possible_small_spectrum": _intervals_dict(intervals),
        "verdict": _verdict_dict(verdict),
        "diagnostics": {
            "admissibility": {
                "sigma": adm.sigma,
                "window": adm.window,
                "ratio_minus_one": adm.ratio_minus_one,
                "converged": adm.converged,
            },
        },
    }
    if not args.no_timings:
        doc["timings"] = timings
    _emit(doc, args.out)
    return 0


def cmd_scan(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = _read_manifold(args.manifold)
    gram = gram_matrix(data, cfg.family())
    if cfg.ridge > 0:
        gram = gram.with_ridge(cfg.ridge)
    curve = scan(gram, cfg.t_window[0], cfg.t_window[1], cfg.grid_step)
    wrote = False
    if args.csv:
        _write_csv(curve, args.csv)
        wrote = True
    if args.svg:
        _write_svg(curve, args.svg, cfg.level)
        wrote = True
    if not wrote:
        for t, j in zip(curve.t_grid, curve.j_values):
            sys.stdout.write(f"{t:.3f}, {j:.12g}\n")
    return 0


def cmd_sum(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = _read_manifold(args.manifold)
    fam = cfg.family()
    H = PairConvolution(fam, args.k, args.k)
    ev = geometric_side(data, H)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "label": data.label,
        "config": _config_dict(cfg),
        "member": args.k,
        "trace": _trace_dict(ev),
    }
    _emit(doc, args.out)
    return 0


def cmd_probe(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = _read_manifold(args.manifold)
    probe = gaussian_probe(args.a)
    ev = geometric_side(data, probe, allow_truncation=True)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "label": data.label,
        "config": _config_dict(cfg),
        "probe_parameter": args.a,
        "effective_radius_1e-9": probe.effective_radius(1e-9),
        "trace": _trace_dict(ev),
        "positive_sum_suggests_parameter_below": args.a if ev.spectral_sum > 0 else None,
        "caveats": ["tail not bounded: sum truncated at the spectrum cutoff"],
    }
    _emit(doc, args.out)
    return 0


def cmd_naive(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = _read_manifold(args.manifold)
    report = naive_exclusion(data, bump_square(cfg.bump_scale), cfg.naive_threshold)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "label": data.label,
        "config": _config_dict(cfg),
        "naive": {
            "spectral_sum": report.spectral_sum,
            "threshold": report.threshold,
            "passed": report.passed,
            "t_window": report.t_window,
            "fourier_min_on_window": report.fourier_min,
            "margin_ok": report.margin_ok,
        },
        "trace": _trace_dict(report.evaluation),
    }
    _emit(doc, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coexact",
                                description="trace-formula eigenvalue exclusion pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp: argparse.ArgumentParser, scan_opts: bool = True) -> None:
        sp.add_argument("--manifold", required=True, help="manifold JSON document")
        sp.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
        sp.add_argument("--cutoff", type=float, default=None, help="family support bound R")
        sp.add_argument("--n", type=int, default=None, help="highest translate index")
        sp.add_argument("--delta", type=float, default=None, help="family spacing")
        if scan_opts:
            sp.add_argument("--window", default=None, help="scan window LO:HI")
            sp.add_argument("--step", type=float, default=None, help="scan grid step")
            sp.add_argument("--tol", type=float, default=None, help="bisection tolerance")
            sp.add_argument("--level", type=float, default=None, help="threshold level")
        sp.add_argument("--s-tilde", dest="s_tilde", type=float, default=None,
                        help="infimum of the curvature sum (default -4)")
        sp.add_argument("--naive", type=float, default=None, help="naive pass threshold")
        sp.add_argument("--scale", type=float, default=None, help="bump-square scale")
        sp.add_argument("--ridge", type=float, default=None,
                        help="exploratory ridge regularization; results stop certifying")

    sp = sub.add_parser("validate", help="check a document against the schema")
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("analyze", help="full pipeline: gram, scan, intervals, verdict")
    add_common(sp)
    sp.add_argument("--non-l-space", action="store_true",
                    help="the manifold is independently known to be a non-L-space")
    sp.add_argument("--no-timings", action="store_true", help="omit timings for byte-stable output")
    sp.add_argument("--scan-stride", type=int, default=1,
                    help="down-sample the embedded curve by this factor")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("scan", help="emit the exclusion curve as CSV/SVG")
    add_common(sp)
    sp.add_argument("--csv", default=None, help="write t,J rows here")
    sp.add_argument("--svg", default=None, help="write a line plot here")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("sum", help="spectral sum of one squared family member")
    add_common(sp, scan_opts=False)
    sp.add_argument("--k", type=int, default=0, help="member index")
    sp.set_defaults(func=cmd_sum)

    sp = sub.add_parser("probe", help="truncated Gaussian-probe diagnostic")
    add_common(sp, scan_opts=False)
    sp.add_argument("--a", type=float, required=True, help="probe parameter")
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("naive", help="bump-square threshold test")
    add_common(sp, scan_opts=False)
    sp.set_defaults(func=cmd_naive)

    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ManifoldFormatError, FileNotFoundError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_PARSE
    except (SingularGramError, ArithmeticError) as e:
        sys.stderr.write(f"numerical failure: {e}\n")
        return EXIT_NUMERICAL
    except (ConfigError, SupportError, ValueError) as e:
        sys.stderr.write(f"configuration violation: {e}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
