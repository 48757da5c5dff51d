#!/usr/bin/env python3
"""Export a census manifold's volume and complex length spectrum as a
manifold JSON document.

The output follows the analysis pipeline's schema exactly (see the main
package README); this tool is the only component that talks to the SnapPy
backend, and is used once per manifold to produce committed fixtures.

    export_spectrum --census 0 --cutoff 6.5 --out census0.json

Geodesic entries are flagged as iterates when their complex length is an
integer multiple of a shorter entry's within 1e-9 (ties resolve toward
"iterate": misclassifying a primitive only drops a term the consumer's
expansion would re-create).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Optional

TWO_PI = 2.0 * math.pi

ITERATE_TOL = 1e-9

EXIT_USAGE = 1
EXIT_BACKEND = 2
EXIT_NO_BACKEND = 3


def _wrap_angle(theta: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    if -math.pi < theta <= math.pi:
        return theta
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def _as_float(value: Any) -> float:
    """SnapPy numbers are exact-precision types with float conversion."""
    return float(value)


def _entry_field(entry: Any, name: str):
    try:
        return entry[name]
    except (TypeError, KeyError, IndexError):
        return getattr(entry, name)


def _complex_parts(z: Any) -> tuple[float, float]:
    """Real/imag parts of a SnapPy Number-like or python complex."""
    re, im = getattr(z, "real", None), getattr(z, "imag", None)
    if callable(re):
        return _as_float(re()), _as_float(im())
    if re is not None and im is not None:
        return _as_float(re), _as_float(im)
    return _as_float(z), 0.0


def spectrum_entries(backend_spectrum) -> list[dict]:
    """Normalize backend spectrum objects to (length, holonomy, multiplicity)."""
    rows = []
    for entry in backend_spectrum:
        length, holonomy = _complex_parts(_entry_field(entry, "length"))
        mult = int(_entry_field(entry, "multiplicity"))
        rows.append({
            "length": length,
            "holonomy": _wrap_angle(holonomy),
            "multiplicity": max(1, mult),
        })
    rows.sort(key=lambda r: r["length"])
    return rows


def mark_iterates(rows: list[dict]) -> list[dict]:
    """Attach is_primitive/primitive_length by complex-multiple detection."""
    out = []
    for row in rows:
        length, theta = row["length"], row["holonomy"]
        primitive_length: Optional[float] = None
        for prev in out:
            if not prev["is_primitive"]:
                continue
            k = round(length / prev["length"])
            if k < 2:
                continue
            d_len = abs(length - k * prev["length"])
            d_hol = abs(_wrap_angle(theta - k * prev["holonomy"]))
            if math.hypot(d_len, d_hol) <= ITERATE_TOL * max(1.0, float(k)):
                primitive_length = prev["length"]
                break
        out.append({
            "length": length,
            "holonomy": theta,
            "multiplicity": row["multiplicity"],
            "is_primitive": primitive_length is None,
            "primitive_length": primitive_length if primitive_length is not None else length,
        })
    return out


def build_document(manifold, cutoff: float, label: str,
                   backend_version: str = "unknown") -> dict:
    """Assemble a schema-valid document from a backend manifold object."""
    volume = _as_float(manifold.volume())
    spectrum = manifold.length_spectrum(cutoff, full_rigor=True)
    rows = mark_iterates(spectrum_entries(spectrum))
    doc = {
        "label": label,
        "volume": volume,
        "cutoff": cutoff,
        # the backend enumerates every class up to the cutoff, iterates
        # included, so the list is complete as-is
        "primitives_only": False,
        "orientation_factor": 1,
        "geodesics": rows,
        "metadata": {
            "exporter": "export_spectrum 0.1.0",
            "backend": "snappy",
            "backend_version": backend_version,
            "full_rigor": True,
        },
    }
    if rows:
        doc["injectivity_radius"] = rows[0]["length"] / 2.0
    return doc


def growth_estimate(cutoff: float) -> float:
    """Expected primitive count exp(2R)/(2R); logged as a sanity diagnostic."""
    return math.exp(2.0 * cutoff) / (2.0 * cutoff)


def resolve_manifold(census: Optional[int], name: Optional[str]):
    try:
        import snappy
    except ImportError as e:
        raise RuntimeError(
            "the SnapPy backend is not installed; install it with "
            "'pip install snappy' (or 'pip install .[snappy]') and re-run"
        ) from e
    if census is not None:
        try:
            return snappy.OrientableClosedCensus[census], snappy.__version__
        except (IndexError, KeyError) as e:
            raise ValueError(f"census index {census} not resolvable") from e
    try:
        return snappy.Manifold(name), snappy.__version__
    except Exception as e:
        raise ValueError(f"manifold {name!r} not resolvable") from e


def main(argv: Optional[list[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="export_spectrum", description=__doc__)
    group = ap.add_mutually_exclusive_group(required=True)
    group.add_argument("--census", type=int, help="index into the closed orientable census")
    group.add_argument("--name", help="manifold name resolvable by the backend")
    ap.add_argument("--cutoff", type=float, default=6.5, help="real length cutoff R")
    ap.add_argument("--out", required=True, help="output JSON path")
    args = ap.parse_args(argv)

    if args.cutoff <= 0:
        sys.stderr.write("error: cutoff must be positive\n")
        return EXIT_USAGE

    try:
        manifold, version = resolve_manifold(args.census, args.name)
    except RuntimeError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NO_BACKEND
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE

    label = f"census-{args.census}" if args.census is not None else args.name
    try:
        doc = build_document(manifold, args.cutoff, label, backend_version=version)
    except Exception as e:
        sys.stderr.write(f"backend failure: {e}\n")
        return EXIT_BACKEND

    primitives = sum(1 for g in doc["geodesics"] if g["is_primitive"])
    sys.stderr.write(
        f"{label}: volume {doc['volume']:.6f}, {len(doc['geodesics'])} classes "
        f"({primitives} primitive; growth estimate {growth_estimate(args.cutoff):.0f})\n"
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
