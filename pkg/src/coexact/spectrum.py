"""Manifold spectral data: volume plus complex length spectrum.

A manifold document carries the volume, an enumeration cutoff, and a list
of closed-geodesic conjugacy classes (real length, holonomy angle,
multiplicity).  This module validates and normalizes such documents,
expands primitive geodesics into their iterates, and computes the
H-independent coefficient each class contributes to the geometric side of
the trace formula.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import numpy as np

TWO_PI = 2.0 * math.pi

# Relative slack when checking that a length is an integer multiple of its
# primitive length.
ITERATE_RATIO_TOL = 1e-9


class ManifoldFormatError(ValueError):
    """Raised when a manifold document violates the schema or an invariant.

    The message always starts with the path of the offending field
    (e.g. ``geodesics[3].length``).
    """


def normalize_holonomy(theta: float) -> float:
    """Reduce an angle into (-pi, pi].

    Values already inside the interval are returned bit-exactly, which keeps
    parse/serialize round trips stable.
    """
    if -math.pi < theta <= math.pi:
        return theta
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


@dataclass(frozen=True)
class GeodesicClass:
    """One conjugacy class of closed geodesics.

    ``length`` is the real length of the class, ``primitive_length`` the
    length of the underlying primitive geodesic (equal to ``length`` for a
    primitive class), ``holonomy`` the normal-frame rotation angle in
    (-pi, pi], and ``multiplicity`` the number of distinct classes sharing
    this complex length.
    """

    length: float
    holonomy: float
    multiplicity: int = 1
    is_primitive: bool = True
    primitive_length: Optional[float] = None

    def __post_init__(self) -> None:
        if self.primitive_length is None:
            if not self.is_primitive:
                raise ValueError("primitive_length required for a non-primitive class")
            object.__setattr__(self, "primitive_length", self.length)
        self._check()

    def _check(self) -> None:
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be a positive finite real, got {self.length}")
        if not math.isfinite(self.holonomy):
            raise ValueError(f"holonomy must be finite, got {self.holonomy}")
        if not (-math.pi < self.holonomy <= math.pi):
            raise ValueError(f"holonomy {self.holonomy} not normalized into (-pi, pi]")
        if self.multiplicity < 1 or int(self.multiplicity) != self.multiplicity:
            raise ValueError(f"multiplicity must be a positive integer, got {self.multiplicity}")
        pl = self.primitive_length
        assert pl is not None
        if not (math.isfinite(pl) and pl > 0):
            raise ValueError(f"primitive_length must be positive, got {pl}")
        if self.length < pl * (1.0 - ITERATE_RATIO_TOL):
            raise ValueError(f"length {self.length} shorter than primitive_length {pl}")
        ratio = self.length / pl
        if abs(ratio - round(ratio)) > ITERATE_RATIO_TOL * max(1.0, ratio):
            raise ValueError(
                f"length/primitive_length = {ratio} is not within tolerance of an integer"
            )
        if self.is_primitive and round(ratio) != 1:
            raise ValueError(f"class flagged primitive but length = {round(ratio)} * primitive_length")

    @property
    def iterate_index(self) -> int:
        """The n for which length = n * primitive_length."""
        return int(round(self.length / self.primitive_length))


@dataclass(frozen=True)
class ManifoldData:
    """Validated spectral input: volume, cutoff, and geodesic classes.

    Immutable after construction; the derived arrays used by the trace
    formula are cached on first use and shared freely across threads.
    """

    label: str
    volume: float
    cutoff: float
    geodesics: tuple[GeodesicClass, ...]
    orientation_factor: int = 1
    injectivity_radius: Optional[float] = None
    primitives_only: bool = False
    metadata: Optional[dict] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.volume) and self.volume > 0):
            raise ValueError(f"volume must be positive, got {self.volume}")
        if not (math.isfinite(self.cutoff) and self.cutoff > 0):
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if self.orientation_factor not in (1, 2):
            raise ValueError(f"orientation_factor must be 1 or 2, got {self.orientation_factor}")
        prev = 0.0
        for i, g in enumerate(self.geodesics):
            if g.length > self.cutoff * (1.0 + 1e-12):
                raise ValueError(f"geodesics[{i}].length: {g.length} exceeds cutoff {self.cutoff}")
            if g.length < prev:
                raise ValueError(f"geodesics[{i}].length: list not sorted by length")
            prev = g.length
        if self.injectivity_radius is not None:
            if not (math.isfinite(self.injectivity_radius) and self.injectivity_radius > 0):
                raise ValueError(f"injectivity_radius must be positive, got {self.injectivity_radius}")
            if self.geodesics:
                shortest = self.geodesics[0].length
                if shortest < 2.0 * self.injectivity_radius - 1e-6:
                    raise ValueError(
                        f"geodesics[0].length: {shortest} shorter than twice the "
                        f"injectivity radius {self.injectivity_radius}"
                    )

    # -- derived arrays -------------------------------------------------

    def lengths(self) -> np.ndarray:
        """Geodesic lengths as a float64 array (cached)."""
        arr = self._cache.get("lengths")
        if arr is None:
            arr = np.array([g.length for g in self.geodesics], dtype=np.float64)
            self._cache["lengths"] = arr
        return arr

    def weights(self) -> np.ndarray:
        """Trace-formula coefficients of H(length), orientation factor included."""
        arr = self._cache.get("weights")
        if arr is None:
            arr = np.array(
                [geodesic_weight(g, self.orientation_factor) for g in self.geodesics],
                dtype=np.float64,
            )
            self._cache["weights"] = arr
        return arr


def geodesic_weight(g: GeodesicClass, orientation_factor: int = 1) -> float:
    """H-independent coefficient of H(length) for one conjugacy class.

    Computed as

        factor * multiplicity * primitive_length * cos(hol)
            / (exp(l) * (1 - 2 exp(-l) cos(hol) + exp(-2l)))

    which equals the inverse product of |1 - exp(+-(l + i hol))| and stays
    stable for lengths up to ~15 (everything except exp(l) is O(1)).
    """
    ell = g.length
    c = math.cos(g.holonomy)
    em = math.exp(-ell)
    denom = math.exp(ell) * (1.0 - 2.0 * em * c + em * em)
    return orientation_factor * g.multiplicity * g.primitive_length * c / denom


def expand_powers(data: ManifoldData) -> ManifoldData:
    """Expand a primitives-only spectrum into all iterates up to the cutoff.

    Every primitive (l0, theta0, m) yields entries (n*l0, n*theta0 mod 2pi, m)
    for all n >= 1 with n*l0 <= cutoff; each iterate keeps primitive_length l0.
    """
    out: list[GeodesicClass] = []
    for i, g in enumerate(data.geodesics):
        if not g.is_primitive:
            raise ValueError(f"geodesics[{i}]: expand_powers requires a primitives-only spectrum")
        n_max = int(math.floor(data.cutoff / g.length + 1e-12))
        for n in range(1, n_max + 1):
            out.append(
                GeodesicClass(
                    length=n * g.length if n > 1 else g.length,
                    holonomy=normalize_holonomy(n * g.holonomy) if n > 1 else g.holonomy,
                    multiplicity=g.multiplicity,
                    is_primitive=(n == 1),
                    primitive_length=g.length,
                )
            )
    out.sort(key=lambda g: g.length)
    return replace(data, geodesics=tuple(out), primitives_only=False, _cache={})


# -- JSON schema ---------------------------------------------------------

_TOP_FIELDS = {
    "label",
    "volume",
    "cutoff",
    "primitives_only",
    "orientation_factor",
    "injectivity_radius",
    "geodesics",
    "metadata",
}
_GEO_FIELDS = {"length", "holonomy", "multiplicity", "is_primitive", "primitive_length"}


def _require_number(obj: Any, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ManifoldFormatError(f"{path}: expected a number, got {type(obj).__name__}")
    x = float(obj)
    if not math.isfinite(x):
        raise ManifoldFormatError(f"{path}: number must be finite, got {obj!r}")
    return x


def _require_bool(obj: Any, path: str) -> bool:
    if not isinstance(obj, bool):
        raise ManifoldFormatError(f"{path}: expected a boolean, got {type(obj).__name__}")
    return obj


def _require_int(obj: Any, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ManifoldFormatError(f"{path}: expected an integer, got {type(obj).__name__}")
    return obj


def parse_manifold(text: str) -> ManifoldData:
    """Parse and validate a manifold JSON document.

    Holonomies are normalized into (-pi, pi] and the geodesic list is sorted
    by length.  Every schema or invariant violation raises
    :class:`ManifoldFormatError` naming the offending field path.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifoldFormatError(f"document: not valid JSON ({e})") from e
    if not isinstance(doc, dict):
        raise ManifoldFormatError("document: expected a JSON object at top level")
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise ManifoldFormatError(f"document: unknown field(s) {sorted(unknown)}")
    if "volume" not in doc:
        raise ManifoldFormatError("volume: required field missing")
    if "cutoff" not in doc:
        raise ManifoldFormatError("cutoff: required field missing")
    if "geodesics" not in doc:
        raise ManifoldFormatError("geodesics: required field missing")

    volume = _require_number(doc["volume"], "volume")
    if volume <= 0:
        raise ManifoldFormatError(f"volume: must be positive, got {volume}")
    cutoff = _require_number(doc["cutoff"], "cutoff")
    if cutoff <= 0:
        raise ManifoldFormatError(f"cutoff: must be positive, got {cutoff}")

    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ManifoldFormatError("label: expected a string")
    primitives_only = _require_bool(doc.get("primitives_only", False), "primitives_only")
    orientation_factor = _require_int(doc.get("orientation_factor", 1), "orientation_factor")
    if orientation_factor not in (1, 2):
        raise ManifoldFormatError(f"orientation_factor: must be 1 or 2, got {orientation_factor}")
    inj: Optional[float] = None
    if doc.get("injectivity_radius") is not None:
        inj = _require_number(doc["injectivity_radius"], "injectivity_radius")
        if inj <= 0:
            raise ManifoldFormatError(f"injectivity_radius: must be positive, got {inj}")
    metadata = doc.get("metadata")
    if metadata is not None and not isinstance(metadata, dict):
        raise ManifoldFormatError("metadata: expected an object")

    raw = doc["geodesics"]
    if not isinstance(raw, list):
        raise ManifoldFormatError("geodesics: expected an array")
    classes: list[GeodesicClass] = []
    for i, entry in enumerate(raw):
        path = f"geodesics[{i}]"
        if not isinstance(entry, dict):
            raise ManifoldFormatError(f"{path}: expected an object")
        unknown = set(entry) - _GEO_FIELDS
        if unknown:
            raise ManifoldFormatError(f"{path}: unknown field(s) {sorted(unknown)}")
        for req in ("length", "holonomy", "multiplicity", "is_primitive"):
            if req not in entry:
                raise ManifoldFormatError(f"{path}.{req}: required field missing")
        length = _require_number(entry["length"], f"{path}.length")
        if length <= 0:
            raise ManifoldFormatError(f"{path}.length: must be positive, got {length}")
        if length > cutoff * (1.0 + 1e-12):
            raise ManifoldFormatError(f"{path}.length: {length} exceeds cutoff {cutoff}")
        holonomy = normalize_holonomy(_require_number(entry["holonomy"], f"{path}.holonomy"))
        multiplicity = _require_int(entry["multiplicity"], f"{path}.multiplicity")
        if multiplicity < 1:
            raise ManifoldFormatError(f"{path}.multiplicity: must be >= 1, got {multiplicity}")
        is_primitive = _require_bool(entry["is_primitive"], f"{path}.is_primitive")
        primitive_length: Optional[float] = None
        if entry.get("primitive_length") is not None:
            primitive_length = _require_number(entry["primitive_length"], f"{path}.primitive_length")
        elif not is_primitive:
            raise ManifoldFormatError(
                f"{path}.primitive_length: required when is_primitive is false"
            )
        try:
            classes.append(
                GeodesicClass(
                    length=length,
                    holonomy=holonomy,
                    multiplicity=multiplicity,
                    is_primitive=is_primitive,
                    primitive_length=primitive_length,
                )
            )
        except ValueError as e:
            raise ManifoldFormatError(f"{path}: {e}") from e
    classes.sort(key=lambda g: g.length)

    try:
        return ManifoldData(
            label=label,
            volume=volume,
            cutoff=cutoff,
            geodesics=tuple(classes),
            orientation_factor=orientation_factor,
            injectivity_radius=inj,
            primitives_only=primitives_only,
            metadata=metadata,
        )
    except ValueError as e:
        raise ManifoldFormatError(str(e)) from e


def serialize_manifold(data: ManifoldData, indent: Optional[int] = None) -> str:
    """Serialize back to the JSON schema; parse(serialize(d)) == d bit-exactly."""
    doc: dict[str, Any] = {
        "label": data.label,
        "volume": data.volume,
        "cutoff": data.cutoff,
        "primitives_only": data.primitives_only,
        "orientation_factor": data.orientation_factor,
    }
    if data.injectivity_radius is not None:
        doc["injectivity_radius"] = data.injectivity_radius
    if data.metadata is not None:
        doc["metadata"] = data.metadata
    doc["geodesics"] = [
        {
            "length": g.length,
            "holonomy": g.holonomy,
            "multiplicity": g.multiplicity,
            "is_primitive": g.is_primitive,
            "primitive_length": g.primitive_length,
        }
        for g in data.geodesics
    ]
    return json.dumps(doc, indent=indent)


def load_manifold(text: str) -> ManifoldData:
    """Parse a document and expand iterates when it declares primitives_only."""
    data = parse_manifold(text)
    if data.primitives_only:
        data = expand_powers(data)
    return data
