"""Hash-to-range (node identities) and hash-to-point (message hashing).

A :class:`HashOracle` is either *computed* (SHA-256 based, deterministic) or
*fixture* backed (a fixed table, so worked examples with unspecified hash
outputs can be replayed exactly).  The two modes never mix: a fixture oracle
refuses inputs it has no entry for.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Mapping

from .algebra import PrimeFieldElement, sqrt_mod
from .curve import INFINITY, CurveParams, CurvePoint, point_mul, subgroup_clear
from .errors import FixtureError, ParseError

COMPUTED = "computed"
FIXTURE = "fixture"


def _as_bytes(data: bytes | str) -> bytes:
    return data.encode("utf-8") if isinstance(data, str) else bytes(data)


def digest_to_range(data: bytes | str, r: int) -> PrimeFieldElement:
    if r < 2:
        raise ValueError("range modulus must be at least 2")
    h = hashlib.sha256(b"HTR" + _as_bytes(data)).digest()
    return PrimeFieldElement(int.from_bytes(h, "big"), r)


def try_and_increment(message: bytes | str, params: CurveParams) -> CurvePoint:
    """Hash to E(F_p), then clear the cofactor.

    x candidates come from SHA-256(message || counter); the smaller of the two
    square roots is taken for y.  Candidates that land on the identity after
    cofactor clearing are skipped as well.
    """
    msg = _as_bytes(message)
    p = params.p
    counter = 0
    while True:
        h = hashlib.sha256(b"HTP" + msg + counter.to_bytes(4, "big")).digest()
        counter += 1
        x = int.from_bytes(h, "big") % p
        y = sqrt_mod(x * x * x + 1, p)
        if y is None:
            continue
        y = min(y, p - y)
        pt = subgroup_clear(params.point(x, y), params)
        if not pt.is_infinity:
            return pt


class HashOracle:
    def __init__(self, mode: str = COMPUTED, ranges: Mapping[str, int] | None = None,
                 points: Mapping[str, CurvePoint] | None = None, source: str | None = None):
        if mode not in (COMPUTED, FIXTURE):
            raise ValueError(f"unknown hash mode {mode!r}")
        if mode == COMPUTED and (ranges or points):
            raise ValueError("a computed oracle carries no fixtures")
        self.mode = mode
        self.source = source
        self._ranges = dict(ranges or {})
        self._points = dict(points or {})

    @classmethod
    def computed(cls) -> "HashOracle":
        return cls(COMPUTED)

    @classmethod
    def fixture(cls, ranges=None, points=None, source=None) -> "HashOracle":
        return cls(FIXTURE, ranges, points, source)

    @property
    def ranges(self) -> dict[str, int]:
        return dict(self._ranges)

    @property
    def points(self) -> dict[str, CurvePoint]:
        return dict(self._points)

    def hash_to_range(self, data: bytes | str, r: int) -> PrimeFieldElement:
        if self.mode == COMPUTED:
            return digest_to_range(data, r)
        key = _as_bytes(data).decode("utf-8")
        try:
            value = self._ranges[key]
        except KeyError:
            raise FixtureError(f"no range fixture for {key!r}") from None
        if not 0 <= value < r:
            raise FixtureError(f"range fixture {key!r} = {value} is outside [0, {r})")
        return PrimeFieldElement(value, r)

    def hash_to_point(self, message: bytes | str, params: CurveParams) -> CurvePoint:
        if self.mode == COMPUTED:
            return try_and_increment(message, params)
        key = _as_bytes(message).decode("utf-8")
        try:
            pt = self._points[key]
        except KeyError:
            raise FixtureError(f"no point fixture for {key!r}") from None
        if pt.is_infinity or pt.x.modulus != params.p:
            raise FixtureError(f"point fixture {key!r} does not belong to this curve")
        return pt

    def __repr__(self):
        if self.mode == COMPUTED:
            return "HashOracle(computed)"
        return f"HashOracle(fixture, {len(self._ranges)} ranges, {len(self._points)} points)"


def hash_to_range(data: bytes | str, r: int, oracle: HashOracle | None = None) -> PrimeFieldElement:
    return (oracle or HashOracle.computed()).hash_to_range(data, r)


def hash_to_point(message: bytes | str, params: CurveParams,
                  oracle: HashOracle | None = None) -> CurvePoint:
    return (oracle or HashOracle.computed()).hash_to_point(message, params)


def parse_fixtures(text: str, params: CurveParams, source=None) -> HashOracle:
    """Parse ``input<TAB>kind<TAB>value`` lines; kind is ``range`` or ``point``.

    Points are written ``x,y``.  Every point is checked for curve membership
    and order r here, so a bad table fails at load rather than mid-protocol.
    """
    ranges: dict[str, int] = {}
    points: dict[str, CurvePoint] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.rstrip("\r\n").split("\t")
        if len(parts) != 3:
            raise FixtureError(str(ParseError("expected input<TAB>kind<TAB>value", lineno, source)))
        key, kind, value = parts[0], parts[1].strip(), parts[2].strip()
        if key in ranges or key in points:
            raise FixtureError(str(ParseError(f"duplicate fixture {key!r}", lineno, source)))
        try:
            if kind == "range":
                ranges[key] = int(value)
                if ranges[key] < 0:
                    raise ValueError("negative range value")
            elif kind == "point":
                x, y = (int(tok) for tok in value.split(","))
                pt = params.point(x, y)
                if not point_mul(params.r, pt).is_infinity or pt == INFINITY:
                    raise ValueError(f"({x},{y}) does not have order {params.r}")
                points[key] = pt
            else:
                raise ValueError(f"unknown kind {kind!r}")
        except ValueError as exc:
            raise FixtureError(str(ParseError(str(exc), lineno, source))) from None
    return HashOracle.fixture(ranges, points, source=str(source) if source else None)


def load_fixtures(path, params: CurveParams) -> HashOracle:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FixtureError(f"cannot read fixture file {path}: {exc.strerror}") from None
    return parse_fixtures(text, params, source=path.name)


def default_fixtures(params: CurveParams | None = None) -> HashOracle:
    from .curve import default_params
    from .resources import data_path
    return load_fixtures(data_path("e4019.fixtures"), params or default_params())
