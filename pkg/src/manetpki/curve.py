"""The supersingular curve y^2 = x^3 + 1 over F_p and F_p^2, and its pairing.

With p = 2 (mod 3) the curve has p + 1 points over F_p and embedding degree 2
for any prime r dividing p + 1.  The distortion map (x, y) -> (zeta x, y),
zeta a primitive cube root of unity in F_p^2, sends the order-r subgroup of
E(F_p) to an independent subgroup, which makes the symmetric pairing
``pairing(S, T) = tate(S, distortion(T))`` non-degenerate.

The generator in the shipped parameter set generates all of E(F_p) (order
p + 1), not just the order-r part.  Both pairing arguments are therefore
projected onto the order-r component first; on order-r inputs the
projection is the identity, and in general it keeps the map bilinear on the
whole of E(F_p).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

from .algebra import PrimeFieldElement, is_probable_prime, sqrt_mod
from .errors import FieldMismatchError, ParameterError, ParseError


class ExtFieldElement:
    """u*a + v in F_p[a] / (a^2 - nonresidue)."""

    __slots__ = ("u", "v", "p", "nonresidue")

    def __init__(self, u: int, v: int, p: int, nonresidue: int):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "nonresidue", nonresidue % p)
        object.__setattr__(self, "u", int(u) % p)
        object.__setattr__(self, "v", int(v) % p)

    def __setattr__(self, name, value):
        raise AttributeError("ExtFieldElement is immutable")

    def _new(self, u: int, v: int) -> "ExtFieldElement":
        return ExtFieldElement(u, v, self.p, self.nonresidue)

    def one(self) -> "ExtFieldElement":
        return self._new(0, 1)

    def _coerce(self, other) -> tuple[int, int]:
        if isinstance(other, ExtFieldElement):
            if other.p != self.p or other.nonresidue != self.nonresidue:
                raise FieldMismatchError("extension elements over different fields")
            return other.u, other.v
        if isinstance(other, PrimeFieldElement):
            if other.modulus != self.p:
                raise FieldMismatchError(f"modulus mismatch: {other.modulus} vs {self.p}")
            return 0, other.value
        if isinstance(other, int):
            return 0, other % self.p
        raise TypeError

    def __add__(self, other):
        try:
            ou, ov = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(self.u + ou, self.v + ov)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            ou, ov = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(self.u - ou, self.v - ov)

    def __rsub__(self, other):
        try:
            ou, ov = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(ou - self.u, ov - self.v)

    def __mul__(self, other):
        try:
            ou, ov = self._coerce(other)
        except TypeError:
            return NotImplemented
        p = self.p
        # (u a + v)(u' a + v') = (u v' + v u') a + (v v' + nr u u')
        return self._new((self.u * ov + self.v * ou) % p,
                         (self.v * ov + self.nonresidue * self.u * ou) % p)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.u, -self.v)

    def conjugate(self) -> "ExtFieldElement":
        return self._new(-self.u, self.v)

    def norm(self) -> int:
        return (self.v * self.v - self.nonresidue * self.u * self.u) % self.p

    def inverse(self) -> "ExtFieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        inv = pow(n, -1, self.p)
        return self._new(-self.u * inv, self.v * inv)

    def __truediv__(self, other):
        try:
            ou, ov = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self * self._new(ou, ov).inverse()

    def __rtruediv__(self, other):
        try:
            ou, ov = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(ou, ov) * self.inverse()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = self.one(), self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, ExtFieldElement):
            return (self.p, self.nonresidue, self.u, self.v) == (
                other.p, other.nonresidue, other.u, other.v)
        if isinstance(other, PrimeFieldElement):
            return other.modulus == self.p and self.u == 0 and self.v == other.value
        if isinstance(other, int):
            return self.u == 0 and self.v == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.u, self.v, self.p, self.nonresidue))

    def __bool__(self):
        return bool(self.u or self.v)

    def is_base(self) -> bool:
        return self.u == 0

    def sqrt(self) -> "ExtFieldElement | None":
        """A square root in F_p^2, or None when the element is a non-square."""
        p, c = self.p, self.nonresidue
        if not self:
            return self
        if self.u == 0:
            r = sqrt_mod(self.v, p)
            if r is not None:
                return self._new(0, r)
            # v = c * w^2 for some w, so sqrt(v) = w * a
            r = sqrt_mod(self.v * pow(c, -1, p), p)
            return None if r is None else self._new(r, 0)
        n = sqrt_mod(self.norm(), p)
        if n is None:
            return None
        half = pow(2, -1, p)
        for sign in (1, -1):
            x = sqrt_mod((self.v + sign * n) * half, p)
            if x:
                y = self.u * pow(2 * x, -1, p) % p
                cand = self._new(y, x)
                if cand * cand == self:
                    return cand
        return None

    def __repr__(self):
        return f"{self.u}*a + {self.v}"

    __str__ = __repr__


Coordinate = Union[PrimeFieldElement, ExtFieldElement]


def _same_field(a: Coordinate, b: Coordinate) -> bool:
    if isinstance(a, PrimeFieldElement) and isinstance(b, PrimeFieldElement):
        return a.modulus == b.modulus
    if isinstance(a, ExtFieldElement) and isinstance(b, ExtFieldElement):
        return a.p == b.p and a.nonresidue == b.nonresidue
    return False


@dataclass(frozen=True, eq=False)
class CurvePoint:
    """Affine point on y^2 = x^3 + 1, or the point at infinity (x is None)."""

    x: Coordinate | None = None
    y: Coordinate | None = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("both coordinates or neither")
        if self.x is None:
            return
        if not _same_field(self.x, self.y):
            raise FieldMismatchError("point coordinates in different fields")
        if self.y * self.y != self.x * self.x * self.x + 1:
            raise ValueError(f"({self.x}, {self.y}) is not on y^2 = x^3 + 1")

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def is_base(self) -> bool:
        return self.x is None or isinstance(self.x, PrimeFieldElement)

    def __eq__(self, other):
        if not isinstance(other, CurvePoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return _same_field(self.x, other.x) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash(None) if self.is_infinity else hash((self.x, self.y))

    def __neg__(self):
        return self if self.is_infinity else CurvePoint(self.x, -self.y)

    def __add__(self, other):
        return point_add(self, other)

    def __sub__(self, other):
        return point_add(self, -other)

    def __rmul__(self, k: int):
        return point_mul(k, self)

    def coords(self) -> tuple[int, int] | None:
        """Integer coordinates of a base-field point, None for infinity."""
        if self.is_infinity:
            return None
        if not isinstance(self.x, PrimeFieldElement):
            raise TypeError("coords() is only defined for base-field points")
        return self.x.value, self.y.value

    def serialize(self) -> str:
        c = self.coords()
        return "inf" if c is None else f"{c[0]},{c[1]}"

    def __repr__(self):
        return "CurvePoint(inf)" if self.is_infinity else f"CurvePoint({self.x}, {self.y})"


INFINITY = CurvePoint()


def point_add(a: CurvePoint, b: CurvePoint) -> CurvePoint:
    if a.is_infinity:
        return b
    if b.is_infinity:
        return a
    if not _same_field(a.x, b.x):
        raise FieldMismatchError("points over different coordinate fields")
    if a.x == b.x:
        if a.y == -b.y:
            return INFINITY
        lam = (3 * a.x * a.x) / (2 * a.y)
    else:
        lam = (b.y - a.y) / (b.x - a.x)
    x3 = lam * lam - a.x - b.x
    return CurvePoint(x3, lam * (a.x - x3) - a.y)


def point_mul(k: int, a: CurvePoint) -> CurvePoint:
    """k-fold sum by double-and-add; negative k multiplies -a."""
    k = int(k)
    if k < 0:
        k, a = -k, -a
    result, addend = INFINITY, a
    while k:
        if k & 1:
            result = point_add(result, addend)
        addend = point_add(addend, addend)
        k >>= 1
    return result


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class CurveParams:
    """Parameters of E: y^2 = x^3 + 1 over F_p with a distinguished prime r | p + 1.

    The generator must have a nontrivial order-r component; it need not lie in
    the order-r subgroup itself (the shipped generator has order p + 1).
    """

    p: int
    r: int
    cofactor: int
    gx: int
    gy: int
    nonresidue: int = -1
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nonresidue", self.nonresidue % self.p)
        p, r = self.p, self.r
        if not is_probable_prime(p) or p < 5:
            raise ParameterError(f"p = {p} is not an odd prime >= 5")
        if p % 3 != 2:
            raise ParameterError(f"p = {p} is not 2 mod 3; y^2 = x^3 + 1 is not supersingular")
        if not is_probable_prime(r):
            raise ParameterError(f"r = {r} is not prime")
        if self.cofactor * r != p + 1:
            raise ParameterError(f"cofactor * r = {self.cofactor * r} but #E(F_p) = {p + 1}")
        if (p - 1) % r == 0:
            raise ParameterError(f"r = {r} divides p - 1; embedding degree is not 2")
        if self.cofactor % r == 0:
            raise ParameterError("r^2 divides #E(F_p); the order-r part is not cyclic")
        nr = self.nonresidue
        if pow(nr, (p - 1) // 2, p) != p - 1:
            raise ParameterError(f"{nr} is a square mod {p}; cannot define F_p^2")
        try:
            g = self.generator
        except ValueError as exc:
            raise ParameterError(f"generator: {exc}") from exc
        if self.project(g).is_infinity:
            raise ParameterError("generator has no order-r component")

    def base(self, v: int) -> PrimeFieldElement:
        return PrimeFieldElement(v, self.p)

    def ext(self, u: int, v: int) -> ExtFieldElement:
        return ExtFieldElement(u, v, self.p, self.nonresidue)

    def point(self, x: int, y: int) -> CurvePoint:
        return CurvePoint(self.base(x), self.base(y))

    @cached_property
    def generator(self) -> CurvePoint:
        return self.point(self.gx, self.gy)

    @cached_property
    def generator_order(self) -> int:
        order = self.p + 1
        for q in _factor(order):
            while order % q == 0 and point_mul(order // q, self.generator).is_infinity:
                order //= q
        return order

    @property
    def generator_in_subgroup(self) -> bool:
        return self.generator_order == self.r

    @cached_property
    def projector(self) -> int:
        """Scalar m with m = 1 (mod r) and m = 0 (mod cofactor)."""
        h = self.cofactor
        return h * pow(h, -1, self.r) % (self.p + 1)

    def project(self, a: CurvePoint) -> CurvePoint:
        """The order-r component of a point of E(F_p)."""
        return point_mul(self.projector, a)

    def in_subgroup(self, a: CurvePoint) -> bool:
        return a.is_base() and point_mul(self.r, a).is_infinity

    def in_generated_group(self, a: CurvePoint) -> bool:
        return a.is_base() and point_mul(self.generator_order, a).is_infinity

    @cached_property
    def zeta(self) -> ExtFieldElement:
        """Primitive cube root of unity: a root of z^2 + z + 1 in F_p^2."""
        disc = self.ext(0, -3).sqrt()
        if disc is None:
            raise ParameterError("-3 has no square root in F_p^2")
        half = pow(2, -1, self.p)
        roots = [(self.ext(0, -1) + s * disc) * half for s in (1, -1)]
        return min(roots, key=lambda z: (z.u, z.v))

    def lift(self, a: CurvePoint) -> CurvePoint:
        """Embed a base-field point into E(F_p^2)."""
        if a.is_infinity or not a.is_base():
            return a
        return CurvePoint(self.ext(0, a.x.value), self.ext(0, a.y.value))

    def serialize(self) -> str:
        lines = [f"# y^2 = x^3 + 1 over F_p{'; ' + self.name if self.name else ''}",
                 f"p = {self.p}", f"r = {self.r}", f"cofactor = {self.cofactor}",
                 f"generator = {self.gx} {self.gy}", f"nonresidue = {self.nonresidue}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, source=None) -> "CurveParams":
        values: dict[str, list[int]] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, rest = line.partition("=")
            key = key.strip()
            if not sep or key not in ("p", "r", "cofactor", "generator", "nonresidue"):
                raise ParseError(f"unrecognised line {raw!r}", lineno, source)
            try:
                values[key] = [int(tok) for tok in rest.replace(",", " ").split()]
            except ValueError:
                raise ParseError(f"non-integer value in {raw!r}", lineno, source) from None
            want = 2 if key == "generator" else 1
            if len(values[key]) != want:
                raise ParseError(f"{key} expects {want} integer(s)", lineno, source)
        missing = {"p", "r", "generator"} - values.keys()
        if missing:
            raise ParseError(f"missing {', '.join(sorted(missing))}", None, source)
        p, r = values["p"][0], values["r"][0]
        cofactor = values.get("cofactor", [(p + 1) // r])[0]
        gx, gy = values["generator"]
        return cls(p, r, cofactor, gx, gy, values.get("nonresidue", [-1])[0],
                   name=str(source or ""))


def load_params(path) -> CurveParams:
    path = Path(path)
    return CurveParams.parse(path.read_text(), source=path.name)


def default_params() -> CurveParams:
    """E(F_4019), r = 67, generator (3198, 578)."""
    from .resources import data_path
    return load_params(data_path("e4019.params"))


def subgroup_clear(a: CurvePoint, params: CurveParams) -> CurvePoint:
    """Multiply by the cofactor so the result has order dividing r."""
    return point_mul(params.cofactor, a)


def distortion(a: CurvePoint, params: CurveParams) -> CurvePoint:
    if a.is_infinity:
        return a
    if not a.is_base():
        raise FieldMismatchError("distortion expects a point of E(F_p)")
    return CurvePoint(params.zeta * a.x.value, params.ext(0, a.y.value))


def _line(t: CurvePoint, u: CurvePoint, q: CurvePoint):
    """The line through t and u (tangent if equal) evaluated at q, divided by
    the vertical line through t + u.  Returns (value, t + u)."""
    s = point_add(t, u)
    if t.x == u.x and t.y == -u.y:
        return q.x - t.x, s
    if t == u:
        lam = (3 * t.x * t.x) / (2 * t.y)
    else:
        lam = (u.y - t.y) / (u.x - t.x)
    num = q.y - t.y - lam * (q.x - t.x)
    if s.is_infinity:
        return num, s
    return num / (q.x - s.x), s


def miller_loop(n: int, s: CurvePoint, q: CurvePoint):
    """f_{n,s}(q) by double-and-add, normalised so the leading coefficient is 1.

    ``s`` is lifted to q's coordinate field when needed.  Raises
    ZeroDivisionError if q hits the support of the Miller function.
    """
    one = q.x * 0 + 1
    if isinstance(q.x, ExtFieldElement) and s.is_base() and not s.is_infinity:
        p, nr = q.x.p, q.x.nonresidue
        s = CurvePoint(ExtFieldElement(0, s.x.value, p, nr), ExtFieldElement(0, s.y.value, p, nr))
    f, t = one, s
    for bit in bin(n)[3:]:
        val, t = _line(t, t, q)
        f = f * f * val
        if bit == "1":
            val, t = _line(t, s, q)
            f = f * val
    if not f:
        raise ZeroDivisionError("degenerate Miller evaluation")
    return f


def tate_pairing(s: CurvePoint, t: CurvePoint, params: CurveParams) -> ExtFieldElement:
    """Reduced Tate pairing of order-r base points with distortion applied to t."""
    one = params.ext(0, 1)
    if s.is_infinity or t.is_infinity:
        return one
    q = distortion(t, params)
    f = miller_loop(params.r, s, q)
    return f ** ((params.p * params.p - 1) // params.r)


def weil_pairing(s: CurvePoint, t: CurvePoint, params: CurveParams) -> ExtFieldElement:
    """Weil pairing e_r(s, distortion(t)) as a ratio of two Miller functions."""
    one = params.ext(0, 1)
    if s.is_infinity or t.is_infinity:
        return one
    q = distortion(t, params)
    num = miller_loop(params.r, s, q)
    den = miller_loop(params.r, q, params.lift(s))
    sign = -1 if params.r % 2 else 1
    return (num / den) * sign


PairingBackend = Callable[[CurvePoint, CurvePoint, CurveParams], ExtFieldElement]
PAIRING_BACKENDS: dict[str, PairingBackend] = {"tate": tate_pairing, "weil": weil_pairing}


def pairing(s: CurvePoint, t: CurvePoint, params: CurveParams, backend: str = "tate"
            ) -> ExtFieldElement:
    """Symmetric bilinear map E(F_p) x E(F_p) -> mu_r in F_p^2.

    Both arguments are reduced to their order-r components before the
    backend runs, so points of any order in E(F_p) are accepted.
    """
    for pt in (s, t):
        if not pt.is_base():
            raise FieldMismatchError("pairing arguments must be points of E(F_p)")
        if not pt.is_infinity and pt.x.modulus != params.p:
            raise FieldMismatchError("point is not over this curve's field")
    try:
        fn = PAIRING_BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown pairing backend {backend!r}") from None
    return fn(params.project(s), params.project(t), params)


def quadratic_roots(params: CurveParams, b: int, c: int) -> list[ExtFieldElement]:
    """Roots in F_p^2 of the irreducible polynomial x^2 + b x + c."""
    p = params.p
    disc = (b * b - 4 * c) % p
    if pow(disc, (p - 1) // 2, p) != p - 1:
        raise ParameterError(f"x^2 + {b}x + {c} is not irreducible over F_{p}")
    s = params.ext(0, disc).sqrt()
    half = pow(2, -1, p)
    return [(params.ext(0, -b) + sign * s) * half for sign in (1, -1)]


def express_in_basis(x: ExtFieldElement, alpha: ExtFieldElement) -> tuple[int, int]:
    """(u, v) with x = u * alpha + v, for alpha outside F_p."""
    if alpha.u == 0:
        raise ValueError("alpha must not lie in the base field")
    p = x.p
    u = x.u * pow(alpha.u, -1, p) % p
    return u, (x.v - u * alpha.v) % p


def conway_basis(params: CurveParams, b: int, c: int) -> ExtFieldElement:
    """The root alpha of x^2 + b x + c in which zeta reads as ``u alpha + v``
    with the larger ``u`` of the two embeddings; fixes the embedding used when
    printing pairing values in that basis."""
    roots = quadratic_roots(params, b, c)
    return max(roots, key=lambda a: express_in_basis(params.zeta, a))
