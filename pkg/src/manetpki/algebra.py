"""Modular arithmetic, polynomials over a prime field, and Lagrange interpolation.

Everything here is immutable.  Polynomial coefficients are stored as plain
canonical integers in ``[0, modulus)``; the public accessors hand back
:class:`PrimeFieldElement` values when a caller asks for field elements.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import FieldMismatchError, ParseError, ProtocolError

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def _miller_rabin_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int, rounds: int = 32, rng: random.Random | None = None) -> bool:
    """Miller-Rabin test.

    The fixed small-prime bases make the answer exact below 3.3e24; beyond
    that ``rounds`` extra random bases are drawn from ``rng`` (or from a
    generator seeded with ``n`` so the verdict is reproducible).
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        if not _miller_rabin_round(n, d, s, a):
            return False
    if n < 3_317_044_064_679_887_385_961_981:
        return True
    rng = rng or random.Random(n)
    for _ in range(rounds):
        if not _miller_rabin_round(n, d, s, rng.randrange(2, n - 1)):
            return False
    return True


@lru_cache(maxsize=256)
def _checked_prime(modulus: int) -> bool:
    return is_probable_prime(modulus)


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of ``a`` modulo the odd prime ``p`` (Tonelli-Shanks), or None."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


class PrimeFieldElement:
    """A canonical residue modulo a prime."""

    __slots__ = ("value", "modulus")

    def __init__(self, value: int, modulus: int):
        _require_prime(modulus)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "value", int(value) % modulus)

    def __setattr__(self, name, value):
        raise AttributeError("PrimeFieldElement is immutable")

    def _coerce(self, other) -> int:
        if isinstance(other, PrimeFieldElement):
            if other.modulus != self.modulus:
                raise FieldMismatchError(
                    f"modulus mismatch: {self.modulus} vs {other.modulus}")
            return other.value
        if isinstance(other, int):
            return other % self.modulus
        raise TypeError

    def _new(self, value: int) -> "PrimeFieldElement":
        # skips the primality check; the modulus is already known good
        obj = object.__new__(PrimeFieldElement)
        object.__setattr__(obj, "modulus", self.modulus)
        object.__setattr__(obj, "value", value % self.modulus)
        return obj

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(self.value - o)

    def __rsub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(o - self.value)

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._new(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def inverse(self) -> "PrimeFieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._new(pow(self.value, -1, self.modulus))

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self * self._new(o).inverse()

    def __rtruediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.inverse() * o

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return self._new(pow(self.value, exponent, self.modulus))

    def __eq__(self, other):
        if isinstance(other, PrimeFieldElement):
            return self.modulus == other.modulus and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __int__(self):
        return self.value

    __index__ = __int__

    def __bool__(self):
        return self.value != 0

    def is_square(self) -> bool:
        return self.value == 0 or pow(self.value, (self.modulus - 1) // 2, self.modulus) == 1

    def sqrt(self) -> "PrimeFieldElement | None":
        root = sqrt_mod(self.value, self.modulus)
        return None if root is None else self._new(root)

    def __repr__(self):
        return f"{self.value} (mod {self.modulus})"

    def __str__(self):
        return str(self.value)


class PrimeField:
    """Factory for elements of Z_p: ``Z67 = PrimeField(67); Z67(24)``."""

    def __init__(self, modulus: int):
        if not is_probable_prime(modulus):
            raise ValueError(f"modulus {modulus} is not prime")
        self.modulus = modulus

    def __call__(self, value: int) -> PrimeFieldElement:
        return PrimeFieldElement(value, self.modulus)

    def elements(self):
        return (PrimeFieldElement(v, self.modulus) for v in range(self.modulus))

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.modulus == self.modulus

    def __hash__(self):
        return hash(("PrimeField", self.modulus))

    def __repr__(self):
        return f"PrimeField({self.modulus})"


def _value(x, modulus: int) -> int:
    if isinstance(x, PrimeFieldElement):
        if x.modulus != modulus:
            raise FieldMismatchError(f"modulus mismatch: {x.modulus} vs {modulus}")
        return x.value
    return int(x) % modulus


def _format_terms(coeffs: Sequence[int], var: str) -> str:
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        mono = "" if i == 0 else var if i == 1 else f"{var}^{i}"
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        else:
            terms.append(f"{c}{mono}")
    return " + ".join(terms) if terms else "0"


class UnivariatePolynomial:
    """Polynomial over Z_modulus; ``coeffs[i]`` is the coefficient of x^i."""

    __slots__ = ("coeffs", "modulus")

    def __init__(self, coeffs: Iterable[int | PrimeFieldElement], modulus: int):
        values = [_value(c, modulus) for c in coeffs]
        while values and values[-1] == 0:
            values.pop()
        _require_prime(modulus)
        object.__setattr__(self, "coeffs", tuple(values))
        object.__setattr__(self, "modulus", modulus)

    def __setattr__(self, name, value):
        raise AttributeError("UnivariatePolynomial is immutable")

    @classmethod
    def zero(cls, modulus: int) -> "UnivariatePolynomial":
        return cls((), modulus)

    @classmethod
    def random(cls, degree: int, modulus: int, rng: random.Random,
               constant: int | None = None) -> "UnivariatePolynomial":
        coeffs = [rng.randrange(modulus) for _ in range(degree + 1)]
        if constant is not None:
            coeffs[0] = _value(constant, modulus)
        return cls(coeffs, modulus)

    @property
    def coefficients(self) -> tuple[PrimeFieldElement, ...]:
        return tuple(PrimeFieldElement(c, self.modulus) for c in self.coeffs)

    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, i: int) -> int:
        return self.coeffs[i] if i < len(self.coeffs) else 0

    def __call__(self, x) -> PrimeFieldElement:
        xv = _value(x, self.modulus)
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * xv + c) % self.modulus
        return PrimeFieldElement(acc, self.modulus)

    evaluate = __call__

    def __add__(self, other: "UnivariatePolynomial") -> "UnivariatePolynomial":
        if not isinstance(other, UnivariatePolynomial):
            return NotImplemented
        if other.modulus != self.modulus:
            raise FieldMismatchError("polynomials over different fields")
        n = max(len(self.coeffs), len(other.coeffs))
        return UnivariatePolynomial(
            [self.coefficient(i) + other.coefficient(i) for i in range(n)], self.modulus)

    def __eq__(self, other):
        if not isinstance(other, UnivariatePolynomial):
            return NotImplemented
        return self.modulus == other.modulus and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.coeffs, self.modulus))

    def serialize(self) -> str:
        """Decimal coefficients low-to-high, comma separated; ``0`` for the zero polynomial."""
        return ",".join(str(c) for c in self.coeffs) or "0"

    @classmethod
    def parse(cls, text: str, modulus: int) -> "UnivariatePolynomial":
        try:
            return cls([int(tok) for tok in text.split(",")], modulus)
        except ValueError as exc:
            raise ParseError(f"bad polynomial encoding {text!r}") from exc

    def to_string(self, var: str = "x") -> str:
        return _format_terms(self.coeffs, var)

    def __str__(self):
        return self.to_string("z")

    def __repr__(self):
        return f"UnivariatePolynomial({list(self.coeffs)}, {self.modulus})"


def _require_prime(modulus: int) -> None:
    if modulus < 2 or not _checked_prime(modulus):
        raise ValueError(f"modulus {modulus} is not prime")


class SymmetricBivariatePolynomial:
    """F(x, z) = sum c[i][j] x^i z^j with c symmetric and per-variable degree <= d."""

    __slots__ = ("coeffs", "modulus")

    def __init__(self, coeffs: Sequence[Sequence[int | PrimeFieldElement]], modulus: int):
        _require_prime(modulus)
        rows = tuple(tuple(_value(c, modulus) for c in row) for row in coeffs)
        size = len(rows)
        if size == 0 or any(len(row) != size for row in rows):
            raise ValueError("coefficient table must be a non-empty square matrix")
        for i in range(size):
            for j in range(i + 1, size):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"coefficients not symmetric at ({i}, {j})")
        object.__setattr__(self, "coeffs", rows)
        object.__setattr__(self, "modulus", modulus)

    def __setattr__(self, name, value):
        raise AttributeError("SymmetricBivariatePolynomial is immutable")

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], int], modulus: int,
                   degree: int | None = None) -> "SymmetricBivariatePolynomial":
        """Build from ``{(i, j): c}`` meaning c x^i z^j; the mirror term is implied.

        Listing both (i, j) and (j, i) is allowed only when they agree.
        """
        d = max(max(i, j) for i, j in terms) if terms else 0
        if degree is not None:
            if degree < d:
                raise ValueError("terms exceed the requested degree")
            d = degree
        table = [[None] * (d + 1) for _ in range(d + 1)]
        for (i, j), c in terms.items():
            c = _value(c, modulus)
            for a, b in ((i, j), (j, i)):
                if table[a][b] is not None and table[a][b] != c:
                    raise ValueError(f"conflicting coefficients for x^{i} z^{j}")
                table[a][b] = c
        return cls([[c or 0 for c in row] for row in table], modulus)

    @classmethod
    def random(cls, degree: int, modulus: int, rng: random.Random) -> "SymmetricBivariatePolynomial":
        table = [[0] * (degree + 1) for _ in range(degree + 1)]
        for i in range(degree + 1):
            for j in range(i, degree + 1):
                table[i][j] = table[j][i] = rng.randrange(modulus)
        return cls(table, modulus)

    @classmethod
    def zero(cls, degree: int, modulus: int) -> "SymmetricBivariatePolynomial":
        return cls([[0] * (degree + 1) for _ in range(degree + 1)], modulus)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def constant_term(self) -> PrimeFieldElement:
        return PrimeFieldElement(self.coeffs[0][0], self.modulus)

    def __call__(self, a, b) -> PrimeFieldElement:
        return self.row(a)(b)

    evaluate = __call__

    def row(self, x0) -> UnivariatePolynomial:
        """The univariate polynomial z -> F(x0, z)."""
        xv = _value(x0, self.modulus)
        p = self.modulus
        powers = [pow(xv, i, p) for i in range(self.degree + 1)]
        return UnivariatePolynomial(
            [sum(powers[i] * self.coeffs[i][j] for i in range(self.degree + 1)) % p
             for j in range(self.degree + 1)], p)

    def __add__(self, other: "SymmetricBivariatePolynomial") -> "SymmetricBivariatePolynomial":
        if not isinstance(other, SymmetricBivariatePolynomial):
            return NotImplemented
        if other.modulus != self.modulus:
            raise FieldMismatchError("polynomials over different fields")
        d = max(self.degree, other.degree)

        def c(poly, i, j):
            return poly.coeffs[i][j] if i <= poly.degree and j <= poly.degree else 0

        return SymmetricBivariatePolynomial(
            [[c(self, i, j) + c(other, i, j) for j in range(d + 1)] for i in range(d + 1)],
            self.modulus)

    def __eq__(self, other):
        if not isinstance(other, SymmetricBivariatePolynomial):
            return NotImplemented
        return self.modulus == other.modulus and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.coeffs, self.modulus))

    def serialize(self) -> str:
        """Rows separated by ``/``, each row low-to-high in z: row i holds x^i."""
        return "/".join(",".join(str(c) for c in row) for row in self.coeffs)

    @classmethod
    def parse(cls, text: str, modulus: int) -> "SymmetricBivariatePolynomial":
        try:
            rows = [[int(tok) for tok in row.replace(",", " ").split()]
                    for row in text.split("/")]
            return cls(rows, modulus)
        except ValueError as exc:
            raise ParseError(f"bad bivariate polynomial {text!r}: {exc}") from exc

    def __str__(self):
        terms = []
        d = self.degree
        for i in range(d, -1, -1):
            for j in range(d, -1, -1):
                c = self.coeffs[i][j]
                if not c:
                    continue
                mono = "".join(v if e == 1 else f"{v}^{e}" for v, e in (("x", i), ("z", j)) if e)
                terms.append(f"{c if c != 1 or not mono else ''}{mono}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"SymmetricBivariatePolynomial({[list(r) for r in self.coeffs]}, {self.modulus})"


@dataclass(frozen=True)
class SharePoint:
    x: PrimeFieldElement
    y: PrimeFieldElement

    def __post_init__(self):
        if self.x.modulus != self.y.modulus:
            raise FieldMismatchError("share coordinates in different fields")

    @classmethod
    def of(cls, x: int, y: int, modulus: int) -> "SharePoint":
        return cls(PrimeFieldElement(x, modulus), PrimeFieldElement(y, modulus))

    @property
    def modulus(self) -> int:
        return self.x.modulus


def poly_eval(p: UnivariatePolynomial, x) -> PrimeFieldElement:
    return p(x)


def bivariate_eval_row(f: SymmetricBivariatePolynomial, x0) -> UnivariatePolynomial:
    return f.row(x0)


def _check_points(points: Sequence[SharePoint]) -> int:
    if not points:
        raise ProtocolError("interpolation needs at least one point")
    modulus = points[0].modulus
    seen = set()
    for pt in points:
        if pt.modulus != modulus:
            raise FieldMismatchError("share points over different fields")
        if pt.x.value in seen:
            raise ProtocolError(f"duplicate interpolation abscissa {pt.x.value}")
        seen.add(pt.x.value)
    return modulus


def lagrange_coefficient(xs: Sequence[int], i: int, x0: int, modulus: int) -> int:
    """Weight of the i-th sample when evaluating the interpolant at ``x0``."""
    num, den = 1, 1
    xi = xs[i]
    for j, xj in enumerate(xs):
        if j != i:
            num = num * (x0 - xj) % modulus
            den = den * (xi - xj) % modulus
    return num * pow(den, -1, modulus) % modulus


def lagrange_interpolate_at(points: Sequence[SharePoint], x0) -> PrimeFieldElement:
    modulus = _check_points(points)
    xs = [pt.x.value for pt in points]
    x0v = _value(x0, modulus)
    acc = 0
    for i, pt in enumerate(points):
        acc += lagrange_coefficient(xs, i, x0v, modulus) * pt.y.value
    return PrimeFieldElement(acc, modulus)


def lagrange_interpolate_poly(points: Sequence[SharePoint]) -> UnivariatePolynomial:
    modulus = _check_points(points)
    xs = [pt.x.value for pt in points]
    total = [0] * len(points)
    for i, pt in enumerate(points):
        # basis numerator prod_{j != i} (x - x_j), built low-to-high
        basis = [1]
        den = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            nxt = [0] * (len(basis) + 1)
            for k, c in enumerate(basis):
                nxt[k] = (nxt[k] - c * xj) % modulus
                nxt[k + 1] = (nxt[k + 1] + c) % modulus
            basis = nxt
            den = den * (xs[i] - xj) % modulus
        scale = pt.y.value * pow(den, -1, modulus) % modulus
        for k, c in enumerate(basis):
            total[k] = (total[k] + c * scale) % modulus
    return UnivariatePolynomial(total, modulus)


def deal_univariate_shares(secret: PrimeFieldElement, t: int, n: int, rng: random.Random
                           ) -> tuple[UnivariatePolynomial, list[SharePoint]]:
    """Dealer-based (t, n) Shamir sharing with shares at x = 1..n."""
    modulus = secret.modulus
    if t < 1:
        raise ProtocolError("threshold must be at least 1")
    if t > n:
        raise ProtocolError(f"threshold {t} exceeds share count {n}")
    if n >= modulus:
        raise ProtocolError(f"need n < {modulus} distinct nonzero abscissae")
    poly = UnivariatePolynomial.random(t - 1, modulus, rng, constant=secret.value)
    shares = [SharePoint(PrimeFieldElement(x, modulus), poly(x)) for x in range(1, n + 1)]
    return poly, shares
