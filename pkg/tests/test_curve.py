import random

import pytest
from hypothesis import given, settings, strategies as st

from manetpki.curve import (INFINITY, PAIRING_BACKENDS, CurveParams, CurvePoint, ExtFieldElement,
                            conway_basis, distortion, express_in_basis, miller_loop, pairing,
                            point_add, point_mul, quadratic_roots)
from manetpki.curve import default_params
from manetpki.errors import FieldMismatchError, ParameterError, ParseError

P_ = 4019
R = 67


def all_affine_points(p):
    """Direct enumeration of E(F_p) without the library's square-root code."""
    squares = {}
    for y in range(p):
        squares.setdefault(y * y % p, []).append(y)
    return [(x, y) for x in range(p) for y in squares.get((x ** 3 + 1) % p, [])]


POINTS = all_affine_points(P_)
PARAMS = default_params()


def naive_add(a, b, p=P_):
    """Textbook affine chord-and-tangent on tuples; None is the identity."""
    if a is None:
        return b
    if b is None:
        return a
    (x1, y1), (x2, y2) = a, b
    if x1 == x2 and (y1 + y2) % p == 0:
        return None
    if a == b:
        lam = 3 * x1 * x1 * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def naive_mul(k, a):
    out = None
    for _ in range(k):
        out = naive_add(out, a)
    return out


def naive_order(a):
    k, q = 1, a
    while q is not None:
        q = naive_add(q, a)
        k += 1
    return k


point_indices = st.integers(0, len(POINTS) - 1)


class TestGroup:
    def test_point_count(self):
        assert len(POINTS) + 1 == 4020

    def test_generator_order(self, params):
        assert naive_order((3198, 578)) == 4020
        assert params.generator_order == 4020
        assert not params.generator_in_subgroup

    def test_hash_point_order(self):
        assert naive_order((163, 1362)) == 67

    def test_public_key(self, params):
        assert point_mul(24, params.generator).coords() == (2651, 2267)
        assert naive_mul(24, (3198, 578)) == (2651, 2267)

    @pytest.mark.parametrize("k,expected", [(5, (152, 1437)), (9, (409, 2266)),
                                            (6, (3063, 3143)), (4, (3863, 2497))])
    def test_commitments(self, params, k, expected):
        assert point_mul(k, params.generator).coords() == expected

    def test_signature_is_24_hm(self, params):
        assert point_mul(24, params.point(163, 1362)).coords() == (2350, 3239)

    @given(point_indices, point_indices)
    def test_addition_matches_naive(self, i, j):
        a, b = POINTS[i], POINTS[j]
        got = point_add(PARAMS.point(*a), PARAMS.point(*b))
        assert got.coords() == naive_add(a, b)

    @given(point_indices, st.integers(-200, 200))
    def test_scalar_mul_matches_naive(self, i, k):
        a = PARAMS.point(*POINTS[i])
        expected = naive_mul(abs(k), POINTS[i])
        got = point_mul(k, a)
        assert (got if k >= 0 else -got).coords() == expected

    def test_scalars_not_reduced_mod_r(self, params):
        g = params.generator
        assert not point_mul(67, g).is_infinity
        assert point_mul(4020 + 7, g) == point_mul(7, g)

    def test_off_curve_rejected(self, params):
        with pytest.raises(ValueError):
            params.point(1, 1)

    def test_identity(self, params):
        g = params.generator
        assert g + INFINITY == g and g - g == INFINITY
        assert INFINITY.serialize() == "inf" and g.serialize() == "3198,578"

    def test_projection(self, params):
        proj = params.project(params.generator)
        assert params.in_subgroup(proj) and not proj.is_infinity
        hm = params.point(163, 1362)
        assert params.project(hm) == hm


class TestExtensionField:
    def ext(self, u, v):
        return ExtFieldElement(u, v, P_, -1)

    coords = st.integers(0, P_ - 1)

    @given(coords, coords, coords, coords)
    def test_multiplication_is_polynomial_product(self, a, b, c, d):
        # (a i + b)(c i + d) with i^2 = -1
        got = self.ext(a, b) * self.ext(c, d)
        assert (got.u, got.v) == ((a * d + b * c) % P_, (b * d - a * c) % P_)

    @given(coords, coords)
    def test_inverse(self, a, b):
        x = self.ext(a, b)
        if a or b:
            assert x * x.inverse() == 1
        else:
            with pytest.raises(ZeroDivisionError):
                x.inverse()

    @given(coords, coords)
    def test_frobenius_is_conjugation(self, a, b):
        x = self.ext(a, b)
        assert x ** P_ == x.conjugate()

    def test_zeta(self, params):
        z = params.zeta
        assert z ** 3 == 1 and z != 1 and z * z + z + 1 == 0
        assert (z.u, z.v) == (1568, 2009)

    def test_distortion_lands_on_curve(self, params):
        q = distortion(params.generator, params)
        assert q.y * q.y == q.x * q.x * q.x + 1
        assert not q.is_base()

    def test_distortion_needs_base_point(self, params):
        with pytest.raises(FieldMismatchError):
            distortion(distortion(params.generator, params), params)

    def test_mixed_fields_rejected(self):
        with pytest.raises(FieldMismatchError):
            ExtFieldElement(1, 1, P_, -1) + ExtFieldElement(1, 1, 4007, -1)


@pytest.mark.parametrize("backend", sorted(PAIRING_BACKENDS))
class TestPairing:
    def test_bilinear(self, params, backend):
        rng = random.Random(11)
        g = params.generator
        base = pairing(g, g, params, backend)
        for _ in range(10):
            a, b = rng.randrange(1, 4020), rng.randrange(1, 4020)
            got = pairing(point_mul(a, g), point_mul(b, g), params, backend)
            assert got == base ** (a * b % R)

    def test_linear_in_each_argument(self, params, backend):
        rng = random.Random(5)
        s = params.point(*POINTS[rng.randrange(len(POINTS))])
        t1 = params.point(*POINTS[rng.randrange(len(POINTS))])
        t2 = params.point(*POINTS[rng.randrange(len(POINTS))])
        lhs = pairing(s, t1 + t2, params, backend)
        assert lhs == pairing(s, t1, params, backend) * pairing(s, t2, params, backend)

    def test_symmetric(self, params, backend):
        g, h = params.generator, params.point(163, 1362)
        assert pairing(g, h, params, backend) == pairing(h, g, params, backend)

    def test_order_r_and_nondegenerate(self, params, backend):
        e = pairing(params.generator, params.generator, params, backend)
        assert e != 1 and e ** R == 1

    def test_signature_equation(self, params, backend):
        hm, sig = params.point(163, 1362), params.point(2350, 3239)
        pk = params.point(2651, 2267)
        assert pairing(sig, params.generator, params, backend) == pairing(hm, pk, params, backend)

    def test_identity_pairs_to_one(self, params, backend):
        assert pairing(INFINITY, params.generator, params, backend) == 1
        # a point of order 60 has no order-67 component
        small = point_mul(67, params.generator)
        assert pairing(small, params.generator, params, backend) == 1


def test_backend_values_frozen(params):
    hm, pk = params.point(163, 1362), params.point(2651, 2267)
    tate = pairing(hm, pk, params, "tate")
    weil = pairing(hm, pk, params, "weil")
    assert (tate.u, tate.v) == (2896, 756)
    assert (weil.u, weil.v) == (719, 1494)


def test_value_in_alternate_basis(params):
    # a^2 - 4a + 2 irreducible over F_4019; in that basis the Tate value
    # reads 1365 a + 2045 for the embedding fixed by conway_basis
    alpha = conway_basis(params, -4, 2)
    assert alpha * alpha - alpha * 4 + 2 == 0
    e = pairing(params.point(163, 1362), params.point(2651, 2267), params)
    assert express_in_basis(e, alpha) == (1365, 2045)
    assert express_in_basis(params.zeta, alpha) == (3448, 3151)


def test_quadratic_roots_reject_reducible(params):
    with pytest.raises(ParameterError):
        quadratic_roots(params, -3, 2)  # (x-1)(x-2)


def test_unknown_backend(params):
    with pytest.raises(ValueError):
        pairing(params.generator, params.generator, params, "ate")


def test_pairing_rejects_extension_points(params):
    with pytest.raises(FieldMismatchError):
        pairing(distortion(params.generator, params), params.generator, params)


def test_miller_degenerate():
    # f_{r,P}(P) meets the support of the divisor
    params = CurveParams(4019, 67, 60, 3198, 578, -1)
    g = params.project(params.generator)
    with pytest.raises(ZeroDivisionError):
        miller_loop(67, g, params.lift(g))


class TestParams:
    def test_shipped(self, params):
        assert (params.p, params.r, params.cofactor) == (4019, 67, 60)

    def test_roundtrip(self, params):
        again = CurveParams.parse(params.serialize())
        assert again == params

    @pytest.mark.parametrize("p,r,h", [
        (4021, 67, 60),   # 1 mod 3: curve is not supersingular
        (4017, 67, 60),   # p composite
        (4019, 201, 20),  # r composite
        (4019, 67, 61),   # cofactor * r != p + 1
        (4019, 2, 2010),  # r | p - 1 and r^2 | p + 1
    ])
    def test_invalid(self, p, r, h):
        with pytest.raises(ParameterError):
            CurveParams(p, r, h, 3198, 578)

    def test_generator_without_r_component(self, params):
        small = point_mul(67, params.generator).coords()
        with pytest.raises(ParameterError):
            CurveParams(4019, 67, 60, *small)

    def test_square_nonresidue_rejected(self):
        with pytest.raises(ParameterError):
            CurveParams(4019, 67, 60, 3198, 578, 4)

    def test_parse_error_names_line(self):
        with pytest.raises(ParseError, match="x.params:3"):
            CurveParams.parse("p = 4019\nr = 67\ngenerator = 1\n", source="x.params")
        with pytest.raises(ParseError, match="missing"):
            CurveParams.parse("p = 4019\n")


class TestGroupLawExamples:
    def test_associativity_sample(self):
        rng = random.Random(11)
        for _ in range(100):
            a, b, c = (PARAMS.point(*rng.choice(POINTS)) for _ in range(3))
            assert point_add(point_add(a, b), c) == point_add(a, point_add(b, c))

    def test_zero_and_order_multiples(self, oracle):
        g = PARAMS.generator
        assert point_mul(0, g).is_infinity
        assert point_mul(4020, g).is_infinity
        hm = oracle.hash_to_point("Node189649", PARAMS)
        assert point_mul(R, hm).is_infinity

    def test_distortion_examples(self):
        assert distortion(INFINITY, PARAMS).is_infinity
        rng = random.Random(12)
        for _ in range(20):
            a = PARAMS.point(*rng.choice(POINTS))
            k = rng.randrange(1, 500)
            assert distortion(point_mul(k, a), PARAMS) == point_mul(k, distortion(a, PARAMS))

    def test_subgroup_clear(self):
        from manetpki.curve import subgroup_clear
        assert subgroup_clear(INFINITY, PARAMS).is_infinity
        rng = random.Random(13)
        for _ in range(50):
            a = subgroup_clear(PARAMS.point(*rng.choice(POINTS)), PARAMS)
            assert point_mul(R, a).is_infinity

    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
    @settings(max_examples=40, deadline=None)
    def test_scalar_homomorphism_on_subgroup(self, a, b):
        q = PARAMS.project(PARAMS.generator)
        assert point_mul(a + b, q) == point_add(point_mul(a, q), point_mul(b, q))
        assert point_mul(a, q) == point_mul(a % R, q)
