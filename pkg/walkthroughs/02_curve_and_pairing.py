"""The curve y^2 = x^3 + 1 over F_4019 and its symmetric pairing."""

from manetpki.curve import (conway_basis, distortion, express_in_basis, pairing, default_params,
                            point_mul)

params = default_params()
P = params.generator
print(f"E(F_{params.p}) has {params.p + 1} points; r = {params.r}, cofactor {params.cofactor}")
print("generator", P, "has order", params.generator_order)

# The generator spans all of E(F_p).  Its order-67 part is what the
# pairing sees; projecting keeps the map bilinear on every point.
print("order-r component of P:", params.project(P))

pk = point_mul(24, P)
print("\n24 P =", pk)
hm = params.point(163, 1362)
sig = point_mul(24, hm)
print("24 H =", sig)

# The distortion map moves a point into E(F_p^2) so that e(P, P) != 1.
print("\ndistortion(P) =", distortion(P, params))
lhs, rhs = pairing(sig, P, params), pairing(hm, pk, params)
print("e(24 H, P) =", lhs)
print("e(H, 24 P) =", rhs)
print("equal:", lhs == rhs, "   order divides r:", lhs ** params.r == 1)

# Written in the basis a^2 - 4a + 2 = 0 the same value reads differently.
alpha = conway_basis(params, -4, 2)
u, v = express_in_basis(lhs, alpha)
print(f"in the basis a^2 = 4a - 2: {u}*a + {v}")

weil = pairing(sig, P, params, backend="weil")
print("Weil backend:", weil, " equation holds:", weil == pairing(hm, pk, params, "weil"))
