"""Arithmetic in Z_67 and the symmetric polynomials behind the key setup."""

from manetpki.algebra import (PrimeField, SharePoint, SymmetricBivariatePolynomial,
                              lagrange_interpolate_at, lagrange_interpolate_poly)

Z = PrimeField(67)
print("3^-1 in Z_67 =", Z(3).inverse())
print("-1 in Z_67   =", Z(-1))

# A symmetric f(x, z): the coefficient matrix equals its transpose.
f = SymmetricBivariatePolynomial.parse("5 5 0 / 5 8 3 / 0 3 0", 67)
print("\nf(x, z) =", f)
print("f(37, 54) =", f(37, 54), " f(54, 37) =", f(54, 37))

# A row f(a, z) is an ordinary polynomial in z.  Rows agree crosswise:
# row_a(b) == row_b(a), which is all the setup protocol relies on.
row_a, row_b = f.row(37), f.row(54)
print("f(37, z) =", row_a.to_string("z"))
print("f(54, z) =", row_b.to_string("z"))
print("cross check:", row_a(54), "==", row_b(37))

# Any d + 1 points fix a degree-d polynomial.
pts = [SharePoint.of(54, 28, 67), SharePoint.of(25, 22, 67), SharePoint.of(17, 62, 67)]
print("\ninterpolated through", [(p.x.value, p.y.value) for p in pts])
print("  polynomial:", lagrange_interpolate_poly(pts).to_string("z"))
print("  value at 0:", lagrange_interpolate_at(pts, 0))
