"""Four founders share a key without a dealer, then a fifth node joins."""

from manetpki.algebra import PrimeFieldElement, SymmetricBivariatePolynomial
from manetpki.curve import default_params
from manetpki.dkg import NodeIdentity, audit_ceremony, founding_ceremony, join_complete, join_issue

params = default_params()
R = params.r
hashes = {"Node1": 37, "Node2": 54, "Node3": 25, "Node4": 17}
founders = [NodeIdentity(label, PrimeFieldElement(h, R)) for label, h in hashes.items()]
polys = {
    "Node1": "5 5 0 / 5 8 3 / 0 3 0",
    "Node2": "9 8 0 / 8 3 5 / 0 5 0",
    "Node3": "6 3 0 / 3 5 8 / 0 8 0",
    "Node4": "4 8 0 / 8 4 2 / 0 2 0",
}
cer = founding_ceremony(founders, 2, params,
                        polynomials={k: SymmetricBivariatePolynomial.parse(v, R)
                                     for k, v in polys.items()})

print("node   row polynomial S_i(z)          share   commitment")
for ident in founders:
    st = cer.states[ident.label]
    print(f"{ident.label}  {st.row_poly.to_string('z'):<28}  {st.share.value:>5}   "
          f"{cer.commitments[ident.label]}")
print("MANET public key:", cer.info.public_key, " threshold t =", cer.info.threshold)

# Nobody ever holds F = sum f_i.  Only a test harness can add the
# polynomials up to check that the key is s P.
_, s = audit_ceremony(cer.polynomials.values())
print("(audit only) s =", s)

# Node5 asks three members for S_i(h_5) and interpolates its own row.
node5 = NodeIdentity("Node5", PrimeFieldElement(27, R))
answers = [join_issue(cer.states[k], node5) for k in ("Node2", "Node3", "Node4")]
print("\njoin answers:", [(a.x.value, a.y.value) for a in answers])
state = join_complete(node5, answers, cer.info.threshold)
print("Node5 row:", state.row_poly.to_string("z"), " share:", state.share.value)
