"""Three members co-sign Node1's certificate; anyone can check it."""

from manetpki.cert import Certificate, combine, partial_sign, serialize_certificate, verify
from manetpki.hashing import HashOracle, default_fixtures
from manetpki.resources import data_path
from manetpki.simnet import load_scenario, run_scenario

# Reuse the shipped scenario for the setup; only the signing is done by hand.
run = run_scenario(load_scenario(data_path("paper-example.scn")))
info, nodes = run.info, run.nodes
params = info.params
oracle = default_fixtures(params)

node1 = nodes["Node1"]
e, n = node1.rsa_keys.public
message = f"Node1{e}{n}".encode()
print("message:", message.decode(), " H(m) =", oracle.hash_to_point(message, params))

partials = [partial_sign(nodes[k].dkg_state, message, oracle, params)
            for k in ("Node2", "Node3", "Node4")]
for part in partials:
    print(f"  partial from {part.signer.label}: {part.value}")
signature = combine(partials, info.threshold, params.r)
print("combined:", signature)

cert = Certificate(node1.identity, (e, n), signature)
print("verifies:", verify(cert, info, oracle))

# Swapping in another RSA key changes the message.  It has no pinned hash,
# so H is computed with SHA-256 for it.
forged = Certificate(node1.identity, (e + 2, n), signature)
print("with a different key it does not:", verify(forged, info, HashOracle.computed()))

print("\n" + serialize_certificate(cert, info))
