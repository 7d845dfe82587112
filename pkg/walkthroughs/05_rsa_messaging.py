"""Textbook RSA between two certified nodes."""

import random

from manetpki.rsa import keypair_from_primes, rsa_decrypt, rsa_encrypt, rsa_keygen

node3 = keypair_from_primes(5, 23, 63)
print("Node3 keys: public", node3.public, "private", node3.private)

c = rsa_encrypt(56, *node3.public)
print("56 ^ 63 mod 115 =", c)
print("decrypted:", rsa_decrypt(c, *node3.private))

# Fresh keys come from random primes of a chosen size.
fresh = rsa_keygen(16, random.Random(0))
print("\n16-bit primes:", fresh.p, fresh.q, " n =", fresh.n, " e =", fresh.e)
m = 123456789 % fresh.n
print("roundtrip ok:", rsa_decrypt(rsa_encrypt(m, *fresh.public), *fresh.private) == m)

# No padding: equal plaintexts give equal ciphertexts, so this is a toy.
print("deterministic:", rsa_encrypt(7, *fresh.public) == rsa_encrypt(7, *fresh.public))
