"""Per-node textbook RSA.

No padding: encryption is the deterministic map m -> m^e mod n, exactly as
the messaging protocol uses it.  This is *not* semantically secure and is
meant for demonstration-sized moduli only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd

from .algebra import is_probable_prime
from .errors import ProtocolError

PRIMALITY_ROUNDS = 32


@dataclass(frozen=True)
class RsaKeyPair:
    e: int
    n: int
    d: int
    p: int
    q: int

    @property
    def public(self) -> tuple[int, int]:
        return self.e, self.n

    @property
    def private(self) -> tuple[int, int]:
        return self.d, self.n

    @property
    def phi(self) -> int:
        return (self.p - 1) * (self.q - 1)

    def is_valid(self) -> bool:
        return (self.p != self.q and is_probable_prime(self.p) and is_probable_prime(self.q)
                and self.n == self.p * self.q and gcd(self.e, self.phi) == 1
                and self.e * self.d % self.phi == 1)


def smallest_exponent(phi: int) -> int:
    e = 3
    while gcd(e, phi) != 1:
        e += 2
    return e


def keypair_from_primes(p: int, q: int, e: int | None = None) -> RsaKeyPair:
    if p == q:
        raise ProtocolError("RSA primes must be distinct")
    for f in (p, q):
        if not is_probable_prime(f):
            raise ProtocolError(f"{f} is not prime")
    phi = (p - 1) * (q - 1)
    e = smallest_exponent(phi) if e is None else e
    if gcd(e, phi) != 1:
        raise ProtocolError(f"e = {e} is not invertible modulo phi = {phi}")
    return RsaKeyPair(e, p * q, pow(e, -1, phi), p, q)


def random_prime(bits: int, rng: random.Random) -> int:
    while True:
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(cand, PRIMALITY_ROUNDS, rng):
            return cand


def rsa_keygen(prime_bits: int, rng: random.Random, e: int | None = None) -> RsaKeyPair:
    """Fresh keypair from two distinct random ``prime_bits``-bit primes."""
    if prime_bits < 4:
        raise ValueError("prime_bits must be at least 4")
    while True:
        p = random_prime(prime_bits, rng)
        q = random_prime(prime_bits, rng)
        if p == q:
            continue
        phi = (p - 1) * (q - 1)
        if e is not None and gcd(e, phi) != 1:
            continue
        return keypair_from_primes(p, q, e)


def rsa_encrypt(m: int, e: int, n: int) -> int:
    if not 0 <= m < n:
        raise ProtocolError(f"message {m} is not in [0, {n})")
    return pow(m, e, n)


def rsa_decrypt(c: int, d: int, n: int) -> int:
    if not 0 <= c < n:
        raise ProtocolError(f"ciphertext {c} is not in [0, {n})")
    return pow(c, d, n)
