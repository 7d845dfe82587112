"""Dealer-free setup with symmetric bivariate polynomials, and node join.

Each founding node i picks a symmetric f_i(x, z) over Z_r and sends node j
the row f_i(h_j, z).  Node j sums what it receives into
S_j(z) = F(h_j, z), where F = sum_i f_i is never formed by anyone, and its
share is S_j(0).  The MANET public key is the sum of the commitments
f_i(0, 0) * P.  A joining node w collects S_i(h_w) = F(h_i, h_w) from t
members and interpolates F(h_w, z) from them, which works because F is
symmetric.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .algebra import (PrimeFieldElement, SharePoint, SymmetricBivariatePolynomial,
                      UnivariatePolynomial, lagrange_interpolate_poly)
from .curve import INFINITY, CurveParams, CurvePoint, point_add, point_mul
from .errors import ProtocolError
from .hashing import HashOracle


@dataclass(frozen=True)
class NodeIdentity:
    label: str
    hash: PrimeFieldElement

    def __post_init__(self):
        if self.hash.value == 0:
            raise ProtocolError(f"{self.label} hashes to 0, the secret's abscissa")

    @classmethod
    def from_label(cls, label: str, oracle: HashOracle, r: int) -> "NodeIdentity":
        return cls(label, oracle.hash_to_range(label, r))


def check_distinct(identities: Iterable[NodeIdentity]) -> None:
    seen: dict[int, str] = {}
    for ident in identities:
        other = seen.setdefault(ident.hash.value, ident.label)
        if other != ident.label:
            raise ProtocolError(f"{ident.label} and {other} share hash {ident.hash.value}")


@dataclass(frozen=True)
class DealtRow:
    sender: NodeIdentity
    receiver: NodeIdentity
    row: UnivariatePolynomial
    commitment: CurvePoint


@dataclass(frozen=True)
class NodeSecretState:
    identity: NodeIdentity
    row_poly: UnivariatePolynomial

    @property
    def share(self) -> PrimeFieldElement:
        return self.row_poly(0)


@dataclass(frozen=True)
class ManetPublicInfo:
    params: CurveParams
    public_key: CurvePoint
    threshold: int

    @property
    def degree(self) -> int:
        return self.threshold - 1


def commitment_for(f: SymmetricBivariatePolynomial, params: CurveParams) -> CurvePoint:
    return point_mul(f.constant_term().value, params.generator)


def founding_generate(identity: NodeIdentity, degree: int, params: CurveParams,
                      rng: random.Random) -> tuple[SymmetricBivariatePolynomial, CurvePoint]:
    if degree < 1:
        raise ProtocolError("polynomial degree must be at least 1")
    f = SymmetricBivariatePolynomial.random(degree, params.r, rng)
    return f, commitment_for(f, params)


def deal_rows(f: SymmetricBivariatePolynomial, sender: NodeIdentity,
              peers: Sequence[NodeIdentity], commitment: CurvePoint) -> list[DealtRow]:
    """One row per peer (the sender itself included if listed)."""
    check_distinct(peers)
    return [DealtRow(sender, peer, f.row(peer.hash), commitment) for peer in peers]


def aggregate_rows(identity: NodeIdentity, received: Sequence[DealtRow],
                   founders: Sequence[NodeIdentity] | None = None) -> NodeSecretState:
    if not received:
        raise ProtocolError(f"{identity.label} received no rows")
    senders = [row.sender.label for row in received]
    if len(set(senders)) != len(senders):
        raise ProtocolError(f"duplicate sender among rows for {identity.label}")
    if founders is not None:
        missing = {f.label for f in founders} - set(senders)
        extra = set(senders) - {f.label for f in founders}
        if missing or extra:
            raise ProtocolError(f"rows for {identity.label}: missing {sorted(missing)}, "
                                f"unexpected {sorted(extra)}")
    total = UnivariatePolynomial.zero(identity.hash.modulus)
    for row in received:
        if row.receiver.label != identity.label:
            raise ProtocolError(f"row addressed to {row.receiver.label} given to {identity.label}")
        total = total + row.row
    return NodeSecretState(identity, total)


def aggregate_public_key(commitments: Iterable[CurvePoint], params: CurveParams) -> CurvePoint:
    pk = INFINITY
    for y in commitments:
        if not params.in_generated_group(y):
            raise ProtocolError(f"commitment {y} is outside the group generated by P")
        pk = point_add(pk, y)
    return pk


def join_issue(issuer: NodeSecretState, joiner: NodeIdentity) -> SharePoint:
    """The value F(h_issuer, h_joiner) the joiner needs from this member."""
    return SharePoint(issuer.identity.hash, issuer.row_poly(joiner.hash))


def join_complete(joiner: NodeIdentity, responses: Sequence[SharePoint],
                  threshold: int) -> NodeSecretState:
    """Interpolate the joiner's row polynomial from at least ``threshold`` responses.

    Extra responses are used as a consistency check: all of them must lie on a
    polynomial of degree below ``threshold``.
    """
    if len(responses) < threshold:
        raise ProtocolError(f"{joiner.label} has {len(responses)} join responses, needs {threshold}")
    if any(pt.x == joiner.hash for pt in responses):
        raise ProtocolError(f"{joiner.label} cannot answer its own join request")
    row = lagrange_interpolate_poly(responses)
    if row.degree() >= threshold:
        raise ProtocolError(f"join responses for {joiner.label} are mutually inconsistent")
    return NodeSecretState(joiner, row)


@dataclass
class Ceremony:
    """Outcome of a founding ceremony.

    ``polynomials`` are the founders' own secret contributions; each founder
    holds only its own.  Protocol code never sums them (see audit_ceremony).
    """

    founders: list[NodeIdentity]
    states: dict[str, NodeSecretState]
    commitments: dict[str, CurvePoint]
    rows: list[DealtRow]
    info: ManetPublicInfo
    polynomials: dict[str, SymmetricBivariatePolynomial]


def founding_ceremony(founders: Sequence[NodeIdentity], degree: int, params: CurveParams,
                      rng: random.Random | None = None,
                      polynomials: Mapping[str, SymmetricBivariatePolynomial] | None = None
                      ) -> Ceremony:
    """Run the full setup among ``founders``.

    Polynomials given in ``polynomials`` are used verbatim (by label); the rest
    are drawn from ``rng``.  A public key with no order-r component means
    s = 0 (mod r), which every node can see; the random contributions are then
    redrawn, as founders would rerun the setup.
    """
    threshold = degree + 1
    if len(founders) < threshold:
        raise ProtocolError(f"{len(founders)} founders cannot support threshold {threshold}")
    check_distinct(founders)
    polynomials = dict(polynomials or {})
    while True:
        cer = _ceremony_round(founders, degree, params, rng, polynomials)
        if not params.project(cer.info.public_key).is_infinity:
            return cer
        if all(ident.label in polynomials for ident in founders):
            raise ProtocolError("degenerate MANET public key: the shared secret is 0 mod r")


def _ceremony_round(founders, degree, params, rng, polynomials) -> Ceremony:
    threshold = degree + 1
    polys, commitments, rows = {}, {}, []
    for ident in founders:
        if ident.label in polynomials:
            f = polynomials[ident.label]
            if f.modulus != params.r or f.degree != degree:
                raise ProtocolError(f"injected polynomial for {ident.label} has wrong shape")
            y = commitment_for(f, params)
        else:
            if rng is None:
                raise ProtocolError(f"no polynomial for {ident.label} and no rng")
            f, y = founding_generate(ident, degree, params, rng)
        polys[ident.label], commitments[ident.label] = f, y
        rows.extend(deal_rows(f, ident, founders, y))
    states = {}
    for ident in founders:
        mine = [row for row in rows if row.receiver.label == ident.label]
        states[ident.label] = aggregate_rows(ident, mine, founders)
    pk = aggregate_public_key(commitments.values(), params)
    return Ceremony(list(founders), states, commitments, rows,
                    ManetPublicInfo(params, pk, threshold), polys)


def audit_ceremony(polynomials: Iterable[SymmetricBivariatePolynomial]
                   ) -> tuple[SymmetricBivariatePolynomial, PrimeFieldElement]:
    """Test-only: the implicit master polynomial F and secret s = F(0, 0)."""
    polys = list(polynomials)
    if not polys:
        raise ProtocolError("nothing to audit")
    total = polys[0]
    for f in polys[1:]:
        total = total + f
    return total, total.constant_term()
