"""Threshold BLS certificates binding a node identity to its RSA public key."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .algebra import PrimeFieldElement, lagrange_coefficient
from .curve import INFINITY, CurveParams, CurvePoint, pairing, point_add, point_mul
from .dkg import ManetPublicInfo, NodeIdentity, NodeSecretState
from .errors import ParseError, ProtocolError
from .hashing import HashOracle

log = logging.getLogger(__name__)


def canonical_message(subject: NodeIdentity | str, e: int, n: int) -> bytes:
    if e <= 0 or n <= 0:
        raise ProtocolError("RSA exponent and modulus must be positive")
    label = subject.label if isinstance(subject, NodeIdentity) else subject
    return f"{label}{e}{n}".encode("utf-8")


@dataclass(frozen=True)
class Certificate:
    subject: NodeIdentity
    subject_public_key: tuple[int, int]
    signature: CurvePoint

    @property
    def canonical_message(self) -> bytes:
        return canonical_message(self.subject, *self.subject_public_key)


@dataclass(frozen=True)
class PartialSignature:
    signer: NodeIdentity
    value: CurvePoint
    message: bytes


def partial_sign(state: NodeSecretState, message: bytes, oracle: HashOracle,
                 params: CurveParams) -> PartialSignature:
    hm = oracle.hash_to_point(message, params)
    return PartialSignature(state.identity, point_mul(state.share.value, hm), message)


def combine(partials: Sequence[PartialSignature], threshold: int, r: int) -> CurvePoint:
    """Lagrange-weighted sum of the first ``threshold`` partials, evaluated at 0."""
    if len(partials) < threshold:
        raise ProtocolError(f"{len(partials)} partial signatures, need {threshold}")
    if len({p.message for p in partials}) != 1:
        raise ProtocolError("partial signatures cover different messages")
    hashes = [p.signer.hash.value for p in partials]
    if len(set(hashes)) != len(hashes):
        raise ProtocolError("duplicate signer among partial signatures")
    used = partials[:threshold]
    xs = hashes[:threshold]
    sig = INFINITY
    for i, part in enumerate(used):
        sig = point_add(sig, point_mul(lagrange_coefficient(xs, i, 0, r), part.value))
    return sig


def sign_full(secret: PrimeFieldElement, message: bytes, oracle: HashOracle,
              params: CurveParams) -> CurvePoint:
    """Single-key BLS signature; only meaningful in tests, where s is known."""
    return point_mul(secret.value, oracle.hash_to_point(message, params))


def verify_signature(signature: CurvePoint, message: bytes, info: ManetPublicInfo,
                     oracle: HashOracle) -> bool:
    params = info.params
    if signature.is_infinity or not params.in_subgroup(signature):
        log.warning("signature is not a nontrivial point of order %d", params.r)
        return False
    if not params.in_generated_group(info.public_key):
        log.warning("MANET public key is outside the group generated by P")
        return False
    hm = oracle.hash_to_point(message, params)
    return pairing(signature, params.generator, params) == pairing(hm, info.public_key, params)


def share_commitment(state: NodeSecretState, params: CurveParams) -> CurvePoint:
    """s_i * P, the public value a member would have to publish for verify_partial."""
    return point_mul(state.share.value, params.generator)


def verify_partial(partial: PartialSignature, commitment: CurvePoint, params: CurveParams,
                   oracle: HashOracle) -> bool:
    """Optional check e(p_i, P) == e(H(m), s_i P) of a single partial signature.

    The base protocol publishes no per-member commitments, so nothing calls
    this by default; it lets a requester weed out a bogus partial when such
    commitments are available.
    """
    if not params.in_subgroup(partial.value):
        return False
    hm = oracle.hash_to_point(partial.message, params)
    return pairing(partial.value, params.generator, params) == pairing(hm, commitment, params)


def verify(cert: Certificate, info: ManetPublicInfo, oracle: HashOracle) -> bool:
    """e(signature, P) == e(H(m), PK) for the certificate's canonical message."""
    return verify_signature(cert.signature, cert.canonical_message, info, oracle)


def issue_certificate(requester: NodeSecretState, public_key: tuple[int, int],
                      responders: Sequence[NodeSecretState], info: ManetPublicInfo,
                      oracle: HashOracle) -> Certificate:
    """Collect partials from ``responders`` (in order) and combine them.

    The requester's own partial is added only when the responders alone fall
    short of the threshold.
    """
    t = info.threshold
    others = [s for s in responders if s.identity.label != requester.identity.label]
    if len(others) < t - 1:
        raise ProtocolError(f"{len(others)} responders; at least {t - 1} required")
    message = canonical_message(requester.identity, *public_key)
    params = info.params
    partials = [partial_sign(s, message, oracle, params) for s in others[:t]]
    if len(partials) < t:
        partials.append(partial_sign(requester, message, oracle, params))
    cert = Certificate(requester.identity, tuple(public_key), combine(partials, t, params.r))
    if not verify(cert, info, oracle):
        raise ProtocolError(f"combined signature for {requester.identity.label} does not verify")
    return cert


def serialize_certificate(cert: Certificate, info: ManetPublicInfo | None = None) -> str:
    e, n = cert.subject_public_key
    lines = ["# threshold-BLS certificate",
             f"subject {cert.subject.label}",
             f"subject-hash {cert.subject.hash.value}",
             f"e {e}", f"n {n}",
             "signature " + cert.signature.serialize().replace(",", " ")]
    if info is not None:
        lines.append("issuer-public-key " + info.public_key.serialize().replace(",", " "))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CertificateRecord:
    certificate: Certificate
    issuer_public_key: CurvePoint | None


_CERT_FIELDS = {"subject": 1, "subject-hash": 1, "e": 1, "n": 1, "signature": 2,
                "issuer-public-key": 2}


def parse_certificate(text: str, params: CurveParams, source=None) -> CertificateRecord:
    fields: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        if key not in _CERT_FIELDS:
            raise ParseError(f"unknown field {key!r}", lineno, source)
        if key in fields:
            raise ParseError(f"duplicate field {key!r}", lineno, source)
        if len(vals) != _CERT_FIELDS[key]:
            raise ParseError(f"{key} expects {_CERT_FIELDS[key]} value(s)", lineno, source)
        if key != "subject" and not all(v.lstrip("-").isdigit() for v in vals):
            raise ParseError(f"{key} must be decimal", lineno, source)
        fields[key] = vals
    missing = [k for k in ("subject", "subject-hash", "e", "n", "signature") if k not in fields]
    if missing:
        raise ParseError(f"missing field(s) {', '.join(missing)}", None, source)
    try:
        subject = NodeIdentity(fields["subject"][0],
                               PrimeFieldElement(int(fields["subject-hash"][0]), params.r))
        sig = params.point(*map(int, fields["signature"]))
        pk = None
        if "issuer-public-key" in fields:
            pk = params.point(*map(int, fields["issuer-public-key"]))
        cert = Certificate(subject, (int(fields["e"][0]), int(fields["n"][0])), sig)
    except (ValueError, ProtocolError) as exc:
        raise ParseError(str(exc), None, source) from None
    return CertificateRecord(cert, pk)


def load_certificate(path, params: CurveParams) -> CertificateRecord:
    path = Path(path)
    return parse_certificate(path.read_text(), params, source=path.name)
