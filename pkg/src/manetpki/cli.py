"""Command-line entry point.

Exit codes: 0 success, 1 verification or protocol failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .algebra import PrimeFieldElement, is_probable_prime, sqrt_mod
from .cert import Certificate, load_certificate, verify
from .curve import (CurveParams, CurvePoint, _factor, conway_basis, express_in_basis,
                    load_params, pairing, point_add, point_mul)
from .dkg import ManetPublicInfo, NodeIdentity, audit_ceremony
from .errors import ConfigError, FixtureError, ManetPkiError, ParseError
from .hashing import COMPUTED, HashOracle, load_fixtures
from .resources import data_path
from .rsa import keypair_from_primes
from .simnet import Transcript, extract, load_scenario, run_scenario

OK, FAILED, USAGE = 0, 1, 2


def _params(args) -> CurveParams:
    return load_params(args.params or data_path("e4019.params"))


def _oracle(args, params: CurveParams) -> HashOracle:
    if getattr(args, "computed_hash", False):
        return HashOracle.computed()
    return load_fixtures(args.fixtures or data_path("e4019.fixtures"), params)


def _fail(msg: str, code: int) -> int:
    print(f"manetpki: {msg}", file=sys.stderr)
    return code


# ---------------------------------------------------------------- demo

EXPECTED_ROWS = [
    ("h(Node1)", "hash:Node1", "37"), ("h(Node2)", "hash:Node2", "54"),
    ("h(Node3)", "hash:Node3", "25"), ("h(Node4)", "hash:Node4", "17"),
    ("h(Node5)", "hash:Node5", "27"),
]


def demo_rows(args) -> list[tuple[str, str, str, str]]:
    params = _params(args)
    oracle = _oracle(args, params)
    config = load_scenario(data_path("paper-example.scn"), params=params, oracle=oracle)
    transcript = run_scenario(config)
    rows = []

    def add(name, computed, expected, erratum=False):
        computed, expected = str(computed), str(expected)
        if erratum:
            verdict = f"ERRATUM(computed {computed})"
        else:
            verdict = "MATCH" if computed == expected else "MISMATCH"
        rows.append((name, computed, expected, verdict))

    def pt(value):
        return "inf" if value is None else f"({value[0]},{value[1]})"

    for name, query, expected in EXPECTED_ROWS:
        add(name, extract(transcript, query), expected)
    _, secret = audit_ceremony(config.polynomials[label] for label in config.founders)
    add("s = F(0,0) [audit]", secret.value, 24)
    rows_by_pair = {(rec.get("from"), rec.get("to")): rec.get("coeffs")
                    for rec in transcript.of_kind("row")}
    add("N12", rows_by_pair[("Node1", "Node2")], "7,6,28")
    add("N44", rows_by_pair[("Node4", "Node4")], "6,51,34")
    for label, poly in (("Node1", "41,13,63"), ("Node2", "47,59,34"),
                        ("Node3", "21,49,48"), ("Node4", "30,5,38")):
        add(f"S_{label[-1]}(z)", extract(transcript, f"rowpoly:{label}").serialize(), poly)
    for label, share in (("Node1", 41), ("Node2", 47), ("Node3", 21), ("Node4", 30)):
        add(f"share {label}", extract(transcript, f"share:{label}"), share)
    for label, y in (("Node1", "(152,1437)"), ("Node2", "(409,2266)"),
                     ("Node3", "(3063,3143)"), ("Node4", "(3863,2497)")):
        add(f"Y_{label[-1]}", pt(extract(transcript, f"commitment:{label}")), y)
    add("PK = 24*P", pt(point_mul(24, params.generator).coords()), "(2651,2267)")
    add("PK = sum Y_i", pt(extract(transcript, "pk")), "(2651,2267)")
    responses = {rec.get("from"): rec.get("y") for rec in transcript.of_kind("deliver")
                 if rec.get("type") == "join-share-response" and rec.get("to") == "Node5"}
    add("S_25", responses.get("Node2"), 28)
    add("S_35", responses.get("Node3"), 22)
    add("S_45", responses.get("Node4"), 62)
    add("S_5(z)", extract(transcript, "rowpoly:Node5").serialize(), "2,18,17")
    for label, (e, d, n) in (("Node1", (89, 189, 649)), ("Node2", (17, 25, 321)),
                             ("Node3", (63, 7, 115)), ("Node4", (91, 11, 202))):
        p, q, _ = config.rsa_primes[label]
        kp = keypair_from_primes(p, q, e)
        add(f"keys {label}", f"[({kp.e},{kp.n}),({kp.d},{kp.n})]", f"[({e},{n}),({d},{n})]")
    add("m_1", "Node1" + "".join(map(str, extract(transcript, "rsa:Node1"))), "Node189649")
    hm1 = oracle.hash_to_point(b"Node189649", params)
    add("hm_1", pt(hm1.coords()), "(163,1362)")
    add("shm_1", pt(extract(transcript, "signature:Node1")), "(2350,3239)")
    shm1 = params.point(*extract(transcript, "signature:Node1"))
    pk = params.point(*extract(transcript, "pk"))
    left, right = pairing(shm1, params.generator, params), pairing(hm1, pk, params)
    alpha = conway_basis(params, -4, 2)
    u, v = express_in_basis(right, alpha)
    add("e(hm1,PK) [a^2=4a-2]", f"{u}*a + {v}", "1365*a + 2045")
    u, v = express_in_basis(left, alpha)
    add("e(shm1,P) [a^2=4a-2]", f"{u}*a + {v}", "1365*a + 2045")
    add("e(shm1,P) == e(hm1,PK)", "yes" if left == right else "no", "yes")
    add("certificate Node1 valid", "yes" if extract(transcript, "verified:Node3:Node1") else "no", "yes")
    add("C = Encrypt(56,63,115)", extract(transcript, "ciphertext:Node1:Node3"), 463, erratum=True)
    add("M = Decrypt(C,7,115)", extract(transcript, "decrypted:Node3"), 56)
    return rows


def cmd_demo(args) -> int:
    try:
        rows = demo_rows(args)
    except (FixtureError, ParseError, ConfigError, OSError) as exc:
        return _fail(str(exc), USAGE)
    if args.format == "records":
        for row in rows:
            print("\t".join(row))
    else:
        header = ("name", "computed", "paper", "verdict")
        widths = [max(len(r[i]) for r in rows + [header]) for i in range(4)]
        for row in [header] + rows:
            print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    bad = [r for r in rows if r[3] == "MISMATCH"]
    for r in bad:
        print(f"manetpki: mismatch for {r[0]}", file=sys.stderr)
    return FAILED if bad else OK


# ---------------------------------------------------------------- run

def cmd_run(args) -> int:
    try:
        overrides = {}
        if args.params:
            overrides["params"] = load_params(args.params)
        if args.fixtures or args.computed_hash:
            params = overrides.get("params") or load_params(data_path("e4019.params"))
            overrides["oracle"] = _oracle(args, params)
        config = load_scenario(args.scenario, **overrides)
        if args.seed is not None:
            config.seed = args.seed
        transcript = run_scenario(config)
    except (ConfigError, ParseError, FixtureError, OSError) as exc:
        return _fail(str(exc), USAGE)
    if args.format == "text":
        width = max(len(rec.kind) for rec in transcript.records)
        text = "".join(f"{rec.time:>5}  {rec.kind.ljust(width)}  "
                       + " ".join(f"{k}={v}" for k, v in rec.fields) + "\n"
                       for rec in transcript.records)
    else:
        text = transcript.text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


# ---------------------------------------------------------------- verification

def check_transcript(transcript: Transcript, oracle: HashOracle) -> list[tuple[str, bool]]:
    """Offline checks over a transcript; returns (description, passed) pairs."""
    params = transcript.params()
    r = params.r
    checks = []
    threshold = extract(transcript, "threshold")
    commitments = [params.point(*map(int, rec.get("point").split(",")))
                   for rec in transcript.of_kind("commitment")]
    total = None
    for y in commitments:
        total = y if total is None else point_add(total, y)
    pk = params.point(*extract(transcript, "pk"))
    checks.append(("public key equals the sum of commitments", total == pk))
    info = ManetPublicInfo(params, pk, threshold)
    states = {rec.get("node"): rec for rec in transcript.of_kind("state") if rec.get("rowpoly")}
    for label, rec in sorted(states.items()):
        poly = extract(transcript, f"rowpoly:{label}")
        checks.append((f"share of {label} is its row polynomial at 0",
                       poly(0).value == int(rec.get("share"))))
    labels = sorted(states)
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            pa, pb = extract(transcript, f"rowpoly:{a}"), extract(transcript, f"rowpoly:{b}")
            ha, hb = int(states[a].get("hash")), int(states[b].get("hash"))
            checks.append((f"S_{a}(h_{b}) == S_{b}(h_{a})", pa(hb) == pb(ha)))
    hashes = {rec.get("node"): int(rec.get("hash")) for rec in transcript.of_kind("identity")}
    for label, h in hashes.items():
        checks.append((f"identity hash of {label}", oracle.hash_to_range(label, r).value == h))
    for rec in transcript.of_kind("certificate-issued"):
        label = rec.get("node")
        ident = NodeIdentity(label, PrimeFieldElement(hashes[label], r))
        sig = params.point(*map(int, rec.get("signature").split(",")))
        cert = Certificate(ident, (int(rec.get("e")), int(rec.get("n"))), sig)
        checks.append((f"certificate of {label} verifies", verify(cert, info, oracle)))
    return checks


def cmd_verify_transcript(args) -> int:
    try:
        transcript = Transcript.parse(Path(args.transcript).read_text(), source=args.transcript)
        params = transcript.params()
        if transcript.header().get("hash") == COMPUTED or args.computed_hash:
            oracle = HashOracle.computed()
        else:
            oracle = load_fixtures(args.fixtures or data_path("e4019.fixtures"), params)
        checks = check_transcript(transcript, oracle)
    except (ParseError, FixtureError, ManetPkiError, OSError, ValueError, TypeError) as exc:
        return _fail(str(exc), USAGE)
    failed = 0
    for desc, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {desc}")
        failed += not passed
    return FAILED if failed else OK


def cmd_verify_cert(args) -> int:
    try:
        params = _params(args)
        oracle = _oracle(args, params)
        record = load_certificate(args.certificate, params)
        if args.public_key:
            pk = params.point(*(int(v) for v in args.public_key.split(",")))
        elif record.issuer_public_key is not None:
            pk = record.issuer_public_key
        else:
            return _fail("no MANET public key: pass --public-key", USAGE)
    except (ParseError, FixtureError, ManetPkiError, OSError, ValueError) as exc:
        return _fail(str(exc), USAGE)
    info = ManetPublicInfo(params, pk, threshold=1)
    subject = record.certificate.subject
    try:
        bound = oracle.hash_to_range(subject.label, params.r) == subject.hash
        valid = bound and verify(record.certificate, info, oracle)
    except FixtureError as exc:
        return _fail(str(exc), USAGE)
    if not bound:
        print(f"manetpki: subject-hash {subject.hash.value} is not h({subject.label})",
              file=sys.stderr)
    print(f"{subject.label}: {'valid' if valid else 'INVALID'}")
    return OK if valid else FAILED


# ---------------------------------------------------------------- params

def find_params(p: int, r: int | None = None) -> CurveParams:
    """Parameters for y^2 = x^3 + 1 over F_p with a generator of order r."""
    if not is_probable_prime(p) or p % 3 != 2:
        raise ConfigError(f"p = {p} must be a prime congruent to 2 mod 3")
    n = p + 1
    if r is None:
        r = max(_factor(n))
    if n % r:
        raise ConfigError(f"r = {r} does not divide p + 1")
    nonresidue = -1 if p % 4 == 3 else next(
        c for c in range(2, p) if pow(c, (p - 1) // 2, p) == p - 1)
    for x in range(1, p):
        y2 = (x ** 3 + 1) % p
        if pow(y2, (p - 1) // 2, p) != 1:
            continue
        y = sqrt_mod(y2, p)
        base = CurvePoint(PrimeFieldElement(x, p), PrimeFieldElement(min(y, p - y), p))
        g = point_mul(n // r, base)
        if not g.is_infinity:
            gx, gy = g.coords()
            return CurveParams(p, r, n // r, gx, gy, nonresidue, name=f"generated p={p}")
    raise ConfigError("no generator found")


def random_params(bits: int, rng: random.Random) -> CurveParams:
    while True:
        p = rng.getrandbits(bits) | (1 << (bits - 1))
        p += (11 - p) % 12
        if p.bit_length() != bits or not is_probable_prime(p):
            continue
        r = max(_factor(p + 1))
        if r < 5 or (p - 1) % r == 0 or ((p + 1) // r) % r == 0:
            continue
        return find_params(p, r)


def cmd_params(args) -> int:
    try:
        if args.p is not None:
            params = find_params(args.p, args.r)
        elif args.bits is not None:
            if args.bits < 5:
                return _fail("--bits must be at least 5", USAGE)
            params = random_params(args.bits, random.Random(args.seed))
        else:
            params = _params(args)
    except (ManetPkiError, ParseError, OSError) as exc:
        return _fail(str(exc), USAGE)
    text = params.serialize()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manetpki",
                                     description="Threshold-BLS distributed PKI for MANETs")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, fixtures=True):
        p.add_argument("--params", help="curve parameter file (default: shipped E(F_4019))")
        if fixtures:
            p.add_argument("--fixtures", help="hash fixture file (default: shipped fixtures)")
            p.add_argument("--computed-hash", action="store_true",
                           help="hash with SHA-256 instead of fixtures")

    p = sub.add_parser("demo", help="reproduce the E(F_4019) worked example")
    common(p)
    p.add_argument("--format", choices=("text", "records"), default="text")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("run", help="run a scenario and write its transcript")
    p.add_argument("scenario", nargs="?", default="paper-example",
                   help="scenario file, or the name of a shipped scenario")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("records", "text"), default="records",
                   help="records: the stable transcript; text: aligned for reading")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify-transcript", help="re-check a transcript offline")
    p.add_argument("transcript")
    p.add_argument("--fixtures")
    p.add_argument("--computed-hash", action="store_true")
    p.set_defaults(func=cmd_verify_transcript)

    p = sub.add_parser("verify-cert", help="check a certificate's pairing equation")
    p.add_argument("certificate")
    common(p)
    p.add_argument("--public-key", help="MANET public key as X,Y (default: from the file)")
    p.set_defaults(func=cmd_verify_cert)

    p = sub.add_parser("params", help="print or generate curve parameters")
    p.add_argument("--params")
    p.add_argument("--p", type=int, help="base-field prime (2 mod 3)")
    p.add_argument("--r", type=int, help="subgroup order (default: largest prime factor of p+1)")
    p.add_argument("--bits", type=int, help="search a random p of this size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_params)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
