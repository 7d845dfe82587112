"""Deterministic discrete-event MANET simulator.

Nodes exchange protocol messages over an explicit, mutable neighbour graph,
in logical time.  Every message hop costs one tick; events run in
(time, insertion order).  A run is a pure function of the scenario and its
seed and produces a line-oriented :class:`Transcript`.

Scenario files are plain text::

    [scenario]            key = value parameters
    [founders]            labels, whitespace separated
    [polynomials]         Label = row0 / row1 / ...   (optional injection)
    [rsa]                 Label = p q [e]             (optional injection)
    [links]               "A B" per line, or "full" for a founder mesh
    [random]              joins/departures/messages generator (optional)
    [events]              "<tick> <verb> args..." per line

Verbs: ``join N [neighbours...]``, ``issue N``, ``verify V S``,
``send A B m``, ``depart N``, ``link A B``, ``unlink A B``.
"""

from __future__ import annotations

import heapq
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

from .algebra import SharePoint, SymmetricBivariatePolynomial, UnivariatePolynomial
from .cert import Certificate, PartialSignature, canonical_message, combine, partial_sign, verify
from .curve import CurveParams, CurvePoint, load_params
from .dkg import (ManetPublicInfo, NodeIdentity, NodeSecretState, check_distinct,
                  founding_ceremony, join_complete, join_issue)
from .errors import (ConfigError, FixtureError, ManetPkiError, ParseError, ProtocolError,
                     UnknownQueryError)
from .hashing import COMPUTED, FIXTURE, HashOracle, load_fixtures
from .resources import data_path
from .rsa import RsaKeyPair, keypair_from_primes, rsa_decrypt, rsa_encrypt, rsa_keygen

LABEL_RE = re.compile(r"^[A-Za-z0-9_.-]+$")

_VERBS = {
    "join": ("join-request", 1, None),
    "issue": ("issue-request", 1, 1),
    "verify": ("verify-request", 2, 2),
    "send": ("send-message", 3, 3),
    "depart": ("depart", 1, 1),
    "link": ("link", 2, 2),
    "unlink": ("unlink", 2, 2),
}

ACTIVE = "active"
DEPARTED = "departed"


# ---------------------------------------------------------------- configuration

@dataclass
class ScenarioEvent:
    time: int
    kind: str
    args: tuple[str, ...]
    line: int | None = None


@dataclass
class ScenarioConfig:
    params: CurveParams
    founders: list[str]
    degree: int
    oracle: HashOracle
    name: str = "scenario"
    share_field_order: int | None = None
    seed: int = 0
    polynomials: dict[str, SymmetricBivariatePolynomial] = field(default_factory=dict)
    rsa_primes: dict[str, tuple[int, int, int | None]] = field(default_factory=dict)
    rsa_prime_bits: int = 8
    links: list[tuple[str, str]] = field(default_factory=list)
    full_mesh: bool = False
    events: list[ScenarioEvent] = field(default_factory=list)
    random_churn: dict[str, int] = field(default_factory=dict)
    drop_probability: float = 0.0
    timeout: int = 3
    debug: bool = False
    accept_join: Callable[[str, str], bool] | None = None

    @property
    def threshold(self) -> int:
        return self.degree + 1

    @property
    def hash_mode(self) -> str:
        return self.oracle.mode

    @property
    def uses_randomness(self) -> bool:
        """False when polynomials, RSA primes and the event script are all pinned."""
        joiners = [ev.args[0] for ev in self.events if ev.kind == "join-request"]
        return (any(label not in self.polynomials for label in self.founders)
                or any(label not in self.rsa_primes for label in self.founders + joiners)
                or bool(self.random_churn) or self.drop_probability > 0)

    def validate(self) -> None:
        r = self.params.r
        if self.share_field_order is not None and self.share_field_order != r:
            raise ConfigError(f"share field order {self.share_field_order} != curve subgroup order {r}")
        if self.degree < 1:
            raise ConfigError("degree must be at least 1")
        if len(self.founders) < self.threshold:
            raise ConfigError(f"threshold {self.threshold} exceeds founding count {len(self.founders)}")
        if len(set(self.founders)) != len(self.founders):
            raise ConfigError("duplicate founder label")
        for label in self.founders:
            if not LABEL_RE.match(label):
                raise ConfigError(f"bad node label {label!r}")
        for label, f in self.polynomials.items():
            if label not in self.founders:
                raise ConfigError(f"polynomial given for non-founder {label}")
            if f.degree != self.degree or f.modulus != r:
                raise ConfigError(f"polynomial for {label} is not of degree {self.degree} over Z_{r}")
        if self.founders and all(label in self.polynomials for label in self.founders):
            if sum(self.polynomials[label].constant_term().value for label in self.founders) % r == 0:
                raise ConfigError("injected polynomials give a degenerate key (secret 0 mod r)")
        for label, (p, q, e) in self.rsa_primes.items():
            try:
                keypair_from_primes(p, q, e)
            except ProtocolError as exc:
                raise ConfigError(f"rsa entry for {label}: {exc}") from None
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ConfigError("drop_probability must lie in [0, 1]")
        if self.timeout < 2:
            raise ConfigError("timeout must cover a request/response round trip (>= 2)")
        if self.rsa_prime_bits < 4:
            raise ConfigError("rsa_prime_bits must be at least 4")
        try:
            idents = [NodeIdentity.from_label(label, self.oracle, r) for label in self.founders]
            check_distinct(idents)
        except (FixtureError, ProtocolError) as exc:
            raise ConfigError(f"founder identities: {exc}") from None
        known = set(self.founders) | {ev.args[0] for ev in self.events if ev.kind == "join-request"}
        for a, b in self.links:
            for label in (a, b):
                if label not in known:
                    raise ConfigError(f"link references unknown node {label}")
        for ev in self.events:
            where = f" (line {ev.line})" if ev.line else ""
            if ev.time < 1:
                raise ConfigError(f"event at tick {ev.time}{where}: tick 0 is reserved for setup")
            if ev.kind not in {k for k, _, _ in _VERBS.values()}:
                raise ConfigError(f"unknown event kind {ev.kind}{where}")
            for label in (ev.args[:2] if ev.kind == "send-message" else ev.args):
                if not LABEL_RE.match(label):
                    raise ConfigError(f"bad node label {label!r}{where}")
            if ev.kind == "send-message":
                try:
                    if int(ev.args[2]) < 0:
                        raise ValueError
                except ValueError:
                    raise ConfigError(f"message must be a non-negative integer{where}") from None


def _resolve(path: str, base: Path | None) -> Path:
    cand = Path(path)
    if not cand.is_absolute() and base is not None and (base / cand).exists():
        return base / cand
    if cand.exists():
        return cand
    shipped = data_path(path)
    if shipped.exists():
        return shipped
    raise ConfigError(f"cannot find {path}")


def parse_scenario(text: str, base_dir: Path | None = None, source=None,
                   params: CurveParams | None = None, oracle: HashOracle | None = None
                   ) -> ScenarioConfig:
    """Parse a scenario file.  ``params``/``oracle`` override the file's choices."""
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([a-z]+)\]", line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno, source)
            sections[current] = []
            continue
        if current is None:
            raise ParseError("content before the first section", lineno, source)
        sections[current].append((lineno, line))
    unknown = set(sections) - {"scenario", "founders", "polynomials", "rsa", "links",
                               "random", "events"}
    if unknown:
        raise ParseError(f"unknown section(s) {', '.join(sorted(unknown))}", None, source)

    def key_values(name):
        out = {}
        for lineno, line in sections.get(name, []):
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"expected key = value in [{name}]", lineno, source)
            out[key.strip()] = (value.strip(), lineno)
        return out

    settings = key_values("scenario")

    def setting(key, default=None, conv=str):
        if key not in settings:
            return default
        value, lineno = settings[key]
        try:
            return conv(value)
        except ValueError:
            raise ParseError(f"bad value for {key}: {value!r}", lineno, source) from None

    known_settings = {"name", "params", "fixtures", "hash_mode", "degree", "share_field_order",
                      "seed", "rsa_prime_bits", "drop_probability", "timeout", "debug"}
    for key, (_, lineno) in settings.items():
        if key not in known_settings:
            raise ParseError(f"unknown setting {key!r}", lineno, source)

    if params is None:
        params = load_params(_resolve(setting("params", "e4019.params"), base_dir))
    hash_mode = setting("hash_mode", COMPUTED)
    if oracle is None:
        if hash_mode == FIXTURE:
            oracle = load_fixtures(_resolve(setting("fixtures", "e4019.fixtures"), base_dir), params)
        elif hash_mode == COMPUTED:
            oracle = HashOracle.computed()
        else:
            raise ParseError(f"hash_mode must be {COMPUTED} or {FIXTURE}", settings["hash_mode"][1], source)
    degree = setting("degree", None, int)
    if degree is None:
        raise ParseError("missing setting 'degree'", None, source)

    founders = [tok for _, line in sections.get("founders", []) for tok in line.split()]
    polys = {}
    for label, (value, lineno) in key_values("polynomials").items():
        try:
            polys[label] = SymmetricBivariatePolynomial.parse(value, params.r)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, source) from None
    rsa = {}
    for label, (value, lineno) in key_values("rsa").items():
        try:
            nums = [int(tok) for tok in value.split()]
        except ValueError:
            raise ParseError("rsa entries are 'p q [e]'", lineno, source) from None
        if len(nums) not in (2, 3):
            raise ParseError("rsa entries are 'p q [e]'", lineno, source)
        rsa[label] = (nums[0], nums[1], nums[2] if len(nums) == 3 else None)
    links, full = [], False
    for lineno, line in sections.get("links", []):
        toks = line.split()
        if toks == ["full"]:
            full = True
        elif len(toks) == 2:
            links.append((toks[0], toks[1]))
        else:
            raise ParseError("links are 'A B' pairs or 'full'", lineno, source)
    churn = {}
    for key, (value, lineno) in key_values("random").items():
        if key not in ("joins", "departures", "messages", "start", "spacing"):
            raise ParseError(f"unknown random setting {key!r}", lineno, source)
        try:
            churn[key] = int(value)
        except ValueError:
            raise ParseError(f"bad value for {key}", lineno, source) from None
    events = []
    for lineno, line in sections.get("events", []):
        toks = line.split()
        if len(toks) < 2:
            raise ParseError("events are '<tick> <verb> args...'", lineno, source)
        try:
            tick = int(toks[0])
        except ValueError:
            raise ParseError(f"bad tick {toks[0]!r}", lineno, source) from None
        verb, args = toks[1], tuple(toks[2:])
        if verb not in _VERBS:
            raise ParseError(f"unknown verb {verb!r}", lineno, source)
        kind, lo, hi = _VERBS[verb]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ParseError(f"wrong number of arguments for {verb}", lineno, source)
        events.append(ScenarioEvent(tick, kind, args, lineno))

    return ScenarioConfig(
        params=params, founders=founders, degree=degree, oracle=oracle,
        name=setting("name", "scenario"),
        share_field_order=setting("share_field_order", None, int),
        seed=setting("seed", 0, int), polynomials=polys, rsa_primes=rsa,
        rsa_prime_bits=setting("rsa_prime_bits", 8, int), links=links, full_mesh=full,
        events=events, random_churn=churn,
        drop_probability=setting("drop_probability", 0.0, float),
        timeout=setting("timeout", 3, int),
        debug=setting("debug", "no") in ("yes", "true", "1"))


def load_scenario(path, **overrides) -> ScenarioConfig:
    path = Path(path)
    if not path.exists() and not path.suffix:
        path = data_path(f"{path}.scn")
    if not path.exists():
        raise ConfigError(f"no scenario file {path}")
    return parse_scenario(path.read_text(), path.parent, source=path.name, **overrides)


# ---------------------------------------------------------------- transcript

def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, CurvePoint):
        return value.serialize()
    if isinstance(value, UnivariatePolynomial):
        return value.serialize()
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value) or "-"
    return str(value)


@dataclass(frozen=True)
class Record:
    time: int
    kind: str
    fields: tuple[tuple[str, str], ...]

    def get(self, key: str, default=None):
        for k, v in self.fields:
            if k == key:
                return v
        return default

    def __str__(self):
        body = " ".join(f"{k}={v}" for k, v in self.fields)
        return f"{self.time} {self.kind}" + (f" {body}" if body else "")

    @classmethod
    def parse(cls, line: str, lineno: int | None = None) -> "Record":
        toks = line.split()
        if len(toks) < 2:
            raise ParseError("record needs a tick and a kind", lineno)
        try:
            time = int(toks[0])
        except ValueError:
            raise ParseError(f"bad tick {toks[0]!r}", lineno) from None
        fields = []
        for tok in toks[2:]:
            k, sep, v = tok.partition("=")
            if not sep:
                raise ParseError(f"field {tok!r} is not key=value", lineno)
            fields.append((k, v))
        return cls(time, toks[1], tuple(fields))


@dataclass
class Transcript:
    records: list[Record]
    nodes: dict[str, "SimNode"] | None = None
    info: ManetPublicInfo | None = None

    def text(self) -> str:
        return "".join(f"{rec}\n" for rec in self.records)

    def of_kind(self, kind: str) -> list[Record]:
        return [rec for rec in self.records if rec.kind == kind]

    @classmethod
    def parse(cls, text: str, source=None) -> "Transcript":
        records = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            if raw.strip():
                try:
                    records.append(Record.parse(raw, lineno))
                except ParseError as exc:
                    raise ParseError(str(exc).split(": ", 1)[-1], lineno, source) from None
        if not records or records[0].kind != "scenario":
            raise ParseError("transcript must start with a scenario record", 1, source)
        return cls(records)

    def header(self) -> Record:
        return self.records[0]

    def params(self) -> CurveParams:
        h = self.header()
        gx, gy = (int(v) for v in h.get("generator").split(","))
        return CurveParams(int(h.get("p")), int(h.get("r")), int(h.get("cofactor")),
                           gx, gy, int(h.get("nonresidue")))


def _point(text: str) -> tuple[int, int] | None:
    if text == "inf":
        return None
    x, y = text.split(",")
    return int(x), int(y)


def extract(transcript: Transcript, query: str):
    """Pull a named quantity out of a transcript.

    Keys: ``share:N``, ``rowpoly:N``, ``hash:N``, ``status:N``, ``rsa:N`` (e, n),
    ``commitment:N``, ``pk``, ``signature:N``, ``certified:N``,
    ``verified:V:S``, ``ciphertext:A:B``, ``decrypted:N``, ``threshold``.
    Values come from the most recent matching record.
    """
    name, _, arg = query.partition(":")
    recs = transcript.records
    r = int(transcript.header().get("r"))

    def last(kind, **match):
        for rec in reversed(recs):
            if rec.kind == kind and all(rec.get(k) == v for k, v in match.items()):
                return rec
        raise UnknownQueryError(query)

    if name == "pk" and not arg:
        return _point(last("public-key").get("point"))
    if name == "threshold" and not arg:
        return int(transcript.header().get("threshold"))
    if not arg:
        raise UnknownQueryError(query)
    if name == "share":
        return int(last("state", node=arg).get("share"))
    if name == "rowpoly":
        return UnivariatePolynomial.parse(last("state", node=arg).get("rowpoly"), r)
    if name == "hash":
        return int(last("identity", node=arg).get("hash"))
    if name == "status":
        return last("state", node=arg).get("status")
    if name == "rsa":
        rec = last("rsa-keygen", node=arg)
        return int(rec.get("e")), int(rec.get("n"))
    if name == "commitment":
        return _point(last("commitment", node=arg).get("point"))
    if name == "signature":
        return _point(last("certificate-issued", node=arg).get("signature"))
    if name == "certified":
        return last("state", node=arg).get("certified") == "yes"
    if name == "verified":
        verifier, _, subject = arg.partition(":")
        return last("verified", verifier=verifier, subject=subject).get("valid") == "yes"
    if name == "ciphertext":
        src, _, dst = arg.partition(":")
        return int(last("send", **{"from": src, "to": dst}).get("ciphertext"))
    if name == "decrypted":
        return int(last("decrypted", node=arg).get("plaintext"))
    raise UnknownQueryError(query)


# ---------------------------------------------------------------- simulator

@dataclass
class SimNode:
    identity: NodeIdentity
    dkg_state: NodeSecretState | None = None
    rsa_keys: RsaKeyPair | None = None
    certificate: Certificate | None = None
    neighbors: set[str] = field(default_factory=set)
    status: str = ACTIVE

    @property
    def label(self) -> str:
        return self.identity.label

    @property
    def active(self) -> bool:
        return self.status == ACTIVE

    @property
    def member(self) -> bool:
        return self.active and self.dkg_state is not None


@dataclass
class SimEvent:
    time: int
    kind: str
    payload: dict


@dataclass
class _Session:
    """An open join or issuance request awaiting responses."""

    kind: str
    node: str
    asked: list[str] = field(default_factory=list)
    responses: dict[str, Any] = field(default_factory=dict)
    message: bytes = b""
    own_used: bool = False
    open: bool = True
    round: int = 0


class Simulator:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.params = config.params
        self.r = config.params.r
        self.t = config.threshold
        self.rng = random.Random(config.seed)
        self.now = 0
        self.nodes: dict[str, SimNode] = {}
        self.directory: dict[str, Certificate] = {}
        self.records: list[Record] = []
        self.info: ManetPublicInfo | None = None
        self._queue: list[tuple[int, int, SimEvent]] = []
        self._seq = 0
        self._sessions: dict[tuple[str, str], _Session] = {}

    # -- plumbing

    def record(self, kind: str, **fields) -> None:
        self.records.append(Record(self.now, kind, tuple(
            (k.rstrip("_").replace("_", "-"), _fmt(v)) for k, v in fields.items())))

    def schedule(self, time: int, kind: str, **payload) -> None:
        heapq.heappush(self._queue, (time, self._seq, SimEvent(time, kind, payload)))
        self._seq += 1

    def send(self, src: str, dst: str, mtype: str, **body) -> None:
        self.schedule(self.now + 1, "deliver", src=src, dst=dst, mtype=mtype, body=body)

    def _link(self, a: str, b: str) -> None:
        if a != b and a in self.nodes and b in self.nodes:
            self.nodes[a].neighbors.add(b)
            self.nodes[b].neighbors.add(a)

    def _keygen(self, node: SimNode) -> None:
        if node.label in self.config.rsa_primes:
            p, q, e = self.config.rsa_primes[node.label]
            node.rsa_keys = keypair_from_primes(p, q, e)
        else:
            node.rsa_keys = rsa_keygen(self.config.rsa_prime_bits, self.rng)
        extra = {"d": node.rsa_keys.d} if self.config.debug else {}
        self.record("rsa-keygen", node=node.label, e=node.rsa_keys.e, n=node.rsa_keys.n, **extra)

    def _candidates(self, label: str, exclude: Iterable[str] = ()) -> list[str]:
        skip = set(exclude) | {label}
        return sorted(n for n in self.nodes[label].neighbors
                      if n not in skip and self.nodes[n].member)

    # -- setup

    def setup(self) -> None:
        cfg = self.config
        self.record("scenario", name=cfg.name, p=self.params.p, r=self.r,
                    cofactor=self.params.cofactor,
                    generator=self.params.generator, nonresidue=self.params.nonresidue,
                    degree=cfg.degree, threshold=self.t, hash=cfg.hash_mode,
                    seed=cfg.seed if cfg.uses_randomness else "-",
                    founders=cfg.founders)
        idents = [NodeIdentity.from_label(label, cfg.oracle, self.r) for label in cfg.founders]
        for ident in idents:
            self.nodes[ident.label] = SimNode(ident)
            self.record("identity", node=ident.label, hash=ident.hash.value)
        ceremony = founding_ceremony(idents, cfg.degree, self.params, self.rng, cfg.polynomials)
        for ident in idents:
            self.record("commitment", node=ident.label, point=ceremony.commitments[ident.label])
        # bootstrap rows travel by direct in-memory delivery: no keys exist yet
        for row in ceremony.rows:
            self.record("row", from_=row.sender.label, to=row.receiver.label, coeffs=row.row)
        for ident in idents:
            self.nodes[ident.label].dkg_state = ceremony.states[ident.label]
        self.info = ceremony.info
        del ceremony
        self.record("public-key", point=self.info.public_key)
        for label in cfg.founders:
            self._keygen(self.nodes[label])
        if cfg.full_mesh:
            for a in cfg.founders:
                for b in cfg.founders:
                    self._link(a, b)
        for a, b in cfg.links:
            self._link(a, b)
        self.record("setup-complete", founders=cfg.founders)
        for ev in cfg.events:
            self.schedule(ev.time, ev.kind, args=ev.args)
        for ev in self._random_events():
            self.schedule(ev.time, ev.kind, args=ev.args)

    def _random_events(self) -> list[ScenarioEvent]:
        spec = self.config.random_churn
        if not spec:
            return []
        rng = random.Random(f"{self.config.seed}:churn")
        spacing = spec.get("spacing", 10)
        tick = spec.get("start", 1)
        known = set(self.config.founders) | {
            ev.args[0] for ev in self.config.events if ev.kind == "join-request"}
        active = list(self.config.founders)
        out = []
        for label in active:
            out.append(ScenarioEvent(tick, "issue-request", (label,)))
        tick += spacing
        ops = (["join"] * spec.get("joins", 0) + ["depart"] * spec.get("departures", 0)
               + ["send"] * spec.get("messages", 0))
        rng.shuffle(ops)
        counter = 0
        taken = set()
        for label in known:
            try:
                taken.add(self.config.oracle.hash_to_range(label, self.r).value)
            except FixtureError:
                pass

        def usable(label):
            if label in known:
                return False
            try:
                h = self.config.oracle.hash_to_range(label, self.r).value
            except FixtureError:
                return True  # the join itself will record the failure
            return h != 0 and h not in taken

        for op in ops:
            if op == "join":
                counter += 1
                label = f"R{counter}"
                while not usable(label):
                    counter += 1
                    label = f"R{counter}"
                known.add(label)
                try:
                    taken.add(self.config.oracle.hash_to_range(label, self.r).value)
                except FixtureError:
                    pass
                peers = rng.sample(sorted(active), min(len(active), self.t + 1))
                out.append(ScenarioEvent(tick, "join-request", (label, *sorted(peers))))
                out.append(ScenarioEvent(tick + spacing // 2, "issue-request", (label,)))
                active.append(label)
            elif op == "depart" and len(active) > self.t + 1:
                victim = rng.choice(sorted(active))
                active.remove(victim)
                out.append(ScenarioEvent(tick, "depart", (victim,)))
            elif op == "send" and len(active) >= 2:
                a, b = rng.sample(sorted(active), 2)
                out.append(ScenarioEvent(tick, "send-message", (a, b, str(rng.randrange(2, 50)))))
            tick += spacing
        return out

    # -- event loop

    def run(self) -> Transcript:
        self.setup()
        while self._queue:
            _, _, event = heapq.heappop(self._queue)
            self.step(event)
        self.snapshot()
        return Transcript(self.records, self.nodes, self.info)

    def step(self, event: SimEvent) -> None:
        self.now = event.time
        handler = getattr(self, "_on_" + event.kind.replace("-", "_"))
        try:
            handler(**event.payload)
        except ManetPkiError as exc:
            self.record("protocol-error", event=event.kind, reason=_slug(str(exc)))

    def snapshot(self) -> None:
        for label in sorted(self.nodes):
            node = self.nodes[label]
            fields: dict[str, Any] = {"node": label, "status": node.status,
                                      "hash": node.identity.hash.value}
            if node.dkg_state is not None:
                fields["share"] = node.dkg_state.share.value
                fields["rowpoly"] = node.dkg_state.row_poly
            if node.rsa_keys is not None:
                fields["e"], fields["n"] = node.rsa_keys.public
                if self.config.debug:
                    fields["d"] = node.rsa_keys.d
            fields["certified"] = node.certificate is not None
            fields["neighbors"] = sorted(node.neighbors)
            self.record("state", **fields)

    # -- scripted events

    def _on_link(self, args):
        a, b = args
        if a in self.nodes and b in self.nodes and a != b:
            self._link(a, b)
            self.record("link", a=a, b=b)
        else:
            self.record("link-failed", a=a, b=b, reason="unknown-node")

    def _on_unlink(self, args):
        a, b = args
        for x, y in ((a, b), (b, a)):
            if x in self.nodes:
                self.nodes[x].neighbors.discard(y)
        self.record("unlink", a=a, b=b)

    def _on_depart(self, args):
        (label,) = args
        node = self.nodes.get(label)
        if node is None or not node.active:
            self.record("depart-failed", node=label, reason="not-active")
            return
        node.status = DEPARTED
        self.record("depart", node=label)

    def _on_join_request(self, args):
        label, requested = args[0], args[1:]
        if label in self.nodes:
            self.record("join-failed", node=label, reason="label-in-use")
            return
        try:
            ident = NodeIdentity.from_label(label, self.config.oracle, self.r)
            check_distinct([n.identity for n in self.nodes.values()] + [ident])
        except (FixtureError, ProtocolError) as exc:
            self.record("join-failed", node=label, reason=_slug(str(exc)))
            return
        node = SimNode(ident)
        self.nodes[label] = node
        peers = requested or tuple(sorted(n for n, s in self.nodes.items() if s.member))
        for peer in peers:
            if peer in self.nodes and self.nodes[peer].active:
                self._link(label, peer)
        self.record("identity", node=label, hash=ident.hash.value)
        self.record("join-request", node=label, neighbors=sorted(node.neighbors))
        session = _Session("join", label)
        self._sessions[("join", label)] = session
        self._top_up(session)

    def _on_issue_request(self, args):
        (label,) = args
        node = self.nodes.get(label)
        if node is None or not node.active:
            self.record("issue-failed", node=label, reason="not-active")
            return
        if node.dkg_state is None or node.rsa_keys is None:
            self.record("issue-failed", node=label, reason="not-a-member")
            return
        if ("issue", label) in self._sessions and self._sessions[("issue", label)].open:
            self.record("issue-failed", node=label, reason="already-pending")
            return
        session = _Session("issue", label,
                           message=canonical_message(node.identity, *node.rsa_keys.public))
        self._sessions[("issue", label)] = session
        self.record("issue-request", node=label, message=session.message.decode())
        self._top_up(session)

    def _on_verify_request(self, args):
        verifier, subject = args
        v = self.nodes.get(verifier)
        if v is None or not v.active:
            self.record("verify-failed", verifier=verifier, subject=subject, reason="verifier-not-active")
            return
        cert = self.directory.get(subject)
        if cert is None:
            self.record("verify-failed", verifier=verifier, subject=subject, reason="no-certificate")
            return
        self.record("verified", verifier=verifier, subject=subject,
                    valid=verify(cert, self.info, self.config.oracle))

    def _on_send_message(self, args):
        src, dst, text = args
        m = int(text)
        sender = self.nodes.get(src)
        if sender is None or not sender.active:
            self.record("send-failed", from_=src, to=dst, reason="sender-not-active")
            return
        cert = self.directory.get(dst)
        if cert is None:
            self.record("send-failed", from_=src, to=dst, reason="no-certificate")
            return
        if not verify(cert, self.info, self.config.oracle):
            self.record("send-failed", from_=src, to=dst, reason="certificate-invalid")
            return
        e, n = cert.subject_public_key
        if m >= n:
            self.record("send-failed", from_=src, to=dst, reason="message-too-large")
            return
        c = rsa_encrypt(m, e, n)
        self.record("send", from_=src, to=dst, e=e, n=n, ciphertext=c)
        self.send(src, dst, "ciphertext", c=c)

    # -- request/response sessions

    def _top_up(self, session: _Session) -> None:
        """Ask more responders until the session can reach t responses, or fail."""
        if not session.open:
            return
        node = self.nodes[session.node]
        if not node.active:
            self._fail(session, "requester-departed")
            return
        need = self.t - len(session.responses)
        fresh = self._candidates(session.node, exclude=session.asked)
        if session.kind == "issue" and len(fresh) < need and not session.own_used:
            own = partial_sign(node.dkg_state, session.message, self.config.oracle, self.params)
            session.responses[session.node] = own
            session.own_used = True
            self.record("partial-own", node=session.node)
            need -= 1
        if need <= 0:
            self._finish(session)
            return
        if len(fresh) < need:
            self._fail(session, "insufficient-responders", have=len(fresh) + len(session.responses),
                       need=self.t)
            return
        session.round += 1
        mtype = "join-share-request" if session.kind == "join" else "partial-request"
        for peer in fresh[:need]:
            session.asked.append(peer)
            if session.kind == "join":
                self.send(session.node, peer, mtype, hash=node.identity.hash.value)
            else:
                self.send(session.node, peer, mtype, message=session.message.decode())
        self.schedule(self.now + self.config.timeout, f"{session.kind}-timeout",
                      node=session.node, round=session.round)

    def _fail(self, session: _Session, reason: str, **extra) -> None:
        session.open = False
        self.record(f"{session.kind}-failed", node=session.node, reason=reason, **extra)
        if session.kind == "join":
            node = self.nodes.pop(session.node)
            for peer in node.neighbors:
                if peer in self.nodes:
                    self.nodes[peer].neighbors.discard(node.label)

    def _finish(self, session: _Session) -> None:
        session.open = False
        node = self.nodes[session.node]
        if session.kind == "join":
            points = list(session.responses.values())[: self.t]
            node.dkg_state = join_complete(node.identity, points, self.t)
            self.record("joined", node=node.label, responders=list(session.responses)[: self.t])
            self._keygen(node)
            return
        partials = list(session.responses.values())
        signature = combine(partials, self.t, self.r)
        cert = Certificate(node.identity, node.rsa_keys.public, signature)
        signers = [p.signer.label for p in partials[: self.t]]
        if not verify(cert, self.info, self.config.oracle):
            self.record("issue-failed", node=node.label, reason="verification", signers=signers)
            return
        node.certificate = cert
        self.directory[node.label] = cert
        self.record("certificate-issued", node=node.label, e=cert.subject_public_key[0],
                    n=cert.subject_public_key[1], signature=signature, signers=signers)

    def _on_join_timeout(self, node, round):
        session = self._sessions.get(("join", node))
        if session and session.open and session.round == round:
            self.record("timeout", node=node, session="join", have=len(session.responses))
            self._top_up(session)

    def _on_issue_timeout(self, node, round):
        session = self._sessions.get(("issue", node))
        if session and session.open and session.round == round:
            self.record("timeout", node=node, session="issue", have=len(session.responses))
            self._top_up(session)

    def _on_deliver(self, src, dst, mtype, body):
        target = self.nodes.get(dst)
        if target is None or not target.active:
            self.record("dropped", from_=src, to=dst, type=mtype, reason="receiver-absent")
            return
        if self.config.drop_probability and self.rng.random() < self.config.drop_probability:
            self.record("dropped", from_=src, to=dst, type=mtype, reason="loss")
            return
        self.record("deliver", from_=src, to=dst, type=mtype, **body)
        getattr(self, "_msg_" + mtype.replace("-", "_"))(src, target, body)

    def _msg_join_share_request(self, src, target, body):
        if target.dkg_state is None:
            return
        accept = self.config.accept_join
        if accept is not None and not accept(target.label, src):
            self.record("join-refused", node=target.label, joiner=src)
            return
        joiner = self.nodes[src].identity
        pt = join_issue(target.dkg_state, joiner)
        self.send(target.label, src, "join-share-response", x=pt.x.value, y=pt.y.value)

    def _msg_join_share_response(self, src, target, body):
        session = self._sessions.get(("join", target.label))
        if not session or not session.open or src in session.responses:
            return
        session.responses[src] = SharePoint.of(body["x"], body["y"], self.r)
        if len(session.responses) >= self.t:
            self._finish(session)

    def _msg_partial_request(self, src, target, body):
        if target.dkg_state is None:
            return
        part = partial_sign(target.dkg_state, body["message"].encode(), self.config.oracle, self.params)
        self.send(target.label, src, "partial-response", message=body["message"], point=part.value)

    def _msg_partial_response(self, src, target, body):
        session = self._sessions.get(("issue", target.label))
        if (not session or not session.open or src in session.responses
                or body["message"].encode() != session.message):
            return
        signer = self.nodes[src].identity
        session.responses[src] = PartialSignature(signer, body["point"], session.message)
        if len(session.responses) >= self.t:
            self._finish(session)

    def _msg_ciphertext(self, src, target, body):
        if target.rsa_keys is None:
            return
        d, n = target.rsa_keys.private
        self.record("decrypted", node=target.label, from_=src, plaintext=rsa_decrypt(body["c"], d, n))


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.,-]+", "-", text).strip("-")[:80] or "error"


def run_scenario(config: ScenarioConfig) -> Transcript:
    return Simulator(config).run()
