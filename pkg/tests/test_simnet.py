import random

import pytest

from manetpki.algebra import SymmetricBivariatePolynomial
from manetpki.dkg import audit_ceremony
from manetpki.errors import ConfigError, ParseError, UnknownQueryError
from manetpki.resources import data_path
from manetpki.simnet import Record, Transcript, extract, load_scenario, parse_scenario, run_scenario

HEADER = """
[scenario]
name = t
hash_mode = computed
degree = 2
seed = 3

[founders]
A B C D

[links]
full
"""

SETUP_KINDS = {"scenario", "identity", "commitment", "row", "public-key", "rsa-keygen",
               "setup-complete", "state"}


def scenario(events="", header=HEADER, **kw):
    return parse_scenario(header + "\n[events]\n" + events, **kw)


def run(events="", **kw):
    return run_scenario(scenario(events, **kw))


class TestWorkedExample:
    def test_golden_transcript(self, example_run):
        assert example_run.text() == data_path("paper-example.transcript").read_text()

    @pytest.mark.parametrize("query,value", [
        ("share:Node1", 41), ("share:Node2", 47), ("share:Node3", 21), ("share:Node4", 30),
        ("hash:Node5", 27), ("pk", (2651, 2267)), ("signature:Node1", (2350, 3239)),
        ("decrypted:Node3", 56), ("ciphertext:Node1:Node3", 21), ("threshold", 3),
        ("rsa:Node3", (63, 115)), ("commitment:Node2", (409, 2266)),
        ("verified:Node3:Node1", True), ("certified:Node5", True), ("status:Node5", "active"),
    ])
    def test_extract(self, example_run, query, value):
        assert extract(example_run, query) == value

    def test_joiner_row(self, example_run):
        assert extract(example_run, "rowpoly:Node5").serialize() == "2,18,17"

    @pytest.mark.parametrize("query", ["bogus", "share", "share:Nobody", "pk:x", "colour:Node1"])
    def test_unknown_queries(self, example_run, query):
        with pytest.raises(UnknownQueryError):
            extract(example_run, query)

    def test_extract_matches_terminal_state(self, example_run):
        for label, node in example_run.nodes.items():
            assert extract(example_run, f"share:{label}") == node.dkg_state.share.value
            assert extract(example_run, f"rowpoly:{label}") == node.dkg_state.row_poly
            assert extract(example_run, f"hash:{label}") == node.identity.hash.value
            assert extract(example_run, f"status:{label}") == node.status
            assert extract(example_run, f"rsa:{label}") == node.rsa_keys.public
            assert extract(example_run, f"signature:{label}") == node.certificate.signature.coords()
            assert extract(example_run, f"certified:{label}") == (node.certificate is not None)
        assert extract(example_run, "pk") == example_run.info.public_key.coords()
        assert extract(example_run, "threshold") == example_run.info.threshold

    def test_parse_roundtrip(self, example_run):
        again = Transcript.parse(example_run.text())
        assert again.text() == example_run.text()
        assert extract(again, "share:Node4") == 30
        assert again.params() == example_run.info.params


class TestScenarios:
    def test_empty_script_is_only_setup(self):
        t = run()
        assert {rec.kind for rec in t.records} <= SETUP_KINDS

    def test_deterministic(self):
        events = "1 issue A\n2 join E A B C\n8 issue E\n"
        assert run(events).text() == run(events).text()

    def test_seed_changes_randomness(self):
        a = run_scenario(scenario())
        cfg = scenario()
        cfg.seed = 4
        assert a.text() != run_scenario(cfg).text()

    def test_verify_unissued_certificate(self):
        t = run("1 verify A B\n")
        (rec,) = t.of_kind("verify-failed")
        assert rec.get("reason") == "no-certificate"

    def test_join_with_too_few_neighbours(self):
        t = run("1 join E A B\n")
        (rec,) = t.of_kind("join-failed")
        assert rec.get("reason") == "insufficient-responders"
        assert "E" not in t.nodes
        with pytest.raises(UnknownQueryError):
            extract(t, "status:E")

    def test_departure_mid_issuance_retries(self):
        # B is asked first, leaves before answering, C D reply; then A re-asks
        t = run("1 issue A\n1 depart B\n")
        assert t.of_kind("timeout")
        (rec,) = t.of_kind("certificate-issued")
        assert "B" not in rec.get("signers").split(",")

    def test_departures_leave_too_few(self):
        t = run("1 depart B\n1 depart C\n2 issue A\n")
        (rec,) = t.of_kind("issue-failed")
        assert rec.get("reason") == "insufficient-responders"

    def test_own_partial_used_when_needed(self):
        t = run("1 depart B\n2 issue A\n")
        assert t.of_kind("partial-own") and t.of_kind("certificate-issued")

    def test_send_requires_certificate(self):
        t = run("1 send A B 5\n")
        assert t.of_kind("send-failed")[0].get("reason") == "no-certificate"

    def test_send_after_issue(self):
        t = run("1 issue B\n5 verify A B\n6 send A B 5\n")
        assert extract(t, "decrypted:B") == 5

    def test_lossy_network_records_failures(self):
        cfg = scenario("1 issue A\n")
        cfg.drop_probability = 1.0
        t = run_scenario(cfg)
        assert t.of_kind("dropped") and t.of_kind("issue-failed")

    def test_refusing_members(self):
        cfg = scenario("1 join E A B C D\n")
        cfg.accept_join = lambda member, joiner: member != "A"
        t = run_scenario(cfg)
        assert t.of_kind("join-refused") and t.of_kind("joined")
        assert "A" not in t.of_kind("joined")[0].get("responders")

    def test_unlink_and_link(self):
        t = run("1 unlink A B\n1 unlink A C\n2 issue A\n3 link A B\n9 issue A\n")
        # with only D adjacent, A plus D is one short of t = 3
        (failed,) = t.of_kind("issue-failed")
        assert failed.time == 2 and failed.get("reason") == "insufficient-responders"
        (issued,) = t.of_kind("certificate-issued")
        assert issued.time > 9 and extract(t, "certified:A")

    def test_churn_keeps_rows_consistent(self):
        t = run_scenario(load_scenario("churn"))
        states = {rec.get("node"): rec for rec in t.of_kind("state")}
        active = [k for k, rec in states.items() if rec.get("status") == "active"]
        for a in active:
            for b in active:
                ha, hb = extract(t, f"hash:{a}"), extract(t, f"hash:{b}")
                assert extract(t, f"rowpoly:{a}")(hb) == extract(t, f"rowpoly:{b}")(ha)


class TestSafety:
    def scan(self, transcript, master):
        s = master.constant_term().value
        forbidden = {master.serialize(), master.row(0).serialize()}
        for rec in transcript.records:
            for key, value in rec.fields:
                assert key not in ("secret", "s", "master", "F")
                assert value not in forbidden
            if rec.kind == "row":
                assert rec.get("to") != "0"
        # no node's row is the row through 0, which would reveal s directly
        for node in transcript.nodes.values():
            if node.dkg_state is not None:
                assert node.identity.hash.value != 0

    def test_worked_example(self, example_run):
        cfg = load_scenario(data_path("paper-example.scn"))
        master, s = audit_ceremony(cfg.polynomials.values())
        assert s == 24
        self.scan(example_run, master)

    @pytest.mark.parametrize("seed", range(5))
    def test_injected_random_polynomials(self, seed):
        rng = random.Random(seed)
        cfg = scenario("1 issue A\n2 join E A B C\n8 issue E\n")
        cfg.polynomials = {k: SymmetricBivariatePolynomial.random(2, 67, rng) for k in "ABCD"}
        t = run_scenario(cfg)
        master, _ = audit_ceremony(cfg.polynomials.values())
        self.scan(t, master)


class TestConfig:
    def test_threshold_above_founders(self):
        with pytest.raises(ConfigError, match="exceeds founding count"):
            run_scenario(scenario(header=HEADER.replace("degree = 2", "degree = 4")))

    def test_field_order_mismatch(self):
        cfg = scenario()
        cfg.share_field_order = 71
        with pytest.raises(ConfigError, match="share field order"):
            run_scenario(cfg)

    def test_tick_zero_reserved(self):
        with pytest.raises(ConfigError, match="tick 0"):
            run_scenario(scenario("0 issue A\n"))

    def test_unknown_link(self):
        with pytest.raises(ConfigError, match="unknown node"):
            run_scenario(parse_scenario(HEADER + "A Z\n"))

    def test_degenerate_injected_key(self):
        cfg = scenario()
        cfg.polynomials = {k: SymmetricBivariatePolynomial.zero(2, 67) for k in "ABCD"}
        with pytest.raises(ConfigError, match="degenerate"):
            run_scenario(cfg)

    @pytest.mark.parametrize("text,needle", [
        ("degree = 2\n", "content before"),
        ("[scenario]\ndegree = 2\n[weather]\n", "unknown section"),
        ("[scenario]\ncolour = blue\n", ":2: unknown setting"),
        ("[scenario]\ndegree = two\n", ":2: bad value"),
        ("[scenario]\ndegree = 2\n[events]\n1 fly A\n", ":4: unknown verb"),
        ("[scenario]\ndegree = 2\n[events]\nx issue A\n", ":4: bad tick"),
        ("[scenario]\ndegree = 2\n[events]\n1 issue\n", ":4: wrong number"),
        ("[scenario]\n", "missing setting 'degree'"),
    ])
    def test_parse_errors(self, text, needle):
        with pytest.raises(ParseError, match=needle):
            parse_scenario(text, source="s.scn")

    def test_missing_scenario(self):
        with pytest.raises(ConfigError):
            load_scenario("no-such-scenario")


def test_record_roundtrip():
    rec = Record.parse("4 send from=A to=B ciphertext=21")
    assert str(rec) == "4 send from=A to=B ciphertext=21" and rec.get("to") == "B"
    with pytest.raises(ParseError):
        Record.parse("x send")
    with pytest.raises(ParseError):
        Record.parse("4 send junk")
