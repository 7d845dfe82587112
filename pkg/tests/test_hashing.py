import hashlib

import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from manetpki.errors import FixtureError
from manetpki.hashing import (HashOracle, digest_to_range, hash_to_point, hash_to_range,
                              load_fixtures, parse_fixtures, try_and_increment)
from manetpki.resources import data_path


class TestFixtures:
    @pytest.mark.parametrize("label,value", [("Node1", 37), ("Node2", 54), ("Node3", 25),
                                             ("Node4", 17), ("Node5", 27)])
    def test_identity_hashes(self, oracle, label, value):
        assert oracle.hash_to_range(label, 67) == value

    def test_message_point(self, oracle, params):
        assert oracle.hash_to_point("Node189649", params).coords() == (163, 1362)

    def test_supplementary_points_equal_computed(self, oracle, params):
        for msg in ("Node217321", "Node363115", "Node491202", "Node5591"):
            assert oracle.hash_to_point(msg, params) == try_and_increment(msg, params)

    def test_unpinned_input_raises(self, oracle, params):
        with pytest.raises(FixtureError, match="Node9"):
            oracle.hash_to_range("Node9", 67)
        with pytest.raises(FixtureError):
            oracle.hash_to_point("Node9", params)

    def test_bytes_and_str_agree(self, oracle):
        assert oracle.hash_to_range(b"Node3", 67) == oracle.hash_to_range("Node3", 67)

    def test_out_of_range_fixture(self, params):
        bad = parse_fixtures("N\trange\t70\n", params)
        with pytest.raises(FixtureError, match="outside"):
            bad.hash_to_range("N", 67)

    @pytest.mark.parametrize("text,needle", [
        ("N\tpoint\t1,1\n", "x.fix:1"),              # off the curve
        ("# c\nN\tpoint\t3198,578\n", "x.fix:2"),    # on the curve, order 4020
        ("N\trange\tseven\n", "x.fix:1"),
        ("N range 7\n", "x.fix:1"),
        ("N\trange\t7\nN\trange\t8\n", "x.fix:2"),
        ("N\tcolour\t7\n", "x.fix:1"),
    ])
    def test_malformed_lines_are_named(self, params, text, needle):
        with pytest.raises(FixtureError, match=needle):
            parse_fixtures(text, params, source="x.fix")

    def test_missing_file(self, params, tmp_path):
        with pytest.raises(FixtureError):
            load_fixtures(tmp_path / "absent", params)

    def test_shipped_file_loads(self, params):
        fx = load_fixtures(data_path("e4019.fixtures"), params)
        assert len(fx.ranges) == 5 and len(fx.points) == 5


class TestComputed:
    def test_range_is_sha256_mod_r(self):
        expected = int.from_bytes(hashlib.sha256(b"HTRNode1").digest(), "big") % 67
        assert digest_to_range("Node1", 67) == expected
        assert hash_to_range("Node1", 67) == expected

    def test_point_matches_independent_try_and_increment(self, params):
        msg = b"hello"
        counter = 0
        while True:
            h = hashlib.sha256(b"HTP" + msg + counter.to_bytes(4, "big")).digest()
            counter += 1
            x = int.from_bytes(h, "big") % 4019
            roots = [y for y in range(4019) if y * y % 4019 == (x ** 3 + 1) % 4019]
            if roots:
                break
        base = params.point(x, min(roots))
        assert hash_to_point(msg, params) == 60 * base

    @given(st.binary(max_size=40))
    def test_point_in_subgroup(self, msg):
        from manetpki.curve import default_params
        params = default_params()
        pt = try_and_increment(msg, params)
        assert not pt.is_infinity and params.in_subgroup(pt)

    @given(st.binary(max_size=40))
    def test_deterministic(self, msg):
        assert digest_to_range(msg, 67) == digest_to_range(msg, 67)

    def test_range_uniformity(self):
        counts = [0] * 67
        for i in range(67 * 200):
            counts[digest_to_range(f"msg{i}", 67).value] += 1
        assert chisquare(counts).pvalue > 1e-3

    def test_oracle_modes(self):
        assert HashOracle.computed().mode == "computed"
        with pytest.raises(ValueError):
            HashOracle("sha3")
        with pytest.raises(ValueError):
            HashOracle("computed", ranges={"a": 1})


def test_computed_range_many_inputs():
    values = [hash_to_range(f"input-{i}", 67) for i in range(1000)]
    assert all(0 <= v.value < 67 for v in values)
