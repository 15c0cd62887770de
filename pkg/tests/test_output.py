"""Tests for deterministic serialization and manifests."""

import json

import pytest

from bb84_weakrand.errors import ValidationError
from bb84_weakrand.output import (
    RunManifest,
    canonical_json,
    checksum_of,
    csv_text,
    flatten,
    format_float,
)


class TestFormatFloat:
    def test_nine_significant_digits(self):
        assert format_float(0.09839195449621376) == "0.0983919545"
        assert format_float(0.6641675996266032) == "0.6641676"
        assert format_float(1.0 / 3.0) == "0.333333333"

    def test_integral_floats_keep_marker(self):
        assert format_float(1.0) == "1.0"
        assert format_float(-3.0) == "-3.0"

    def test_zero_normalized(self):
        assert format_float(0.0) == "0.0"
        assert format_float(-0.0) == "0.0"

    def test_scientific_notation_preserved(self):
        assert format_float(1e-07) == "1e-07"

    def test_round_trip_stability(self, rng):
        for x in rng.uniform(-1.0, 1.0, size=2000):
            text = format_float(float(x))
            assert format_float(float(text)) == text

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            format_float(float("nan"))
        with pytest.raises(ValidationError):
            format_float(float("inf"))


class TestCanonicalJson:
    def test_keys_sorted(self):
        text = canonical_json({"b": 1, "a": 2})
        assert text.index('"a"') < text.index('"b"')

    def test_no_trailing_whitespace(self):
        text = canonical_json({"a": [1, 2.5, None, True], "b": {"c": "x"}})
        assert all(line == line.rstrip() for line in text.split("\n"))
        assert not text.endswith("\n")

    def test_parse_reserialize_identity(self):
        doc = {"rate": 0.0984, "nested": {"values": [1, 2.0, None], "flag": False}}
        text = canonical_json(doc)
        assert canonical_json(json.loads(text)) == text

    def test_empty_containers(self):
        assert canonical_json({}) == "{}"
        assert canonical_json([]) == "[]"

    def test_unknown_type_rejected(self):
        with pytest.raises(TypeError):
            canonical_json({"x": object()})


class TestCsv:
    def test_header_and_lf_endings(self):
        text = csv_text(["a", "b"], [[1, 2.5], ["x", None]])
        assert text == "a,b\n1,2.5\nx,\n"

    def test_quoting(self):
        text = csv_text(["v"], [["a,b"], ['say "hi"']])
        assert text.split("\n")[1] == '"a,b"'
        assert text.split("\n")[2] == '"say ""hi"""'

    def test_booleans_as_bits(self):
        assert csv_text(["v"], [[True], [False]]) == "v\n1\n0\n"


class TestFlatten:
    def test_paths(self):
        doc = {"b": {"c": 1}, "a": [10, {"d": 2}]}
        assert flatten(doc) == [("a[0]", 10), ("a[1].d", 2), ("b.c", 1)]


class TestRunManifest:
    def test_checksum_tracks_payload(self):
        payload = canonical_json({"rate": 0.5})
        manifest = RunManifest.build("rate", {"qber": 0.1}, "0.1.0", 7, payload)
        assert manifest.checksum == checksum_of(payload)
        assert manifest.to_dict()["seed"] == 7

    def test_timestamp_not_in_checksum(self):
        payload = canonical_json({"rate": 0.5})
        first = RunManifest.build("rate", {}, "0.1.0", None, payload)
        second = RunManifest.build("rate", {}, "0.1.0", None, payload)
        assert first.checksum == second.checksum
