"""Configuration loading and JSONL/CSV serialization."""

import json

import pytest

from conftest import build_fixture_families
from varfam.artifacts import (
    ConfigError,
    RunConfig,
    atomic_write,
    config_from_dict,
    load_config,
    read_families_jsonl,
    write_families_jsonl,
    write_summary_csv,
)


def write_config(tmp_path, obj):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


class TestLoadConfig:
    def test_empty_object_gives_defaults(self, tmp_path):
        config = load_config(write_config(tmp_path, {}))
        assert config.strict_th == 0.73
        assert config.min_count == 10
        assert config.dimension == "user_id"

    def test_unknown_key_rejected_by_name(self, tmp_path):
        with pytest.raises(ConfigError, match="tpyo_key"):
            load_config(write_config(tmp_path, {"tpyo_key": 1}))

    def test_invariant_violation_fatal(self, tmp_path):
        with pytest.raises(ConfigError, match="min_count"):
            load_config(write_config(tmp_path, {"min_count": 0}))

    def test_type_mismatch_names_key(self, tmp_path):
        with pytest.raises(ConfigError, match="window"):
            load_config(write_config(tmp_path, {"window": "wide"}))
        with pytest.raises(ConfigError, match="lowercase"):
            load_config(write_config(tmp_path, {"lowercase": "yes"}))

    def test_mode_selection(self, tmp_path):
        config = load_config(write_config(tmp_path, {"mode": "strict"}))
        assert config.mode == "strict"
        with pytest.raises(ConfigError, match="mode"):
            load_config(write_config(tmp_path, {"mode": "fuzzy"}))

    def test_capitalized_aliases_accepted(self, tmp_path):
        config = load_config(
            write_config(
                tmp_path,
                {"SNN_MIN": 3, "open_TOPN": 12, "strict_TH": 0.8, "MAX_FREQ_RATIO": 30},
            )
        )
        assert config.snn_min == 3
        assert config.open_topn == 12
        assert config.strict_th == 0.8
        assert config.max_freq_ratio == 30.0

    def test_alias_clash_rejected(self):
        with pytest.raises(ConfigError, match="twice"):
            config_from_dict({"SNN_MIN": 3, "snn_min": 2})

    def test_sg_zero_rejected(self):
        with pytest.raises(ConfigError, match="skip-gram"):
            config_from_dict({"sg": 0})

    def test_dimension_null_disables(self):
        config = config_from_dict({"dimension": None})
        assert config.dimension is None

    def test_not_json_fatal(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_echo_contains_every_field_and_hash_stable(self):
        config = RunConfig()
        echo = config.echo()
        assert echo["strict_th"] == 0.73
        assert echo["jaccard_th"] == 0.2
        assert config.echo_hash() == RunConfig().echo_hash()
        assert config.echo_hash() != RunConfig(rng_seed=7).echo_hash()


class TestFamiliesJsonl:
    def test_empty_list_empty_file(self, tmp_path):
        path = tmp_path / "families.jsonl"
        assert write_families_jsonl([], path, "cfg") == 0
        assert path.read_bytes() == b""

    def test_pruned_families_excluded(self, tmp_path):
        families = build_fixture_families()
        path = tmp_path / "families.jsonl"
        count = write_families_jsonl(families, path, "cfg")
        assert count == 2  # the skewed family is pruned
        ids = [json.loads(line)["family_id"] for line in path.read_text().splitlines()]
        assert ids == sorted(ids)

    def test_roundtrip(self, tmp_path):
        families = build_fixture_families()
        path = tmp_path / "families.jsonl"
        write_families_jsonl(families, path, "cfg")
        loaded = read_families_jsonl(path)
        surviving = sorted(
            (f for f in families if not f.pruned), key=lambda f: f.family_id
        )
        assert [f.family_id for f in loaded] == [f.family_id for f in surviving]
        for got, expected in zip(loaded, surviving):
            assert got.members == expected.members
            assert got.frequencies == expected.frequencies
            assert got.score.size == expected.score.size
            # numeric fields match to the serialized precision
            assert got.score.cohesion == pytest.approx(expected.score.cohesion, abs=5e-7)
            for gp, ep in zip(got.pairs, sorted(expected.pairs, key=lambda p: (p.w, p.v))):
                assert (gp.w, gp.v, gp.is_edge) == (ep.w, ep.v, ep.is_edge)
                assert gp.cosine == pytest.approx(ep.cosine, abs=5e-7)
            for token in got.members:
                gs = got.dimension_stats[token]
                es = expected.dimension_stats[token]
                assert (gs.coverage, gs.top_dimension) == (es.coverage, es.top_dimension)

    def test_six_decimal_float_serialization(self, tmp_path):
        families = [f for f in build_fixture_families() if not f.pruned]
        # force a repeating-decimal cohesion: means 0.8 and 0.4 -> 8/15
        family = families[0]
        family.score.mean_cosine = 0.8
        family.score.mean_jaccard = 0.4
        family.score.cohesion = 2 * 0.8 * 0.4 / 1.2
        path = tmp_path / "families.jsonl"
        write_families_jsonl([family], path, "cfg")
        line = path.read_text(encoding="utf-8")
        assert '"cohesion": 0.533333' in line
        assert '"mean_cosine": 0.800000' in line

    def test_fixed_key_order(self, tmp_path):
        families = build_fixture_families()
        path = tmp_path / "families.jsonl"
        write_families_jsonl(families, path, "cfg")
        line = path.read_text(encoding="utf-8").splitlines()[0]
        keys = list(json.loads(line).keys())
        assert keys == ["family_id", "mode", "members", "pairs", "score", "config_echo"]
        member_keys = list(json.loads(line)["members"][0].keys())
        assert member_keys == ["token", "frequency", "coverage", "top_dimension", "top_share"]

    def test_file_ends_with_newline(self, tmp_path):
        path = tmp_path / "families.jsonl"
        write_families_jsonl(build_fixture_families(), path, "cfg")
        assert path.read_bytes().endswith(b"\n")

    def test_malformed_line_error_names_line(self, tmp_path):
        path = tmp_path / "families.jsonl"
        good = '{"family_id": "x", "mode": "strict", "members": [], "pairs": [], '
        good += '"score": {"size": 0, "mean_cosine": 0, "mean_jaccard": 0, "cohesion": 0}}'
        path.write_text(good + "\n{broken\n", encoding="utf-8")
        with pytest.raises(Exception, match="line 2"):
            read_families_jsonl(path)


class TestSummaryCsv:
    def test_members_sorted_and_joined(self, tmp_path):
        families = build_fixture_families()
        path = tmp_path / "summary.csv"
        count = write_summary_csv(families, path)
        assert count == 3  # pruned families audited too
        content = path.read_text(encoding="utf-8")
        assert "maat|mat|matt" in content

    def test_header_only_when_empty(self, tmp_path):
        path = tmp_path / "summary.csv"
        write_summary_csv([], path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines == [
            "family_id,size,mean_cosine,mean_jaccard,cohesion,members,min_freq,"
            "max_freq,freq_ratio,min_coverage,top_dimension_mode,pruned,prune_reason"
        ]

    def test_comma_in_token_quoted(self, tmp_path):
        families = build_fixture_families()
        families[0].members[0] = "mu,er"
        families[0].frequencies["mu,er"] = 10
        path = tmp_path / "summary.csv"
        write_summary_csv(families[:1], path)
        content = path.read_text(encoding="utf-8")
        assert '"' in content  # RFC-4180 quoting kicked in

    def test_pruned_column_and_reason(self, tmp_path):
        families = build_fixture_families()
        path = tmp_path / "summary.csv"
        write_summary_csv(families, path)
        rows = path.read_text(encoding="utf-8").splitlines()[1:]
        pruned_rows = [r for r in rows if ",true," in r]
        assert len(pruned_rows) == 1
        assert pruned_rows[0].endswith("freq_ratio")

    def test_agrees_with_jsonl_on_survivors(self, tmp_path):
        families = build_fixture_families()
        jsonl = tmp_path / "families.jsonl"
        csv_path = tmp_path / "summary.csv"
        write_families_jsonl(families, jsonl, "cfg")
        write_summary_csv(families, csv_path)
        jsonl_ids = {json.loads(line)["family_id"] for line in jsonl.read_text().splitlines()}
        csv_rows = csv_path.read_text(encoding="utf-8").splitlines()[1:]
        surviving_csv_ids = {r.split(",")[0] for r in csv_rows if ",false," in r}
        assert jsonl_ids == surviving_csv_ids


class TestAtomicWrite:
    def test_no_partial_file_on_failure(self, tmp_path):
        target = tmp_path / "out.txt"
        with pytest.raises(RuntimeError):
            with atomic_write(target) as handle:
                handle.write("partial")
                raise RuntimeError("boom")
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []

    def test_replaces_existing(self, tmp_path):
        target = tmp_path / "out.txt"
        target.write_text("old")
        with atomic_write(target) as handle:
            handle.write("new")
        assert target.read_text() == "new"
