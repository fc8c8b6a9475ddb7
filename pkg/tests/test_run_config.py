"""Tests for run configuration parsing, validation and storage."""

import math

import pytest

from polyopf.errors import ConfigError
from polyopf.run_config import RunConfig, parse_method_spec, parse_override


class TestParsing:
    def test_override(self):
        assert parse_override("V2max=1.022") == ("V2max", 1.022)
        assert parse_override(" S2-3max = 28.35") == ("S2-3max", 28.35)

    @pytest.mark.parametrize("text", ["V2max", "=1.0", "V2max=high"])
    def test_bad_override(self, text):
        with pytest.raises(ConfigError):
            parse_override(text)

    def test_method_spec(self):
        assert parse_method_spec("sparse-op4-2") == ("sparse", "op4", 2)
        assert parse_method_spec("lavaei-low-op2-1") == ("lavaei-low", "op2", 1)

    @pytest.mark.parametrize("spec", ["sparse", "sparse-op4-two"])
    def test_bad_method_spec(self, spec):
        with pytest.raises(ConfigError):
            parse_method_spec(spec)


class TestValidation:
    def test_defaults_are_valid(self):
        cfg = RunConfig().validate()
        assert cfg.spec == "sparse-op2-1"

    @pytest.mark.parametrize(
        "changes",
        [
            {"method": "sdp"},
            {"formulation": "op3"},
            {"output": "xml"},
            {"method": "digs", "formulation": "op4"},
            {"method": "lavaei-low", "formulation": "op4"},
            {"method": "sparse", "decompose": True},
            {"level": 0},
            {"eps": -1.0},
            {"eps": math.nan},
            {"time_budget": 0.0},
            {"jobs": 0},
            {"case": ""},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises(ConfigError):
            RunConfig(**changes).validate()

    def test_infinite_eps_is_allowed(self):
        RunConfig(method="digs", eps=math.inf).validate()

    def test_with_method_and_override(self):
        cfg = RunConfig(overrides={"V2max": 1.022})
        other = cfg.with_method("dense-op4-2").with_override("Pd2", 350)
        assert (other.method, other.formulation, other.level) == ("dense", "op4", 2)
        assert other.overrides == {"V2max": 1.022, "Pd2": 350.0}
        assert cfg.overrides == {"V2max": 1.022}


class TestStorage:
    def test_save_and_load(self, tmp_path):
        cfg = RunConfig(case="LMBM3", formulation="op4", overrides={"S23max": 28.35}, eps=math.inf)
        path = tmp_path / "runs" / "lmbm3.toml"
        cfg.save(path)
        loaded = RunConfig.load(path)
        assert loaded == cfg
        assert loaded.eps == math.inf

    def test_missing_file_gives_defaults(self, tmp_path):
        assert RunConfig.load(tmp_path / "absent.toml") == RunConfig()

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('case = "WB2"\nsolver = "mosek"\n')
        with pytest.raises(ConfigError, match="solver"):
            RunConfig.load(path)

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("case = \n")
        with pytest.raises(ConfigError):
            RunConfig.load(path)

    def test_save_without_path(self):
        with pytest.raises(ValueError):
            RunConfig().save()

    def test_from_dict_coerces_numbers(self):
        cfg = RunConfig.from_dict({"level": "2", "overrides": {"V2max": "0.976"}, "eps": 1})
        assert cfg.level == 2
        assert cfg.overrides == {"V2max": 0.976}
        assert cfg.eps == 1.0
