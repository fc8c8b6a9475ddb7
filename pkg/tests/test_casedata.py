"""Tests for MATPOWER case parsing, the corpus and overrides."""

import pytest

from polyopf.casedata import (
    apply_overrides,
    corpus_case,
    format_case,
    list_corpus,
    load_case,
    parse_case,
)
from polyopf.config import CORPUS_NAMES
from polyopf.errors import (
    CaseInvariantError,
    DegenerateBranchError,
    MissingBlockError,
    NonNumericTokenError,
    OverrideError,
    RowArityError,
    UnknownBusError,
    UnknownCaseError,
    UnsupportedCaseFeatureError,
)


class TestParser:
    """Parsing MATPOWER text."""

    def test_parse_sizes_and_values(self, case2):
        assert case2.name == "case2"
        assert case2.base_mva == 100.0
        assert case2.num_buses == 2
        assert case2.bus_rows[1].pd == 10.0
        assert case2.bus_rows[1].qd == 5.0
        assert case2.gen_rows[0].pmax == 50.0
        assert case2.gen_rows[0].qmin == -10.0
        assert case2.branch_rows[0].rate_a == 100.0
        cost = case2.gencost_rows[0]
        assert (cost.c2, cost.c1, cost.c0) == (0.01, 20.0, 0.0)

    def test_bus_index_maps_file_ids(self):
        text = (
            "mpc.baseMVA = 100;\n"
            "mpc.bus = [\n"
            "  10 3 0 0 0 0 1 1 0 1 1 1.1 0.9;\n"
            "  20 1 5 1 0 0 1 1 0 1 1 1.1 0.9;\n"
            "];\n"
            "mpc.gen = [10 0 0 10 -10 1 100 1 50 0];\n"
            "mpc.branch = [10 20 0.01 0.1 0 0 0 0 0 0 1 -360 360];\n"
            "mpc.gencost = [2 0 0 3 0 1 0];\n"
        )
        case = parse_case(text, name="renumbered")
        assert case.name == "renumbered"
        assert case.bus_index == {10: 0, 20: 1}

    def test_comments_and_continuations(self, case2_text):
        text = case2_text.replace(
            "1	0	0	10	-10	1.00	100	1	50	0;",
            "1	0	0	10 ...   continued\n	-10	1.00	100	1	50	0; % trailing comment",
        )
        case = parse_case(text)
        assert case.gen_rows[0].qmin == -10.0
        assert case.gen_rows[0].pmax == 50.0

    def test_missing_block(self, case2_text):
        text = case2_text.replace("mpc.gencost", "mpc.othercost")
        with pytest.raises(MissingBlockError):
            parse_case(text)

    def test_short_row(self, case2_text):
        text = case2_text.replace("1	0	0	10	-10	1.00	100	1	50	0;", "1	0	0	10	-10;")
        with pytest.raises(RowArityError) as info:
            parse_case(text)
        assert info.value.block == "gen"

    def test_non_numeric_token(self, case2_text):
        text = case2_text.replace("0.01	0.05", "0.01	abc")
        with pytest.raises(NonNumericTokenError) as info:
            parse_case(text)
        assert info.value.token == "abc"

    def test_generator_at_unknown_bus(self, case2_text):
        text = case2_text.replace("1	0	0	10	-10	1.00", "7	0	0	10	-10	1.00")
        with pytest.raises(UnknownBusError):
            parse_case(text)

    def test_piecewise_linear_cost_rejected(self, case2_text):
        text = case2_text.replace("2	0	0	3	0.01	20	0;", "1	0	0	2	0	0	50	1000;")
        with pytest.raises(UnsupportedCaseFeatureError):
            parse_case(text)

    def test_zero_impedance_branch(self, case2_text):
        text = case2_text.replace("1	2	0.01	0.05", "1	2	0	0")
        with pytest.raises(DegenerateBranchError):
            parse_case(text)

    def test_linear_cost_padded(self, case2_text):
        text = case2_text.replace("2	0	0	3	0.01	20	0;", "2	0	0	2	20	5;")
        cost = parse_case(text).gencost_rows[0]
        assert (cost.c2, cost.c1, cost.c0) == (0.0, 20.0, 5.0)

    def test_format_then_parse_preserves_case(self):
        case = corpus_case("LMBM3")
        assert parse_case(format_case(case)) == case


class TestCorpus:
    """The bundled corpus and lookups."""

    def test_corpus_lists_bundled_cases(self, no_corpus_env):
        names = list_corpus()
        for name in CORPUS_NAMES:
            assert name in names

    def test_every_bundled_case_parses(self, no_corpus_env):
        for name in CORPUS_NAMES:
            case = corpus_case(name)
            assert case.num_buses >= 2
            assert case.gen_rows

    def test_case_insensitive_lookup(self, no_corpus_env):
        assert corpus_case("wb2").name == "WB2"

    def test_unknown_case(self, no_corpus_env):
        with pytest.raises(UnknownCaseError):
            corpus_case("case99999")

    def test_env_var_directory(self, monkeypatch, corpus_copy):
        monkeypatch.setenv("POLYOPF_CASES", str(corpus_copy))
        assert list_corpus() == ["case2"]
        assert corpus_case("case2").num_buses == 2

    def test_load_case_by_path(self, case2_file):
        case = load_case(case2_file, {"V2max": 1.01})
        assert case.bus_rows[1].vmax == 1.01

    def test_summary(self, wb2):
        info = wb2.summary()
        assert info["name"] == "WB2"
        assert info["buses"] == 2
        assert info["generators"] == 1
        assert info["branches"] == 1
        assert info["flow_limited"] == 0
        assert info["total_load_mw"] == 350.0


class TestOverrides:
    """Sweep parameters applied on top of a case."""

    def test_wb2_voltage_ceiling(self, no_corpus_env):
        case = corpus_case("WB2", V2max=0.976)
        assert case.bus_rows[case.bus_index[2]].vmax == 0.976

    def test_lmbm3_flow_limit(self, no_corpus_env):
        case = corpus_case("LMBM3", S23max=53.60)
        limited = [br for br in case.branch_rows if {br.from_bus, br.to_bus} == {2, 3}]
        assert [br.rate_a for br in limited] == [53.60]

    def test_lmbm3_long_flow_key(self, no_corpus_env):
        case = corpus_case("LMBM3", {"S2-3max": 28.35})
        assert case.summary()["flow_limited"] == 1

    def test_wb5_reactive_floor(self, no_corpus_env):
        case = corpus_case("WB5", Q5min=-20.51)
        gen = [g for g in case.gen_rows if g.bus_id == 5][0]
        assert gen.qmin == -20.51

    def test_demand_override(self, case2):
        case = apply_overrides(case2, {"Pd2": 12.5})
        assert case.bus_rows[1].pd == 12.5
        assert case2.bus_rows[1].pd == 10.0

    def test_unrecognised_key(self, case2):
        with pytest.raises(OverrideError):
            apply_overrides(case2, {"X2max": 1.0})

    def test_missing_branch(self, case2):
        with pytest.raises(OverrideError):
            apply_overrides(case2, {"S1-9max": 10.0})

    def test_no_generator_at_bus(self, case2):
        with pytest.raises(OverrideError):
            apply_overrides(case2, {"Q2min": 0.0})

    def test_override_breaking_bounds(self, case2):
        with pytest.raises(CaseInvariantError):
            apply_overrides(case2, {"V2max": 0.9})
