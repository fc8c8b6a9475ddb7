"""Shared fixtures."""

import numpy as np
import pytest

from polyopf.casedata import corpus_case, parse_case
from polyopf.network import build_network, build_opf_matrices

CASE2_TEXT = """function mpc = case2
mpc.version = '2';
mpc.baseMVA = 100;

mpc.bus = [
	1	3	0	0	0	0	1	1.00	0	110	1	1.05	0.95;
	2	1	10	5	0	0	1	1.00	0	110	1	1.05	0.95;
];

mpc.gen = [
	1	0	0	10	-10	1.00	100	1	50	0;
];

mpc.branch = [
	1	2	0.01	0.05	0	100	100	100	0	0	1	-360	360;
];

mpc.gencost = [
	2	0	0	3	0.01	20	0;
];
"""


@pytest.fixture
def case2_text():
    return CASE2_TEXT


@pytest.fixture
def case2():
    return parse_case(CASE2_TEXT)


@pytest.fixture
def case2_file(tmp_path):
    path = tmp_path / "case2.m"
    path.write_text(CASE2_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def wb2():
    return corpus_case("WB2", V2max=1.022)


@pytest.fixture
def wb2_net(wb2):
    net = build_network(wb2)
    return net, build_opf_matrices(net)


@pytest.fixture
def lmbm3_net():
    net = build_network(corpus_case("LMBM3", S23max=28.35))
    return net, build_opf_matrices(net)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def corpus_copy(tmp_path):
    """A writable corpus directory holding only the 2-bus test case."""
    directory = tmp_path / "cases"
    directory.mkdir()
    (directory / "case2.m").write_text(CASE2_TEXT, encoding="utf-8")
    return directory


@pytest.fixture
def no_corpus_env(monkeypatch):
    monkeypatch.delenv("POLYOPF_CASES", raising=False)

