"""Tests for the HTTP API."""

import threading

import pytest

from polyopf.web import create_app


@pytest.fixture
def client(corpus_copy):
    app = create_app(corpus_copy)
    app.config["TESTING"] = True
    return app.test_client()


@pytest.fixture
def corpus_client(no_corpus_env):
    app = create_app()
    app.config["TESTING"] = True
    return app.test_client()


def test_api_listing(client):
    data = client.get("/api").get_json()
    assert set(data["endpoints"]) == {"/api", "/cases", "/cases/<name>", "/status", "/solve", "/sweep"}


def test_cases(client, corpus_copy):
    data = client.get("/cases").get_json()
    assert data["status"] == "ok"
    assert data["directory"] == str(corpus_copy)
    (case,) = data["cases"]
    assert case["name"] == "case2"
    assert case["buses"] == 2


def test_case_with_broken_file(client, corpus_copy):
    (corpus_copy / "broken.m").write_text("mpc.bus = [1 2 3];\n")
    data = client.get("/cases").get_json()
    broken = [c for c in data["cases"] if c["name"] == "broken"]
    assert "error" in broken[0]


def test_case_summary(client):
    response = client.get("/cases/case2")
    assert response.status_code == 200
    assert response.get_json()["generators"] == 1


def test_unknown_case(client):
    response = client.get("/cases/nowhere")
    assert response.status_code == 400
    assert response.get_json()["status"] == "error"


def test_status(client):
    assert client.get("/status").get_json() == {"solving": False}


def test_solve(corpus_client):
    response = corpus_client.post("/solve", json={"case": "WB2", "overrides": {"V2max": 1.022}})
    data = response.get_json()
    assert response.status_code == 200
    assert data["exit_code"] == 2
    assert data["report"]["lower_bound"] == pytest.approx(888.08, rel=1e-3)


def test_solve_rejects_bad_config(client):
    response = client.post("/solve", json={"case": "case2", "method": "digs", "formulation": "op4"})
    assert response.status_code == 400
    assert "op2" in response.get_json()["message"]


def test_solve_rejects_unknown_key(client):
    response = client.post("/solve", json={"case": "case2", "solver": "mosek"})
    assert response.status_code == 400


def test_sweep_requires_parameter(client):
    response = client.post("/sweep", json={"case": "case2"})
    assert response.status_code == 400
    assert response.get_json()["message"] == "parameter is required"


def test_sweep(corpus_client):
    response = corpus_client.post(
        "/sweep",
        json={"case": "WB2", "parameter": "V2max", "values": [1.022], "methods": ["sparse-op2-1"]},
    )
    data = response.get_json()
    assert response.status_code == 200
    assert data["parameter"] == "V2max"
    cell = data["rows"][0]["cells"]["sparse-op2-1"]
    assert cell["lower_bound"] == pytest.approx(888.08, rel=1e-3)


def test_sweep_unknown_parameter(client):
    response = client.post("/sweep", json={"case": "case2", "parameter": "V7max", "values": [1.0]})
    assert response.status_code == 400


def test_busy(client, monkeypatch):
    from polyopf.web import app as web_app

    started, release = threading.Event(), threading.Event()

    def slow_run(cfg):
        started.set()
        release.wait(10)
        raise web_app.PolyOpfError("stopped")

    monkeypatch.setattr(web_app, "run", slow_run)
    first = {}
    other = client.application.test_client()
    worker = threading.Thread(target=lambda: first.update(response=client.post("/solve", json={"case": "case2"})))
    worker.start()
    try:
        assert started.wait(10)
        assert other.get("/status").get_json() == {"solving": True}
        nested = other.post("/solve", json={"case": "case2"})
        assert nested.status_code == 409
        assert nested.get_json()["status"] == "busy"
    finally:
        release.set()
        worker.join(10)
    assert first["response"].status_code == 400
    assert first["response"].get_json()["message"] == "stopped"
