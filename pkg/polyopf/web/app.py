"""Flask web application for polyopf."""

import threading
from pathlib import Path
from typing import Optional

from flask import Flask, jsonify, request

from ..casedata import corpus_dir, list_corpus, load_case
from ..errors import PolyOpfError
from ..pipeline import run, sweep
from ..run_config import RunConfig


def create_app(corpus_directory: Optional[Path] = None) -> Flask:
    """Create and configure the Flask application.

    Args:
        corpus_directory: Case directory (defaults to the corpus lookup of
            ``polyopf.casedata``)

    Returns:
        Configured Flask application
    """
    app = Flask(__name__)
    solving = threading.Lock()

    def directory() -> Path:
        return Path(corpus_directory) if corpus_directory else corpus_dir()

    def resolve(name: str) -> str:
        """Corpus names map to files of this app's directory; paths pass through."""
        path = directory() / f"{name}.m"
        return str(path) if path.exists() else name

    def error(exc: Exception):
        return jsonify({"status": "error", "message": str(exc)}), 400

    def busy():
        return jsonify({"status": "busy", "message": "A solve is already running"}), 409

    @app.route("/api")
    def api_info():
        """Show available API endpoints."""
        return jsonify({
            "endpoints": {
                "/api": "GET - This listing",
                "/cases": "GET - Case corpus with sizes",
                "/cases/<name>": "GET - Summary of one case",
                "/status": "GET - Whether a solve is running",
                "/solve": "POST - Run one configuration (RunConfig JSON)",
                "/sweep": "POST - Sweep an override {case, parameter, values, methods, overrides}",
            }
        })

    @app.route("/cases", methods=["GET"])
    def cases():
        """List the corpus with bus, branch and generator counts."""
        listing = []
        for name in list_corpus(directory()):
            try:
                listing.append(load_case(directory() / f"{name}.m").summary())
            except PolyOpfError as exc:
                listing.append({"name": name, "error": str(exc)})
        return jsonify({"status": "ok", "directory": str(directory()), "cases": listing})

    @app.route("/cases/<name>", methods=["GET"])
    def case_summary(name: str):
        try:
            case = load_case(resolve(name))
        except PolyOpfError as exc:
            return error(exc)
        return jsonify({"status": "ok", **case.summary()})

    @app.route("/status", methods=["GET"])
    def status():
        return jsonify({"solving": solving.locked()})

    @app.route("/solve", methods=["POST"])
    def solve_case():
        """Run one configuration and return its BoundReport."""
        data = request.get_json(silent=True) or {}
        try:
            cfg = RunConfig.from_dict(data)
            cfg.case = resolve(cfg.case)
            cfg.validate()
        except PolyOpfError as exc:
            return error(exc)

        if not solving.acquire(blocking=False):
            return busy()
        try:
            report = run(cfg)
        except PolyOpfError as exc:
            return error(exc)
        finally:
            solving.release()
        return jsonify({"status": "ok", "exit_code": report.exit_code, "report": report.to_dict()})

    @app.route("/sweep", methods=["POST"])
    def sweep_case():
        """Sweep one override; failing cells are reported inside the table."""
        data = request.get_json(silent=True) or {}
        parameter = data.get("parameter")
        if not parameter:
            return jsonify({"status": "error", "message": "parameter is required"}), 400
        try:
            cfg = RunConfig.from_dict(
                {k: v for k, v in data.items() if k not in ("parameter", "values", "methods")}
            )
            cfg.case = resolve(cfg.case)
            cfg.validate()
            values = [float(v) for v in data.get("values", [])]
        except (PolyOpfError, TypeError, ValueError) as exc:
            return error(exc)

        if not solving.acquire(blocking=False):
            return busy()
        try:
            table = sweep(cfg, parameter, values, data.get("methods") or [cfg.spec])
        except PolyOpfError as exc:
            return error(exc)
        finally:
            solving.release()
        return jsonify({"status": "ok", **table.to_dict()})

    return app
