from __future__ import annotations

import json
import subprocess
import sys
from importlib import resources

import pytest

from deenkit.cli import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main, parse_heirs

from conftest import FIXTURES

ROUTER_EVAL = str(resources.files("deenkit.data").joinpath("router_eval.jsonl"))


def _json(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.parametrize(
    "argv",
    [
        ["ask", "What is the dua before eating?"],
        ["route", "How much zakat on 5000 dollars?"],
        ["zakat", "--cash", "10000", "--gold-price", "75", "--silver-price", "0.9"],
        ["inherit", "--heirs", "husband=1,daughter=2", "--estate", "1200"],
        ["quran", "112:1-4"],
        ["prayer", "--location", "Cairo", "--date", "2025-03-10"],
        ["qibla", "--lat", "51.5", "--lon", "-0.12"],
        ["calendar", "--gregorian", "2025-06-26"],
        ["dua", "dua when it rains"],
    ],
)
def test_commands_succeed(argv, capsys):
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out.strip()


def test_json_flag_after_subcommand(capsys):
    code, body = _json(capsys, ["zakat", "--cash", "10000", "--gold-price", "75", "--silver-price", "0.9", "--json"])
    assert code == EXIT_OK and body["monetary_due"] == "250.00"


def test_calendar_json(capsys):
    code, body = _json(capsys, ["--json", "calendar", "--hijri", "1447-01-01"])
    assert code == EXIT_OK and body["gregorian"] == "2025-06-26"


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["zakat", "--cash"], ["prayer", "--asr-factor", "3"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["zakat", "--cash", "-1"],
        ["inherit", "--heirs", "husband=1,wife=1"],
        ["quran", "115:1", "--subtype", "specific_verse"],
        ["calendar", "--gregorian", "1800-01-01"],
        ["ask", "  "],
        ["eval-router", "/nonexistent/labels.jsonl"],
    ],
)
def test_validation_errors(argv, capsys):
    assert main(argv) == EXIT_VALIDATION


def test_bad_config_file_is_validation_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{broken", encoding="utf-8")
    assert main(["route", "salam", "--config", str(cfg)]) == EXIT_VALIDATION


def test_config_file_applies(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"prayer": {"method": "ISNA"}}', encoding="utf-8")
    code, body = _json(capsys, ["prayer", "--location", "Cairo", "--config", str(cfg), "--json"])
    assert code == EXIT_OK and body["method"] == "ISNA"


def test_internal_error_exit_code(monkeypatch, capsys):
    import deenkit.cli as cli

    def boom(args):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(cli, "run", boom)
    assert cli.main(["route", "salam"]) == EXIT_INTERNAL


def test_eval_commands(capsys):
    code, body = _json(capsys, ["eval-router", ROUTER_EVAL, "--json"])
    assert code == EXIT_OK and body["total"] == 50
    code, body = _json(capsys, ["eval-nl2sql", str(FIXTURES / "nl2sql_gold.jsonl"), str(FIXTURES / "nl2sql_pred.jsonl"), "--json"])
    assert code == EXIT_OK and body["accuracy"] == pytest.approx(0.8)


def test_ingest_quran(tmp_path, capsys):
    code, body = _json(capsys, ["ingest-quran", "--db", str(tmp_path / "q.sqlite"), "--json"])
    assert code == EXIT_OK and body["verses"] == 6236


def test_parse_heirs_forms():
    assert parse_heirs("husband=1, daughter=2") == {"husband": 1, "daughter": 2}
    assert parse_heirs('{"son": 1}') == {"son": 1}


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "deenkit", "route", "salam"], capture_output=True, text=True, timeout=120)
    assert out.returncode == EXIT_OK, out.stderr
    assert "greeting" in out.stdout
