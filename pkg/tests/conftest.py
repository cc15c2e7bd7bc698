from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import pytest

from deenkit.engine import Engine
from deenkit.quran import default_store

FIXTURES = Path(__file__).parent / "fixtures"
FIXED_TODAY = dt.date(2025, 3, 10)

_criteria: dict[str, tuple[str, str]] = {}


def read_jsonl(name: str) -> list[dict]:
    return [json.loads(ln) for ln in (FIXTURES / name).read_text(encoding="utf-8").splitlines() if ln.strip()]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag, title): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    tag, title = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[tag] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_criteria, key=lambda t: int(t[2:])):
        title, verdict = _criteria[tag]
        terminalreporter.write_line(f"{verdict} {tag} {title}")


@pytest.fixture(scope="session")
def store():
    return default_store()


@pytest.fixture(scope="session")
def engine(store):
    return Engine(today=lambda: FIXED_TODAY, quran_store=store).warm()


@pytest.fixture(scope="session")
def client(engine):
    from fastapi.testclient import TestClient

    from deenkit.service import create_app

    with TestClient(create_app(engine)) as c:
        yield c
