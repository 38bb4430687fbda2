from pathlib import Path

import pytest
from hypothesis import settings

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
GOLDEN = Path(__file__).resolve().parent / "golden"

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIOS


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


# --- acceptance report -------------------------------------------------------
# Tests marked ``criterion(n, title)`` are folded into one PASS/FAIL line per
# criterion, printed at the end of the session together with recorded details.

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.skipped:
        return
    if rep.when != "call" and not rep.failed:
        return
    entry = _CRITERIA.setdefault(mark.args[0], {"title": mark.args[1], "ok": True, "notes": []})
    entry["ok"] = entry["ok"] and rep.passed
    if rep.when == "call":
        entry["notes"] += [str(v) for k, v in item.user_properties if k == "detail"]
    if rep.failed:
        entry["notes"].append(f"{item.name} failed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "PASS" if e["ok"] else "FAIL"
        notes = "; ".join(e["notes"])
        terminalreporter.write_line(f"[{status}] {num:>2}. {e['title']}" + (f" | {notes}" if notes else ""))
