import numpy as np
import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number, title = mark.args
            entry = _CRITERIA.setdefault(number, {"title": title, "outcomes": [], "details": []})
            entry["expected"] = entry.get("expected", 0) + 1


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    entry = _CRITERIA[number]
    entry["outcomes"].append(report.outcome)
    detail = dict(report.user_properties).get("detail")
    if detail:
        entry["details"].append(detail)


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    mark = request.node.get_closest_marker("criterion")
    if mark:
        record_property("criterion", mark.args[0])


@pytest.fixture
def detail(record_property):
    """Attach a one-line measurement to the acceptance report."""
    return lambda text: record_property("detail", text)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outcomes = entry["outcomes"]
        if len(outcomes) < entry["expected"]:
            status = "NOT RUN" if not outcomes else "INCOMPLETE"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        line = f"AC{number:>2} {status:<10} {entry['title']}"
        if entry["details"]:
            line += " | " + "; ".join(entry["details"])
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
