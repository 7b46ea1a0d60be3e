import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_CRITERIA: dict[str, tuple[str, str]] = {}
_OUTCOMES: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, label): acceptance criterion reported in the summary")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _CRITERIA[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid not in _CRITERIA:
        return
    if report.when == "call" or report.outcome != "passed":
        if _OUTCOMES.get(report.nodeid) != "FAIL":
            _OUTCOMES[report.nodeid] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for nodeid, (cid, label) in sorted(_CRITERIA.items(), key=lambda kv: kv[1][0]):
        if nodeid in _OUTCOMES:
            terminalreporter.write_line(f"criterion {cid:<4} {_OUTCOMES[nodeid]}  {label}")
