import numpy as np
import pytest

from volprod.polytope import convex_hull

_CRITERIA = {}
_NOTES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion id")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed or (report.when == "call" and report.skipped)
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {entry['title']}")
        for line in _NOTES.get(number, []):
            terminalreporter.write_line(f"              {line}")


@pytest.fixture
def note(request):
    """Attach a measured value to the acceptance summary line of the current criterion."""
    marker = request.node.get_closest_marker("criterion")
    number = marker.args[0] if marker else None

    def add(text):
        _NOTES.setdefault(number, []).append(text)

    return add


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_body(rng, n, m=None):
    """Hull of random points around the origin, with the origin strictly inside."""
    m = 3 * n + 4 if m is None else m
    pts = rng.normal(size=(m, n))
    pts = np.vstack([pts, np.eye(n), -np.eye(n)])
    return convex_hull(pts)
