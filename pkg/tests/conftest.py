import sys
from collections import OrderedDict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS = OrderedDict()


class AcceptanceRecorder:
    """Collects per-criterion outcomes for the end-of-run summary."""

    def check(self, criterion, label, passed, detail=""):
        _RESULTS.setdefault(str(criterion), []).append((label, bool(passed), detail))
        assert passed, f"criterion {criterion} [{label}] failed: {detail}"


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


def _order(key):
    head = key.split("-")[0]
    return (int(head) if head.isdigit() else 99, key)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_RESULTS, key=_order):
        parts = _RESULTS[key]
        informational = key.endswith("info")
        ok = all(p for _, p, _ in parts)
        status = "INFO" if informational else ("PASS" if ok else "FAIL")
        detail = "; ".join(f"{label} {'ok' if p else 'FAILED'} ({d})" for label, p, d in parts)
        tr.write_line(f"criterion {key}: {status}: {detail}")
