import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


class _Criterion:
    def __init__(self, lines: list):
        self._lines = lines
        self.reported = False
        self.label = ""

    def check(self, number: int, title: str, checks: dict, **details) -> None:
        """Record one pass/fail line for a criterion, then assert every named check."""
        failed = [name for name, ok in checks.items() if not ok]
        extra = " ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in details.items())
        self.label = f"criterion {number:2d} ({title})"
        line = f"{self.label}: {'FAIL' if failed else 'PASS'}"
        if failed:
            line += f" [failed: {', '.join(failed)}]"
        if extra:
            line += f" {extra}"
        self._lines.append(line)
        self.reported = True
        print(line)
        assert not failed, line


@pytest.fixture
def criterion(request):
    c = _Criterion(request.config.stash[_ACCEPTANCE])
    yield c
    if not c.reported:
        c._lines.append(f"criterion for {request.node.name}: FAIL (raised before reporting)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
