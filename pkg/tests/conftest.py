import pytest

_VERDICTS = []


class Verdict:
    """Collects one PASS/FAIL line per acceptance criterion."""

    def __init__(self, number, title):
        self.number = number
        self.title = title

    def check(self, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {self.number:>2} {self.title}: {detail}"
        _VERDICTS.append((self.number, line))
        print(line)
        assert ok, line


@pytest.fixture
def verdict():
    return Verdict


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_VERDICTS, key=lambda x: x[0]):
        terminalreporter.write_line(line)
