"""Collects acceptance results and prints one PASS/FAIL line per criterion."""
import pytest

_RESULTS = {}


class Recorder:
    def __call__(self, number: int, title: str, ok: bool, detail: str = "") -> bool:
        _RESULTS[number] = (title, bool(ok), detail)
        return bool(ok)


@pytest.fixture(scope="session")
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok, detail = _RESULTS[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
