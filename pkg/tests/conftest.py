"""Shared fixtures: the acceptance recorder prints one verdict line per criterion."""

import pytest

_VERDICTS: dict = {}


class Recorder:
    def __call__(self, number: int, passed: bool, detail: str) -> None:
        line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _VERDICTS[number] = line
        print(line)


@pytest.fixture
def record() -> Recorder:
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[n])
