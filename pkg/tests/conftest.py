import numpy as np
import pytest


class ScriptedRng:
    """Stand-in for a Generator that replays a fixed sequence of draws."""

    def __init__(self, values):
        self.values = list(values)
        self.calls = []

    def random(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        if count > len(self.values):
            raise AssertionError("scripted draws exhausted")
        out, self.values = self.values[:count], self.values[count:]
        self.calls.append(size)
        return out[0] if size is None else np.reshape(np.array(out, dtype=float), size)


@pytest.fixture
def scripted():
    return ScriptedRng


_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's outcome."""
    from contextlib import contextmanager

    @contextmanager
    def check(number: int, title: str):
        notes: list[str] = []
        try:
            yield notes
        except BaseException as exc:
            detail = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            _ACCEPTANCE[number] = ("FAIL", title, detail)
            raise
        _ACCEPTANCE[number] = ("PASS", title, "; ".join(notes))

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        line = f"[{status}] C{number:<2} {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
