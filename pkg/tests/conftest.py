import pytest

from groundsound.cli import default_scenario_path
from groundsound.materials import derive_halfspace, load_material_db
from groundsound.scenario import load_scenario


@pytest.fixture(scope="session")
def db():
    return load_material_db()


@pytest.fixture(scope="session")
def wood(db):
    return derive_halfspace(db["wood"])


@pytest.fixture(scope="session")
def steel_wood():
    return load_scenario(default_scenario_path())


_CRITERIA = pytest.StashKey[list]()


class Criterion:
    """Collects sub-checks of one acceptance criterion and records a single PASS/FAIL line."""

    def __init__(self, number: int, title: str, lines: list):
        self.number, self.title, self.lines = number, title, lines
        self.checks = []

    def check(self, name: str, ok: bool, detail: str = ""):
        self.checks.append((name, bool(ok), detail))

    def __enter__(self):
        import time

        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        import time

        elapsed = time.perf_counter() - self._t0
        parts = [f"{n}: {d}" + ("" if ok else " [x]") for n, ok, d in self.checks]
        if exc_type is not None and exc_type is not AssertionError:
            parts.append(f"error: {exc_type.__name__}: {exc}")
        ok = exc_type is None and bool(self.checks) and all(c[1] for c in self.checks)
        line = (f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}  {self.title} ({elapsed:.1f} s)  "
                + "; ".join(parts))
        self.lines.append((self.number, line))
        print(line)
        if exc_type is None and not ok:
            raise AssertionError(line)
        return False


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(_CRITERIA, [])
    return lambda number, title: Criterion(number, title, lines)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
