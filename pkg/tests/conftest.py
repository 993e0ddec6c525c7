import time

import pytest

from cgl3d import runner
from cgl3d.config import RunConfig

_ACCEPTANCE: list[str] = []
_RUNS: dict = {}


class DeskRun:
    def __init__(self, cfg, u, seconds):
        self.cfg = cfg
        self.u = u
        self.seconds = seconds
        self.diag = runner.diagnose(u, cfg)


def desk_run(a: float, epsilon: float) -> DeskRun:
    """n=64, l=40, h=1, T=500 run from u = 1, cached for the session."""
    key = (a, epsilon)
    if key not in _RUNS:
        cfg = RunConfig(n=64, epsilon=epsilon, inhomogeneity=f"radial_power a={a!r}")
        t0 = time.perf_counter()
        u = runner.simulate(cfg)
        _RUNS[key] = DeskRun(cfg, u, time.perf_counter() - t0)
    return _RUNS[key]


@pytest.fixture(scope="session")
def runs():
    return desk_run


@pytest.fixture(scope="session")
def acceptance():
    def record(criterion, ok: bool, detail: str):
        _ACCEPTANCE.append(f"criterion {criterion:<4} {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
