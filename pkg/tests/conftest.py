import numpy as np
import pytest

from orthoplate import load_config, run_config
from orthoplate.spectral import assemble_spectrum


@pytest.fixture(scope="session")
def tacoma():
    return run_config(load_config()).model


@pytest.fixture(scope="session")
def spectrum(tacoma):
    return assemble_spectrum(tacoma, m_max=12, k_per_mode=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record ``(name, ok, detail)`` for the acceptance summary and fail if not ok."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(name: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
