import numpy as np
import pytest

from nsres.harness import EnsembleConfig, generate_instance
from nsres.resolution import StepResolution

SQ2 = np.sqrt(2.0)

# Hand-derived 2x2 family with gamma = sqrt(2).
D1 = np.array([[1, 1], [0, 0]], dtype=complex)
D2 = np.array([[0, -1], [0, 1]], dtype=complex)


@pytest.fixture
def desk():
    return StepResolution([1.0, 2.0], [D1, D2])


@pytest.fixture
def diag2():
    return StepResolution([1.0, 2.0], [np.diag([1, 0]), np.diag([0, 1])])


def ensemble(n, m, trials, seed=0, kappa=10.0, kind="real", construction="similarity"):
    cfg = EnsembleConfig(n=n, m=m, trials=trials, seed=seed, kappa_max=kappa,
                         spectrum_kind=kind, construction=construction)
    return [generate_instance(cfg, t) for t in range(trials)]


def rand_vec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE: dict = {}


def record(num, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {name}" + (f" ({detail})" if detail else "")
    ACCEPTANCE[num] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[num])
