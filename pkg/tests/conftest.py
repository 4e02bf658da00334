import numpy as np
import pytest

from privacy_rde.prob import Alphabet, Axis, JointPmf, Role

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def h2(x):
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def joint(shape, names, roles, probs):
    axes = tuple(Axis(n, Alphabet.range(k), r) for n, k, r in zip(names, shape, roles))
    return JointPmf(axes, np.asarray(probs, dtype=float).reshape(shape))


def random_joint(rng, shape, names=None, roles=None, alpha=1.0):
    names = names or [f"a{i}" for i in range(len(shape))]
    roles = roles or [Role.AUX] * len(shape)
    p = rng.dirichlet(np.full(int(np.prod(shape)), alpha))
    return joint(shape, names, roles, p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
