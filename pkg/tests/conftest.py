import math

import numpy as np
import pytest

from fcbc.core import Instance

_ACCEPTANCE = {}


def step_instance(p="center"):
    """Reds at 0 and 1, blues at 100 and 101, exact half/half bounds."""
    return Instance(colors=[0, 0, 1, 1], alpha=[0.5, 0.5], beta=[0.5, 0.5], p=p,
                    points=np.array([0.0, 1.0, 100.0, 101.0]))


def line_instance(n_half=5):
    """Reds at 0..n-1, blues at n..2n-1 on a line."""
    return Instance(colors=[0] * n_half + [1] * n_half, alpha=[0.5, 0.5], beta=[0.5, 0.5],
                    p="center", points=np.arange(2.0 * n_half))


def t1_instance():
    """Reds at 0 and 10, blues at 1 and 11."""
    return Instance(colors=[0, 0, 1, 1], alpha=[0.5, 0.5], beta=[0.5, 0.5], p="center",
                    points=np.array([0.0, 10.0, 1.0, 11.0]))


def random_instance(rng, n, H=2, p=None, delta=None, dim=2):
    colors = rng.integers(0, H, n)
    colors[:H] = np.arange(H)
    rng.shuffle(colors)
    p = p if p is not None else [1.0, 2.0, math.inf][int(rng.integers(3))]
    delta = delta if delta is not None else float(rng.choice([0.0, 0.05, 0.1, 0.3]))
    return Instance.from_points(rng.normal(size=(n, dim)).round(3), colors, p=p, delta=delta)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_makereport(item, call):
    if call.when != "call" or not item.nodeid.split("::")[0].endswith("test_acceptance.py"):
        return
    num = getattr(item.function, "criterion", None)
    if num is None:
        return
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    _ACCEPTANCE[num] = ("PASS" if call.excinfo is None else "FAIL", doc)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        status, doc = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {doc}")
