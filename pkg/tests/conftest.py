import numpy as np
import pytest

from sdmac.macmodel import AuxJoint, binary_example_channel, deterministic_channel


@pytest.fixture
def bec01():
    return binary_example_channel(0.1)


@pytest.fixture
def constant_channel():
    return deterministic_channel([0.5, 0.5], 2, 2, 2, lambda x1, x2, s: 0)


def structured_aux(p_x1=(0.5, 0.5)):
    """V = S, U = X1, X2 uniform, X1 ~ p_x1 independent of S (all-binary)."""
    pv = np.zeros((2, 2, 2))
    pv[0, :, 0] = pv[1, :, 1] = 1.0
    pu = np.zeros((2, 2, 2, 2, 2))
    for x1 in range(2):
        pu[:, :, :, x1, x1] = p_x1[x1]
    return AuxJoint(np.array([0.5, 0.5]), pv, pu)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
