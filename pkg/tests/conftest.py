import numpy as np
import pytest

from jointsa.polarimetry import PolImage, ScatteringMatrix

_ACCEPTANCE = {}


def random_psd(rng, n=None, rank=3, scale=1.0):
    """Random Hermitian PSD 3x3 matrices (one, or a stack of ``n``)."""
    m = 1 if n is None else n
    a = rng.standard_normal((m, 3, rank)) + 1j * rng.standard_normal((m, 3, rank))
    c = scale * a @ np.swapaxes(a.conj(), -1, -2) / rank
    return c[0] if n is None else c


def random_image(rng, height, width):
    g = rng.standard_normal((3, height, width)) + 1j * rng.standard_normal((3, height, width))
    return PolImage(g[0], g[1], g[2])


def random_scattering(rng):
    v = rng.standard_normal(6)
    return ScatteringMatrix(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when in ("setup", "call"):
        name = report.nodeid.split("::")[-1]
        if report.when == "setup" and report.passed:
            return
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[1])):
        outcome = _ACCEPTANCE[name]
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{tag} {name}")
