import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_image
from jointsa import kernels
from jointsa.detectors import Features


def _brute_box_sum(a, half):
    H, W = a.shape[:2]
    out = np.zeros_like(a)
    for y in range(H):
        for x in range(W):
            out[y, x] = a[max(0, y - half):y + half + 1, max(0, x - half):x + half + 1].sum((0, 1))
    return out


@pytest.mark.parametrize("name", ["numba", "numpy"])
@pytest.mark.parametrize("half", [0, 1, 3, 9])
def test_box_sum_brute_force(rng, name, half):
    a = rng.standard_normal((13, 17, 2)) + 1j * rng.standard_normal((13, 17, 2))
    with kernels.use_backend(name):
        got = kernels.box_sum(a, half)
    assert np.allclose(got, _brute_box_sum(a, half), atol=1e-12)


def test_box_count():
    n = kernels.box_count(5, 4, 1)
    assert n[0, 0] == 4 and n[2, 1] == 9 and n[4, 3] == 4


def test_detector_maps_backend_equivalent(rng):
    img = random_image(rng, 40, 36)
    maps = {}
    for name in ("numba", "numpy"):
        with kernels.use_backend(name):
            f = Features(img, 5)
            maps[name] = {d: f.detector(d).values for d in ("joint-sa", "dbsp", "rsdvh")}
    for d in maps["numba"]:
        a, b = maps["numba"][d], maps["numpy"][d]
        assert np.allclose(a, b, rtol=1e-6, atol=1e-9 * a.max())


def test_use_backend_restores():
    before = kernels.backend()
    with kernels.use_backend("numpy"):
        assert kernels.backend() == "numpy"
    assert kernels.backend() == before


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("cuda")


def test_set_workers_capped():
    import numba

    assert kernels.set_workers(10_000) == numba.config.NUMBA_NUM_THREADS
    assert kernels.set_workers(1) == 1


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("off", "numpy"), ("1", "numba")])
def test_environment_flag(flag, expected):
    env = dict(os.environ, JOINTSA_NUMBA=flag)
    r = subprocess.run([sys.executable, "-c", "from jointsa import kernels; print(kernels.backend())"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0, r.stderr
    assert r.stdout.strip() == expected
