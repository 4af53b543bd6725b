import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_psd
from jointsa import kernels
from jointsa.decomposition import (beta1_from_ratio, helix_power, surface_roughness_beta1,
                                   surface_similarity_rs, yamaguchi4)
from jointsa.errors import InvalidArgumentError, UndefinedRoughnessError

SQ2 = np.sqrt(2.0)

SURFACE = np.array([[0.25, 0, 0.5], [0, 0, 0], [0.5, 0, 1]], dtype=complex)
DIHEDRAL = np.array([[1, 0, -1], [0, 0, 0], [-1, 0, 1]], dtype=complex)
VOLUME_LOW = np.array([[8, 0, 2], [0, 4, 0], [2, 0, 3]], dtype=complex) / 15
VOLUME_MID = np.array([[3, 0, 1], [0, 2, 0], [1, 0, 3]], dtype=complex) / 8
VOLUME_HIGH = np.array([[3, 0, 2], [0, 4, 0], [2, 0, 8]], dtype=complex) / 15
HELIX = np.array([[1, 1j * SQ2, -1], [-1j * SQ2, 2, 1j * SQ2], [-1, -1j * SQ2, 1]]) / 4


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param


class TestModelRoundTrip:
    @pytest.mark.parametrize("c,expected", [
        (SURFACE, (1.25, 0, 0, 0)),
        (DIHEDRAL, (0, 2, 0, 0)),
        (VOLUME_LOW, (0, 0, 1, 0)),
        (VOLUME_MID, (0, 0, 1, 0)),
        (VOLUME_HIGH, (0, 0, 1, 0)),
        (HELIX, (0, 0, 0, 1)),
    ], ids=["surface", "dihedral", "vol-low", "vol-mid", "vol-high", "helix"])
    def test_model_matrix(self, backend, c, expected):
        assert tuple(yamaguchi4(c)) == pytest.approx(expected, abs=1e-9)

    def test_scaled_models(self, backend):
        p = yamaguchi4(3.0 * HELIX + 2.0 * VOLUME_MID)
        assert tuple(p) == pytest.approx((0, 0, 2.0, 3.0), abs=1e-9)

    def test_zero_matrix(self, backend):
        assert tuple(yamaguchi4(np.zeros((3, 3)))) == (0, 0, 0, 0)


class TestInvariants:
    def test_power_balance_and_non_negativity(self, backend, rng):
        cs = list(random_psd(rng, 500)) + list(random_psd(rng, 500, rank=1))
        for c in cs:
            p = yamaguchi4(c)
            assert min(p) >= 0
            assert p.total() == pytest.approx(np.trace(c).real, rel=1e-6)

    def test_reflection_symmetry_kills_helix(self, backend, rng):
        for c in random_psd(rng, 200):
            c[0, 1] = c[1, 0] = c[1, 2] = c[2, 1] = 0
            c = c + 1e-9 * np.eye(3) * np.trace(c).real
            assert yamaguchi4(c).p_h == 0.0

    def test_backends_agree(self, rng):
        cs = random_psd(rng, 2000)
        with kernels.use_backend("numba"):
            a = kernels.yamaguchi4(cs)
        with kernels.use_backend("numpy"):
            b = kernels.yamaguchi4(cs)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-13)

    def test_non_psd_rejected(self):
        with pytest.raises(InvalidArgumentError):
            yamaguchi4(np.diag([1.0, -1.0, 1.0]))

    def test_non_hermitian_rejected(self):
        c = np.eye(3, dtype=complex)
        c[0, 1] = 0.5j
        with pytest.raises(InvalidArgumentError):
            yamaguchi4(c)


class TestHelixPower:
    def test_reflection_symmetric(self):
        assert helix_power(np.diag([1.0, 0.2, 1.0]).astype(complex)) == 0.0

    def test_values(self):
        c = np.zeros((3, 3), dtype=complex)
        c[0, 1], c[1, 2] = 0.1j, 0.2j
        assert helix_power(c) == pytest.approx(0.3 * SQ2, rel=1e-14)

    def test_cancellation(self):
        c = np.zeros((3, 3), dtype=complex)
        c[0, 1], c[1, 2] = 0.1j, -0.1j
        assert helix_power(c) == 0.0

    def test_matches_helix_model(self):
        assert helix_power(5.0 * HELIX) == pytest.approx(5.0, rel=1e-14)

    def test_sign_independent(self):
        assert helix_power(HELIX.conj()) == pytest.approx(helix_power(HELIX))


class TestSurfaceSimilarity:
    def test_ideal_surface(self):
        k = np.array([1, 0, 1], dtype=complex)
        assert surface_similarity_rs(np.outer(k, k.conj())) == pytest.approx(1.0)

    def test_dihedral(self):
        k = np.array([1, 0, -1], dtype=complex)
        assert surface_similarity_rs(np.outer(k, k.conj())) == pytest.approx(0.0, abs=1e-15)

    def test_identity(self):
        assert surface_similarity_rs(np.eye(3)) == pytest.approx(1 / 3)

    def test_zero_power(self):
        with pytest.raises(InvalidArgumentError):
            surface_similarity_rs(np.zeros((3, 3)))

    def test_bounded(self, rng):
        rs = surface_similarity_rs(random_psd(rng, 500))
        assert np.all((rs >= 0) & (rs <= 1))


class TestRoughness:
    def _t(self, t22, t33):
        return np.diag([1.0, t22, t33]).astype(complex)

    def test_smooth(self):
        assert surface_roughness_beta1(self._t(1.0, 0.0)) == pytest.approx(0.0, abs=1e-8)

    def test_first_zero(self):
        assert surface_roughness_beta1(self._t(1.0, 1.0)) == pytest.approx(45.0, abs=1e-8)

    def test_half(self):
        b = surface_roughness_beta1(self._t(3.0, 1.0))
        assert np.sinc(4 * np.radians(b) / np.pi) == pytest.approx(0.5, abs=1e-9)
        assert b == pytest.approx(np.degrees(1.8954942670 / 4), abs=1e-7)
        assert b == pytest.approx(27.15, abs=0.01)

    def test_undefined(self):
        with pytest.raises(UndefinedRoughnessError):
            surface_roughness_beta1(self._t(0.0, 0.0))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, r1, r2):
        if abs(r1 - r2) < 1e-6:
            return
        b1, b2 = beta1_from_ratio(r1), beta1_from_ratio(r2)
        assert (b1 < b2) == (r1 > r2)
