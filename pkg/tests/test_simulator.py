import math

import numpy as np
import pytest
from scipy import ndimage

from jointsa.decomposition import yamaguchi4_field
from jointsa.detectors import RegionBox, joint_sa_map, scr
from jointsa.errors import InvalidArgumentError
from jointsa.polarimetry import covariance_field
from jointsa.simulator import (HELIX_K, SceneSpec, SeaModel, ShipSpec, hermitian_sqrt,
                               reference_regions, reference_scene, sea_covariance,
                               simulate_scene, truth_mask)

SEA = SeaModel(1.0, 1.5, 0.5 + 0.2j, 0.08)


class TestSeaCovariance:
    def test_fully_correlated(self):
        c = sea_covariance(SeaModel(2.0, 0.0, 1 - 1e-9, 0.0))
        ev = np.linalg.eigvalsh(c)
        assert ev[:2] == pytest.approx([0, 0], abs=1e-8)
        assert ev[2] == pytest.approx(2.0)

    def test_uncorrelated_block_diagonal(self):
        c = sea_covariance(SeaModel(1.0, 3.0, 0.0, 0.1))
        assert np.count_nonzero(c - np.diag(np.diag(c))) == 0

    def test_entries(self):
        c = sea_covariance(SEA)
        r = 10 ** 0.15
        assert c[0, 0].real == pytest.approx(1 / (1 + r))
        assert c[2, 2].real == pytest.approx(r / (1 + r))
        assert c[1, 1].real / np.trace(c).real == pytest.approx(0.08)
        assert c[0, 2] == pytest.approx((0.5 + 0.2j) * math.sqrt(c[0, 0].real * c[2, 2].real))
        assert c[0, 1] == c[1, 2] == 0

    def test_random_models_psd(self, rng):
        for _ in range(1000):
            rho = rng.uniform(0, 0.999) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            m = SeaModel(rng.uniform(0.01, 10), rng.uniform(-10, 10), rho, rng.uniform(0, 0.9))
            c = sea_covariance(m)
            assert np.allclose(c, c.conj().T)
            assert np.linalg.eigvalsh(c).min() >= -1e-12 * np.trace(c).real

    def test_sqrt(self):
        c = sea_covariance(SEA)
        L = hermitian_sqrt(c)
        assert np.allclose(L @ L, c, atol=1e-14)

    @pytest.mark.parametrize("kw", [{"rho": 1.0}, {"copol_power": 0.0},
                                    {"crosspol_fraction": 1.0}, {"copol_ratio_db": np.nan}])
    def test_invalid(self, kw):
        with pytest.raises(InvalidArgumentError):
            SeaModel(**kw)


@pytest.fixture(scope="module")
def big():
    img, _ = simulate_scene(SceneSpec(1000, 1000, SEA, seed=3))
    return img.lex().reshape(-1, 3)


class TestClutter:
    def test_covariance_converges(self, big):
        emp = big.T @ big.conj() / big.shape[0]
        c = sea_covariance(SEA)
        for i in range(3):
            assert emp[i, i].real == pytest.approx(c[i, i].real, rel=0.02)
        assert abs(emp[0, 2] - c[0, 2]) <= 0.02 * abs(c[0, 2])

    def test_reflection_symmetric(self, big):
        c = sea_covariance(SEA)
        n = big.shape[0]
        for a, b in ((0, 1), (1, 2)):
            m = np.mean(big[:, a] * big[:, b].conj())
            se = math.sqrt(c[a, a].real * c[b, b].real / (2 * n))
            assert abs(m.real) <= 3 * se and abs(m.imag) <= 3 * se


class TestShips:
    def test_helix_ship_power(self):
        ship = ShipSpec(64, 64, 15, 15, 100.0, {"helix": 1.0})
        img, truth = simulate_scene(SceneSpec(128, 128, SEA, [ship], seed=1))
        ph = yamaguchi4_field(covariance_field(img, 5))[..., 3]
        clutter = ~ndimage.binary_dilation(truth, iterations=6)
        assert ph[58:71, 58:71].mean() > 100 * ph[clutter].mean()

    @pytest.mark.parametrize("weights", [{"surface": 1.0}, {"dihedral": 1.0}, {"helix": 1.0},
                                         {"surface": 0.5, "helix": 0.5},
                                         {"surface": 0.3, "dihedral": 0.7}])
    def test_coherent_power_accounting(self, weights):
        mult = 50.0
        ship = ShipSpec(32, 32, 9, 9, mult, weights, coherent=True)
        img, truth = simulate_scene(SceneSpec(64, 64, SEA, [ship], seed=2))
        k = img.lex()[truth]
        span = np.mean(np.sum(np.abs(k) ** 2, axis=1))
        pc = SEA.total_power
        assert span == pytest.approx(pc * (1 + mult), rel=0.05)

    def test_coherent_ship_fixed_phase(self):
        ship = ShipSpec(32, 32, 9, 9, 1e6, {"dihedral": 1.0}, coherent=True)
        img, truth = simulate_scene(SceneSpec(64, 64, SEA, [ship], seed=2))
        hh = img.lex()[truth][:, 0]
        assert np.std(np.angle(hh)) < 0.01

    def test_helix_vector(self):
        assert np.vdot(HELIX_K, HELIX_K).real == pytest.approx(1.0)

    def test_truth_mask(self):
        ships = [ShipSpec(10, 10, 5, 3, 1.0, {"surface": 1.0}),
                 ShipSpec(30, 20, 4, 4, 1.0, {"surface": 1.0})]
        t = truth_mask(SceneSpec(40, 40, SEA, ships))
        assert t.sum() == 15 + 16
        assert t[9:12, 8:13].all()
        assert ships[1].box == (28, 18, 4, 4)

    def test_out_of_bounds(self):
        with pytest.raises(InvalidArgumentError):
            SceneSpec(40, 40, SEA, [ShipSpec(2, 10, 9, 3, 1.0, {"surface": 1.0})])

    @pytest.mark.parametrize("weights", [{"surface": 0.5}, {"surface": 1.2, "helix": -0.2},
                                         {"foo": 1.0}])
    def test_bad_weights(self, weights):
        with pytest.raises(InvalidArgumentError):
            ShipSpec(10, 10, 3, 3, 1.0, weights)


class TestDeterminism:
    def _spec(self, seed=5):
        ships = [ShipSpec(20, 20, 7, 5, 30.0, {"dihedral": 0.5, "volume": 0.2, "helix": 0.3}),
                 ShipSpec(50, 40, 9, 9, 10.0, {"surface": 0.5, "helix": 0.5}, coherent=True)]
        return SceneSpec(80, 64, SEA, ships, seed=seed)

    def test_same_seed_bitwise(self):
        a, _ = simulate_scene(self._spec())
        b, _ = simulate_scene(self._spec())
        assert np.array_equal(a.lex(), b.lex())

    def test_worker_count_independent(self):
        a, _ = simulate_scene(self._spec(), workers=1)
        b, _ = simulate_scene(self._spec(), workers=3)
        assert np.array_equal(a.lex(), b.lex())

    def test_seed_matters(self):
        a, _ = simulate_scene(self._spec(5))
        b, _ = simulate_scene(self._spec(6))
        assert not np.array_equal(a.lex(), b.lex())

    def test_json_round_trip(self):
        spec = self._spec()
        back = SceneSpec.from_json(spec.to_json())
        assert back == spec

    @pytest.mark.parametrize("text", ["{", "[]", '{"width": 10}', '{"width": 4, "height": 4, '
                                      '"ships": [{"cx": 1}]}'])
    def test_bad_json(self, text):
        with pytest.raises(InvalidArgumentError):
            SceneSpec.from_json(text)


class TestReferenceScene:
    def test_construction(self):
        spec = reference_scene()
        assert (spec.width, spec.height, spec.seed) == (512, 512, 42)
        mult = [s.multiplier for s in spec.ships]
        assert len(mult) == 7
        assert mult == sorted(mult, reverse=True)
        assert min(mult) < max(mult) / 10
        _, n = ndimage.label(truth_mask(spec), structure=np.ones((3, 3)))
        assert n == 7

    def test_regions(self):
        spec = reference_scene()
        truth = truth_mask(spec)
        regions = reference_regions(spec)
        assert len(regions) == 7
        for _, target, clutter in regions:
            t = RegionBox(*target).check(512, 512)
            c = RegionBox(*clutter).check(512, 512)
            assert truth[t.slices()].all()
            assert not truth[c.slices()].any()

    @pytest.mark.slow
    def test_weakest_ship_visible(self):
        spec = reference_scene()
        img, _ = simulate_scene(spec)
        m = joint_sa_map(img)
        _, target, clutter = reference_regions(spec)[-1]
        assert scr(m, RegionBox(*target), RegionBox(*clutter)) > 0.0
