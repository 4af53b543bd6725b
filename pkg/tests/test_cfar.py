import numpy as np
import pytest

from jointsa.cfar import cfar_detect, fit_sample, score, truth_boxes
from jointsa.detectors import DetectorMap
from jointsa.errors import InvalidArgumentError
from jointsa.ggd import GGammaParams, ggd_sample

CLUTTER = GGammaParams(1.0, 2.0, 1.0)


def _clutter(shape=(512, 512), p=CLUTTER, seed=0):
    return ggd_sample(p, shape[0] * shape[1], seed=seed).reshape(shape)


class TestDetect:
    def test_mask_is_threshold_rule(self):
        v = _clutter()
        d = cfar_detect(DetectorMap(v, "x", 5), 1e-3)
        b = d.border
        assert b == 2
        inner = v[b:-b, b:-b]
        assert np.array_equal(d.mask[b:-b, b:-b], inner > d.threshold)
        assert not d.mask[:b].any() and not d.mask[-b:].any()
        assert not d.mask[:, :b].any() and not d.mask[:, -b:].any()

    def test_median_threshold(self):
        v = _clutter(seed=1)
        d = cfar_detect(v, 0.5, border=0)
        assert d.mask.mean() == pytest.approx(0.5, abs=0.02)

    def test_rate_small_map(self):
        v = _clutter((1024, 1024), seed=2)
        pfa = 1e-3
        n = cfar_detect(v, pfa, border=0).mask.sum()
        lam = v.size * pfa
        assert abs(n - lam) <= 3 * np.sqrt(lam)

    def test_monotone_and_nested(self):
        v = _clutter(seed=3)
        prev_t, prev_m = np.inf, None
        for pfa in (1e-6, 1e-4, 1e-3, 1e-2):
            d = cfar_detect(v, pfa)
            assert d.threshold <= prev_t
            if prev_m is not None:
                assert np.all(d.mask[prev_m])
            prev_t, prev_m = d.threshold, d.mask

    @pytest.mark.parametrize("c", [1e-6, 0.37, 2e5])
    def test_scale_invariant(self, c):
        v = _clutter(seed=4)
        a, b = cfar_detect(v, 1e-3), cfar_detect(v * c, 1e-3)
        assert np.array_equal(a.mask, b.mask)
        assert b.threshold == pytest.approx(c * a.threshold, rel=1e-9)

    def test_bright_ship(self):
        v = _clutter((512, 512), seed=5)
        v[200:210, 300:320] += 500.0
        truth = np.zeros(v.shape, dtype=bool)
        truth[200:210, 300:320] = True
        d = cfar_detect(v, 1e-5, border=0)
        assert d.mask[truth].any()
        fa = d.mask[~truth].sum()
        lam = v.size * 1e-5
        assert fa <= lam + 3 * np.sqrt(lam) + 3

    def test_zero_map(self):
        d = cfar_detect(np.zeros((32, 32)), 1e-3)
        assert not d.mask.any()
        assert d.threshold == np.inf
        assert d.params is None

    @pytest.mark.parametrize("pfa", [0.0, 1.0, 2.0])
    def test_invalid_pfa(self, pfa):
        with pytest.raises(InvalidArgumentError):
            cfar_detect(_clutter((16, 16)), pfa)

    def test_invalid_map(self):
        with pytest.raises(InvalidArgumentError):
            cfar_detect(np.zeros(10), 1e-3)

    def test_report_dict(self):
        d = cfar_detect(_clutter((64, 64)), 1e-2)
        r = d.to_dict()
        assert r["n_flagged"] == int(d.mask.sum())
        assert set(r["params"]) == {"nu", "kappa", "sigma"}


class TestGuard:
    def test_guard_ignores_outliers(self):
        x = ggd_sample(CLUTTER, 200_000, seed=6)
        clean, _ = fit_sample(x)
        dirty = np.concatenate([x, np.full(400, 1e4)])
        p, n = fit_sample(dirty)
        assert n <= x.size
        assert p.sigma == pytest.approx(clean.sigma, rel=0.01)
        assert p.nu == pytest.approx(clean.nu, rel=0.02)

    def test_unguarded_uses_all(self):
        x = ggd_sample(CLUTTER, 5000, seed=7)
        assert fit_sample(x, None)[1] == 5000

    def test_percentile_cut(self):
        x = ggd_sample(CLUTTER, 10000, seed=8)
        _, n = fit_sample(x, None, 99.0)
        assert n == pytest.approx(9900, abs=2)
        with pytest.raises(InvalidArgumentError):
            fit_sample(x, None, 0.0)


class TestScore:
    def _truth(self):
        t = np.zeros((40, 40), dtype=bool)
        t[5:10, 5:12] = True
        t[25:30, 20:26] = True
        return t

    def test_mask_equals_truth(self):
        t = self._truth()
        r = score(t, t)
        assert (r.detected, r.missed, r.false_alarms) == (2, 0, 0)
        assert r.hits == [True, True]

    def test_empty_mask(self):
        r = score(np.zeros((40, 40), dtype=bool), self._truth())
        assert (r.detected, r.missed, r.false_alarms) == (0, 2, 0)

    def test_one_hit_one_false_alarm(self):
        m = np.zeros((40, 40), dtype=bool)
        m[6:8, 6:8] = True
        m[35:37, 35:37] = True
        r = score(m, self._truth())
        assert (r.detected, r.missed, r.false_alarms) == (1, 1, 1)
        assert r.n_components == 2

    def test_diagonal_pixels_are_one_component(self):
        m = np.zeros((40, 40), dtype=bool)
        m[35, 35] = m[36, 36] = True
        assert score(m, self._truth()).false_alarms == 1

    def test_min_overlap(self):
        m = np.zeros((40, 40), dtype=bool)
        m[9:11, 11:13] = True  # one pixel inside the first box
        assert score(m, self._truth()).detected == 1
        assert score(m, self._truth(), min_overlap=2).detected == 0
        with pytest.raises(InvalidArgumentError):
            score(m, self._truth(), min_overlap=0)

    def test_truth_boxes(self):
        assert truth_boxes(self._truth()) == [(5, 5, 7, 5), (20, 25, 6, 5)]

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            score(np.zeros((10, 10), bool), np.zeros((10, 11), bool))

    def test_counts_add_up(self, rng):
        t = self._truth()
        for _ in range(20):
            r = score(rng.random((40, 40)) > 0.97, t)
            assert r.detected + r.missed == 2
            assert r.false_alarms <= r.n_components
