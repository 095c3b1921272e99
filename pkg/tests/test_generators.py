import numpy as np
import pytest
from scipy import stats

import sparsegrid as sg
from sparsegrid.errors import AlreadySampled, CountTooLarge


def assert_valid_incremental(pattern, dims):
    pts = pattern.points
    assert (pts[:, 0] >= 0).all() and (pts[:, 0] < dims[0]).all()
    assert (pts[:, 1] >= 0).all() and (pts[:, 1] < dims[1]).all()
    flat = pts[:, 1] * dims[0] + pts[:, 0]
    assert len(np.unique(flat)) == len(flat)


class TestRng:
    def test_pinned_generator_stream(self):
        # golden test: the pinned PCG64 stream must not drift across
        # platforms or library upgrades
        rng = sg.make_rng(12345)
        assert rng.integers(0, 2**32, size=5).tolist() == [
            3003105693, 976400781, 3387213022, 1360466709, 876933081,
        ]


class TestRand:
    def test_full_count_is_permutation(self):
        pat = sg.gen_rand((6, 6), 36, seed=0)
        flat = pat.points[:, 1] * 6 + pat.points[:, 0]
        assert sorted(flat.tolist()) == list(range(36))

    def test_determinism(self):
        assert sg.gen_rand((12, 8), 40, seed=9) == sg.gen_rand((12, 8), 40, seed=9)

    def test_golden_stream(self):
        assert sg.gen_rand((8, 8), 5, seed=7).points.tolist() == [
            [4, 7], [0, 5], [3, 5], [1, 7], [5, 4],
        ]

    def test_count_too_large(self):
        with pytest.raises(CountTooLarge):
            sg.gen_rand((4, 4), 17, seed=0)

    def test_first_point_uniform(self):
        # chi^2 of the first drawn cell over many seeds on a 4x4 grid
        counts = np.zeros(16, dtype=np.int64)
        n_seeds = 20000
        for seed in range(n_seeds):
            x, y = sg.gen_rand((4, 4), 1, seed=seed).points[0]
            counts[y * 4 + x] += 1
        p = stats.chisquare(counts).pvalue
        assert p > 0.01

    def test_valid_pattern(self):
        for seed in range(3):
            pat = sg.gen_rand((15, 11), 100, seed=seed)
            assert_valid_incremental(pat, (15, 11))


class TestSobol:
    def test_reference_unit_points(self):
        # leading points of the 2-D sequence against the published values
        ref = [[0, 0], [0.5, 0.5], [0.75, 0.25], [0.25, 0.75],
               [0.375, 0.375], [0.875, 0.875], [0.625, 0.125], [0.125, 0.625]]
        assert sg.sobol_points(8).tolist() == ref

    def test_direction_integers(self):
        from sparsegrid.generators import _direction_integers_dim2
        assert _direction_integers_dim2(8) == [1, 3, 5, 15, 17, 51, 85, 255]

    def test_skip_consistency(self):
        full = sg.sobol_points(40)
        tail = sg.sobol_points(15, skip=25)
        assert np.array_equal(full[25:], tail)

    def test_deterministic(self):
        assert sg.gen_sobol((32, 24), 300) == sg.gen_sobol((32, 24), 300)

    def test_golden(self):
        assert sg.gen_sobol((8, 8), 5).points.tolist() == [
            [0, 3], [4, 7], [6, 1], [2, 5], [3, 0],
        ]

    def test_distinct_cells(self):
        pat = sg.gen_sobol((20, 20), 350)
        assert_valid_incremental(pat, (20, 20))

    def test_lower_discrepancy_than_rand(self):
        pts_sobol = sg.to_unit_points(sg.prefix(sg.gen_sobol((100, 100), 1000), 0.1))
        d_sobol = sg.estimate_discrepancy(pts_sobol, 2000, seed=0).sup_estimate
        d_rand = []
        for seed in range(10):
            pts = sg.to_unit_points(sg.prefix(sg.gen_rand((100, 100), 1000, seed), 0.1))
            d_rand.append(sg.estimate_discrepancy(pts, 2000, seed=0).sup_estimate)
        assert d_sobol < np.mean(d_rand)


class TestProbabilityField:
    def test_uniform_init(self):
        field = sg.field_init(sg.GridDims(10, 10))
        assert field.total == pytest.approx(100.0, rel=1e-9)
        assert (field.logw == 0).all()

    def test_fresh_field_draw_uniform(self):
        field = sg.field_init(sg.GridDims(4, 4))
        rng = sg.make_rng(0)
        counts = np.zeros(16, dtype=np.int64)
        for _ in range(20000):
            x, y = field.draw(rng)
            counts[y * 4 + x] += 1
        assert stats.chisquare(counts).pvalue > 0.01

    def test_update_zeroes_drawn_cell(self):
        field = sg.field_init(sg.GridDims(10, 10))
        field.update(5, 5)
        assert field.weights[5, 5] == 0.0
        assert np.isneginf(field.logw[5, 5])

    def test_suppression_factor_at_distance_two(self):
        # direct evaluation of the suppression factor (1 - e^{-d^2/4})^7
        field = sg.field_init(sg.GridDims(30, 30))
        field.update(10, 10)
        expected = (1.0 - np.exp(-1.0)) ** 7
        assert field.weights[10, 12] == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.0403273242, rel=1e-8)

    def test_unchanged_beyond_cutoff(self):
        field = sg.field_init(sg.GridDims(40, 40))
        field.update(5, 5)
        assert field.weights[5, 30] == 1.0
        assert field.logw[5, 30] == 0.0

    def test_already_sampled(self):
        field = sg.field_init(sg.GridDims(6, 6))
        field.update(2, 2)
        with pytest.raises(AlreadySampled):
            field.update(2, 2)

    def test_partial_sum_consistency(self):
        field = sg.field_init(sg.GridDims(16, 16))
        rng = sg.make_rng(4)
        for _ in range(30):
            x, y = field.draw(rng)
            field.update(x, y)
            assert field.check_consistency(rtol=1e-9)


class TestGauss:
    def test_no_duplicates_high_density(self):
        pat = sg.gen_gauss((40, 40), int(0.7 * 1600), seed=2)
        assert_valid_incremental(pat, (40, 40))

    def test_full_density_permutation(self):
        pat = sg.gen_gauss((8, 8), 64, seed=1)
        flat = pat.points[:, 1] * 8 + pat.points[:, 0]
        assert sorted(flat.tolist()) == list(range(64))

    def test_determinism(self):
        assert sg.gen_gauss((20, 20), 120, seed=5) == sg.gen_gauss((20, 20), 120, seed=5)

    def test_golden(self):
        assert sg.gen_gauss((8, 8), 5, seed=7).points.tolist() == [
            [0, 5], [2, 7], [7, 4], [5, 0], [0, 1],
        ]

    def test_larger_min_distance_than_rand(self):
        from scipy.spatial import cKDTree

        def min_dist(pat, density):
            pts = sg.prefix(pat, density).points.astype(float)
            d, _ = cKDTree(pts).query(pts, k=2)
            return d[:, 1].min()

        dims = (60, 60)
        n = sg.density_to_count(0.1, sg.GridDims(*dims))
        gauss = np.mean([min_dist(sg.gen_gauss(dims, n, s), 0.1) for s in range(10)])
        rand = np.mean([min_dist(sg.gen_rand(dims, n, s), 0.1) for s in range(10)])
        assert gauss > rand

    def test_drawn_cells_have_zero_mass(self):
        dims = sg.GridDims(12, 12)
        field = sg.field_init(dims)
        rng = sg.make_rng(8)
        drawn = []
        for _ in range(30):
            x, y = field.draw(rng)
            field.update(x, y)
            drawn.append((x, y))
            for dx, dy in drawn:
                assert field.weights[dy, dx] == 0.0

    def test_conditional_distribution_matches_product_form(self):
        # oracle: brute-force evaluation of the suppression product on an
        # 8x8 grid with 3 fixed prior points; draws must follow it
        dims = sg.GridDims(8, 8)
        fixed = [(1, 1), (6, 2), (3, 6)]
        field = sg.field_init(dims)
        for x, y in fixed:
            field.update(x, y)
        xs, ys = np.meshgrid(np.arange(8), np.arange(8))
        expected = np.ones((8, 8))
        for fx, fy in fixed:
            d2 = (xs - fx) ** 2 + (ys - fy) ** 2
            expected *= (1.0 - np.exp(-d2 / 4.0)) ** 7
        expected /= expected.sum()
        rng = sg.make_rng(99)
        n_draws = 100_000
        counts = np.zeros((8, 8))
        for _ in range(n_draws):
            x, y = field.draw(rng)
            counts[y, x] += 1
        keep = expected.ravel() > 0
        p = stats.chisquare(counts.ravel()[keep], expected.ravel()[keep] * n_draws).pvalue
        assert p > 0.01


class TestSharedProperties:
    @pytest.mark.parametrize("make", [
        lambda: sg.gen_rand((24, 18), 200, seed=11),
        lambda: sg.gen_sobol((24, 18), 200),
        lambda: sg.gen_gauss((24, 18), 200, seed=11),
    ])
    def test_prefix_closure_and_uniqueness(self, make):
        pat = make()
        assert_valid_incremental(pat, (24, 18))
        rng = np.random.default_rng(0)
        for _ in range(50):
            n1, n2 = sorted(rng.integers(1, len(pat) + 1, size=2))
            assert np.array_equal(pat.points[:n1], pat.points[:n2][:n1])
