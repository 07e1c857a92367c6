import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kieferlab import (
    DyadicGrid,
    ProcessSpec,
    block_schedule,
    block_sums,
    dyadic_projection,
    ecdf,
    ecdf_eval,
    empirical_process,
    first_block_vector,
    generate_trajectory,
    schedule_bracketing,
)
from conftest import make_traj


class TestEcdf:
    def test_count_over_size(self):
        model = ecdf([0.2, 0.4, 0.6, 0.8])
        assert ecdf_eval(model, 0.5) == 0.5

    def test_below_min_is_zero(self):
        model = ecdf([0.2, 0.4])
        assert ecdf_eval(model, 0.1) == 0.0
        assert ecdf_eval(model, -100.0) == 0.0

    def test_at_or_above_max_is_one(self):
        model = ecdf([0.2, 0.4])
        assert ecdf_eval(model, 0.4) == 1.0
        assert ecdf_eval(model, 5.0) == 1.0

    def test_right_continuous_closed_right(self):
        model = ecdf([0.5, 0.5, 1.0])
        # ties at the evaluation point are included: 1{x <= s}
        assert ecdf_eval(model, 0.5) == pytest.approx(2 / 3)

    def test_empty_calibration_rejected(self):
        with pytest.raises(ValueError):
            ecdf([])

    def test_vectorized(self):
        model = ecdf([0.25, 0.75])
        np.testing.assert_allclose(
            ecdf_eval(model, [0.0, 0.25, 0.5, 1.0]), [0.0, 0.5, 0.5, 1.0]
        )


class TestDyadicGrid:
    def test_points(self):
        grid = DyadicGrid(2)
        np.testing.assert_allclose(grid.points, [0.25, 0.5, 0.75])
        assert grid.size == 3

    def test_positive_resolution_required(self):
        with pytest.raises(ValueError):
            DyadicGrid(0)


class TestEmpiricalProcess:
    def test_hand_computed_value(self):
        # R(0.5, 3) with F(0.5) = 0.5: (1-.5)+(0-.5)+(1-.5) = 0.5
        traj = make_traj([0.1, 0.9, 0.3])
        model = ecdf([0.0, 1.0])  # F(0.5) = 0.5 exactly
        field = empirical_process(traj, model, DyadicGrid(1), [3])
        assert field.values[0, 0] == 0.5

    def test_time_zero_is_zero(self):
        traj = make_traj([0.1, 0.9, 0.3])
        model = ecdf([0.0, 1.0])
        field = empirical_process(traj, model, DyadicGrid(2), [0, 2])
        assert np.all(field.values[:, 0] == 0.0)

    def test_iid_variance_anchor(self, uniform_ecdf):
        # Var(R(0.5, n)) / n ~= 1/4 for i.i.d. uniforms.
        n, reps = 2**14, 2000
        grid = DyadicGrid(1)
        vals = np.empty(reps)
        for rep in range(reps):
            traj = generate_trajectory(ProcessSpec(kind="iid", seed=rep), n)
            field = empirical_process(traj, uniform_ecdf, grid, [n])
            vals[rep] = field.values[0, 0]
        assert vals.var() / n == pytest.approx(0.25, rel=0.10)

    def test_monotone_in_s(self, uniform_ecdf):
        traj = generate_trajectory(ProcessSpec(kind="iid", seed=5), 500)
        grid = DyadicGrid(3)
        t = 500
        field = empirical_process(traj, uniform_ecdf, grid, [t])
        counts = field.values[:, 0] + t * ecdf_eval(uniform_ecdf, grid.points)
        assert np.all(np.diff(counts) >= 0)

    def test_single_step_increments_bounded(self, uniform_ecdf):
        traj = generate_trajectory(ProcessSpec(kind="iid", seed=5), 64)
        grid = DyadicGrid(2)
        field = empirical_process(traj, uniform_ecdf, grid, list(range(0, 65)))
        steps = np.abs(np.diff(field.values, axis=1))
        assert steps.max() <= 1.0 + 1e-12

    def test_times_beyond_length_rejected(self, uniform_ecdf):
        traj = make_traj([0.1, 0.2])
        with pytest.raises(ValueError):
            empirical_process(traj, uniform_ecdf, DyadicGrid(1), [3])

    def test_times_must_increase(self, uniform_ecdf):
        traj = make_traj([0.1, 0.2, 0.3])
        with pytest.raises(ValueError):
            empirical_process(traj, uniform_ecdf, DyadicGrid(1), [2, 2])


class TestDyadicProjection:
    def test_examples(self):
        assert dyadic_projection(0.3, 2) == 0.25
        assert dyadic_projection(1.0, 3) == 1.0
        assert dyadic_projection(0.7, 0) == 0.0

    @given(s=st.floats(min_value=0.0, max_value=1.0), K=st.integers(0, 20))
    def test_floor_property(self, s, K):
        p = dyadic_projection(s, K)
        assert p <= s
        assert p * 2.0**K == math.floor(p * 2.0**K)  # on the lattice
        if s < 1.0:
            assert s < p + 2.0**-K

    def test_domain(self):
        with pytest.raises(ValueError):
            dyadic_projection(1.5, 2)
        with pytest.raises(ValueError):
            dyadic_projection(0.5, -1)


class TestBlockSchedule:
    def test_spec_values(self):
        s = block_schedule(20, 0.02)
        assert (s.r, s.m, s.flagged) == (4, 16, False)
        s = block_schedule(40, 0.02)
        assert (s.r, s.m, s.flagged) == (8, 32, False)

    def test_small_l_flagged(self):
        s = block_schedule(2, 0.01)
        assert (s.r, s.m) == (1, 1)
        assert s.flagged

    def test_epsilon_domain(self):
        with pytest.raises(ValueError):
            block_schedule(20, 0.1)
        with pytest.raises(ValueError):
            block_schedule(20, 0.0)

    def test_r_plus_m_is_l(self):
        for L in range(2, 80):
            s = block_schedule(L, 0.05)
            assert s.r + s.m == L
            assert s.m <= L

    def test_bracketing_asymptotic_regime(self):
        # The dyadic bracket holds exactly when the epsilon branch of the
        # minimum is active; at eps=0.02 that happens around L ~ 245.
        assert schedule_bracketing(260, 0.02)
        assert schedule_bracketing(300, 0.02)


class TestBlockSums:
    def _schedule(self):
        return block_schedule(8, 0.02)  # r=1, m=7, 2 blocks

    def test_all_below_first_point_gives_full_count(self):
        sched = self._schedule()
        n = 2 ** (sched.L + 1)
        traj = make_traj(np.full(n, 0.1))
        model = ecdf([5.0, 6.0])  # F = 0 on the grid
        sample = block_sums(traj, model, sched)
        assert np.all(sample.vectors == sched.block_length)

    def test_telescoping_identity(self, uniform_ecdf):
        # Sum of block vectors equals the field increment over (2^L, 2^(L+1)];
        # exact in real arithmetic, asserted at machine-rounding tolerance.
        sched = block_schedule(10, 0.02)
        traj = generate_trajectory(ProcessSpec(kind="iid", seed=17), 2**11)
        sample = block_sums(traj, uniform_ecdf, sched)
        grid = DyadicGrid(sched.r)
        field = empirical_process(
            traj, uniform_ecdf, grid, [2**sched.L, 2 ** (sched.L + 1)]
        )
        increment = field.values[:, 1] - field.values[:, 0]
        np.testing.assert_allclose(
            sample.vectors.sum(axis=0), increment, rtol=0, atol=1e-7
        )

    def test_coordinates_bounded_by_block_length(self, uniform_ecdf):
        sched = self._schedule()
        traj = generate_trajectory(ProcessSpec(kind="iid", seed=3), 2**9)
        sample = block_sums(traj, uniform_ecdf, sched)
        assert np.all(np.abs(sample.vectors) <= sched.block_length)

    def test_short_trajectory_rejected(self, uniform_ecdf):
        sched = self._schedule()
        traj = make_traj(np.linspace(0, 1, 2**8))
        with pytest.raises(ValueError):
            block_sums(traj, uniform_ecdf, sched)

    def test_first_block_matches_block_sums(self, uniform_ecdf):
        sched = block_schedule(10, 0.02)
        traj = generate_trajectory(ProcessSpec(kind="iid", seed=8), 2**11)
        sample = block_sums(traj, uniform_ecdf, sched)
        first = first_block_vector(traj, uniform_ecdf, sched)
        np.testing.assert_array_equal(first, sample.vectors[0])

    def test_lsv_block_means_centered(self, uniform_ecdf):
        # Monte Carlo over independent orbits: each coordinate's mean is
        # within 3 SE of zero (pilot max |z| ~ 1.7 at 60 replicates).
        from kieferlab.seeding import derive_seed

        spec = ProcessSpec(kind="lsv", gamma=0.3, seed=0)
        calib = generate_trajectory(spec.with_seed(derive_seed(5005, 999)), 2**18)
        model = ecdf(calib)
        sched = block_schedule(16, 0.02)
        means = []
        for rep in range(60):
            traj = generate_trajectory(spec.with_seed(derive_seed(5005, rep)), 2**17)
            means.append(block_sums(traj, model, sched).vectors.mean(axis=0))
        means = np.array(means)
        z = np.abs(means.mean(axis=0)) / (means.std(axis=0, ddof=1) / math.sqrt(60))
        assert z.max() <= 3.0
