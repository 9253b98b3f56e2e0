import math

import numpy as np
import pytest

from madelung.grid import RealField
from madelung.harness import collect_flow
from madelung.potentials import PotentialSpec, evaluate_potential
from madelung.states import gaussian_packet, harmonic_ground_state, plane_wave
from madelung.trajectories import (
    BranchMismatchError,
    DensityCdf,
    FlowHistory,
    FlowSample,
    ProviderGapError,
    action_check,
    advect,
    continuity_residual,
    seed_parcels,
    write_trajectory_csv,
)


def gaussian_quantile_oracle(p):
    """Invert the standard normal CDF by bisection on math.erf."""
    lo, hi = -8.0, 8.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture
def free_U(desk_grid):
    return RealField(np.zeros(desk_grid.n), desk_grid)


class TestSeeding:
    def test_uniform_density_equal_spacing(self, desk_grid, natural_units):
        wf = plane_wave(desk_grid, natural_units, 0)
        ens = seed_parcels(wf.density(), 4)
        gaps = np.diff(ens.positions)
        assert np.allclose(gaps, desk_grid.length / 4.0, atol=1e-9)

    def test_gaussian_quartiles(self, desk_grid, natural_units):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        ens = seed_parcels(wf.density(), 2)
        expected = gaussian_quantile_oracle(0.75)
        assert abs(expected - 0.6744897501960817) < 1e-12
        assert np.max(np.abs(ens.positions - [-expected, expected])) < 1e-6

    def test_single_parcel_at_median(self, desk_grid, natural_units):
        wf = gaussian_packet(desk_grid, natural_units, -3.0, 1.0, 0.0)
        ens = seed_parcels(wf.density(), 1)
        assert abs(ens.positions[0] - (-3.0)) < 1e-6

    def test_rejects_zero_parcels(self, desk_grid, natural_units):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            seed_parcels(wf.density(), 0)


class TestDensityCdf:
    def test_total_mass(self, desk_grid, natural_units):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        cdf = DensityCdf(wf.density())
        assert abs(cdf.total - 1.0) < 1e-12

    def test_value_against_erf(self, desk_grid, natural_units):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        cdf = DensityCdf(wf.density())
        for x in (-1.3, 0.0, 0.4, 2.2):
            exact = 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
            assert abs(cdf.value(x) - exact) < 1e-7

    def test_quantile_inverts_value(self, desk_grid, natural_units):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        cdf = DensityCdf(wf.density())
        for p in (0.1, 0.5, 0.9):
            assert abs(cdf.value(cdf.quantile(p)) - p) < 1e-9

    def test_quantile_bounds(self, desk_grid, natural_units):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        cdf = DensityCdf(wf.density())
        with pytest.raises(ValueError):
            cdf.quantile(0.0)
        with pytest.raises(ValueError):
            cdf.quantile(1.0)


class TestAdvection:
    def test_plane_wave_uniform_drift(self, desk_grid, natural_units, free_U):
        wf = plane_wave(desk_grid, natural_units, 8)
        k = 2.0 * np.pi * 8 / desk_grid.length
        flow = collect_flow(wf, free_U, 1e-3, 200)
        ens = seed_parcels(wf.density(), 4)
        adv = advect(ens, flow, 1e-3, 200)
        disp = np.mod(adv.x_records[-1, :] - adv.x_records[0, :], desk_grid.length)
        assert np.max(np.abs(disp - k * 0.2)) < 1e-10

    def test_harmonic_parcels_stationary(self, desk_grid, natural_units):
        U = evaluate_potential(
            PotentialSpec("harmonic", omega=1.0), desk_grid,
            harmonic_ground_state(desk_grid, natural_units, 1.0).constants,
        )
        wf = harmonic_ground_state(desk_grid, natural_units, 1.0)
        flow = collect_flow(wf, U, 1e-3, 200)
        ens = seed_parcels(wf.density(), 8)
        adv = advect(ens, flow, 1e-3, 200)
        assert np.max(np.abs(adv.x_records - adv.x_records[0:1, :])) < 1e-7

    def test_free_gaussian_follows_self_similar_map(self, desk_grid, natural_units, free_U):
        # oracle: parcels ride the similarity flow x(t) = x(0) sigma(t)/sigma0
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        T, dt = 0.5, 1e-3
        flow = collect_flow(wf, free_U, dt, int(T / dt))
        ens = seed_parcels(wf.density(), 8)
        adv = advect(ens, flow, dt, int(T / dt))
        stretch = math.sqrt(1.0 + (T / 2.0) ** 2)
        assert np.max(np.abs(adv.x_records[-1, :] - ens.positions * stretch)) < 1e-6

    def test_record_shapes(self, desk_grid, natural_units, free_U):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        flow = collect_flow(wf, free_U, 1e-3, 50)
        adv = advect(seed_parcels(wf.density(), 3), flow, 1e-3, 50)
        assert adv.times.shape == (51,)
        for rec in (adv.x_records, adv.u_records, adv.ln_rho_records,
                    adv.div_u_records, adv.S_records, adv.action_records):
            assert rec.shape == (51, 3)

    def test_positions_stay_in_domain(self, desk_grid, natural_units, free_U):
        wf = plane_wave(desk_grid, natural_units, 12)
        flow = collect_flow(wf, free_U, 1e-3, 300)
        adv = advect(seed_parcels(wf.density(), 4), flow, 1e-3, 300)
        assert np.all(adv.x_records >= desk_grid.x_min)
        assert np.all(adv.x_records < desk_grid.x_max)

    def test_provider_gap_aborts(self, desk_grid, natural_units, free_U):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        flow = collect_flow(wf, free_U, 1e-3, 10)
        ens = seed_parcels(wf.density(), 2)
        with pytest.raises(ProviderGapError):
            advect(ens, flow, 1e-3, 20)  # asks for times past the history


class TestContinuity:
    def test_plane_wave_floor(self, desk_grid, natural_units, free_U):
        wf = plane_wave(desk_grid, natural_units, 8)
        flow = collect_flow(wf, free_U, 1e-3, 100)
        adv = advect(seed_parcels(wf.density(), 4), flow, 1e-3, 100)
        assert continuity_residual(adv).max() < 1e-10
        # incompressible flow conserves density along every parcel
        assert np.max(np.ptp(adv.ln_rho_records, axis=0)) < 1e-6

    def test_free_gaussian_second_order(self, desk_grid, natural_units, free_U):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)

        def residual(dt):
            n = int(round(0.25 / dt))
            flow = collect_flow(wf, free_U, dt, n)
            adv = advect(seed_parcels(wf.density(), 8), flow, dt, n)
            return continuity_residual(adv).max()

        coarse = residual(1e-3)
        assert coarse < 1e-4
        assert coarse / residual(5e-4) > 3.5

    def test_needs_three_records(self, desk_grid, natural_units, free_U):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        flow = collect_flow(wf, free_U, 1e-3, 1)
        adv = advect(seed_parcels(wf.density(), 2), flow, 1e-3, 1)
        with pytest.raises(ValueError):
            continuity_residual(adv)


class TestAction:
    def test_plane_wave_closed_form(self, desk_grid, natural_units, free_U):
        # Delta S~ along the drift equals hbar^2 k^2 T / (2 m^2)
        wf = plane_wave(desk_grid, natural_units, 8)
        k = 2.0 * np.pi * 8 / desk_grid.length
        T, dt = 0.5, 1e-3
        flow = collect_flow(wf, free_U, dt, int(T / dt))
        adv = advect(seed_parcels(wf.density(), 4), flow, dt, int(T / dt))
        d_s = adv.S_records[-1, :] - adv.S_records[0, :]
        assert np.max(np.abs(d_s - 0.5 * k * k * T)) < 1e-10
        assert action_check(adv).max() < 1e-10

    def test_harmonic_phase_rate(self, desk_grid, natural_units):
        U = evaluate_potential(
            PotentialSpec("harmonic", omega=1.0), desk_grid,
            harmonic_ground_state(desk_grid, natural_units, 1.0).constants,
        )
        wf = harmonic_ground_state(desk_grid, natural_units, 1.0)
        T, dt = 0.5, 1e-3
        flow = collect_flow(wf, U, dt, int(T / dt))
        adv = advect(seed_parcels(wf.density(), 4), flow, dt, int(T / dt))
        d_s = adv.S_records[-1, :] - adv.S_records[0, :]
        assert np.max(np.abs(d_s + 0.5 * T)) < 1e-7
        assert action_check(adv).max() < 1e-7

    def test_zero_steps_trivial(self, desk_grid, natural_units, free_U):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        flow = collect_flow(wf, free_U, 1e-3, 0)
        adv = advect(seed_parcels(wf.density(), 2), flow, 1e-3, 0)
        assert np.all(action_check(adv) == 0.0)

    def test_branch_mismatch_detected(self, desk_grid, natural_units, free_U):
        wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
        flow = collect_flow(wf, free_U, 1e-3, 2)
        adv = advect(seed_parcels(wf.density(), 2), flow, 1e-3, 2)
        adv.S_records[1, :] += 0.6 * adv.branch_period  # corrupt one sample
        with pytest.raises(BranchMismatchError):
            action_check(adv)


def test_flow_history_ordering(desk_grid, natural_units):
    flow = FlowHistory(desk_grid, natural_units)
    u = RealField(np.zeros(desk_grid.n), desk_grid)
    flow.add(FlowSample(t=0.0, u=u))
    with pytest.raises(ValueError):
        flow.add(FlowSample(t=0.0, u=u))
    flow.add(FlowSample(t=0.5, u=u))
    assert flow.velocity_at(0.5) is u
    with pytest.raises(ProviderGapError):
        flow.velocity_at(0.25)


def test_trajectory_csv_roundtrip(tmp_path, desk_grid, natural_units):
    import csv

    wf = gaussian_packet(desk_grid, natural_units, 0.0, 1.0, 0.0)
    U = RealField(np.zeros(desk_grid.n), desk_grid)
    flow = collect_flow(wf, U, 1e-3, 5)
    adv = advect(seed_parcels(wf.density(), 2), flow, 1e-3, 5)
    path = tmp_path / "trajectories.csv"
    write_trajectory_csv(adv, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["parcel_id", "t", "x", "u", "ln_rho", "div_u", "action", "S_sampled"]
    assert len(rows) == 1 + 2 * 6
    # full-precision round trip
    x_back = np.array([float(r[2]) for r in rows[1:7]])
    assert np.array_equal(x_back, adv.x_records[:, 0])
