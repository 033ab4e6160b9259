import math

import numpy as np
import pytest

from freqspiral.integrator import IntegratorConfig, ProbeKind, ProbeSpec, TrajectoryRecord, evolve
from freqspiral.lattice import (TWO_PI, Boundary, GridSpec, PhaseField, RateField,
                                build_normal_frequencies, central_plaquette, init_phase_spiral,
                                init_random_phases, zero_frequencies)
from freqspiral.observables import (AverageFrequencyField, average_frequencies, bisect_threshold,
                                    canonical_spiral, far_corner, fit_arm_decay, label_clusters,
                                    measure_rotation_rate, spiral_rotation_rate, track_vortices)


def avg_field(values, tol_horizon=1000.0):
    values = np.asarray(values, dtype=float)
    return AverageFrequencyField(GridSpec(*values.shape), values, 0.0, tol_horizon)


def cell_record(cell, times, values):
    rec = TrajectoryRecord(ProbeSpec(ProbeKind.CELL_PHASE, 1, cell))
    rec.times.extend(times)
    rec.samples.extend(values)
    return rec


# -- average frequencies ------------------------------------------------------------

def test_static_state_has_zero_average():
    spec = GridSpec(4, 4)
    theta = init_phase_spiral(spec)
    later = PhaseField(spec, theta.theta, 10.0)
    avg = average_frequencies(theta, later)
    np.testing.assert_array_equal(avg.omega_avg, 0.0)
    assert avg.horizon == 10.0 and avg.error_bound == pytest.approx(TWO_PI / 10)


def test_uncoupled_lattice_averages_natural_frequencies():
    spec = GridSpec(5, 5, Boundary.PERIODIC)
    theta, freq = init_random_phases(spec, 1), build_normal_frequencies(spec, 1)
    _, (rec,) = evolve(theta, freq, 0.0, IntegratorConfig(0.125, 0, 50.0),
                       [ProbeSpec(ProbeKind.PHASE_SNAPSHOT, 400)])
    avg = average_frequencies(rec.samples[0], rec.samples[-1])
    np.testing.assert_allclose(avg.omega_avg, freq.omega, rtol=0, atol=1e-12)


def test_average_errors():
    a = PhaseField(GridSpec(2, 2), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        average_frequencies(a, a)
    with pytest.raises(ValueError):
        average_frequencies(a, PhaseField(GridSpec(2, 3), np.zeros((2, 3)), 1.0))


# -- clusters --------------------------------------------------------------------

def test_uniform_field_is_one_cluster():
    lab = label_clusters(avg_field(np.full((6, 7), 0.3)))
    assert lab.n_clusters == 1 and lab.cluster_means == [pytest.approx(0.3)]


def test_two_halves():
    values = np.zeros((6, 6))
    values[:, 3:] = 10 * 1e-4
    lab = label_clusters(avg_field(values), 1e-4)
    assert lab.n_clusters == 2
    np.testing.assert_array_equal(lab.label[:, :3], 0)
    np.testing.assert_array_equal(lab.label[:, 3:], 1)
    np.testing.assert_array_equal(lab.sizes(), [18, 18])


def test_periodic_wrap_joins_edges():
    values = np.zeros((4, 4))
    values[:, 1:3] = 1.0
    spec = GridSpec(4, 4, Boundary.PERIODIC)
    lab = label_clusters(AverageFrequencyField(spec, values, 0.0, 1.0))
    assert lab.n_clusters == 2  # columns 0 and 3 meet across the seam


def test_labels_are_a_connected_partition(rng):
    values = rng.integers(0, 3, (12, 12)) * 1.0
    lab = label_clusters(avg_field(values), 0.5)
    # labels contiguous, numbered in row-major order of first appearance
    first = [int(np.flatnonzero(lab.label.ravel() == i)[0]) for i in range(lab.n_clusters)]
    assert first == sorted(first)
    for i in range(lab.n_clusters):
        cells = set(zip(*np.nonzero(lab.label == i)))
        assert len({values[c] for c in cells}) == 1
        # flood fill from one cell reaches the whole label
        start = next(iter(cells))
        seen, todo = {start}, [start]
        while todo:
            r, c = todo.pop()
            for n in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if n in cells and n not in seen:
                    seen.add(n)
                    todo.append(n)
        assert seen == cells


def test_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        label_clusters(avg_field(np.zeros((2, 2))), 0.0)


def test_strong_coupling_forms_dominant_cluster():
    spec = GridSpec(50, 50, Boundary.PERIODIC)
    theta, freq = init_random_phases(spec, 1), build_normal_frequencies(spec, 1)
    _, (rec,) = evolve(theta, freq, 1.8, IntegratorConfig(0.125, 2000.0, 4000.0),
                       [ProbeSpec(ProbeKind.PHASE_SNAPSHOT, 32000)])
    lab = label_clusters(average_frequencies(rec.samples[0], rec.samples[-1]))
    assert lab.sizes().max() >= 0.9 * spec.size


# -- rotation rate ----------------------------------------------------------------

def test_rotation_rate_arithmetic():
    times = [0.0, 1.0, 2.0, 10.0]
    d = cell_record((0, 0), times, [0.0, 1.0, 5.0, 4 * math.pi + 0.3])
    r = cell_record((1, 1), times, [0.1, 0.2, 0.3, 0.4])
    m = measure_rotation_rate(d, r)
    assert m.rate == pytest.approx((4 * math.pi + 0.3 - 0.3) / 10)
    assert m.windings == 2 and m.rotating and m.horizon == 10.0
    assert abs(m.rate - TWO_PI * m.windings / m.horizon) <= TWO_PI / m.horizon
    shifted = measure_rotation_rate(cell_record((0, 0), times, np.array(d.samples) + 3.0),
                                    cell_record((1, 1), times, np.array(r.samples) + 3.0))
    assert shifted.rate == pytest.approx(m.rate, abs=1e-15)


def test_rotation_rate_errors():
    a = cell_record((0, 0), [0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        measure_rotation_rate(a, cell_record((0, 1), [0.0, 2.0], [0.0, 1.0]))
    with pytest.raises(ValueError):
        measure_rotation_rate(cell_record((0, 0), [1.0], [0.0]), cell_record((0, 1), [1.0], [0.0]))
    snap = TrajectoryRecord(ProbeSpec(ProbeKind.PHASE_SNAPSHOT), [0.0, 1.0], [None, None])
    with pytest.raises(ValueError):
        measure_rotation_rate(a, snap)


def test_far_corner():
    spec = GridSpec(49, 49)
    assert far_corner(spec, (24, 24)) == (0, 0)
    assert far_corner(spec, (10, 40)) == (48, 0)


@pytest.mark.parametrize("omega", [0.0, 0.30])
def test_small_defector_does_not_rotate(omega):
    m = spiral_rotation_rate(GridSpec(15, 15), omega, IntegratorConfig(0.125, 500.0, 1000.0))
    assert m.windings == 0 and abs(m.rate) < 1e-12


def test_fast_defector_rate():
    # far above threshold the rate approaches omega - 2 / omega
    m = spiral_rotation_rate(GridSpec(15, 15), 10.0, IntegratorConfig(0.01, 50.0, 100.0),
                             sample_every=10)
    assert m.rate == pytest.approx(10.0 - 2.0 / 10.0, rel=0.02)


def test_bisect_threshold():
    (lo, hi), history = bisect_threshold(lambda w: w > 0.4123, 0.3, 0.5, 12)
    assert lo <= 0.4123 < hi and hi - lo == pytest.approx(0.2 / 2 ** 12)
    assert len(history) == 14
    with pytest.raises(ValueError):
        bisect_threshold(lambda w: True, 0.3, 0.5, 3)


# -- arm decay --------------------------------------------------------------------

def synthetic_snapshots(spec, core, amp, lam, offset=0.0, phases=(0.0, 0.7, 1.9)):
    rows, cols = np.mgrid[0:spec.rows, 0:spec.cols]
    dist = np.abs(rows - core[0]) + np.abs(cols - core[1])
    envelope = amp * np.exp(-lam * dist)
    return [RateField(spec, offset + envelope * math.cos(p), float(i))
            for i, p in enumerate(phases)]


@pytest.mark.parametrize("direction", [(-1, 0), (0, 1), (1, 0), (0, -1)])
def test_decay_fit_recovers_exponential(direction):
    spec, core = GridSpec(41, 41), (20, 20)
    snaps = synthetic_snapshots(spec, core, 0.8, 0.35)
    fit = fit_arm_decay(snaps, core, direction, 2, 18, frame=0.0)
    assert abs(fit.slope + 0.35) < 1e-8
    assert abs(fit.intercept - math.log(0.8)) < 1e-8
    assert fit.r_value == pytest.approx(-1.0, abs=1e-12)
    np.testing.assert_array_equal(fit.distances, np.arange(2, 19))


def test_decay_fit_default_frame_removes_drift():
    spec, core = GridSpec(41, 41), (20, 20)
    snaps = synthetic_snapshots(spec, core, 0.8, 0.2, offset=0.05)
    fit = fit_arm_decay(snaps, core, (1, 0), 1, 15)
    # the far corner still carries exp(-0.2 * 40) of arm signal, hence the looser bound
    assert abs(fit.slope + 0.2) < 1e-3


def test_decay_fit_errors():
    spec = GridSpec(11, 11)
    snaps = [RateField(spec, np.zeros(spec.shape))]
    with pytest.raises(ValueError):
        fit_arm_decay(snaps, (5, 5), (1, 0), 1, 4, frame=0.0)  # zero amplitude
    with pytest.raises(ValueError):
        fit_arm_decay(snaps, (5, 5), (1, 1), 1, 4)
    with pytest.raises(ValueError):
        fit_arm_decay(snaps, (5, 5), (1, 0), 0, 4)
    with pytest.raises(ValueError):
        fit_arm_decay(snaps, (5, 5), (1, 0), 1, 6)  # leaves the grid
    with pytest.raises(ValueError):
        fit_arm_decay([], (5, 5), (1, 0), 1, 4)


# -- vortex tracks ----------------------------------------------------------------

def test_static_spiral_track():
    spec = GridSpec(7, 7)
    theta = init_phase_spiral(spec)
    snaps = [PhaseField(spec, theta.theta, t) for t in (0.0, 1.0, 2.0)]
    track = track_vortices(snaps)
    assert [t for t, _ in track] == [0.0, 1.0, 2.0]
    assert all(v == track[0][1] for _, v in track)
    with pytest.raises(ValueError):
        track_vortices(snaps[::-1])


def test_periodic_run_stays_charge_balanced():
    spec = GridSpec(20, 20, Boundary.PERIODIC)
    theta, freq = init_random_phases(spec, 3), build_normal_frequencies(spec, 3)
    _, (rec,) = evolve(theta, freq, 1.0, IntegratorConfig(0.125, 0, 50.0),
                       [ProbeSpec(ProbeKind.PHASE_SNAPSHOT, 20)])
    track = track_vortices(rec.samples)
    assert sum(len(v) for _, v in track) > 0
    for _, vortices in track:
        assert sum(v.charge for v in vortices) == 0


def test_canonical_core_vortex_stays_at_the_defector():
    spec = GridSpec(21, 21)
    around = {(9, 9), (9, 10), (10, 9), (10, 10)}  # plaquettes touching the defector (10, 10)
    for omega, allowed in ((0.3, {central_plaquette(spec)}), (0.75, around)):
        theta, freq, cell = canonical_spiral(spec, omega)
        assert cell == (10, 10)
        _, (rec,) = evolve(theta, freq, 1.0, IntegratorConfig(0.125, 0, 200.0),
                           [ProbeSpec(ProbeKind.PHASE_SNAPSHOT, 4)])
        visited = set()
        for _, vortices in track_vortices(rec.samples):
            assert len(vortices) == 1 and vortices[0].charge == 1
            visited.add(vortices[0][:2])
        # below threshold the core is fixed; a rotating spiral carries it
        # round the defector through all four plaquettes
        assert visited == allowed


def test_canonical_spiral_needs_free_grid():
    with pytest.raises(ValueError):
        canonical_spiral(GridSpec(5, 5, Boundary.PERIODIC), 1.0)
    _, freq, cell = canonical_spiral(GridSpec(9, 9), 0.5)
    assert cell == (4, 4) and freq.omega[4, 4] == 0.5
    assert zero_frequencies(GridSpec(9, 9)).omega.sum() == 0
