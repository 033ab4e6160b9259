import math

import numpy as np
import pytest

from freqspiral import kernels
from freqspiral.integrator import (DivergenceError, IntegratorConfig, ProbeKind, ProbeSpec,
                                   evolve, rk4_step, steps_for)
from freqspiral.lattice import (Boundary, FrequencyField, GridSpec, PhaseField, Vortex,
                                build_normal_frequencies, init_random_phases, zero_frequencies)
from freqspiral.observables import canonical_spiral


def random_instance(rows=3, cols=3, bnd=Boundary.FREE, seed=4):
    spec = GridSpec(rows, cols, bnd)
    return spec, init_random_phases(spec, seed), build_normal_frequencies(spec, seed)


def integrate(theta, freq, k, dt, t_end):
    return evolve(theta, freq, k, IntegratorConfig(dt, 0, t_end))[0].theta


def test_steps_for_rounds_down():
    assert steps_for(1.0, 0.125) == 8
    assert steps_for(1.1, 0.125) == 8
    assert steps_for(0.3, 0.1) == 3  # float noise in 0.3 / 0.1
    with pytest.raises(ValueError):
        steps_for(-1, 0.1)


@pytest.mark.parametrize("kw", [dict(dt=0), dict(dt=-0.1), dict(t_transient=-1),
                                dict(t_measure=-1)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        IntegratorConfig(**kw)


def test_probe_spec_validation():
    with pytest.raises(ValueError):
        ProbeSpec(ProbeKind.CELL_PHASE)
    with pytest.raises(ValueError):
        ProbeSpec(ProbeKind.PHASE_SNAPSHOT, every=0)


def test_fixed_point(backend):
    spec = GridSpec(4, 4, Boundary.PERIODIC)
    theta = PhaseField(spec, np.full(spec.shape, 0.8))
    out = rk4_step(theta, zero_frequencies(spec), 1.0, 0.125)
    np.testing.assert_array_equal(out.theta, theta.theta)
    assert out.time == 0.125


def test_linear_flow_is_exact(backend):
    spec = GridSpec(1, 2)
    theta = PhaseField(spec, np.array([[0.1, -0.3]]))
    freq = FrequencyField(spec, np.array([[1.0, 2.0]]))
    out = rk4_step(theta, freq, 0.0, 0.5)
    np.testing.assert_array_equal(out.theta, theta.theta + np.array([[0.5, 1.0]]))


def test_fourth_order(backend):
    _, theta, freq = random_instance()
    t_end, dts = 2.0, (0.1, 0.05, 0.025)
    ref = integrate(theta, freq, 1.0, dts[-1] / 16, t_end)
    errs = [np.max(np.abs(integrate(theta, freq, 1.0, dt, t_end) - ref)) for dt in dts]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    for p in orders:
        assert 3.7 <= p <= 4.3, orders


def test_semigroup(backend):
    _, theta, freq = random_instance(5, 6, Boundary.PERIODIC)
    whole, _ = evolve(theta, freq, 1.3, IntegratorConfig(0.125, 3.0, 2.0))
    first, _ = evolve(theta, freq, 1.3, IntegratorConfig(0.125, 0, 3.0))
    second, _ = evolve(first, freq, 1.3, IntegratorConfig(0.125, 2.0, 0))
    np.testing.assert_array_equal(whole.theta, second.theta)
    assert whole.time == second.time == 5.0


def test_probes_do_not_interfere(backend):
    spec, theta, freq = random_instance(6, 6, Boundary.PERIODIC)
    cfg = IntegratorConfig(0.125, 1.0, 5.0)
    bare, _ = evolve(theta, freq, 1.0, cfg)
    probes = [ProbeSpec(ProbeKind.CELL_PHASE, 3, (2, 2)), ProbeSpec(ProbeKind.PHASE_SNAPSHOT, 4),
              ProbeSpec(ProbeKind.RATE_SNAPSHOT, 6), ProbeSpec(ProbeKind.VORTEX_SCAN, 5)]
    probed, records = evolve(theta, freq, 1.0, cfg, probes)
    np.testing.assert_array_equal(bare.theta, probed.theta)
    n = cfg.n_measure
    for rec in records:
        assert len(rec.times) == len(rec.samples) == n // rec.probe.every + 1
        assert np.all(np.diff(rec.times) > 0)
        assert rec.times[0] == 1.0
    # cell probe agrees with the snapshot taken at the same step
    cell_rec, snap_rec = records[0], records[1]
    assert cell_rec.samples[4] == snap_rec.samples[3].theta[2, 2]
    assert cell_rec.times[4] == snap_rec.times[3]
    assert isinstance(records[3].samples[0], tuple)
    assert all(isinstance(v, Vortex) for v in records[3].samples[0])


def test_zero_measure_records_nothing(backend):
    _, theta, freq = random_instance()
    end, records = evolve(theta, freq, 1.0, IntegratorConfig(0.125, 2.0, 0),
                          [ProbeSpec(ProbeKind.PHASE_SNAPSHOT, 1)])
    assert records[0].times == [] and records[0].samples == []
    transient, _ = evolve(theta, freq, 1.0, IntegratorConfig(0.125, 0, 2.0))
    np.testing.assert_array_equal(end.theta, transient.theta)


def test_divergence_names_step(backend):
    spec = GridSpec(3, 3)
    omega = np.zeros(spec.shape)
    omega[1, 1] = 2e6
    theta = PhaseField(spec, np.zeros(spec.shape), time=4.0)
    with pytest.raises(DivergenceError) as info:
        evolve(theta, FrequencyField(spec, omega), 1.0, IntegratorConfig(0.1, 1.0, 1.0))
    assert info.value.step == 0 and info.value.time == 4.0
    assert "step 0" in str(info.value)


def test_rejects_mismatched_specs():
    _, theta, _ = random_instance()
    with pytest.raises(ValueError):
        evolve(theta, zero_frequencies(GridSpec(3, 4)), 1.0, IntegratorConfig())
    with pytest.raises(ValueError):
        rk4_step(theta, zero_frequencies(GridSpec(3, 3)), 1.0, 0.0)


def test_backends_agree():
    if len(kernels.available_backends()) < 2:
        pytest.skip("compiled backend not built")
    _, theta, freq = random_instance(12, 10, Boundary.PERIODIC)
    previous = kernels.active_backend()
    results = {}
    try:
        for name in kernels.available_backends():
            kernels.use_backend(name)
            results[name] = evolve(theta, freq, 1.0, IntegratorConfig(0.125, 0, 20.0))[0].theta
    finally:
        kernels.use_backend(previous)
    np.testing.assert_allclose(results["compiled"], results["python"], rtol=0, atol=1e-11)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_canonical_spiral_defector_advances():
    spec = GridSpec(49, 49)
    theta, freq, cell = canonical_spiral(spec, 0.75)
    _, (rec,) = evolve(theta, freq, 1.0, IntegratorConfig(0.125, 0, 300.0),
                       [ProbeSpec(ProbeKind.CELL_PHASE, 8, cell)])
    assert rec.samples[-1] - rec.samples[0] > 0
