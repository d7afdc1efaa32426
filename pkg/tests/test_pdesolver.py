import math

import numpy as np
import pytest

from ebeam.errors import BadParams, WakeReachedBoundary
from ebeam.pdesolver import (
    SpectralOperator, SteppingOptions, compare, conservation_report, evolve, linear_evolution,
    max_conservation_drift,
)
from ebeam.profile import Grid, build_profile, from_samples

WIDE = Grid(-100.0, -100.0 + 2047 * 0.45, 2048)


def gaussian(amp, grid=WIDE):
    return build_profile("gaussian", {"amp": amp, "width": 2.0}, grid)


def test_linear_evolution_single_mode():
    g = Grid(0.0, 2 * math.pi * (1 - 1 / 256), 256)  # period 2 pi
    k, t = 3.0, 0.37
    q = linear_evolution(np.sin(k * g.x), g, t)
    assert np.max(np.abs(q - np.sin(k * g.x - k**3 * t))) < 1e-12


def test_nonlinear_term_vanishes_for_linear_profile_part():
    op = SpectralOperator(WIDE)
    qh = np.fft.rfft(gaussian(1e-4).q)
    # cubic in the amplitude: scaling q by 2 scales the term by 8
    assert np.allclose(op.nonlinear(2 * qh), 8 * op.nonlinear(qh), rtol=1e-6, atol=1e-25)


def test_small_amplitude_follows_linear_flow():
    p = gaussian(1e-3)
    st = evolve(p, 10.0, SteppingOptions(chunk=5.0))
    ql = linear_evolution(p.q, WIDE, 10.0)
    assert np.max(np.abs(st.profile.q - ql)) < 1e-8
    assert np.max(np.abs(ql)) > 1e-4


def test_conservation():
    p = gaussian(0.2)
    st = evolve(p, 10.0, SteppingOptions(snapshot_times=(5.0, 10.0), chunk=2.5))
    assert max_conservation_drift(st) < 1e-6
    assert conservation_report(st) <= max_conservation_drift(st)
    mass0 = np.sum(p.q)
    assert abs(np.sum(st.profile.q) - mass0) < 1e-10 * abs(mass0)
    assert sorted(st.snapshots) == [5.0, 10.0]
    assert [t for t, _ in st.charge_history] == [0.0, 2.5, 5.0, 7.5, 10.0]


def test_chunking_does_not_change_the_answer():
    p = gaussian(0.2)
    a = evolve(p, 8.0, SteppingOptions(chunk=8.0)).profile.q
    b = evolve(p, 8.0, SteppingOptions(chunk=2.0)).profile.q
    assert np.max(np.abs(a - b)) < 1e-9


def test_resolution_convergence():
    # nested grids with the same period: every other node of the fine grid
    h = 0.45
    coarse = Grid(-100.0, -100.0 + 2047 * h, 2048)
    fine = Grid(-100.0, -100.0 + 4095 * h / 2, 4096)
    qc = evolve(gaussian(0.2, coarse), 6.0).profile.q
    qf = evolve(gaussian(0.2, fine), 6.0).profile.q
    assert np.max(np.abs(qc - qf[::2])) < 1e-6  # amplitude 0.2


def test_wake_detection():
    small = Grid(-40.0, 40.0, 512)
    with pytest.raises(WakeReachedBoundary) as exc:
        evolve(gaussian(0.1, small), 20.0, SteppingOptions(chunk=2.0))
    assert exc.value.t <= 20.0 and exc.value.wake > 1e-8
    st = evolve(gaussian(0.1, small), 4.0, SteppingOptions(check_wake=False))
    assert st.t == 4.0


def test_validation():
    with pytest.raises(BadParams):
        evolve(gaussian(0.1), -1.0)
    with pytest.raises(BadParams):
        SteppingOptions(ode_tol=0.0)
    with pytest.raises(BadParams):
        SteppingOptions(snapshot_times=(2.0, 1.0))
    with pytest.raises(BadParams):
        SteppingOptions(edge_fraction=0.7)


def test_zero_stays_zero():
    p = from_samples(np.zeros(WIDE.n), WIDE)
    st = evolve(p, 3.0)
    assert np.all(st.profile.q == 0)
    assert max_conservation_drift(st) == 0.0


def test_compare_wrapper(sweep):
    g = Grid(-200.0, -200.0 + 4095 * 0.45, 4096)
    st = evolve(gaussian(0.1, g), 20.0)
    rep = compare(st, sweep)
    assert rep.times == [20.0]
    assert rep.residuals[0].max_residual < 0.05 * rep.residuals[0].signal_amplitude
