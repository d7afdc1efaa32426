import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ebeam.errors import AssumptionViolated, BadParams, OutOfRange, RangeTooNarrow
from ebeam.profile import Grid, build_profile, from_samples, zero_profile
from ebeam.scattering import (
    ReflectionInterpolant, ScatteringData, decay_slope, gauge, jost, reflection_sweep,
    scattering_at, scattering_batch, small_lambda_check, spectral_grid, symmetric_lambdas,
)

G = Grid(-40.0, 40.0, 1024)


def rk4_oracle(lam, amp=0.1, w=2.0, x0=-40.0, x1=40.0, h=0.004):
    """mu_- integrated by classical RK4 with closed-form Gaussian coefficients;
    returns (a, b) read off at x1 where mu_+ = I."""
    def coef(x):
        q = amp * np.exp(-(x / w) ** 2)
        qx = -2 * x / w**2 * q
        qxx = (4 * x**2 / w**4 - 2 / w**2) * q
        m = 1 + qx**2
        return np.sqrt(m), qxx / (2 * m)

    def f(x, mu):
        s, u = coef(x)
        comm = np.array([[0, 2 * mu[0, 1]], [-2 * mu[1, 0], 0]])
        U = np.array([[0, u], [-u, 0]])
        return 1j * lam * s * comm + U @ mu

    mu = np.eye(2, dtype=complex)
    n = int(round((x1 - x0) / h))
    x = x0
    for _ in range(n):
        k1 = f(x, mu)
        k2 = f(x + h / 2, mu + h / 2 * k1)
        k3 = f(x + h / 2, mu + h / 2 * k2)
        k4 = f(x + h, mu + h * k3)
        mu = mu + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        x += h
    return mu[1, 1], np.exp(-2j * lam * x1) * mu[0, 1]


def test_against_rk4_oracle(gauss):
    a_ref, b_ref = rk4_oracle(1.0)
    a, b = scattering_at(gauss, 1.0)
    assert abs(a - a_ref) < 1e-7
    assert abs(b - b_ref) < 1e-7
    assert abs(b) > 1e-4  # the comparison is not vacuous


def test_zero_profile_has_no_reflection():
    a, b, disc = scattering_batch(zero_profile(G), [-2.0, 0.5, 3.0])
    assert np.allclose(a, 1.0, atol=1e-14) and np.allclose(b, 0.0, atol=1e-14)
    assert np.all(disc < 1e-14)


def test_unitarity_and_symmetry(sweep):
    assert np.max(sweep.unitarity_defect()) < 1e-9
    lp, rp = sweep.positive()
    ln, rn = sweep.negative()
    assert np.array_equal(-ln[::-1], lp)
    assert np.max(np.abs(rn[::-1] - np.conj(rp))) < 1e-12
    assert sweep.meta["max_matching_discrepancy"] < 1e-8


def test_batch_matches_single(gauss):
    lams = np.array([-3.0, -0.7, 0.2, 1.1, 5.0])
    sd_b = reflection_sweep(gauss, lams)
    sd_s = reflection_sweep(gauss, lams, batch=False)
    assert np.max(np.abs(sd_b.r - sd_s.r)) < 1e-8


def test_jost_normalisation_and_determinant(gauss):
    for side, end in (("plus", -1), ("minus", 0)):
        js = jost(gauss, 0.8, side)
        assert np.array_equal(js.values[end], np.eye(2))
        assert np.max(np.abs(js.det() - 1)) < 1e-8
    with pytest.raises(BadParams):
        jost(gauss, 0.8, "left")


def test_gauge_is_rotation(gauss):
    g = gauge(gauss).values
    eye = np.einsum("nij,nkj->nik", g, g)
    assert np.allclose(eye, np.eye(2)[None], atol=1e-14)


@settings(max_examples=8, deadline=None)
@given(st.floats(-4.0, 4.0), st.sampled_from([0.4, 1.3, 2.7]))
def test_translation_covariance(d, lam):
    x = G.x
    p0 = from_samples(0.1 * np.exp(-(x / 2) ** 2), G)
    p1 = from_samples(0.1 * np.exp(-((x - d) / 2) ** 2), G)
    a0, b0 = scattering_at(p0, lam)
    a1, b1 = scattering_at(p1, lam)
    assert abs(a1 - a0) < 1e-9
    assert abs(b1 - np.exp(-2j * lam * d) * b0) < 1e-9


def test_small_lambda_expansion_is_second_order(gauss):
    r1 = small_lambda_check(gauss, 0.05)
    r2 = small_lambda_check(gauss, 0.025)
    assert 3.5 <= r1 / r2 <= 4.5
    with pytest.raises(OutOfRange):
        small_lambda_check(gauss, 0.5)


def test_decay_slope(sweep):
    assert decay_slope(sweep) <= -0.9


def test_sweep_validation(gauss):
    with pytest.raises(BadParams):
        reflection_sweep(gauss, [1.0, 0.5])
    with pytest.raises(BadParams):
        reflection_sweep(gauss, [-1.0, 0.0, 1.0])
    with pytest.raises(AssumptionViolated) as exc:
        reflection_sweep(gauss, [0.5, 1.0], a_floor=1.5)
    assert exc.value.min_abs_a == pytest.approx(np.min(np.abs(scattering_batch(gauss, [0.5, 1.0])[0])))


def test_spectral_grid_shape():
    g = spectral_grid(16.0, 400, 0.02, 4.0)
    assert g.size == 400 and np.all(np.diff(g) > 0)
    assert g[-1] == pytest.approx(16.0) and g[0] > 0
    s = symmetric_lambdas(g)
    assert s.size == 800 and np.array_equal(s[:400], -g[::-1])
    with pytest.raises(BadParams):
        spectral_grid(0.5)


def test_json_round_trip(sweep, tmp_path):
    path = tmp_path / "sd.json"
    sweep.save(path)
    back = ScatteringData.load(path)
    assert np.array_equal(back.lambdas, sweep.lambdas)
    assert np.array_equal(back.r, sweep.r) and np.array_equal(back.a, sweep.a)
    assert back.meta == sweep.meta


def test_reflection_interpolant(sweep):
    it = ReflectionInterpolant(sweep, 1)
    lp, rp = sweep.positive()
    assert np.allclose(it(lp), rp, rtol=0, atol=1e-15)
    assert np.allclose(np.exp(1j * it.arg(lp)), rp / np.abs(rp), atol=1e-12)
    neg = ReflectionInterpolant(sweep, -1)
    assert abs(neg(-1.234) - np.conj(it(1.234))) < 1e-12
    with pytest.raises(RangeTooNarrow):
        it(100.0)


def test_larger_amplitude_keeps_a_away_from_zero():
    p = build_profile("gaussian", {"amp": 1.0, "width": 2.0}, G)
    sd = reflection_sweep(p, symmetric_lambdas(np.linspace(0.1, 4, 20)))
    assert sd.min_abs_a > 0.05
    assert np.max(sd.unitarity_defect()) < 1e-8
