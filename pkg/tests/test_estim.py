import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qkreg.errors import DomainError
from qkreg.estim import (
    EstimatorConfig,
    Sample,
    SampleFormatError,
    default_bandwidth,
    default_floor,
    default_grid,
    estimate_gamma,
    estimate_regression,
    kernel_sums,
    sup_error,
    write_estimates_csv,
)
from qkreg.kernels import make_q_poly
from qkreg.models import bell_density, bell_ppf
from qkreg.qcalc import jackson_integral

RECT = make_q_poly(0, 0.5)
EPAN = make_q_poly(1, 0.99)


def cfg(kernel, h, grid, b=1e-3):
    return EstimatorConfig(kernel, h, b, np.asarray(grid, dtype=float))


def test_single_point_rectangular():
    s = Sample([0.3], [1.0])
    assert estimate_gamma(s, cfg(RECT, 1.0, [0.3]), 0)[0] == pytest.approx(0.5)


def test_far_points_contribute_nothing():
    s = Sample([10.0, 11.0], [1.0, 2.0])
    out = estimate_gamma(s, cfg(RECT, 0.5, [0.0, 1.0]), 0)
    assert np.all(out == 0.0)


def test_hand_computed_three_points():
    s = Sample([0.0, 0.5, 2.0], [1.0, 3.0, 5.0])
    c = cfg(RECT, 1.0, [0.0, 1.0])
    f = estimate_gamma(s, c, 0)
    g = estimate_gamma(s, c, 1)
    # at 0: points 0 and 0.5 inside; at 1: points 0, 0.5 inside (|1-2| = 1 is on the edge)
    assert f[0] == pytest.approx(2 * 0.5 / 3)
    assert g[0] == pytest.approx((1 + 3) * 0.5 / 3)
    assert f[1] == pytest.approx(3 * 0.5 / 3)
    assert g[1] == pytest.approx((1 + 3 + 5) * 0.5 / 3)


def test_constant_response():
    rng = np.random.default_rng(0)
    xs = rng.normal(size=300)
    s = Sample(xs, np.full(300, 2.5))
    est = estimate_regression(s, cfg(EPAN, 0.4, np.linspace(-1, 1, 21)))
    assert np.allclose(est.r_hat[est.f_hat > 0], 2.5, atol=1e-12)


def test_empty_region_is_floored():
    s = Sample([0.0, 0.1], [1.0, 1.0])
    est = estimate_regression(s, cfg(EPAN, 0.2, [5.0], b=0.1))
    assert est.floored_mask[0]
    assert est.r_hat[0] == 0.0


def test_floor_formula():
    s = Sample([0.0], [4.0])
    est = estimate_regression(s, cfg(RECT, 1.0, [0.0], b=2.0))
    # f_hat = 0.5 < b/2 = 1 so the denominator is 1
    assert est.floored_mask[0]
    assert est.r_hat[0] == pytest.approx(est.g_hat[0] / 1.0)


def test_gamma_power_cap():
    s = Sample([0.0], [1.0])
    with pytest.raises(DomainError):
        estimate_gamma(s, cfg(RECT, 1.0, [0.0]), 9)
    assert estimate_gamma(s, cfg(RECT, 1.0, [0.0]), 8)[0] == pytest.approx(0.5)


@given(
    ys=arrays(np.float64, 20, elements=st.floats(-10, 10)),
    alpha=st.floats(-5, 5),
)
@settings(max_examples=40, deadline=None)
def test_gamma1_linear_in_y(ys, alpha):
    xs = np.linspace(-1, 1, 20)
    c = cfg(EPAN, 0.5, np.linspace(-1, 1, 9))
    base = estimate_gamma(Sample(xs, ys), c, 1)
    scaled = estimate_gamma(Sample(xs, alpha * ys), c, 1)
    assert np.allclose(scaled, alpha * base, rtol=1e-12, atol=1e-12)


@given(shift=st.floats(-50, 50))
@settings(max_examples=30, deadline=None)
def test_r_hat_shift(shift):
    rng = np.random.default_rng(3)
    xs = rng.uniform(-1, 1, 200)
    ys = rng.normal(size=200)
    c = cfg(EPAN, 0.3, np.linspace(-0.8, 0.8, 17))
    a = estimate_regression(Sample(xs, ys), c)
    b = estimate_regression(Sample(xs, ys + shift), c)
    ok = ~a.floored_mask
    assert np.allclose(b.r_hat[ok], a.r_hat[ok] + shift, atol=1e-9)


def test_density_oracle():
    rng = np.random.default_rng(11)
    n = 10_000
    xs = bell_ppf(rng.random(n))
    grid = np.linspace(-2, 2, 81)
    f = estimate_gamma(Sample(xs, np.zeros(n)), cfg(EPAN, n ** -0.2, grid), 0)
    assert sup_error(f, bell_density, grid) < 0.05


def test_linear_regression_oracle():
    rng = np.random.default_rng(12)
    n = 10_000
    xs = bell_ppf(rng.random(n))
    ys = 2 * xs + rng.uniform(-0.5, 0.5, n)
    grid = np.linspace(-1, 1, 41)
    est = estimate_regression(Sample(xs, ys), cfg(EPAN, n ** -0.2, grid, b=0.01))
    assert sup_error(est.r_hat, lambda x: 2 * x, grid) < 0.1


def test_mass_consistency():
    rng = np.random.default_rng(5)
    xs = rng.normal(size=2000)
    h = 0.3

    def fhat(x):
        return kernel_sums(xs, np.ones(xs.size), x, EPAN, h)[:, 0] / (xs.size * h)

    lo, hi = xs.min() - 2 * h, xs.max() + 2 * h
    res = jackson_integral(fhat, lo, hi, EPAN.q)
    assert abs(res.value - 1.0) < 0.02


def test_variance_scales_like_one_over_n():
    x0, h = 0.0, 0.3
    logs = []
    ns = [250, 500, 1000, 2000, 4000]
    for n in ns:
        rng = np.random.default_rng(n)
        vals = [
            estimate_gamma(Sample(bell_ppf(rng.random(n)), np.zeros(n)), cfg(EPAN, h, [x0]), 0)[0]
            for _ in range(400)
        ]
        logs.append(np.log(np.var(vals, ddof=1)))
    slope = np.polyfit(np.log(ns), logs, 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.15)


def test_sup_error():
    grid = np.linspace(0, 1, 5)
    truth = lambda x: x * x  # noqa: E731
    assert sup_error(grid**2, truth, grid) == 0.0
    est = grid**2
    est[2] += 0.3
    assert sup_error(est, truth, grid) == pytest.approx(0.3)
    with pytest.raises(DomainError):
        sup_error(est[:3], truth, grid)


def test_sup_error_matches_loop():
    rng = np.random.default_rng(2)
    grid = np.sort(rng.uniform(-2, 2, 100))
    est = rng.normal(size=100)
    naive = 0.0
    for g, e in zip(grid, est):
        naive = max(naive, abs(e - float(bell_density(g))))
    assert sup_error(est, bell_density, grid) == naive


def test_sample_validation():
    with pytest.raises(DomainError):
        Sample([1.0, 2.0], [1.0])
    with pytest.raises(DomainError):
        Sample([], [])
    with pytest.raises(DomainError):
        Sample([np.nan], [1.0])
    assert Sample([1, 2], [3, 4]).n == 2


def test_config_validation():
    with pytest.raises(DomainError):
        EstimatorConfig(RECT, 0.0, 1.0, [0.0])
    with pytest.raises(DomainError):
        EstimatorConfig(RECT, 1.0, -1.0, [0.0])
    with pytest.raises(DomainError):
        EstimatorConfig(RECT, 1.0, 1.0, [])
    with pytest.raises(DomainError):
        EstimatorConfig(RECT, 1.0, 1.0, [1.0, 0.0])


def test_csv_roundtrip(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("x,y\n0.5,1\n-1,2.5\n\n")
    s = Sample.from_csv(p)
    assert s.n == 2
    assert s.ys[1] == 2.5


@pytest.mark.parametrize(
    "text,line",
    [
        ("", 1),
        ("a,b\n1,2\n", 1),
        ("x,y\n", 2),
        ("x,y\n1,2\n3\n", 3),
        ("x,y\n1,2\n3,oops\n", 3),
        ("x,y\n1,inf\n", 2),
    ],
)
def test_csv_errors(tmp_path, text, line):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(SampleFormatError) as info:
        Sample.from_csv(p)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_write_estimates_deterministic(tmp_path):
    s = Sample([0.0, 0.5, 2.0], [1.0, 3.0, 5.0])
    est = estimate_regression(s, cfg(RECT, 1.0, [0.0, 1.0]))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_estimates_csv(a, est)
    write_estimates_csv(b, est)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "grid,f_hat,g_hat,r_hat,floored"


def test_default_rules():
    n = 10_000
    h, b = default_bandwidth(n), default_floor(n)
    assert h == pytest.approx(n ** -0.2)
    assert b == pytest.approx(n ** -0.05)
    assert default_floor(10**80) == 1e-3
    # the floor must not shrink faster than sqrt(h)
    assert default_bandwidth(10**12) / default_floor(10**12) ** 2 < h / b**2
    g = default_grid([1.0, 3.0], 5)
    assert g[0] == 1.0 and g[-1] == 3.0 and g.size == 5
