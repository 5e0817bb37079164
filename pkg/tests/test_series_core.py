import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frobwhit import _kernels as K
from frobwhit.series_core import (
    ChartError,
    CircleGrid,
    LaurentSeries,
    SampledFunction,
    SeriesDomainError,
    WindowError,
    arith,
    circle_transform,
    compose_check,
    contour_integral,
    log_ratio_integral,
    power_rational,
    project,
    reexpand_infinity,
    residue_infinity,
    residue_phi,
    revert,
    sample,
    winding_number,
)

PHI = 0.1 - 0.05j


def S(d, phi=PHI, chart="phi", **kw):
    return LaurentSeries.from_dict(d, chart, phi, **kw)


cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def finite_series(draw, lo=-6, hi=6):
    a = draw(st.integers(lo, hi))
    b = draw(st.integers(a, hi))
    cs = draw(st.lists(cplx, min_size=b - a + 1, max_size=b - a + 1))
    return LaurentSeries(cs, a, "phi", PHI)


# ------------------------------------------------------------- arithmetic


def test_add_zero_is_identity():
    f = S({0: 1, 1: 1})
    g = arith(f, LaurentSeries.zero(0, 0, "phi", PHI), "add")
    assert g.to_dict() == f.to_dict()


def test_derivative_monomial():
    d = arith(S({2: 1}), None, "derivative")
    assert d.coeff(1) == 2 and d.coeff(2) == 0 and d.coeff(0) == 0


def test_exponent_addition():
    g = S({-1: 1}) * S({2: 1})
    assert g.coeff(1) == 1 and np.count_nonzero(g.coeffs) == 1


def test_chart_mismatch_raises():
    with pytest.raises(ChartError):
        S({0: 1}) + S({0: 1}, phi=0.2)
    with pytest.raises(ChartError):
        S({0: 1}) * LaurentSeries([1.0], 0, "inf")


def test_window_rule_for_truncated_product():
    # two upward tails known on [0, 4] and [1, 3]: product trusted on [1, min(0+3, 1+4)]
    f = LaurentSeries(np.arange(1, 6), 0, "phi", PHI, open_hi=True)
    g = LaurentSeries(np.arange(1, 4), 1, "phi", PHI, open_hi=True)
    h = f * g
    assert h.window == (1, 3)
    with pytest.raises(WindowError):
        h.coeff(5)
    full = np.convolve(np.arange(1, 6), np.arange(1, 4))
    assert np.allclose(h.coeffs, full[:3])


def test_opposite_tails_cannot_multiply():
    up = LaurentSeries([1, 2], 0, "phi", PHI, open_hi=True)
    down = LaurentSeries([1, 2], -1, "phi", PHI, open_lo=True)
    with pytest.raises(WindowError):
        up * down


@given(finite_series(), finite_series())
def test_mul_matches_pointwise_product(f, g):
    z = PHI + 0.7 * np.exp(1j * np.linspace(0, 6, 7))
    assert np.allclose((f * g).evaluate(z), f.evaluate(z) * g.evaluate(z), atol=1e-11)


# ------------------------------------------------------------- projections


def test_projection_examples():
    f = S({-1: 2, 0: 3, 1: 4})
    assert project(f, "plus").to_dict() == {0: 3, 1: 4}
    assert project(f, "minus").to_dict() == {-1: 2}


@given(finite_series(), st.integers(-7, 7))
def test_projection_partition_and_idempotence(f, k):
    assert np.array_equal((f.plus() + f.minus()).coeffs_range(-6, 6), f.coeffs_range(-6, 6))
    for sel in ("plus", "minus", ("ge", k), ("le", k)):
        once = project(f, sel)
        assert np.array_equal(project(once, sel).coeffs_range(-8, 8), once.coeffs_range(-8, 8))


# ---------------------------------------------------------------- residues


def test_residue_phi_examples():
    assert residue_phi(S({-1: 1})) == 1
    assert residue_phi(S({0: 1, 3: 2})) == 0
    assert residue_phi(S({-1: 5, -2: 7})) == 5


def test_residue_phi_needs_phi_chart():
    with pytest.raises(ChartError):
        residue_phi(LaurentSeries([1.0], -1, "inf"))


def test_reexpand_geometric_and_binomial():
    g = reexpand_infinity(S({-1: 1}, phi=1.0), 12)
    assert np.allclose([g.coeff(-k) for k in range(1, 12)], 1.0)
    g2 = reexpand_infinity(S({-2: 1}, phi=1.0), 12)
    assert np.allclose([g2.coeff(-k) for k in range(2, 12)], np.arange(1, 11))
    z = reexpand_infinity(S({0: 0.3, 1: 1}, phi=0.3), 5)
    assert np.allclose(z.coeffs_range(-5, 1), [0, 0, 0, 0, 0, 0, 1])


def test_reexpand_needs_finite_positive_part():
    with pytest.raises(WindowError):
        reexpand_infinity(LaurentSeries([1, 1], 0, "phi", PHI, open_hi=True))


def test_residue_infinity_examples():
    assert residue_infinity(S({-1: 1}, phi=0.37)) == -1
    assert residue_infinity(reexpand_infinity(S({-2: 1}, phi=1.0), 10)) == 0
    assert residue_infinity(S({0: 1, 2: 4})) == 0


@given(finite_series())
def test_residues_sum_to_zero(f):
    assert abs(residue_infinity(reexpand_infinity(f, 20)) + residue_phi(f)) < 1e-12


# ------------------------------------------------------------------ powers


def test_square_root_at_infinity():
    c = 0.3 + 0.1j
    f = LaurentSeries([c, 0, 1], 0, "inf")
    r = power_rational(f, 1, 2, "down", 12)
    assert abs(r.coeff(1) - 1) < 1e-15
    assert abs(r.coeff(-1) - c / 2) < 1e-15
    assert abs(r.coeff(-3) + c**2 / 8) < 1e-15
    sq = r * r
    assert np.allclose(sq.coeffs_range(sq.lo + 1, 2)[-11:], LaurentSeries([c, 0, 1], 0, "inf").coeffs_range(-8, 2)[-11:])


def test_trivial_roots():
    r = power_rational(S({-2: 1}), 1, 2, "up", 6)
    assert abs(r.coeff(-1) - 1) < 1e-15 and np.allclose(r.coeffs_range(0, r.hi), 0)
    for m in (1, 2, 3, 5):
        r = power_rational(LaurentSeries([1.0], m, "inf"), 1, m, "down", 5)
        assert abs(r.coeff(1) - 1) < 1e-15


def test_power_errors():
    with pytest.raises(SeriesDomainError):
        power_rational(S({1: 1, 2: 1}), 1, 2, "up", 6)
    with pytest.raises(SeriesDomainError):
        power_rational(S({0: 0.0}), 1, 2, "up", 6)


@given(st.lists(cplx, min_size=6, max_size=6), st.integers(2, 5), st.integers(-2, 2))
def test_root_power_back(tail, q, lead):
    c = np.concatenate([[1.0], 0.2 * np.asarray(tail)])
    f = LaurentSeries(c, q * lead, "phi", PHI)
    T = 20
    r = power_rational(f, 1, q, "up", T)
    back = r
    for _ in range(q - 1):
        back = back * r
    lo = q * lead
    err = np.abs(back.coeffs_range(lo, lo + T - 1) - f.coeffs_range(lo, lo + T - 1)).max()
    assert err < 1e-10 * max(1.0, np.abs(r.coeffs).max()) ** q


def test_principal_branch():
    r = power_rational(S({0: -4.0}), 1, 2, "up", 3)
    assert abs(r.coeff(0) - 2j) < 1e-15


# --------------------------------------------------------------- reversion


def test_revert_identity():
    g = revert(LaurentSeries([1.0], 1, "phi", 0j), 6)
    assert abs(g.coeff(1) - 1) < 1e-15 and np.allclose(g.coeffs_range(2, 6), 0)


def test_revert_near_identity_at_infinity():
    h1 = 0.2 - 0.1j
    f = LaurentSeries([-h1, 0, 1], -1, "inf")  # z(chi) = chi - h1 chi^-1
    g = revert(f, 40)
    assert abs(g.coeff(1) - 1) < 1e-15 and abs(g.coeff(-1) - h1) < 1e-15 and abs(g.coeff(-2)) < 1e-15
    y = 3.0 * np.exp(1j * np.linspace(0, 6, 11))
    assert compose_check(f, g, y) < 1e-12
    assert compose_check(g, f, y) < 1e-12


def test_revert_simple_pole():
    b, phi = 0.7 + 0.2j, 0.15
    f = LaurentSeries([b], -1, "phi", phi)  # chihat(z) = b (z - phi)^-1
    g = revert(f, 8)
    assert abs(g.coeff(0) - phi) < 1e-15 and abs(g.coeff(-1) - b) < 1e-15
    assert np.allclose(g.coeffs_range(g.lo, -2), 0)


def test_revert_rejects_bad_lead():
    with pytest.raises(SeriesDomainError):
        revert(LaurentSeries([1.0], 2, "phi", 0j), 5)


@given(st.lists(cplx, min_size=4, max_size=4))
def test_revert_two_sided_inverse(tail):
    f = LaurentSeries(np.concatenate([[1.0], 0.1 * np.asarray(tail)]), 1, "phi", 0j)
    g = revert(f, 30)
    y = 0.1 * np.exp(1j * np.linspace(0, 6, 9))
    assert compose_check(f, g, y) < 1e-10
    assert compose_check(g, f, y) < 1e-10


# ----------------------------------------------------------- circle tools


def test_circle_transform_examples():
    grid = CircleGrid(PHI, 0.8, 64)
    assert np.allclose(sample(S({0: 1}), grid), 1)
    assert np.allclose(sample(S({1: 1}), grid), 0.8 * grid.unit)


def test_circle_transform_chart_mismatch():
    with pytest.raises(ChartError):
        circle_transform(S({0: 1}, phi=0.3), CircleGrid(0.0, 1.0, 16))


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        CircleGrid(0, 1.0, 100)


@given(st.integers(0, 2**31))
def test_circle_roundtrip_and_quadrature(seed):
    rng = np.random.default_rng(seed)
    grid = CircleGrid(PHI, 1.0, 256)
    c = rng.normal(size=17) + 1j * rng.normal(size=17)
    f = LaurentSeries(c, -8, "phi", PHI)
    back = circle_transform(circle_transform(f, grid), grid)
    assert np.abs(back.coeffs_range(-8, 8) - c).max() < 1e-12
    assert abs(contour_integral(circle_transform(f, grid)) - f.coeff(-1)) < 1e-12


def test_contour_integral_examples():
    grid = CircleGrid(PHI, 1.0, 256)
    assert abs(contour_integral(circle_transform(S({-1: 1}), grid)) - 1) < 1e-14
    z = grid.points
    eps = 0.01
    zeta = z + eps / z
    dzeta = 1 - eps / z**2
    assert abs(contour_integral(SampledFunction(grid, dzeta / zeta**2))) < 1e-14


def test_log_ratio_integral():
    grid = CircleGrid(0.0, 1.0, 256)
    z = grid.points
    assert abs(log_ratio_integral(z, grid)) < 1e-15
    assert abs(log_ratio_integral(2 * z, grid)) < 1e-14
    eps = 0.01
    fine = CircleGrid(0.0, 1.0, 1024)
    v = log_ratio_integral(z + eps / z, grid)
    vf = log_ratio_integral(fine.points + eps / fine.points, fine)
    assert abs(v - vf) < 1e-10
    # log(z / (z + eps/z)) = -log(1 + eps z^-2) has no z^-1 term
    assert abs(v) < 1e-12


def test_log_ratio_rejects_winding():
    grid = CircleGrid(0.0, 1.0, 64)
    with pytest.raises(ValueError):
        log_ratio_integral(grid.points**2, grid)
    assert winding_number(grid.points**2) == 2


def test_json_roundtrip():
    f = S({-2: 1 + 2j, 3: -0.5}, open_lo=True)
    g = LaurentSeries.from_json(f.to_json())
    assert g.window == f.window and g.open_lo and np.array_equal(g.coeffs, f.coeffs) and g.phi == f.phi
    grid = CircleGrid(PHI, 0.9, 32)
    assert CircleGrid.from_json(grid.to_json()) == grid


# ------------------------------------------------------------ kernel parity


@pytest.mark.skipif(len(K.BACKENDS) < 2, reason="numba unavailable")
def test_backends_agree(rng):
    a = rng.normal(size=12) + 1j * rng.normal(size=12)
    a[0] = 1.0
    b = rng.normal(size=9) + 1j * rng.normal(size=9)
    nb_, np_ = K.BACKENDS["numba"], K.BACKENDS["numpy"]
    assert np.allclose(nb_["conv"](a, b), np_["conv"](a, b))
    assert np.allclose(nb_["ps_inv"](a, 20), np_["ps_inv"](a, 20))
    assert np.allclose(nb_["ps_root"](a, 3, 20), np_["ps_root"](a, 3, 20))
    assert np.allclose(nb_["ps_revert"](np.concatenate([[0], a]), 15), np_["ps_revert"](np.concatenate([[0], a]), 15))
    A = rng.normal(size=(4, 7)) + 0j
    assert np.allclose(nb_["conv_rows"](A, A), np_["conv_rows"](A, A))
    t = np.array([0.1, 0, 1.0], dtype=complex)
    x0 = np.exp(1j * np.linspace(0, 6, 5))
    tg = x0 + 0.1 / x0
    xa, wa = nb_["laurent_newton"](t, -1, tg, x0 * 1.01, 1e-15, 60)
    xb, wb = np_["laurent_newton"](t, -1, tg, x0 * 1.01, 1e-15, 60)
    assert np.allclose(xa, xb) and wa < 1e-13 and wb < 1e-13
