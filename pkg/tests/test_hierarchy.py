import json

import numpy as np
import pytest

from frobwhit import hierarchy as hy
from frobwhit.manifold import random_point
from frobwhit.series_core import power_rational

SMALL = [(1, 1), (2, 1), (1, 2), (2, 2)]


def loop_series(lp, rng, lo, hi, amp=0.3):
    w = hi - lo + 1
    c = hy._fourier_field(rng, lp.Nx, 3, amp, 0.5, w) + amp
    return hy.LoopSeries(c, lo, lp.phi, lp.phi_x, lp.B)


@pytest.fixture(scope="module")
def lp21():
    return hy.random_loop_point(2, 1, seed=3)


# ------------------------------------------------------------------ bracket


def test_bracket_basics(lp21, rng):
    f, g, h = (loop_series(lp21, rng, -2, 2) for _ in range(3))
    assert (hy.lie_bracket(f, f)).norm() < 1e-15
    z = hy.LoopSeries(np.stack([lp21.phi, np.ones(lp21.Nx)], axis=1), 0, lp21.phi, lp21.phi_x, lp21.B)
    assert (hy.lie_bracket(z, g) - g.dx()).norm() < 1e-12
    jac = (
        hy.lie_bracket(f, hy.lie_bracket(g, h))
        + hy.lie_bracket(g, hy.lie_bracket(h, f))
        + hy.lie_bracket(h, hy.lie_bracket(f, g))
    )
    assert jac.norm() < 1e-10


def test_spectral_dx():
    x = hy.x_nodes(32)
    v = np.sin(3 * x) + 0.2 * np.cos(x)
    assert np.abs(hy.spectral_dx(v) - (3 * np.cos(3 * x) - 0.2 * np.sin(x))).max() < 1e-12


# ---------------------------------------------------------- Poisson tensors


@pytest.mark.parametrize("m,n", SMALL)
def test_poisson_vs_metrics_on_constant_loop(m, n, rng):
    from frobwhit.suites import modulated_cotangent

    p = random_point(m, n, seed=4)
    lc = hy.constant_loop(p)
    w = modulated_cotangent(lc, p, rng)
    for nu in (1, 2):
        A, B = hy.poisson_apply(lc, w, nu), hy.metric_maps_on_dx(lc, w, nu)
        assert (A - B).norm() < 1e-10 * max(B.norm(), 1)


@pytest.mark.parametrize("m,n", SMALL)
def test_poisson_vanishes_when_nothing_moves(m, n):
    from frobwhit.frobenius import random_cotangent

    p = random_point(m, n, seed=5)
    lc = hy.constant_loop(p)
    assert lc.is_x_independent()
    c = random_cotangent(p, np.random.default_rng(0))
    w = hy.LoopCotangent(lc.wrap([c.omega] * lc.Nx), lc.wrap([c.omegahat] * lc.Nx))
    for nu in (1, 2):
        assert hy.poisson_apply(lc, w, nu).norm() < 1e-14
    for flow in ("s", "shat"):
        assert hy.whitham_rhs(lc, flow, 1).norm() < 1e-14
    assert max(hy.recursion_residual(lc, 1, "s")) < 1e-14


def test_sigma_vanishes_for_residue_free_input(lp21):
    # a covector proportional to the point's own gradient of H_m has [w, a] residue-free
    w = hy.var_gradient(lp21, lp21.m, "H")
    assert np.abs(hy.sigma(lp21, w)).max() < 1e-14


# ------------------------------------------------------------------- roots


@pytest.mark.parametrize("m,n", SMALL + [(3, 2)])
def test_roots_power_back(m, n):
    p = random_point(m, n, seed=6)
    from frobwhit.frobenius import frame

    F = frame(p)
    lam = hy.lambda_power(p, 1, chart="phi")
    a_back = power_rational(lam, m, 1, "down", 30)
    assert np.abs(a_back.coeffs_range(-12, m) - F.a.coeffs_range(-12, m)).max() < 1e-11
    lamh = hy.lambda_power(p, 1, "lambdahat")
    ah_back = power_rational(lamh, n, 1, "up", 30)
    assert np.abs(ah_back.coeffs_range(-n, 12) - F.ah.coeffs_range(-n, 12)).max() < 1e-11


def test_trivial_roots():
    from frobwhit.frobenius import frame

    p = random_point(1, 1, seed=7)
    F = frame(p)
    lam = hy.lambda_power(p, 1, chart="phi")
    assert np.abs(lam.coeffs_range(-20, 1) - F.a.coeffs_range(-20, 1)).max() < 1e-14
    lamh = hy.lambda_power(p, 1, "lambdahat")
    assert np.abs(lamh.coeffs_range(-1, 20) - F.ah.coeffs_range(-1, 20)).max() < 1e-14


@pytest.mark.parametrize("m,n", SMALL)
def test_plus_projection_two_routes(m, n):
    p = random_point(m, n, seed=8)
    for k in (1, 2, 3):
        via_inf = hy.lambda_plus_inf(p, k)
        direct = hy.lambda_power(p, k, chart="phi").plus()
        assert np.abs(via_inf.coeffs_range(0, k) - direct.coeffs_range(0, k)).max() < 1e-10


@pytest.mark.parametrize("m,n", SMALL)
def test_flow_k_equals_m(m, n):
    lp = hy.random_loop_point(m, n, seed=2)
    a, ah = lp.a(), lp.ahat()
    gen = a.plus()
    want = hy.LoopTangent(hy.lie_bracket(gen, a).le(m - 2), hy.lie_bracket(gen, ah).ge(-n - 1))
    assert (hy.whitham_rhs(lp, "s", m) - want).norm() < 1e-10


def test_translation_rhs_m1():
    lp = hy.random_loop_point(1, 2, seed=4)
    rhs = hy.whitham_rhs(lp, "s", 1)
    a, ah = lp.a(), lp.ahat()
    assert (rhs.xi - a.dx().le(-1)).norm() < 1e-12
    assert (rhs.xihat - ah.dx().ge(-3)).norm() < 1e-12


# ------------------------------------------------------------ Hamiltonians


def test_H1_is_mean_residue_m1():
    lp = hy.random_loop_point(1, 1, seed=5)
    v1 = lp.a().coeff(-1)
    assert abs(hy.hamiltonian(lp, 1) - hy.x_mean(v1)) < 1e-14


def test_Hhat1_n1():
    lp = hy.random_loop_point(2, 1, seed=5)
    assert abs(hy.hamiltonian(lp, 1, "Hhat") - hy.x_mean(lp.ahat().coeff(-1))) < 1e-14


@pytest.mark.parametrize("m,n", SMALL + [(3, 2)])
def test_gradient_fd(m, n):
    lp = hy.random_loop_point(m, n, seed=6)
    for which in ("H", "Hhat"):
        for k in (1, 2, 3):
            assert hy.check_gradient(lp, k, which, directions=5, seed=k) < 1e-6, (which, k)


@pytest.mark.parametrize("m,n", SMALL)
def test_recursion(m, n):
    lp = hy.random_loop_point(m, n, seed=7)
    for which in ("s", "shat"):
        for k in (1, 2):
            r1, r2 = hy.recursion_residual(lp, k, which)
            assert r1 < 1e-6 and r2 < 1e-6, (which, k, r1, r2)


@pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (2, 2)])
def test_flows_commute(m, n):
    lp = hy.random_loop_point(m, n, seed=2)
    assert hy.flow_commutator(lp) < 1e-6
    assert hy.flow_commutator(lp, ("s", 1), ("shat", 1)) < 1e-6


# --------------------------------------------------------------- brackets


def test_bracket_antisymmetry(lp21):
    Fs = [hy.hamiltonian_functional(k) for k in (1, 2, 3)]
    Fs += [hy.hamiltonian_functional(1, "Hhat"), hy.moment_functional(0), hy.moment_functional(2)]
    Fs.append(hy.product_functional(Fs[4], Fs[0]))
    biggest = 0.0
    for nu in (1, 2):
        for i, F in enumerate(Fs):
            assert abs(hy.poisson_bracket(F, F, lp21, nu)) < 1e-12
            for G in Fs[i + 1 :]:
                a, b = hy.poisson_bracket(F, G, lp21, nu), hy.poisson_bracket(G, F, lp21, nu)
                biggest = max(biggest, abs(a))
                assert abs(a + b) < 1e-8
    assert biggest > 1e-6  # the check is not vacuous


@pytest.mark.parametrize("m,n", SMALL)
def test_involution(m, n):
    lp = hy.random_loop_point(m, n, seed=8)
    Hs = [hy.hamiltonian_functional(k) for k in (1, 2, 3)]
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(hy.poisson_bracket(Hs[i], Hs[j], lp, 1)) < 1e-7


# --------------------------------------------------------------- evolution


def test_translation_flow():
    from frobwhit.suites import translation_error

    for n in (1, 2):
        assert translation_error(hy.random_loop_point(1, n, seed=9)) < 1e-8


def test_rk4_order():
    lp = hy.random_loop_point(1, 1, seed=9)
    T = 0.4
    errs = []
    for steps in (2, 4, 8):
        tr = hy.evolve(lp, ("s", 1), dt=T / steps, steps=steps, monitor=(), band=False)
        errs.append(np.abs(tr.points[-1].state() - hy.translated(lp, T).state()).max())
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(3.5 < o < 4.5 for o in orders), orders


def test_conservation_s2():
    lp = hy.random_loop_point(2, 1, seed=1)
    tr = hy.evolve(lp, ("s", 2), dt=0.002, steps=100, monitor=(("H", 1), ("H", 2)))
    for key, d in tr.drift.items():
        assert max(abs(x) for x in d) < 1e-7, key


def test_evolution_error_on_blowup():
    lp = hy.random_loop_point(1, 1, seed=2)
    with pytest.raises(hy.EvolutionError) as exc:
        hy.evolve(lp, ("s", 3), dt=5.0, steps=20, monitor=())
    assert exc.value.step is not None and exc.value.trajectory is not None


def test_zero_steps_is_identity():
    lp = hy.random_loop_point(2, 2, seed=3)
    tr = hy.evolve(lp, ("s", 1), dt=0.01, steps=0)
    assert np.array_equal(tr.points[-1].state(), lp.state())


def test_loop_json_roundtrip():
    lp = hy.random_loop_point(2, 2, seed=4)
    back = hy.LoopPoint.from_json(json.loads(json.dumps(lp.to_json())))
    assert np.abs(back.state() - lp.state()).max() < 1e-14


def test_loop_generator_valid_and_deterministic():
    a = hy.random_loop_point(3, 2, seed=11)
    b = hy.random_loop_point(3, 2, seed=11)
    assert a.validate() is None
    assert np.array_equal(a.state(), b.state())
    assert not a.is_x_independent()
