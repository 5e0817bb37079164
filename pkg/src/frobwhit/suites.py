"""Verification suites: every structural identity as a residual with a tolerance."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from . import frobenius as fb
from . import hierarchy as hy
from . import manifold as mf
from .series_core import (
    CircleGrid,
    LaurentSeries,
    circle_transform,
    contour_integral,
    power_rational,
)

TOLERANCES = {
    "series.circle_transform": 1e-12,
    "series.quadrature": 1e-12,
    "series.power_back": 1e-11,
    "manifold.validate": 0.0,
    "manifold.flat_roundtrip": 1e-8,
    "manifold.h_routes": 1e-12,
    "frobenius.gram": 1e-8,
    "frobenius.eta_roundtrip": 1e-9,
    "frobenius.g_roundtrip": 1e-9,
    "frobenius.star_commutative": 1e-12,
    "frobenius.star_associative": 1e-10,
    "frobenius.unity": 1e-10,
    "frobenius.c_two_route": 1e-8,
    "hierarchy.p1_eta": 1e-10,
    "hierarchy.p2_g": 1e-10,
    "hierarchy.recursion": 1e-6,
    "hierarchy.gradient_fd": 1e-6,
    "hierarchy.translation": 1e-8,
}

SUITES = ("series", "manifold", "frobenius", "hierarchy")
ROUNDTRIP_IMAX = 32


@dataclass
class Report:
    check: str
    params: dict
    residual: float
    tolerance: float
    wall: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_json(self, timing=False):
        out = {
            "check": self.check,
            "point_seed": self.params.get("seed"),
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "params": self.params,
        }
        if timing:
            out["wall_time"] = self.wall
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Context:
    m: int = 1
    n: int = 1
    seed: int = 1
    I_max: int = mf.DEFAULT_IMAX
    K: int = mf.DEFAULT_WINDOW
    N: int = 256
    radius: float = 1.0
    M: int = hy.DEFAULT_M
    tolerances: dict = field(default_factory=dict)
    point: mf.PointMN | None = None

    def tol(self, name):
        return float(self.tolerances.get(name, TOLERANCES[name]))

    def params(self):
        return {"m": self.m, "n": self.n, "seed": self.seed}

    def get_point(self):
        if self.point is None:
            self.point = mf.random_point(self.m, self.n, seed=self.seed, K=self.K, radius=self.radius, N=self.N)
        return self.point


def _run(ctx: Context, name: str, fn) -> Report:
    t0 = time.perf_counter()
    try:
        res, note = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed suite
        res, note = float("inf"), f"{type(exc).__name__}: {exc}"
    return Report(name, ctx.params(), float(res), ctx.tol(name), time.perf_counter() - t0, note)


# ------------------------------------------------------------------ series


def series_suite(ctx: Context):
    rng = np.random.default_rng(ctx.seed)
    grid = CircleGrid(0.1 + 0.05j, ctx.radius, ctx.N)
    lo, hi = grid.band
    c = (rng.normal(size=hi - lo + 1) + 1j * rng.normal(size=hi - lo + 1)) * 0.7 ** np.abs(np.arange(lo, hi + 1))
    f = LaurentSeries(c, lo, "phi", grid.center)

    def roundtrip():
        back = circle_transform(circle_transform(f, grid), grid)
        return float(np.abs(back.coeffs_range(lo, hi) - c).max()), ""

    def quadrature():
        return abs(contour_integral(circle_transform(f, grid)) - f.coeff(-1)), ""

    def power_back():
        g = LaurentSeries(np.concatenate([[1.0], 0.3 * c[-lo + 1 : -lo + 8]]), 3, "phi", 0j)
        r = power_rational(g, 1, 3, "up", 30)
        r3 = r * r * r
        return float(np.abs(r3.coeffs_range(3, 30) - g.coeffs_range(3, 30)).max()), ""

    return [
        _run(ctx, "series.circle_transform", roundtrip),
        _run(ctx, "series.quadrature", quadrature),
        _run(ctx, "series.power_back", power_back),
    ]


# ---------------------------------------------------------------- manifold


def flat_roundtrip_error(p: mf.PointMN, I_max=ROUNDTRIP_IMAX) -> float:
    fc = mf.flat_coordinates(p, I_max)
    K_ = max(-p.zeta.lo, p.zeta.hi)
    q = mf.point_from_flat(fc, K=K_, grid=p.grid)
    dz = np.abs(q.zeta.coeffs_range(-K_, K_) - p.zeta.coeffs_range(-K_, K_)).max()
    dl = np.abs(q.ell - p.ell).max()
    return float(max(dz, dl))


def manifold_suite(ctx: Context):
    def valid():
        rep = mf.validate(ctx.get_point())
        return (0.0 if rep.ok else 1.0), "" if rep.ok else f"C1={rep.c1} C2={rep.c2} C3={rep.c3}"

    def roundtrip():
        return flat_roundtrip_error(ctx.get_point()), f"I_max={ROUNDTRIP_IMAX}"

    def h_routes():
        p = ctx.get_point()
        a, b = mf.h_coordinates(p, "inf"), mf.h_coordinates(p, "phi")
        return float(max([abs(x - y) for x, y in zip(a, b)], default=0.0)), ""

    out = [_run(ctx, "manifold.validate", valid)]
    if out[0].passed:
        out += [_run(ctx, "manifold.flat_roundtrip", roundtrip), _run(ctx, "manifold.h_routes", h_routes)]
    return out


# --------------------------------------------------------------- frobenius


def frobenius_suite(ctx: Context, n_cov=20):
    p = ctx.get_point()
    rng = np.random.default_rng(ctx.seed + 1000)
    ws = [fb.random_cotangent(p, rng) for _ in range(n_cov)]

    def gram():
        labels = mf.all_labels(p.m, p.n, 3)
        return float(np.abs(fb.flat_gram(p, labels) - fb.expected_gram(p, labels)).max()), ""

    def eta_rt():
        return max(fb.vec_distance(fb.eta_inverse(p, fb.eta_apply(p, w)), w) / max(w.norm(), 1e-300) for w in ws), ""

    def g_rt():
        return max(fb.vec_distance(fb.g_inverse(p, fb.g_apply(p, w)), w) / max(w.norm(), 1e-300) for w in ws), ""

    def commutative():
        return max(fb.vec_distance(fb.star(p, u, v), fb.star(p, v, u)) for u, v in zip(ws[:5], ws[5:10])), ""

    def associative():
        return max(
            fb.vec_distance(fb.star(p, fb.star(p, u, v), w), fb.star(p, u, fb.star(p, v, w)))
            for u, v, w in zip(ws[:4], ws[4:8], ws[8:12])
        ), ""

    def unity():
        e = fb.unity_cotangent(p)
        return max(fb.vec_distance(fb.star(p, e, w), w) for w in ws[:5]), ""

    def c_two_route():
        labels = mf.all_labels(p.m, p.n, 2)
        worst = 0.0
        for u, v, w in combinations_with_replacement(labels, 3):
            worst = max(worst, abs(fb.c_direct(p, u, v, w) - fb.c_pairing(p, u, v, w)))
        return worst, ""

    return [
        _run(ctx, "frobenius.gram", gram),
        _run(ctx, "frobenius.eta_roundtrip", eta_rt),
        _run(ctx, "frobenius.g_roundtrip", g_rt),
        _run(ctx, "frobenius.star_commutative", commutative),
        _run(ctx, "frobenius.star_associative", associative),
        _run(ctx, "frobenius.unity", unity),
        _run(ctx, "frobenius.c_two_route", c_two_route),
    ]


# --------------------------------------------------------------- hierarchy


def modulated_cotangent(lp: hy.LoopPoint, p: mf.PointMN, rng) -> hy.LoopCotangent:
    """Two random covectors at ``p`` with band-limited x-dependent weights."""
    c1, c2 = fb.random_cotangent(p, rng), fb.random_cotangent(p, rng)
    f1 = hy._fourier_field(rng, lp.Nx, 3, 0.5, 0.5) + 1.0
    f2 = hy._fourier_field(rng, lp.Nx, 3, 0.5, 0.5)
    om = lp.wrap([c1.omega] * lp.Nx) * f1 + lp.wrap([c2.omega] * lp.Nx) * f2
    omh = lp.wrap([c1.omegahat] * lp.Nx) * f1 + lp.wrap([c2.omegahat] * lp.Nx) * f2
    return hy.LoopCotangent(om, omh)


def translation_error(lp: hy.LoopPoint, T=0.1, steps=4) -> float:
    tr = hy.evolve(lp, ("s", 1), dt=T / steps, steps=steps, monitor=(), band=False)
    return float(np.abs(tr.points[-1].state() - hy.translated(lp, T).state()).max())


def hierarchy_suite(ctx: Context):
    p = ctx.get_point()
    lc = hy.constant_loop(p, M=ctx.M)
    rng = np.random.default_rng(ctx.seed + 2000)
    w = modulated_cotangent(lc, p, rng)
    lp = hy.random_loop_point(ctx.m, ctx.n, seed=ctx.seed, M=ctx.M, K=ctx.K)

    def ident(nu):
        def f():
            A, B = hy.poisson_apply(lc, w, nu), hy.metric_maps_on_dx(lc, w, nu)
            return (A - B).norm() / max(B.norm(), 1.0), ""

        return f

    def recursion():
        return max(max(hy.recursion_residual(lp, k, which)) for k in (1, 2) for which in ("s", "shat")), ""

    def gradient():
        return max(hy.check_gradient(lp, k, which, directions=4, seed=ctx.seed) for k in (1, 2) for which in ("H", "Hhat")), ""

    out = [
        _run(ctx, "hierarchy.p1_eta", ident(1)),
        _run(ctx, "hierarchy.p2_g", ident(2)),
        _run(ctx, "hierarchy.recursion", recursion),
        _run(ctx, "hierarchy.gradient_fd", gradient),
    ]
    if ctx.m == 1:
        out.append(_run(ctx, "hierarchy.translation", lambda: (translation_error(lp), "")))
    return out


SUITE_FUNCS = {
    "series": series_suite,
    "manifold": manifold_suite,
    "frobenius": frobenius_suite,
    "hierarchy": hierarchy_suite,
}


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("FROBWHIT_THREADS", "1")))
    except ValueError:
        return 1


def run_suites(contexts, suite="all"):
    """Run the named suite for every context; reports sorted by check name."""
    names = SUITES if suite == "all" else (suite,)
    for s in names:
        if s not in SUITE_FUNCS:
            raise ValueError(f"unknown suite {s!r}")

    def one(ctx):
        out = []
        if "series" in names:
            out += series_suite(ctx)
        rest = [s for s in names if s != "series"]
        if rest:
            # a point-level failure short-circuits the suites that need the point
            out += manifold_suite(ctx) if "manifold" in rest else []
            if mf.validate(ctx.get_point()).ok:
                out += [r for s in rest if s != "manifold" for r in SUITE_FUNCS[s](ctx)]
            elif "manifold" not in rest:
                out += manifold_suite(ctx)[:1]
        return out

    with ThreadPoolExecutor(max_workers=thread_count()) as ex:
        results = list(ex.map(one, contexts))
    reports = [r for rs in results for r in rs]
    return sorted(reports, key=lambda r: (r.check, r.params.get("m"), r.params.get("n"), r.params.get("seed")))
