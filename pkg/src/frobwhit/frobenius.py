"""Frobenius structure at a point of M_{m,n}.

Vectors are pairs of closed phi-chart series truncated to the grid band.
Products of two downward (or two upward) series are exact inside the band;
mixed products are two-sided sums whose truncation error is governed by the
decay of the factors.  Divisions by ``zeta'`` and by ``ahat' a - a' ahat``
are done on the circle; divisions by ``a'``, ``ahat'`` and ``ell'`` are formal
expansions in their own chart.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .manifold import (
    CoordLabel,
    PointMN,
    ShapeError,
    check_label,
    chi_power,
    chihat_power,
    coordinate_degree,
)
from .series_core import (
    CircleGrid,
    LaurentSeries,
    SampledFunction,
    circle_transform,
    contour_integral,
    power_rational,
    sample,
)

SHAPE_TOL = 1e-10
K_CUTOFF = 1e-12


# ------------------------------------------------------------------ vectors


@dataclass(frozen=True)
class TangentVec:
    xi: LaurentSeries
    xihat: LaurentSeries

    def __add__(self, o):
        return TangentVec(_add(self.xi, o.xi), _add(self.xihat, o.xihat))

    def __sub__(self, o):
        return TangentVec(_add(self.xi, -o.xi), _add(self.xihat, -o.xihat))

    def __mul__(self, c):
        return TangentVec(self.xi * c, self.xihat * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def norm(self):
        return max(self.xi.norm(), self.xihat.norm())

    def to_json(self):
        return {"xi": self.xi.to_json(), "xihat": self.xihat.to_json()}


@dataclass(frozen=True)
class CotangentVec:
    omega: LaurentSeries
    omegahat: LaurentSeries

    def __add__(self, o):
        return CotangentVec(_add(self.omega, o.omega), _add(self.omegahat, o.omegahat))

    def __sub__(self, o):
        return CotangentVec(_add(self.omega, -o.omega), _add(self.omegahat, -o.omegahat))

    def __mul__(self, c):
        return CotangentVec(self.omega * c, self.omegahat * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def norm(self):
        return max(self.omega.norm(), self.omegahat.norm())

    def to_json(self):
        return {"omega": self.omega.to_json(), "omegahat": self.omegahat.to_json()}


def vec_distance(u, v) -> float:
    """Coefficient sup-norm of the difference of two vectors of the same kind."""
    d = u - v
    return d.norm()


# ------------------------------------------------------------ series helpers


def _closed(s: LaurentSeries, lo=None, hi=None) -> LaurentSeries:
    s = LaurentSeries(s.coeffs, s.lo, s.chart, s.phi)
    if lo is not None or hi is not None:
        s = s.clip(s.lo if lo is None else lo, s.hi if hi is None else hi)
    return s


def _add(f, g):
    return _closed(f) + _closed(g)


def _pair_series(f: LaurentSeries, g: LaurentSeries) -> complex:
    """Coefficient of ``(z - phi)**-1`` in ``f g`` for closed series."""
    if f.coeffs.size == 0 or g.coeffs.size == 0:
        return 0j
    gc = g.coeffs_range(-1 - f.hi, -1 - f.lo)[::-1]
    return complex(np.dot(f.coeffs, gc))


def _zero(phi, e=0):
    return LaurentSeries([0.0], e, "phi", phi)


class Frame:
    """Per-point cache of the series and samples used by every operation."""

    def __init__(self, p: PointMN):
        self.p = p
        self.m, self.n, self.phi = p.m, p.n, p.phi
        self.grid: CircleGrid = p.grid
        self.B = p.band[1]
        self.deep = 2 * self.B + 2 * (self.m + self.n) + 8
        self._c = {}

    def get(self, key, fn):
        if key not in self._c:
            self._c[key] = fn()
        return self._c[key]

    # band arithmetic
    def band(self, s: LaurentSeries) -> LaurentSeries:
        return _closed(s, -self.B, self.B)

    def mul(self, f, g) -> LaurentSeries:
        return self.band(_closed(f) * _closed(g))

    def from_samples(self, vals) -> LaurentSeries:
        return circle_transform(SampledFunction(self.grid, vals), self.grid)

    def samples(self, s: LaurentSeries) -> np.ndarray:
        return sample(self.band(s), self.grid)

    # point data
    @property
    def a(self):
        return self.get("a", lambda: self.band(self.p.a()))

    @property
    def ah(self):
        return self.get("ah", lambda: self.band(self.p.ahat()))

    @property
    def da(self):
        return self.get("da", lambda: self.a.derivative())

    @property
    def dah(self):
        return self.get("dah", lambda: self.ah.derivative())

    @property
    def zeta(self):
        return self.get("zeta", lambda: self.band(self.p.zeta))

    @property
    def dzeta(self):
        return self.get("dzeta", lambda: self.zeta.derivative())

    @property
    def ell(self):
        return self.get("ell", lambda: self.p.ell_series())

    @property
    def dell(self):
        return self.get("dell", lambda: self.ell.derivative())

    @property
    def dzeta_samples(self):
        return self.get("dzeta_s", lambda: self.p.samples("dzeta"))

    @property
    def zeta_samples(self):
        return self.get("zeta_s", lambda: self.p.samples("zeta"))

    @property
    def wronskian_samples(self):
        # ahat' a - a' ahat
        return self.get("W_s", lambda: -self.p.wronskian_samples())

    # formal reciprocals, truncated to `deep` terms
    def _formal(self, key, f, direction):
        return self.get(key, lambda: _closed(power_rational(f, -1, 1, direction, self.deep)))

    @property
    def inv_da(self):
        return self._formal("inv_da", self.da, "down")

    @property
    def inv_dah(self):
        return self._formal("inv_dah", self.dah, "up")

    @property
    def inv_dell_down(self):
        return self._formal("inv_dell_down", self.dell, "down")

    @property
    def inv_dell_up(self):
        return self._formal("inv_dell_up", self.dell, "up")

    def chi(self, j):
        return self.get(("chi", j), lambda: _closed(chi_power(self.p, j)))

    def chihat(self, k):
        return self.get(("chihat", k), lambda: _closed(chihat_power(self.p, k)))

    def zeta_pow(self, i):
        """``zeta**i`` on the band (sampled for negative powers)."""
        def build():
            if i >= 0:
                out = LaurentSeries([1.0], 0, "phi", self.phi)
                for _ in range(i):
                    out = self.mul(out, self.zeta)
                return out
            return self.from_samples(self.zeta_samples ** i)

        return self.get(("zpow", i), build)

    def Z(self, i):
        """``zeta**i zeta'``."""
        return self.get(("Z", i), lambda: self.from_samples(self.zeta_samples ** i * self.dzeta_samples))

    def R(self, j):
        """``ell' chi**-j`` (downward)."""
        return self.get(("R", j), lambda: _closed(self.dell * self.chi(-j)))

    def Rhat(self, k):
        """``ell' chihat**-k`` (upward)."""
        return self.get(("Rhat", k), lambda: _closed(self.dell * self.chihat(-k)))


def frame(p: PointMN) -> Frame:
    return p.cached("frame", lambda: Frame(p))


# -------------------------------------------------------------- shape checks


def _enforce(s: LaurentSeries, lo, hi, scale, what):
    s = _closed(s)
    outside = [c for e, c in zip(range(s.lo, s.hi + 1), s.coeffs) if e < lo or e > hi]
    lost = max((abs(c) for c in outside), default=0.0)
    if lost > SHAPE_TOL * max(scale, 1e-300) and lost > 1e-300:
        raise ShapeError(f"{what}: truncated mass {lost:.3e} exceeds {SHAPE_TOL:g} of norm {scale:.3e}")
    return s.clip(lo, hi)


def enforce_tangent(p: PointMN, v: TangentVec) -> TangentVec:
    """Hard truncation to ``exp(xi) <= m-2`` and ``exp(xihat) >= -n-1``."""
    B = p.band[1]
    scale = v.norm()
    return TangentVec(
        _enforce(v.xi, -B, p.m - 2, scale, "xi"),
        _enforce(v.xihat, -p.n - 1, B, scale, "xihat"),
    )


def enforce_cotangent(p: PointMN, w: CotangentVec) -> CotangentVec:
    """Hard truncation to ``exp(omega) >= -m+1`` and ``exp(omegahat) <= n``."""
    B = p.band[1]
    scale = w.norm()
    return CotangentVec(
        _enforce(w.omega, -p.m + 1, B, scale, "omega"),
        _enforce(w.omegahat, -B, p.n, scale, "omegahat"),
    )


# ------------------------------------------------------------------ pairing


def pair(w: CotangentVec, v: TangentVec) -> complex:
    """``(1/2 pi i) oint (omega xi + omegahat xihat) dz`` as a coefficient sum."""
    return _pair_series(_closed(w.omega), _closed(v.xi)) + _pair_series(_closed(w.omegahat), _closed(v.xihat))


def pair_quadrature(p: PointMN, w: CotangentVec, v: TangentVec) -> complex:
    """The same pairing evaluated by quadrature on the circle."""
    F = frame(p)
    vals = F.samples(w.omega) * F.samples(v.xi) + F.samples(w.omegahat) * F.samples(v.xihat)
    return contour_integral(SampledFunction(F.grid, vals))


# ------------------------------------------------------------------ eta map


def eta_apply(p: PointMN, w: CotangentVec) -> TangentVec:
    F = frame(p)
    om, omh = F.band(w.omega), F.band(w.omegahat)
    S = om + omh
    M = F.mul(om, F.da) + F.mul(omh, F.dah)
    xi = F.mul(F.da, S.minus()) - M.minus()
    xih = F.mul(F.dah, S.plus()) * -1.0 + M.plus()
    return enforce_tangent(p, TangentVec(xi, xih))


def _zeta_quotient(F: Frame, v: TangentVec) -> LaurentSeries:
    diff = F.samples(v.xi) - F.samples(v.xihat)
    return F.from_samples(diff / F.dzeta_samples)


def eta_inverse(p: PointMN, v: TangentVec) -> CotangentVec:
    F = frame(p)
    m, n = p.m, p.n
    D = _zeta_quotient(F, v)
    xi, xih = F.band(v.xi), F.band(v.xihat)
    up = _closed(xi.plus()) * F.inv_da
    lo = _closed(xih.le(-1)) * F.inv_dah
    om = F.band(up.ge(-m + 1)) - D.ge(-m + 1)
    omh = F.band(lo.le(n)) * -1.0 + D.le(n)
    return enforce_cotangent(p, CotangentVec(om, omh))


def delta_zeta(v: TangentVec) -> LaurentSeries:
    return _add(v.xi, -v.xihat)


def delta_ell(v: TangentVec) -> LaurentSeries:
    return _add(_closed(v.xi).plus(), _closed(v.xihat).minus())


def _res_pair_ell(F: Frame, d1, d2) -> complex:
    """``-(res_inf + res_phi) d1 d2 / ell' dz`` for finite ``d1``, ``d2``."""
    prod = _closed(d1) * _closed(d2)
    down = prod * F.inv_dell_down
    up = prod * F.inv_dell_up
    # res_inf = -coef_{-1}(down), res_phi = coef_{-1}(up)
    return down.coeff(-1) - up.coeff(-1)


def metric(p: PointMN, v1: TangentVec, v2: TangentVec) -> complex:
    """Flat metric: circle term in ``delta zeta`` plus residue terms in ``delta ell``."""
    F = frame(p)
    z1 = F.samples(delta_zeta(v1))
    z2 = F.samples(delta_zeta(v2))
    circle = -contour_integral(SampledFunction(F.grid, z1 * z2 / F.dzeta_samples))
    return circle + _res_pair_ell(F, delta_ell(v1), delta_ell(v2))


# --------------------------------------------------------------- flat bases


def flat_basis(p: PointMN, label, kind: str = "tangent"):
    m, n = p.m, p.n
    kind_, idx = check_label(CoordLabel(*label), m, n)
    F = frame(p)
    key = ("flat", kind, kind_, idx)

    def build():
        if kind == "tangent":
            if kind_ == "t":
                Z = F.Z(idx)
                return enforce_tangent(p, TangentVec(-Z.minus(), Z.plus()))
            if kind_ == "h":
                R = _closed(F.R(idx).plus())
                return TangentVec(R, R)
            R = _closed(F.Rhat(idx).minus()) * -1.0
            return TangentVec(R, R)
        if kind == "cotangent":
            if kind_ == "t":
                zi = F.zeta_pow(idx)
                return CotangentVec(zi.ge(-m + 1), zi.le(n) * -1.0)
            if kind_ == "h":
                return CotangentVec(F.band(F.chi(-idx)).ge(-m + 1), _zero(p.phi, 0))
            return CotangentVec(_zero(p.phi, 0), F.band(F.chihat(-idx)).le(n))
        raise ValueError(f"kind must be 'tangent' or 'cotangent', not {kind!r}")

    return F.get(key, build)


def flat_gram(p: PointMN, labels) -> np.ndarray:
    vs = [flat_basis(p, u) for u in labels]
    G = np.empty((len(vs), len(vs)), dtype=np.complex128)
    for i, v1 in enumerate(vs):
        for j, v2 in enumerate(vs):
            G[i, j] = metric(p, v1, v2)
    return G


def expected_gram(p: PointMN, labels) -> np.ndarray:
    m, n = p.m, p.n
    G = np.zeros((len(labels), len(labels)), dtype=np.complex128)
    for a, (k1, i1) in enumerate(labels):
        for b, (k2, i2) in enumerate(labels):
            if k1 != k2:
                continue
            if k1 == "t" and i1 + i2 == -1:
                G[a, b] = -1
            elif k1 == "h" and i1 + i2 == m:
                G[a, b] = m
            elif k1 == "hhat" and i1 + i2 == n:
                G[a, b] = n
    return G


# ----------------------------------------------------------------- products


def star(p: PointMN, w1: CotangentVec, w2: CotangentVec) -> CotangentVec:
    F = frame(p)
    m, n = p.m, p.n
    o1, o2 = F.band(w1.omega), F.band(w2.omega)
    h1, h2 = F.band(w1.omegahat), F.band(w2.omegahat)
    A1, A2 = F.mul(o1, F.da), F.mul(o2, F.da)
    C1, C2 = F.mul(h1, F.dah), F.mul(h2, F.dah)
    om = (
        F.mul(o2, A1.plus())
        - F.mul(o1, A2.minus())
        - F.mul(o2, C1.minus())
        - F.mul(o1, C2.minus())
    )
    omh = (
        F.mul(h2, C1.plus())
        - F.mul(h1, C2.minus())
        + F.mul(h1, A2.plus())
        + F.mul(h2, A1.plus())
    )
    return enforce_cotangent(p, CotangentVec(om.ge(-m + 1), omh.le(n)))


def circ(p: PointMN, v1: TangentVec, v2: TangentVec) -> TangentVec:
    return eta_apply(p, star(p, eta_inverse(p, v1), eta_inverse(p, v2)))


def unity_cotangent(p: PointMN) -> CotangentVec:
    return CotangentVec(LaurentSeries([1.0 / p.m], -p.m + 1, "phi", p.phi), _zero(p.phi, 0))


def unity_tangent(p: PointMN) -> TangentVec:
    """``e = eta(e*)``."""
    return eta_apply(p, unity_cotangent(p))


def unity_flat(p: PointMN) -> TangentVec:
    """The unity written in the flat basis."""
    if p.m == 1:
        return flat_basis(p, ("t", 0)) + flat_basis(p, ("hhat", 0))
    return flat_basis(p, ("h", p.m - 1)) * (1.0 / p.m)


def trilinear(p: PointMN, w1, w2, w3) -> complex:
    """``< w1 * w2, eta w3 >`` on the cotangent space."""
    return pair(star(p, w1, w2), eta_apply(p, w3))


# -------------------------------------------------------------- the 3-tensor


def _circle(F: Frame, vals) -> complex:
    return contour_integral(SampledFunction(F.grid, vals))


def _res_inf(s: LaurentSeries) -> complex:
    return -_closed(s).coeff(-1)


def _res_phi(s: LaurentSeries) -> complex:
    return _closed(s).coeff(-1)


_ORDER = {"t": 0, "h": 1, "hhat": 2}


def _ttt(F, i1, i2, i3):
    s = i1 + i2 + i3
    S = F.samples
    base = S(F.Z(s)) * (F.dzeta_samples + S(F.dzeta.minus()) + S(F.dell))
    val = -base
    for a, b, c in ((i1, i2, i3), (i2, i3, i1), (i3, i1, i2)):
        val = val + S(F.zeta_pow(a + b)) * F.dzeta_samples * S(F.Z(c).minus())
    return _circle(F, val)


def _hhh(F, j1, j2, j3):
    J = j1 + j2 + j3
    core = F.chi(-J) * F.dell * (F.dell * 2.0 + _closed(F.dzeta.minus()))
    tot = -core
    for a, b, c in ((j1, j2, j3), (j2, j3, j1), (j3, j1, j2)):
        tot = tot + F.chi(-a - b) * F.dell * _closed(F.R(c).plus())
    return -_res_inf(tot)


def _kkk(F, k1, k2, k3):
    Kk = k1 + k2 + k3
    core = F.chihat(-Kk) * F.dell * (F.dell * 2.0 - _closed(F.dzeta.plus()))
    tot = -core
    for a, b, c in ((k1, k2, k3), (k2, k3, k1), (k3, k1, k2)):
        tot = tot + F.chihat(-a - b) * F.dell * _closed(F.Rhat(c).minus())
    return _res_phi(tot)


def c_direct(p: PointMN, u, v, w) -> complex:
    """Closed-form 3-tensor in flat coordinates (all nine families)."""
    m, n = p.m, p.n
    labs = sorted((check_label(CoordLabel(*x), m, n) for x in (u, v, w)), key=lambda x: (_ORDER[x.kind], x.index))
    kinds = tuple(x.kind for x in labs)
    idx = [x.index for x in labs]
    F = frame(p)
    S = F.samples
    if kinds == ("t", "t", "t"):
        return _ttt(F, *idx)
    if kinds == ("h", "h", "h"):
        return _hhh(F, *idx)
    if kinds == ("hhat", "hhat", "hhat"):
        return _kkk(F, *idx)
    if kinds == ("t", "t", "h"):
        i1, i2, j = idx
        return -_circle(F, S(F.Z(i1 + i2)) * S(_closed(F.R(j).plus())))
    if kinds == ("t", "t", "hhat"):
        i1, i2, k = idx
        return _circle(F, S(F.Z(i1 + i2)) * S(_closed(F.Rhat(k).minus())))
    if kinds == ("t", "h", "h"):
        i, j1, j2 = idx
        return _res_inf(F.chi(-j1 - j2) * F.dell * _closed(F.Z(i).minus()))
    if kinds == ("h", "h", "hhat"):
        j1, j2, k = idx
        return _res_inf(F.chi(-j1 - j2) * F.dell * _closed(F.Rhat(k).minus()))
    if kinds == ("t", "hhat", "hhat"):
        i, k1, k2 = idx
        return -_res_phi(F.chihat(-k1 - k2) * F.dell * _closed(F.Z(i).plus()))
    if kinds == ("h", "hhat", "hhat"):
        j, k1, k2 = idx
        return -_res_phi(F.chihat(-k1 - k2) * F.dell * _closed(F.R(j).plus()))
    if kinds == ("t", "h", "hhat"):
        return 0j
    raise AssertionError(kinds)


def c_pairing(p: PointMN, u, v, w) -> complex:
    """``< eta^-1 d_u * eta^-1 d_v, d_w >``."""
    return pair(star(p, flat_basis(p, u, "cotangent"), flat_basis(p, v, "cotangent")), flat_basis(p, w))


def c_tensor(p: PointMN, u, v, w, method: str = "direct") -> complex:
    if method == "direct":
        return c_direct(p, u, v, w)
    if method == "pairing":
        return c_pairing(p, u, v, w)
    raise ValueError(f"unknown method {method!r}")


def c_symmetry_defect(p: PointMN, u, v, w, method="pairing") -> float:
    vals = [c_tensor(p, *perm, method=method) for perm in permutations((u, v, w))]
    return float(max(abs(x - vals[0]) for x in vals))


# ------------------------------------------------------ potential derivatives


def _inv_z_down(F: Frame, depth) -> LaurentSeries:
    """``1/z = 1/(w + phi)`` expanded for large ``w``."""
    phi = F.phi
    c = np.array([(-phi) ** k for k in range(depth)], dtype=np.complex128)[::-1]
    return LaurentSeries(c, -depth, "phi", phi)


def V1_hess(p: PointMN, i1: int, i2: int) -> complex:
    F = frame(p)
    vals = F.dzeta_samples * F.zeta_samples ** (i1 + i2) / F.grid.points
    return _circle(F, vals)


def V2_hess(p: PointMN, j1: int, j2: int) -> complex:
    F = frame(p)
    for j in (j1, j2):
        check_label(CoordLabel("h", j), p.m, p.n)
    s = F.dell * F.chi(-j1 - j2) * _inv_z_down(F, 2 * (p.m + p.n) + 8)
    return -_res_inf(s)


def dell_flat(p: PointMN, label) -> LaurentSeries:
    kind, idx = check_label(CoordLabel(*label), p.m, p.n)
    F = frame(p)
    if kind == "h":
        return _closed(F.R(idx).plus())
    if kind == "hhat":
        return _closed(F.Rhat(idx).minus()) * -1.0
    raise ValueError("G derivatives take h and hhat labels only")


def G_third(p: PointMN, u, v, w) -> complex:
    F = frame(p)
    prod = dell_flat(p, u) * dell_flat(p, v)
    return _res_pair_ell(F, prod, dell_flat(p, w))


def G_third_hhk(p: PointMN, j1: int, j2: int, k: int) -> complex:
    """Reduced form ``-res_inf (ell' chi^{-j1-j2})_+ d_{hhat_k} ell dz``."""
    F = frame(p)
    return -_res_inf(_closed(F.R(j1 + j2).plus()) * dell_flat(p, ("hhat", k)))


def potential_derivatives(p: PointMN, which: str, *labels) -> complex:
    if which == "V1_hess":
        return V1_hess(p, *labels)
    if which == "V2_hess":
        return V2_hess(p, *labels)
    if which == "G_third":
        return G_third(p, *labels)
    raise ValueError(f"unknown potential derivative {which!r}")


def potential_kernel(p: PointMN, p2_radius: float = 4.0, N: int | None = None) -> complex:
    """Double-circle log-kernel part of the potential.

    ``z1`` runs over the outer circle of radius ``p2_radius`` and ``z2`` over
    the point's circle, so ``|z2 / z1| < 1`` and the kernel is ``log1p(-z2/z1)``.
    """
    r = p.grid.radius
    if p2_radius <= r:
        raise ValueError("outer radius must exceed the inner radius")
    N = N or p.grid.N
    inner = CircleGrid(p.phi, r, N)
    outer = CircleGrid(p.phi, p2_radius, N)
    z1, z2 = outer.points, inner.points
    zeta, ell = _closed(p.zeta), p.ell_series()
    Z1, Z2 = zeta.evaluate(z1), zeta.evaluate(z2)
    L1, L2 = ell.evaluate(z1), ell.evaluate(z2)
    f = 0.5 * np.outer(Z1, Z2) + np.outer(Z1, L2) - np.outer(L1, Z2)
    kern = log_kernel(z1[:, None], z2[None, :])
    w1 = outer.radius / N * outer.unit
    w2 = inner.radius / N * inner.unit
    return complex(w1 @ (f * kern) @ w2)


def log_kernel(z1, z2):
    """``log((z1 - z2)/z1)`` for ``|z2| < |z1|``, the branch vanishing at ``z2 = 0``."""
    return np.log1p(-z2 / z1)


def log_kernel_inner(fprime_vals, grid: CircleGrid, z1):
    """``(1/2 pi i) oint f'(z2) log((z1 - z2)/z1) dz2`` with ``z2`` on ``grid`` inside ``z1``."""
    z2 = grid.points
    w = grid.radius / grid.N * grid.unit
    z1 = np.atleast_1d(np.asarray(z1, dtype=np.complex128))
    return (log_kernel(z1[:, None], z2[None, :]) * fprime_vals[None, :]) @ w


def log_kernel_outer(fprime_vals, grid: CircleGrid, z2):
    """``(1/2 pi i) oint f'(z1) log((z1 - z2)/z1) dz1`` with ``z1`` on ``grid`` outside ``z2``."""
    z1 = grid.points
    w = grid.radius / grid.N * grid.unit
    z2 = np.atleast_1d(np.asarray(z2, dtype=np.complex128))
    return (log_kernel(z1[None, :], z2[:, None]) * fprime_vals[None, :]) @ w


# -------------------------------------------------------------- the g map


def g_apply(p: PointMN, w: CotangentVec) -> TangentVec:
    F = frame(p)
    om, omh = F.band(w.omega), F.band(w.omegahat)
    A = F.mul(F.a, om) + F.mul(F.ah, omh)
    Bv = F.mul(F.da, om) + F.mul(F.dah, omh)
    rho = Bv.coeff(-1) / p.m
    xi = F.mul(F.da, A.minus()) - F.mul(F.a, Bv.minus()) + F.da * rho
    xih = F.mul(F.dah, A.plus()) * -1.0 + F.mul(F.ah, Bv.plus()) + F.dah * rho
    return enforce_tangent(p, TangentVec(xi, xih))


def g_inverse(p: PointMN, v: TangentVec, cutoff: float = K_CUTOFF) -> CotangentVec:
    """Inverse of :func:`g_apply` through ``K = (ahat' xi - a' xihat)/(ahat' a - a' ahat)``.

    Coefficients of ``K`` below ``cutoff`` times its largest coefficient are
    treated as quadrature noise and dropped before the formal products.
    """
    F = frame(p)
    num = F.samples(F.dah) * F.samples(v.xi) - F.samples(F.da) * F.samples(v.xihat)
    K = F.from_samples(num / F.wronskian_samples)
    c = K.coeffs.copy()
    c[np.abs(c) < cutoff * np.abs(c).max()] = 0
    K = LaurentSeries(c, K.lo, "phi", p.phi)
    om = F.band((_closed(K.plus()) * F.inv_da).ge(-p.m + 1))
    omh = F.band((_closed(K.minus()) * F.inv_dah).le(p.n)) * -1.0
    return enforce_cotangent(p, CotangentVec(om, omh))


def intersection_form(p: PointMN, w1: CotangentVec, w2: CotangentVec) -> complex:
    return pair(w1, g_apply(p, w2))


def intersection_form_euler(p: PointMN, w1: CotangentVec, w2: CotangentVec) -> complex:
    """``i_E (w1 * w2)``."""
    from .manifold import euler_vector

    return pair(star(p, w1, w2), euler_vector(p))


# ----------------------------------------------------- generating covectors


def da_covector(p: PointMN, q: complex) -> CotangentVec:
    """Truncated ``da(q) = sum_{i >= -m+1} (q - phi)**(-i-1) e_i``; needs ``|q - phi|`` large."""
    B = p.band[1]
    s = q - p.phi
    exps = np.arange(-p.m + 1, B + 1)
    return CotangentVec(LaurentSeries(s ** (-exps - 1.0), -p.m + 1, "phi", p.phi), _zero(p.phi, 0))


def dahat_covector(p: PointMN, q: complex) -> CotangentVec:
    """Truncated ``dahat(q) = sum_{j <= n} (q - phi)**(-j-1) ehat_j``; needs ``|q - phi|`` small."""
    B = p.band[1]
    s = q - p.phi
    exps = np.arange(-B, p.n + 1)
    return CotangentVec(_zero(p.phi, 0), LaurentSeries(s ** (-exps - 1.0), -B, "phi", p.phi))


def intersection_closed_form(p: PointMN, al: str, x: complex, be: str, y: complex) -> complex:
    """``alpha'(x) beta(y)/(x - y) + beta'(y) alpha(x)/(y - x) + alpha'(x) beta'(y)/m``."""
    F = frame(p)
    f = {"a": F.a, "ahat": F.ah}
    A, Bs = f[al], f[be]
    ax, dax = A.evaluate(x), A.derivative().evaluate(x)
    by, dby = Bs.evaluate(y), Bs.derivative().evaluate(y)
    return complex(dax * by / (x - y) + dby * ax / (y - x) + dax * dby / p.m)


# -------------------------------------------------------------- randomness


def random_cotangent(p: PointMN, rng, depth: int = 6, decay: float = 0.5) -> CotangentVec:
    """Finite covector with exponents ``-m+1..-m+1+depth`` and ``n-depth..n``."""
    m, n = p.m, p.n

    def draw(count):
        c = rng.normal(size=count) + 1j * rng.normal(size=count)
        return c * decay ** np.arange(count)

    om = LaurentSeries(draw(depth + 1), -m + 1, "phi", p.phi)
    omh = LaurentSeries(draw(depth + 1)[::-1], n - depth, "phi", p.phi)
    return CotangentVec(om, omh)


def random_tangent(p: PointMN, rng, depth: int = 6, decay: float = 0.5) -> TangentVec:
    """Finite tangent with exponents ``m-2-depth..m-2`` and ``-n-1..-n-1+depth``."""
    m, n = p.m, p.n

    def draw(count):
        c = rng.normal(size=count) + 1j * rng.normal(size=count)
        return c * decay ** np.arange(count)

    xi = LaurentSeries(draw(depth + 1)[::-1], m - 2 - depth, "phi", p.phi)
    xih = LaurentSeries(draw(depth + 1), -n - 1, "phi", p.phi)
    return TangentVec(xi, xih)


# ---------------------------------------------------------------- Euler field


def euler_flat(p: PointMN, fc) -> TangentVec:
    """``sum_u deg(u) u d_u`` over the flat coordinates in ``fc``."""
    tot = None
    for lab in fc.labels():
        term = flat_basis(p, lab) * (float(coordinate_degree(lab, p.m, p.n)) * fc.get(lab))
        tot = term if tot is None else tot + term
    return tot
