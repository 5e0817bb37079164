"""Points of M_{m,n}: validity, the two representations, flat coordinates.

A point is stored as ``(m, n, phi, ell, zeta)`` where ``ell`` is the rational
part with exponents ``-n..m`` in ``w = z - phi`` and ``zeta`` is a two-sided
series.  The pair ``(a, ahat)`` is recovered by ``a = zeta_- + ell`` and
``ahat = -zeta_+ + ell``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .series_core import (
    DEFAULT_N,
    DEFAULT_RADIUS,
    DEFAULT_WINDOW,
    CircleGrid,
    LaurentSeries,
    circle_transform,
    contour_integral,
    log_ratio_integral,
    power_rational,
    reexpand_infinity,
    residue_infinity,
    residue_phi,
    revert,
    sample,
    winding_number,
)

logger = logging.getLogger(__name__)

DEFAULT_IMAX = 8
C2_TOL = 1e-10
GEN_ZETA_RANGE = 8
GEN_ZETA_AMP = 0.05
GEN_PHI_MAX = 0.1
GEN_ELL_LEAD_MIN = 0.3
GEN_RETRIES = 100
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50
CONDITION_TOL = 1e-13
GEN_WRONSKIAN_MIN = 1e-2


class ShapeError(ValueError):
    """A series does not have the shape required of a point or vector."""


class ConvergenceError(RuntimeError):
    """Newton iteration stopped above tolerance; carries the last iterate."""

    def __init__(self, msg, point=None, residual=None):
        super().__init__(msg)
        self.point = point
        self.residual = residual


class CoordLabel(NamedTuple):
    kind: str
    index: int

    def __str__(self):
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "CoordLabel":
        text = text.strip()
        for kind in ("hhat", "h", "t"):
            if text.startswith(kind):
                return cls(kind, int(text[len(kind) :]))
        raise ValueError(f"bad coordinate label {text!r}")


def check_label(label: CoordLabel, m: int, n: int, I_max: int | None = None) -> CoordLabel:
    kind, idx = label
    if kind == "t":
        if I_max is not None and abs(idx) > I_max:
            raise ValueError(f"t index {idx} beyond I_max={I_max}")
    elif kind == "h":
        if not 1 <= idx <= m - 1:
            raise ValueError(f"h index {idx} outside 1..{m - 1}")
    elif kind == "hhat":
        if not 0 <= idx <= n:
            raise ValueError(f"hhat index {idx} outside 0..{n}")
    else:
        raise ValueError(f"unknown coordinate kind {kind!r}")
    return CoordLabel(kind, int(idx))


def all_labels(m: int, n: int, I_max: int = DEFAULT_IMAX):
    out = [CoordLabel("t", i) for i in range(-I_max, I_max + 1)]
    out += [CoordLabel("h", j) for j in range(1, m)]
    out += [CoordLabel("hhat", k) for k in range(0, n + 1)]
    return out


def coordinate_degree(label: CoordLabel, m: int, n: int) -> Fraction:
    """Weight of a flat coordinate under the Euler field."""
    kind, idx = check_label(CoordLabel(*label), m, n)
    if kind == "t":
        return Fraction(1, m) - idx
    if kind == "h":
        return Fraction(idx + 1, m)
    return Fraction(idx, n) + Fraction(1, m)


def charge(m: int) -> Fraction:
    return 1 - Fraction(2, m)


# ---------------------------------------------------------------------- points


class PointMN:
    """A point of M_{m,n} in the (zeta, ell) representation."""

    def __init__(self, m, n, phi, ell, zeta: LaurentSeries, radius=DEFAULT_RADIUS, N=DEFAULT_N):
        self.m, self.n = int(m), int(n)
        if self.m < 1 or self.n < 1:
            raise ShapeError("m and n must be positive")
        self.phi = complex(phi)
        arr = np.zeros(self.m + self.n + 1, dtype=np.complex128)
        if isinstance(ell, dict):
            for e, c in ell.items():
                e = int(e)
                if not -self.n <= e <= self.m:
                    raise ShapeError(f"ell exponent {e} outside [-n, m]")
                arr[e + self.n] = complex(c) if not isinstance(c, (list, tuple)) else complex(*c)
        else:
            ell = np.asarray(ell, dtype=np.complex128)
            if ell.shape[0] == self.m + self.n - 1:
                arr[: self.m + self.n - 1] = ell
            elif ell.shape[0] == self.m + self.n + 1:
                arr[:] = ell
            else:
                raise ShapeError("ell must list exponents -n..m-2 or -n..m")
        arr[self.m + self.n] = 1.0
        arr[self.m + self.n - 1] = self.m * self.phi
        self.ell = arr
        if zeta.chart != "phi" or zeta.phi != self.phi:
            zeta = LaurentSeries(zeta.coeffs, zeta.lo, "phi", self.phi)
        self.zeta = zeta
        self.grid = CircleGrid(self.phi, radius, N)
        self._cache = {}

    # -- basic series -------------------------------------------------

    def ell_series(self) -> LaurentSeries:
        return LaurentSeries(self.ell, -self.n, "phi", self.phi)

    def free_ell(self) -> np.ndarray:
        return self.ell[: self.m + self.n - 1].copy()

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def band(self):
        return self.grid.band

    def a(self) -> LaurentSeries:
        return self.cached("a", lambda: self.zeta.minus() + self.ell_series())

    def ahat(self) -> LaurentSeries:
        return self.cached("ahat", lambda: self.ell_series() - self.zeta.plus())

    def samples(self, name: str) -> np.ndarray:
        """Grid values of ``zeta``, ``dzeta``, ``ell``, ``dell``, ``a``, ``da``, ``ahat``, ``dahat``."""

        def build():
            base = {"zeta": self.zeta, "ell": self.ell_series(), "a": self.a(), "ahat": self.ahat()}
            if name.startswith("d"):
                return sample(base[name[1:]].derivative(), self.grid)
            return sample(base[name], self.grid)

        return self.cached(("samples", name), build)

    def wronskian_samples(self) -> np.ndarray:
        """``a' ahat - a ahat'`` on the grid."""
        return self.samples("da") * self.samples("ahat") - self.samples("a") * self.samples("dahat")

    def with_grid(self, radius=None, N=None) -> "PointMN":
        return PointMN(
            self.m, self.n, self.phi, self.ell, self.zeta,
            self.grid.radius if radius is None else radius,
            self.grid.N if N is None else N,
        )

    # -- serialisation ------------------------------------------------

    def to_json(self):
        return {
            "m": self.m,
            "n": self.n,
            "phi": [self.phi.real, self.phi.imag],
            "ell": {str(e): [c.real, c.imag] for e, c in zip(range(-self.n, self.m + 1), self.ell)},
            "zeta": self.zeta.to_json(),
            "grid": self.grid.to_json(),
        }

    @classmethod
    def from_json(cls, obj):
        phi = complex(*obj["phi"])
        zeta = LaurentSeries.from_json(obj["zeta"])
        zeta = LaurentSeries(zeta.coeffs, zeta.lo, "phi", phi)
        ell = {int(e): complex(*c) for e, c in obj["ell"].items()}
        grid = obj.get("grid", {})
        ell_arr = np.zeros(obj["m"] + obj["n"] + 1, dtype=np.complex128)
        for e, c in ell.items():
            ell_arr[e + obj["n"]] = c
        p = cls(obj["m"], obj["n"], phi, ell_arr, zeta, grid.get("radius", DEFAULT_RADIUS), grid.get("N", DEFAULT_N))
        # keep the stored head coefficients so corrupted inputs stay visible to validate
        p.ell = ell_arr if ell_arr[-1] != 0 else p.ell
        return p


def convert_representation(p: PointMN):
    """Return ``(a, ahat)`` for a point."""
    return p.a(), p.ahat()


def from_representation(a: LaurentSeries, ahat: LaurentSeries, m: int, n: int, **grid_kw) -> PointMN:
    """Inverse of :func:`convert_representation`: ``zeta = a - ahat``, ``ell = a_+ + ahat_-``."""
    phi = a.phi
    if ahat.phi != phi:
        raise ShapeError("a and ahat use different base points")
    if a.open_hi or a.hi > m or abs(a.coeff(m) - 1) > 1e-12 or abs(a.coeff(m - 1) - m * phi) > 1e-12:
        raise ShapeError("a must start with z**m")
    if ahat.open_lo or ahat.leading("up") < -n:
        raise ShapeError(f"ahat has exponents below -{n}")
    zeta = a - ahat
    ell = a.plus() + ahat.minus()
    ell_arr = ell.coeffs_range(-n, m)
    if ell.hi > m and np.any(np.abs(ell.coeffs_range(m + 1, ell.hi)) > 0):
        raise ShapeError("ell has exponents above m")
    return PointMN(m, n, phi, ell_arr, zeta, **grid_kw)


# ---------------------------------------------------------------- validation


@dataclass
class ValidationReport:
    c1: bool
    c2: bool
    c3: bool
    ell_lead: float
    min_dzeta: float
    min_dell: float
    min_wronskian: float
    winding: int
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.c1 and self.c2 and self.c3

    def to_json(self):
        return {
            "C1": self.c1,
            "C2": self.c2,
            "C3": self.c3,
            "ell_lead": self.ell_lead,
            "min_dzeta": self.min_dzeta,
            "min_dell": self.min_dell,
            "min_wronskian": self.min_wronskian,
            "winding": self.winding,
            "notes": list(self.notes),
        }


def validate(p: PointMN) -> ValidationReport:
    """Check C1 (pole order), C2 (non-vanishing on the circle), C3 (winding one)."""
    lead = abs(p.ell[0])
    dz = np.abs(p.samples("dzeta")).min()
    dl = np.abs(p.samples("dell")).min()
    wr = np.abs(p.wronskian_samples()).min()
    notes = []
    try:
        wind = winding_number(p.samples("zeta"))
    except ZeroDivisionError:
        wind = 0
        notes.append("zeta vanishes at a grid node")
    if not p.grid.contains_origin():
        notes.append("circle does not enclose z = 0")
    return ValidationReport(
        c1=bool(lead > 0),
        c2=bool(dz > C2_TOL and dl > C2_TOL and wr > C2_TOL),
        c3=bool(wind == 1 and p.grid.contains_origin()),
        ell_lead=float(lead),
        min_dzeta=float(dz),
        min_dell=float(dl),
        min_wronskian=float(wr),
        winding=int(wind),
        notes=notes,
    )


def band_tail(values: np.ndarray, grid: CircleGrid) -> float:
    """Relative size of the coefficients at the band edge of a sampled function."""
    s = np.abs(circle_transform_values(values, grid))
    top = s.max()
    return float(max(s[:4].max(), s[-4:].max()) / top) if top > 0 else 0.0


def circle_transform_values(values, grid):
    from .series_core import SampledFunction

    return circle_transform(SampledFunction(grid, values), grid).coeffs


def conditioning(p: PointMN, I_max: int = DEFAULT_IMAX) -> float:
    """Largest band-edge tail among ``1/zeta'`` and ``zeta**-I_max`` on the circle."""
    return max(
        band_tail(1.0 / p.samples("dzeta"), p.grid),
        band_tail(p.samples("zeta") ** -I_max, p.grid),
    )


# ---------------------------------------------------------------- generator


def _disc(rng, radius, size=None):
    r = radius * np.sqrt(rng.uniform(0, 1, size))
    th = rng.uniform(0, 2 * np.pi, size)
    return r * np.exp(1j * th)


def random_point(m, n, seed=None, rng=None, K=DEFAULT_WINDOW, radius=DEFAULT_RADIUS, N=DEFAULT_N,
                 zeta_range=GEN_ZETA_RANGE, zeta_amp=GEN_ZETA_AMP, phi_max=GEN_PHI_MAX,
                 retries=GEN_RETRIES) -> PointMN:
    """Seeded random valid point in the perturbative regime ``zeta ~ z``."""
    rng = np.random.default_rng(seed) if rng is None else rng
    for _ in range(retries):
        phi = complex(_disc(rng, phi_max))
        free = _disc(rng, 1.0, m + n - 1).astype(np.complex128)
        # leading pole coefficient uniform on the annulus GEN_ELL_LEAD_MIN <= |.| <= 1
        rr = np.sqrt(rng.uniform(GEN_ELL_LEAD_MIN**2, 1.0))
        free[0] = rr * np.exp(1j * rng.uniform(0, 2 * np.pi))
        eps = np.array(
            [complex(_disc(rng, zeta_amp * 2.0 ** (-abs(i)))) for i in range(-zeta_range, zeta_range + 1)]
        )
        zc = np.zeros(2 * K + 1, dtype=np.complex128)
        zc[K - zeta_range : K + zeta_range + 1] = eps
        zc[K] += phi
        zc[K + 1] += 1.0
        zeta = LaurentSeries(zc, -K, "phi", phi)
        p = PointMN(m, n, phi, free, zeta, radius, N)
        rep = validate(p)
        if rep.ok and rep.min_wronskian > GEN_WRONSKIAN_MIN and conditioning(p) < CONDITION_TOL:
            return p
    raise RuntimeError(f"no valid point after {retries} draws")


# ------------------------------------------------------------ flat coordinates


@dataclass
class FlatCoords:
    t: dict
    h: list
    hhat: list

    @property
    def m(self):
        return len(self.h) + 1

    @property
    def n(self):
        return len(self.hhat) - 1

    @property
    def I_max(self):
        return max(abs(i) for i in self.t)

    @property
    def phi(self):
        return self.hhat[0]

    def labels(self):
        return all_labels(self.m, self.n, self.I_max)

    def get(self, label: CoordLabel) -> complex:
        kind, idx = label
        if kind == "t":
            return self.t[idx]
        if kind == "h":
            return self.h[idx - 1]
        return self.hhat[idx]

    def to_vector(self) -> np.ndarray:
        return np.array([self.get(lab) for lab in self.labels()], dtype=np.complex128)

    @classmethod
    def from_vector(cls, vec, m, n, I_max):
        vec = list(vec)
        t = {i: complex(vec[i + I_max]) for i in range(-I_max, I_max + 1)}
        off = 2 * I_max + 1
        h = [complex(x) for x in vec[off : off + m - 1]]
        hhat = [complex(x) for x in vec[off + m - 1 :]]
        return cls(t, h, hhat)

    def shifted(self, label: CoordLabel, eps: complex) -> "FlatCoords":
        t, h, hh = dict(self.t), list(self.h), list(self.hhat)
        kind, idx = label
        if kind == "t":
            t[idx] += eps
        elif kind == "h":
            h[idx - 1] += eps
        else:
            hh[idx] += eps
        return FlatCoords(t, h, hh)

    def to_json(self):
        c = lambda x: [x.real, x.imag]  # noqa: E731
        return {
            "t": {str(i): c(v) for i, v in sorted(self.t.items())},
            "h": [c(v) for v in self.h],
            "hhat": [c(v) for v in self.hhat],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            {int(i): complex(*v) for i, v in obj["t"].items()},
            [complex(*v) for v in obj["h"]],
            [complex(*v) for v in obj["hhat"]],
        )


def _terms(p_or_m, n=None):
    m = p_or_m if n is not None else p_or_m.m
    n = n if n is not None else p_or_m.n
    return 2 * (m + n) + 8


def t_coordinates(p: PointMN, I_max: int = DEFAULT_IMAX) -> dict:
    zv = p.samples("zeta")
    g = p.grid
    t = {}
    for i in range(-I_max, I_max + 1):
        if i == 0:
            t[0] = log_ratio_integral(zv, g)
        else:
            t[i] = contour_integral_values(zv ** (-i), g) / i
    return t


def contour_integral_values(values, grid) -> complex:
    from .series_core import SampledFunction

    return contour_integral(SampledFunction(grid, values))


def h_coordinates(p: PointMN, route: str = "inf") -> list:
    """``h_j = -(1/j) res_inf ell**(j/m) dz``.

    ``route="inf"`` re-expands ``ell`` at infinity first; ``route="phi"`` uses
    the downward expansion in ``z - phi`` directly.
    """
    m = p.m
    ell = p.ell_series()
    T = _terms(p)
    if route == "inf":
        ell = reexpand_infinity(ell, T + m)
    out = []
    for j in range(1, m):
        r = power_rational(ell, j, m, "down", T)
        out.append(-residue_infinity(r) / j)
    return out


def hhat_coordinates(p: PointMN) -> list:
    """``hhat_0 = phi`` and ``hhat_k = (1/k) res_phi ell**(k/n) dz``."""
    ell = p.ell_series()
    out = [p.phi]
    for k in range(1, p.n + 1):
        out.append(residue_phi(power_rational(ell, k, p.n, "up", _terms(p))) / k)
    return out


def flat_coordinates(p: PointMN, I_max: int = DEFAULT_IMAX) -> FlatCoords:
    """Flat coordinates ``t``, ``h``, ``hhat`` of a point."""
    return FlatCoords(t_coordinates(p, I_max), h_coordinates(p), hhat_coordinates(p))


# ---- derivatives of ell along h and hhat


def chi_power(p: PointMN, j: int, terms=None) -> LaurentSeries:
    """``chi**j`` with ``chi = ell**(1/m)`` expanded downward in ``z - phi``."""
    T = terms or _terms(p) + abs(j)
    return p.cached(("chi", j, T), lambda: power_rational(p.ell_series(), j, p.m, "down", T))


def chihat_power(p: PointMN, k: int, terms=None) -> LaurentSeries:
    """``chihat**k`` with ``chihat = ell**(1/n)`` expanded upward in ``z - phi``."""
    T = terms or _terms(p) + abs(k)
    return p.cached(("chihat", k, T), lambda: power_rational(p.ell_series(), k, p.n, "up", T))


def dell_dh(p: PointMN, j: int) -> LaurentSeries:
    """``(ell' chi**-j)_+``."""
    return (p.ell_series().derivative() * chi_power(p, -j)).plus()


def dell_dhhat(p: PointMN, k: int) -> LaurentSeries:
    """``-(ell' chihat**-k)_-``."""
    return -(p.ell_series().derivative() * chihat_power(p, -k)).minus()


def _ell_free_from_series(s: LaurentSeries, m, n) -> np.ndarray:
    return s.coeffs_range(-n, m - 2)


def ell_from_flat(h, hhat, m, n) -> np.ndarray:
    """Closed-form ``ell`` from ``h`` and ``hhat`` by series reversion.

    The polynomial part is ``(chi**m)_+`` with ``chi`` inverse to
    ``chi - sum h_j chi**-j``; the principal part is ``(chihat**n)_-`` with
    ``chihat`` inverse to ``sum_k hhat_k chihat**-k``.
    """
    phi = complex(hhat[0])
    T = 2 * (m + n) + 8
    zc = {1: 1.0}
    for j, hj in enumerate(h, start=1):
        zc[-j] = zc.get(-j, 0) - hj
    zchi = LaurentSeries.from_dict(zc, "inf", window=(-(m - 1) if m > 1 else 1, 1))
    chi = revert(zchi, T, "down")  # chi(z), inf chart
    poly = power_rational(chi, m, 1, "down", T) if m > 1 else chi
    top = poly.coeffs_range(0, m)
    # polynomial in z -> polynomial in w = z - phi
    plus = np.zeros(m + 1, dtype=np.complex128)
    for k, c in enumerate(top):
        if c == 0:
            continue
        b = 1.0 + 0j
        for r in range(k + 1):
            plus[k - r] += c * b
            b *= (k - r) / (r + 1) * phi
    wc = {-k: hhat[k] for k in range(1, n + 1)}
    wchi = LaurentSeries.from_dict(wc, "inf", window=(-n, -1))
    chihat = revert(wchi, T, "down")  # w(chihat) -> chihat(w), upward from w**-1
    chihat = LaurentSeries(chihat.coeffs, chihat.lo, "phi", 0j, False, True)
    minus = power_rational(chihat, n, 1, "up", T)
    minus_c = minus.coeffs_range(-n, -1)
    out = np.zeros(m + n - 1, dtype=np.complex128)
    out[:n] = minus_c
    out[n:] = plus[: m - 1]
    return out


def _ell_residual(p: PointMN, h, hhat):
    cur_h = h_coordinates(p, route="phi")
    cur_hh = hhat_coordinates(p)
    r = [h[j] - cur_h[j] for j in range(p.m - 1)] + [hhat[k] - cur_hh[k] for k in range(1, p.n + 1)]
    return np.array(r, dtype=np.complex128)


def solve_ell(h, hhat, m, n, ell0=None, tol=NEWTON_TOL, maxit=NEWTON_MAXIT, damping=1.0):
    """Newton for the free coefficients of ``ell`` with the exact Jacobian.

    Returns ``(free coefficients, final residual, iterations)``.
    """
    phi = complex(hhat[0])
    free = ell_from_flat(h, hhat, m, n) if ell0 is None else np.asarray(ell0, dtype=np.complex128)
    dummy = LaurentSeries([0.0, 1.0], 0, "phi", phi)
    res = np.inf
    for it in range(maxit + 1):
        p = PointMN(m, n, phi, free, dummy)
        r = _ell_residual(p, h, hhat)
        res = float(np.max(np.abs(r))) if r.size else 0.0
        if res <= tol or it == maxit:
            return free, res, it
        step = np.zeros_like(free)
        for j in range(1, m):
            step += r[j - 1] * _ell_free_from_series(dell_dh(p, j), m, n)
        for k in range(1, n + 1):
            step += r[m - 2 + k] * _ell_free_from_series(dell_dhhat(p, k), m, n)
        free = free + damping * step
    return free, res, maxit


def zeta_from_t(t: dict, grid: CircleGrid, window=None, tol=1e-15, maxit=60):
    """Invert ``z = sum_i t_i zeta**i`` pointwise on the grid; return the series."""
    I = max(abs(i) for i in t)
    tv = np.array([t.get(i, 0) for i in range(-I, I + 1)], dtype=np.complex128)
    z = grid.points
    vals, worst = K.laurent_newton(tv, -I, z, z.copy(), tol, maxit)
    from .series_core import SampledFunction

    return circle_transform(SampledFunction(grid, vals), grid, window), worst


def point_from_flat(fc: FlatCoords, m=None, n=None, K=DEFAULT_WINDOW, grid=None,
                    tol=NEWTON_TOL, maxit=NEWTON_MAXIT, damping=1.0) -> PointMN:
    """Rebuild a point from flat coordinates.

    ``zeta`` comes from pointwise Newton on the inverse function; ``ell`` from
    Newton on the map ``ell -> (h, hhat)`` started at the closed-form inverse.
    Raises :class:`ConvergenceError` (carrying the point and residual) when the
    ``ell`` iteration stalls above ``tol``.
    """
    m = fc.m if m is None else m
    n = fc.n if n is None else n
    if len(fc.h) != m - 1 or len(fc.hhat) != n + 1:
        raise ValueError("flat coordinate counts do not match (m, n)")
    phi = complex(fc.hhat[0])
    radius = DEFAULT_RADIUS if grid is None else grid.radius
    N = DEFAULT_N if grid is None else grid.N
    g = CircleGrid(phi, radius, N)
    zeta, zres = zeta_from_t(fc.t, g, (-K, K))
    free, res, _ = solve_ell(fc.h, fc.hhat, m, n, tol=tol, maxit=maxit, damping=damping)
    p = PointMN(m, n, phi, free, zeta, radius, N)
    if res > tol:
        raise ConvergenceError(f"ell Newton residual {res:.3e}", p, res)
    if zres > 1e-10:
        raise ConvergenceError(f"zeta Newton residual {zres:.3e}", p, zres)
    return p


# ------------------------------------------------------------------- Euler field


def euler_vector(p: PointMN):
    """``E = (a - z a'/m, ahat - z ahat'/m)`` as a tangent vector."""
    from .frobenius import TangentVec, enforce_tangent

    z = LaurentSeries([p.phi, 1.0], 0, "phi", p.phi)
    a, ah = p.a(), p.ahat()
    xi = a - z * a.derivative() / p.m
    xih = ah - z * ah.derivative() / p.m
    return enforce_tangent(p, TangentVec(xi, xih))


def scaled_flat(fc: FlatCoords, s: complex) -> FlatCoords:
    """Flat coordinates after ``(zeta, ell) -> s (zeta, ell)``, ``z -> s**(1/m) z``."""
    m, n = fc.m, fc.n
    t = {i: v * s ** float(coordinate_degree(CoordLabel("t", i), m, n)) for i, v in fc.t.items()}
    h = [v * s ** float(coordinate_degree(CoordLabel("h", j), m, n)) for j, v in enumerate(fc.h, 1)]
    hh = [v * s ** float(coordinate_degree(CoordLabel("hhat", k), m, n)) for k, v in enumerate(fc.hhat)]
    return FlatCoords(t, h, hh)
