"""Loop space of M_{m,n}: Poisson tensors, Hamiltonians and Whitham flows.

Every coefficient of a loop point is a function of ``x`` on ``Nx``
equispaced nodes, band-limited to Fourier modes ``|k| <= M``.  Series in
``z`` are stored nodewise in the local chart ``z - phi(x)``; the x-derivative
at fixed ``z`` of ``g = sum g_i(x) (z - phi(x))**i`` is
``sum g_i'(x) (z - phi)**i - phi'(x) g_z``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K
from .frobenius import CotangentVec, TangentVec, eta_apply, frame, g_apply
from .manifold import (
    DEFAULT_WINDOW,
    GEN_PHI_MAX,
    PointMN,
    ShapeError,
    random_point,
    validate,
)
from .series_core import DEFAULT_N, DEFAULT_RADIUS, LaurentSeries, WindowError, power_rational, reexpand_infinity

logger = logging.getLogger(__name__)

DEFAULT_NX = 32
DEFAULT_M = 8
LOOP_AMP = 0.05
LOOP_DECAY = 0.25
SHAPE_TOL = 1e-6


class EvolutionError(RuntimeError):
    def __init__(self, msg, step=None, trajectory=None):
        super().__init__(msg)
        self.step = step
        self.trajectory = trajectory


# ------------------------------------------------------------- Fourier tools


def x_nodes(Nx: int) -> np.ndarray:
    return 2 * np.pi * np.arange(Nx) / Nx


def _wavenumbers(Nx):
    k = np.fft.fftfreq(Nx, 1.0 / Nx)
    return k


def spectral_dx(vals: np.ndarray) -> np.ndarray:
    """x-derivative along axis 0 by the Fourier multiplier ``i k`` (Nyquist mode dropped)."""
    Nx = vals.shape[0]
    k = _wavenumbers(Nx)
    mult = 1j * k
    if Nx % 2 == 0:
        mult[Nx // 2] = 0
    shape = (Nx,) + (1,) * (vals.ndim - 1)
    return np.fft.ifft(mult.reshape(shape) * np.fft.fft(vals, axis=0), axis=0)


def band_limit(vals: np.ndarray, M: int) -> np.ndarray:
    """Keep Fourier modes ``|k| <= M`` along axis 0."""
    Nx = vals.shape[0]
    k = _wavenumbers(Nx)
    keep = (np.abs(k) <= M).reshape((Nx,) + (1,) * (vals.ndim - 1))
    return np.fft.ifft(np.fft.fft(vals, axis=0) * keep, axis=0)


def to_modes(vals: np.ndarray, M: int) -> np.ndarray:
    """Fourier coefficients for modes ``-M..M`` (axis 0)."""
    Nx = vals.shape[0]
    F = np.fft.fft(vals, axis=0) / Nx
    return F[np.arange(-M, M + 1) % Nx]


def from_modes(modes: np.ndarray, Nx: int) -> np.ndarray:
    M = (modes.shape[0] - 1) // 2
    F = np.zeros((Nx,) + modes.shape[1:], dtype=np.complex128)
    F[np.arange(-M, M + 1) % Nx] = modes
    return np.fft.ifft(F * Nx, axis=0)


def x_mean(vals: np.ndarray):
    """``(1/2 pi) int dx`` by the periodic trapezoid rule."""
    return np.mean(vals, axis=0)


# ------------------------------------------------------------- loop series


class LoopSeries:
    """Nodewise Laurent series in ``z - phi(x)`` with a common exponent window."""

    __slots__ = ("c", "lo", "phi", "phi_x", "B")

    def __init__(self, c, lo, phi, phi_x, B):
        self.c = np.asarray(c, dtype=np.complex128)
        self.lo = int(lo)
        self.phi = phi
        self.phi_x = phi_x
        self.B = B

    @property
    def hi(self):
        return self.lo + self.c.shape[1] - 1

    def _like(self, c, lo):
        return LoopSeries(c, lo, self.phi, self.phi_x, self.B).clip(-self.B, self.B)

    def rng(self, lo, hi):
        out = np.zeros((self.c.shape[0], hi - lo + 1), dtype=np.complex128)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[:, a - lo : b - lo + 1] = self.c[:, a - self.lo : b - self.lo + 1]
        return out

    def coeff(self, e):
        if self.lo <= e <= self.hi:
            return self.c[:, e - self.lo].copy()
        return np.zeros(self.c.shape[0], dtype=np.complex128)

    def clip(self, lo, hi):
        a, b = max(lo, self.lo), min(hi, self.hi)
        if b < a:
            return LoopSeries(np.zeros((self.c.shape[0], 1)), max(lo, min(hi, self.lo)), self.phi, self.phi_x, self.B)
        return LoopSeries(self.c[:, a - self.lo : b - self.lo + 1], a, self.phi, self.phi_x, self.B)

    def __add__(self, o):
        lo, hi = min(self.lo, o.lo), max(self.hi, o.hi)
        return LoopSeries(self.rng(lo, hi) + o.rng(lo, hi), lo, self.phi, self.phi_x, self.B)

    def __sub__(self, o):
        return self + o * -1.0

    def __neg__(self):
        return self * -1.0

    def __mul__(self, o):
        if isinstance(o, LoopSeries):
            return self._like(K.conv_rows(self.c, o.c), self.lo + o.lo)
        o = np.asarray(o)
        if o.ndim == 1:
            o = o[:, None]
        return LoopSeries(self.c * o, self.lo, self.phi, self.phi_x, self.B)

    __rmul__ = __mul__

    def dz(self):
        e = np.arange(self.lo, self.hi + 1)
        return LoopSeries(self.c * e[None, :], self.lo - 1, self.phi, self.phi_x, self.B)

    def dx(self):
        """x-derivative at fixed ``z``."""
        return LoopSeries(spectral_dx(self.c), self.lo, self.phi, self.phi_x, self.B) - self.dz() * self.phi_x

    def ge(self, k):
        return self.clip(k, max(k, self.hi))

    def le(self, k):
        return self.clip(min(k, self.lo), k)

    def plus(self):
        return self.ge(0)

    def minus(self):
        return self.le(-1)

    def node(self, j) -> LaurentSeries:
        return LaurentSeries(self.c[j], self.lo, "phi", self.phi[j])

    def norm(self):
        return float(np.max(np.abs(self.c))) if self.c.size else 0.0

    @classmethod
    def from_nodes(cls, series, phi, phi_x, B):
        lo = min(s.lo for s in series)
        hi = max(s.hi for s in series)
        c = np.array([s.coeffs_range(lo, hi) for s in series])
        return cls(c, lo, phi, phi_x, B).clip(-B, B)

    @classmethod
    def constant_z(cls, arr, e, phi, phi_x, B):
        """``arr(x) (z - phi)**e``."""
        return cls(np.asarray(arr, dtype=np.complex128)[:, None], e, phi, phi_x, B)


def lie_bracket(f: LoopSeries, g: LoopSeries) -> LoopSeries:
    """``[f, g] = f_z g_x - g_z f_x``."""
    return f.dz() * g.dx() - g.dz() * f.dx()


@dataclass
class LoopTangent:
    xi: LoopSeries
    xihat: LoopSeries

    def __add__(self, o):
        return LoopTangent(self.xi + o.xi, self.xihat + o.xihat)

    def __sub__(self, o):
        return LoopTangent(self.xi - o.xi, self.xihat - o.xihat)

    def __mul__(self, s):
        return LoopTangent(self.xi * s, self.xihat * s)

    __rmul__ = __mul__

    def norm(self):
        return max(self.xi.norm(), self.xihat.norm())

    def node(self, j) -> TangentVec:
        return TangentVec(self.xi.node(j), self.xihat.node(j))


@dataclass
class LoopCotangent:
    omega: LoopSeries
    omegahat: LoopSeries

    def __add__(self, o):
        return LoopCotangent(self.omega + o.omega, self.omegahat + o.omegahat)

    def __mul__(self, s):
        return LoopCotangent(self.omega * s, self.omegahat * s)

    __rmul__ = __mul__

    def norm(self):
        return max(self.omega.norm(), self.omegahat.norm())

    def node(self, j) -> CotangentVec:
        return CotangentVec(self.omega.node(j), self.omegahat.node(j))

    def dx(self) -> "LoopCotangent":
        return LoopCotangent(self.omega.dx(), self.omegahat.dx())


def loop_pair(w: LoopCotangent, v: LoopTangent) -> complex:
    """``(1/2 pi) int <w, v> dx``."""
    def p(f, g):
        lo, hi = f.lo, f.hi
        gc = g.rng(-1 - hi, -1 - lo)[:, ::-1]
        return np.sum(f.c * gc, axis=1)

    return complex(x_mean(p(w.omega, v.xi) + p(w.omegahat, v.xihat)))


# --------------------------------------------------------------- loop points


class LoopPoint:
    """A loop in M_{m,n} sampled at ``Nx`` nodes."""

    def __init__(self, m, n, phi, ell, zeta, K=DEFAULT_WINDOW, M=DEFAULT_M, radius=DEFAULT_RADIUS, N=DEFAULT_N):
        self.m, self.n, self.K, self.M = int(m), int(n), int(K), int(M)
        self.radius, self.N = radius, N
        self.phi = np.asarray(phi, dtype=np.complex128)
        self.Nx = self.phi.shape[0]
        ell = np.asarray(ell, dtype=np.complex128)
        if ell.shape != (self.Nx, self.m + self.n - 1):
            raise ShapeError("ell must hold the free coefficients -n..m-2 at every node")
        self.ell_free = ell
        zeta = np.asarray(zeta, dtype=np.complex128)
        if zeta.shape != (self.Nx, 2 * self.K + 1):
            raise ShapeError("zeta must hold exponents -K..K at every node")
        self.zeta = zeta
        self._nodes = {}
        self._cache = {}

    @property
    def x(self):
        return x_nodes(self.Nx)

    @property
    def phi_x(self):
        if "phi_x" not in self._cache:
            self._cache["phi_x"] = spectral_dx(self.phi)
        return self._cache["phi_x"]

    def node(self, j) -> PointMN:
        if j not in self._nodes:
            zs = LaurentSeries(self.zeta[j], -self.K, "phi", self.phi[j])
            self._nodes[j] = PointMN(self.m, self.n, self.phi[j], self.ell_free[j], zs, self.radius, self.N)
        return self._nodes[j]

    def nodes(self):
        return [self.node(j) for j in range(self.Nx)]

    @property
    def B(self):
        return self.node(0).band[1]

    def wrap(self, series) -> LoopSeries:
        return LoopSeries.from_nodes(series, self.phi, self.phi_x, self.B)

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def a(self) -> LoopSeries:
        return self.cached("a", lambda: self.wrap([frame(p).a for p in self.nodes()]))

    def ahat(self) -> LoopSeries:
        return self.cached("ah", lambda: self.wrap([frame(p).ah for p in self.nodes()]))

    def is_x_independent(self, tol=1e-14) -> bool:
        arrs = (self.phi[:, None], self.ell_free, self.zeta)
        return all(np.max(np.abs(a - a[:1])) <= tol for a in arrs)

    def coefficient_sup(self) -> float:
        return float(max(np.abs(self.phi).max(), np.abs(self.ell_free).max(), np.abs(self.zeta).max(), 1.0))

    # state vector for time stepping
    def state(self) -> np.ndarray:
        return np.concatenate([self.phi[:, None], self.ell_free, self.zeta], axis=1)

    def with_state(self, s) -> "LoopPoint":
        r = self.m + self.n - 1
        return LoopPoint(self.m, self.n, s[:, 0], s[:, 1 : 1 + r], s[:, 1 + r :], self.K, self.M, self.radius, self.N)

    def band_limited(self) -> "LoopPoint":
        return self.with_state(band_limit(self.state(), self.M))

    def validate(self):
        """Index of the first node failing C1-C3, or ``None``."""
        for j, p in enumerate(self.nodes()):
            if not validate(p).ok:
                return j
        return None

    def to_json(self):
        c = lambda arr: [[complex(v).real, complex(v).imag] for v in arr]  # noqa: E731
        return {
            "m": self.m,
            "n": self.n,
            "Nx": self.Nx,
            "M": self.M,
            "K": self.K,
            "phi": c(to_modes(self.phi, self.M)),
            "ell": {str(e): c(to_modes(self.ell_free[:, e + self.n], self.M)) for e in range(-self.n, self.m - 1)},
            "zeta": {str(e): c(to_modes(self.zeta[:, e + self.K], self.M)) for e in range(-self.K, self.K + 1)},
        }

    @classmethod
    def from_json(cls, obj):
        Nx, M, K_ = obj["Nx"], obj["M"], obj["K"]
        m, n = obj["m"], obj["n"]
        arr = lambda lst: from_modes(np.array([complex(*v) for v in lst]), Nx)  # noqa: E731
        phi = arr(obj["phi"])
        ell = np.stack([arr(obj["ell"][str(e)]) for e in range(-n, m - 1)], axis=1)
        zeta = np.stack([arr(obj["zeta"][str(e)]) for e in range(-K_, K_ + 1)], axis=1)
        return cls(m, n, phi, ell, zeta, K_, M)


def constant_loop(p: PointMN, Nx=DEFAULT_NX, M=DEFAULT_M) -> LoopPoint:
    """The x-independent loop sitting at ``p``."""
    K_ = max(-p.zeta.lo, p.zeta.hi)
    z = p.zeta.coeffs_range(-K_, K_)
    return LoopPoint(
        p.m, p.n, np.full(Nx, p.phi), np.tile(p.free_ell(), (Nx, 1)), np.tile(z, (Nx, 1)), K_, M, p.grid.radius, p.grid.N
    )


def _fourier_field(rng, Nx, M, amp, decay, size=None):
    x = x_nodes(Nx)
    shape = (Nx,) if size is None else (Nx, size)
    out = np.zeros(shape, dtype=np.complex128)
    for k in range(1, M + 1):
        for s in (k, -k):
            r = amp * decay**k * np.sqrt(rng.uniform(0, 1, size))
            th = rng.uniform(0, 2 * np.pi, size)
            c = r * np.exp(1j * th)
            out += np.multiply.outer(np.exp(1j * s * x), c) if size is not None else c * np.exp(1j * s * x)
    return out


def random_loop_point(m, n, seed=None, rng=None, Nx=DEFAULT_NX, M=DEFAULT_M, K=DEFAULT_WINDOW,
                      amp=LOOP_AMP, decay=LOOP_DECAY, retries=100) -> LoopPoint:
    """Generator point plus band-limited x-dependence of relative size ``amp``."""
    rng = np.random.default_rng(seed) if rng is None else rng
    for _ in range(retries):
        p = random_point(m, n, rng=rng, K=K)
        base = constant_loop(p, Nx, M)
        phi = base.phi + _fourier_field(rng, Nx, M, amp * GEN_PHI_MAX, decay)
        ell = base.ell_free + _fourier_field(rng, Nx, M, amp, decay, m + n - 1)
        zscale = 2.0 ** -np.abs(np.arange(-K, K + 1)) * (np.abs(np.arange(-K, K + 1)) <= 8)
        zeta = base.zeta + _fourier_field(rng, Nx, M, amp * 0.05, decay, 2 * K + 1) * zscale[None, :]
        # keep the z-term of zeta centred on the moving pole: zeta = z + ...
        zeta[:, K] += phi - base.phi
        lp = LoopPoint(m, n, phi, ell, zeta, K, M, p.grid.radius, p.grid.N)
        if lp.validate() is None:
            return lp
    raise RuntimeError(f"no valid loop point after {retries} draws")


# ------------------------------------------------------------ Poisson tensors


def _shape_tangent(lp: LoopPoint, xi: LoopSeries, xih: LoopSeries, scale=None) -> LoopTangent:
    scale = max(xi.norm(), xih.norm()) if scale is None else scale
    bad = max(np.abs(xi.clip(lp.m - 1, xi.B).c).max(initial=0), np.abs(xih.clip(-xih.B, -lp.n - 2).c).max(initial=0))
    if bad > SHAPE_TOL * max(scale, 1.0):
        raise ShapeError(f"loop tangent leaves its shape by {bad:.3e}")
    return LoopTangent(xi.le(lp.m - 2), xih.ge(-lp.n - 1))


def poisson_apply(lp: LoopPoint, w: LoopCotangent, nu: int) -> LoopTangent:
    a, ah = lp.a(), lp.ahat()
    om, omh = w.omega, w.omegahat
    A = lie_bracket(om, a) + lie_bracket(omh, ah)
    if nu == 1:
        xi = A.minus() - lie_bracket(om.minus() + omh.minus(), a)
        xih = A.plus() * -1.0 + lie_bracket(om.plus() + omh.plus(), ah)
    elif nu == 2:
        C = om * a + omh * ah
        sigma = A.coeff(-1) / lp.m
        xi = A.minus() * a - lie_bracket(C.minus(), a) - a.dz() * sigma
        xih = (A.plus() * ah) * -1.0 + lie_bracket(C.plus(), ah) - ah.dz() * sigma
    else:
        raise ValueError("nu must be 1 or 2")
    return _shape_tangent(lp, xi, xih)


def sigma(lp: LoopPoint, w: LoopCotangent) -> np.ndarray:
    A = lie_bracket(w.omega, lp.a()) + lie_bracket(w.omegahat, lp.ahat())
    return A.coeff(-1) / lp.m


def metric_maps_on_dx(lp: LoopPoint, w: LoopCotangent, nu: int) -> LoopTangent:
    """``eta(w_x)`` (nu = 1) or ``g(w_x)`` (nu = 2) nodewise."""
    wx = w.dx()
    f = eta_apply if nu == 1 else g_apply
    out = [f(p, wx.node(j)) for j, p in enumerate(lp.nodes())]
    return LoopTangent(lp.wrap([t.xi for t in out]), lp.wrap([t.xihat for t in out]))


# --------------------------------------------------- roots and Hamiltonians


def _terms(lp, k):
    return k + 2 * (lp.m + lp.n) + 10


def lambda_power(p: PointMN, k: int, which: str = "lambda", chart: str = "phi", terms=None) -> LaurentSeries:
    """``lambda**k = a**(k/m)`` (downward) or ``lambdahat**k = ahat**(k/n)`` (upward)."""
    F = frame(p)
    T = terms or abs(k) + 2 * (p.m + p.n) + 10
    if which == "lambda":
        a = F.a
        if chart == "inf":
            a = reexpand_infinity(a, T + p.m)
        return p.cached(("lam", k, chart, T), lambda: power_rational(a, k, p.m, "down", T))
    if which == "lambdahat":
        return p.cached(("lamh", k, T), lambda: power_rational(F.ah, k, p.n, "up", T))
    raise ValueError(f"unknown root {which!r}")


def lambda_root(lp, which="lambda", chart="inf"):
    """``lambda`` (infinity chart by default) or ``lambdahat`` at a point or at every node."""
    if isinstance(lp, PointMN):
        return lambda_power(lp, 1, which, chart)
    return [lambda_power(p, 1, which, chart) for p in lp.nodes()]


def lambda_plus_inf(p: PointMN, k: int) -> LaurentSeries:
    """``(lambda**k)_+`` via the polynomial part at infinity, re-expressed in ``z - phi``."""
    s = lambda_power(p, k, "lambda", "inf")
    top = s.coeffs_range(0, s.hi)
    phi = p.phi
    out = np.zeros(len(top), dtype=np.complex128)
    for d, c in enumerate(top):
        b = 1.0 + 0j
        for r in range(d + 1):
            out[d - r] += c * b
            b *= (d - r) / (r + 1) * phi
    return LaurentSeries(out, 0, "phi", phi)


def _close(s):
    return LaurentSeries(s.coeffs, s.lo, "phi", s.phi)


def whitham_rhs(lp: LoopPoint, flow: str, k: int) -> LoopTangent:
    """``d(a, ahat)/ds_k = [(lambda^k)_+, .]`` or ``d/dshat_k = [-(lambdahat^k)_-, .]``."""
    if k < 1:
        raise ValueError("k must be positive")
    if flow == "s":
        gen = lp.wrap([lambda_plus_inf(p, k) for p in lp.nodes()])
    elif flow == "shat":
        gen = lp.wrap([_close(lambda_power(p, k, "lambdahat").minus()) * -1.0 for p in lp.nodes()])
    else:
        raise ValueError(f"unknown flow {flow!r}")
    return _shape_tangent(lp, lie_bracket(gen, lp.a()), lie_bracket(gen, lp.ahat()))


def hamiltonian_density(p: PointMN, k: int, which: str = "H") -> complex:
    if which == "H":
        # -(m/k) res_inf lambda^k = (m/k) [coefficient of (z - phi)^-1]
        return p.m / k * lambda_power(p, k).coeff(-1)
    if which == "Hhat":
        return p.n / k * lambda_power(p, k, "lambdahat").coeff(-1)
    raise ValueError(f"unknown Hamiltonian {which!r}")


def hamiltonian(lp: LoopPoint, k: int, which: str = "H") -> complex:
    """``H_k = -(m/k) int res_inf lambda^k dx`` or ``Hhat_k = (n/k) int res_phi lambdahat^k dx``."""
    return complex(x_mean(np.array([hamiltonian_density(p, k, which) for p in lp.nodes()])))


def gradient_node(p: PointMN, k: int, which: str = "H") -> CotangentVec:
    zero = LaurentSeries([0.0], 0, "phi", p.phi)
    if which == "H":
        return CotangentVec(_close(lambda_power(p, k - p.m).ge(-p.m + 1)), zero)
    return CotangentVec(zero, _close(lambda_power(p, k - p.n, "lambdahat").le(p.n)))


def var_gradient(lp: LoopPoint, k: int, which: str = "H") -> LoopCotangent:
    """Analytic variational gradient of ``H_k`` / ``Hhat_k``.

    ``dH_k = ((lambda^(k-m))_{>= -m+1}, 0)`` and ``dHhat_k = (0, (lambdahat^(k-n))_{<= n})``.
    """
    gs = [gradient_node(p, k, which) for p in lp.nodes()]
    return LoopCotangent(lp.wrap([g.omega for g in gs]), lp.wrap([g.omegahat for g in gs]))


# ------------------------------------------------------ tangent -> state


def tangent_to_state(lp: LoopPoint, v: LoopTangent) -> np.ndarray:
    """Rate of change of ``(phi, ell_free, zeta)`` induced by a loop tangent."""
    m, n, K_ = lp.m, lp.n, lp.K
    out = np.zeros(lp.state().shape, dtype=np.complex128)
    for j, p in enumerate(lp.nodes()):
        xi, xih = v.xi.node(j), v.xihat.node(j)
        F = frame(p)
        dzeta = xi.coeffs_range(-K_, K_) - xih.coeffs_range(-K_, K_)
        dl = np.concatenate([xih.coeffs_range(-n - 1, -1), xi.coeffs_range(0, m - 2)])  # exps -n-1..m-2
        dell = F.dell.coeffs_range(-n - 1, m - 2)
        dphi = dl[0] / (n * p.ell[0])
        out[j, 0] = dphi
        out[j, 1 : m + n] = dl[1:] + dphi * dell[1:]
        out[j, m + n :] = dzeta + dphi * F.dzeta.coeffs_range(-K_, K_)
    return out


def perturbed(lp: LoopPoint, v: LoopTangent, eps: float) -> LoopPoint:
    return lp.with_state(lp.state() + eps * tangent_to_state(lp, v))


def random_loop_tangent(lp: LoopPoint, rng, depth=4, decay=0.5, amp=0.1) -> LoopTangent:
    """Band-limited loop tangent with finite z-support."""
    m, n, Nx = lp.m, lp.n, lp.Nx
    dz = decay ** np.arange(depth + 1)
    xi = (_fourier_field(rng, Nx, lp.M, amp, 0.5, depth + 1) + amp) * dz[None, ::-1]
    xih = (_fourier_field(rng, Nx, lp.M, amp, 0.5, depth + 1) + amp) * dz[None, :]
    return LoopTangent(
        LoopSeries(xi, m - 2 - depth, lp.phi, lp.phi_x, lp.B),
        LoopSeries(xih, -n - 1, lp.phi, lp.phi_x, lp.B),
    )


def fd_directional(fn: Callable[[LoopPoint], complex], lp: LoopPoint, v: LoopTangent, eps=1e-5) -> complex:
    return (fn(perturbed(lp, v, eps)) - fn(perturbed(lp, v, -eps))) / (2 * eps)


def check_gradient(lp: LoopPoint, k: int, which="H", directions=20, seed=0, eps=1e-5):
    """Worst relative mismatch between FD directional derivatives and ``<dH, v>``."""
    rng = np.random.default_rng(seed)
    dH = var_gradient(lp, k, which)
    worst = 0.0
    for _ in range(directions):
        v = random_loop_tangent(lp, rng)
        fd = fd_directional(lambda q: hamiltonian(q, k, which), lp, v, eps)
        an = loop_pair(dH, v)
        worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1e-300))
    return worst


# ------------------------------------------------------------ functionals


@dataclass
class LocalFunctional:
    """``F = int f dx`` with a nodewise density and its gradient."""

    density: Callable[[PointMN], complex]
    gradient: Callable[[PointMN], CotangentVec]
    label: str = ""

    def value(self, lp: LoopPoint) -> complex:
        return complex(x_mean(np.array([self.density(p) for p in lp.nodes()])))

    def grad(self, lp: LoopPoint) -> LoopCotangent:
        gs = [self.gradient(p) for p in lp.nodes()]
        return LoopCotangent(lp.wrap([g.omega for g in gs]), lp.wrap([g.omegahat for g in gs]))


def hamiltonian_functional(k: int, which: str = "H") -> LocalFunctional:
    return LocalFunctional(lambda p: hamiltonian_density(p, k, which), lambda p: gradient_node(p, k, which), f"{which}{k}")


def moment_functional(j: int) -> LocalFunctional:
    """``f = (1/2 pi i) oint a(z) z**j dz`` for ``j >= 0``; its gradient is ``((z)**j, 0)``."""

    def zpow(p):
        s = LaurentSeries([1.0], 0, "phi", p.phi)
        zs = LaurentSeries([p.phi, 1.0], 0, "phi", p.phi)
        for _ in range(j):
            s = s * zs
        return s

    def dens(p):
        return complex(np.dot(frame(p).a.coeffs_range(-1 - j, -1)[::-1], zpow(p).coeffs))

    def grad(p):
        return CotangentVec(zpow(p), LaurentSeries([0.0], 0, "phi", p.phi))

    return LocalFunctional(dens, grad, f"moment{j}")


def product_functional(f: LocalFunctional, g: LocalFunctional) -> LocalFunctional:
    def grad(p):
        return f.gradient(p) * g.density(p) + g.gradient(p) * f.density(p)

    return LocalFunctional(lambda p: f.density(p) * g.density(p), grad, f"{f.label}*{g.label}")


def poisson_bracket(F: LocalFunctional, H: LocalFunctional, lp: LoopPoint, nu: int) -> complex:
    """``{F, H}_nu = int <dF, P_nu dH> dx``."""
    return loop_pair(F.grad(lp), poisson_apply(lp, H.grad(lp), nu))


# ------------------------------------------------------------ recursion


def _rel_sup(t: LoopTangent, lp: LoopPoint) -> float:
    return t.norm() / lp.coefficient_sup()


def recursion_residual(lp: LoopPoint, k: int, which: str = "s"):
    """``(|P1 dH_{k+m} - P2 dH_k|, |P2 dH_k - flow|)`` as relative sup norms."""
    if which == "s":
        kind, shift = "H", lp.m
    elif which == "shat":
        kind, shift = "Hhat", lp.n
    else:
        raise ValueError(f"unknown flow {which!r}")
    p1 = poisson_apply(lp, var_gradient(lp, k + shift, kind), 1)
    p2 = poisson_apply(lp, var_gradient(lp, k, kind), 2)
    rhs = whitham_rhs(lp, which, k)
    return _rel_sup(p1 - p2, lp), _rel_sup(p2 - rhs, lp)


def flow_commutator(lp: LoopPoint, f1=("s", 1), f2=("s", 2), eps=1e-5) -> float:
    """``D_{X1} X2 - D_{X2} X1`` by central differences (relative sup norm)."""
    X1 = whitham_rhs(lp, *f1)
    X2 = whitham_rhs(lp, *f2)

    def d(X, Y):
        up = perturbed(lp, X, eps)
        dn = perturbed(lp, X, -eps)
        return (tangent_to_state(up, whitham_rhs(up, *Y)) - tangent_to_state(dn, whitham_rhs(dn, *Y))) / (2 * eps)

    # the Lie derivative of vector fields in state coordinates
    D12 = d(X1, f2)
    D21 = d(X2, f1)
    return float(np.max(np.abs(D12 - D21)) / lp.coefficient_sup())


# ------------------------------------------------------------- evolution


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    points: list = field(default_factory=list)
    drift: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "times": list(self.times),
            "drift": {k: [[complex(v).real, complex(v).imag] for v in vs] for k, vs in self.drift.items()},
            "final": self.points[-1].to_json() if self.points else None,
        }


def flow_state_rhs(lp: LoopPoint, flow) -> np.ndarray:
    return tangent_to_state(lp, whitham_rhs(lp, *flow))


def dt_bound(lp: LoopPoint, flow, safety=0.5) -> float:
    """Heuristic step bound ``safety / (M * max |d/dz generator|)`` on the circle."""
    kind, k = flow
    p = lp.node(0)
    if kind == "s":
        g = _close(lambda_power(p, k).plus())
    else:
        g = _close(lambda_power(p, k, "lambdahat").minus())
    speed = np.abs(g.derivative().evaluate(p.grid.points)).max()
    return safety / (lp.M * max(speed, 1e-12))


def evolve(lp: LoopPoint, flow=("s", 1), dt=0.01, steps=10, monitor=(("H", 1), ("H", 2)),
           keep=False, band=True) -> Trajectory:
    """Classical RK4 on all coefficients; records Hamiltonian drift each step."""
    traj = Trajectory()
    mon = [tuple(x) for x in monitor]
    ref = {f"{w}{k}": hamiltonian(lp, k, w) for w, k in mon}
    traj.drift = {key: [] for key in ref}
    cur = lp
    traj.times.append(0.0)
    traj.points.append(cur)
    for step in range(1, steps + 1):
        s0 = cur.state()
        try:
            k1 = flow_state_rhs(cur, flow)
            k2 = flow_state_rhs(cur.with_state(s0 + 0.5 * dt * k1), flow)
            k3 = flow_state_rhs(cur.with_state(s0 + 0.5 * dt * k2), flow)
            k4 = flow_state_rhs(cur.with_state(s0 + dt * k3), flow)
        except (ShapeError, WindowError, ArithmeticError, ValueError) as exc:
            # an RK stage left the manifold before the step could be completed
            raise EvolutionError(f"stage evaluation failed in step {step}: {exc}", step, traj) from exc
        nxt = cur.with_state(s0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
        if band:
            nxt = nxt.band_limited()
        bad = nxt.validate()
        if bad is not None:
            raise EvolutionError(f"point left M_{{m,n}} at node {bad} in step {step}", step, traj)
        cur = nxt
        for w, k in mon:
            traj.drift[f"{w}{k}"].append(hamiltonian(cur, k, w) - ref[f"{w}{k}"])
        traj.times.append(step * dt)
        if keep or step == steps:
            traj.points.append(cur)
    return traj


def translated(lp: LoopPoint, s: float) -> LoopPoint:
    """Exact shift ``x -> x + s`` of every band-limited coefficient."""
    st = lp.state()
    F = np.fft.fft(st, axis=0)
    k = _wavenumbers(lp.Nx)
    return lp.with_state(np.fft.ifft(F * np.exp(1j * k * s)[:, None], axis=0))
