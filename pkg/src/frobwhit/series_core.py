"""Truncated Laurent series in two charts and quadrature on a circle.

A :class:`LaurentSeries` stores a dense block of coefficients over an exponent
window ``[lo, hi]``.  In the ``"phi"`` chart the monomials are powers of
``(z - phi)``; in the ``"inf"`` chart they are powers of ``z``.  Two flags record
whether the true series may continue past either end of the window:

* a *closed* end means every coefficient beyond it is exactly zero;
* an *open* end means coefficients beyond it exist but are unknown.

Arithmetic propagates these flags and narrows the window to the exponents that
are fully determined by the operands.  Asking for a coefficient inside an open
gap raises :class:`WindowError` instead of returning zero.

Two-sided series on the annulus around the circle are handled numerically by
sampling on a :class:`CircleGrid` and transforming back with the FFT.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 16
DEFAULT_N = 256
DEFAULT_RADIUS = 1.0
DEFAULT_TERMS = 64
NEWTON_DEFECT_TOL = 1e-13

CHARTS = ("phi", "inf")


class WindowError(ValueError):
    """A coefficient outside the trusted window was requested."""


class ChartError(ValueError):
    """Operands live in different charts or around different base points."""


class SeriesDomainError(ValueError):
    """Preconditions of a series operation (leading term, divisibility) fail."""


def _as_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


class LaurentSeries:
    """Windowed Laurent series; see the module docstring for window semantics."""

    __slots__ = ("coeffs", "lo", "chart", "phi", "open_lo", "open_hi")

    def __init__(self, coeffs, lo=0, chart="phi", phi=0j, open_lo=False, open_hi=False):
        if chart not in CHARTS:
            raise ChartError(f"unknown chart {chart!r}")
        self.coeffs = np.array(coeffs, dtype=np.complex128).reshape(-1)
        self.lo = int(lo)
        self.chart = chart
        self.phi = complex(phi) if chart == "phi" else 0j
        self.open_lo = bool(open_lo)
        self.open_hi = bool(open_hi)

    # -- construction -------------------------------------------------

    @classmethod
    def from_dict(cls, d, chart="phi", phi=0j, window=None, open_lo=False, open_hi=False):
        exps = [int(e) for e in d]
        if window is None:
            if not exps:
                raise WindowError("empty coefficient map needs an explicit window")
            window = (min(exps), max(exps))
        lo, hi = int(window[0]), int(window[1])
        arr = np.zeros(max(hi - lo + 1, 0), dtype=np.complex128)
        for e, c in d.items():
            e = int(e)
            if not lo <= e <= hi:
                raise WindowError(f"exponent {e} outside window [{lo}, {hi}]")
            arr[e - lo] = _as_complex(c)
        return cls(arr, lo, chart, phi, open_lo, open_hi)

    @classmethod
    def monomial(cls, k, c=1.0, chart="phi", phi=0j):
        return cls([c], k, chart, phi)

    @classmethod
    def zero(cls, lo=0, hi=0, chart="phi", phi=0j):
        return cls(np.zeros(hi - lo + 1), lo, chart, phi)

    def _like(self, coeffs, lo, open_lo=None, open_hi=None):
        return LaurentSeries(
            coeffs,
            lo,
            self.chart,
            self.phi,
            self.open_lo if open_lo is None else open_lo,
            self.open_hi if open_hi is None else open_hi,
        )

    # -- inspection ---------------------------------------------------

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.shape[0] - 1

    @property
    def window(self):
        return (self.lo, self.hi)

    @property
    def is_closed(self) -> bool:
        return not (self.open_lo or self.open_hi)

    def coeff(self, e: int) -> complex:
        e = int(e)
        if self.lo <= e <= self.hi:
            return complex(self.coeffs[e - self.lo])
        if e < self.lo and not self.open_lo:
            return 0j
        if e > self.hi and not self.open_hi:
            return 0j
        raise WindowError(f"exponent {e} outside trusted window {self.window}")

    def coeffs_range(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients for exponents ``lo..hi``; raises inside open gaps."""
        if hi < lo:
            return np.zeros(0, dtype=np.complex128)
        if (lo < self.lo and self.open_lo) or (hi > self.hi and self.open_hi):
            raise WindowError(f"range [{lo}, {hi}] leaves trusted window {self.window}")
        out = np.zeros(hi - lo + 1, dtype=np.complex128)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo : b - lo + 1] = self.coeffs[a - self.lo : b - self.lo + 1]
        return out

    def to_dict(self, tol=0.0):
        return {self.lo + i: complex(c) for i, c in enumerate(self.coeffs) if abs(c) > tol}

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def leading(self, direction: str, rtol=1e-13) -> int:
        """Lowest (``"up"``) or highest (``"down"``) significant exponent."""
        mag = np.abs(self.coeffs)
        if mag.size == 0 or mag.max() == 0:
            raise SeriesDomainError("zero series has no leading term")
        idx = np.flatnonzero(mag > rtol * mag.max())
        return self.lo + int(idx[0] if direction == "up" else idx[-1])

    def __repr__(self):
        return (
            f"LaurentSeries(chart={self.chart!r}, phi={self.phi}, window={self.window}, "
            f"open=({self.open_lo}, {self.open_hi}), nnz={np.count_nonzero(self.coeffs)})"
        )

    def evaluate(self, z):
        """Evaluate the stored coefficients at points ``z`` (absolute coordinate)."""
        z = np.asarray(z, dtype=np.complex128)
        w = z - self.phi
        out = np.zeros_like(w)
        for i in range(self.coeffs.shape[0] - 1, -1, -1):
            out = out * w + self.coeffs[i]
        return out * w ** self.lo

    # -- chart compatibility --------------------------------------------

    def _check(self, other: "LaurentSeries"):
        if self.chart != other.chart:
            raise ChartError(f"chart mismatch {self.chart} vs {other.chart}")
        if self.chart == "phi" and self.phi != other.phi:
            raise ChartError(f"base point mismatch {self.phi} vs {other.phi}")

    # -- arithmetic ---------------------------------------------------

    def _addsub(self, other, sign):
        if not isinstance(other, LaurentSeries):
            other = self._like([complex(other)], 0, False, False)
        self._check(other)
        opens_lo = [s.lo for s in (self, other) if s.open_lo]
        opens_hi = [s.hi for s in (self, other) if s.open_hi]
        lo = max(opens_lo) if opens_lo else min(self.lo, other.lo)
        hi = min(opens_hi) if opens_hi else max(self.hi, other.hi)
        if hi < lo:
            raise WindowError("sum has an empty trusted window")
        out = self.coeffs_range(lo, hi) + sign * other.coeffs_range(lo, hi)
        return self._like(out, lo, bool(opens_lo), bool(opens_hi))

    def __add__(self, other):
        return self._addsub(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._addsub(other, -1.0)

    def __rsub__(self, other):
        return (-self)._addsub(other, 1.0)

    def __neg__(self):
        return self._like(-self.coeffs, self.lo)

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return _mul(self, other)
        return self._like(self.coeffs * complex(other), self.lo)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._like(self.coeffs / complex(other), self.lo)

    def derivative(self):
        """d/dz, which is d/d(z - phi) in the phi chart."""
        if self.coeffs.size == 0:
            return self._like(self.coeffs, self.lo - 1)
        exps = np.arange(self.lo, self.hi + 1)
        return self._like(self.coeffs * exps, self.lo - 1)

    # -- projections ----------------------------------------------------

    def ge(self, k: int):
        """Keep exponents ``>= k``."""
        k = int(k)
        if self.open_hi and k > self.hi:
            raise WindowError("projection lies entirely in the open upper gap")
        if k <= self.lo:
            if self.open_lo and k < self.lo:
                raise WindowError(f"exponents from {k} below window {self.window} are unknown")
            return self._like(self.coeffs.copy(), self.lo)
        if k > self.hi:
            return self._like(np.zeros(1), k, False, False)
        return self._like(self.coeffs[k - self.lo :].copy(), k, False, self.open_hi)

    def le(self, k: int):
        """Keep exponents ``<= k``."""
        k = int(k)
        if self.open_lo and k < self.lo:
            raise WindowError("projection lies entirely in the open lower gap")
        if k >= self.hi:
            if self.open_hi and k > self.hi:
                raise WindowError(f"exponents up to {k} above window {self.window} are unknown")
            return self._like(self.coeffs.copy(), self.lo)
        if k < self.lo:
            return self._like(np.zeros(1), k, False, False)
        return self._like(self.coeffs[: k - self.lo + 1].copy(), self.lo, self.open_lo, False)

    def plus(self):
        return self.ge(0)

    def minus(self):
        return self.le(-1)

    def clip(self, lo: int, hi: int):
        """Numerically drop coefficients outside ``[lo, hi]``; flags are kept."""
        a, b = max(lo, self.lo), min(hi, self.hi)
        if b < a:
            return self._like(np.zeros(1), max(lo, min(hi, self.lo)))
        return self._like(self.coeffs[a - self.lo : b - self.lo + 1].copy(), a)

    # -- serialisation ------------------------------------------------

    def to_json(self):
        return {
            "chart": self.chart,
            "phi": [self.phi.real, self.phi.imag],
            "window": [self.lo, self.hi],
            "coeffs": {str(self.lo + i): [c.real, c.imag] for i, c in enumerate(self.coeffs) if c != 0},
            "open": [self.open_lo, self.open_hi],
        }

    @classmethod
    def from_json(cls, obj):
        lo, hi = obj["window"]
        opens = obj.get("open", [False, False])
        return cls.from_dict(
            obj["coeffs"], obj["chart"], _as_complex(obj.get("phi", [0.0, 0.0])), (lo, hi), opens[0], opens[1]
        )


def _mul(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    f._check(g)
    if (f.open_hi and g.open_lo) or (f.open_lo and g.open_hi):
        raise WindowError("product of an upward tail and a downward tail is undetermined")
    lo, hi = f.lo + g.lo, f.hi + g.hi
    if f.open_hi:
        hi = min(hi, f.hi + g.lo)
    if g.open_hi:
        hi = min(hi, g.hi + f.lo)
    if f.open_lo:
        lo = max(lo, f.lo + g.hi)
    if g.open_lo:
        lo = max(lo, g.lo + f.hi)
    if hi < lo:
        raise WindowError("product has an empty trusted window")
    full = K.conv(f.coeffs, g.coeffs)
    off = lo - (f.lo + g.lo)
    return LaurentSeries(full[off : off + hi - lo + 1], lo, f.chart, f.phi, f.open_lo or g.open_lo, f.open_hi or g.open_hi)


# ------------------------------------------------------------------ operations


def arith(f: LaurentSeries, g: LaurentSeries | None, op: str) -> LaurentSeries:
    """Add, subtract, multiply, or differentiate (``g`` ignored)."""
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "derivative":
        return f.derivative()
    raise ValueError(f"unknown op {op!r}")


def project(f: LaurentSeries, sel) -> LaurentSeries:
    """``sel`` is ``"plus"``, ``"minus"``, ``("ge", k)`` or ``("le", k)``."""
    if f.chart != "phi":
        raise ChartError("projections act on phi-chart series")
    if sel == "plus":
        return f.plus()
    if sel == "minus":
        return f.minus()
    kind, k = sel
    if kind == "ge":
        return f.ge(k)
    if kind == "le":
        return f.le(k)
    raise ValueError(f"unknown selector {sel!r}")


def residue_phi(f: LaurentSeries) -> complex:
    """Coefficient of ``(z - phi)**-1``."""
    if f.chart != "phi":
        raise ChartError("residue_phi needs a phi-chart series")
    return f.coeff(-1)


def _binom(i: int, k: int) -> float:
    # generalised binomial C(i, k) for integer i and k >= 0
    out = 1.0
    for r in range(k):
        out *= (i - r) / (r + 1)
    return out


def reexpand_infinity(f: LaurentSeries, hi_out: int = DEFAULT_TERMS) -> LaurentSeries:
    """Re-expand a phi-chart series in powers of ``z`` valid for large ``|z|``.

    Output exponents run from ``-hi_out`` up to the top exponent of ``f``.
    """
    if f.chart == "inf":
        return f
    if f.open_hi:
        raise WindowError("re-expansion at infinity needs finitely many positive powers")
    top = f.hi
    lo_out = -int(hi_out)
    if f.open_lo and f.lo > lo_out:
        raise WindowError(f"window {f.window} cannot produce z**{lo_out}")
    out = np.zeros(top - lo_out + 1, dtype=np.complex128)
    phi = f.phi
    for i in range(f.lo, top + 1):
        c = f.coeffs[i - f.lo]
        if c == 0:
            continue
        # (z - phi)**i = sum_k C(i, k) (-phi)**k z**(i - k)
        kmax = i - lo_out
        if i >= 0:
            kmax = min(kmax, i)
        b = 1.0 + 0j
        for k in range(0, kmax + 1):
            out[i - k - lo_out] += c * b
            b *= (i - k) / (k + 1) * (-phi)
    return LaurentSeries(out, lo_out, "inf", 0j, True, False)


def residue_infinity(f: LaurentSeries) -> complex:
    """``res_{z=inf} f dz`` = minus the ``z**-1`` coefficient at infinity."""
    if f.chart == "phi":
        # only (z - phi)**-1 contributes to z**-1
        if f.open_lo and f.lo > -1:
            raise WindowError("window excludes the (z - phi)**-1 coefficient")
        return -f.coeff(-1)
    return -f.coeff(-1)


def _extract_tail(f: LaurentSeries, direction: str, terms: int | None, lead: int | None):
    if direction == "up":
        if f.open_lo:
            raise SeriesDomainError("upward expansion needs a closed lower end")
        e = f.leading("up") if lead is None else int(lead)
        known = f.hi - e + 1
        if f.open_hi:
            T = known if terms is None else min(int(terms), known)
        else:
            T = DEFAULT_TERMS if terms is None else int(terms)
        u = f.coeffs_range(e, e + T - 1) if not f.open_hi else f.coeffs[e - f.lo : e - f.lo + T]
    else:
        if f.open_hi:
            raise SeriesDomainError("downward expansion needs a closed upper end")
        e = f.leading("down") if lead is None else int(lead)
        known = e - f.lo + 1
        if f.open_lo:
            T = known if terms is None else min(int(terms), known)
            u = f.coeffs[e - f.lo - T + 1 : e - f.lo + 1][::-1]
        else:
            T = DEFAULT_TERMS if terms is None else int(terms)
            u = f.coeffs_range(e - T + 1, e)[::-1]
    u = np.array(u, dtype=np.complex128)
    c = u[0]
    if c == 0:
        raise SeriesDomainError("zero leading coefficient")
    return c, e, u / c, T


def _default_direction(f: LaurentSeries) -> str:
    if f.open_hi:
        return "up"
    if f.open_lo:
        return "down"
    return "down" if f.chart == "inf" else "up"


def _assemble(coef, e_out, direction, T, f, closed=False):
    if direction == "up":
        return LaurentSeries(coef[:T], e_out, f.chart, f.phi, False, not closed)
    return LaurentSeries(coef[:T][::-1], e_out - T + 1, f.chart, f.phi, not closed, False)


def reciprocal(f: LaurentSeries, direction: str | None = None, terms: int | None = None, lead=None):
    """``1/f`` expanded away from its leading term (single-tail division)."""
    return power_rational(f, -1, 1, direction, terms, lead)


def power_rational(f, num: int, den: int = 1, direction=None, terms=None, lead=None) -> LaurentSeries:
    """``f**(num/den)`` with the principal root of the leading coefficient.

    ``direction`` is ``"up"`` (expansion around the base point, tail of higher
    powers) or ``"down"`` (expansion around infinity, tail of lower powers).
    The root is found by series Newton iteration that doubles the correct
    order each pass.
    """
    num, den = int(num), int(den)
    if den <= 0:
        raise SeriesDomainError("den must be positive")
    direction = direction or _default_direction(f)
    if den == 1 and num >= 0 and f.is_closed:
        out = LaurentSeries([1.0], 0, f.chart, f.phi)
        for _ in range(num):
            out = out * f
        return out
    c, e, u, T = _extract_tail(f, direction, terms, lead)
    if (e * num) % den:
        raise SeriesDomainError(f"leading exponent {e} times {num} not divisible by {den}")
    root = K.ps_root(u, den, T) if den > 1 else u.copy()
    if den > 1:
        defect = np.max(np.abs(K.ps_powint(root, den, T) - u[:T]))
        if defect > NEWTON_DEFECT_TOL * max(1.0, np.max(np.abs(root))) ** den:
            raise ArithmeticError(f"series root defect {defect:.3e} above tolerance")
    if num >= 0:
        g = K.ps_powint(root, num, T)
    else:
        g = K.ps_inv(K.ps_powint(root, -num, T), T)
    lead_c = (complex(c) ** (1.0 / den)) ** num if den > 1 else complex(c) ** num
    e_out = e * num // den
    return _assemble(g * lead_c, e_out, direction, T, f)


def revert(f: LaurentSeries, terms: int | None = None, direction: str | None = None) -> LaurentSeries:
    """Compositional inverse of a series whose leading exponent is +1 or -1.

    For a phi-chart input the result gives ``z = phi + w`` as a series in the
    new variable ``y = f``; for an inf-chart input it gives ``z``.  The output
    is an ``"inf"``-chart series in ``y`` when ``y`` is large on the source
    neighbourhood and a ``"phi"``-chart series around ``y = 0`` otherwise.
    """
    direction = direction or ("down" if f.chart == "inf" else "up")
    c, e, u, T = _extract_tail(f, direction, terms, None)
    k = e if direction == "up" else -e
    if k not in (1, -1):
        raise SeriesDomainError(f"leading exponent {e} is not +-1")
    # in the local parameter s, f = c s**k U(s)
    if k == 1:
        F = np.concatenate([[0.0], c * u[:T]])
    else:
        F = np.concatenate([[0.0], K.ps_inv(u, T) / c])
    G = K.ps_revert(F, T)  # s = G(r), r = y (k = 1) or 1/y (k = -1)
    n = G.shape[0]
    shift = f.phi if f.chart == "phi" else 0j
    if direction == "up":
        # w = s
        w_coef, w_lo = G, 0
        if k == 1:
            out = LaurentSeries(w_coef, w_lo, "phi", 0j, False, True)
        else:
            # w as powers of y: y**-j
            out = LaurentSeries(w_coef[::-1], -(n - 1), "inf", 0j, True, False)
    else:
        # w = 1/s = 1/G, G = g1 r (1 + ...)
        g1 = G[1]
        H = K.ps_inv(G[1:] / g1, n - 1) / g1  # 1/G = r**-1 H(r)
        if k == 1:
            out = LaurentSeries(H, -1, "phi", 0j, False, True)
        else:
            # r = 1/y, so r**(j-1) = y**(1-j)
            out = LaurentSeries(H[::-1], 1 - (n - 2), "inf", 0j, True, False)
    if shift != 0:
        out = out + LaurentSeries([shift], 0, out.chart, out.phi)
    return out


def compose_check(f: LaurentSeries, g: LaurentSeries, points) -> float:
    """Max of ``|f(g(y)) - y|`` at sample points ``y`` (used as a test oracle)."""
    y = np.asarray(points, dtype=np.complex128)
    inner = g.evaluate(y)
    return float(np.max(np.abs(f.evaluate(inner) - y)))


# ------------------------------------------------------------------ circle grids


@dataclass(frozen=True)
class CircleGrid:
    """Equispaced samples ``center + radius * exp(2 pi i j / N)``."""

    center: complex = 0j
    radius: float = DEFAULT_RADIUS
    N: int = DEFAULT_N

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def unit(self):
        return np.exp(2j * np.pi * np.arange(self.N) / self.N)

    @property
    def points(self):
        return self.center + self.radius * self.unit

    def contains_origin(self) -> bool:
        return self.radius > abs(self.center)

    @property
    def band(self):
        """Largest symmetric window recoverable without aliasing."""
        b = self.N // 4 - 1
        return (-b, b)

    def to_json(self):
        return {"center": [self.center.real, self.center.imag], "radius": self.radius, "N": self.N}

    @classmethod
    def from_json(cls, obj):
        return cls(_as_complex(obj["center"]), float(obj["radius"]), int(obj["N"]))


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function at the nodes of a :class:`CircleGrid`."""

    grid: CircleGrid
    values: np.ndarray

    def _other(self, other):
        if isinstance(other, SampledFunction):
            if other.grid != self.grid:
                raise ChartError("grid mismatch")
            return other.values
        return other

    def __add__(self, other):
        return SampledFunction(self.grid, self.values + self._other(other))

    def __sub__(self, other):
        return SampledFunction(self.grid, self.values - self._other(other))

    def __mul__(self, other):
        return SampledFunction(self.grid, self.values * self._other(other))

    def __truediv__(self, other):
        return SampledFunction(self.grid, self.values / self._other(other))

    __radd__ = __add__
    __rmul__ = __mul__


def _fold(f: LaurentSeries, grid: CircleGrid):
    N = grid.N
    x = np.zeros(N, dtype=np.complex128)
    exps = np.arange(f.lo, f.hi + 1)
    np.add.at(x, exps % N, f.coeffs * grid.radius ** exps.astype(float))
    return x


def circle_transform(obj, grid: CircleGrid, window=None):
    """Series to samples on ``grid`` or samples back to series.

    Samples are converted with the discrete Fourier transform and the radius
    scaling ``r**-k``; the default output window is ``grid.band``.
    """
    if isinstance(obj, LaurentSeries):
        if obj.chart != "phi" or abs(obj.phi - grid.center) > 1e-14 * max(1.0, abs(grid.center)):
            raise ChartError("series and grid must share the base point")
        return SampledFunction(grid, grid.N * np.fft.ifft(_fold(obj, grid)))
    if isinstance(obj, SampledFunction):
        if obj.grid != grid:
            raise ChartError("grid mismatch")
        lo, hi = window if window is not None else grid.band
        if 2 * (hi - lo + 1) > grid.N:
            raise WindowError(f"N={grid.N} too small for window [{lo}, {hi}]")
        spectrum = np.fft.fft(obj.values) / grid.N
        exps = np.arange(lo, hi + 1)
        coeffs = spectrum[exps % grid.N] / grid.radius ** exps.astype(float)
        return LaurentSeries(coeffs, lo, "phi", grid.center)
    raise TypeError(f"cannot transform {type(obj).__name__}")


def sample(f: LaurentSeries, grid: CircleGrid) -> np.ndarray:
    """Values of ``f`` on ``grid`` as a plain array."""
    return circle_transform(f, grid).values


def contour_integral(fvals) -> complex:
    """``(1/2 pi i) \\oint f dz`` by the periodic trapezoid rule."""
    if isinstance(fvals, LaurentSeries):
        return fvals.coeff(-1)
    g = fvals.grid
    return complex(g.radius / g.N * np.sum(fvals.values * g.unit))


def unwrapped_log(values: np.ndarray):
    """Continuous logarithm along a closed loop of samples and its winding."""
    if np.any(values == 0):
        raise ZeroDivisionError("a sample vanishes")
    ang = np.angle(values)
    steps = np.angle(np.exp(1j * np.diff(np.concatenate([ang, ang[:1]]))))
    winding = int(np.rint(np.sum(steps) / (2 * np.pi)))
    phase = ang[0] + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    return np.log(np.abs(values)) + 1j * phase, winding


def winding_number(values: np.ndarray) -> int:
    """Winding of a closed sampled curve around the origin."""
    return unwrapped_log(values)[1]


def log_ratio_integral(zeta_vals, grid: CircleGrid | None = None) -> complex:
    """``(1/2 pi i) \\oint log(z / zeta(z)) dz`` with a phase-unwrapped branch."""
    if isinstance(zeta_vals, SampledFunction):
        grid = zeta_vals.grid
        vals = zeta_vals.values
    else:
        vals = np.asarray(zeta_vals, dtype=np.complex128)
    ratio = grid.points / vals
    logv, winding = unwrapped_log(ratio)
    if winding != 0:
        raise ValueError(f"z/zeta winds {winding} times around 0")
    return complex(grid.radius / grid.N * np.sum(logv * grid.unit))


def as_fraction(x) -> Fraction:
    return Fraction(x).limit_denominator(10**6)
