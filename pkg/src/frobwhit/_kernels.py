"""Hot loops for truncated power series and pointwise Newton solves.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version.  ``FROBWHIT_NUMBA=0`` in the environment selects the numpy path; the
default uses numba when it imports.  All arrays are ``complex128``.
"""
import os

import numpy as np

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("FROBWHIT_NUMBA", "1") != "0"


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return nb.njit(cache=True)(fn)


# ---------------------------------------------------------------- numba path


@_njit
def _nb_conv(a, b):
    na, nb_ = a.shape[0], b.shape[0]
    if na == 0 or nb_ == 0:
        return np.zeros(0, dtype=np.complex128)
    out = np.zeros(na + nb_ - 1, dtype=np.complex128)
    for i in range(na):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(nb_):
            out[i + j] += ai * b[j]
    return out


@_njit
def _nb_ps_mul(a, b, n):
    out = np.zeros(n, dtype=np.complex128)
    na = min(a.shape[0], n)
    for i in range(na):
        ai = a[i]
        if ai == 0:
            continue
        top = min(b.shape[0], n - i)
        for j in range(top):
            out[i + j] += ai * b[j]
    return out


@_njit
def _nb_ps_inv(a, n):
    out = np.zeros(n, dtype=np.complex128)
    inv0 = 1.0 / a[0]
    out[0] = inv0
    na = a.shape[0]
    for k in range(1, n):
        s = 0j
        for j in range(1, min(k, na - 1) + 1):
            s += a[j] * out[k - j]
        out[k] = -s * inv0
    return out


@_njit
def _nb_ps_powint(a, k, n):
    result = np.zeros(n, dtype=np.complex128)
    result[0] = 1.0
    base = np.zeros(n, dtype=np.complex128)
    m = min(a.shape[0], n)
    base[:m] = a[:m]
    e = k
    while e > 0:
        if e & 1:
            result = _nb_ps_mul(result, base, n)
        e >>= 1
        if e > 0:
            base = _nb_ps_mul(base, base, n)
    return result


@_njit
def _nb_ps_root(a, q, n):
    # Newton on g**q = a with a[0] = 1, doubling the correct order each pass.
    g = np.zeros(n, dtype=np.complex128)
    g[0] = 1.0
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        gq1 = _nb_ps_powint(g[:prec], q - 1, prec)
        gq = _nb_ps_mul(gq1, g[:prec], prec)
        res = np.zeros(prec, dtype=np.complex128)
        for i in range(prec):
            res[i] = gq[i] - (a[i] if i < a.shape[0] else 0.0)
        den = _nb_ps_inv(gq1 * q, prec)
        delta = _nb_ps_mul(res, den, prec)
        for i in range(prec):
            g[i] -= delta[i]
    return g


@_njit
def _nb_ps_revert(f, n):
    # Lagrange inversion: [r^k] G = (1/k) [s^(k-1)] (s/F)^k, F = f[1] s + f[2] s^2 + ...
    h = np.zeros(n, dtype=np.complex128)
    for i in range(min(f.shape[0] - 1, n)):
        h[i] = f[i + 1]
    inv = _nb_ps_inv(h, n)
    out = np.zeros(n + 1, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    p[0] = 1.0
    for k in range(1, n + 1):
        p = _nb_ps_mul(p, inv, n)
        out[k] = p[k - 1] / k
    return out


@_njit
def _nb_laurent_newton(t, lo, targets, x0, tol, maxit):
    # Solve sum_i t[i] x**(lo+i) = target pointwise.
    npts = targets.shape[0]
    x = x0.copy()
    worst = 0.0
    nt = t.shape[0]
    for j in range(npts):
        xj = x[j]
        for _ in range(maxit):
            val = 0j
            der = 0j
            p = xj ** lo
            for i in range(nt):
                e = lo + i
                val += t[i] * p
                if e != 0:
                    der += e * t[i] * p / xj
                p = p * xj
            r = val - targets[j]
            step = r / der
            xj = xj - step
            if abs(step) <= tol * max(1.0, abs(xj)):
                break
        val = 0j
        p = xj ** lo
        for i in range(nt):
            val += t[i] * p
            p = p * xj
        err = abs(val - targets[j])
        if err > worst:
            worst = err
        x[j] = xj
    return x, worst


@_njit
def _nb_conv_rows(A, B):
    rows = A.shape[0]
    out = np.zeros((rows, A.shape[1] + B.shape[1] - 1), dtype=np.complex128)
    for r in range(rows):
        out[r] = _nb_conv(A[r], B[r])
    return out


# ---------------------------------------------------------------- numpy path


def _np_conv(a, b):
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    return np.convolve(a, b)


def _np_ps_mul(a, b, n):
    out = np.zeros(n, dtype=np.complex128)
    c = np.convolve(a[:n], b[:n])[:n]
    out[: c.shape[0]] = c
    return out


def _np_ps_inv(a, n):
    # Newton doubling: b <- b (2 - a b)
    b = np.array([1.0 / a[0]], dtype=np.complex128)
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        ab = _np_ps_mul(a, b, prec)
        corr = -ab
        corr[0] += 2.0
        b = _np_ps_mul(b, corr, prec)
    out = np.zeros(n, dtype=np.complex128)
    out[: b.shape[0]] = b[:n]
    return out


def _np_ps_powint(a, k, n):
    result = np.zeros(n, dtype=np.complex128)
    result[0] = 1.0
    base = np.zeros(n, dtype=np.complex128)
    m = min(a.shape[0], n)
    base[:m] = a[:m]
    e = k
    while e > 0:
        if e & 1:
            result = _np_ps_mul(result, base, n)
        e >>= 1
        if e > 0:
            base = _np_ps_mul(base, base, n)
    return result


def _np_ps_root(a, q, n):
    g = np.zeros(n, dtype=np.complex128)
    g[0] = 1.0
    av = np.zeros(n, dtype=np.complex128)
    m = min(a.shape[0], n)
    av[:m] = a[:m]
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        gq1 = _np_ps_powint(g[:prec], q - 1, prec)
        gq = _np_ps_mul(gq1, g[:prec], prec)
        delta = _np_ps_mul(gq - av[:prec], _np_ps_inv(q * gq1, prec), prec)
        g[:prec] -= delta
    return g


def _np_ps_revert(f, n):
    h = np.zeros(n, dtype=np.complex128)
    m = min(f.shape[0] - 1, n)
    h[:m] = f[1 : m + 1]
    inv = _np_ps_inv(h, n)
    out = np.zeros(n + 1, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    p[0] = 1.0
    for k in range(1, n + 1):
        p = _np_ps_mul(p, inv, n)
        out[k] = p[k - 1] / k
    return out


def _np_laurent_newton(t, lo, targets, x0, tol, maxit):
    exps = np.arange(lo, lo + t.shape[0])
    x = x0.astype(np.complex128).copy()
    active = np.ones(x.shape[0], dtype=bool)
    for _ in range(maxit):
        if not active.any():
            break
        xa = x[active]
        pw = xa[:, None] ** exps[None, :]
        val = pw @ t
        der = (pw / xa[:, None]) @ (exps * t)
        step = (val - targets[active]) / der
        x[active] = xa - step
        done = np.abs(step) <= tol * np.maximum(1.0, np.abs(x[active]))
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    val = (x[:, None] ** exps[None, :]) @ t
    return x, float(np.max(np.abs(val - targets))) if x.shape[0] else 0.0


def _np_conv_rows(A, B):
    rows = A.shape[0]
    out = np.zeros((rows, A.shape[1] + B.shape[1] - 1), dtype=np.complex128)
    for r in range(rows):
        out[r] = np.convolve(A[r], B[r])
    return out


BACKENDS = {
    "numpy": {
        "conv": _np_conv,
        "ps_mul": _np_ps_mul,
        "ps_inv": _np_ps_inv,
        "ps_powint": _np_ps_powint,
        "ps_root": _np_ps_root,
        "ps_revert": _np_ps_revert,
        "laurent_newton": _np_laurent_newton,
        "conv_rows": _np_conv_rows,
    }
}
if HAVE_NUMBA:
    BACKENDS["numba"] = {
        "conv": _nb_conv,
        "ps_mul": _nb_ps_mul,
        "ps_inv": _nb_ps_inv,
        "ps_powint": _nb_ps_powint,
        "ps_root": _nb_ps_root,
        "ps_revert": _nb_ps_revert,
        "laurent_newton": _nb_laurent_newton,
        "conv_rows": _nb_conv_rows,
    }

BACKEND = "numba" if USE_NUMBA else "numpy"
_active = BACKENDS[BACKEND]


def _c(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


def conv(a, b):
    """Full linear convolution of two coefficient arrays."""
    return _active["conv"](_c(a), _c(b))


def ps_mul(a, b, n):
    """First ``n`` coefficients of the product of two power series."""
    return _active["ps_mul"](_c(a), _c(b), int(n))


def ps_inv(a, n):
    """First ``n`` coefficients of ``1/a``; requires ``a[0] != 0``."""
    return _active["ps_inv"](_c(a), int(n))


def ps_powint(a, k, n):
    """First ``n`` coefficients of ``a**k`` for an integer ``k >= 0``."""
    return _active["ps_powint"](_c(a), int(k), int(n))


def ps_root(a, q, n):
    """First ``n`` coefficients of ``a**(1/q)`` for ``a[0] == 1``."""
    if q == 1:
        out = np.zeros(n, dtype=np.complex128)
        m = min(len(a), n)
        out[:m] = a[:m]
        return out
    return _active["ps_root"](_c(a), int(q), int(n))


def ps_revert(f, n):
    """Compositional inverse of ``f = f[1] s + f[2] s**2 + ...`` to order ``n``.

    Returns ``n + 1`` coefficients with a zero constant term.
    """
    return _active["ps_revert"](_c(f), int(n))


def laurent_newton(t, lo, targets, x0, tol=1e-15, maxit=60):
    """Pointwise Newton for ``sum_i t[i] x**(lo + i) = targets``.

    Returns the roots and the worst absolute residual.
    """
    x, worst = _active["laurent_newton"](_c(t), int(lo), _c(targets), _c(x0), float(tol), int(maxit))
    return x, float(worst)


def conv_rows(A, B):
    """Row-by-row full convolution of two 2-D coefficient arrays."""
    return _active["conv_rows"](_c(A), _c(B))
