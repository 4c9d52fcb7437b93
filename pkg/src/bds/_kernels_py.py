"""Pure numpy implementation of the hot kernels.

The compiled twin in ``_ckernels.pyx`` follows this module line for line;
:mod:`bds.kernels` picks one at import time.

Densities are evaluated with Loader's saddle-point form (Stirling error
terms plus the deviance ``bd0``) instead of log-Gamma differences, which
lose about ``1e-16 * k`` absolute accuracy in the exponent for large ``k``.
"""

import numpy as np
from scipy.special import gammaln

LN_2PI = 1.8378770664093454835606594728112

# Offsets, in standard deviations of the Beta density, of the panel edges
# around its mean; clipped to [0, 1] per density.
Z_TEMPLATE = np.array(
    [-1024.0, -256.0, -64.0, -32.0, -16.0, -12.0, -8.0, -6.0, -4.0, -3.0, -2.0, -1.0,
     0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 32.0, 64.0, 256.0, 1024.0]
)
# Edges at ybar * GRADING**-j and 1 - (1 - ybar) * GRADING**-j resolve
# algebraic endpoint behaviour of densities with non-integer exponents.
GRADING = 4.0
GRADED_LEVELS = 10
GL_ORDER = 8
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)

_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0


def stirlerr(m):
    """``log Gamma(m+1) - (m+1/2) log m + m - log(2 pi)/2`` for ``m > 0``."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    small = m <= 15.0
    ms = m[small]
    out[small] = gammaln(ms + 1.0) - (ms + 0.5) * np.log(ms) + ms - 0.5 * LN_2PI
    ml = m[~small]
    m2 = ml * ml
    out[~small] = (_S0 - (_S1 - (_S2 - (_S3 - _S4 / m2) / m2) / m2) / m2) / ml
    return out


def bd0(x, mu):
    """Deviance term ``x log(x/mu) + mu - x`` without cancellation."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    x, mu = np.broadcast_arrays(x, mu)
    out = np.empty(x.shape)
    d = x - mu
    near = np.abs(d) < 0.1 * (x + mu)
    xn, dn = x[near], d[near]
    v = dn / (x[near] + mu[near])
    s = dn * v
    ej = 2.0 * xn * v
    v2 = v * v
    for j in range(1, 9):
        ej = ej * v2
        s = s + ej / (2 * j + 1)
    out[near] = s
    xf, mf = x[~near], mu[~near]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~near] = xf * np.log(xf / mf) + mf - xf
    return out


def log_dbinom_raw(x, n, p, q):
    """Log of ``Gamma(n+1)/(Gamma(x+1)Gamma(n-x+1)) p**x q**(n-x)``.

    Real (non-integer) ``x`` and ``n`` are allowed; ``q`` is passed
    separately so that ``1 - p`` never has to be formed.
    """
    x, n, p, q = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, n, p, q)))
    out = np.empty(x.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = x == 0
        hi = (x == n) & ~lo
        out[lo] = np.where(n[lo] == 0, 0.0, n[lo] * np.log(q[lo]))
        out[hi] = n[hi] * np.log(p[hi])
        mid = ~(lo | hi)
        xm, nm, pm, qm = x[mid], n[mid], p[mid], q[mid]
        lc = (stirlerr(nm) - stirlerr(xm) - stirlerr(nm - xm)
              - bd0(xm, nm * pm) - bd0(nm - xm, nm * qm))
        lf = LN_2PI + np.log(xm) + np.log1p(-xm / nm)
        out[mid] = lc - 0.5 * lf
    return out


def log_nb_terms(c, gx, kmin, kmax):
    """``log p_k`` for ``k = kmin..kmax`` with ``p_k = C(c+k-1, k) gx**k / (1+gx)**(c+k)``."""
    k = np.arange(kmin, kmax + 1, dtype=float)
    out = np.empty(k.shape)
    zero = k == 0
    out[zero] = -c * np.log1p(gx)
    kk = k[~zero]
    prob = 1.0 / (1.0 + gx)
    qprob = gx / (1.0 + gx)
    out[~zero] = np.log(c / (c + kk)) + log_dbinom_raw(c, c + kk, prob, qprob)
    return out


def log_beta_density(u, v, a, b):
    """Log of the Beta(a, b) density at ``u`` with ``v = 1 - u`` supplied."""
    s = a + b
    return np.log(s - 1.0) + log_dbinom_raw(a - 1.0, s - 2.0, u, v)


def _beta_log_constants(a, b):
    """Per-density constant part of :func:`log_beta_density` for ``a, b > 1``."""
    x = a - 1.0
    n = b + x - 1.0
    return (np.log(n + 1.0) + stirlerr(n) - stirlerr(x) - stirlerr(n - x)
            - 0.5 * (LN_2PI + np.log(x) + np.log1p(-x / n)))


def beta_rule(ks, c, gamma, level):
    """Composite Gauss-Legendre nodes for ``int_0^inf b_{k}(t) g(t) dt``.

    Under ``u = gamma t / (1 + gamma t)`` the weight ``b_{n,k,gamma}(t) dt``
    is the Beta(k, c+1) density. Panels are laid out around its mean in
    units of its standard deviation (:data:`Z_TEMPLATE`), graded
    geometrically towards 0 and 1 in the tails, and each panel is split
    into ``2**level`` equal pieces.

    Nodes are stored in whichever of ``u`` and ``1 - u`` has its mean below
    one half, so that panel widths and node positions carry full relative
    precision where the density lives.

    Returns flat arrays ``(t, w, owner)``: quadrature nodes in ``t``,
    weights that already include the density, and the index into ``ks``
    that each node belongs to. Zero-width panels produce no nodes.
    """
    ks = np.asarray(ks, dtype=float)
    nk = ks.shape[0]
    a = ks
    b = np.full(nk, c + 1.0)
    flip = a > b
    a1 = np.where(flip, b, a)
    b1 = np.where(flip, a, b)
    s = a1 + b1
    ybar = a1 / s
    sd = np.sqrt(a1 * b1 / (s * s * (s + 1.0)))

    nz = Z_TEMPLATE.size
    ye = np.empty((nk, nz + 2 * GRADED_LEVELS + 2))
    ye[:, 0] = 0.0
    ye[:, -1] = 1.0
    ye[:, 1:nz + 1] = np.clip(ybar[:, None] + sd[:, None] * Z_TEMPLATE, 0.0, 1.0)
    scale = GRADING ** -np.arange(1, GRADED_LEVELS + 1)
    lo = ybar[:, None] * scale
    hi = 1.0 - (1.0 - ybar)[:, None] * scale
    # grading only towards an endpoint with a non-integer exponent
    lo[a1 == np.floor(a1)] = 0.0
    hi[b1 == np.floor(b1)] = 1.0
    ye[:, nz + 1:nz + 1 + GRADED_LEVELS] = lo
    ye[:, nz + 1 + GRADED_LEVELS:-1] = hi
    ye.sort(axis=1)
    h = ye[:, 1:] - ye[:, :-1]
    active = h > 0.0
    owner = np.nonzero(active)[0]
    y_lo = ye[:, :-1][active]
    yc_hi = 1.0 - ye[:, 1:][active]
    h = h[active]

    nsub = 1 << level
    frac = ((np.arange(nsub)[:, None] + 0.5 * (GL_NODES[None, :] + 1.0)) / nsub).ravel()
    gw = np.tile(0.5 * GL_WEIGHTS, nsub) / nsub
    y = y_lo[:, None] + h[:, None] * frac[None, :]
    yc = yc_hi[:, None] + h[:, None] * (1.0 - frac)[None, :]

    # log density: constant per k plus two deviance terms per node
    x1 = a1 - 1.0
    n1 = s - 2.0
    x1o = x1[owner][:, None]
    n1o = n1[owner][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        const = np.where(x1 > 0.0, _beta_log_constants(np.maximum(a1, 1.5), b1), np.log(b1))
        dev = np.where(
            x1o > 0.0,
            bd0(x1o, n1o * y) + bd0(n1o - x1o, n1o * yc),
            -n1o * np.log(yc),
        )
    logd = const[owner][:, None] - dev
    w = (h[:, None] * gw[None, :]) * np.exp(logd)
    fl = flip[owner][:, None]
    t = np.where(fl, yc / y, y / yc) / gamma
    owner = np.broadcast_to(owner[:, None], y.shape)
    return t.ravel(), w.ravel(), owner.ravel().astype(np.intp)
