"""Azzalini skew-t distribution.

Density of the standardized variable ``z = (x - location) / scale``::

    f(z) = 2 t_nu(z) T_{nu+1}(shape * z * sqrt((nu + 1) / (nu + z**2)))

where ``t_nu`` / ``T_nu`` are the Student-t density and CDF. ``shape=0``
gives a location-scale Student-t.

There are two evaluation routes. The public :func:`skewt_cdf` integrates
the density adaptively (``scipy.integrate.quad``) and
:func:`skewt_quantile` brackets and bisects on it; they are slow but
straightforward. :class:`StandardSkewT` tabulates the CDF once per
``(shape, dof)`` with composite Gauss-Legendre panels over a graded
coordinate on ``(-1, 1)`` that maps onto ``z = tan(theta)``, and inverts it
with safeguarded Newton steps; the quantile fitter and the CRPS integrator
use it. The test-suite checks that the two routes agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from ..errors import NumericalFailure

DOF_CAP = 100.0


@dataclass(frozen=True)
class SkewTParams:
    location: float
    scale: float
    shape: float
    dof: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not self.dof > 1:
            raise ValueError(f"dof must exceed 1, got {self.dof}")
        for v in (self.location, self.scale, self.shape, self.dof):
            if not math.isfinite(v):
                raise ValueError("skew-t parameters must be finite")


def _log_std_pdf(z, shape: float, dof: float):
    z = np.asarray(z, dtype=float)
    log_t = (
        special.gammaln((dof + 1) / 2)
        - special.gammaln(dof / 2)
        - 0.5 * math.log(dof * math.pi)
        - (dof + 1) / 2 * np.log1p(z * z / dof)
    )
    w = shape * z * np.sqrt((dof + 1) / (dof + z * z))
    with np.errstate(divide="ignore"):
        log_T = np.log(special.stdtr(dof + 1, w))
    return math.log(2.0) + log_t + log_T


def _std_pdf(z, shape: float, dof: float):
    z = np.asarray(z, dtype=float)
    t_pdf = np.exp(
        special.gammaln((dof + 1) / 2)
        - special.gammaln(dof / 2)
        - 0.5 * math.log(dof * math.pi)
        - (dof + 1) / 2 * np.log1p(z * z / dof)
    )
    w = shape * z * np.sqrt((dof + 1) / (dof + z * z))
    return 2.0 * t_pdf * special.stdtr(dof + 1, w)


def skewt_pdf(params: SkewTParams, x):
    z = (np.asarray(x, dtype=float) - params.location) / params.scale
    out = _std_pdf(z, params.shape, params.dof) / params.scale
    return float(out) if out.ndim == 0 else out


def skewt_logpdf(params: SkewTParams, x):
    z = (np.asarray(x, dtype=float) - params.location) / params.scale
    out = _log_std_pdf(z, params.shape, params.dof) - math.log(params.scale)
    return float(out) if out.ndim == 0 else out


_QUAD_KW = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


def _tail_mass(a: float, shape: float, dof: float, upper: bool) -> float:
    """Mass beyond ``a`` (``|a| >= 1``) with ``x = 1/w`` mapping the tail onto a finite interval."""
    g = lambda w: float(_std_pdf(1.0 / w, shape, dof)) / (w * w)  # noqa: E731
    lo, hi = (0.0, 1.0 / a) if upper else (1.0 / a, 0.0)
    val, _ = integrate.quad(g, lo, hi, **_QUAD_KW)
    return val


def _lower_mass(z: float, shape: float, dof: float) -> float:
    f = lambda u: float(_std_pdf(u, shape, dof))  # noqa: E731
    if z <= -1.0:
        return _tail_mass(z, shape, dof, upper=False)
    body, _ = integrate.quad(f, -1.0, z, **_QUAD_KW)
    return _tail_mass(-1.0, shape, dof, upper=False) + body


def _upper_mass(z: float, shape: float, dof: float) -> float:
    f = lambda u: float(_std_pdf(u, shape, dof))  # noqa: E731
    if z >= 1.0:
        return _tail_mass(z, shape, dof, upper=True)
    body, _ = integrate.quad(f, z, 1.0, **_QUAD_KW)
    return _tail_mass(1.0, shape, dof, upper=True) + body


def _std_cdf_quad(z: float, shape: float, dof: float) -> float:
    # integrate the shorter way round so small tail probabilities keep their
    # relative accuracy; the split at zero keeps the peak inside one piece
    if z <= 0:
        val = _lower_mass(z, shape, dof)
    else:
        upper = _upper_mass(z, shape, dof)
        val = 1.0 - upper if upper < 0.5 else _lower_mass(0.0, shape, dof) + (
            integrate.quad(lambda u: float(_std_pdf(u, shape, dof)), 0.0, z, **_QUAD_KW)[0]
        )
    return min(max(val, 0.0), 1.0)


def skewt_cdf(params: SkewTParams, x):
    """CDF by adaptive quadrature of the density."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    z = (xs - params.location) / params.scale
    out = np.array([_std_cdf_quad(zi, params.shape, params.dof) for zi in z])
    return float(out[0]) if np.ndim(x) == 0 else out


def skewt_quantile(params: SkewTParams, p, xtol: float = 1e-10):
    """Inverse CDF by bracket expansion then bisection (Brent) on :func:`skewt_cdf`."""
    ps = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any((ps <= 0) | (ps >= 1)):
        raise ValueError("probability must lie strictly in (0, 1)")
    out = np.empty_like(ps)
    for i, pi in enumerate(ps):
        g = lambda z: _std_cdf_quad(z, params.shape, params.dof) - pi  # noqa: E731
        lo, hi = -1.0, 1.0
        for _ in range(200):
            if g(lo) < 0:
                break
            lo *= 2.0
        else:
            raise NumericalFailure(f"cannot bracket the {pi} quantile from below")
        for _ in range(200):
            if g(hi) > 0:
                break
            hi *= 2.0
        else:
            raise NumericalFailure(f"cannot bracket the {pi} quantile from above")
        z = optimize.brentq(g, lo, hi, xtol=xtol / params.scale, rtol=4 * np.finfo(float).eps, maxiter=500)
        out[i] = params.location + params.scale * z
    return float(out[0]) if np.ndim(p) == 0 else out


# -- tabulated route -------------------------------------------------------

_N_PANELS = 48
_N_NODES = 10
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_N_NODES)
# theta = pi/2 * h(u) with h(u) = sign(u) * (1 - (1 - |u|)**_GRADE); the density
# in theta behaves like (pi/2 - |theta|)**(dof - 1) at the ends, which the
# grading turns into (1 - |u|)**(_GRADE * dof - 1) so Gauss-Legendre stays accurate
_GRADE = 3


def _theta_of_u(u):
    a = np.abs(u)
    return 0.5 * np.pi * np.sign(u) * (1.0 - (1.0 - a) ** _GRADE)


def _dtheta_du(u):
    return 0.5 * np.pi * _GRADE * (1.0 - np.abs(u)) ** (_GRADE - 1)


def _u_of_theta(theta):
    t = np.abs(theta) / (0.5 * np.pi)
    return np.sign(theta) * (1.0 - (1.0 - np.minimum(t, 1.0)) ** (1.0 / _GRADE))


def _panel_edges(n: int = _N_PANELS) -> np.ndarray:
    # denser near the centre, where h is steepest
    v = np.linspace(-1.0, 1.0, n + 1)
    return v * (0.5 + 0.5 * v * v)


_EDGES = _panel_edges()


# Legendre interpolation of the density through the nodes of one panel, and
# its antiderivative from the panel's left end, in power form on s in [-1, 1]
_INTERP = np.linalg.inv(np.polynomial.legendre.legvander(_GL_X, _N_NODES - 1))
_ANTIDERIV = np.array([
    np.pad(P := np.polynomial.legendre.leg2poly(np.polynomial.legendre.legint(row, lbnd=-1)),
           (0, _N_NODES + 1 - len(P)))
    for row in np.eye(_N_NODES)
])  # (_N_NODES, _N_NODES + 1): Legendre coefficient -> antiderivative power coefficients


class StandardSkewT:
    """Tabulated CDF / quantile of the standardized skew-t.

    The CDF is integrated over ``u`` in ``(-1, 1)``, with ``z = tan(theta(u))``
    mapping onto the real line; heavy tails stay finite and smooth. Inside a
    panel the CDF is the antiderivative of the polynomial interpolating the
    density at the quadrature nodes, which reproduces the panel integral
    exactly and makes inversion cheap.
    """

    def __init__(self, shape: float, dof: float):
        self.shape = float(shape)
        self.dof = float(dof)
        self._logc = (
            math.log(2.0) + special.gammaln((dof + 1) / 2) - special.gammaln(dof / 2)
            - 0.5 * math.log(dof * math.pi)
        )
        a, b = _EDGES[:-1], _EDGES[1:]
        self._half = 0.5 * (b - a)
        nodes = (0.5 * (a + b))[:, None] + self._half[:, None] * _GL_X[None, :]
        g = self._g(nodes)
        panel = (g * _GL_W[None, :]).sum(axis=1) * self._half
        self.cum = np.concatenate([[0.0], np.cumsum(panel)])
        self.total = float(self.cum[-1])
        if not (abs(self.total - 1.0) < 1e-8):
            raise NumericalFailure(
                f"skew-t tabulation lost mass (total={self.total!r}) at shape={shape}, dof={dof}"
            )
        # power coefficients (ascending) of the in-panel CDF increment, already
        # multiplied by the half width, and of its derivative in s
        self._poly = (g @ _INTERP.T @ _ANTIDERIV) * self._half[:, None]
        self._dpoly = self._poly[:, 1:] * np.arange(1, _N_NODES + 1)

    def _g(self, u):
        # density in u: f(tan theta) / cos(theta)**2 * dtheta/du
        theta = _theta_of_u(u)
        z = np.tan(theta)
        nu = self.dof
        t_part = np.exp(self._logc - 0.5 * (nu + 1) * np.log1p(z * z / nu))
        skew = special.stdtr(nu + 1, self.shape * z * np.sqrt((nu + 1) / (nu + z * z)))
        return t_part * skew * (1.0 + z * z) * _dtheta_du(u)

    def pdf(self, z):
        return _std_pdf(z, self.shape, self.dof)

    def cdf_u(self, u):
        u = np.asarray(u, dtype=float)
        k = np.clip(np.searchsorted(_EDGES, u, side="right") - 1, 0, _N_PANELS - 1)
        s = (u - _EDGES[k]) / self._half[k] - 1.0
        coef = self._poly[k]
        acc = coef[..., -1]
        for j in range(_N_NODES - 1, -1, -1):
            acc = acc * s + coef[..., j]
        return np.clip(self.cum[k] + acc, 0.0, 1.0)

    def cdf(self, z):
        return self.cdf_u(_u_of_theta(np.arctan(np.asarray(z, dtype=float))))

    def _invert(self, p: float) -> float:
        if p <= 0.0:
            return -1.0
        if p >= self.total:
            return 1.0
        k = min(max(int(np.searchsorted(self.cum, p, side="left")) - 1, 0), _N_PANELS - 1)
        target = p - self.cum[k]
        c = self._poly[k].tolist()
        d = self._dpoly[k].tolist()
        lo, hi = -1.0, 1.0
        width = self.cum[k + 1] - self.cum[k]
        s = -1.0 + 2.0 * target / width if width > 0 else 0.0
        # Newton on the panel polynomial, bisecting whenever a step leaves the bracket
        for _ in range(60):
            f = 0.0
            for cj in reversed(c):
                f = f * s + cj
            f -= target
            if f == 0.0:
                break
            if f < 0:
                lo = s
            else:
                hi = s
            df = 0.0
            for dj in reversed(d):
                df = df * s + dj
            new = s - f / df if df > 0 else 0.5 * (lo + hi)
            if not lo <= new <= hi:
                new = 0.5 * (lo + hi)
            if abs(new - s) <= 1e-15:
                s = new
                break
            s = new
        return _EDGES[k] + (s + 1.0) * self._half[k]

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        u = np.array([self._invert(float(pi)) for pi in p.ravel()]).reshape(p.shape)
        return np.tan(_theta_of_u(u))


@lru_cache(maxsize=8192)
def standard(shape: float, dof: float) -> StandardSkewT:
    return StandardSkewT(shape, dof)


def fast_cdf(params: SkewTParams, x):
    z = (np.asarray(x, dtype=float) - params.location) / params.scale
    return standard(params.shape, params.dof).cdf(z)


def fast_quantile(params: SkewTParams, p):
    return params.location + params.scale * standard(params.shape, params.dof).quantile(p)


def skewt_mean(params: SkewTParams) -> float:
    """Closed-form mean (needs dof > 1)."""
    nu = params.dof
    delta = params.shape / math.sqrt(1 + params.shape**2)
    b = math.sqrt(nu / math.pi) * math.exp(special.gammaln((nu - 1) / 2) - special.gammaln(nu / 2))
    return params.location + params.scale * delta * b
