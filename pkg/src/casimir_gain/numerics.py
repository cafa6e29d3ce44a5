"""Quadrature and summation engines.

All integrators work on *node-vectorized* integrands: ``f`` receives a 1-D
array of abscissae of shape ``(n,)`` and returns an array of shape ``(n,)``
or ``(n, m)``.  Vector-valued integrands are integrated component-wise with
a per-component tolerance, which is what makes nested Green-tensor integrals
(one inner k-integral per outer frequency node) affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.constants import Boltzmann as KB
from scipy.constants import hbar as HBAR

__all__ = [
    "QuadratureSpec",
    "IntegralResult",
    "QuadratureError",
    "DivergenceError",
    "integrate_semi_infinite",
    "integrate_window",
    "matsubara_frequencies",
    "matsubara_sum",
]


# Gauss-Kronrod 21-point rule; the 10-point Gauss rule uses the odd nodes.
_XK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_XK = np.concatenate([-_XK, _XK[-2::-1]])
_WK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WK = np.concatenate([_WK, _WK[-2::-1]])
_WG = np.zeros(21)
_WG[1::2] = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338, 0.295524224714752870173892994651338,
    0.269266719309996355091226921569469, 0.219086362515982043995534934228163,
    0.149451349150580593145776339657697, 0.066671344308688137593568809893332,
])


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for the adaptive engines.

    ``tail_mapping`` selects how a semi-infinite range is folded onto
    ``[0, 1)``: ``"algebraic"`` uses ``x = s t/(1-t)``, ``"exp"`` uses
    ``x = -s log(1-t)`` (better for purely exponential tails).
    """

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 2000
    tail_mapping: str = "algebraic"

    def __post_init__(self):
        if not (self.rel_tol > 0 or self.abs_tol > 0):
            raise ValueError("need rel_tol > 0 or abs_tol > 0")
        if self.rel_tol < 0 or self.abs_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.tail_mapping not in ("algebraic", "exp"):
            raise ValueError(f"unknown tail_mapping {self.tail_mapping!r}")

    def tightened(self, factor: float) -> "QuadratureSpec":
        """Copy with both tolerances multiplied by ``factor``."""
        return QuadratureSpec(self.rel_tol * factor, self.abs_tol * factor,
                              self.max_subdivisions, self.tail_mapping)


@dataclass(frozen=True)
class IntegralResult:
    value: complex | float | np.ndarray
    err: float | np.ndarray
    evaluations: int


class QuadratureError(RuntimeError):
    """Adaptive budget exhausted; carries the best value and its error."""

    def __init__(self, message, value=None, err=None, evaluations=0):
        super().__init__(message)
        self.value = value
        self.err = err
        self.evaluations = evaluations


class DivergenceError(QuadratureError):
    """Integrand or series does not converge (non-finite or non-decaying)."""


_CANCEL_FLOOR = 1e-3


def _gk_panels(f, a, b):
    """Kronrod value, |K - G| and the Kronrod integral of |f| per panel."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * _XK[None, :]
    y = np.asarray(f(x.ravel()))
    y = y.reshape((len(a), 21) + y.shape[1:])
    h = h.reshape((-1,) + (1,) * (y.ndim - 2))
    k = h * np.einsum("j,pj...->p...", _WK, y)
    g = h * np.einsum("j,pj...->p...", _WG, y)
    kabs = np.abs(h) * np.einsum("j,pj...->p...", _WK, np.abs(y))
    return k, np.abs(k - g), kabs


def _adaptive(f, edges, spec: QuadratureSpec):
    """Global adaptive GK21 over the panels defined by ``edges``.

    Returns ``(value, err, evaluations)``; value has the integrand's trailing
    shape.  Raises :class:`QuadratureError` when the panel budget runs out.
    """
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    val, err, vabs = _gk_panels(f, a, b)
    nev = 21 * len(a)
    while True:
        if not (np.all(np.isfinite(val)) and np.all(np.isfinite(err))):
            raise DivergenceError("integrand produced non-finite values",
                                  value=np.sum(val, axis=0),
                                  err=np.inf, evaluations=nev)
        total = np.sum(val, axis=0)
        total_err = np.sum(err, axis=0)
        # a component that cancels to ~0 is judged against its |f| integral
        scale = np.maximum(np.abs(total), _CANCEL_FLOOR * np.sum(vabs, axis=0))
        tol = np.maximum(spec.abs_tol, spec.rel_tol * scale)
        if np.all(total_err <= tol):
            return total, total_err, nev
        if len(a) >= spec.max_subdivisions:
            raise QuadratureError(
                f"subdivision budget ({spec.max_subdivisions}) exhausted",
                value=total, err=total_err, evaluations=nev)
        # priority of a panel: its worst error measured in units of the
        # component tolerance; zero-tolerance components fall back to err
        safe_tol = np.where(tol > 0, tol, 1.0)
        score = err / safe_tol
        if score.ndim > 1:
            score = score.reshape(len(a), -1).max(axis=1)
        cut = max(0.25 * score.max(), np.partition(score, -min(len(score), 32))[-min(len(score), 32)])
        split = score >= cut
        nsplit = int(split.sum())
        room = spec.max_subdivisions - len(a)
        if nsplit > room:
            order = np.argsort(score)[::-1][:max(room, 1)]
            split = np.zeros_like(split)
            split[order] = True
        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        nval, nerr, nabs = _gk_panels(f, na, nb)
        nev += 21 * len(na)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        vabs = np.concatenate([vabs[keep], nabs])


def _as_result(value, err, nev):
    value = value[()] if np.ndim(value) == 0 else value
    err = float(err) if np.ndim(err) == 0 else err
    return IntegralResult(value, err, nev)


def integrate_window(f: Callable, lo: float, hi: float,
                     spec: QuadratureSpec | None = None, *,
                     points: Sequence[float] = (),
                     oscillation: float = 0.0) -> IntegralResult:
    """Integrate ``f`` over the finite interval ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Node-vectorized integrand.
    lo, hi : float
        Finite limits, ``lo < hi``.
    points : sequence of float, optional
        Interior breakpoints (peaks, kinks).
    oscillation : float, optional
        Angular wavenumber of a known oscillating factor; the interval is
        pre-segmented into half periods ``pi/oscillation``.
    """
    spec = spec or QuadratureSpec()
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise ValueError("integrate_window needs finite lo < hi")
    edges = [lo, hi, *[p for p in points if lo < p < hi]]
    if oscillation > 0:
        n = int(np.ceil((hi - lo) * oscillation / np.pi))
        n = min(n, spec.max_subdivisions // 2)
        if n > 1:
            edges.extend(np.linspace(lo, hi, n + 1)[1:-1])
    edges = np.unique(np.asarray(edges, dtype=float))
    return _as_result(*_adaptive(f, edges, spec))


def integrate_semi_infinite(f: Callable, spec: QuadratureSpec | None = None, *,
                            start: float = 0.0, scale: float = 1.0,
                            points: Sequence[float] = ()) -> IntegralResult:
    """Integrate ``f`` over ``[start, inf)``.

    The range is folded onto ``t in [0, 1)`` with the mapping named by
    ``spec.tail_mapping`` and characteristic length ``scale`` (pick the
    decay length of the integrand).  ``points`` are breakpoints in ``x``.

    Examples
    --------
    >>> r = integrate_semi_infinite(lambda x: np.exp(-x))
    >>> round(float(r.value), 12)
    1.0
    """
    spec = spec or QuadratureSpec()
    if scale <= 0:
        raise ValueError("scale must be positive")
    s = float(scale)
    if spec.tail_mapping == "algebraic":
        def to_x(t):
            return start + s * t / (1.0 - t)

        def jac(t):
            return s / (1.0 - t) ** 2

        def to_t(x):
            u = (x - start) / s
            return u / (1.0 + u)
    else:
        def to_x(t):
            return start - s * np.log1p(-t)

        def jac(t):
            return s / (1.0 - t)

        def to_t(x):
            return -np.expm1(-(x - start) / s)

    def g(t):
        y = np.asarray(f(to_x(t)))
        j = jac(t)
        return y * j.reshape((-1,) + (1,) * (y.ndim - 1))

    tp = [to_t(p) for p in points if p > start]
    edges = np.unique(np.asarray([0.0, 1.0, *[t for t in tp if 0 < t < 1]]))
    return _as_result(*_adaptive(g, edges, spec))


def matsubara_frequencies(T: float, count: int) -> np.ndarray:
    """First ``count`` Matsubara frequencies ``2 pi m kB T / hbar`` (m >= 0)."""
    return 2.0 * np.pi * KB * T / HBAR * np.arange(count)


def matsubara_sum(f: Callable, T: float, spec: QuadratureSpec | None = None, *,
                  scale: float | None = None, points: Sequence[float] = (),
                  block: int = 16, max_terms: int | None = None) -> IntegralResult:
    r"""Finite-temperature replacement of :math:`\int_0^\infty f(\xi)\,d\xi`.

    Returns ``(2 pi kB T / hbar) [f(0)/2 + sum_{m>=1} f(xi_m)]``.  The series
    is cut once a whole block of terms is below ``rel_tol`` times the running
    sum.  At ``T == 0`` the integral itself is returned (``scale`` and
    ``points`` are forwarded to :func:`integrate_semi_infinite`).

    Raises
    ------
    DivergenceError
        If the terms have not decayed after ``max_terms`` terms
        (default ``spec.max_subdivisions``).
    """
    spec = spec or QuadratureSpec()
    if T < 0:
        raise ValueError("temperature must be >= 0")
    if T == 0:
        sc = scale if scale is not None else (max(points) if len(points) else 1.0)
        return integrate_semi_infinite(f, spec, scale=sc, points=points)
    step = 2.0 * np.pi * KB * T / HBAR
    max_terms = max_terms or spec.max_subdivisions
    total = None
    m0 = 0
    while m0 < max_terms:
        m = np.arange(m0, m0 + block)
        terms = np.asarray(f(step * m), dtype=None)
        if m0 == 0:
            terms = terms.copy()
            terms[0] = 0.5 * terms[0]
        if not np.all(np.isfinite(terms)):
            raise DivergenceError("non-finite Matsubara term",
                                  value=None if total is None else step * total,
                                  err=np.inf, evaluations=m0 + block)
        block_sum = terms.sum(axis=0)
        total = block_sum if total is None else total + block_sum
        m0 += block
        # the tail is bounded by the last block when terms decay monotonically
        tail = np.abs(terms).max(axis=0)
        tol = np.maximum(spec.abs_tol / step, spec.rel_tol * np.abs(total))
        if np.all(tail <= tol):
            return _as_result(step * total, step * tail, m0)
    raise DivergenceError(
        f"Matsubara terms not decaying after {m0} terms",
        value=step * total, err=np.inf, evaluations=m0)
