"""Scattering Green tensor of planar multilayers at coincident points.

Only the trace ``Tr G1(r, r, omega)`` and its derivative with respect to the
height ``z`` above the top interface are computed; those are all the
dispersion-force formulas need.  The bulk (free-space) part is never formed.

The k-integral uses the standard s/p decomposition

    Tr G1 = (i/8pi) int_0^inf dk k/kz exp(2i kz z) [2 r_s + 2 r_p (k^2 - kz^2)/k0^2]

with ``kz = sqrt(k0^2 - k^2)``, ``Im kz >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .materials import C, VACUUM, PerfectMirror, PermittivityModel
from .numerics import (DivergenceError, QuadratureError, QuadratureSpec,
                       integrate_semi_infinite, integrate_window)

__all__ = [
    "Layer", "LayerStack", "GreenTrace", "GainStackError", "GreenDivergenceError",
    "fresnel_reflection", "green_trace", "green_trace_imag_axis",
]


class GainStackError(ValueError):
    """Amplifying layer at a real frequency without ``allow_gain``."""


class GreenDivergenceError(DivergenceError):
    """The k-integral did not converge; the Green tensor may not exist."""


@dataclass(frozen=True)
class Layer:
    material: PermittivityModel
    thickness: float

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValueError("layer thickness must be > 0")


@dataclass(frozen=True)
class LayerStack:
    """Planar geometry ``below | layers | above``.

    ``layers`` are listed bottom to top, i.e. ``layers[0]`` rests on
    ``below`` and ``layers[-1]`` touches the probe region ``above``.  The
    probe height ``z`` is measured from the top interface.  ``below`` may be
    :data:`~casimir_gain.materials.PERFECT_MIRROR`.
    """

    below: object
    layers: tuple[Layer, ...] = ()
    above: object = VACUUM
    allow_gain: bool = False

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if isinstance(self.above, PerfectMirror) or any(
                isinstance(l.material, PerfectMirror) for l in self.layers):
            raise ValueError("a perfect mirror can only be the bottom half space")

    @classmethod
    def half_space(cls, material, **kw) -> "LayerStack":
        return cls(below=material, **kw)

    @property
    def media(self):
        """Materials from the probe region downward."""
        return [self.above, *[l.material for l in reversed(self.layers)], self.below]

    @property
    def thicknesses(self):
        return [None, *[l.thickness for l in reversed(self.layers)], None]

    @property
    def is_trivial(self) -> bool:
        """Every region is vacuum, so nothing reflects."""
        return all(getattr(m, "is_vacuum", False) for m in self.media)

    @property
    def has_gain(self) -> bool:
        return any(getattr(m, "has_gain", False) for m in self.media)

    def check_probe_vacuum(self):
        if not getattr(self.above, "is_vacuum", False):
            raise ValueError("the probe region above the stack must be vacuum")

    def check_gain(self, omega):
        """Refuse real frequencies where some layer amplifies."""
        if self.allow_gain:
            return
        w = np.abs(np.asarray(omega, dtype=complex).real)
        w = w[w > 0]
        if w.size == 0:
            return
        for m in self.media:
            if isinstance(m, PerfectMirror):
                continue
            if np.any(np.imag(m.epsilon(w + 0j)) < 0):
                raise GainStackError(
                    "stack contains an amplifying medium at the requested "
                    "frequency; pass allow_gain=True to evaluate anyway")


@dataclass(frozen=True)
class GreenTrace:
    """``Tr G1`` (1/m), its z-derivative (1/m^2) and a quadrature error."""

    value: complex | np.ndarray
    dvalue_dz: complex | np.ndarray
    err: float | np.ndarray
    omega: complex | np.ndarray
    amplifying: bool = False


def _kz(eps, k0sq, k2):
    kz = np.sqrt(eps * k0sq - k2 + 0j)
    return np.where(kz.imag < 0, -kz, kz)


def _reflect(stack: LayerStack, omega, k2, kz_top=None):
    """Generalised (r_s, r_p) seen from the probe region.

    ``omega`` and ``k2`` (squared transverse wavenumber) broadcast against
    each other.  Stable recursion: every phase factor has modulus <= 1.
    """
    omega = np.asarray(omega, dtype=complex)
    k2 = np.asarray(k2)
    k0sq = (omega / C) ** 2
    media = stack.media
    thick = stack.thicknesses
    shape = np.broadcast(omega, k2).shape
    mirror = isinstance(media[-1], PerfectMirror)
    n = len(media)
    chi = [None if isinstance(m, PerfectMirror) else np.asarray(m.susceptibility(omega))
           for m in media]
    eps = [None if c is None else 1.0 + c for c in chi]
    kz = [None if e is None else _kz(e, k0sq, k2) for e in eps]
    if kz_top is not None:
        kz[0] = np.broadcast_to(kz_top, shape).astype(complex)

    def iface(i, j):
        # written in terms of chi_j - chi_i so that weakly contrasting media
        # (dilute gases) keep full relative precision
        dchi = chi[j] - chi[i]
        ksum = kz[i] + kz[j]
        rs = -dchi * k0sq / (ksum * ksum)
        rp = dchi * (kz[i] * kz[j] - k2) / (ksum * (eps[j] * kz[i] + eps[i] * kz[j]))
        return rs, rp

    if mirror:
        Rs = np.full(shape, -1.0 + 0j)
        Rp = np.full(shape, 1.0 + 0j)
    else:
        Rs, Rp = iface(n - 2, n - 1)
    for j in range(n - 3, -1, -1):
        rs, rp = iface(j, j + 1)
        ph = np.exp(2j * kz[j + 1] * thick[j + 1])
        Rs = (rs + Rs * ph) / (1.0 + rs * Rs * ph)
        Rp = (rp + Rp * ph) / (1.0 + rp * Rp * ph)
    return np.broadcast_to(Rs, shape), np.broadcast_to(Rp, shape)


def fresnel_reflection(stack: LayerStack, polarization: str, omega, kpar):
    """Multilayer reflection coefficient for ``s`` or ``p`` polarization.

    Reduces to the two-media Fresnel formula for a bare interface.  At real
    frequencies an amplifying stack may give ``|r| > 1``.
    """
    if polarization not in ("s", "p"):
        raise ValueError("polarization must be 's' or 'p'")
    stack.check_gain(omega)
    kpar = np.asarray(kpar, dtype=float)
    rs, rp = _reflect(stack, omega, kpar * kpar)
    out = rs if polarization == "s" else rp
    return out if out.ndim else out[()]


def _inner_spec(quad: QuadratureSpec) -> QuadratureSpec:
    return QuadratureSpec(quad.rel_tol * 0.1, quad.abs_tol, quad.max_subdivisions,
                          quad.tail_mapping)


def _integrate(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except QuadratureError as exc:
        raise GreenDivergenceError(
            f"Green-tensor k-integral did not converge: {exc}",
            value=exc.value, err=exc.err, evaluations=exc.evaluations) from exc


def imag_axis_trace_scaled(stack: LayerStack, z: float, xi, quad: QuadratureSpec,
                           extra_points: Sequence[float] = ()):
    """``xi^2 Tr G1(i xi)`` and its z-derivative, finite down to ``xi = 0``.

    Vectorized over ``xi``.  Integration variable is ``s = kappa - xi/c``
    with ``kappa = sqrt(k^2 + xi^2/c^2)``, so all components share one grid.
    Returns ``(value, dvalue_dz, err)`` as real arrays.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if stack.is_trivial:
        zero = np.zeros_like(xi)
        return zero, zero.copy(), zero.copy()
    q = xi / C
    n = len(xi)

    def f(s):
        S = s[:, None]
        kap = q[None, :] + S
        k2 = S * (S + 2.0 * q[None, :])
        rs, rp = _reflect(stack, 1j * xi[None, :], k2, kz_top=1j * kap)
        rs, rp = rs.real, rp.real
        x2 = (xi * xi)[None, :]
        v = np.exp(-2.0 * S * z) * (x2 * rs - rp * (2.0 * (C * kap) ** 2 - x2)) / (4.0 * np.pi)
        return np.concatenate([v, -2.0 * kap * v], axis=1)

    res = _integrate(integrate_semi_infinite, f, _inner_spec(quad), scale=0.5 / z,
                     points=extra_points)
    damp = np.exp(-2.0 * q * z)
    val = np.asarray(res.value)
    err = np.asarray(res.err)
    return damp * val[:n], damp * val[n:], damp * err[:n]


def _real_axis_trace(stack: LayerStack, z: float, omega, quad: QuadratureSpec,
                     extra_points: Sequence[float] = ()):
    """Tr G1 at real positive frequencies (vectorized); propagating waves in
    ``u = kz/k0 in [0, 1]``, evanescent waves in ``kappa = -i kz``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n = len(omega)
    k0 = omega / C

    def prop(u):
        U = u[:, None]
        kz0 = k0[None, :] * U
        k2 = (k0 * k0)[None, :] * (1.0 - U * U)
        rs, rp = _reflect(stack, omega[None, :], k2, kz_top=kz0 + 0j)
        v = 1j / (8.0 * np.pi) * k0[None, :] * np.exp(2j * kz0 * z) * (
            2.0 * rs + 2.0 * rp * (1.0 - 2.0 * U * U))
        return np.concatenate([v, 2j * kz0 * v], axis=1)

    def evan(kap):
        K = kap[:, None]
        k2 = (k0 * k0)[None, :] + K * K
        rs, rp = _reflect(stack, omega[None, :], k2, kz_top=1j * K + 0j * k2)
        v = np.exp(-2.0 * K * z) / (8.0 * np.pi) * (
            2.0 * rs + 2.0 * rp * (1.0 + 2.0 * K * K / (k0 * k0)[None, :]))
        return np.concatenate([v, -2.0 * K * v], axis=1)

    inner = _inner_spec(quad)
    rp_ = _integrate(integrate_window, prop, 0.0, 1.0, inner,
                     oscillation=2.0 * float(k0.max()) * z)
    re_ = _integrate(integrate_semi_infinite, evan, inner, scale=0.5 / z,
                     points=[*extra_points, *(float(k0.min()) * np.array([0.5, 1.0, 2.0]))])
    val = np.asarray(rp_.value) + np.asarray(re_.value)
    err = np.asarray(rp_.err) + np.asarray(re_.err)
    return val[:n], val[n:], err[:n]


def _general_trace(stack: LayerStack, z: float, omega: complex, quad: QuadratureSpec,
                   extra_points: Sequence[float] = ()):
    """Tr G1 for complex frequency off both axes, integrating along real k."""
    k0 = omega / C
    k0sq = k0 * k0

    def f(k):
        k2 = k * k
        kz0 = _kz(1.0, k0sq, k2)
        rs, rp = _reflect(stack, omega, k2, kz_top=kz0)
        v = 1j / (8.0 * np.pi) * k / kz0 * np.exp(2j * kz0 * z) * (
            2.0 * rs + 2.0 * rp * (k2 - kz0 * kz0) / k0sq)
        return np.stack([v, 2j * kz0 * v], axis=1)

    kr = abs(k0.real)
    pts = [*extra_points, 0.5 * kr, 0.9 * kr, kr, 1.1 * kr, 2.0 * kr]
    res = _integrate(integrate_semi_infinite, f, _inner_spec(quad),
                     scale=max(abs(k0), 0.5 / z), points=[p for p in pts if p > 0])
    val = np.asarray(res.value)
    return val[0], val[1], float(np.max(res.err))


def green_trace(stack: LayerStack, z: float, omega, quad: QuadratureSpec | None = None,
                *, extra_points: Sequence[float] = ()) -> GreenTrace:
    """Coincidence-limit scattering Green tensor trace at height ``z``.

    ``omega`` may be real (array allowed), purely imaginary, or a general
    complex number.  ``extra_points`` adds breakpoints to the k-integral;
    results do not depend on them beyond quadrature accuracy.

    Raises
    ------
    GainStackError
        Amplifying layer at a real frequency and ``stack.allow_gain`` unset.
    GreenDivergenceError
        The k-integral failed to converge.
    """
    quad = quad or QuadratureSpec()
    if not z > 0:
        raise ValueError("z must be > 0")
    w = np.asarray(omega, dtype=complex)
    stack.check_gain(w)
    amplifying = bool(stack.allow_gain and stack.has_gain)
    if stack.is_trivial:
        zero = np.zeros(w.shape, dtype=complex)
        return GreenTrace(zero[()] if zero.ndim == 0 else zero, zero.copy()[()] if zero.ndim == 0
                          else zero.copy(), 0.0, omega, amplifying)
    if np.all((w.real == 0) & (w.imag > 0)):
        g = green_trace_imag_axis(stack, z, w.imag, quad, extra_points=extra_points)
        return GreenTrace(np.asarray(g.value, dtype=complex)[()], np.asarray(
            g.dvalue_dz, dtype=complex)[()], g.err, omega, amplifying)
    if np.all(w.imag == 0):
        if np.any(w.real == 0):
            raise ValueError("omega = 0 is not supported on the real axis")
        sign = np.sign(w.real)
        stack.check_probe_vacuum()
        v, dv, err = _real_axis_trace(stack, z, np.abs(w.real), quad, extra_points)
        # Tr G1(-omega) = conj Tr G1(omega) for real omega
        v = np.where(sign < 0, np.conj(v), v)
        dv = np.where(sign < 0, np.conj(dv), dv)
        if w.ndim == 0:
            return GreenTrace(v[0], dv[0], float(err[0]), omega, amplifying)
        return GreenTrace(v, dv, err, omega, amplifying)
    if w.ndim:
        raise ValueError("complex off-axis frequencies are evaluated one at a time")
    stack.check_probe_vacuum()
    if w.imag < 0:
        v, dv, err = _general_trace(stack, z, -np.conj(complex(w)), quad, extra_points)
        return GreenTrace(np.conj(v), np.conj(dv), err, omega, amplifying)
    v, dv, err = _general_trace(stack, z, complex(w), quad, extra_points)
    return GreenTrace(v, dv, err, omega, amplifying)


def green_trace_imag_axis(stack: LayerStack, z: float, xi, quad: QuadratureSpec | None = None,
                          *, extra_points: Sequence[float] = ()) -> GreenTrace:
    """``Tr G1(r, r, i xi)``; real and damped like ``exp(-2 xi z / c)``.

    ``xi`` may be an array; every value must be positive.
    """
    quad = quad or QuadratureSpec()
    if not z > 0:
        raise ValueError("z must be > 0")
    x = np.asarray(xi, dtype=float)
    if np.any(x <= 0):
        raise ValueError("xi must be > 0")
    stack.check_probe_vacuum()
    v, dv, err = imag_axis_trace_scaled(stack, z, x, quad, extra_points)
    x1 = np.atleast_1d(x)
    v, dv, err = v / x1**2, dv / x1**2, err / x1**2
    if x.ndim == 0:
        return GreenTrace(float(v[0]), float(dv[0]), float(err[0]), 1j * float(x))
    return GreenTrace(v, dv, err, 1j * x)
