"""Casimir-Polder potentials of (possibly excited) atoms above layer stacks.

The potential splits into a nonresonant part, an imaginary-frequency
integral over the polarizability, and a resonant part made of the atom's
downward (emission) lines evaluated at real frequencies.  Forces come from
the analytic z-derivative of the Green trace under the integral or sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .greens import LayerStack, _real_axis_trace, imag_axis_trace_scaled
from .materials import (C, HBAR, MU0, AtomModel, GainWindow, is_absorbing_at,
                        polarizability_imag, sharp_line_spectrum)
from .numerics import (QuadratureSpec, integrate_semi_infinite, integrate_window,
                       matsubara_sum)

__all__ = [
    "PotentialResult", "cp_nonresonant", "cp_resonant", "cp_resonant_integral",
    "cp_total", "cp_nonresonant_thermal",
]

_NR_PREF = HBAR * MU0 / (2.0 * np.pi)


@dataclass(frozen=True)
class PotentialResult:
    """Potential components (J) and force (N) at height ``z`` (m).

    ``f_z = -dU/dz``; negative means attraction toward the stack.
    """

    z: float
    u_nr: float
    u_r: float
    u_total: float
    f_z: float
    err_nr: float
    err_r: float
    f_nr: float = 0.0
    f_r: float = 0.0


def _check(stack: LayerStack, z: float):
    if not z > 0:
        raise ValueError("z must be > 0")
    stack.check_probe_vacuum()


def _nr_integrand(atom: AtomModel, stack: LayerStack, z: float, quad: QuadratureSpec, log):
    """Vectorized xi-integrand returning columns (dU/dxi, d^2U/dz dxi)."""

    def f(xi):
        v, dv, err = imag_axis_trace_scaled(stack, z, xi, quad)
        a = polarizability_imag(atom, xi)
        log.append((np.max(np.abs(a * err), initial=0.0), np.max(np.abs(a * v), initial=0.0)))
        return np.stack([_NR_PREF * a * v, _NR_PREF * a * dv], axis=-1)

    return f


def _green_rel(log):
    """Relative size of the inner Green-trace errors, weighted by the integrand."""
    if not log:
        return 0.0
    num = max(l[0] for l in log)
    den = max(l[1] for l in log)
    return float(num / den) if den > 0 else 0.0


def _xi_points(atom: AtomModel, z: float):
    return sorted({0.5 * C / z, *(abs(t.omega_kn) for t in atom.transitions)})


def _nonresonant(atom, stack, z, quad):
    """(U_nr, dU_nr/dz, err) at T = 0."""
    _check(stack, z)
    if stack.is_trivial or not atom.transitions:
        return 0.0, 0.0, 0.0
    log = []
    f = _nr_integrand(atom, stack, z, quad, log)
    pts = _xi_points(atom, z)
    res = integrate_semi_infinite(f, quad, scale=pts[-1], points=pts)
    u, du = (float(x) for x in res.value)
    err = float(res.err[0]) + _green_rel(log) * abs(u)
    return u, du, err


def cp_nonresonant(atom: AtomModel, stack: LayerStack, z: float,
                   quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Nonresonant (imaginary-frequency) potential ``(u_nr, err)`` in joules.

    ``U = (hbar mu0 / 2 pi) int_0^inf dxi xi^2 alpha(i xi) Tr G1(z, z, i xi)``
    """
    u, _, err = _nonresonant(atom, stack, z, quad or QuadratureSpec())
    return u, err


def cp_nonresonant_thermal(atom: AtomModel, stack: LayerStack, z: float, T: float,
                           quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Nonresonant potential with the frequency integral replaced by a
    Matsubara sum at temperature ``T`` (K).  ``T = 0`` gives
    :func:`cp_nonresonant`.  Only the nonresonant part is thermalised.
    """
    u, _, err = _nonresonant_thermal(atom, stack, z, T, quad or QuadratureSpec())
    return u, err


def _nonresonant_thermal(atom, stack, z, T, quad):
    if T == 0:
        return _nonresonant(atom, stack, z, quad)
    _check(stack, z)
    if stack.is_trivial or not atom.transitions:
        return 0.0, 0.0, 0.0
    log = []
    f = _nr_integrand(atom, stack, z, quad, log)
    res = matsubara_sum(f, T, quad)
    u, du = (float(x) for x in res.value)
    return u, du, float(res.err[0]) + _green_rel(log) * abs(u)


def _resonant(atom, stack, z, quad):
    """(U_r, dU_r/dz, err) from the sharp emission lines."""
    _check(stack, z)
    lines = sharp_line_spectrum(atom)
    if not lines or stack.is_trivial:
        return 0.0, 0.0, 0.0
    w = np.array([l[0] for l in lines])
    weight = np.array([l[1] for l in lines])
    for m in stack.media:
        if not is_absorbing_at(m, w):
            raise ValueError("resonant potential needs a stack that is purely "
                             "absorbing at the atomic emission frequencies")
    v, dv, err = _real_axis_trace(stack, z, w, quad)
    pref = -HBAR * MU0 / np.pi * w**2 * weight
    return (float(np.sum(pref * v.real)), float(np.sum(pref * dv.real)),
            float(np.sum(np.abs(pref) * err)))


def cp_resonant(atom: AtomModel, stack: LayerStack, z: float,
                quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Resonant potential ``(u_r, err)`` as a discrete sum over emission lines:
    ``U = -(mu0/3) sum omega_nk^2 |d_nk|^2 Re Tr G1(z, z, omega_nk)``.
    """
    u, _, err = _resonant(atom, stack, z, quad or QuadratureSpec())
    return u, err


def _tabulated(im_alpha):
    if callable(im_alpha):
        return im_alpha
    w, a = (np.asarray(x, dtype=float) for x in im_alpha)
    return lambda x: np.interp(x, w, a, left=0.0, right=0.0)


def _resonant_integral(im_alpha, window, stack, z, quad, points=()):
    _check(stack, z)
    fa = _tabulated(im_alpha)
    lo, hi = (window.lo, window.hi) if isinstance(window, GainWindow) else window
    if stack.is_trivial:
        return 0.0, 0.0, 0.0
    for m in stack.media:
        if not is_absorbing_at(m, np.linspace(lo, hi, 64)):
            raise ValueError("stack must be purely absorbing inside the window")
    log = []

    def f(w):
        a = fa(w)
        a = np.where(a <= 0, a, 0.0)  # emission part only
        out = np.zeros((len(w), 2))
        nz = a != 0
        if np.any(nz):
            v, dv, err = _real_axis_trace(stack, z, w[nz], quad)
            log.append((np.max(np.abs(a[nz] * err)), np.max(np.abs(a[nz] * v))))
            pref = HBAR * MU0 / np.pi * w[nz] ** 2 * a[nz]
            out[nz, 0] = pref * v.real
            out[nz, 1] = pref * dv.real
        return out

    res = integrate_window(f, lo, hi, quad, points=points)
    u, du = (float(x) for x in res.value)
    return u, du, float(res.err[0]) + _green_rel(log) * abs(u)


def cp_resonant_integral(im_alpha, window, stack: LayerStack, z: float,
                         quad: QuadratureSpec | None = None, *,
                         points=()) -> tuple[float, float]:
    """Resonant potential from a finite-linewidth ``Im alpha(omega)``.

    ``U = (hbar mu0 / pi) int domega omega^2 Theta(-Im alpha) Im alpha Re Tr G1``
    over ``window`` (a ``(lo, hi)`` pair or :class:`GainWindow`).
    ``im_alpha`` is a vectorized callable or a table ``(omega, im_alpha)``
    that is linearly interpolated.  ``points`` are breakpoints such as line
    centres.  Converges to :func:`cp_resonant` as the linewidth shrinks.
    """
    u, _, err = _resonant_integral(im_alpha, window, stack, z, quad or QuadratureSpec(), points)
    return u, err


def cp_total(atom: AtomModel, stack: LayerStack, z: float,
             quad: QuadratureSpec | None = None, *, T: float = 0.0) -> PotentialResult:
    """Both potential components and the force on the atom at height ``z``.

    A temperature ``T > 0`` (K) affects the nonresonant part only.
    """
    quad = quad or QuadratureSpec()
    u_nr, du_nr, e_nr = _nonresonant_thermal(atom, stack, z, T, quad)
    u_r, du_r, e_r = _resonant(atom, stack, z, quad)
    return PotentialResult(z=z, u_nr=u_nr, u_r=u_r, u_total=u_nr + u_r,
                           f_z=-(du_nr + du_r), err_nr=e_nr, err_r=e_r,
                           f_nr=-du_nr, f_r=-du_r)
