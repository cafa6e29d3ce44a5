"""Casimir forces on dilute amplifying slabs and between half spaces.

Sign convention everywhere: a negative force or pressure pulls the body
toward the stack (attraction).

Forces on a dilute slab are per unit area (N/m^2).  Two independent routes
are provided so the additivity of atomic Casimir-Polder forces can be
checked:

* microscopic: density-weighted sum of single-atom forces over the slab;
* macroscopic: the slab treated as a medium with the linearised
  Clausius-Mossotti susceptibility ``chi = eta alpha / eps0``.  Its
  nonresonant force is the full Lifshitz interaction between the stack and a
  film of permittivity ``1 + chi(i xi)``; its resonant force integrates the
  emission band of ``Im chi`` against ``Re Tr G1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .greens import Layer, LayerStack, _real_axis_trace, _reflect
from .materials import (C, EPS0, HBAR, VACUUM, AtomicGas, AtomModel, DiluteWarning,
                        NearPoleWarning, PermittivityModel, polarizability,
                        sharp_line_spectrum)
from .numerics import (DivergenceError, QuadratureSpec, integrate_semi_infinite,
                       integrate_window, matsubara_sum)
from .potentials import _green_rel, _nonresonant, _resonant

__all__ = [
    "DiluteSlab", "ForceResult", "AdditivityReport", "force_nr_dilute",
    "force_r_dilute", "force_r_dilute_window", "force_total_dilute",
    "slab_panel_forces", "atom_sum_forces", "additivity_check",
    "lifshitz_two_plates", "lifshitz_pressure",
]


@dataclass(frozen=True)
class DiluteSlab:
    """Homogeneous gas slab occupying ``z_lo < z < z_hi`` above the stack."""

    atom: AtomModel
    eta: float
    z_lo: float
    z_hi: float
    n_layers: int = 8

    def __post_init__(self):
        if not 0 < self.z_lo < self.z_hi:
            raise ValueError("slab needs 0 < z_lo < z_hi")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.n_layers < 1:
            raise ValueError("n_layers must be >= 1")
        chi = self.gas.max_abs_chi()
        if chi > 1e-2:
            warnings.warn(f"|chi| = {chi:.3g} is not dilute", DiluteWarning, stacklevel=3)

    @property
    def gas(self) -> AtomicGas:
        return AtomicGas(self.atom, self.eta)

    @property
    def thickness(self) -> float:
        return self.z_hi - self.z_lo

    @property
    def center(self) -> float:
        return 0.5 * (self.z_lo + self.z_hi)

    def with_eta(self, eta: float) -> "DiluteSlab":
        return DiluteSlab(self.atom, eta, self.z_lo, self.z_hi, self.n_layers)

    def moved_to(self, center: float) -> "DiluteSlab":
        h = 0.5 * self.thickness
        return DiluteSlab(self.atom, self.eta, center - h, center + h, self.n_layers)


@dataclass(frozen=True)
class ForceResult:
    f_nr: float
    f_r: float
    f_total: float
    err_nr: float
    err_r: float


def _absorbing_stack(stack: LayerStack):
    if stack.has_gain:
        raise ValueError("the environment stack must be purely absorbing; "
                         "amplifying environments are not supported")


def force_nr_dilute(slab: DiluteSlab, stack: LayerStack,
                    quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Nonresonant force per area, ``-eta [U_nr(z_hi) - U_nr(z_lo)]``."""
    quad = quad or QuadratureSpec()
    _absorbing_stack(stack)
    if slab.eta == 0:
        return 0.0, 0.0
    u1, _, e1 = _nonresonant(slab.atom, stack, slab.z_hi, quad)
    u0, _, e0 = _nonresonant(slab.atom, stack, slab.z_lo, quad)
    return -slab.eta * (u1 - u0), slab.eta * (e0 + e1)


def force_r_dilute(slab: DiluteSlab, stack: LayerStack,
                   quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Resonant force per area, ``-eta [U_r(z_hi) - U_r(z_lo)]``."""
    quad = quad or QuadratureSpec()
    _absorbing_stack(stack)
    if slab.eta == 0 or not sharp_line_spectrum(slab.atom):
        return 0.0, 0.0
    u1, _, e1 = _resonant(slab.atom, stack, slab.z_hi, quad)
    u0, _, e0 = _resonant(slab.atom, stack, slab.z_lo, quad)
    return -slab.eta * (u1 - u0), slab.eta * (e0 + e1)


def force_total_dilute(slab: DiluteSlab, stack: LayerStack,
                       quad: QuadratureSpec | None = None) -> ForceResult:
    f_nr, e_nr = force_nr_dilute(slab, stack, quad)
    f_r, e_r = force_r_dilute(slab, stack, quad)
    return ForceResult(f_nr, f_r, f_nr + f_r, e_nr, e_r)


def slab_panel_forces(slab: DiluteSlab, stack: LayerStack, part: str = "nr",
                      quad: QuadratureSpec | None = None) -> np.ndarray:
    """Force on each of ``slab.n_layers`` equal sub-slabs (telescoping form).

    The panels share their faces, so their sum reproduces the endpoint
    difference used by :func:`force_nr_dilute` / :func:`force_r_dilute`.
    """
    quad = quad or QuadratureSpec()
    fn = {"nr": _nonresonant, "r": _resonant}[part]
    edges = np.linspace(slab.z_lo, slab.z_hi, slab.n_layers + 1)
    edges[-1] = slab.z_hi
    u = np.array([fn(slab.atom, stack, z, quad)[0] for z in edges])
    return -slab.eta * np.diff(u)


def _midpoint(fz, z_lo, z_hi, n):
    h = (z_hi - z_lo) / n
    zc = z_lo + h * (np.arange(n) + 0.5)
    vals = np.array([fz(z) for z in zc])
    return h * vals.sum(axis=0)


def atom_sum_forces(slab: DiluteSlab, stack: LayerStack,
                    quad: QuadratureSpec | None = None):
    """Microscopic route: ``eta sum_i dz_i F_i`` over a layered atom cloud.

    Midpoint panels at ``n_layers`` and ``2 n_layers`` are combined by
    Richardson extrapolation; the change is reported as the error.
    Returns ``((f_nr, f_r), (err_nr, err_r))``.
    """
    quad = quad or QuadratureSpec()
    _absorbing_stack(stack)

    def fz(z):
        _, du_nr, _ = _nonresonant(slab.atom, stack, z, quad)
        _, du_r, _ = _resonant(slab.atom, stack, z, quad)
        return np.array([-du_nr, -du_r])

    n = slab.n_layers
    m1 = _midpoint(fz, slab.z_lo, slab.z_hi, n)
    m2 = _midpoint(fz, slab.z_lo, slab.z_hi, 2 * n)
    rich = (4.0 * m2 - m1) / 3.0
    err = np.abs(m2 - m1) / 3.0
    return tuple(slab.eta * rich), tuple(slab.eta * err)


def _film_stack(slab: DiluteSlab) -> LayerStack:
    """The slab as a film between vacuum half spaces, seen from below."""
    return LayerStack(below=VACUUM, layers=(Layer(slab.gas, slab.thickness),))


def lifshitz_pressure(stack_a: LayerStack, stack_b: LayerStack, gap: float,
                      T: float = 0.0, quad: QuadratureSpec | None = None) -> tuple[float, float]:
    r"""Lifshitz pressure (N/m^2) between two planar stacks facing each other
    across a vacuum gap.

    .. math::
        P = -\frac{\hbar}{2\pi^2}\int_0^\infty d\xi\int_0^\infty dk\,k\kappa
            \sum_\sigma \frac{r_a r_b e^{-2\kappa a}}{1 - r_a r_b e^{-2\kappa a}}

    Negative pressure is attraction.  ``T > 0`` turns the frequency integral
    into a Matsubara sum.
    """
    quad = quad or QuadratureSpec()
    if not gap > 0:
        raise ValueError("gap must be > 0")
    if stack_a.is_trivial or stack_b.is_trivial:
        return 0.0, 0.0
    inner = QuadratureSpec(quad.rel_tol * 0.1, quad.abs_tol, quad.max_subdivisions,
                           quad.tail_mapping)

    def f(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        q = xi / C

        def g(s):
            S = s[:, None]
            kap = q[None, :] + S
            k2 = S * (S + 2.0 * q[None, :])
            w = 1j * xi[None, :]
            ras, rap = _reflect(stack_a, w, k2, kz_top=1j * kap)
            rbs, rbp = _reflect(stack_b, w, k2, kz_top=1j * kap)
            # exp(-2 xi gap / c) is factored out so large xi does not underflow
            es = np.exp(-2.0 * S * gap)
            e = es * damp[None, :]
            out = 0.0
            for rr in ((ras * rbs).real, (rap * rbp).real):
                den = 1.0 - rr * e
                if np.any(den <= 1e-12):
                    raise DivergenceError("Lifshitz denominator vanishes "
                                          "(mode instability between the plates)")
                out = out + rr * es / den
            return kap * kap * out

        damp = np.exp(-2.0 * q * gap)
        res = integrate_semi_infinite(g, inner, scale=0.5 / gap)
        return damp * np.asarray(res.value)

    pref = -HBAR / (2.0 * np.pi**2)
    res = matsubara_sum(f, T, quad, scale=C / gap, points=[0.5 * C / gap])
    return pref * float(res.value), abs(pref) * float(res.err)


def lifshitz_two_plates(mat_a: PermittivityModel, mat_b: PermittivityModel, gap: float,
                        T: float = 0.0, quad: QuadratureSpec | None = None) -> tuple[float, float]:
    """Pressure between two half spaces; see :func:`lifshitz_pressure`.

    Plates with ``eps(i xi) < 1`` (all oscillators inverted) facing an
    ordinary absorber repel.
    """
    return lifshitz_pressure(LayerStack(mat_a), LayerStack(mat_b), gap, T, quad)


def _emission_windows(slab: DiluteSlab, half_width: float = 0.5):
    return [(wn * (1.0 - half_width), wn * (1.0 + half_width), wn)
            for wn, _ in sharp_line_spectrum(slab.atom)]


def force_r_dilute_window(slab: DiluteSlab, stack: LayerStack, linewidth: float,
                          quad: QuadratureSpec | None = None, half_width: float = 0.5):
    r"""Resonant slab force from the emission band of the medium.

    Uses the finite-linewidth susceptibility ``chi = eta alpha / eps0``
    (pole regulator ``linewidth``) and

    .. math::
        F_r = -\frac{\hbar}{\pi}\int dz\int d\omega\,\frac{\omega^2}{c^2}
              \Theta[-\varepsilon_I]\,\varepsilon_I\,\partial_z \mathrm{Re\,Tr}\,G_1

    with the z-integral done exactly (face values of ``Re Tr G1``).  Each
    emission line contributes over ``omega_nk (1 +- half_width)``.
    Returns ``(f_r, err)``.
    """
    quad = quad or QuadratureSpec()
    _absorbing_stack(stack)
    if slab.eta == 0:
        return 0.0, 0.0
    total, err = 0.0, 0.0
    log = []

    def f(w):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearPoleWarning)
            eps_i = slab.eta * np.imag(polarizability(slab.atom, w + 0j, linewidth)) / EPS0
        eps_i = np.where(eps_i <= 0, eps_i, 0.0)
        v1, _, e1 = _real_axis_trace(stack, slab.z_hi, w, quad)
        v0, _, e0 = _real_axis_trace(stack, slab.z_lo, w, quad)
        log.append((np.max(np.abs(eps_i) * (e0 + e1)), np.max(np.abs(eps_i * (v1 - v0)))))
        return -HBAR / np.pi * (w / C) ** 2 * eps_i * (v1 - v0).real

    for lo, hi, wn in _emission_windows(slab, half_width):
        pts = [wn + k * linewidth for k in (-100, -10, -1, 0, 1, 10, 100)]
        res = integrate_window(f, lo, hi, quad, points=pts)
        total += float(res.value)
        err += float(res.err)
    return total, err + _green_rel(log) * abs(total)


@dataclass(frozen=True)
class AdditivityReport:
    """Macroscopic vs atom-sum slab forces (N/m^2) and their deviations."""

    deviation: float
    dev_nr: float
    dev_r: float
    macro_nr: float
    micro_nr: float
    macro_r: float
    micro_r: float
    chi_max: float


def _rel(macro, micro):
    if macro == micro:
        return 0.0
    return abs(macro - micro) / abs(micro) if micro else float("inf")


def additivity_check(slab: DiluteSlab, stack: LayerStack,
                     quad: QuadratureSpec | None = None,
                     linewidth: float | None = None) -> AdditivityReport:
    """Compare the macroscopic slab force with the sum of atomic CP forces.

    ``linewidth`` is the line regulator for the macroscopic resonant route
    (default ``1e-5`` of the lowest emission frequency).
    """
    quad = quad or QuadratureSpec()
    _absorbing_stack(stack)
    (micro_nr, micro_r), _ = atom_sum_forces(slab, stack, quad)
    macro_nr, _ = lifshitz_pressure(stack, _film_stack(slab), slab.z_lo, 0.0, quad)
    lines = sharp_line_spectrum(slab.atom)
    if lines:
        lw = linewidth or 1e-5 * min(w for w, _ in lines)
        macro_r, _ = force_r_dilute_window(slab, stack, lw, quad)
    else:
        macro_r = 0.0
    return AdditivityReport(
        deviation=_rel(macro_nr + macro_r, micro_nr + micro_r),
        dev_nr=_rel(macro_nr, micro_nr), dev_r=_rel(macro_r, micro_r),
        macro_nr=macro_nr, micro_nr=micro_nr, macro_r=macro_r, micro_r=micro_r,
        chi_max=slab.gas.max_abs_chi())
