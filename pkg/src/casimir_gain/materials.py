"""Linear response of media and excited atoms.

Permittivities are sums of Lorentz oscillators whose strength may carry a
negative sign (population inversion, i.e. gain).  Atoms are described by a
list of signed transition frequencies from the occupied level.

Everything is SI.  Frequencies are angular (rad/s).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import constants as _k

from .numerics import QuadratureSpec, integrate_semi_infinite

HBAR = _k.hbar
C = _k.c
EPS0 = _k.epsilon_0
MU0 = _k.mu_0
KB = _k.Boltzmann
EV = _k.e / _k.hbar  # rad/s per eV

__all__ = [
    "HBAR", "C", "EPS0", "MU0", "KB", "EV",
    "LorentzOscillator", "PermittivityModel", "PerfectMirror", "VACUUM",
    "PERFECT_MIRROR", "AtomTransition", "AtomModel", "AtomicGas",
    "GainWindow", "KKResult", "eval_permittivity", "gain_windows",
    "kk_check", "polarizability", "polarizability_imag", "sharp_line_spectrum",
    "susceptibility_from_atoms", "lorentzian_im_alpha", "DiluteWarning",
    "NearPoleWarning", "single_oscillator", "material_from_dict", "atom_from_dict",
    "material_to_dict", "is_absorbing_at", "parse_frequency",
]


class DiluteWarning(UserWarning):
    """Susceptibility too large for the linearised Clausius-Mossotti law."""


class NearPoleWarning(UserWarning):
    """Real-frequency polarizability evaluated within the regulator of a pole."""


@dataclass(frozen=True)
class LorentzOscillator:
    """One resonance; ``inverted=True`` flips the sign of its strength."""

    omega0: float
    omegap: float
    gamma: float
    inverted: bool = False

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be > 0")
        if not self.omegap >= 0:
            raise ValueError("omegap must be >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0 (causality)")

    @property
    def sign(self) -> float:
        return -1.0 if self.inverted else 1.0

    def term(self, omega):
        w = np.asarray(omega, dtype=complex)
        return self.sign * self.omegap**2 / (self.omega0**2 - w * w - 1j * self.gamma * w)


@dataclass(frozen=True)
class PermittivityModel:
    """``background + sum(oscillators)``; immutable."""

    oscillators: tuple[LorentzOscillator, ...] = ()
    background: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        if not self.background >= 1.0:
            raise ValueError("background permittivity must be >= 1")

    def epsilon(self, omega):
        return eval_permittivity(self, omega)

    def susceptibility(self, omega):
        """``eps - 1`` without the round-off of forming ``eps`` first."""
        w = np.asarray(omega, dtype=complex)
        chi = np.full(w.shape, complex(self.background - 1.0))
        for osc in self.oscillators:
            chi = chi + osc.term(w)
        return chi

    @property
    def is_vacuum(self) -> bool:
        return self.background == 1.0 and all(o.omegap == 0 for o in self.oscillators)

    @property
    def has_gain(self) -> bool:
        return any(o.inverted and o.omegap > 0 for o in self.oscillators)

    def with_inversion(self, inverted: bool) -> "PermittivityModel":
        """Same oscillators with every ``inverted`` flag set to ``inverted``."""
        return PermittivityModel(
            tuple(LorentzOscillator(o.omega0, o.omegap, o.gamma, inverted)
                  for o in self.oscillators), self.background)


class PerfectMirror:
    """Perfectly reflecting substrate: r_s = -1, r_p = +1 at every k."""

    is_vacuum = False
    has_gain = False

    def epsilon(self, omega):
        return np.full(np.shape(omega), np.inf + 0j)

    def susceptibility(self, omega):
        return self.epsilon(omega)

    def __repr__(self):
        return "PERFECT_MIRROR"


VACUUM = PermittivityModel()
PERFECT_MIRROR = PerfectMirror()


def eval_permittivity(model: PermittivityModel, omega):
    """Complex permittivity at (complex) angular frequency ``omega``.

    Examples
    --------
    >>> complex(eval_permittivity(VACUUM, 3.0 + 1.0j))
    (1+0j)
    """
    w = np.asarray(omega, dtype=complex)
    eps = np.full(w.shape, complex(model.background))
    for osc in model.oscillators:
        eps = eps + osc.term(w)
    return eps if eps.ndim else eps[()]


@dataclass(frozen=True)
class GainWindow:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError("gain window needs 0 < lo < hi")

    def __contains__(self, omega) -> bool:
        # boundary points count as amplifying (unit step at zero is one)
        return self.lo <= omega <= self.hi


def _default_grid(model: PermittivityModel, points: int = 20001) -> np.ndarray:
    w0 = [o.omega0 for o in model.oscillators] or [1.0]
    return np.geomspace(min(w0) * 1e-3, max(w0) * 1e2, points)


def _bisect(g, lo, hi, rtol=1e-10):
    """Root of ``g`` bracketed by ``lo < hi`` (sign change)."""
    glo = g(lo)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gain_windows(model: PermittivityModel, grid=None, tol: float = 0.0) -> list[GainWindow]:
    """Maximal frequency intervals where ``Im eps < -tol``.

    ``grid`` is an increasing array of positive scan frequencies; it must
    resolve the narrowest damping rate.  Window edges are refined by
    bisection to relative accuracy 1e-10; a window touching the end of the
    scan is clipped there.
    """
    w = _default_grid(model) if grid is None else np.asarray(grid, dtype=float)
    if np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ValueError("grid must be positive and strictly increasing")

    def g(x):
        return float(np.imag(eval_permittivity(model, x))) + tol

    amp = np.imag(eval_permittivity(model, w)) + tol < 0
    windows = []
    i = 0
    n = len(w)
    while i < n:
        if not amp[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and amp[j + 1]:
            j += 1
        lo = w[i] if i == 0 else _bisect(g, w[i - 1], w[i])
        hi = w[j] if j == n - 1 else _bisect(g, w[j], w[j + 1])
        if hi > lo:
            windows.append(GainWindow(lo, hi))
        i = j + 1
    return windows


@dataclass(frozen=True)
class KKResult:
    deviation: float
    direct: float
    dispersion_integral: float
    err: float


def kk_check(model: PermittivityModel, xi: float, quad: QuadratureSpec | None = None) -> KKResult:
    r"""Compare ``eps(i xi) - background`` with its dispersion integral.

    The integral is :math:`(2/\pi)\int_0^\infty \omega\,\mathrm{Im}\,
    \varepsilon(\omega)/(\omega^2+\xi^2)\,d\omega`.  Holds for gain media as
    well, since inverted oscillators keep their poles in the lower half plane.
    """
    if not xi > 0:
        raise ValueError("xi must be > 0")
    quad = quad or QuadratureSpec(rel_tol=1e-11)
    direct = float(np.real(eval_permittivity(model, 1j * xi))) - model.background
    if not model.oscillators:
        return KKResult(0.0, direct, 0.0, 0.0)

    def f(w):
        return w * np.imag(eval_permittivity(model, w)) / (w * w + xi * xi)

    pts = []
    for o in model.oscillators:
        pts += [o.omega0 + k * o.gamma for k in (-20, -5, -1, 0, 1, 5, 20)]
    pts.append(xi)
    top = max(pts)
    res = integrate_semi_infinite(f, quad, scale=top, points=[p for p in pts if p > 0])
    integral = 2.0 / np.pi * float(res.value)
    if direct == 0.0:
        dev = 0.0 if integral == 0.0 else np.inf
    else:
        dev = abs(direct - integral) / abs(direct)
    return KKResult(dev, direct, integral, 2.0 / np.pi * float(res.err))


@dataclass(frozen=True)
class AtomTransition:
    """Transition from the occupied level n to level k.

    ``omega_kn > 0``: level k lies above (absorption); ``omega_kn < 0``: k
    lies below, so the atom can emit at ``-omega_kn``.
    """

    omega_kn: float
    d2: float

    def __post_init__(self):
        if self.omega_kn == 0:
            raise ValueError("omega_kn must be nonzero")
        if not self.d2 >= 0:
            raise ValueError("d2 must be >= 0")


@dataclass(frozen=True)
class AtomModel:
    transitions: tuple[AtomTransition, ...] = ()
    linewidth_epsilon: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if self.linewidth_epsilon is None:
            eps = 1e-6 * min((abs(t.omega_kn) for t in self.transitions), default=0.0)
            object.__setattr__(self, "linewidth_epsilon", eps)
        elif self.linewidth_epsilon < 0:
            raise ValueError("linewidth_epsilon must be >= 0")

    @classmethod
    def two_level(cls, omega: float, d2: float, excited: bool = False) -> "AtomModel":
        """Two-level atom in its ground (default) or excited state."""
        return cls((AtomTransition(-omega if excited else omega, d2),))

    @property
    def is_ground_state(self) -> bool:
        return all(t.omega_kn > 0 for t in self.transitions)

    def scaled(self, factor: float) -> "AtomModel":
        return AtomModel(tuple(AtomTransition(t.omega_kn, factor * t.d2)
                               for t in self.transitions), self.linewidth_epsilon)


def polarizability(atom: AtomModel, omega, epsilon: float | None = None):
    """Isotropic polarizability of the occupied level (C^2 m^2 / J).

    ``epsilon`` is the pole regulator.  When omitted it is zero off the real
    axis and ``atom.linewidth_epsilon`` on it.  A :class:`NearPoleWarning` is
    issued for real frequencies within ``epsilon`` of a resonance.
    """
    w = np.asarray(omega, dtype=complex)
    if epsilon is None:
        epsilon = atom.linewidth_epsilon if np.any(w.imag == 0) else 0.0
    out = np.zeros(w.shape, dtype=complex)
    for t in atom.transitions:
        out += t.d2 / (w + t.omega_kn + 1j * epsilon) - t.d2 / (w - t.omega_kn + 1j * epsilon)
        on_axis = w.imag == 0
        if np.any(on_axis & (np.abs(np.abs(w.real) - abs(t.omega_kn)) <= max(epsilon, 0.0))):
            warnings.warn(f"polarizability evaluated within {epsilon:g} rad/s of "
                          f"the pole at {abs(t.omega_kn):g} rad/s", NearPoleWarning,
                          stacklevel=2)
    out /= 3.0 * HBAR
    return out if out.ndim else out[()]


def polarizability_imag(atom: AtomModel, xi):
    """``alpha(i xi)`` as a real array, valid for ``xi >= 0``."""
    x = np.asarray(xi, dtype=float)
    out = np.zeros(x.shape)
    for t in atom.transitions:
        out += 2.0 * t.d2 * t.omega_kn / (t.omega_kn**2 + x * x)
    return out / (3.0 * HBAR)


def sharp_line_spectrum(atom: AtomModel) -> list[tuple[float, float]]:
    """Emission lines ``(omega_nk, pi |d|^2 / 3 hbar)`` of the occupied level.

    Only downward transitions appear; for ``omega > 0`` the imaginary part of
    the polarizability is ``-sum(weight * delta(omega - omega_nk))``.
    """
    return [(-t.omega_kn, np.pi * t.d2 / (3.0 * HBAR))
            for t in atom.transitions if t.omega_kn < 0]


def susceptibility_from_atoms(atom: AtomModel, eta: float, omega, epsilon: float | None = None):
    """Linearised Clausius-Mossotti susceptibility ``eta alpha / eps0``."""
    chi = eta * np.asarray(polarizability(atom, omega, epsilon)) / EPS0
    if np.any(np.abs(chi) > 1e-2):
        warnings.warn(f"|chi| = {np.max(np.abs(chi)):.3g} exceeds 1e-2; "
                      "the dilute-gas linearisation is questionable", DiluteWarning,
                      stacklevel=2)
    return chi if np.ndim(chi) else chi[()]


@dataclass(frozen=True)
class AtomicGas:
    """Dilute gas of identical atoms used as a medium, ``eps = 1 + chi``.

    On the imaginary axis the sharp-line polarizability is used; on the real
    axis the pole regulator ``epsilon`` (default: the atom's) sets the line
    width.
    """

    atom: AtomModel
    eta: float
    epsilon_reg: float | None = field(default=None)

    @property
    def is_vacuum(self) -> bool:
        return self.eta == 0

    @property
    def has_gain(self) -> bool:
        return self.eta > 0 and bool(sharp_line_spectrum(self.atom))

    def susceptibility(self, omega):
        w = np.asarray(omega, dtype=complex)
        if np.all((w.real == 0) & (w.imag >= 0)):
            return (self.eta * polarizability_imag(self.atom, w.imag) / EPS0).astype(complex)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearPoleWarning)
            return np.asarray(susceptibility_from_atoms(self.atom, self.eta, w,
                                                        self.epsilon_reg), dtype=complex)

    def epsilon(self, omega):
        return 1.0 + self.susceptibility(omega)

    def max_abs_chi(self) -> float:
        """``|chi(i xi)|`` is largest at ``xi = 0``."""
        return float(abs(self.eta * polarizability_imag(self.atom, 0.0) / EPS0))


def lorentzian_im_alpha(atom: AtomModel, linewidth: float):
    """Finite-linewidth emission profile for the downward lines.

    Each sharp line ``-w delta(omega - omega_nk)`` is replaced by a
    normalised Lorentzian of half width ``linewidth``.  Returns a vectorized
    callable of real ``omega``.
    """
    lines = sharp_line_spectrum(atom)
    if linewidth <= 0:
        raise ValueError("linewidth must be > 0")

    def im_alpha(omega):
        w = np.asarray(omega, dtype=float)
        out = np.zeros(w.shape)
        for wn, weight in lines:
            out -= weight / np.pi * linewidth / ((w - wn) ** 2 + linewidth**2)
        return out

    return im_alpha


def parse_frequency(value: float, unit: str) -> float:
    if unit in ("rad_s", "rad/s"):
        return float(value)
    if unit == "eV":
        return float(value) * EV
    raise ValueError(f"unknown frequency unit {unit!r}")


def material_from_dict(doc: dict) -> PermittivityModel:
    """Build a :class:`PermittivityModel` from its JSON form."""
    unit = doc.get("unit", "rad_s")
    oscs = []
    for i, o in enumerate(doc.get("oscillators", [])):
        u = o.get("unit", unit)
        try:
            oscs.append(LorentzOscillator(parse_frequency(o["omega0"], u),
                                          parse_frequency(o["omegap"], u),
                                          parse_frequency(o["gamma"], u),
                                          bool(o.get("inverted", False))))
        except KeyError as exc:
            raise KeyError(f"oscillators[{i}].{exc.args[0]}") from None
    return PermittivityModel(tuple(oscs), float(doc.get("background", 1.0)))


def atom_from_dict(doc: dict) -> AtomModel:
    unit = doc.get("unit", "rad_s")
    trans = []
    for i, t in enumerate(doc.get("transitions", [])):
        try:
            trans.append(AtomTransition(parse_frequency(t["omega_kn"], t.get("unit", unit)),
                                        float(t["d2"])))
        except KeyError as exc:
            raise KeyError(f"transitions[{i}].{exc.args[0]}") from None
    eps = doc.get("linewidth_epsilon")
    if eps is not None:
        eps = parse_frequency(eps, unit)
    return AtomModel(tuple(trans), eps)


def material_to_dict(model: PermittivityModel) -> dict:
    return {"background": model.background, "unit": "rad_s",
            "oscillators": [{"omega0": o.omega0, "omegap": o.omegap,
                             "gamma": o.gamma, "inverted": o.inverted}
                            for o in model.oscillators]}


def single_oscillator(omega0: float, omegap: float, gamma: float,
                      inverted: bool = False, background: float = 1.0) -> PermittivityModel:
    """Convenience constructor for one-resonance media."""
    return PermittivityModel((LorentzOscillator(omega0, omegap, gamma, inverted),), background)


def is_absorbing_at(material, omega: Sequence[float] | float) -> bool:
    """True when ``Im eps >= 0`` at every given real frequency."""
    if isinstance(material, PerfectMirror):
        return True
    return bool(np.all(np.imag(material.epsilon(np.asarray(omega, dtype=complex))) >= 0))
