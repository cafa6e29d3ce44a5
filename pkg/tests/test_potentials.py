import numpy as np
import pytest
from scipy.optimize import brentq

from casimir_gain.greens import Layer, LayerStack
from casimir_gain.materials import (C, KB, HBAR, MU0, PERFECT_MIRROR, VACUUM, AtomModel,
                                    AtomTransition, GainWindow, lorentzian_im_alpha,
                                    single_oscillator)
from casimir_gain.numerics import QuadratureSpec
from casimir_gain.potentials import (cp_nonresonant, cp_nonresonant_thermal, cp_resonant,
                                     cp_resonant_integral, cp_total)
from oracles import D2, OMEGA_A, alpha0, cp_mirror_nonretarded, cp_mirror_retarded

Q = QuadratureSpec(rel_tol=1e-9)
L = C / OMEGA_A
MIRROR = LayerStack(PERFECT_MIRROR)
ABSORBER = LayerStack(single_oscillator(1e16, 1.5e16, 1e14))
INVERTED = LayerStack(single_oscillator(1e16, 5e15, 1e14, inverted=True))
GROUND = AtomModel.two_level(OMEGA_A, D2)
EXCITED = AtomModel.two_level(OMEGA_A, D2, excited=True)


def fitted_slope(fn, z):
    y = np.log(np.abs([fn(zz) for zz in z]))
    return np.polyfit(np.log(z), y, 1)[0]

# --- nonresonant ------------------------------------------------------------


def test_vacuum_and_empty_atom_give_zero():
    assert cp_nonresonant(GROUND, LayerStack(VACUUM), L) == (0.0, 0.0)
    assert cp_nonresonant(AtomModel(), MIRROR, L) == (0.0, 0.0)


@pytest.mark.parametrize("zfac, rel", [(1e-4, 1e-3), (1e-3, 5e-3)])
def test_mirror_nonretarded_limit(zfac, rel):
    z = zfac * L
    u, err = cp_nonresonant(GROUND, MIRROR, z, Q)
    assert u == pytest.approx(cp_mirror_nonretarded(z), rel=rel)
    assert err < 1e-6 * abs(u)


@pytest.mark.parametrize("zfac, rel", [(50.0, 5e-3), (500.0, 5e-4)])
def test_mirror_retarded_limit(zfac, rel):
    z = zfac * L
    u, _ = cp_nonresonant(GROUND, MIRROR, z, Q)
    assert u == pytest.approx(cp_mirror_retarded(z, alpha0()), rel=rel)


def test_power_laws():
    nr = fitted_slope(lambda z: cp_nonresonant(GROUND, MIRROR, z, Q)[0],
                      np.geomspace(1e-3, 1e-2, 6) * L)
    ret = fitted_slope(lambda z: cp_nonresonant(GROUND, MIRROR, z, Q)[0],
                       np.geomspace(1e1, 1e2, 6) * L)
    assert nr == pytest.approx(-3.0, abs=0.05)
    assert ret == pytest.approx(-4.0, abs=0.05)


@pytest.mark.parametrize("stack", [MIRROR, ABSORBER])
@pytest.mark.parametrize("zfac", [1e-2, 1.0, 30.0])
def test_excited_nonresonant_sign_reversed(stack, zfac):
    g = cp_nonresonant(GROUND, stack, zfac * L, Q)[0]
    e = cp_nonresonant(EXCITED, stack, zfac * L, Q)[0]
    assert g < 0 < e
    assert e == pytest.approx(-g, rel=1e-12)


def test_superposition_over_transitions():
    a = AtomTransition(OMEGA_A, D2)
    b = AtomTransition(-0.6 * OMEGA_A, 2.5 * D2)
    z = 0.7 * L
    both = AtomModel((a, b))
    for part in (cp_nonresonant, cp_resonant):
        s = part(AtomModel((a,)), ABSORBER, z, Q)[0] + part(AtomModel((b,)), ABSORBER, z, Q)[0]
        assert part(both, ABSORBER, z, Q)[0] == pytest.approx(s, rel=1e-9)
    assert cp_nonresonant(GROUND.scaled(3.0), ABSORBER, z, Q)[0] == pytest.approx(
        3 * cp_nonresonant(GROUND, ABSORBER, z, Q)[0], rel=1e-12)


@pytest.mark.parametrize("z", np.geomspace(1e-9, 1e-5, 5))
def test_ground_state_attracted_to_absorber_repelled_by_inverted(z):
    r = cp_total(GROUND, ABSORBER, z, Q)
    assert r.u_nr < 0 and r.f_z < 0
    assert cp_nonresonant(GROUND, INVERTED, z, Q)[0] > 0


def test_probe_region_must_be_vacuum():
    with pytest.raises(ValueError):
        cp_nonresonant(GROUND, LayerStack(PERFECT_MIRROR, (), single_oscillator(1e16, 1e15, 1e14)), L)

# --- resonant ---------------------------------------------------------------


def test_ground_state_has_no_resonant_part():
    assert cp_resonant(GROUND, MIRROR, L) == (0.0, 0.0)


def test_resonant_retarded_zero_spacing():
    f = lambda z: cp_resonant(EXCITED, MIRROR, z, Q)[0]
    zs = np.linspace(50 * L, 56 * L, 120)
    v = np.array([f(z) for z in zs])
    roots = [brentq(f, zs[i], zs[i + 1], xtol=1e-14 * L)
             for i in range(len(zs) - 1) if v[i] * v[i + 1] < 0]
    assert len(roots) >= 3
    assert np.diff(roots) == pytest.approx(np.pi * C / (2 * OMEGA_A), rel=1e-2)


def test_resonant_nonretarded_slope():
    s = fitted_slope(lambda z: cp_resonant(EXCITED, MIRROR, z, Q)[0],
                     np.geomspace(1e-3, 1e-2, 6) * L)
    assert s == pytest.approx(-3.0, abs=0.05)


def test_resonant_refuses_gain_stack():
    with pytest.raises(ValueError):
        cp_resonant(EXCITED, LayerStack(single_oscillator(OMEGA_A, 1e15, 1e13, inverted=True)), L)


def test_resonant_integral_of_zero_profile():
    u, _ = cp_resonant_integral(lambda w: np.zeros_like(w), (0.5 * OMEGA_A, 1.5 * OMEGA_A),
                                MIRROR, L)
    assert u == 0.0


def test_resonant_integral_converges_to_sharp_line():
    z = 3 * L
    ref = cp_resonant(EXCITED, MIRROR, z, Q)[0]
    devs = []
    for g in (1e-2, 1e-3, 1e-4):
        u = cp_resonant_integral(lorentzian_im_alpha(EXCITED, g * OMEGA_A),
                                 GainWindow(0.5 * OMEGA_A, 1.5 * OMEGA_A), MIRROR, z, Q,
                                 points=[OMEGA_A])[0]
        devs.append(abs(u / ref - 1))
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 5e-3
    # deviation shrinks in proportion to the linewidth
    assert devs[1] / devs[2] == pytest.approx(10, rel=0.2)


def test_resonant_integral_accepts_tables():
    g = 1e-3 * OMEGA_A
    prof = lorentzian_im_alpha(EXCITED, g)
    # table nodes cluster around the line centre
    w = OMEGA_A + g * np.sinh(np.linspace(-np.arcsinh(500), np.arcsinh(500), 2001))
    win = (0.5 * OMEGA_A, 1.5 * OMEGA_A)
    a = cp_resonant_integral(prof, win, MIRROR, 2 * L, Q, points=[OMEGA_A])[0]
    loose = QuadratureSpec(rel_tol=1e-6, max_subdivisions=20000)
    b = cp_resonant_integral((w, prof(w)), win, MIRROR, 2 * L, loose, points=[OMEGA_A])[0]
    assert b == pytest.approx(a, rel=1e-4)


def test_node_suppresses_windowed_resonance():
    f = lambda z: cp_resonant(EXCITED, MIRROR, z, Q)[0]
    node = brentq(f, 50 * L, 50 * L + np.pi / 2 * L, xtol=1e-14 * L) \
        if f(50 * L) * f(50 * L + np.pi / 2 * L) < 0 else \
        brentq(f, 50 * L + np.pi / 2 * L, 50 * L + np.pi * L, xtol=1e-14 * L)
    anti = node + np.pi / 4 * L
    prof = lorentzian_im_alpha(EXCITED, 1e-4 * OMEGA_A)
    win = (0.5 * OMEGA_A, 1.5 * OMEGA_A)
    u_node = cp_resonant_integral(prof, win, MIRROR, node, Q, points=[OMEGA_A])[0]
    u_anti = cp_resonant_integral(prof, win, MIRROR, anti, Q, points=[OMEGA_A])[0]
    assert abs(u_node) * 10 <= abs(u_anti)

# --- totals and forces ------------------------------------------------------


def test_ground_state_total_is_nonresonant():
    r = cp_total(GROUND, ABSORBER, L, Q)
    assert r.u_r == 0 and r.u_total == r.u_nr and r.f_r == 0


def test_far_field_dominated_by_resonant_part():
    ratios = []
    for z in (5 * L, 50 * L, 500 * L):
        # sample where cos(2 z / L) = +-1 so |u_r| is not accidentally tiny
        zz = np.round(2 * z / (np.pi * L)) * np.pi * L / 2
        r = cp_total(EXCITED, MIRROR, zz, Q)
        ratios.append(abs(r.u_r / r.u_nr))
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[2] > 1e6


@pytest.mark.parametrize("atom", [GROUND, EXCITED])
@pytest.mark.parametrize("stack", [MIRROR, ABSORBER,
                                   LayerStack(single_oscillator(1e14, 1.4e16, 5e13),
                                              (Layer(single_oscillator(1e16, 1.5e16, 1e14), 2e-8),))])
@pytest.mark.parametrize("zfac", [0.05, 2.0])
def test_force_is_minus_gradient(atom, stack, zfac):
    z = zfac * L
    h = 1e-4 * z
    q = QuadratureSpec(rel_tol=1e-12)
    r = cp_total(atom, stack, z, q)
    fd = -(cp_total(atom, stack, z + h, q).u_total - cp_total(atom, stack, z - h, q).u_total) / (2 * h)
    assert r.f_z == pytest.approx(fd, rel=1e-5)
    assert r.f_z == pytest.approx(r.f_nr + r.f_r, rel=1e-14)
    assert r.u_total == r.u_nr + r.u_r

# --- temperature ------------------------------------------------------------


def test_zero_temperature_thermal_is_plain():
    a = cp_nonresonant(GROUND, MIRROR, 1e-7, Q)
    b = cp_nonresonant_thermal(GROUND, MIRROR, 1e-7, 0.0, Q)
    assert abs(a[0] - b[0]) <= a[1] + b[1]


def test_room_temperature_short_and_long_distance():
    near = cp_nonresonant_thermal(GROUND, MIRROR, 1e-8, 300.0, Q)[0]
    far = cp_nonresonant_thermal(GROUND, MIRROR, 1e-5, 300.0, Q)[0]
    assert abs(near / cp_nonresonant(GROUND, MIRROR, 1e-8, Q)[0] - 1) < 1e-2
    assert abs(far / cp_nonresonant(GROUND, MIRROR, 1e-5, Q)[0] - 1) > 0.1


def test_long_distance_dominated_by_static_term():
    z, T = 1e-5, 300.0
    u = cp_nonresonant_thermal(GROUND, MIRROR, z, T, Q)[0]
    # m = 0 term: xi^2 Tr G1(i xi) -> -c^2 / (8 pi z^3) for the mirror as xi -> 0
    step = 2 * np.pi * KB * T / HBAR
    term0 = 0.5 * step * HBAR * MU0 / (2 * np.pi) * alpha0() * (-C**2 / (8 * np.pi * z**3))
    assert term0 / u >= 0.9


def test_thermal_force_is_minus_gradient():
    z, h = 2e-6, 2e-10
    r = cp_total(GROUND, ABSORBER, z, Q, T=300.0)
    up = cp_nonresonant_thermal(GROUND, ABSORBER, z + h, 300.0, Q)[0]
    dn = cp_nonresonant_thermal(GROUND, ABSORBER, z - h, 300.0, Q)[0]
    assert r.f_z == pytest.approx(-(up - dn) / (2 * h), rel=1e-5)
