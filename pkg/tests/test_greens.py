import numpy as np
import pytest

from casimir_gain.greens import (GainStackError, Layer, LayerStack, fresnel_reflection,
                                 green_trace, green_trace_imag_axis)
from casimir_gain.materials import C, PERFECT_MIRROR, VACUUM, single_oscillator
from casimir_gain.numerics import QuadratureSpec
from oracles import airy_film, half_space_trace_imag, mirror_trace_imag, mirror_trace_real

Q = QuadratureSpec(rel_tol=1e-11)
ABSORBER = single_oscillator(1e16, 1.5e16, 1e14)
METAL = single_oscillator(1e14, 1.4e16, 5e13)
INVERTED = single_oscillator(1e16, 5e15, 1e14, inverted=True)
MIRROR = LayerStack(PERFECT_MIRROR)
W = 2.4e15
LBAR = C / W

# --- reflection coefficients ------------------------------------------------


@pytest.mark.parametrize("pol", ["s", "p"])
def test_vacuum_reflects_nothing(pol):
    assert fresnel_reflection(LayerStack(VACUUM), pol, W, np.array([0.0, 1e6, 1e8])) == \
        pytest.approx(np.zeros(3))


@pytest.mark.parametrize("kpar", [0.0, 0.5 * W / C, 3 * W / C, 1e9])
def test_mirror_limit(kpar):
    assert fresnel_reflection(MIRROR, "s", W, kpar) == pytest.approx(-1.0)
    assert fresnel_reflection(MIRROR, "p", W, kpar) == pytest.approx(1.0)
    # a finite but huge eps approaches the mirror while kappa << sqrt(eps) xi / c
    eps = 1e14
    huge = LayerStack(single_oscillator(1.0, 1e6, 1.0, background=eps))
    kap = np.hypot(kpar, W / C)
    bound = 3 * kap / np.sqrt(kpar**2 + eps * (W / C) ** 2)
    assert fresnel_reflection(huge, "s", 1j * W, kpar) == pytest.approx(-1.0, abs=bound)
    assert fresnel_reflection(huge, "p", 1j * W, kpar) == pytest.approx(1.0, abs=bound)


@pytest.mark.parametrize("pol", ["s", "p"])
def test_bare_interface_is_two_media_fresnel(pol):
    eps = complex(ABSORBER.epsilon(W + 0j))
    kp = np.array([0.3, 0.9, 1.7, 5.0]) * W / C
    k0 = W / C
    kz0 = np.sqrt(k0 * k0 - kp * kp + 0j)
    kz1 = np.sqrt(eps * k0 * k0 - kp * kp + 0j)
    ref = (kz0 - kz1) / (kz0 + kz1) if pol == "s" else (eps * kz0 - kz1) / (eps * kz0 + kz1)
    got = fresnel_reflection(LayerStack(ABSORBER), pol, W, kp)
    np.testing.assert_allclose(got, ref, rtol=1e-13)


@pytest.mark.parametrize("pol", ["s", "p"])
@pytest.mark.parametrize("omega", [W, 1.3e16, 1j * W])
def test_film_matches_airy_series(pol, omega):
    d = 0.37 * LBAR
    film, sub = ABSORBER, METAL
    stack = LayerStack(sub, (Layer(film, d),))
    kp = np.array([0.1, 0.8, 0.99, 1.2, 4.0]) * abs(omega) / C
    ef, es = complex(film.epsilon(omega)), complex(sub.epsilon(omega))
    ref = np.array([airy_film(ef, es, d, pol, omega, k) for k in kp])
    got = fresnel_reflection(stack, pol, omega, kp)
    np.testing.assert_allclose(got, ref, rtol=1e-12)


def test_layers_are_listed_bottom_to_top():
    d1, d2 = 0.2 * LBAR, 0.5 * LBAR
    a = LayerStack(METAL, (Layer(ABSORBER, d1), Layer(VACUUM, d2)))
    # a vacuum spacer on top only adds propagation phase to the film-on-metal response
    b = LayerStack(METAL, (Layer(ABSORBER, d1),))
    kp = 0.4 * W / C
    kz = np.sqrt((W / C) ** 2 - kp * kp)
    for pol in "sp":
        assert fresnel_reflection(a, pol, W, kp) == pytest.approx(
            fresnel_reflection(b, pol, W, kp) * np.exp(2j * kz * d2), rel=1e-12)


def test_stack_validation():
    with pytest.raises(ValueError):
        Layer(ABSORBER, 0.0)
    with pytest.raises(ValueError):
        LayerStack(ABSORBER, (Layer(PERFECT_MIRROR, 1e-9),))
    with pytest.raises(ValueError):
        green_trace(LayerStack(ABSORBER, above=ABSORBER), LBAR, 1j * W)
    with pytest.raises(ValueError):
        green_trace(MIRROR, 0.0, 1j * W)

# --- trace: oracles ---------------------------------------------------------


def test_vacuum_trace_is_zero():
    g = green_trace(LayerStack(VACUUM), LBAR, W)
    assert g.value == 0 and g.dvalue_dz == 0


@pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 7.0, 30.0])
def test_mirror_imaginary_axis_closed_form(x):
    z = 0.8 * LBAR
    xi = x * C / z
    g = green_trace_imag_axis(MIRROR, z, xi, Q)
    assert g.value == pytest.approx(mirror_trace_imag(z, xi), rel=1e-10)
    assert isinstance(g.value, float)


@pytest.mark.parametrize("x", [1e-2, 0.5, 3.0, 40.0])
def test_mirror_real_axis_closed_form(x):
    z = 1.3 * LBAR
    w = x * C / z
    g = green_trace(MIRROR, z, w, Q)
    ref = mirror_trace_real(z, w)
    assert abs(g.value - ref) < 1e-10 * abs(ref)


@pytest.mark.parametrize("eps", [1.5, 4.0, 80.0])
@pytest.mark.parametrize("x", [0.05, 1.0, 5.0])
def test_half_space_against_scipy(eps, x):
    z = LBAR
    xi = x * C / z
    stack = LayerStack(single_oscillator(1.0, 1e-3, 1.0, background=eps))
    g = green_trace_imag_axis(stack, z, xi, Q)
    assert g.value == pytest.approx(half_space_trace_imag(eps, z, xi), rel=1e-9)

# --- trace: properties ------------------------------------------------------


@pytest.mark.parametrize("stack", [LayerStack(ABSORBER), LayerStack(METAL, (Layer(ABSORBER, 3e-8),))])
@pytest.mark.parametrize("omega", [0.7 * W, 3e15 + 4e14j, 1e16 - 2e15j, 0.3j * W + 1e14])
def test_schwarz_reflection(stack, omega):
    z = 0.6 * LBAR
    g1 = green_trace(stack, z, omega, Q)
    g2 = green_trace(stack, z, -np.conj(omega), Q)
    assert g2.value == pytest.approx(np.conj(g1.value), rel=1e-9)
    assert g2.dvalue_dz == pytest.approx(np.conj(g1.dvalue_dz), rel=1e-9)


def test_off_axis_approaches_both_axes():
    z = LBAR
    st = LayerStack(ABSORBER)
    real = green_trace(st, z, W, Q).value
    near = green_trace(st, z, W + 1e-7j * W, Q).value
    assert near == pytest.approx(real, rel=1e-6)
    imag = green_trace(st, z, 1j * W, Q).value
    near = green_trace(st, z, 1e-7 * W + 1j * W, Q).value
    assert near == pytest.approx(imag, rel=1e-6)


def test_sign_on_imaginary_axis_follows_eps():
    z, xi = 0.5 * LBAR, np.geomspace(1e13, 1e17, 9)
    assert np.all(green_trace_imag_axis(LayerStack(ABSORBER), z, xi, Q).value < 0)
    assert np.all(green_trace_imag_axis(LayerStack(INVERTED), z, xi, Q).value > 0)


def test_mirror_dominance():
    for z in (1e-9, 1e-7, 5e-6):
        xi = np.geomspace(1e12, 3e17, 13)
        m = np.abs(green_trace_imag_axis(MIRROR, z, xi, Q).value)
        for st in (LayerStack(ABSORBER), LayerStack(METAL), LayerStack(INVERTED),
                   LayerStack(METAL, (Layer(ABSORBER, 2e-8),))):
            assert np.all(np.abs(green_trace_imag_axis(st, z, xi, Q).value) <= m * (1 + 1e-12))


def test_imaginary_axis_decay_bounded():
    z = 2e-8
    xi = np.geomspace(1e13, 1e18, 40)
    v = green_trace_imag_axis(LayerStack(METAL), z, xi, Q).value * np.exp(2 * xi * z / C)
    assert np.all(np.isfinite(v))
    # the damping-stripped value falls off like xi^-2 at most, never grows
    assert np.max(np.abs(v[20:])) <= np.max(np.abs(v[:20]))


def test_split_invariance():
    st = LayerStack(METAL, (Layer(ABSORBER, 3e-8),))
    z = 0.4 * LBAR
    tight = QuadratureSpec(rel_tol=1e-13)
    for omega in (W, 1j * W):
        a = green_trace(st, z, omega, tight).value
        b = green_trace(st, z, omega, tight, extra_points=[0.37 * W / C, 2.9 * W / C, 1e8]).value
        assert abs(a - b) < 1e-12 * abs(a)


_FILM = LayerStack(METAL, (Layer(ABSORBER, 3e-8),))


# gain stacks are refused at real frequencies, so they appear on the imaginary axis only
@pytest.mark.parametrize("stack, omega", [
    (MIRROR, 0.8 * W), (MIRROR, 1j * W), (MIRROR, 2e15 + 5e14j),
    (_FILM, 0.8 * W), (_FILM, 1j * W), (_FILM, 2e15 + 5e14j),
    (LayerStack(INVERTED), 1j * W),
])
def test_derivative_matches_finite_difference(stack, omega):
    z = 0.9 * LBAR
    h = 1e-4 * z
    f = lambda zz: green_trace(stack, zz, omega, Q).value
    fd = (f(z + h) - f(z - h)) / (2 * h)
    d = green_trace(stack, z, omega, Q).dvalue_dz
    assert abs(d - fd) < 1e-6 * abs(d)


def test_real_axis_spatial_period():
    from scipy.optimize import brentq
    f = lambda z: green_trace(MIRROR, z, W, Q).value.real
    zs = np.linspace(40 * LBAR, 46 * LBAR, 120)
    v = np.array([f(z) for z in zs])
    roots = [brentq(f, zs[i], zs[i + 1], xtol=1e-15 * LBAR)
             for i in range(len(zs) - 1) if v[i] * v[i + 1] < 0]
    period = 2 * np.mean(np.diff(roots))
    assert period == pytest.approx(np.pi * C / W, rel=1e-2)

# --- gain -------------------------------------------------------------------


def test_gain_stack_refused_at_real_frequency():
    with pytest.raises(GainStackError):
        green_trace(LayerStack(INVERTED), LBAR, 1e16)
    # far from the gain band the inverted medium is (marginally) absorbing
    g = green_trace(LayerStack(INVERTED), LBAR, 1j * 1e16)
    assert not g.amplifying


def test_gain_stack_override_flags_amplification():
    g = green_trace(LayerStack(INVERTED, allow_gain=True), LBAR, 1e16, Q)
    assert g.amplifying and np.isfinite(g.value)
