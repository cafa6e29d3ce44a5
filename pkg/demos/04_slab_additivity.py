# %% [markdown]
# # A dilute slab of excited atoms: macroscopic force versus atom sum
#
# For a gas slab with small susceptibility the macroscopic Casimir force on the
# slab equals the density-weighted sum of single-atom Casimir-Polder forces.
# The check compares both routes for each part of the force separately.

# %%
from casimir_gain import (PERFECT_MIRROR, AtomModel, DiluteSlab, LayerStack,
                          additivity_check, polarizability, single_oscillator)
from casimir_gain.materials import C, EPS0

omega_a, d2 = 2.4e15, (2.5e-29) ** 2
lbar = C / omega_a
excited = AtomModel.two_level(omega_a, d2, excited=True)
alpha0 = abs(polarizability(excited, 0.0).real)  # static polarizability magnitude
eta = 1e-4 * EPS0 / alpha0  # |chi| about 1e-4

# %%
for name, stack in (("mirror", LayerStack(PERFECT_MIRROR)),
                    ("absorber", LayerStack(single_oscillator(1e16, 1.5e16, 1e14)))):
    slab = DiluteSlab(excited, eta, 0.3 * lbar, 0.4 * lbar)
    r = additivity_check(slab, stack)
    print(f"{name:9s} macro_nr={r.macro_nr:+.5e} micro_nr={r.micro_nr:+.5e} dev={r.dev_nr:.1e}")
    print(f"{'':9s} macro_r ={r.macro_r:+.5e} micro_r ={r.micro_r:+.5e} dev={r.dev_r:.1e}")
