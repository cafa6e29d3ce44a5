# %% [markdown]
# # Casimir-Polder potential of ground-state and excited atoms
#
# The potential splits into a nonresonant part, an integral over imaginary
# frequencies, and a resonant part from the real emission lines of an excited
# atom. Near a mirror the nonresonant part goes as 1/z^3, then 1/z^4 far out,
# while the resonant part oscillates with period pi c / omega.

# %%
import numpy as np

from casimir_gain import PERFECT_MIRROR, AtomModel, LayerStack, cp_total
from casimir_gain.materials import C

omega_a, d2 = 2.4e15, (2.5e-29) ** 2
lbar = C / omega_a
ground = AtomModel.two_level(omega_a, d2)
excited = AtomModel.two_level(omega_a, d2, excited=True)
mirror = LayerStack(PERFECT_MIRROR)

# %% Power laws of the nonresonant part
zs = np.geomspace(1e-3, 1e2, 11) * lbar
u = np.array([cp_total(ground, mirror, z).u_nr for z in zs])
print("local log-slopes:", np.round(np.diff(np.log(-u)) / np.diff(np.log(zs)), 3))

# %% The excited atom: nonresonant part reversed, resonant part oscillating
for z in np.linspace(30, 31.5, 7) * lbar:
    r = cp_total(excited, mirror, z)
    print(f"z/lbar={z / lbar:6.3f}  u_nr={r.u_nr:+.3e} J  u_r={r.u_r:+.3e} J  f_z={r.f_z:+.3e} N")
