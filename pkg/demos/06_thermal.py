# %% [markdown]
# # Finite temperature
#
# At temperature T the imaginary-frequency integral becomes a Matsubara sum.
# Close to the surface nothing changes, while at micrometre distances the
# static m = 0 term takes over and the potential grows well beyond its
# zero-temperature value.

# %%
import numpy as np

from casimir_gain import (PERFECT_MIRROR, AtomModel, LayerStack, cp_nonresonant,
                          cp_nonresonant_thermal)

atom = AtomModel.two_level(2.4e15, (2.5e-29) ** 2)
mirror = LayerStack(PERFECT_MIRROR)

# %%
for z in np.geomspace(1e-8, 1e-5, 7):
    u0 = cp_nonresonant(atom, mirror, z)[0]
    uT = cp_nonresonant_thermal(atom, mirror, z, 300.0)[0]
    print(f"z={z:.1e} m  U(300 K)/U(0) - 1 = {uT / u0 - 1:+.3e}")
