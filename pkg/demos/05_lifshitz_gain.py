# %% [markdown]
# # Lifshitz pressure between plates, with and without gain
#
# Two absorbers attract. Replacing one plate by an inverted medium, whose
# eps(i xi) lies below 1, flips the sign of the reflection product on the
# imaginary axis and the plates repel.

# %%
import numpy as np
from scipy.constants import c, hbar

from casimir_gain import (PERFECT_MIRROR, LayerStack, lifshitz_pressure, lifshitz_two_plates,
                          single_oscillator)

absorber = single_oscillator(1e16, 1.5e16, 1e14)
inverted = single_oscillator(1e16, 5e15, 1e14, inverted=True)

# %% Sign of the pressure (positive means repulsion)
for gap in np.geomspace(1e-9, 1e-5, 5):
    p_gain = lifshitz_two_plates(inverted, absorber, gap)[0]
    p_plain = lifshitz_two_plates(inverted.with_inversion(False), absorber, gap)[0]
    print(f"gap={gap:.0e} m  inverted/absorber {p_gain:+.3e} Pa   uninverted {p_plain:+.3e} Pa")

# %% Perfect mirrors reproduce the ideal Casimir pressure
mirror = LayerStack(PERFECT_MIRROR)
for gap in (1e-8, 1e-7, 1e-6):
    p = lifshitz_pressure(mirror, mirror, gap)[0]
    print(f"gap={gap:.0e} m  P/P_ideal = {p / (-np.pi**2 * hbar * c / (240 * gap**4)):.9f}")

# %% A finite eps = 1e8 wall falls short of the mirror by about 0.19 %
wall = single_oscillator(1.0, 1e-3, 1.0, background=1e8)
p = lifshitz_two_plates(wall, wall, 1e-7)[0]
print(f"eps=1e8 at 100 nm: P/P_ideal = {p / (-np.pi**2 * hbar * c / (240 * 1e-7**4)):.6f}")
