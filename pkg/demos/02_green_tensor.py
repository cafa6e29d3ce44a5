# %% [markdown]
# # Scattering Green tensor of a planar stack
#
# The trace of the scattering Green tensor at coincident points drives every
# atom-surface potential. For a perfect mirror it has a closed form, which makes
# a convenient check of the quadrature.

# %%
import numpy as np

from casimir_gain import PERFECT_MIRROR, Layer, LayerStack, green_trace, single_oscillator
from casimir_gain.materials import C

mirror = LayerStack(PERFECT_MIRROR)
omega = 2.4e15
lbar = C / omega

# %% Imaginary axis against the closed form
for x in (0.01, 1.0, 10.0):
    z = x * C / omega
    g = green_trace(mirror, z, 1j * omega).value
    exact = -(C**2 / (8 * np.pi * omega**2 * z**3)) * np.exp(-2 * x) * (1 + 2 * x + 2 * x * x)
    print(f"x={x:5.2f}  computed={g:+.10e}  closed form={exact:+.10e}")

# %% A metal coated with an absorbing film, layers listed bottom to top
metal = single_oscillator(1e14, 1.4e16, 5e13)
coated = LayerStack(metal, (Layer(single_oscillator(1e16, 1.5e16, 1e14), 3e-8),))
for z in (0.1 * lbar, lbar, 10 * lbar):
    g = green_trace(coated, z, omega)
    print(f"z={z:.3e} m  Tr G1={complex(g.value):.4e}  dTr/dz={complex(g.dvalue_dz):.4e}")

# %% Real frequencies in a gain band are refused unless explicitly allowed
inverted = single_oscillator(1e16, 5e15, 1e14, inverted=True)
g = green_trace(LayerStack(inverted, allow_gain=True), lbar, 1e16)
print("amplifying:", g.amplifying, " value:", complex(g.value))
