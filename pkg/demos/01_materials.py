# %% [markdown]
# # Permittivity models with gain
#
# A Lorentz oscillator with its inversion flag set describes an amplifying
# medium: Im eps(omega) turns negative. On the imaginary
# frequency axis the permittivity stays real, and for a fully inverted medium
# it drops below the background value.

# %%
import numpy as np

from casimir_gain import gain_windows, kk_check, single_oscillator

absorber = single_oscillator(1e16, 1.5e16, 1e14)
inverted = single_oscillator(1e16, 5e15, 1e14, inverted=True)

# %% Real axis: the sign of Im eps tells absorption from amplification
for w in (5e15, 9.9e15, 1e16, 1.01e16, 2e16):
    print(f"omega={w:8.2e}  absorber Im eps={absorber.epsilon(w + 0j).imag:+.3e}"
          f"  inverted Im eps={inverted.epsilon(w + 0j).imag:+.3e}")

# %% Where does it amplify? A fully inverted medium does so at every frequency
# scanned, so the window spans the whole search range. Mixed with an ordinary
# metal-like response, gain survives only close to the inverted line.
from casimir_gain import LorentzOscillator, PermittivityModel

mixed = PermittivityModel((LorentzOscillator(1e14, 5e15, 1e13),
                           LorentzOscillator(5e15, 1e15, 5e13, inverted=True)))
for name, m in (("inverted", inverted), ("mixed", mixed)):
    for win in gain_windows(m):
        print(f"{name:8s} gain window: {win.lo:.4e} .. {win.hi:.4e} rad/s")

# %% Imaginary axis: real, and below 1 for the inverted medium
xi = np.geomspace(1e13, 1e18, 6)
print(np.column_stack([xi, absorber.epsilon(1j * xi).real, inverted.epsilon(1j * xi).real]))

# %% Kramers-Kronig holds for gain media too
for m in (absorber, inverted):
    print(f"KK deviation at xi=1e16: {kk_check(m, 1e16).deviation:.2e}")
