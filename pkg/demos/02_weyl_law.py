"""Counting function of the discrete spectrum converging to Psi / pi.

Run with ``python3 demos/02_weyl_law.py``.
"""

# %% Setup
import numpy as np

from igaweyl import PsiFunction, FullSymbol, Rearrangement, eval_psi, eval_xi, make_exp_convex, slope_at_zero
from igaweyl.analysis import estimate_errors, merge_weyl_reports, spectra_for_ladder, weyl_counting

phi = make_exp_convex(1.0, 0.5)
p = 1
psi = PsiFunction.build(FullSymbol.build(p, phi))

# %% Psi rises from 0 to pi over the range of sqrt(omega)
ys = np.linspace(0, psi.max_y, 6)
print("y    :", np.round(ys, 3))
print("Psi/pi:", np.round(eval_psi(psi, ys) / np.pi, 4))

# %% Sup distance between G_n and Psi / pi shrinks with n
ladder = [64, 128, 256, 512]
specs = spectra_for_ladder(p, phi, ladder)
report = merge_weyl_reports([weyl_counting(s, psi) for s in specs])
for n, e in zip(report.n_values, report.sup_errors):
    print(f"n={n:4d} sup |G_n - Psi/pi| = {e:.5f}")

# %% The rearrangement sqrt(xi) predicts each eigenfrequency from its index
re = Rearrangement(psi)
slope = slope_at_zero(psi)
print(f"Psi'(0) = {slope.psi_prime_at_zero:.5f}, gamma = {slope.gamma:.5f}")
for s in specs:
    r = estimate_errors(s, re, slope)
    print(f"n={s.n:4d} max |f_k - sqrt(xi(k/(N+1)))| = {r.abs_error:.4f}")
print("sqrt(xi) at x = 0.25, 0.5, 0.75:", np.round(eval_xi(re, [0.25, 0.5, 0.75]), 4))
