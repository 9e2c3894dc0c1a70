"""Comparing two reparametrizations and counting frequencies per cell.

Run with ``python3 demos/03_ordering_and_packs.py``.
"""

# %% Setup
from igaweyl import FullSymbol, PsiFunction, compute_spectrum, make_exp_convex
from igaweyl.analysis import (
    concave_window,
    ordering_hypothesis_from_family,
    orient_pair,
    pack_counts,
    verify_ordering,
)

p, n = 1, 256
phi1, phi2 = orient_pair(make_exp_convex(2.0, 0.5), make_exp_convex(1.0, 0.5))
print("phi1:", phi1.label(), " phi2:", phi2.label())

# %% Both maps share phi'(0); the first crossing of their derivatives fixes a safe window
lo, hi = ordering_hypothesis_from_family(phi1, phi2, p)
print(f"window of normalized eigenvalues: ({lo:.4f}, {hi:.4f})")

# %% Same-index frequencies of phi1 stay below those of phi2 in the window
psi1 = PsiFunction.build(FullSymbol.build(p, phi1))
psi2 = PsiFunction.build(FullSymbol.build(p, phi2))
s1, s2 = compute_spectrum(p, n, phi1), compute_spectrum(p, n, phi2)
rep = verify_ordering(s1, s2, psi1, psi2, (lo, hi))
print(f"gap min {rep.psi_gap_min:.2e}, pairs {rep.pair_count}, violations {len(rep.violations)}")

# %% Where Psi is concave, frequencies thin out from cell to cell
window = concave_window(phi2)
for n in (512, 2048):
    packs = pack_counts(compute_spectrum(1, n, phi2), window, 8)
    print(f"n={n:4d} counts {packs.counts} -> {packs.monotonic.value}")
