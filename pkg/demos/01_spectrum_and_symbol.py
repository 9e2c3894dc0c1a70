"""Eigenvalues of a reparametrized Laplacian against its symbol.

Run with ``python3 demos/01_spectrum_and_symbol.py``.
"""

# %% Setup
import numpy as np

from igaweyl import FullSymbol, SymbolEp, compute_spectrum, eval_ep, identity, make_exp_convex

# %% Uniform mesh: linear elements have a closed-form spectrum
n = 32
spec = compute_spectrum(1, n, identity())
k = np.arange(1, n)
exact = n**2 * 6 * (1 - np.cos(k * np.pi / n)) / (2 + np.cos(k * np.pi / n))
print(f"p=1 uniform, n={n}: max relative error {np.max(np.abs(spec.eigenvalues - exact) / exact):.2e}")

# %% The normalized eigenvalues sample e_1 at k pi / n
print("first normalized eigenvalues:", np.round(spec.normalized_eigenvalues[:4], 6))
print("e_1(k pi / n):              ", np.round(eval_ep(SymbolEp(1), k[:4] * np.pi / n), 6))

# %% Higher degree brings outliers above the symbol range
for p in (1, 2, 3, 4):
    s = compute_spectrum(p, 64, identity())
    print(f"p={p}: N={s.N} e_p(pi)={SymbolEp(p).max_value:.6f} outliers={s.outlier_count}")

# %% A convex reparametrization stretches the range by 1 / min phi'^2
phi = make_exp_convex(1.0, 0.5)
sym = FullSymbol.build(2, phi)
s = compute_spectrum(2, 128, phi)
print(f"exp convex p=2: range max {sym.max_value:.4f}, top inlier {s.normalized_eigenvalues[~s.outlier_mask][-1]:.4f}")
