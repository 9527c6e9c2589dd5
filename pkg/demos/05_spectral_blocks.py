# Spectral anatomy of the heat-bath generator on a small box: the
# symmetrized form shares its spectrum, the zero-temperature limit
# splits into energy-tie classes, and the per-block decay rates carry a
# killed-semigroup interpretation that a Monte Carlo chain reproduces.

import numpy as np

from isinglab import spectral
from isinglab.lattice import Domain

dom = Domain.rect((2, 3))
gen = spectral.build_generator(dom, beta=1.5)
print(f"2x3 box: {gen.n_states} states, beta = {gen.beta}")

U = spectral.symmetrize(gen)
ev_gen = np.sort(np.linalg.eigvals(gen.rates.toarray()).real)
ev_sym = np.sort(np.linalg.eigvalsh(U.toarray()))
print(f"generator vs symmetric form, spectral gap agreement: "
      f"{np.abs(ev_gen - ev_sym).max():.2e}")
print(f"spectral gap at beta=1.5: {-ev_sym[-2]:.5f}")
print(f"gap by the library routine: {spectral.spectral_gap(dom, 1.5):.5f}")

# At beta = infinity only energy ties survive; states fall into classes.
decomp = spectral.decompose_blocks(dom, bc=1)
sizes = np.bincount(decomp.labels)
print(f"\nzero-temperature classes: {decomp.n_classes}, "
      f"sizes {np.sort(sizes)[::-1][:6].tolist()}...")
plus = decomp.all_plus_class
print(f"all-plus class {plus} is a singleton with block spectrum "
      f"{{{decomp.block(plus)[0, 0]:.0f}}}")

for c in range(3):
    lam, _ = spectral.principal_eigen(decomp.block(c))
    print(f"class {c}: {int(sizes[c])} states, principal decay rate {lam:.4f}")

# The block semigroup is a killed chain: run it by Monte Carlo and compare
# against the matrix exponential entry.
chk = spectral.killed_semigroup_check(decomp, 0, 0, t=0.9,
                                      replicas=40_000, seed=12)
print(f"\nkilled-chain check at t=0.9: exact {chk.value:.5f}, "
      f"MC {chk.estimate:.5f}, z = {chk.zscore:+.2f}")

# Transfer-matrix Dirichlet ratio for the tied-path test functions.
for L in (8, 64, 256):
    rep = spectral.dirichlet_test_ratio(L)
    print(f"L={L:4d}: ratio*L = {rep.scaled:.4f} (bounded by 2)")
