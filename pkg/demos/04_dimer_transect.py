# Determinantal statistics of a dimer transect.  The number of occupied
# edges crossing a line behaves like a sum of independent Bernoulli
# variables whose success probabilities are eigenvalues of a Toeplitz
# correlation matrix; its variance grows only logarithmically, which is
# the engine behind the concentration bound.

import math

import numpy as np

from isinglab import dimers

spec = dimers.DimerSpec(0.2, 0.3, 0.5)
print(f"edge probabilities {spec.p_a}, {spec.p_b}, {spec.p_c}; "
      f"triangle sides {np.round(spec.sides, 4)}")

# One inverse-kernel entry two ways: elementary closed form on its row,
# and converged quadrature of the reduced contour integral.
for n in (1, 5, 12):
    closed = dimers.kinv_closed(n, spec)
    quad = dimers.kinv_quadrature(n, -1, spec)
    print(f"K^-1({n:2d},-1): closed {closed:+.10f}   "
          f"quadrature {quad:+.10f}   gap {abs(closed-quad):.1e}")

# Variance of the transect count: O(n) series versus eigenvalues.
print("\n   n    Var(N_n)    Var/log n")
for n in (10, 100, 1000, 10000):
    var = dimers.variance_Nn(n, spec)
    print(f"{n:5d}   {var:8.4f}    {var / math.log(n):8.4f}")
series = dimers.variance_Nn(200, spec)
eigen = dimers.variance_eigen(200, spec)
print(f"series vs eigen at n=200: {abs(series - eigen):.2e}")

# The Bernoulli profile gives the exact upper tail by convolution, always
# below the exponential bound exp(-delta/4 + Var).
_, q = dimers.build_A(60, spec)
print("\n delta     exact tail      bound")
for delta in (2.0, 6.0, 12.0, 20.0):
    exact, bound = dimers.poisson_binomial_tail(q, delta)
    print(f"{delta:5.1f}   {exact:12.3e}   {bound:10.3e}")
