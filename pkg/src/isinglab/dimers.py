"""Translation-invariant dimer statistics on the hexagonal lattice.

A probability triple (p_a, p_b, p_c) fixes a unit-perimeter triangle with
angles pi*p_i and side lengths k_i opposite those angles; the k_i weight
the three edge orientations of the hexagonal lattice.  The module exposes

  * the inverse-kernel entries, both as a converged numerical integral
    over the torus (`kinv_quadrature`) and in the closed form available
    on one special row of the lattice (`kinv_closed`);
  * the finite Toeplitz section built from those entries (`build_A`),
    whose eigenvalues are Bernoulli success probabilities for the number
    of occupied edges crossed along a straight transect;
  * variance identities and tail bounds for that edge count
    (`variance_Nn`, `fourier_identity_residual`, `poisson_binomial_tail`);
  * local statistics of finite edge sets (`edge_probability`).

Coordinate conventions.  White and black vertices are indexed by integer
pairs; the white vertex (x, y) has the three black neighbours

    (x, y)      across the "c" edge       weight k_c
    (x, y-1)    across the "a" edge       weight k_a
    (x+1, y)    across the "b" edge       weight k_b

and every inverse-kernel value depends only on the black-minus-white
coordinate difference, written K^{-1}(x, y) below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "DimerSpec",
    "toeplitz_entry",
    "kinv_closed",
    "kinv_quadrature",
    "kinv_torus_trapezoid",
    "build_A",
    "variance_Nn",
    "variance_eigen",
    "fourier_identity_residual",
    "poisson_binomial_tail",
    "edge_probability",
]


# ---------------------------------------------------------------------------
# parameter triple and derived triangle geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimerSpec:
    """Edge-orientation probabilities (p_a, p_b, p_c), positive, summing to 1.

    Derived quantities: the angles theta_i = pi * p_i and the side lengths
    k_i of the unit-perimeter triangle with those angles (law of sines).
    """

    p_a: float
    p_b: float
    p_c: float

    def __post_init__(self):
        for name, p in (("p_a", self.p_a), ("p_b", self.p_b), ("p_c", self.p_c)):
            if not 0.0 < p < 1.0:
                raise ValueError(f"{name} must lie strictly between 0 and 1")
        if abs(self.p_a + self.p_b + self.p_c - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to one")

    @classmethod
    def uniform(cls) -> "DimerSpec":
        return cls(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    @property
    def thetas(self) -> tuple[float, float, float]:
        return (math.pi * self.p_a, math.pi * self.p_b, math.pi * self.p_c)

    @property
    def sides(self) -> tuple[float, float, float]:
        sines = [math.sin(t) for t in self.thetas]
        total = sum(sines)
        return tuple(s / total for s in sines)

    @property
    def k_a(self) -> float:
        return self.sides[0]

    @property
    def k_b(self) -> float:
        return self.sides[1]

    @property
    def k_c(self) -> float:
        return self.sides[2]


# ---------------------------------------------------------------------------
# inverse-kernel entries
# ---------------------------------------------------------------------------

def kinv_closed(n: int, spec: DimerSpec) -> float:
    """Inverse-kernel entry K^{-1}(n, -1) in closed form.

    The row y = -1 admits an elementary antiderivative: the value is
    (-1)^n sin(n pi p_a) / (pi n k_a) for n != 0 and p_a / k_a at n = 0.
    """
    n = int(n)
    if n == 0:
        return spec.p_a / spec.k_a
    return (-1) ** n * math.sin(n * math.pi * spec.p_a) / (math.pi * n * spec.k_a)


def _smooth_piece(x: int, y: int, spec: DimerSpec):
    """Integrand and interval of the residue-reduced 1D integral.

    The inner contour integral has a single simple pole whose position
    crosses the unit circle at angle pi - theta_a; on either side the
    remaining integrand is smooth.  Only one side survives for each sign
    of y, and conjugate symmetry folds the integral onto half the range.
    """
    k_a, k_b, k_c = spec.sides
    split = math.pi - spec.thetas[0]
    if y >= 0:
        lo, hi = 0.0, split

        def f(psi):
            c = k_c + k_b * np.exp(1j * psi)
            return (np.exp(1j * x * psi) * (-k_a) ** y / c ** (y + 1)).real
    else:
        lo, hi = split, math.pi

        def f(psi):
            c = k_c + k_b * np.exp(1j * psi)
            return (np.exp(1j * x * psi) * (-c) ** (-y - 1) * k_a ** y).real
    return f, lo, hi


def kinv_quadrature(x: int, y: int, spec: DimerSpec, tol: float = 1e-9,
                    max_doublings: int = 24) -> float:
    """Inverse-kernel entry K^{-1}(x, y) by converged numerical quadrature.

    The double torus integral is reduced analytically to a smooth 1D
    integral (see `_smooth_piece`) which is evaluated by the trapezoid
    rule under grid doubling until two successive estimates agree within
    `tol`; raises if the budget is exhausted first.
    """
    x, y = int(x), int(y)
    if abs(x) > 1000 or abs(y) > 1000:
        raise ValueError("coordinates beyond the quadrature budget")
    f, lo, hi = _smooth_piece(x, y, spec)
    n = 64
    prev = np.trapezoid(f(np.linspace(lo, hi, n + 1)), dx=(hi - lo) / n)
    for _ in range(max_doublings):
        n *= 2
        cur = np.trapezoid(f(np.linspace(lo, hi, n + 1)), dx=(hi - lo) / n)
        if abs(cur - prev) < tol:
            return float(cur / math.pi)   # half-range fold: 2/(2 pi)
        prev = cur
    raise RuntimeError(f"quadrature did not converge for entry ({x}, {y})")


def kinv_torus_trapezoid(x: int, y: int, spec: DimerSpec, grid: int = 512) -> float:
    """Direct 2D midpoint rule on the torus (coarse cross-check route).

    The raw integrand has integrable poles on the torus, so this route
    converges slowly; it is kept as an independent sanity check at loose
    tolerance and is *not* used by any other operation.
    """
    k_a, k_b, k_c = spec.sides
    shift = math.pi / grid
    phi = np.linspace(-math.pi, math.pi, grid, endpoint=False) + shift
    psi = phi[:, None]
    den = k_c + k_a * np.exp(1j * phi[None, :]) + k_b * np.exp(1j * psi)
    val = np.exp(1j * (x * psi - y * phi[None, :])) / den
    return float(val.real.mean())


# ---------------------------------------------------------------------------
# Toeplitz section and its Bernoulli spectrum
# ---------------------------------------------------------------------------

def toeplitz_entry(m: int, spec: DimerSpec) -> float:
    """Entry a_m of the transect correlation matrix: k_a * K^{-1}(-m, -1)."""
    m = int(m)
    if m == 0:
        return spec.p_a
    return (-1) ** m * math.sin(m * math.pi * spec.p_a) / (math.pi * m)


def _entry_row(n: int, spec: DimerSpec) -> np.ndarray:
    m = np.arange(n, dtype=np.float64)
    row = np.empty(n)
    row[0] = spec.p_a
    if n > 1:
        signs = np.where(m[1:] % 2 == 0, 1.0, -1.0)
        row[1:] = signs * np.sin(m[1:] * math.pi * spec.p_a) / (math.pi * m[1:])
    return row


def build_A(n: int, spec: DimerSpec, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Toeplitz matrix of transect correlations and its eigenvalue profile.

    Returns (A, q) where A is the symmetric n x n Toeplitz section and q
    its ascending eigenvalues.  The eigenvalues are success probabilities
    of independent Bernoulli variables, so they must land in [0, 1]; any
    excursion beyond `tol` raises, smaller ones are clipped.
    """
    if n < 1:
        raise ValueError("matrix size must be at least 1")
    from scipy.linalg import toeplitz

    row = _entry_row(n, spec)
    A = toeplitz(row)
    q = np.linalg.eigvalsh(A)
    if q.min() < -tol or q.max() > 1.0 + tol:
        raise ValueError(f"eigenvalues escape [0,1]: [{q.min()}, {q.max()}]")
    return A, np.clip(q, 0.0, 1.0)


def variance_Nn(n: int, spec: DimerSpec) -> float:
    """Variance of the transect edge count, by the O(n) series form.

    Var = n a_0 (1 - a_0) - sum_{i=1}^{n-1} 2 (n - i) a_i^2; no
    eigendecomposition involved (see `variance_eigen` for the cross-route).
    """
    if n < 1:
        raise ValueError("need at least one edge in the transect")
    row = _entry_row(n, spec)
    a0 = row[0]
    i = np.arange(1, n)
    return float(n * a0 * (1.0 - a0) - (2.0 * (n - i) * row[1:] ** 2).sum())


def variance_eigen(n: int, spec: DimerSpec) -> float:
    """Same variance through the Bernoulli profile: sum q_i (1 - q_i)."""
    _, q = build_A(n, spec)
    return float((q * (1.0 - q)).sum())


def fourier_identity_residual(spec: DimerSpec, cutoff: int) -> float:
    """|a_0 (1 - a_0) - 2 sum_{i<=cutoff} a_i^2|; vanishes as cutoff grows.

    The diagonal entry satisfies a_0 (1 - a_0) = 2 sum_{i>=1} a_i^2
    exactly (a Fourier-series evaluation), which is what caps the
    variance growth at O(log n).
    """
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    i = np.arange(1, cutoff + 1, dtype=np.float64)
    sq = (np.sin(i * math.pi * spec.p_a) / (math.pi * i)) ** 2
    a0 = spec.p_a
    return float(abs(a0 * (1.0 - a0) - 2.0 * math.fsum(sq)))


# ---------------------------------------------------------------------------
# Poisson-binomial tail and its exponential bound
# ---------------------------------------------------------------------------

def poisson_binomial_tail(q, delta: float) -> tuple[float, float]:
    """Exact upper tail of a Bernoulli sum next to its exponential bound.

    For independent successes with probabilities q_i, returns the pair
    (P(N - E[N] >= delta/4), exp(-delta/4 + Var)); the exact probability
    is computed by dynamic-programming convolution of the q_i and never
    exceeds the bound.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.size == 0:
        raise ValueError("q must be a non-empty 1D array")
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise ValueError("success probabilities must lie in [0, 1]")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    pmf = np.ones(1)
    for qi in q:
        pmf = np.convolve(pmf, [1.0 - qi, qi])
    mean = float(q.sum())
    var = float((q * (1.0 - q)).sum())
    threshold = mean + delta / 4.0
    kmin = math.ceil(threshold - 1e-12)
    exact = float(math.fsum(pmf[kmin:])) if kmin <= q.size else 0.0
    bound = math.exp(-delta / 4.0 + var)
    return exact, bound


# ---------------------------------------------------------------------------
# probabilities of finite edge sets
# ---------------------------------------------------------------------------

_EDGE_TYPES = {(0, 0): "c", (0, -1): "a", (1, 0): "b"}


def _edge_weight(kind: str, spec: DimerSpec) -> float:
    return {"a": spec.k_a, "b": spec.k_b, "c": spec.k_c}[kind]


def _kinv_value(x: int, y: int, spec: DimerSpec) -> float:
    if y == -1:
        return kinv_closed(x, spec)
    return kinv_quadrature(x, y, spec)


def edge_probability(edges, spec: DimerSpec) -> float:
    """Probability that every edge of the list is occupied.

    Each edge is a pair ((x, y), (x', y')) of white and black coordinates
    that must be nearest neighbours; the probability is the product of
    the edge weights times the determinant of the inverse-kernel minor.
    """
    edges = list(edges)
    if len(edges) > 12:
        raise ValueError("determinant budget: at most 12 edges")
    if not edges:
        return 1.0
    whites, blacks, weight = [], [], 1.0
    for w, b in edges:
        dx, dy = b[0] - w[0], b[1] - w[1]
        kind = _EDGE_TYPES.get((dx, dy))
        if kind is None:
            raise ValueError(f"edge {w}->{b} does not join nearest neighbours")
        whites.append(w)
        blacks.append(b)
        weight *= _edge_weight(kind, spec)
    m = len(edges)
    minor = np.empty((m, m))
    for i, w in enumerate(whites):
        for j, b in enumerate(blacks):
            minor[i, j] = _kinv_value(b[0] - w[0], b[1] - w[1], spec)
    return float(weight * np.linalg.det(minor))
