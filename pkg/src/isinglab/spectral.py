"""Exact spectral analysis of the single-flip dynamics on tiny domains.

Everything here enumerates the full configuration space of a small domain
(at most ~2^20 states), so spectra, semigroups and stationary weights can
be handled exactly:

  * `build_generator` assembles the sparse jump-rate matrix of the
    heat-bath dynamics together with the Gibbs weights;
  * `symmetrize` conjugates the generator by the square root of the
    stationary weights, producing a symmetric matrix with equal spectrum;
  * `decompose_blocks` splits the zero-temperature limit matrix into its
    constant-energy flip classes, whose principal eigenvalues control the
    low-temperature spectral gap (`principal_eigen`, `spectral_gap`);
  * `killed_semigroup_check` verifies, by simulation, that each block
    generates the dynamics killed at the first energy drop;
  * `dirichlet_test_ratio` evaluates the sine-weighted bridge-path
    Dirichlet ratio that upper-bounds the two-dimensional gap, by exact
    dynamic programming (with `dirichlet_ratio_brute` as the exhaustive
    cross-check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import expm
from scipy.sparse.csgraph import connected_components
from scipy.special import expit, logsumexp

from .lattice import Domain

__all__ = [
    "SparseGenerator",
    "build_generator",
    "symmetrize",
    "BlockDecomposition",
    "decompose_blocks",
    "principal_eigen",
    "spectral_gap",
    "KilledCheck",
    "killed_semigroup_check",
    "DirichletReport",
    "dirichlet_test_ratio",
    "dirichlet_ratio_brute",
]

_DENSE_LIMIT = 3000          # dense symmetric eigensolver below this size


# ---------------------------------------------------------------------------
# enumeration of the configuration space
# ---------------------------------------------------------------------------

def _site_graph(dom: Domain, bc: int) -> tuple[np.ndarray, np.ndarray]:
    """Interior adjacency matrix and per-site boundary field.

    The boundary field is the contribution of the frozen exterior spins to
    each site's neighbour sum: bc times the number of exterior neighbours.
    """
    n = dom.n_sites
    adj = np.zeros((n, n), dtype=np.int8)
    for f1, f2 in dom.interior_bonds():
        p1 = int(np.searchsorted(dom.sites, f1))
        p2 = int(np.searchsorted(dom.sites, f2))
        adj[p1, p2] = adj[p2, p1] = 1
    degree = adj.sum(axis=1).astype(np.int64)
    field_ = bc * (2 * dom.ndim - degree)
    return adj, field_


def _enumerate(dom: Domain, bc: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All spin states, their flip energy costs, and their energies.

    Returns (spins, dH, E): spins is (2^n, n) in {-1,+1} with bit x of the
    state index giving the spin at site x; dH[s, x] is the energy change of
    flipping site x in state s; E[s] is the energy including the boundary
    terms.
    """
    n = dom.n_sites
    if n > 20:
        raise ValueError("state space beyond the 2^20 enumeration budget")
    adj, field_ = _site_graph(dom, bc)
    idx = np.arange(1 << n, dtype=np.int64)
    spins = np.empty((1 << n, n), dtype=np.int8)
    for x in range(n):
        spins[:, x] = (2 * ((idx >> x) & 1) - 1).astype(np.int8)
    S = spins.astype(np.int32) @ adj.astype(np.int32) + field_[None, :].astype(np.int32)
    dH = 2 * spins.astype(np.int32) * S
    E = -((spins.astype(np.int64) * (S + field_[None, :]).astype(np.int64)).sum(axis=1)) // 2
    return spins, dH, E


@dataclass
class SparseGenerator:
    """Jump rates of the heat-bath chain on an enumerated state space.

    `rates` is the full generator matrix (row sums zero); `log_weights`
    holds the normalized log stationary weights at finite temperature and
    is None in the zero-temperature limit.
    """

    domain: Domain
    beta: float
    bc: int
    energies: np.ndarray = field(repr=False)
    rates: sparse.csr_matrix = field(repr=False)
    log_weights: np.ndarray | None = field(repr=False, default=None)

    @property
    def n_states(self) -> int:
        return self.rates.shape[0]

    @property
    def weights(self) -> np.ndarray:
        if self.log_weights is None:
            raise ValueError("stationary weights need finite temperature")
        return np.exp(self.log_weights)


def _rate_matrix(n: int, rates: np.ndarray) -> sparse.csr_matrix:
    """Sparse generator from the (2^n, n) table of per-site flip rates."""
    m = 1 << n
    idx = np.arange(m, dtype=np.int64)
    cols = idx[:, None] ^ (np.int64(1) << np.arange(n, dtype=np.int64))[None, :]
    rows = np.repeat(idx, n)
    diag = -rates.sum(axis=1)
    data = np.concatenate([rates.ravel(), diag])
    rc = np.concatenate([rows, idx])
    cc = np.concatenate([cols.ravel(), idx])
    return sparse.csr_matrix((data, (rc, cc)), shape=(m, m))


def build_generator(dom: Domain, beta: float, bc: int = 1) -> SparseGenerator:
    """Exact heat-bath generator; rates match the trajectory simulator.

    The flip rate at site x is the conditional probability that a refresh
    of that site lands on the flipped value, 1/(1 + e^{beta dH}); at
    beta = infinity downhill flips have rate 1 and ties rate 1/2.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if bc not in (-1, 1):
        raise ValueError("boundary condition must be +-1")
    _, dH, E = _enumerate(dom, bc)
    if math.isinf(beta):
        r = np.where(dH < 0, 1.0, np.where(dH == 0, 0.5, 0.0))
        logw = None
    else:
        r = expit(-beta * dH.astype(np.float64))
        lw = -beta * E.astype(np.float64)
        logw = lw - logsumexp(lw)
    return SparseGenerator(domain=dom, beta=beta, bc=bc, energies=E,
                           rates=_rate_matrix(dom.n_sites, r),
                           log_weights=logw)


def symmetrize(gen: SparseGenerator, check_tol: float = 1e-12) -> sparse.csr_matrix:
    """Conjugate the generator into its symmetric form.

    Entry (s, s') is scaled by exp(-beta (E_s - E_s') / 2); only local
    energy differences enter, so the transform is stable at any finite
    temperature.  Raises if the result is not symmetric to `check_tol`.
    """
    if gen.log_weights is None:
        raise ValueError("symmetrization needs finite temperature")
    coo = gen.rates.tocoo()
    scale = np.exp(-0.5 * gen.beta
                   * (gen.energies[coo.row] - gen.energies[coo.col]))
    U = sparse.csr_matrix((coo.data * scale, (coo.row, coo.col)),
                          shape=coo.shape)
    defect = abs(U - U.T).max()
    if defect > check_tol:
        raise AssertionError(f"symmetrization defect {defect}")
    return U


# ---------------------------------------------------------------------------
# zero-temperature block structure
# ---------------------------------------------------------------------------

@dataclass
class BlockDecomposition:
    """Constant-energy flip classes of the zero-temperature matrix.

    Two states share a class iff they are connected by single flips that
    keep the energy fixed; the limit matrix is block diagonal over the
    classes.  `labels` maps state index -> class id, `classes` lists the
    member states of each class.
    """

    domain: Domain
    bc: int
    labels: np.ndarray = field(repr=False)
    classes: list = field(repr=False)
    u_inf: sparse.csr_matrix = field(repr=False)
    energies: np.ndarray = field(repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def all_plus_class(self) -> int:
        return int(self.labels[-1])          # all-plus state has index 2^n - 1

    def block(self, i: int) -> np.ndarray:
        members = self.classes[i]
        return self.u_inf[np.ix_(members, members)].toarray()


def decompose_blocks(dom: Domain, bc: int = 1) -> BlockDecomposition:
    """Split the zero-temperature symmetric matrix into flip classes.

    Off-diagonal entries are 1/2 on energy-preserving single flips and
    zero elsewhere; the diagonal counts -1/2 per tie and -1 per downhill
    flip.  Classes are the connected components of the tie graph.
    """
    n = dom.n_sites
    _, dH, E = _enumerate(dom, bc)
    m = 1 << n
    idx = np.arange(m, dtype=np.int64)
    cols = idx[:, None] ^ (np.int64(1) << np.arange(n, dtype=np.int64))[None, :]
    ties = dH == 0
    rows_t = np.repeat(idx, n)[ties.ravel()]
    cols_t = cols.ravel()[ties.ravel()]
    graph = sparse.csr_matrix((np.ones(rows_t.size, dtype=np.int8),
                               (rows_t, cols_t)), shape=(m, m))
    _, labels = connected_components(graph, directed=False)
    diag = -0.5 * ties.sum(axis=1) - (dH < 0).sum(axis=1)
    data = np.concatenate([np.full(rows_t.size, 0.5), diag])
    rc = np.concatenate([rows_t, idx])
    cc = np.concatenate([cols_t, idx])
    u_inf = sparse.csr_matrix((data, (rc, cc)), shape=(m, m))
    order = np.unique(labels)
    classes = [np.flatnonzero(labels == lab) for lab in order]
    return BlockDecomposition(domain=dom, bc=bc, labels=labels,
                              classes=classes, u_inf=u_inf, energies=E)


def principal_eigen(block: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of -block with its positive eigenvector.

    For non-singleton blocks the eigenvalue is simple and the eigenvector
    can be normalized strictly positive (the block generates a chain with
    everywhere-positive transition kernels); both facts are checked.
    """
    block = np.asarray(block, dtype=np.float64)
    if block.shape[0] == 1:
        return float(-block[0, 0]), np.ones(1)
    vals, vecs = np.linalg.eigh(-block)
    lam = float(vals[0])
    if vals[1] - vals[0] <= 1e-10:
        raise ArithmeticError("principal eigenvalue is degenerate")
    vec = vecs[:, 0]
    if vec.sum() < 0:
        vec = -vec
    if np.any(vec <= 0):
        raise ArithmeticError("principal eigenvector is not positive")
    return lam, vec


def spectral_gap(dom: Domain, beta: float, bc: int = 1) -> float:
    """Second-smallest eigenvalue of minus the generator.

    Computed from the symmetric form (equal spectrum); dense below
    _DENSE_LIMIT states, iterative above.
    """
    gen = build_generator(dom, beta, bc)
    U = symmetrize(gen)
    m = U.shape[0]
    if m <= _DENSE_LIMIT:
        vals = np.linalg.eigvalsh(-U.toarray())
        return float(vals[1])
    from scipy.sparse.linalg import eigsh

    # deterministic start vector with weight in every symmetry sector: a
    # constant v0 would confine Lanczos to the symmetric subspace and can
    # skip the true gap eigenvector entirely
    v0 = np.random.default_rng(0x5eed).standard_normal(m)
    vals = eigsh(-U, k=2, which="SA", tol=1e-10, v0=v0,
                 maxiter=50 * m, return_eigenvectors=False)
    return float(np.sort(vals)[1])


# ---------------------------------------------------------------------------
# the killed semigroup identity
# ---------------------------------------------------------------------------

@dataclass
class KilledCheck:
    value: float         # matrix exponential entry
    estimate: float      # Monte Carlo frequency
    zscore: float
    replicas: int


def killed_semigroup_check(decomp: BlockDecomposition, eta: int, eta_prime: int,
                           t: float, replicas: int = 100_000,
                           seed: int = 0) -> KilledCheck:
    """Block semigroup entry vs simulation of the killed dynamics.

    The matrix route evaluates exp(t * block)[eta, eta']; the stochastic
    route runs the zero-temperature chain from eta and counts paths that
    sit at eta' at time t without ever having lowered the energy.  The
    two agree in distribution, so the z-score stays small.
    """
    if not 0.0 <= t <= 10.0:
        raise ValueError("t must lie in [0, 10]")
    if replicas < 1:
        raise ValueError("need at least one replica")
    lab = decomp.labels
    if lab[eta] != lab[eta_prime]:
        raise ValueError("states belong to different classes")
    members = decomp.classes[int(lab[eta])]
    pos = {int(s): i for i, s in enumerate(members)}
    value = float(expm(t * decomp.block(int(lab[eta])))[pos[eta], pos[eta_prime]])

    n = decomp.domain.n_sites
    _, dH, _ = _enumerate(decomp.domain, decomp.bc)
    idx = np.arange(1 << n, dtype=np.int64)
    flips = idx[:, None] ^ (np.int64(1) << np.arange(n, dtype=np.int64))[None, :]
    kill = dH < 0                                # downhill flip fires at once
    tie = dH == 0
    bit_set = flips | (np.int64(1) << np.arange(n, dtype=np.int64))[None, :]
    bit_clr = bit_set ^ (np.int64(1) << np.arange(n, dtype=np.int64))[None, :]
    next_low = np.where(tie, bit_set, idx[:, None])    # u < 1/2 refreshes to +
    next_high = np.where(tie, bit_clr, idx[:, None])

    rng = np.random.default_rng(seed)
    state = np.full(replicas, eta, dtype=np.int64)
    alive = np.ones(replicas, dtype=bool)
    attempts = rng.poisson(n * t, size=replicas)
    for step in range(int(attempts.max()) if replicas else 0):
        act = np.flatnonzero(alive & (attempts > step))
        if act.size == 0:
            break
        x = rng.integers(0, n, size=act.size)
        u = rng.random(act.size)
        s = state[act]
        dies = kill[s, x]
        alive[act[dies]] = False
        keep = act[~dies]
        xk, uk, sk = x[~dies], u[~dies], s[~dies]
        state[keep] = np.where(uk < 0.5, next_low[sk, xk], next_high[sk, xk])
    hits = int(np.count_nonzero(alive & (state == eta_prime)))
    estimate = hits / replicas
    p = min(max(value, 1.0 / (10.0 * replicas)), 1.0 - 1.0 / (10.0 * replicas))
    se = math.sqrt(p * (1.0 - p) / replicas)
    z = (estimate - value) / se
    return KilledCheck(value=value, estimate=estimate, zscore=z,
                       replicas=replicas)


# ---------------------------------------------------------------------------
# sine-weighted bridge-path Dirichlet ratio
# ---------------------------------------------------------------------------

def _bridge_logweights(L: int) -> np.ndarray:
    """Per-increment log weights of the squared sine test profile.

    Increment positions run x = -L/2 .. L/2-1; column 0 holds the weight
    of a down step, column 1 of an up step.  Down steps on the left half
    pay cos^2(pi x / L), up steps on the right half cos^2(pi (x+1) / L),
    everything else is free.
    """
    xs = np.arange(-L // 2, L // 2)
    w = np.zeros((L, 2))
    left = xs < 0
    w[left, 0] = 2.0 * np.log(np.abs(np.cos(np.pi * xs[left] / L)))
    w[~left, 1] = 2.0 * np.log(np.abs(np.cos(np.pi * (xs[~left] + 1) / L)))
    return w


def _bridge_tables(L: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward/backward log-sum tables over (position, height)."""
    w = _bridge_logweights(L)
    npos, nh = L + 1, L + 1
    off = L // 2                                  # height h stored at h + off
    F = np.full((npos, nh), -np.inf)
    F[0, off] = 0.0
    for p in range(L):
        nxt = np.full(nh, -np.inf)
        nxt[:-1] = np.logaddexp(nxt[:-1], F[p, 1:] + w[p, 0])     # down step
        nxt[1:] = np.logaddexp(nxt[1:], F[p, :-1] + w[p, 1])      # up step
        F[p + 1] = nxt
    B = np.full((npos, nh), -np.inf)
    B[L, off] = 0.0
    for p in range(L - 1, -1, -1):
        prv = np.full(nh, -np.inf)
        prv[1:] = np.logaddexp(prv[1:], B[p + 1, :-1] + w[p, 0])  # down step
        prv[:-1] = np.logaddexp(prv[:-1], B[p + 1, 1:] + w[p, 1])  # up step
        B[p] = prv
    return F, B, w


@dataclass
class DirichletReport:
    L: int
    ratio: float                  # Dirichlet form over squared norm
    scaled: float                 # ratio * L
    positions: np.ndarray         # left-half interior positions x
    peak_ratios: np.ndarray       # P(peak at x) / cos^2(pi x / L)
    valley_ratios: np.ndarray     # P(valley at x) / cos^2(pi (x-1) / L)


def _pair_probability(F, B, w, L, x, first_up: bool) -> float:
    """Weighted probability of the increment pattern (+-,-+) at (x-1, x)."""
    off = L // 2
    p = x - 1 + L // 2                       # table row of position x-1
    if first_up:
        through = F[p, :-2] + w[p, 1] + w[p + 1, 0] + B[p + 2, :-2]
    else:
        through = F[p, 2:] + w[p, 0] + w[p + 1, 1] + B[p + 2, 2:]
    logz = F[L, off]
    return float(np.exp(logsumexp(through) - logz))


def dirichlet_test_ratio(L: int) -> DirichletReport:
    """Dirichlet-to-norm ratio of the sine profile over bridge paths.

    All expectations are taken under the uniform law on +-1 bridge paths
    of length L reweighted by the squared sine profile; the dynamic
    programming is exact in log-domain.  The by-product arrays expose the
    local peak/valley frequencies normalized by the squared cosine, which
    stay bounded as L grows.
    """
    if L < 4 or L > 4096 or L % 2:
        raise ValueError("L must be even with 4 <= L <= 4096")
    F, B, w = _bridge_tables(L)
    off = L // 2
    if not math.isfinite(float(F[L, off])):
        raise ArithmeticError("empty path ensemble")
    xs = np.arange(-L // 2 + 1, 0)
    cos_x = np.cos(np.pi * xs / L)
    cos_xm = np.cos(np.pi * (xs - 1) / L)
    peaks = np.array([_pair_probability(F, B, w, L, x, True) for x in xs])
    valleys = np.array([_pair_probability(F, B, w, L, x, False) for x in xs])
    ratio = float(0.5 * (((cos_x - cos_xm) ** 2 / cos_x ** 2) * peaks).sum()
                  + 0.5 * (((cos_xm - cos_x) ** 2 / cos_xm ** 2) * valleys).sum())
    return DirichletReport(L=L, ratio=ratio, scaled=ratio * L, positions=xs,
                           peak_ratios=peaks / cos_x ** 2,
                           valley_ratios=valleys / cos_xm ** 2)


def dirichlet_ratio_brute(L: int) -> DirichletReport:
    """Same report by exhaustive enumeration of all bridge paths (L <= 16)."""
    if L < 4 or L > 16 or L % 2:
        raise ValueError("brute force limited to even 4 <= L <= 16")
    from itertools import combinations

    w = _bridge_logweights(L)
    xs = np.arange(-L // 2 + 1, 0)
    cos_x = np.cos(np.pi * xs / L)
    cos_xm = np.cos(np.pi * (xs - 1) / L)
    z = 0.0
    peaks = np.zeros(xs.size)
    valleys = np.zeros(xs.size)
    for ups in combinations(range(L), L // 2):
        inc = -np.ones(L, dtype=np.int64)
        inc[list(ups)] = 1
        logwt = float(w[np.arange(L), ((inc + 1) // 2)].sum())
        wt = math.exp(logwt)
        z += wt
        for i, x in enumerate(xs):
            p = x - 1 + L // 2
            if inc[p] == 1 and inc[p + 1] == -1:
                peaks[i] += wt
            elif inc[p] == -1 and inc[p + 1] == 1:
                valleys[i] += wt
    peaks /= z
    valleys /= z
    ratio = float(0.5 * (((cos_x - cos_xm) ** 2 / cos_x ** 2) * peaks).sum()
                  + 0.5 * (((cos_xm - cos_x) ** 2 / cos_xm ** 2) * valleys).sum())
    return DirichletReport(L=L, ratio=ratio, scaled=ratio * L, positions=xs,
                           peak_ratios=peaks / cos_x ** 2,
                           valley_ratios=valleys / cos_xm ** 2)
