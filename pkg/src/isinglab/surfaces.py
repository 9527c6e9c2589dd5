"""Stacked-box surfaces: plane partitions, lattice paths, column dynamics.

A height array v over an nx-by-ny footprint, weakly decreasing in both
directions and squeezed between a floor and a ceiling partition, encodes a
staircase-shaped stack of unit cubes.  The module provides

  * the bijection with bundles of non-crossing +-1 paths (one path per
    vertical level, read off the level sets along anti-diagonals),
  * the single-column random-walk dynamics and the parity-sweep dynamics
    that resample every other column from its conditional distribution,
  * the weighted-sum drift argument: the sine-profile observable contracts
    at rate kappa/2 under the parity sweeps, which yields coalescence-time
    measurements for the extremal grand coupling,
  * a step-by-step equivalence check against the zero-temperature spin
    dynamics on the cube enclosed between floor and ceiling.

Heights are int64 arrays; columns are addressed with 0-based (i, k)
indices; a column's admissible range given its four neighbours is
[max(lower neighbours, floor), min(upper neighbours, ceiling)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _column_kernels as CK
from ._rng import child_seed
from .glauber import heat_bath_update
from .lattice import Domain, SpinConfig

__all__ = [
    "BoxSpec",
    "check_partition",
    "interval_bounds",
    "admissible_interval",
    "local_update",
    "column_resample",
    "partition_to_paths",
    "paths_to_partition",
    "path_tent",
    "resample_mean_identity",
    "enumerate_partitions",
    "partition_code",
    "occupation_sample",
    "drift_rate",
    "drift_weight",
    "DriftReport",
    "wilson_drift",
    "coupling_time",
    "EmbeddingReport",
    "embedding_check",
]


# ---------------------------------------------------------------------------
# the box and its partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxSpec:
    """Footprint, vertical range, and floor/ceiling partitions.

    Columns live on {0..nx-1} x {0..ny-1}; heights take values in
    [zlo-1, zhi] where zlo-1 means "no cube in this column".  `floor` and
    `ceil` are themselves valid partitions with floor <= ceil; every state
    of every dynamics stays between them.
    """

    nx: int
    ny: int
    zlo: int
    zhi: int
    floor: np.ndarray = field(repr=False)
    ceil: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("footprint extents must be >= 1")
        if self.zhi < self.zlo:
            raise ValueError("vertical range is empty")
        for name in ("floor", "ceil"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.shape != (self.nx, self.ny):
                raise ValueError(f"{name} must have shape ({self.nx}, {self.ny})")
            object.__setattr__(self, name, arr)
            if arr.min() < self.zlo - 1 or arr.max() > self.zhi:
                raise ValueError(f"{name} heights leave [zlo-1, zhi]")
            if not _weakly_decreasing(arr):
                raise ValueError(f"{name} is not a valid partition")
        if np.any(self.floor > self.ceil):
            raise ValueError("floor must not exceed ceiling")

    @staticmethod
    def box(nx: int, ny: int, height: int) -> "BoxSpec":
        """Free box: empty floor, full ceiling, levels 1..height."""
        return BoxSpec(nx, ny, 1, height,
                       np.zeros((nx, ny), dtype=np.int64),
                       np.full((nx, ny), height, dtype=np.int64))

    # -- derived geometry ----------------------------------------------------

    @property
    def span(self) -> int:
        """Half the path length: each level path has 2*span unit steps."""
        return self.nx + self.ny

    @property
    def levels(self) -> int:
        return self.zhi - self.zlo + 1

    @property
    def max_gap(self) -> int:
        """Largest columnwise ceiling-floor distance."""
        return int((self.ceil - self.floor).max())

    @property
    def n_columns(self) -> int:
        return self.nx * self.ny

    def empty(self) -> np.ndarray:
        return self.floor.copy()

    def full(self) -> np.ndarray:
        return self.ceil.copy()

    def diag_index(self) -> np.ndarray:
        """Anti-diagonal path position of every column: span - i + k."""
        ii, kk = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        return self.span - ii + kk

    def drift_weights(self) -> np.ndarray:
        """Per-column sine weight g evaluated at the column's path position."""
        return drift_weight(self.diag_index(), self.span)


def _weakly_decreasing(arr: np.ndarray) -> bool:
    return bool(np.all(np.diff(arr, axis=0) <= 0) and np.all(np.diff(arr, axis=1) <= 0))


def check_partition(box: BoxSpec, v: np.ndarray) -> np.ndarray:
    """Validate a height array against the box; returns it as int64."""
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (box.nx, box.ny):
        raise ValueError(f"heights must have shape ({box.nx}, {box.ny})")
    if not _weakly_decreasing(v):
        raise ValueError("heights must be weakly decreasing in both directions")
    if np.any(v < box.floor) or np.any(v > box.ceil):
        raise ValueError("heights leave the floor/ceiling envelope")
    return v


# ---------------------------------------------------------------------------
# admissible intervals and single updates
# ---------------------------------------------------------------------------

def interval_bounds(box: BoxSpec, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Columnwise admissible interval [lo, hi] given all other columns.

    Out-of-range neighbours impose no constraint beyond the floor and the
    ceiling (the exterior of the box is fixed).
    """
    v = np.asarray(v, dtype=np.int64)
    lo = box.floor.copy()
    lo[:-1, :] = np.maximum(lo[:-1, :], v[1:, :])
    lo[:, :-1] = np.maximum(lo[:, :-1], v[:, 1:])
    hi = box.ceil.copy()
    hi[1:, :] = np.minimum(hi[1:, :], v[:-1, :])
    hi[:, 1:] = np.minimum(hi[:, 1:], v[:, :-1])
    return lo, hi


def admissible_interval(box: BoxSpec, v: np.ndarray, column: tuple[int, int]) -> tuple[int, int]:
    """[lo, hi] for one column; see `interval_bounds`."""
    i, k = column
    if not (0 <= i < box.nx and 0 <= k < box.ny):
        raise ValueError("column out of range")
    lo = int(box.floor[i, k])
    if i + 1 < box.nx:
        lo = max(lo, int(v[i + 1, k]))
    if k + 1 < box.ny:
        lo = max(lo, int(v[i, k + 1]))
    hi = int(box.ceil[i, k])
    if i > 0:
        hi = min(hi, int(v[i - 1, k]))
    if k > 0:
        hi = min(hi, int(v[i, k - 1]))
    return lo, hi


def local_update(box: BoxSpec, v: np.ndarray, column: tuple[int, int], u: float) -> np.ndarray:
    """One random-walk step of a column: u < 1/2 proposes down, else up.

    Moves are clamped into the admissible interval (a clamped proposal that
    cannot move leaves the state unchanged); returns a new height array.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    v = check_partition(box, v).copy()
    i, k = column
    lo, hi = admissible_interval(box, v, column)
    if u < 0.5:
        v[i, k] = max(v[i, k] - 1, lo)
    else:
        v[i, k] = min(v[i, k] + 1, hi)
    return v


def _parity_value(parity) -> int:
    if parity in (0, 1):
        return int(parity)
    if parity == "even":
        return 0
    if parity == "odd":
        return 1
    raise ValueError("parity must be 0/1 or 'even'/'odd'")


def column_resample(box: BoxSpec, v: np.ndarray, parity, rng: np.random.Generator) -> np.ndarray:
    """Resample every column of one parity uniformly over its interval.

    Parity of column (i, k) is (i + k) mod 2.  Same-parity columns are
    never adjacent, so given the other parity they are independent and the
    sweep is a genuine sample from the conditional distribution.  One
    uniform variate is consumed per matching column, in raster order.
    """
    par = _parity_value(parity)
    v = check_partition(box, v).copy()
    lo, hi = interval_bounds(box, v)
    ii, kk = np.meshgrid(np.arange(box.nx), np.arange(box.ny), indexing="ij")
    mask = (ii + kk) % 2 == par
    us = rng.random(int(mask.sum()))
    new = lo[mask] + np.minimum(
        (us * (hi[mask] - lo[mask] + 1)).astype(np.int64), hi[mask] - lo[mask])
    v[mask] = new
    return v


# ---------------------------------------------------------------------------
# the path bundle bijection
# ---------------------------------------------------------------------------

def path_tent(box: BoxSpec) -> np.ndarray:
    """Paths of the empty partition: level j follows j + min(x, 2*span - x)."""
    x = np.arange(2 * box.span + 1)
    base = np.minimum(x, 2 * box.span - x)
    levels = np.arange(box.zlo, box.zhi + 1)
    return levels[:, None] + base[None, :]


def partition_to_paths(box: BoxSpec, v: np.ndarray) -> np.ndarray:
    """Level sets as +-1 paths: (levels, 2*span+1) heights.

    Path j starts and ends at j; every cube of the stack at level j pulls
    the path down by 2 at the cube's anti-diagonal position, so larger
    stacks have lower bundles (the order gets reversed).
    """
    v = check_partition(box, v)
    width = 2 * box.span + 1
    diag = box.diag_index()
    phi = path_tent(box)
    for jx, j in enumerate(range(box.zlo, box.zhi + 1)):
        counts = np.bincount(diag[v >= j], minlength=width)
        phi[jx] -= 2 * counts
    return phi


def _diag_cells(box: BoxSpec) -> list[list[tuple[int, int]]]:
    """Columns grouped by path position, each group ordered by increasing i.

    The group order matters: a level set always occupies a prefix of each
    group (staircase shapes cannot skip a cell of an anti-diagonal).
    """
    groups: list[list[tuple[int, int]]] = [[] for _ in range(2 * box.span + 1)]
    for i in range(box.nx):
        for k in range(box.ny):
            groups[box.span - i + k].append((i, k))
    return groups


def paths_to_partition(box: BoxSpec, phi: np.ndarray) -> np.ndarray:
    """Exact inverse of `partition_to_paths`; validates the bundle fully."""
    phi = np.asarray(phi, dtype=np.int64)
    width = 2 * box.span + 1
    if phi.shape != (box.levels, width):
        raise ValueError(f"bundle must have shape ({box.levels}, {width})")
    levels = np.arange(box.zlo, box.zhi + 1)
    if np.any(phi[:, 0] != levels) or np.any(phi[:, -1] != levels):
        raise ValueError("path endpoints must equal their level")
    if np.any(np.abs(np.diff(phi, axis=1)) != 1):
        raise ValueError("path increments must be +-1")
    if box.levels > 1 and not np.all(phi[:-1] < phi[1:]):
        raise ValueError("paths must be strictly ordered between levels")
    deficit = path_tent(box) - phi
    if np.any(deficit < 0) or np.any(deficit % 2 != 0):
        raise ValueError("paths leave the empty-partition envelope")
    counts = deficit // 2
    if np.any(np.diff(counts, axis=0) > 0):
        raise ValueError("level sets must be nested")
    groups = _diag_cells(box)
    cap = np.asarray([len(g) for g in groups])
    if np.any(counts > cap[None, :]):
        raise ValueError("level occupation exceeds anti-diagonal capacity")
    v = np.full((box.nx, box.ny), box.zlo - 1, dtype=np.int64)
    for x, group in enumerate(groups):
        for rank, (i, k) in enumerate(group):
            v[i, k] = box.zlo - 1 + int(np.count_nonzero(counts[:, x] > rank))
    return check_partition(box, v)


# ---------------------------------------------------------------------------
# parity-sweep conditional means
# ---------------------------------------------------------------------------

def resample_mean_identity(box: BoxSpec, v: np.ndarray, x: int) -> tuple[float, float]:
    """Both sides of the conditional-mean identity at path position x.

    Left: the exact expectation of sum_j path_j(x) after resampling the
    columns of x's parity (averaging each column over its interval).
    Right: the midpoint of the neighbouring positions plus one unit of
    compensation for every level pinned at an extremal bundle:

        mean = 1/2 sum_j (phi_j(x-1) + phi_j(x+1)) + #pinned_low - #pinned_high

    where a level is pinned when its two neighbours agree and the extremal
    path at x blocks the free choice.  Exact for every state (no sampling).
    """
    if not 0 < x < 2 * box.span:
        raise ValueError("position must be interior to the path range")
    v = check_partition(box, v)
    # only the columns sitting on position x influence sum_j path_j(x), and
    # their intervals depend on opposite-parity columns alone
    lo, hi = interval_bounds(box, v)
    on_diag = box.diag_index() == x
    base = box.levels * min(x, 2 * box.span - x) + sum(range(box.zlo, box.zhi + 1))
    col_means = (lo[on_diag] + hi[on_diag]) / 2.0
    exact = base - 2.0 * float(np.sum(col_means - (box.zlo - 1)))

    phi = partition_to_paths(box, v)
    upper = partition_to_paths(box, box.floor)   # pointwise largest bundle
    lower = partition_to_paths(box, box.ceil)    # pointwise smallest bundle
    formula = 0.5 * float(np.sum(phi[:, x - 1] + phi[:, x + 1]))
    flat = phi[:, x - 1] == phi[:, x + 1]
    forced_up = flat & (lower[:, x] == phi[:, x - 1] + 1)
    forced_down = flat & (upper[:, x] == phi[:, x - 1] - 1)
    formula += float(np.count_nonzero(forced_up) - np.count_nonzero(forced_down))
    return exact, formula


# ---------------------------------------------------------------------------
# exhaustive enumeration (tiny boxes)
# ---------------------------------------------------------------------------

def enumerate_partitions(box: BoxSpec, limit: int = 100_000) -> list[np.ndarray]:
    """All partitions between floor and ceiling, raster DFS, |states| <= limit.

    The floor being itself a partition, every raster prefix extends to at
    least one full state, so the recursion never dead-ends.
    """
    out: list[np.ndarray] = []
    v = box.floor.copy()
    cols = [(i, k) for i in range(box.nx) for k in range(box.ny)]

    def rec(pos: int) -> None:
        if pos == len(cols):
            out.append(v.copy())
            if len(out) > limit:
                raise ValueError(f"state space exceeds the {limit}-state limit")
            return
        i, k = cols[pos]
        top = int(box.ceil[i, k])
        if i > 0:
            top = min(top, int(v[i - 1, k]))
        if k > 0:
            top = min(top, int(v[i, k - 1]))
        for h in range(int(box.floor[i, k]), top + 1):
            v[i, k] = h
            rec(pos + 1)
        v[i, k] = box.floor[i, k]

    rec(0)
    return out


def partition_code(box: BoxSpec, v: np.ndarray) -> int:
    """Injective int64 encoding of a partition (tiny boxes only)."""
    if box.n_columns * math.log2(box.levels + 1) > 62:
        raise ValueError("encoding overflows int64; box too large")
    offs = (np.asarray(v, dtype=np.int64) - (box.zlo - 1)).ravel()
    powers = (box.levels + 1) ** np.arange(box.n_columns, dtype=np.int64)
    return int(offs @ powers)


def occupation_sample(box: BoxSpec, updates: int, seed: int,
                      dynamics: str = "local", thin: int = 100) -> np.ndarray:
    """Thinned trajectory of state codes under either dynamics.

    `updates` counts single-column steps for the local walk and parity
    sweeps for the column dynamics; one code is recorded every `thin`
    updates.  Start state is the floor.
    """
    if box.n_columns * math.log2(box.levels + 1) > 62:
        raise ValueError("encoding overflows int64; box too large")
    powers = (box.levels + 1) ** np.arange(box.n_columns, dtype=np.int64)
    v = box.floor.copy()
    out = np.empty(updates // thin, dtype=np.int64)
    state = np.uint64(child_seed(np.uint64(seed), np.uint64(0)))
    if dynamics == "local":
        CK.run_local_chain(v, box.floor, box.ceil, np.int64(updates), state,
                           np.int64(thin), out, powers, np.int64(box.zlo - 1))
    elif dynamics == "column":
        CK.run_column_chain(v, box.floor, box.ceil, np.int64(updates), state,
                            np.int64(thin), out, powers, np.int64(box.zlo - 1))
    else:
        raise ValueError("dynamics must be 'local' or 'column'")
    check_partition(box, v)
    return out


# ---------------------------------------------------------------------------
# drift of the sine observable under the parity sweeps
# ---------------------------------------------------------------------------

def drift_rate(span: int) -> float:
    """Contraction rate kappa = 1 - cos(pi / (2*span))."""
    return 1.0 - math.cos(math.pi / (2.0 * span))


def drift_weight(x, span: int):
    """Discrete sine eigenprofile g(x) = sin(pi x / (2*span))."""
    return np.sin(np.pi * np.asarray(x, dtype=np.float64) / (2.0 * span))


@dataclass
class DriftReport:
    times: np.ndarray
    u_mean: np.ndarray
    u_stderr: np.ndarray
    u_start: float
    kappa: float
    decay_ok: bool       # u(t) <= u(0) exp(-kappa t / 2) within 3 sigma
    drift_ok: bool       # paired one-step contraction holds within 3 sigma
    replicas: int


def wilson_drift(box: BoxSpec, replicas: int, horizon: float, seed: int,
                 checkpoints: int = 10) -> DriftReport:
    """Extremal coupling under parity sweeps; tracks the weighted gap.

    Both copies start from the floor and the ceiling and consume identical
    (clock, parity, column-uniform) events, which preserves their order.
    The observable is twice the drift-weighted column gap; its expectation
    contracts at rate kappa/2, checked at the requested checkpoints.
    """
    if replicas < 2:
        raise ValueError("need at least two replicas for error bars")
    times = np.linspace(0.0, float(horizon), checkpoints)
    w = box.drift_weights()
    gaps = np.empty((replicas, checkpoints), dtype=np.float64)
    for r in range(replicas):
        st = np.uint64(child_seed(np.uint64(seed), np.uint64(r)))
        vlo = box.floor.copy()
        vhi = box.ceil.copy()
        CK.run_column_coupled(vlo, vhi, box.floor, box.ceil, w, float(horizon),
                              st, times, gaps[r], False)
        check_partition(box, vlo)
        check_partition(box, vhi)
        if np.any(vlo > vhi):
            raise AssertionError("extremal coupling lost its order")
    kappa = drift_rate(box.span)
    u_mean = gaps.mean(axis=0)
    u_se = gaps.std(axis=0, ddof=1) / math.sqrt(replicas)
    u0 = float(gaps[0, 0])
    bound = u0 * np.exp(-0.5 * kappa * times)
    decay_ok = bool(np.all(u_mean <= bound + 3.0 * u_se + 1e-9))
    shrink = np.exp(-0.5 * kappa * np.diff(times))
    paired = gaps[:, 1:] - gaps[:, :-1] * shrink[None, :]
    p_mean = paired.mean(axis=0)
    p_se = paired.std(axis=0, ddof=1) / math.sqrt(replicas)
    drift_ok = bool(np.all(p_mean <= 3.0 * p_se + 1e-9))
    return DriftReport(times=times, u_mean=u_mean, u_stderr=u_se, u_start=u0,
                       kappa=kappa, decay_ok=decay_ok, drift_ok=drift_ok,
                       replicas=replicas)


def coupling_time(box: BoxSpec, dynamics: str = "local", seed: int = 0,
                  horizon: float | None = None) -> float:
    """First time the floor-started and ceiling-started copies coincide.

    Shared-event grand coupling (order-preserving for both dynamics); the
    coalescence time witnesses an upper bound for mixing from the worst
    initial pair.  Raises if the horizon is exhausted first.
    """
    if np.array_equal(box.floor, box.ceil):
        return 0.0
    if horizon is None:
        horizon = 50.0 * box.span ** 2 * max(box.max_gap, 1) ** 2
    vlo = box.floor.copy()
    vhi = box.ceil.copy()
    w = box.drift_weights()
    st = np.uint64(child_seed(np.uint64(seed), np.uint64(0)))
    empty = np.empty(0, dtype=np.float64)
    if dynamics == "column":
        _, coal, _ = CK.run_column_coupled(vlo, vhi, box.floor, box.ceil, w,
                                           float(horizon), st, empty, empty, True)
    elif dynamics == "local":
        _, coal, _ = CK.run_local_coupled(vlo, vhi, box.floor, box.ceil,
                                          float(horizon), st, empty, empty, True)
    else:
        raise ValueError("dynamics must be 'local' or 'column'")
    if coal < 0.0:
        raise RuntimeError(f"no coalescence before the horizon {horizon}")
    if not np.array_equal(vlo, vhi):
        raise AssertionError("kernel reported coalescence with unequal states")
    check_partition(box, vlo)
    return float(coal)


# ---------------------------------------------------------------------------
# equivalence with the zero-temperature spin dynamics
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingReport:
    events: int
    mismatches: int
    partitions: np.ndarray = field(repr=False)   # heights after each event


def embedding_check(box: BoxSpec, horizon: float, seed: int,
                    max_events: int | None = None) -> EmbeddingReport:
    """Drive spins and heights with the same events; states must agree.

    The spin system lives on the cells strictly between floor and ceiling,
    with boundary +1 on the far/top faces and -1 on the near/bottom faces.
    Each event (cell, uniform) is applied through the zero-temperature
    heat-bath update on the spin side and through the cube add/remove rule
    on the height side; after every event the minus-set is compared cell
    for cell with the cube stack.  `mismatches` stays 0 iff the two
    dynamics are the same process.
    """
    cells = [(i, k, z - box.zlo)
             for i in range(box.nx) for k in range(box.ny)
             for z in range(int(box.floor[i, k]) + 1, int(box.ceil[i, k]) + 1)]
    v = box.floor.copy()
    if not cells:
        return EmbeddingReport(0, 0, v[None].copy())
    dom = Domain.from_sites(np.asarray(cells, dtype=np.int64))

    def bc(coords: np.ndarray) -> np.ndarray:
        out = np.empty(len(coords), dtype=np.int8)
        for n, (i, k, m) in enumerate(coords):
            if i < 0 or k < 0:
                out[n] = -1
            elif i >= box.nx or k >= box.ny:
                out[n] = 1
            elif box.zlo + m <= box.floor[i, k]:
                out[n] = -1
            else:
                out[n] = 1
        return out

    cfg = SpinConfig.filled(dom, 1, bc=bc)
    site_coords = dom.coords(dom.sites)
    site_i, site_k = site_coords[:, 0], site_coords[:, 1]
    site_z = box.zlo + site_coords[:, 2]
    rng = np.random.default_rng(seed)
    n = dom.n_sites
    cap = max_events if max_events is not None else 2 ** 62
    t = 0.0
    events = 0
    mismatches = 0
    history = [v.copy()]
    while events < cap:
        t += rng.exponential() / n
        if t > horizon:
            break
        flat = int(dom.sites[int(rng.integers(n))])
        u = float(rng.random())
        cfg = heat_bath_update(cfg, flat, u, math.inf)
        i, k, m = (int(c) for c in dom.coords(flat))
        z = box.zlo + m
        lo, hi = admissible_interval(box, v, (i, k))
        if z == v[i, k] and u < 0.5 and v[i, k] - 1 >= lo:
            v[i, k] -= 1
        elif z == v[i, k] + 1 and u >= 0.5 and v[i, k] + 1 <= hi:
            v[i, k] += 1
        check_partition(box, v)
        predicted = np.where(site_z <= v[site_i, site_k], -1, 1)
        if not np.array_equal(cfg.spins.astype(np.int64), predicted):
            mismatches += 1
        events += 1
        history.append(v.copy())
    return EmbeddingReport(events=events, mismatches=mismatches,
                           partitions=np.stack(history))
