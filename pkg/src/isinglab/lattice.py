"""Finite lattice domains, spin configurations, energies, droplet geometry.

The basic objects are a :class:`Domain` (a finite set of Z^d sites together
with its exterior boundary layer) and a :class:`SpinConfig` (an assignment of
+-1 spins to the interior sites, with frozen boundary spins acting as an
external field).  The nearest-neighbour Ising energy with boundary term is

    H(sigma) = - sum_{x~y, x,y interior} sigma_x sigma_y
               - sum_{x interior, y boundary, x~y} sigma_x eta_y

where eta is the frozen boundary layer.  All energies are exact integers.

The 2d geometry helpers (`majority_transform`, `classify_geometry`) analyse the
minus droplet M(sigma) = {x : sigma_x = -1}: its boundary curve, its corner
structure (mountains / valleys / tips) and its stability under the strict
majority rule.  These drive the droplet-erosion dynamics in
:mod:`isinglab.glauber`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import ndimage

__all__ = [
    "Domain",
    "SpinConfig",
    "GeometryReport",
    "core_diamond",
    "energy",
    "energy_delta",
    "neighbor_sum",
    "majority_transform",
    "classify_geometry",
]


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """A finite subset of Z^d plus its exterior boundary layer.

    Sites are stored on a padded bounding-box grid (one halo cell on every
    side) so that every neighbour of an interior site is a valid grid cell.
    `interior` marks the domain itself, `boundary` the exterior cells adjacent
    to it.  Flat (row-major) indices are the common currency; `sites` lists
    the interior cells in row-major order.
    """

    dims: tuple[int, ...]          # padded grid shape
    origin: tuple[int, ...]        # lattice coordinate of grid index (0,...,0)
    interior: np.ndarray           # bool, flat, length prod(dims)
    boundary: np.ndarray           # bool, flat
    sites: np.ndarray              # int64 flat indices of interior cells
    neighbor_steps: np.ndarray     # int64 flat-index offsets, +/- per axis

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_sites(coords: Iterable[Sequence[int]]) -> "Domain":
        """Domain from an explicit list of integer site coordinates."""
        pts = np.asarray(sorted(set(map(tuple, coords))), dtype=np.int64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("need a non-empty list of d-dimensional sites")
        ndim = pts.shape[1]
        lo = pts.min(axis=0) - 1
        hi = pts.max(axis=0) + 1
        dims = tuple(int(h - l + 1) for l, h in zip(lo, hi))
        interior = np.zeros(dims, dtype=bool)
        interior[tuple((pts - lo).T)] = True

        # boundary = exterior cells 4/6-adjacent to the interior
        shell = np.zeros(dims, dtype=bool)
        for ax in range(ndim):
            sl_lo = [slice(None)] * ndim
            sl_hi = [slice(None)] * ndim
            sl_lo[ax] = slice(None, -1)
            sl_hi[ax] = slice(1, None)
            shell[tuple(sl_lo)] |= interior[tuple(sl_hi)]
            shell[tuple(sl_hi)] |= interior[tuple(sl_lo)]
        shell &= ~interior

        flat_int = interior.reshape(-1)
        strides = []
        acc = 1
        for n in reversed(dims):
            strides.append(acc)
            acc *= n
        strides = strides[::-1]
        steps = []
        for ax in range(ndim):
            steps += [strides[ax], -strides[ax]]
        return Domain(
            dims=dims,
            origin=tuple(int(v) for v in lo),
            interior=flat_int,
            boundary=shell.reshape(-1),
            sites=np.flatnonzero(flat_int).astype(np.int64),
            neighbor_steps=np.asarray(steps, dtype=np.int64),
        )

    @staticmethod
    def box(L: int, ndim: int = 2) -> "Domain":
        """Centered box {-L,...,L}^ndim."""
        rng = range(-L, L + 1)
        grids = np.meshgrid(*([list(rng)] * ndim), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return Domain.from_sites(pts)

    @staticmethod
    def rect(shape: Sequence[int]) -> "Domain":
        """Axis-aligned box {0..n1-1} x ... x {0..nd-1}."""
        grids = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return Domain.from_sites(pts)

    @staticmethod
    def ball(r: int, ndim: int = 2) -> "Domain":
        """Euclidean ball {x : |x|_2 <= r} around the origin."""
        rng = np.arange(-r, r + 1)
        grids = np.meshgrid(*([rng] * ndim), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        keep = (pts * pts).sum(axis=1) <= r * r
        return Domain.from_sites(pts[keep])

    @staticmethod
    def diamond(L: int) -> "Domain":
        """2d box {-L..L}^2 cut to the diamond |x1| + |x2| <= L + 1.

        This is the natural arena for droplet erosion: the corners of the
        square that cannot influence the inscribed diamond are removed.
        """
        rng = np.arange(-L, L + 1)
        gx, gy = np.meshgrid(rng, rng, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        keep = np.abs(pts).sum(axis=1) <= L + 1
        return Domain.from_sites(pts[keep])

    # -- geometry helpers ----------------------------------------------------

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_sites(self) -> int:
        return int(self.sites.size)

    def coords(self, flat: np.ndarray | int) -> np.ndarray:
        """Lattice coordinates of flat grid indices."""
        idx = np.unravel_index(np.asarray(flat), self.dims)
        return np.stack(idx, axis=-1) + np.asarray(self.origin)

    def flat_index(self, coord: Sequence[int]) -> int:
        c = np.asarray(coord) - np.asarray(self.origin)
        if np.any(c < 0) or np.any(c >= np.asarray(self.dims)):
            raise ValueError(f"coordinate {coord} outside the padded grid")
        return int(np.ravel_multi_index(tuple(c), self.dims))

    def site_index(self, coord: Sequence[int]) -> int:
        """Position of a coordinate within the `sites` array."""
        flat = self.flat_index(coord)
        pos = int(np.searchsorted(self.sites, flat))
        if pos >= self.sites.size or self.sites[pos] != flat:
            raise ValueError(f"{coord} is not an interior site")
        return pos

    def interior_bonds(self) -> np.ndarray:
        """(nb, 2) array of flat-index pairs of nearest-neighbour interior bonds."""
        G = self.interior.reshape(self.dims)
        flat = np.arange(int(np.prod(self.dims))).reshape(self.dims)
        pairs = []
        for ax in range(self.ndim):
            lo = [slice(None)] * self.ndim
            hi = [slice(None)] * self.ndim
            lo[ax] = slice(None, -1)
            hi[ax] = slice(1, None)
            m = G[tuple(lo)] & G[tuple(hi)]
            pairs.append(
                np.stack([flat[tuple(lo)][m], flat[tuple(hi)][m]], axis=1)
            )
        if not pairs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.concatenate(pairs, axis=0).astype(np.int64)


def core_diamond(dom: Domain, radius: float) -> np.ndarray:
    """Flat indices of interior sites with |x1| + |x2| <= radius.

    Used as the protected core of the erosion dynamics; the conventional
    choice is radius = 0.9 * L on `Domain.diamond(L)`.
    """
    c = dom.coords(dom.sites)
    keep = np.abs(c).sum(axis=1) <= radius
    return dom.sites[keep]


# ---------------------------------------------------------------------------
# spin configurations
# ---------------------------------------------------------------------------

@dataclass
class SpinConfig:
    """Spins on a domain: +-1 on interior cells, frozen values on the boundary.

    `grid` is the combined flat int8 array: interior cells hold the dynamic
    spin, boundary cells hold the frozen boundary spin (0 allowed for free
    boundary), all other cells are 0.  Only interior cells may be mutated;
    the boundary layer is written once at construction time.
    """

    dom: Domain
    grid: np.ndarray  # int8, flat

    @staticmethod
    def filled(dom: Domain, value: int, bc: int | Callable | np.ndarray = 1) -> "SpinConfig":
        """Constant interior configuration with the given boundary condition.

        `bc` is either a single spin (+1, -1, 0) applied to every boundary
        cell, an int8 array over the flat grid (read only at boundary cells),
        or a callable mapping an (n, d) coordinate array to n spin values.
        """
        grid = np.zeros(int(np.prod(dom.dims)), dtype=np.int8)
        grid[dom.sites] = value
        bidx = np.flatnonzero(dom.boundary)
        if callable(bc):
            grid[bidx] = np.asarray(bc(dom.coords(bidx)), dtype=np.int8)
        elif np.ndim(bc) == 0:
            grid[bidx] = int(bc)
        else:
            grid[bidx] = np.asarray(bc, dtype=np.int8).reshape(-1)[bidx]
        return SpinConfig(dom, grid)

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.dom, self.grid.copy())

    @property
    def spins(self) -> np.ndarray:
        """Interior spins in site order."""
        return self.grid[self.dom.sites]

    def set_spins(self, values: np.ndarray) -> None:
        self.grid[self.dom.sites] = np.asarray(values, dtype=np.int8)

    def flip(self, flat: int) -> None:
        if not self.dom.interior[flat]:
            raise ValueError("can only flip interior sites")
        self.grid[flat] = -self.grid[flat]

    def magnetization(self) -> int:
        return int(self.spins.astype(np.int64).sum())

    def minus_count(self) -> int:
        return int(np.count_nonzero(self.spins == -1))

    def minus_mask(self) -> np.ndarray:
        """Bool flat mask of interior minus cells."""
        m = np.zeros(self.grid.size, dtype=bool)
        m[self.dom.sites] = self.grid[self.dom.sites] == -1
        return m


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

def energy(cfg: SpinConfig) -> int:
    """Exact integer Ising energy with the frozen-boundary field term."""
    dom = cfg.dom
    G = cfg.grid.reshape(dom.dims).astype(np.int64)
    I = dom.interior.reshape(dom.dims)
    B = dom.boundary.reshape(dom.dims)
    tot = 0
    for ax in range(dom.ndim):
        lo = [slice(None)] * dom.ndim
        hi = [slice(None)] * dom.ndim
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        gl, gr = G[tuple(lo)], G[tuple(hi)]
        il, ir = I[tuple(lo)], I[tuple(hi)]
        bl, br = B[tuple(lo)], B[tuple(hi)]
        mask = (il & (ir | br)) | (bl & ir)
        tot += int((gl * gr)[mask].sum())
    return -tot


def neighbor_sum(cfg: SpinConfig, flat: int) -> int:
    """Sum of the 2d neighbouring spin values (boundary layer included)."""
    g = cfg.grid
    return int(sum(int(g[flat + s]) for s in cfg.dom.neighbor_steps))


def energy_delta(cfg: SpinConfig, flat: int) -> int:
    """Energy change H(sigma^x) - H(sigma) of flipping the spin at `flat`.

    Equals 2 * sigma_x * S_x with S_x the neighbour sum; always an even
    integer in {-2d,...,2d} doubled.
    """
    if not cfg.dom.interior[flat]:
        raise ValueError("energy_delta is defined for interior sites")
    return 2 * int(cfg.grid[flat]) * neighbor_sum(cfg, flat)


# ---------------------------------------------------------------------------
# majority transform
# ---------------------------------------------------------------------------

def _plus_neighbor_count(grid: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    """Number of +1 neighbours per cell (padded edges see zeros)."""
    G = grid.reshape(dims)
    P = (G == 1).astype(np.int8)
    out = np.zeros_like(P)
    for ax in range(len(dims)):
        lo = [slice(None)] * len(dims)
        hi = [slice(None)] * len(dims)
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        out[tuple(lo)] += P[tuple(hi)]
        out[tuple(hi)] += P[tuple(lo)]
    return out.reshape(-1)


def majority_transform(cfg: SpinConfig) -> SpinConfig:
    """Erase unstable minus sites: flip every interior minus spin with at
    least three plus neighbours, repeatedly, until no such site remains.

    Only minus -> plus flips happen, so the map is monotone increasing and
    reaches its fixed point after finitely many flips; the result does not
    depend on the flip order (the set of eventually-flipped sites is the
    union over all admissible orders, by the usual monotone-closure
    argument), so synchronous sweeps are used.
    """
    out = cfg.copy()
    g = out.grid
    dom = cfg.dom
    while True:
        nplus = _plus_neighbor_count(g, dom.dims)
        unstable = dom.interior & (g == -1) & (nplus >= 3)
        if not unstable.any():
            return out
        g[unstable] = 1


# ---------------------------------------------------------------------------
# droplet geometry
# ---------------------------------------------------------------------------

@dataclass
class GeometryReport:
    """Geometry of the minus droplet of a 2d configuration.

    The droplet region is the union of closed unit squares [x1, x1+1] x
    [x2, x2+1] over interior minus sites, so the extremal coordinates of the
    region are integers.  `regular` is the conjunction of the four droplet
    conditions: the boundary is a single simple closed curve, the perimeter
    is taut (equal to twice the sum of the coordinate spans, i.e. the curve
    has no backtracking wiggles), the protected core is fully minus, and the
    configuration is a fixed point of the strict-majority erosion.
    """

    minus_count: int
    perimeter: int
    components: int
    holes: int
    pinches: int
    simple: bool
    span: tuple[int, ...]
    taut: bool
    majority_stable: bool
    core_covered: bool | None
    mountains: int
    valleys: int
    tips: int
    regular: bool


def classify_geometry(cfg: SpinConfig, core: np.ndarray | None = None) -> GeometryReport:
    """Classify the minus droplet of a 2d configuration.

    Corner counts mix the flip dynamics with curve geometry.  An interior
    minus site is `flippable` when exactly two of its four neighbour values
    (boundary layer included) are +1 and those two are perpendicular; it is
    a `tip` when flipping it hands a strict plus-majority to one of its minus
    neighbours (the flip then erases a two-site finger under the majority
    transform) and a `mountain` otherwise.  `valleys` counts the reflex
    (concave) corners of the droplet boundary curve directly -- 2x2 blocks
    containing exactly three minus cells -- because a reflex corner may be
    hosted by a frozen plus cell of the boundary layer, not only by an
    interior plus site.  For a simple droplet each flippable minus site hosts
    exactly one convex corner, so the rectilinear Euler identity
    (convex - reflex = 4 for a simple closed curve) reads
    mountains + tips - valleys == 4 on majority-stable simple droplets.
    """
    dom = cfg.dom
    if dom.ndim != 2:
        raise ValueError("droplet geometry is a 2d notion")
    g = cfg.grid
    M = cfg.minus_mask().reshape(dom.dims)

    n_minus = int(M.sum())
    # perimeter: droplet/non-droplet adjacencies, counted on the padded grid
    perim = 0
    for ax in range(2):
        lo = [slice(None)] * 2
        hi = [slice(None)] * 2
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        a, b = M[tuple(lo)], M[tuple(hi)]
        perim += int(np.count_nonzero(a != b))
    # faces on the outer edge of the padded grid cannot occur (halo is exterior)

    four = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    _, ncomp = ndimage.label(M, structure=four)
    # complement labelled with 8-connectivity (Jordan pairing with the
    # 4-connected droplet); components not touching the grid edge are holes
    comp, ncomp_bg = ndimage.label(~M, structure=np.ones((3, 3), dtype=int))
    edge_labels = set(np.unique(comp[0, :])) | set(np.unique(comp[-1, :])) \
        | set(np.unique(comp[:, 0])) | set(np.unique(comp[:, -1]))
    holes = int(ncomp_bg - len(edge_labels - {0}))

    # pinch points: 2x2 checkerboards where the curve would cross itself
    a = M[:-1, :-1]; b = M[1:, 1:]; c = M[1:, :-1]; d = M[:-1, 1:]
    pinches = int(np.count_nonzero(a & b & ~c & ~d) + np.count_nonzero(c & d & ~a & ~b))

    simple = (n_minus > 0) and (ncomp == 1) and (holes == 0) and (pinches == 0)

    if n_minus:
        rows = np.flatnonzero(M.any(axis=1))
        cols = np.flatnonzero(M.any(axis=0))
        span = (int(rows[-1] - rows[0] + 1), int(cols[-1] - cols[0] + 1))
    else:
        span = (0, 0)
    taut = n_minus > 0 and perim == 2 * (span[0] + span[1])

    stable_cfg = majority_transform(cfg)
    majority_stable = bool(np.array_equal(stable_cfg.grid, cfg.grid))

    if core is None:
        core_covered: bool | None = None
    else:
        core_covered = bool(np.all(g[np.asarray(core)] == -1))

    # reflex corners of the curve: 2x2 blocks with exactly three minus cells
    blocks = (M[:-1, :-1].astype(np.int8) + M[1:, :-1] + M[:-1, 1:] + M[1:, 1:])
    valleys = int(np.count_nonzero(blocks == 3))

    # flippable minus sites: exactly two plus and two minus neighbours,
    # the plusses perpendicular
    G = g.reshape(dom.dims)
    I = dom.interior.reshape(dom.dims)
    P = (G == 1)
    N = (G == -1)
    up, dn = np.zeros_like(P), np.zeros_like(P)
    lf, rt = np.zeros_like(P), np.zeros_like(P)
    up[1:, :] = P[:-1, :]; dn[:-1, :] = P[1:, :]
    lf[:, 1:] = P[:, :-1]; rt[:, :-1] = P[:, 1:]
    num_plus = up.astype(np.int8) + dn + lf + rt
    num_minus = _plus_neighbor_count((-g).astype(np.int8), dom.dims).reshape(dom.dims)
    opposite = (up & dn) | (lf & rt)
    flippable_minus = N & I & (num_plus == 2) & (num_minus == 2) & ~opposite

    # tip: some interior minus neighbour already has >= 2 plus neighbours
    # (it gains a strict majority when the corner flips)
    armed = N & I & (num_plus >= 2)
    near_armed = np.zeros_like(armed)
    near_armed[1:, :] |= armed[:-1, :]; near_armed[:-1, :] |= armed[1:, :]
    near_armed[:, 1:] |= armed[:, :-1]; near_armed[:, :-1] |= armed[:, 1:]
    tips = int(np.count_nonzero(flippable_minus & near_armed))
    mountains = int(np.count_nonzero(flippable_minus & ~near_armed))

    regular = bool(simple and taut and majority_stable and (core_covered is not False))
    return GeometryReport(
        minus_count=n_minus,
        perimeter=perim,
        components=int(ncomp),
        holes=holes,
        pinches=pinches,
        simple=simple,
        span=span,
        taut=taut,
        majority_stable=majority_stable,
        core_covered=core_covered,
        mountains=mountains,
        valleys=valleys,
        tips=tips,
        regular=regular,
    )
