"""Continuous-time heat-bath dynamics at inverse temperature beta <= inf.

Every site of the domain carries an independent rate-1 Poisson clock; when a
clock rings the spin is resampled from the conditional Gibbs distribution
given its neighbours (boundary layer included):

    pi(+1 | S) = e^{beta S} / (e^{beta S} + e^{-beta S}),   S = neighbour sum.

At beta = inf this degenerates to "align with the majority, fair coin on
ties", so the energy never increases along a trajectory.  All chains are
driven by the threshold form "new spin = +1 iff u < pi(+1)", which makes a
shared (time, site, u) event stream a monotone grand coupling: sitewise
order between configurations (and between boundary conditions) is preserved
pathwise.

The module also hosts the erosion variant of the beta = inf dynamics on the
diamond-truncated box: after every flip the strict-majority transform is
applied and the run freezes at the first time the minus droplet no longer
covers the protected core and its neighbour shell.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from ._rng import child_seed
from .lattice import (
    Domain,
    GeometryReport,
    SpinConfig,
    classify_geometry,
    core_diamond,
    energy,
)

__all__ = [
    "flip_probability",
    "heat_bath_update",
    "TrajectorySummary",
    "HittingRecord",
    "simulate",
    "grand_coupling_simulate",
    "CouplingResult",
    "tau_plus",
    "TauSample",
    "tmix_inf_quantile",
    "beta_compare",
    "DisagreementReport",
    "modified_2d_simulate",
    "ModifiedRunReport",
    "GoodSetViolation",
]

DEFAULT_QUANTILE_EPS = 1.0 / (2.0 * math.e)


# ---------------------------------------------------------------------------
# single update
# ---------------------------------------------------------------------------

def flip_probability(S: int, beta: float) -> float:
    """pi(+1 | neighbour sum S) for the heat-bath update."""
    if beta == math.inf:
        return 1.0 if S > 0 else (0.0 if S < 0 else 0.5)
    if beta <= 0:
        raise ValueError("beta must be positive (use math.inf for zero temperature)")
    return 1.0 / (1.0 + math.exp(-2.0 * beta * S))


def heat_bath_update(cfg: SpinConfig, flat: int, u: float, beta: float) -> SpinConfig:
    """One heat-bath refresh at the given interior site; returns a new config.

    The update is monotone both in `u` (threshold form) and in the
    neighbour configuration, which is what makes identical-u couplings
    order-preserving.
    """
    if not cfg.dom.interior[flat]:
        raise ValueError("heat-bath updates act on interior sites only")
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    S = int(sum(int(cfg.grid[flat + s]) for s in cfg.dom.neighbor_steps))
    out = cfg.copy()
    out.grid[flat] = 1 if u < flip_probability(S, beta) else -1
    return out


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class HittingRecord:
    tau_plus: float | None   # None = not reached before the horizon
    events: int
    final_hash: str

    @property
    def censored(self) -> bool:
        return self.tau_plus is None


@dataclass
class TrajectorySummary:
    times: np.ndarray
    magnetization: np.ndarray
    minus: np.ndarray
    energy: np.ndarray
    end_time: float
    hitting: HittingRecord
    energy_violations: int
    final: SpinConfig


def _run_args(cfg: SpinConfig):
    return cfg.grid, cfg.dom.sites, cfg.dom.neighbor_steps


def simulate(cfg: SpinConfig, beta: float, horizon: float, seed: int,
             sample_times: np.ndarray | None = None,
             max_events: int | None = None,
             stop_at_plus: bool = False) -> TrajectorySummary:
    """Event-driven run from `cfg` up to the time horizon.

    Observables (magnetization, minus-site count, energy) are sampled on
    `sample_times`; the hitting time of the all-plus configuration is always
    tracked.  Deterministic given (cfg, beta, horizon, seed).  At beta = inf
    the energy along the trajectory is non-increasing; any violation would
    be counted in `energy_violations` (always 0, kept as a tripwire).
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    st = np.asarray([] if sample_times is None else sample_times, dtype=np.float64)
    if st.size and np.any(np.diff(st) < 0):
        raise ValueError("sample_times must be sorted")
    out = cfg.copy()
    mag = np.zeros(st.size, dtype=np.int64)
    mns = np.zeros(st.size, dtype=np.int64)
    ene = np.zeros(st.size, dtype=np.int64)
    cap = np.int64(max_events if max_events is not None else 2**62)
    tau, t_end, events, viol, _ = K.run_simulate(
        *_run_args(out), float(beta), float(horizon), cap,
        np.uint64(seed), st, mag, mns, ene, np.int64(energy(cfg)),
        stop_at_plus,
    )
    rec = HittingRecord(
        tau_plus=None if tau < 0 else float(tau),
        events=int(events),
        final_hash=hashlib.sha256(out.grid.tobytes()).hexdigest()[:16],
    )
    return TrajectorySummary(times=st, magnetization=mag, minus=mns, energy=ene,
                             end_time=float(t_end), hitting=rec,
                             energy_violations=int(viol), final=out)


# ---------------------------------------------------------------------------
# grand coupling
# ---------------------------------------------------------------------------

@dataclass
class CouplingResult:
    finals: list[SpinConfig]
    order_violations: np.ndarray   # per monitored pair
    coalescence: np.ndarray        # per monitored pair; nan = not coalesced
    end_time: float
    events: int


def grand_coupling_simulate(initials: list[SpinConfig], beta: float,
                            horizon: float, seed: int,
                            pairs: list[tuple[int, int]] | None = None,
                            max_events: int | None = None) -> CouplingResult:
    """Run every copy on one shared (time, site, u) event stream.

    `pairs` lists (lower, upper) indices whose sitewise order is asserted
    after every event; default is consecutive pairs.  Copies may carry
    different boundary layers (ordered boundary fields couple the same way).
    """
    if not initials:
        raise ValueError("need at least one initial configuration")
    dom = initials[0].dom
    for c in initials[1:]:
        if c.dom.dims != dom.dims or c.dom.n_sites != dom.n_sites:
            raise ValueError("all coupled copies must share one domain")
    grids = np.stack([c.grid.copy() for c in initials], axis=0)
    if pairs is None:
        pairs = [(i, i + 1) for i in range(len(initials) - 1)]
    parr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    viol = np.zeros(parr.shape[0], dtype=np.int64)
    coal = np.zeros(parr.shape[0], dtype=np.float64)
    cap = np.int64(max_events if max_events is not None else 2**62)
    t_end, events = K.run_grand_coupling(
        grids, dom.sites, dom.neighbor_steps, float(beta), float(horizon),
        cap, np.uint64(seed), parr, viol, coal,
    )
    finals = [SpinConfig(c.dom, grids[i].copy()) for i, c in enumerate(initials)]
    coal = np.where(coal < 0, np.nan, coal)
    return CouplingResult(finals=finals, order_violations=viol,
                          coalescence=coal, end_time=float(t_end),
                          events=int(events))


# ---------------------------------------------------------------------------
# hitting times and the mixing-time quantile
# ---------------------------------------------------------------------------

@dataclass
class TauSample:
    values: np.ndarray      # tau_plus per replica; nan where censored
    censored: np.ndarray    # bool per replica
    horizon: float
    events: np.ndarray
    energy_violations: int = 0   # applied energy-raising flips at beta=inf

    @property
    def uncensored(self) -> np.ndarray:
        return self.values[~self.censored]


def tau_plus(dom: Domain, replicas: int, seed: int, beta: float = math.inf,
             horizon: float | None = None,
             max_events: int | None = None) -> TauSample:
    """Hitting time of the all-plus state from all-minus, all-plus boundary.

    Replica r consumes the child stream derived from (seed, r), so the
    sample is reproducible and independent of batching.
    """
    cfg = SpinConfig.filled(dom, -1, bc=1)
    n = dom.n_sites
    if horizon is None:
        # comfortably above the diffusive hitting scale for both d=2 and d=3
        side = max(int(round(n ** (1.0 / dom.ndim))), 2)
        horizon = 50.0 * side * side
    cap = np.int64(max_events if max_events is not None else 2**62)
    out_tau = np.zeros(replicas, dtype=np.float64)
    out_ev = np.zeros(replicas, dtype=np.int64)
    viol = K.run_tau_batch(cfg.grid, dom.sites, dom.neighbor_steps, float(beta),
                           float(horizon), cap, np.uint64(seed),
                           np.int64(replicas), out_tau, out_ev)
    censored = out_tau < 0
    values = np.where(censored, np.nan, out_tau)
    if censored.all() and replicas > 0 and n > 0:
        raise RuntimeError("every replica hit the horizon; raise it")
    return TauSample(values=values, censored=censored, horizon=float(horizon),
                     events=out_ev, energy_violations=int(viol))


def tmix_inf_quantile(dom: Domain, replicas: int, seed: int,
                      eps: float = DEFAULT_QUANTILE_EPS,
                      horizon: float | None = None) -> float:
    """Empirical inf{t : P(tau_plus > t) <= eps} from a replica sample.

    With the all-plus target being the unique ground state at beta = inf,
    this hitting-time quantile is the natural mixing-time proxy; the default
    eps = 1/(2e) makes the single-site answer exactly 1 + ln 2.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    sample = tau_plus(dom, replicas, seed, horizon=horizon)
    if sample.censored.any():
        # censored values exceed the horizon; the quantile is only valid if
        # it falls below the horizon
        if np.mean(sample.censored) > eps:
            raise RuntimeError("too many censored replicas for this quantile")
    vals = np.where(sample.censored, np.inf, sample.values)
    vals = np.sort(vals)
    k = int(np.ceil((1.0 - eps) * vals.size)) - 1
    k = min(max(k, 0), vals.size - 1)
    out = vals[k]
    if not np.isfinite(out):
        raise RuntimeError("quantile fell in the censored region")
    return float(out)


# ---------------------------------------------------------------------------
# finite beta vs zero temperature on one stream
# ---------------------------------------------------------------------------

@dataclass
class DisagreementReport:
    first_disagreement: float | None
    disagreeing_sites: int
    fraction: float
    end_time: float
    events: int


def beta_compare(dom: Domain, beta: float, horizon: float, seed: int,
                 bc: int = 1, initial: int = -1,
                 max_events: int | None = None) -> DisagreementReport:
    """Couple the finite-beta and beta=inf chains through identical events.

    Both start from the same configuration; the report gives the first time
    the two interior configurations differ and the disagreement fraction at
    the horizon.  With beta large the chains typically agree for a long
    time (the rates differ only by e^{-O(beta)}).
    """
    if not math.isfinite(beta):
        raise ValueError("beta must be finite; the reference chain is beta=inf")
    a = SpinConfig.filled(dom, initial, bc=bc)
    b = SpinConfig.filled(dom, initial, bc=bc)
    cap = np.int64(max_events if max_events is not None else 2**62)
    first, diff, t_end, events = K.run_beta_compare(
        a.grid, b.grid, dom.sites, dom.neighbor_steps, float(beta),
        float(horizon), cap, np.uint64(seed),
    )
    return DisagreementReport(
        first_disagreement=None if first < 0 else float(first),
        disagreeing_sites=int(diff),
        fraction=float(diff) / max(dom.n_sites, 1),
        end_time=float(t_end),
        events=int(events),
    )


# ---------------------------------------------------------------------------
# erosion dynamics on the truncated diamond
# ---------------------------------------------------------------------------

class GoodSetViolation(AssertionError):
    """A visited state of the erosion dynamics left the regular-droplet set."""


@dataclass
class ModifiedRunReport:
    L: int
    freeze_time: float | None     # None = horizon hit before freezing
    minus_initial: int
    minus_final: int
    change_times: list[float] = field(repr=False)
    minus_series: list[int] = field(repr=False)
    events: int = 0
    checked_states: int = 0

    @property
    def minus_drop(self) -> int:
        return self.minus_initial - self.minus_final


def modified_2d_simulate(L: int, seed: int, frac: float = 0.9,
                         horizon: float | None = None,
                         check_every: int = 1,
                         max_events: int | None = None) -> ModifiedRunReport:
    """Erosion run: heat-bath at beta=inf followed by the majority cascade.

    Starts all-minus on the diamond-truncated box with all-plus boundary.
    The run freezes at the first time the minus droplet fails to cover the
    protected diamond (radius frac*L) together with its neighbour shell.
    Every `check_every`-th visited state (and always the frozen one) is
    classified; leaving the regular-droplet set raises GoodSetViolation.
    """
    dom = Domain.diamond(L)
    cfg = SpinConfig.filled(dom, -1, bc=1)
    core = core_diamond(dom, frac * L)
    # protected set: core plus its interior neighbour shell
    cover = np.zeros(cfg.grid.size, dtype=np.bool_)
    cover[core] = True
    for s in dom.neighbor_steps:
        nb = core + s
        keep = dom.interior[nb]
        cover[nb[keep]] = True
    cover_idx = np.flatnonzero(cover)

    if horizon is None:
        horizon = 50.0 * L * L
    cap = np.int64(max_events if max_events is not None else 2**62)
    stack = np.zeros(dom.n_sites + 8, dtype=np.int64)
    state = child_seed(np.uint64(seed), np.uint64(0))
    t = 0.0
    minus = dom.n_sites
    missing = int(np.count_nonzero(cfg.grid[cover_idx] != -1))
    change_times: list[float] = []
    minus_series: list[int] = []
    events = 0
    checked = 0
    freeze: float | None = None
    n_changes = 0

    def _check(tag: float) -> None:
        nonlocal checked
        rep = classify_geometry(cfg, core=core)
        checked += 1
        if not rep.regular:
            raise GoodSetViolation(
                f"state at t={tag:.6g} (L={L}) left the regular set: {rep}")
        if not (rep.mountains + rep.tips - rep.valleys == 4 and rep.tips <= 8):
            raise GoodSetViolation(
                f"corner identity failed at t={tag:.6g} (L={L}): {rep}")

    _check(0.0)
    while True:
        t, state, minus, missing, status, done = K.run_modified_2d(
            cfg.grid, dom.interior, dom.sites, dom.neighbor_steps, cover,
            np.int64(minus), np.int64(missing), float(t), np.uint64(state),
            float(horizon), cap, stack)
        events += int(done)
        if status == 0:
            break
        n_changes += 1
        change_times.append(float(t))
        minus_series.append(int(minus))
        if status == 2:
            freeze = float(t)
            _check(t)
            break
        if check_every and n_changes % check_every == 0:
            _check(t)

    return ModifiedRunReport(
        L=L,
        freeze_time=freeze,
        minus_initial=dom.n_sites,
        minus_final=int(minus),
        change_times=change_times,
        minus_series=minus_series,
        events=events,
        checked_states=checked,
    )
