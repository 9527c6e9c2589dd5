"""Experiment dispatch, tidy result tables, and scaling fits.

Every experiment reduces to rows (L, replica, observable, value, sigma);
the replica column doubles as the site index for profile-shaped output
(heat and coldyn) and as the block index for spectrum output.  Seeds for
individual sizes and replicas are derived from the config seed with the
same splitting scheme the simulation kernels use, so tables are
reproducible regardless of batching.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__, diffusion, dimers, glauber, spectral
from .._rng import child_seed
from ..lattice import Domain, SpinConfig
from .config import BudgetError, ExperimentConfig

__all__ = ["Row", "ResultTable", "run_experiment", "ScalingFit", "scaling_fit"]

Row = tuple[int, int, str, float, float]     # L, replica, observable, value, sigma

_NAN = float("nan")


@dataclass(eq=False)
class ResultTable:
    experiment: str
    seed: int
    version: str
    config_hash: str
    rows: list[Row] = field(default_factory=list)

    def observable(self, name: str) -> list[Row]:
        return [r for r in self.rows if r[2] == name]

    def values(self, name: str, L: int | None = None) -> np.ndarray:
        picked = [r[3] for r in self.rows
                  if r[2] == name and (L is None or r[0] == L)]
        return np.asarray(picked, dtype=np.float64)

    def sizes(self) -> list[int]:
        return sorted({r[0] for r in self.rows})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultTable):
            return NotImplemented
        if (self.experiment, self.seed, self.version, self.config_hash) != \
                (other.experiment, other.seed, other.version, other.config_hash):
            return False
        if len(self.rows) != len(other.rows):
            return False
        for a, b in zip(self.rows, other.rows):
            if a[:3] != b[:3]:
                return False
            for x, y in ((a[3], b[3]), (a[4], b[4])):
                if not (x == y or (math.isnan(x) and math.isnan(y))):
                    return False
        return True


def _seed_for(seed: int, tag: int) -> int:
    """Stable per-size substream seed (re-uses the kernel splitting)."""
    return int(child_seed(np.uint64(seed), np.uint64(tag)))


def _budget(condition: bool, message: str) -> None:
    if condition:
        raise BudgetError(message)


# ---------------------------------------------------------------------------
# per-experiment drivers
# ---------------------------------------------------------------------------

def _run_tau_plus(cfg: ExperimentConfig, rows: list[Row]) -> None:
    for L in cfg.sizes:
        _budget(L ** cfg.ndim > 10_000, f"tau-plus domain {L}^{cfg.ndim} too large")
        dom = Domain.rect((L,) * cfg.ndim)
        sample = glauber.tau_plus(dom, cfg.replicas, _seed_for(cfg.seed, L),
                                  beta=cfg.beta)
        if math.isinf(cfg.beta) and sample.energy_violations:
            raise ArithmeticError(
                f"energy-raising flips at beta=inf (L={L}): "
                f"{sample.energy_violations}")
        for r in range(cfg.replicas):
            rows.append((L, r, "tau_plus", float(sample.values[r]), _NAN))


def _run_coupling(cfg: ExperimentConfig, rows: list[Row]) -> None:
    for L in cfg.sizes:
        _budget(L ** cfg.ndim > 10_000, f"coupling domain {L}^{cfg.ndim} too large")
        dom = Domain.rect((L,) * cfg.ndim)
        horizon = cfg.t if cfg.t is not None else 10.0 * L * L
        lo = SpinConfig.filled(dom, -1, bc=1)
        hi = SpinConfig.filled(dom, +1, bc=1)
        for r in range(cfg.replicas):
            res = glauber.grand_coupling_simulate(
                [lo, hi], cfg.beta, horizon,
                _seed_for(_seed_for(cfg.seed, L), r))
            rows.append((L, r, "order_violations",
                         float(res.order_violations.sum()), _NAN))
            rows.append((L, r, "coalescence_time",
                         float(res.coalescence[0]), _NAN))


def _run_dimer(cfg: ExperimentConfig, rows: list[Row]) -> None:
    spec = dimers.DimerSpec.uniform()
    for n in cfg.sizes:
        _budget(n > 2000, f"dimer size {n} beyond the matrix budget")
        rows.append((n, 0, "variance", dimers.variance_Nn(n, spec), _NAN))
        closed = dimers.kinv_closed(n, spec)
        gap = abs(closed - dimers.kinv_quadrature(n, -1, spec))
        rows.append((n, 0, "kinv_closed", closed, _NAN))
        rows.append((n, 0, "kinv_gap", gap, _NAN))


def _run_spectrum(cfg: ExperimentConfig, rows: list[Row]) -> None:
    for side in cfg.sizes:
        _budget(side ** cfg.ndim > 20,
                f"spectrum domain {side}^{cfg.ndim} exceeds the 2^20 state budget")
        dom = Domain.rect((side,) * cfg.ndim)
        decomp = spectral.decompose_blocks(dom, bc=1)
        lambdas = np.empty(decomp.n_classes)
        for i in range(decomp.n_classes):
            lam, _ = spectral.principal_eigen(decomp.block(i))
            lambdas[i] = lam
            rows.append((side, i, "lambda", float(lam), _NAN))
        if math.isinf(cfg.beta):
            others = np.delete(lambdas, decomp.all_plus_class)
            gap = float(others.min()) if others.size else 0.0
        else:
            gap = spectral.spectral_gap(dom, cfg.beta)
        rows.append((side, 0, "gap", float(gap), _NAN))


def _run_heat(cfg: ExperimentConfig, rows: list[Row]) -> None:
    for L in cfg.sizes:
        _budget(L > 4096, f"heat size {L} too large")
        rep = diffusion.ssep_simulate(L, cfg.t, cfg.replicas,
                                      _seed_for(cfg.seed, L))
        for x in range(1, L + 1):
            rows.append((L, x, "empirical",
                         float(rep.occupation[x - 1]), float(rep.stderr[x - 1])))
            rows.append((L, x, "analytic", float(rep.reference[x - 1]), 0.0))
        rows.append((L, 0, "max_z", rep.max_z, _NAN))
        if cfg.t > 0:
            check = diffusion.heat_tail_check(L, cfg.t)
            rows.append((L, 0, "tail_lhs", check.lhs, _NAN))
            rows.append((L, 0, "tail_bound", check.bound, _NAN))


def _run_coldyn(cfg: ExperimentConfig, rows: list[Row]) -> None:
    for L in cfg.sizes:
        _budget(L > 64, f"coldyn cube side {L // 2} too large")
        rep = diffusion.coldyn_profile(L, cfg.t, cfg.replicas,
                                       _seed_for(cfg.seed, L))
        for x in range(L + 1):
            rows.append((L, x, "empirical",
                         float(rep.profile[x]), float(rep.stderr[x])))
            rows.append((L, x, "analytic", float(rep.heat[x]), 0.0))
        rows.append((L, 0, "max_z", rep.max_z, _NAN))
        rows.append((L, 0, "corner_rate", rep.corner_rate, _NAN))
        rows.append((L, 0, "corner_bound", rep.corner_bound, _NAN))


def _run_modified_2d(cfg: ExperimentConfig, rows: list[Row]) -> None:
    for L in cfg.sizes:
        _budget(L > 256, f"modified-2d size {L} too large")
        base = _seed_for(cfg.seed, L)

        def one(r: int):
            return glauber.modified_2d_simulate(L, _seed_for(base, r))

        # replica fan-out; reduction sorts by replica index by construction
        with ThreadPoolExecutor(max_workers=4) as pool:
            reports = list(pool.map(one, range(cfg.replicas)))
        for r, rep in enumerate(reports):
            freeze = rep.freeze_time if rep.freeze_time is not None else _NAN
            rows.append((L, r, "minus_drop", float(rep.minus_drop), _NAN))
            rows.append((L, r, "freeze_time", float(freeze), _NAN))


_DRIVERS = {
    "tau-plus": _run_tau_plus,
    "coupling": _run_coupling,
    "dimer": _run_dimer,
    "spectrum": _run_spectrum,
    "heat": _run_heat,
    "coldyn": _run_coldyn,
    "modified-2d": _run_modified_2d,
}


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Dispatch a validated config to its module; deterministic output."""
    try:
        driver = _DRIVERS[cfg.experiment]
    except KeyError:
        raise ValueError(f"unknown experiment kind: {cfg.experiment!r}") from None
    rows: list[Row] = []
    driver(cfg, rows)
    return ResultTable(experiment=cfg.experiment, seed=cfg.seed,
                       version=__version__, config_hash=cfg.config_hash,
                       rows=rows)


# ---------------------------------------------------------------------------
# log-log scaling fit with bootstrap confidence interval
# ---------------------------------------------------------------------------

@dataclass
class ScalingFit:
    observable: str
    sizes: np.ndarray
    medians: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    slope_ci: tuple[float, float]


def _medians_by_size(groups: dict[int, np.ndarray]) -> np.ndarray:
    return np.array([float(np.median(groups[L])) for L in sorted(groups)])


def scaling_fit(table: ResultTable, observable: str,
                resamples: int = 1000, seed: int = 0) -> ScalingFit:
    """Least squares of log median(observable) against log size.

    Censored replicas (NaN values) are dropped before taking medians; the
    confidence interval resamples replicas within each size `resamples`
    times with a fixed-seed generator, so repeated calls agree bit for bit.
    """
    groups: dict[int, np.ndarray] = {}
    for L in table.sizes():
        vals = table.values(observable, L)
        vals = vals[np.isfinite(vals)]
        if vals.size:
            groups[L] = vals
    if len(groups) < 3:
        raise ValueError("need at least 3 distinct sizes with data")
    sizes = np.array(sorted(groups), dtype=np.float64)
    medians = _medians_by_size(groups)
    if np.any(medians <= 0):
        raise ValueError("observable medians must be positive for a log fit")

    lx, ly = np.log(sizes), np.log(medians)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    total = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 if total == 0 else 1.0 - float(np.sum(resid ** 2)) / float(total)

    rng = np.random.default_rng(seed)
    slopes = np.empty(resamples)
    for b in range(resamples):
        meds = np.array([
            float(np.median(rng.choice(groups[L], size=groups[L].size)))
            for L in sorted(groups)])
        if np.any(meds <= 0):
            slopes[b] = np.nan
            continue
        slopes[b] = np.polyfit(lx, np.log(meds), 1)[0]
    good = slopes[np.isfinite(slopes)]
    lo, hi = (np.percentile(good, [2.5, 97.5]) if good.size
              else (float("nan"), float("nan")))
    return ScalingFit(observable=observable, sizes=sizes, medians=medians,
                      slope=float(slope), intercept=float(intercept),
                      r_squared=float(r2), slope_ci=(float(lo), float(hi)))
