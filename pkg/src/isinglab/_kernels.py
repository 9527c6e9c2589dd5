"""Compiled event loops for the single-site heat-bath dynamics.

Every kernel follows the same event convention so that coupled chains can
share randomness: a global exponential clock of total rate |Lambda| (three
uniforms per event: waiting time, site choice, spin threshold), and the
update "new spin = +1 iff u < pi(+1 | neighbours)".  At beta = inf the
threshold degenerates to sign(S) with a fair coin at S = 0.

Grids are flat int8 arrays over the padded bounding box produced by
:mod:`isinglab.lattice`; only interior cells are ever written.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._rng import child_seed, next_double

__all__ = [
    "run_simulate",
    "run_tau_batch",
    "run_grand_coupling",
    "run_beta_compare",
    "run_modified_2d",
]


@njit(cache=True, inline="always")
def _draw_event(state, n_sites):
    """(state, dt, site_pos, u): one merged-clock event."""
    state, ut = next_double(state)
    dt = -np.log(1.0 - ut) / n_sites
    state, us = next_double(state)
    pos = int(us * n_sites)
    if pos >= n_sites:
        pos = n_sites - 1
    state, u = next_double(state)
    return state, dt, pos, u


@njit(cache=True, inline="always")
def _new_spin(S, u, beta):
    """Heat-bath draw given the neighbour sum S."""
    if beta == np.inf:
        if S > 0:
            return np.int8(1)
        if S < 0:
            return np.int8(-1)
        return np.int8(1) if u < 0.5 else np.int8(-1)
    p_plus = 1.0 / (1.0 + np.exp(-2.0 * beta * S))
    return np.int8(1) if u < p_plus else np.int8(-1)


@njit(cache=True, inline="always")
def _nbr_sum(g, x, steps):
    s = 0
    for k in range(steps.size):
        s += g[x + steps[k]]
    return s


@njit(cache=True)
def run_simulate(g, sites, steps, beta, horizon, max_events, seed,
                 sample_times, out_mag, out_minus, out_energy, e0,
                 stop_at_plus):
    """Single trajectory with observables on a time grid.

    Returns (tau_plus, end_time, n_events, energy_violations, final_energy).
    tau_plus < 0 means the all-plus state was not reached before the horizon.
    """
    n = sites.size
    state = seed
    t = 0.0
    minus = 0
    for i in range(n):
        if g[sites[i]] == -1:
            minus += 1
    mag = n - 2 * minus
    energy = e0
    tau = -1.0 if minus > 0 else 0.0
    k = 0  # sample pointer
    events = np.int64(0)
    violations = np.int64(0)

    while events < max_events:
        if stop_at_plus and minus == 0:
            t = horizon  # absorbing: remaining samples keep the final values
            break
        state, dt, pos, u = _draw_event(state, n)
        t_next = t + dt
        while k < sample_times.size and sample_times[k] < t_next:
            out_mag[k] = mag
            out_minus[k] = minus
            out_energy[k] = energy
            k += 1
        if t_next >= horizon:
            t = horizon
            break
        t = t_next
        events += 1
        x = sites[pos]
        old = g[x]
        S = _nbr_sum(g, x, steps)
        new = _new_spin(S, u, beta)
        if new != old:
            dH = 2 * old * S
            if beta == np.inf and dH > 0:
                violations += 1
            energy += dH
            g[x] = new
            if new == 1:
                minus -= 1
                mag += 2
            else:
                minus += 1
                mag -= 2
            if minus == 0 and tau < 0.0:
                tau = t
    while k < sample_times.size:
        out_mag[k] = mag
        out_minus[k] = minus
        out_energy[k] = energy
        k += 1
    return tau, t, events, violations, energy


@njit(cache=True)
def run_tau_batch(g0, sites, steps, beta, horizon, max_events, master_seed,
                  n_replicas, out_tau, out_events):
    """Independent hitting-time replicas; out_tau[r] < 0 marks censoring.

    Returns the number of energy-increasing applied flips summed over all
    replicas (must be 0 at beta = inf; kept as a tripwire assertion).
    """
    n = sites.size
    violations = np.int64(0)
    for r in range(n_replicas):
        state = child_seed(master_seed, np.uint64(r))
        g = g0.copy()
        minus = 0
        for i in range(n):
            if g[sites[i]] == -1:
                minus += 1
        t = 0.0
        tau = -1.0 if minus > 0 else 0.0
        events = np.int64(0)
        while minus > 0 and events < max_events:
            state, dt, pos, u = _draw_event(state, n)
            t += dt
            if t >= horizon:
                break
            events += 1
            x = sites[pos]
            old = g[x]
            S = _nbr_sum(g, x, steps)
            new = _new_spin(S, u, beta)
            if new != old:
                if beta == np.inf and old * S > 0:
                    violations += 1
                g[x] = new
                minus += 1 if new == -1 else -1
        if minus == 0:
            tau = t
        out_tau[r] = tau
        out_events[r] = events
    return violations


@njit(cache=True)
def run_grand_coupling(grids, sites, steps, beta, horizon, max_events, seed,
                       pairs, out_violations, out_coalesce):
    """All copies consume identical (time, site, u) events.

    `pairs` rows (i, j) are monitored: sitewise order sigma_i <= sigma_j is
    checked at the updated site after every event, and the first time the
    two interior configurations agree everywhere is recorded in
    out_coalesce (-1 while distinct).
    """
    k = grids.shape[0]
    n = sites.size
    npair = pairs.shape[0]
    diff = np.zeros(npair, dtype=np.int64)
    eq_before = np.zeros(npair, dtype=np.bool_)
    for p in range(npair):
        a, b = pairs[p, 0], pairs[p, 1]
        c = 0
        for i in range(n):
            if grids[a, sites[i]] != grids[b, sites[i]]:
                c += 1
        diff[p] = c
        out_coalesce[p] = 0.0 if c == 0 else -1.0
    state = seed
    t = 0.0
    events = np.int64(0)
    while events < max_events:
        state, dt, pos, u = _draw_event(state, n)
        t += dt
        if t >= horizon:
            t = horizon
            break
        events += 1
        x = sites[pos]
        for p in range(npair):
            a, b = pairs[p, 0], pairs[p, 1]
            eq_before[p] = grids[a, x] == grids[b, x]
        for c in range(k):
            S = _nbr_sum(grids[c], x, steps)
            grids[c, x] = _new_spin(S, u, beta)
        for p in range(npair):
            a, b = pairs[p, 0], pairs[p, 1]
            if grids[a, x] > grids[b, x]:
                out_violations[p] += 1
            eq_after = grids[a, x] == grids[b, x]
            if eq_before[p] and not eq_after:
                diff[p] += 1
            elif eq_after and not eq_before[p]:
                diff[p] -= 1
            if diff[p] == 0 and out_coalesce[p] < 0.0:
                out_coalesce[p] = t
    return t, events


@njit(cache=True)
def run_beta_compare(g_fin, g_inf, sites, steps, beta, horizon, max_events,
                     seed):
    """Finite-beta and beta=inf chains on one event stream.

    Returns (first_disagreement_time, n_disagreeing_sites, end_time, events);
    first time is -1 if the interior configurations never differed.
    """
    n = sites.size
    state = seed
    t = 0.0
    events = np.int64(0)
    diff = np.int64(0)
    first = -1.0
    while events < max_events:
        state, dt, pos, u = _draw_event(state, n)
        t += dt
        if t >= horizon:
            t = horizon
            break
        events += 1
        x = sites[pos]
        was_equal = g_fin[x] == g_inf[x]
        S1 = _nbr_sum(g_fin, x, steps)
        S2 = _nbr_sum(g_inf, x, steps)
        g_fin[x] = _new_spin(S1, u, beta)
        g_inf[x] = _new_spin(S2, u, np.inf)
        if g_fin[x] != g_inf[x]:
            if was_equal:
                diff += 1
                if first < 0.0:
                    first = t
        else:
            if not was_equal:
                diff -= 1
    return first, diff, t, events


@njit(cache=True)
def run_modified_2d(g, interior, sites, steps, cover_mask, minus_count,
                    cover_missing, t, state, horizon, max_events, stack):
    """Erosion dynamics: heat-bath flip, then the full majority cascade.

    Processes events until the configuration changes (status 1), the change
    uncovers a protected cell (status 2: frozen at this state), or the
    time/event budget runs out (status 0).  Returns
    (t, state, minus_count, cover_missing, status, events_done).
    `cover_missing` counts protected cells currently not minus; the run is
    frozen as soon as it becomes positive.
    """
    n = sites.size
    events = np.int64(0)
    while events < max_events:
        state, dt, pos, u = _draw_event(state, n)
        if t + dt >= horizon:
            return horizon, state, minus_count, cover_missing, 0, events
        t += dt
        events += 1
        x = sites[pos]
        old = g[x]
        S = _nbr_sum(g, x, steps)
        new = _new_spin(S, u, np.inf)
        if new == old:
            continue
        g[x] = new
        if new == -1:
            minus_count += 1
            if cover_mask[x]:
                cover_missing -= 1
            return t, state, minus_count, cover_missing, 1, events
        minus_count -= 1
        if cover_mask[x]:
            cover_missing += 1
        # majority cascade: erase minus cells with >= 3 plus neighbours
        top = 0
        for k in range(steps.size):
            y = x + steps[k]
            if interior[y] and g[y] == -1:
                stack[top] = y
                top += 1
        while top > 0:
            top -= 1
            y = stack[top]
            if g[y] != -1:
                continue
            plus = 0
            for k in range(steps.size):
                if g[y + steps[k]] == 1:
                    plus += 1
            if plus >= 3:
                g[y] = 1
                minus_count -= 1
                if cover_mask[y]:
                    cover_missing += 1
                for k in range(steps.size):
                    z = y + steps[k]
                    if interior[z] and g[z] == -1:
                        stack[top] = z
                        top += 1
        status = 2 if cover_missing > 0 else 1
        return t, state, minus_count, cover_missing, status, events
    return t, state, minus_count, cover_missing, 0, events
