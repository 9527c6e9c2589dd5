"""Compiled event loops for the column dynamics of `surfaces`.

Shared conventions:

  * heights are int64 (nx, ny) arrays mutated in place;
  * the admissible interval of a column reads its four neighbours (missing
    neighbours impose nothing) clamped by floor and ceiling;
  * uniform-variate consumption order is fixed and documented per kernel,
    so coupled copies driven by one stream stay coupled;
  * inverse-CDF resampling lo + floor(u * (hi - lo + 1)) is monotone in
    both interval endpoints, which makes every coupling here order
    preserving.

Checkpoint samples always report the state just before the first event
past the checkpoint (the chain is constant between events).
"""

import numpy as np
from numba import njit

from ._rng import next_double

__all__ = [
    "run_local_chain",
    "run_column_chain",
    "run_local_coupled",
    "run_column_coupled",
]


@njit(cache=True, inline="always")
def _lo_hi(v, floor, ceil, i, k):
    nx, ny = v.shape
    lo = floor[i, k]
    if i + 1 < nx and v[i + 1, k] > lo:
        lo = v[i + 1, k]
    if k + 1 < ny and v[i, k + 1] > lo:
        lo = v[i, k + 1]
    hi = ceil[i, k]
    if i > 0 and v[i - 1, k] < hi:
        hi = v[i - 1, k]
    if k > 0 and v[i, k - 1] < hi:
        hi = v[i, k - 1]
    return lo, hi


@njit(cache=True, inline="always")
def _resample(lo, hi, u):
    nv = lo + np.int64(u * (hi - lo + 1))
    if nv > hi:
        nv = hi
    return nv


@njit(cache=True, inline="always")
def _weighted_gap(vlo, vhi, w):
    nx, ny = vlo.shape
    s = 0.0
    for i in range(nx):
        for k in range(ny):
            s += w[i, k] * (vhi[i, k] - vlo[i, k])
    return 2.0 * s


@njit(cache=True)
def run_local_chain(v, floor, ceil, n_updates, state, thin, out_codes, powers, zoff):
    """Single-column random-walk steps; records state codes every `thin`.

    Per update: one uniform picks the column, one uniform picks the
    direction (u < 1/2 down); clamped moves stay put.
    """
    nx, ny = v.shape
    n = nx * ny
    code = np.int64(0)
    for i in range(nx):
        for k in range(ny):
            code += (v[i, k] - zoff) * powers[i * ny + k]
    si = 0
    for step in range(1, n_updates + 1):
        state, u1 = next_double(state)
        col = np.int64(u1 * n)
        if col >= n:
            col = n - 1
        i = col // ny
        k = col % ny
        state, u2 = next_double(state)
        lo, hi = _lo_hi(v, floor, ceil, i, k)
        old = v[i, k]
        if u2 < 0.5:
            nv = old - 1 if old - 1 >= lo else old
        else:
            nv = old + 1 if old + 1 <= hi else old
        if nv != old:
            code += (nv - old) * powers[col]
            v[i, k] = nv
        if step % thin == 0 and si < out_codes.size:
            out_codes[si] = code
            si += 1
    return state


@njit(cache=True)
def run_column_chain(v, floor, ceil, n_sweeps, state, thin, out_codes, powers, zoff):
    """Parity sweeps: per sweep one parity coin, then one uniform per
    matching column (raster order) resamples it over its interval."""
    nx, ny = v.shape
    code = np.int64(0)
    for i in range(nx):
        for k in range(ny):
            code += (v[i, k] - zoff) * powers[i * ny + k]
    si = 0
    for sweep in range(1, n_sweeps + 1):
        state, uc = next_double(state)
        par = 0 if uc < 0.5 else 1
        for i in range(nx):
            for k in range(ny):
                if ((i + k) & 1) != par:
                    continue
                state, u = next_double(state)
                lo, hi = _lo_hi(v, floor, ceil, i, k)
                nv = _resample(lo, hi, u)
                if nv != v[i, k]:
                    code += (nv - v[i, k]) * powers[i * ny + k]
                    v[i, k] = nv
        if sweep % thin == 0 and si < out_codes.size:
            out_codes[si] = code
            si += 1
    return state


@njit(cache=True)
def run_local_coupled(vlo, vhi, floor, ceil, horizon, state, checks, out_gap,
                      stop_at_coal):
    """Two copies, one event stream: total rate nx*ny, shared column and
    direction per event.  Returns (state, coalescence time or -1, events).

    `checks`/`out_gap` sample the plain columnwise gap sum (no weights).
    """
    nx, ny = vlo.shape
    n = nx * ny
    ndiff = 0
    for i in range(nx):
        for k in range(ny):
            if vlo[i, k] != vhi[i, k]:
                ndiff += 1
    t = 0.0
    coal = -1.0 if ndiff > 0 else 0.0
    events = 0
    ci = 0
    while True:
        state, u1 = next_double(state)
        tn = t - np.log(1.0 - u1) / n
        while ci < checks.size and checks[ci] <= tn:
            s = 0.0
            for i in range(nx):
                for k in range(ny):
                    s += vhi[i, k] - vlo[i, k]
            out_gap[ci] = s
            ci += 1
        if tn > horizon:
            break
        t = tn
        state, u2 = next_double(state)
        col = np.int64(u2 * n)
        if col >= n:
            col = n - 1
        i = col // ny
        k = col % ny
        state, u3 = next_double(state)
        was = vlo[i, k] != vhi[i, k]
        for copy in range(2):
            v = vlo if copy == 0 else vhi
            lo, hi = _lo_hi(v, floor, ceil, i, k)
            old = v[i, k]
            if u3 < 0.5:
                nv = old - 1 if old - 1 >= lo else old
            else:
                nv = old + 1 if old + 1 <= hi else old
            v[i, k] = nv
        events += 1
        now = vlo[i, k] != vhi[i, k]
        if was and not now:
            ndiff -= 1
        elif now and not was:
            ndiff += 1
        if coal < 0.0 and ndiff == 0:
            coal = t
            if stop_at_coal:
                break
    while ci < checks.size:
        s = 0.0
        for i in range(nx):
            for k in range(ny):
                s += vhi[i, k] - vlo[i, k]
        out_gap[ci] = s
        ci += 1
    return state, coal, events


@njit(cache=True)
def run_column_coupled(vlo, vhi, floor, ceil, w, horizon, state, checks,
                       out_gap, stop_at_coal):
    """Two copies under parity sweeps at global rate 1, shared events.

    Per ring: one uniform for the waiting time, one parity coin, then one
    uniform per matching column shared by both copies.  Checkpoints sample
    the drift-weighted gap 2 * sum w * (hi - lo).  Returns
    (state, coalescence time or -1, rings).
    """
    nx, ny = vlo.shape
    ndiff = 0
    for i in range(nx):
        for k in range(ny):
            if vlo[i, k] != vhi[i, k]:
                ndiff += 1
    t = 0.0
    coal = -1.0 if ndiff > 0 else 0.0
    rings = 0
    ci = 0
    while True:
        state, u1 = next_double(state)
        tn = t - np.log(1.0 - u1)
        while ci < checks.size and checks[ci] <= tn:
            out_gap[ci] = _weighted_gap(vlo, vhi, w)
            ci += 1
        if tn > horizon:
            break
        t = tn
        state, uc = next_double(state)
        par = 0 if uc < 0.5 else 1
        for i in range(nx):
            for k in range(ny):
                if ((i + k) & 1) != par:
                    continue
                state, u = next_double(state)
                was = vlo[i, k] != vhi[i, k]
                lo, hi = _lo_hi(vlo, floor, ceil, i, k)
                vlo[i, k] = _resample(lo, hi, u)
                lo, hi = _lo_hi(vhi, floor, ceil, i, k)
                vhi[i, k] = _resample(lo, hi, u)
                now = vlo[i, k] != vhi[i, k]
                if was and not now:
                    ndiff -= 1
                elif now and not was:
                    ndiff += 1
        rings += 1
        if coal < 0.0 and ndiff == 0:
            coal = t
            if stop_at_coal:
                break
    while ci < checks.size:
        out_gap[ci] = _weighted_gap(vlo, vhi, w)
        ci += 1
    return state, coal, rings
