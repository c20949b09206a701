"""Compiled inner loop for trajectories.

The arithmetic mirrors :func:`yardsale.model.step` operation for operation so
that the compiled path and the reference path agree bit for bit; the test-suite
holds it to that.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(nogil=True, cache=True)
def advance(x, codes, fractions, wins, lam, chi, taxed, threshold, stop_enabled,
            record_every, step0, last_step, stake_sq,
            rec_steps, rec_states, rec_stakes, rec_cum,
            diag, d_norm, d_w2, d_wgap):
    """Apply one block of trades to ``x`` in place.

    Returns ``(steps_done, n_recorded, stake_sq, condensed)``.
    """
    n = x.shape[0]
    nm1 = n - 1
    keep = 1.0 - chi
    share = chi / n
    n_rec = 0
    for t in range(codes.shape[0]):
        a = codes[t] // nm1
        b = codes[t] % nm1
        if b >= a:
            b += 1
        xa = x[a]
        xb = x[b]
        if xa < xb or (xa == xb and a < b):
            poor = a
            rich = b
        else:
            poor = b
            rich = a
        xp = x[poor]
        xr = x[rich]
        w = fractions[t] * xp
        tr = w * lam[poor]
        if wins[t]:
            x[poor] = xp - tr
            x[rich] = xr + tr
            gainer = rich
        else:
            x[poor] = xp + tr
            x[rich] = xr - tr
            gainer = poor
        stake_sq += w * w
        if diag:
            d_norm[t] = (x[poor] * x[poor] - xp * xp) + (x[rich] * x[rich] - xr * xr)
            d_w2[t] = w * w
            d_wgap[t] = w * (xr - xp)
        condensed = False
        if taxed:
            for i in range(n):
                x[i] = keep * x[i] + share
            if stop_enabled:
                for i in range(n):
                    if x[i] >= threshold:
                        condensed = True
        elif stop_enabled and x[gainer] >= threshold:
            condensed = True
        s = step0 + t + 1
        if condensed or s % record_every == 0 or s == last_step:
            rec_steps[n_rec] = s
            rec_states[n_rec, :] = x
            rec_stakes[n_rec] = w
            rec_cum[n_rec] = stake_sq
            n_rec += 1
        if condensed:
            return t + 1, n_rec, stake_sq, True
    return codes.shape[0], n_rec, stake_sq, False


_EMPTY = np.empty(0)


def run_block(x, block, lam, chi, threshold, record_every, step0, last_step, stake_sq,
              diag=False):
    """Python-side wrapper allocating record buffers for one block."""
    k = len(block)
    cap = k // record_every + 2
    rec_steps = np.empty(cap, dtype=np.int64)
    rec_states = np.empty((cap, x.shape[0]))
    rec_stakes = np.empty(cap)
    rec_cum = np.empty(cap)
    if diag:
        d_norm, d_w2, d_wgap = np.empty(k), np.empty(k), np.empty(k)
    else:
        d_norm = d_w2 = d_wgap = _EMPTY
    done, n_rec, stake_sq, condensed = advance(
        x, block.pair_codes, block.fractions, block.richer_wins, lam,
        0.0 if chi is None else chi, chi is not None,
        2.0 if threshold is None else threshold, threshold is not None,
        record_every, step0, last_step, stake_sq,
        rec_steps, rec_states, rec_stakes, rec_cum,
        diag, d_norm, d_w2, d_wgap)
    rec = (rec_steps[:n_rec], rec_states[:n_rec], rec_stakes[:n_rec], rec_cum[:n_rec])
    diag_out = (d_norm[:done], d_w2[:done], d_wgap[:done]) if diag else None
    return done, rec, stake_sq, condensed, diag_out
