"""Pure-Python/numpy charge-accumulation kernel (fallback for ``_kernel``).

Both implementations walk the same sorted spike events and perform the same
floating-point operations in the same order, so ideal-mode results agree bit
for bit.
"""
import numpy as np

FALL = 0
RISE = 1


def accumulate(times, kinds, rows, G, nonideal, v_read, c_rt, snapshots=False):
    """Integrate every column's charge across a sorted spike-event list.

    Parameters
    ----------
    times : int64 array
        Event times in fs, non-decreasing.
    kinds : int8 array
        ``RISE`` or ``FALL`` per event.
    rows : int64 array
        Row index per event.
    G : (rows, cols) float64 array
        Conductance matrix (S).
    nonideal : bool
        False: return ``sum(G_active * dt)`` per column in S*fs.
        True: return C_rt voltage under direct single-pole charging.

    Returns
    -------
    out : (cols,) float64
    snaps : (n_events, cols) float64, only when ``snapshots`` is set
        ``out`` as it stood at each event time, before the event applied.
    """
    n = len(times)
    cols = G.shape[1]
    gact = np.zeros(cols)
    out = np.zeros(cols)
    snaps = np.empty((n, cols)) if snapshots else None
    active = 0
    t_prev = int(times[0]) if n else 0
    for i in range(n):
        t = int(times[i])
        dt = t - t_prev
        if dt > 0 and active > 0:
            if nonideal:
                scale = dt * 1e-15 / c_rt
                out = out - (v_read - out) * np.expm1(-(gact * scale))
            else:
                out = out + gact * float(dt)
        if snapshots:
            snaps[i] = out
        t_prev = t
        row = rows[i]
        if kinds[i] == RISE:
            gact = gact + G[row]
            active += 1
        else:
            gact = gact - G[row]
            active -= 1
            if active == 0:
                gact[:] = 0.0
    if snapshots:
        return out, snaps
    return out
