"""Pure numpy implementation of the batch kernels.

Used when the compiled ``_kernels`` extension is unavailable or when
``KPRSIM_PURE_PYTHON=1`` is set. Every function mirrors its Cython twin:
same arguments, same in-place contract on ``rows``.
"""

import numpy as np


def sample_rows(P, stable, u):
    """Inverse-CDF sample of every row of ``P`` with its own uniform ``u[i]``.

    Rows with ``stable[i] >= 0`` are one-hot and return that index directly.
    """
    n = P.shape[0]
    choices = stable.astype(np.int64, copy=True)
    todo = np.flatnonzero(stable < 0)
    if todo.size:
        cdf = np.cumsum(P[todo], axis=1)
        x = u[todo] * cdf[:, -1]
        # count of cdf entries <= x is the first index whose cdf exceeds x
        idx = (cdf <= x[:, None]).sum(axis=1)
        choices[todo] = np.minimum(idx, n - 1)
    return choices


def _all_but(rows, sel, own):
    n = rows.shape[1]
    rows[sel] = 1.0 / (n - 1)
    rows[sel, own[sel]] = 0.0


def zero_known_rows(rows, starts, lens, choices, own, literal):
    """RP1/RP2: zero every restaurant visited by a known customer, rescale the rest.

    Row ``i`` knows customers ``starts[i] .. starts[i] + lens[i] - 1`` (mod N).
    """
    m, n = rows.shape
    if m == 0:
        return
    width = int(lens.max())
    offs = np.arange(width)
    who = (starts[:, None] + offs) % n
    valid = offs < lens[:, None]
    visited = np.zeros((m, n), dtype=bool)
    rix = np.broadcast_to(np.arange(m)[:, None], who.shape)
    visited[rix[valid], choices[who[valid]]] = True

    keep = ~visited
    rest = np.where(keep, rows, 0.0)
    rem = rest.sum(axis=1)
    nkeep = keep.sum(axis=1)
    total = rows.sum(axis=1)

    full = nkeep == 0
    even = ~full & (rem <= 0.0)
    prop = ~full & ~even
    with np.errstate(divide="ignore", invalid="ignore"):
        if literal:
            removed = total - rem
            out = rest * (1.0 + removed[:, None] * rest / rem[:, None])
            out /= out.sum(axis=1)[:, None]
        else:
            out = rest / rem[:, None]
        evenrows = keep / nkeep[:, None]
    rows[prop] = out[prop]
    rows[even] = evenrows[even]
    _all_but(rows, full, own)


def group_rows(rows, own, served, gsize, literal):
    """RP3: within the visited restaurant's block, move busy mass onto idle restaurants."""
    m, n = rows.shape
    if m == 0:
        return
    lo = (own // gsize) * gsize
    hi = np.minimum(lo + gsize, n)
    cols = np.arange(n)
    inblock = (cols >= lo[:, None]) & (cols < hi[:, None])
    idle = served < 0
    busy_m = inblock & ~idle
    idle_m = inblock & idle

    p_busy = np.where(busy_m, rows, 0.0).sum(axis=1)
    q_idle = np.where(idle_m, rows, 0.0).sum(axis=1)
    n_idle = idle_m.sum(axis=1)
    act = n_idle > 0
    if not act.any():
        return
    rows_a = rows[act]
    busy_a, idle_a = busy_m[act], idle_m[act]
    P, Q, W = p_busy[act][:, None], q_idle[act][:, None], n_idle[act][:, None]
    qpos = Q > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        if literal:
            upd = np.where(qpos, rows_a * (1.0 + P * rows_a / Q), 1.0 / W)
        else:
            upd = np.where(qpos, rows_a * (1.0 + P / Q), rows_a + P / W)
    new = np.where(idle_a, upd, rows_a)
    new[busy_a] = 0.0
    if literal:
        new /= new.sum(axis=1)[:, None]
    rows[act] = new


def info_rows(rows, own, reported, pi, literal):
    """RP4-RP6: pi * (concentrate on the reported idle set) + (1 - pi) * (drop own choice)."""
    m, n = rows.shape
    if m == 0:
        return
    ar = np.arange(m)
    p_own = rows[ar, own]
    if literal:
        rest = 1.0 - p_own
    else:
        rest = rows.sum(axis=1) - p_own
    degenerate = (rest <= 0.0) | (p_own >= 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if literal:
            removal = rows * (1.0 + p_own / (1.0 - p_own))[:, None]
        else:
            removal = rows / rest[:, None]
    removal[degenerate] = 1.0 / (n - 1)
    removal[ar, own] = 0.0

    rep = reported.astype(bool)
    nrep = int(rep.sum())
    if nrep == 0:
        belief = removal
    else:
        mass = np.where(rep, rows, 0.0).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            belief = np.where(rep, rows / mass[:, None], 0.0)
        belief[mass <= 0.0] = np.where(rep, 1.0 / nrep, 0.0)
    out = pi * belief + (1.0 - pi) * removal
    out /= out.sum(axis=1)[:, None]
    rows[:] = out
