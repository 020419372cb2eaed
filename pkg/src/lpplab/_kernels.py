"""Numba kernels for weight generation and anti-diagonal sweeps.

Rows are indexed by the coordinate sum ``s`` and cells within a row by the
transverse coordinate ``a = v1 - v2``, which steps by 2.  A sweep is described
by per-row bounds ``lo[k], hi[k]`` (inclusive, parity of ``s``) and flat
offsets ``off[k]`` into the cell arrays.  An empty row has ``hi < lo``.

Uniforms are produced here; the ``-log`` step is always done by numpy in the
caller so that batched and single-point evaluation agree bitwise.
"""

import numpy as np
from numba import njit, uint64

NEG = -np.inf

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_MASK32 = np.uint64(0xFFFFFFFF)
_INV53 = 1.0 / 9007199254740992.0

# region opcodes
OP_ALL = 0
OP_STRIP = 1
OP_RECT = 2
OP_NOT = 3
OP_AND = 4


@njit(inline="always")
def mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def seed_key(seed):
    return mix(uint64(seed) + _GOLD)


@njit(cache=True)
def mix_pair(a, b):
    """Combine two 64-bit words into one (used for replica sub-seeds)."""
    return mix(mix(uint64(a) + _GOLD) ^ (uint64(b) * _M1 + _GOLD))


@njit(inline="always")
def _uniform(sk, v1, v2):
    key = (uint64(v1) << _S32) | (uint64(v2) & _MASK32)
    h = mix(mix(key ^ sk) + _GOLD)
    return (float(h >> _S11) + 0.5) * _INV53


@njit(cache=True, nogil=True)
def uniform_points(sk, v1, v2, out):
    for i in range(v1.shape[0]):
        out[i] = _uniform(sk, v1[i], v2[i])


@njit(inline="always")
def _count(lo, hi, k):
    if hi[k] < lo[k]:
        return 0
    return (hi[k] - lo[k]) // 2 + 1


@njit(cache=True, nogil=True)
def fill_uniform(sk, s0, lo, hi, off, dv1, dv2, out):
    # offsets folded into the row origin keep the inner loop vectorisable
    for k in range(lo.shape[0]):
        s = s0 + k + dv1 + dv2
        b = lo[k] + dv1 - dv2
        o = off[k]
        for i in range(_count(lo, hi, k)):
            a = b + 2 * i
            out[o + i] = _uniform(sk, (s + a) >> 1, (s - a) >> 1)


@njit(cache=True, nogil=True)
def fill_table(table, t1, t2, s0, lo, hi, off, dv1, dv2, out, bad):
    """Copy weights from a dense table with origin (t1, t2); flag misses."""
    n1, n2 = table.shape
    for k in range(lo.shape[0]):
        s = s0 + k
        o = off[k]
        for i in range(_count(lo, hi, k)):
            a = lo[k] + 2 * i
            i1 = ((s + a) >> 1) + dv1 - t1
            i2 = ((s - a) >> 1) + dv2 - t2
            if i1 < 0 or i2 < 0 or i1 >= n1 or i2 >= n2:
                bad[0] = 1
                out[o + i] = 1.0
            else:
                out[o + i] = table[i1, i2]


@njit(inline="always")
def _member(ops, prm, stack, s, a):
    top = 0
    for q in range(ops.shape[0]):
        code = ops[q]
        if code == OP_ALL:
            stack[top] = True
            top += 1
        elif code == OP_STRIP:
            stack[top] = abs(a) <= prm[q, 0]
            top += 1
        elif code == OP_RECT:
            stack[top] = (prm[q, 0] <= s <= prm[q, 1]) and (prm[q, 2] <= a <= prm[q, 3])
            top += 1
        elif code == OP_NOT:
            stack[top - 1] = not stack[top - 1]
        else:
            cnt = int(prm[q, 0])
            acc = True
            for _ in range(cnt):
                top -= 1
                acc = acc and stack[top]
            stack[top] = acc
            top += 1
    return stack[top - 1]


@njit(cache=True, nogil=True)
def region_mask(ops, prm, s0, lo, hi, off, mask):
    stack = np.zeros(ops.shape[0] + 1, dtype=np.bool_)
    for k in range(lo.shape[0]):
        s = s0 + k
        o = off[k]
        for i in range(_count(lo, hi, k)):
            mask[o + i] = _member(ops, prm, stack, float(s), float(lo[k] + 2 * i))


@njit(cache=True, nogil=True)
def forward_sweep(w, s0, lo, hi, off, base, mask, use_mask, bits, keep_off, kept, diag):
    """Line-to-point sweep upward from row ``s0``.

    ``base`` holds the initial values on row 0 of the sweep.  Writes backpointer
    bits (1 when the predecessor is v-(1,0)), the values of every row with
    ``keep_off[k] >= 0`` and the values on the main diagonal into ``diag``
    (indexed by ``s // 2``).
    """
    nrows = lo.shape[0]
    maxc = 1
    for k in range(nrows):
        c = _count(lo, hi, k)
        if c > maxc:
            maxc = c
    prev = np.empty(maxc)
    cur = np.empty(maxc)
    c0 = _count(lo, hi, 0)
    o = off[0]
    i0 = -1
    if s0 >= 0 and (s0 & 1) == 0 and lo[0] <= 0 <= hi[0]:
        i0 = (0 - lo[0]) // 2
    for i in range(c0):
        v = base[i]
        if use_mask and not mask[o + i]:
            v = NEG
        bits[o + i] = False
        if keep_off[0] >= 0:
            kept[keep_off[0] + i] = v
        if i == i0:
            diag[s0 // 2] = v
        prev[i] = NEG if v == NEG else v + w[o + i]
    for k in range(1, nrows):
        s = s0 + k
        pc = _count(lo, hi, k - 1)
        c = _count(lo, hi, k)
        o = off[k]
        ko = keep_off[k]
        shift = (lo[k] - 1 - lo[k - 1]) // 2
        i0 = -1
        if s >= 0 and (s & 1) == 0 and lo[k] <= 0 <= hi[k]:
            i0 = (0 - lo[k]) // 2
        for i in range(c):
            j = i + shift
            x = prev[j] if 0 <= j < pc else NEG
            y = prev[j + 1] if 0 <= j + 1 < pc else NEG
            b = x > y
            best = x if b else y
            if use_mask and not mask[o + i]:
                best = NEG
                b = False
            bits[o + i] = b
            if ko >= 0:
                kept[ko + i] = best
            if i == i0:
                diag[s // 2] = best
            cur[i] = NEG if best == NEG else best + w[o + i]
        prev, cur = cur, prev


@njit(cache=True, nogil=True)
def backward_sweep(w, s0, lo, hi, off, bits, keep_off, kept):
    """Point-to-point sweep downward from the single cell on the top row.

    Each value is the passage time to the top cell, endpoint weight excluded.
    Bits are 1 when the successor is u+(1,0).
    """
    nrows = lo.shape[0]
    maxc = 1
    for k in range(nrows):
        c = _count(lo, hi, k)
        if c > maxc:
            maxc = c
    nxt = np.empty(maxc)
    cur = np.empty(maxc)
    top = nrows - 1
    for i in range(_count(lo, hi, top)):
        nxt[i] = 0.0
        bits[off[top] + i] = False
        if keep_off[top] >= 0:
            kept[keep_off[top] + i] = 0.0
    for k in range(top - 1, -1, -1):
        nc = _count(lo, hi, k + 1)
        c = _count(lo, hi, k)
        o = off[k]
        ko = keep_off[k]
        shift = (lo[k] - 1 - lo[k + 1]) // 2
        for i in range(c):
            j = i + shift
            y = nxt[j] if 0 <= j < nc else NEG
            x = nxt[j + 1] if 0 <= j + 1 < nc else NEG
            b = x > y
            best = x if b else y
            bits[o + i] = b
            v = NEG if best == NEG else best + w[o + i]
            cur[i] = v
            if ko >= 0:
                kept[ko + i] = v
        nxt, cur = cur, nxt


@njit(cache=True, nogil=True)
def exit_sweep(w, lo, hi, off, base, strip, end_lo, end_hi):
    """Two-layer sweep: best weight of paths that leave ``|a| <= strip``.

    Returns the maximum over final-row cells with ``end_lo <= a <= end_hi``.
    """
    nrows = lo.shape[0]
    maxc = 1
    for k in range(nrows):
        c = _count(lo, hi, k)
        if c > maxc:
            maxc = c
    p1 = np.empty(maxc)
    p2 = np.empty(maxc)
    c1 = np.empty(maxc)
    c2 = np.empty(maxc)
    best_end = NEG
    for k in range(nrows):
        c = _count(lo, hi, k)
        o = off[k]
        if k > 0:
            pc = _count(lo, hi, k - 1)
            shift = (lo[k] - 1 - lo[k - 1]) // 2
        for i in range(c):
            a = lo[k] + 2 * i
            if k == 0:
                l1 = base[i]
                l2 = NEG
            else:
                j = i + shift
                x1 = p1[j] if 0 <= j < pc else NEG
                y1 = p1[j + 1] if 0 <= j + 1 < pc else NEG
                x2 = p2[j] if 0 <= j < pc else NEG
                y2 = p2[j + 1] if 0 <= j + 1 < pc else NEG
                l1 = x1 if x1 > y1 else y1
                l2 = x2 if x2 > y2 else y2
            if abs(a) > strip:
                if l1 > l2:
                    l2 = l1
                l1 = NEG
            if k == nrows - 1 and end_lo <= a <= end_hi and l2 > best_end:
                best_end = l2
            c1[i] = NEG if l1 == NEG else l1 + w[o + i]
            c2[i] = NEG if l2 == NEG else l2 + w[o + i]
        p1, c1 = c1, p1
        p2, c2 = c2, p2
    return best_end


@njit(cache=True, nogil=True)
def trace_up(packed, s0, lo, off, s_end, a_end, out):
    """Follow forward backpointers from (s_end, a_end) down to row ``s0``.

    ``out[s - s0]`` receives the transverse coordinate on row ``s``.
    """
    a = a_end
    for s in range(s_end, s0, -1):
        out[s - s0] = a
        k = s - s0
        c = off[k] + (a - lo[k]) // 2
        if (packed[c >> 3] >> (c & 7)) & 1:
            a -= 1
        else:
            a += 1
    out[0] = a


@njit(cache=True, nogil=True)
def trace_down(packed, s0, lo, off, s_start, a_start, s_top, out):
    """Follow backward successor bits from (s_start, a_start) up to ``s_top``."""
    a = a_start
    for s in range(s_start, s_top):
        out[s - s_start] = a
        k = s - s0
        c = off[k] + (a - lo[k]) // 2
        if (packed[c >> 3] >> (c & 7)) & 1:
            a += 1
        else:
            a -= 1
    out[s_top - s_start] = a
