"""Compiled distance-only engine: the same treap as ``pwl`` on flat arrays.

Slopes and lengths share one dtype, ``int64`` in integer mode and
``float64`` otherwise. Infinity is ``np.inf`` for floats and ``BIG = 2**60``
for integers; integer length sums saturate at ``BIG`` and infinite slopes
ignore slope offsets. Integer arithmetic may wrap around inside aggregates
that are never read, or in intermediate sums whose final value fits: the
result is exact modulo ``2**64`` and :func:`fits` guarantees that the true
value lies in range.
"""
from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

BIG = 1 << 60
LIMIT = 1 << 59
SEED = 0x5EED


def available() -> bool:
    return _HAVE_NUMBA


# Node table: one 64-byte row per finite piece. Value columns are read
# through V (the value dtype), link columns through I (an int64 view of the
# same buffer). The two infinite end pieces ("caps") of every function are
# kept outside the table as plain slopes: pieces beyond a cap can never be
# reached again, so they are dropped on merge and every stored length is
# finite. The left cap is the only piece that may have slope 0 and still
# lie left of the minimiser.
SL, LN, SLEN, SSL, LZ, LT, RT, PR = 0, 1, 2, 3, 4, 5, 6, 7
BY_SIGN, KEY_LT, KEY_LE = 0, 1, 2

if _HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _finite(s, inf):
        return s < inf and s > -inf

    @njit(cache=True, inline="always")
    def _sl(s, length, inf):
        if s == 0 or not _finite(s, inf):
            return 0
        return s * length

    @njit(cache=True, inline="always")
    def _apply(V, I, t, d, inf):
        if t >= 0:
            if _finite(V[t, SL], inf):
                V[t, SL] += d
            V[t, LZ] += d
            V[t, SSL] += d * V[t, SLEN]

    @njit(cache=True, inline="always")
    def _push(V, I, t, inf):
        d = V[t, LZ]
        if d != 0:
            _apply(V, I, I[t, LT], d, inf)
            _apply(V, I, I[t, RT], d, inf)
            V[t, LZ] = 0

    @njit(cache=True, inline="always")
    def _pull(V, I, t, inf):
        tot = V[t, LN]
        sl = _sl(V[t, SL], tot, inf)
        l = I[t, LT]
        r = I[t, RT]
        if l >= 0:
            tot += V[l, SLEN]
            sl += V[l, SSL]
        if r >= 0:
            tot += V[r, SLEN]
            sl += V[r, SSL]
        V[t, SLEN] = tot
        V[t, SSL] = sl

    @njit(cache=True, inline="always")
    def _new(V, I, t, s, length, inf):
        V[t, SL] = s
        V[t, LN] = length
        V[t, LZ] = 0
        I[t, LT] = -1
        I[t, RT] = -1
        _pull(V, I, t, inf)

    @njit(cache=True, inline="always")
    def _len(V, t):
        return V[t, SLEN] if t >= 0 else 0

    @njit(cache=True)
    def _merge(V, I, a, b, path, inf):
        if a < 0:
            return b
        if b < 0:
            return a
        root = -1
        hook = -1
        hook_right = False
        k = 0
        while a >= 0 and b >= 0:
            if I[a, PR] > I[b, PR]:
                _push(V, I, a, inf)
                x = a
                a = I[a, RT]
                side = True
            else:
                _push(V, I, b, inf)
                x = b
                b = I[b, LT]
                side = False
            if hook < 0:
                root = x
            elif hook_right:
                I[hook, RT] = x
            else:
                I[hook, LT] = x
            hook = x
            hook_right = side
            path[k] = x
            k += 1
        rest = a if a >= 0 else b
        if hook_right:
            I[hook, RT] = rest
        else:
            I[hook, LT] = rest
        for i in range(k - 1, -1, -1):
            _pull(V, I, path[i], inf)
        return root

    @njit(cache=True)
    def _split(V, I, t, how, key, path, inf):
        """Split into (slope < 0, rest), (slope < key, rest) or (slope <= key, rest)."""
        lo_root = -1
        hi_root = -1
        lh = -1
        hh = -1
        k = 0
        while t >= 0:
            _push(V, I, t, inf)
            path[k] = t
            k += 1
            s = V[t, SL]
            if how == BY_SIGN:
                goes_lo = s < 0
            elif how == KEY_LT:
                goes_lo = s < key
            else:
                goes_lo = s <= key
            if goes_lo:
                if lh < 0:
                    lo_root = t
                else:
                    I[lh, RT] = t
                lh = t
                t = I[t, RT]
            else:
                if hh < 0:
                    hi_root = t
                else:
                    I[hh, LT] = t
                hh = t
                t = I[t, LT]
        if lh >= 0:
            I[lh, RT] = -1
        if hh >= 0:
            I[hh, LT] = -1
        for i in range(k - 1, -1, -1):
            _pull(V, I, path[i], inf)
        return lo_root, hi_root

    @njit(cache=True)
    def _split_len(V, I, t, target, from_right, path, top, inf):
        """Split off total length *target* (at most the total) from one end.

        Returns ``(lo, hi, cut)``; a straddling piece is divided and the
        remainder becomes node *top*.
        """
        lo_root = -1
        hi_root = -1
        lh = -1
        hh = -1
        k = 0
        cut = False
        sub = -1
        while t >= 0:
            _push(V, I, t, inf)
            path[k] = t
            k += 1
            near = I[t, RT] if from_right else I[t, LT]
            near_len = V[near, SLEN] if near >= 0 else target - target
            if target <= near_len:
                # t lies beyond the cut
                if from_right:
                    if lh < 0:
                        lo_root = t
                    else:
                        I[lh, RT] = t
                    lh = t
                    t = I[t, RT]
                else:
                    if hh < 0:
                        hi_root = t
                    else:
                        I[hh, LT] = t
                    hh = t
                    t = I[t, LT]
                continue
            rem = target - near_len
            full = V[t, LN]
            if rem < full:
                # t keeps `rem`; a fresh node takes the rest of the piece
                V[t, LN] = rem
                _new(V, I, top, V[t, SL], full - rem, inf)
                cut = True
                if from_right:
                    sub = I[t, LT]
                    I[t, LT] = -1
                    if hh < 0:
                        hi_root = t
                    else:
                        I[hh, LT] = t
                    hh = t
                else:
                    sub = I[t, RT]
                    I[t, RT] = -1
                    if lh < 0:
                        lo_root = t
                    else:
                        I[lh, RT] = t
                    lh = t
                break
            target = rem - full
            if from_right:
                if hh < 0:
                    hi_root = t
                else:
                    I[hh, LT] = t
                hh = t
                t = I[t, LT]
            else:
                if lh < 0:
                    lo_root = t
                else:
                    I[lh, RT] = t
                lh = t
                t = I[t, RT]
        if lh >= 0:
            I[lh, RT] = -1
        if hh >= 0:
            I[hh, LT] = -1
        if cut:
            # the subtree beside t goes to the far side, next to the new node
            if from_right:
                if lh < 0:
                    lo_root = sub
                else:
                    I[lh, RT] = sub
            else:
                if hh < 0:
                    hi_root = sub
                else:
                    I[hh, LT] = sub
        for i in range(k - 1, -1, -1):
            _pull(V, I, path[i], inf)
        if cut:
            if from_right:
                lo_root = _merge(V, I, lo_root, top, path, inf)
            else:
                hi_root = _merge(V, I, top, hi_root, path, inf)
        return lo_root, hi_root, cut

    @njit(cache=True)
    def _insert(V, I, root, x, path, path2, inf):
        """Single top-down treap insertion of the detached node *x*."""
        px = I[x, PR]
        ks = V[x, SL]
        parent = -1
        go_right = False
        t = root
        k = 0
        while t >= 0 and I[t, PR] > px:
            _push(V, I, t, inf)
            path[k] = t
            k += 1
            parent = t
            if V[t, SL] < ks:
                go_right = True
                t = I[t, RT]
            else:
                go_right = False
                t = I[t, LT]
        lo, hi = _split(V, I, t, KEY_LT, ks, path2, inf)
        I[x, LT] = lo
        I[x, RT] = hi
        _pull(V, I, x, inf)
        if parent < 0:
            root = x
        elif go_right:
            I[parent, RT] = x
        else:
            I[parent, LT] = x
        for i in range(k - 1, -1, -1):
            _pull(V, I, path[i], inf)
        return root

    @njit(cache=True)
    def _walk_cost(V, I, t, target, from_left, cap, inf):
        """Cost of covering *target* length from one end, then the cap.

        Returns ``(cost, infinite)``.
        """
        cost = target - target
        while t >= 0:
            _push(V, I, t, inf)
            if from_left:
                near = I[t, LT]
                far = I[t, RT]
            else:
                near = I[t, RT]
                far = I[t, LT]
            near_len = V[near, SLEN] if near >= 0 else target - target
            if target <= near_len:
                t = near
                continue
            if near >= 0:
                cost += V[near, SSL]
            rem = target - near_len
            s = V[t, SL]
            if not _finite(s, inf):
                return cost, True
            if rem <= V[t, LN]:
                cost += s * rem
                return (cost if from_left else -cost), False
            cost += s * V[t, LN]
            target = rem - V[t, LN]
            t = far
        if target > 0:
            if not _finite(cap, inf):
                return cost, True
            cost += cap * target
        return (cost if from_left else -cost), False

    @njit(cache=True)
    def _extend(V, I, root, m, b, lcap, rcap, w, path, top, inf):
        """``g(x) += |x| * w``; returns ``(root, m, b, lcap, rcap, cut)``."""
        if w == 0:
            return root, m, b, lcap, rcap, False
        neg, pos = _split(V, I, root, BY_SIGN, w, path, inf)
        cut = False
        if _finite(lcap, inf):
            lcap = lcap - w
        if _finite(rcap, inf):
            rcap = rcap + w
        if b > 0:
            if b <= _len(V, neg):
                far, near, cut = _split_len(V, I, neg, b, True, path, top, inf)
            else:
                # the left cap reaches past 0: cut a finite piece off it
                _new(V, I, top, lcap + w if _finite(lcap, inf) else lcap, b - _len(V, neg), inf)
                far = -1
                near = _merge(V, I, top, neg, path, inf)
                cut = True
            _apply(V, I, far, -w, inf)
            _apply(V, I, near, w, inf)
            _apply(V, I, pos, w, inf)
            stay, flipped = _split(V, I, near, BY_SIGN, w, path, inf)
            if flipped >= 0:
                moved = V[flipped, SLEN]
                gain = V[flipped, SSL] - w * moved
                b = b - moved
                m = m - gain + w * b
            else:
                m = m + w * b
            root = _merge(V, I, _merge(V, I, far, stay, path, inf), _merge(V, I, flipped, pos, path, inf), path, inf)
        elif b < 0:
            if -b <= _len(V, pos):
                near, far, cut = _split_len(V, I, pos, -b, False, path, top, inf)
            else:
                _new(V, I, top, rcap - w if _finite(rcap, inf) else rcap, -b - _len(V, pos), inf)
                far = -1
                near = _merge(V, I, pos, top, path, inf)
                cut = True
            _apply(V, I, neg, -w, inf)
            _apply(V, I, near, -w, inf)
            _apply(V, I, far, w, inf)
            flipped, stay = _split(V, I, near, BY_SIGN, w, path, inf)
            if flipped >= 0:
                moved = V[flipped, SLEN]
                cost = V[flipped, SSL] + w * moved
                b = b + moved
                m = m + cost - w * b
            else:
                m = m - w * b
            root = _merge(V, I, _merge(V, I, neg, flipped, path, inf), _merge(V, I, stay, far, path, inf), path, inf)
        else:
            _apply(V, I, neg, -w, inf)
            _apply(V, I, pos, w, inf)
            root = _merge(V, I, neg, pos, path, inf)
        return root, m, b, lcap, rcap, cut

    @njit(cache=True)
    def _collect(V, I, t, out, stack, inf):
        """Node ids of treap *t* in order, with all slope tags pushed down."""
        k = 0
        sp = 0
        while sp > 0 or t >= 0:
            while t >= 0:
                _push(V, I, t, inf)
                stack[sp] = t
                sp += 1
                t = I[t, LT]
            sp -= 1
            t = stack[sp]
            out[k] = t
            k += 1
            t = I[t, RT]
        return k

    @njit(cache=True)
    def _count(I, t, stack):
        k = 0
        sp = 0
        if t >= 0:
            stack[0] = t
            sp = 1
        while sp > 0:
            sp -= 1
            x = stack[sp]
            k += 1
            if I[x, LT] >= 0:
                stack[sp] = I[x, LT]
                sp += 1
            if I[x, RT] >= 0:
                stack[sp] = I[x, RT]
                sp += 1
        return k

    @njit(cache=True)
    def _kernel(V, I, order, child_ptr, child_idx, pw, a, b, ld, lc, inf):
        n = order.shape[0]
        cap = I.shape[0]
        zero = a[0] - a[0]
        path = np.empty(cap, dtype=np.int64)
        path2 = np.empty(cap, dtype=np.int64)
        buf = np.empty(cap, dtype=np.int64)
        stack = np.empty(cap, dtype=np.int64)
        roots = np.full(n, -1, dtype=np.int64)
        count = np.zeros(n, dtype=np.int64)  # finite pieces
        size = np.ones(n, dtype=np.int64)
        ms = np.zeros(n, dtype=a.dtype)
        bs = np.zeros(n, dtype=a.dtype)
        lcaps = np.zeros(n, dtype=a.dtype)
        rcaps = np.zeros(n, dtype=a.dtype)
        top = 0
        moved_total = 0
        merges = 0
        max_segments = 0
        worst = 0.0
        violations = 0
        for i in range(n - 1, -1, -1):
            v = order[i]
            root = -1
            cnt = 0
            m = zero
            bv = b[v] - a[v]
            lcap = -inf if lc[v] >= inf else -lc[v]
            rcap = ld[v]
            for j in range(child_ptr[v], child_ptr[v + 1]):
                c = child_idx[j]
                croot, cm, cb, clcap, crcap, cut = _extend(
                    V, I, roots[c], ms[c], bs[c], lcaps[c], rcaps[c], pw[c], path, top, inf
                )
                ccnt = count[c]
                if cut:
                    top += 1
                    ccnt += 1
                size[v] += size[c]
                if ccnt + 2 > 3 * size[c]:
                    violations += 1
                ratio = (ccnt + 2) / (3.0 * size[c])
                if ratio > worst:
                    worst = ratio
                if ccnt + 2 > max_segments:
                    max_segments = ccnt + 2
                # min-sum convolution: caps combine, the smaller piece set
                # is inserted into the larger, shadowed pieces are dropped
                lo_cap = lcap if lcap > clcap else clcap
                hi_cap = rcap if rcap < crcap else crcap
                if ccnt > cnt:
                    big, nbig, big_l, big_r = croot, ccnt, clcap, crcap
                    small, nsmall = root, cnt
                else:
                    big, nbig, big_l, big_r = root, cnt, lcap, rcap
                    small, nsmall = croot, ccnt
                if lo_cap > big_l:
                    gone, big = _split(V, I, big, KEY_LT, lo_cap, path, inf)
                    nbig -= _count(I, gone, stack)
                if hi_cap < big_r:
                    big, gone = _split(V, I, big, KEY_LE, hi_cap, path, inf)
                    nbig -= _count(I, gone, stack)
                k = _collect(V, I, small, buf, stack, inf)
                for q in range(k):
                    x = buf[q]
                    s = V[x, SL]
                    if s < lo_cap or s > hi_cap:
                        continue
                    I[x, LT] = -1
                    I[x, RT] = -1
                    big = _insert(V, I, big, x, path, path2, inf)
                    nbig += 1
                moved_total += nsmall
                merges += 1
                root = big
                cnt = nbig
                lcap = lo_cap
                rcap = hi_cap
                m = m + cm
                bv = bv + cb
                roots[c] = -1
            if cnt + 2 > 3 * size[v]:
                violations += 1
            ratio = (cnt + 2) / (3.0 * size[v])
            if ratio > worst:
                worst = ratio
            if cnt + 2 > max_segments:
                max_segments = cnt + 2
            roots[v] = root
            count[v] = cnt
            ms[v] = m
            bs[v] = bv
            lcaps[v] = lcap
            rcaps[v] = rcap
        r = order[0]
        root = roots[r]
        m = ms[r]
        bv = bs[r]
        dist = m
        infinite = False
        if bv != 0:
            neg, pos = _split(V, I, root, BY_SIGN, zero, path, inf)
            if bv < 0:
                cost, infinite = _walk_cost(V, I, pos, -bv, True, rcaps[r], inf)
            else:
                cost, infinite = _walk_cost(V, I, neg, bv, False, lcaps[r], inf)
            dist = m + cost
        return dist, infinite, top, moved_total, merges, max_segments, worst, violations


if _HAVE_NUMBA:

    @njit(cache=True)
    def _max_depth(order, parent, w):
        depth = np.zeros(order.shape[0], dtype=np.int64)
        best = 0
        for i in range(1, order.shape[0]):
            v = order[i]
            d = depth[parent[v]] + w[v]
            depth[v] = d
            if d > best:
                best = d
        return best


def _int_array(arr: np.ndarray):
    """int64 copy with infinity mapped to ``BIG``; ``None`` if out of range."""
    if arr.dtype == np.int64:
        if arr.size and (arr.max() >= LIMIT or arr.min() < 0):
            return None
        return arr
    out = np.empty(len(arr), dtype=np.int64)
    for i, x in enumerate(arr.tolist()):
        if x == math.inf:
            out[i] = BIG
        elif 0 <= x < LIMIT:
            out[i] = int(x)
        else:
            return None
    return out


def _exact_sum(arr: np.ndarray) -> int:
    return sum(arr.tolist())


def fits(inst, rt) -> bool:
    """Whether the compiled engine can solve *inst* without overflow.

    Every finite slope is at most the largest finite cost plus the deepest
    root path. Every true intermediate value is at most the total mass times
    (twice that depth plus the largest finite cost) and, when all costs are
    finite, at most the cost of destroying and creating everything in place.
    """
    if inst.mode == "float":
        return True
    arrays = [_int_array(x) for x in (inst.a, inst.b, inst.ld, inst.lc, inst.weights)]
    if any(x is None for x in arrays):
        return False
    a, b, ld, lc, w = arrays
    if _exact_sum(w) >= LIMIT:
        return False
    depth = int(_max_depth(rt.order, rt.parent, w)) if len(w) > 1 else 0
    sum_a = _exact_sum(a)
    sum_b = _exact_sum(b)
    total = sum_a + sum_b
    fin_d = ld[ld < BIG]
    fin_c = lc[lc < BIG]
    max_fin = max(int(fin_d.max()) if fin_d.size else 0, int(fin_c.max()) if fin_c.size else 0)
    if max_fin + depth >= LIMIT or total >= LIMIT:
        return False
    bound = total * (2 * depth + max_fin)
    if fin_d.size == len(ld) and fin_c.size == len(lc):
        bound = min(bound, sum_a * max_fin + sum_b * max_fin)
    return bound < (1 << 62)


def solve(inst, rt):
    """Distance of *inst* on the rooted tree *rt*; returns ``(distance, info)``."""
    n = inst.tree.n
    if inst.mode == "int":
        a, b, ld, lc, w = (_int_array(x) for x in (inst.a, inst.b, inst.ld, inst.lc, inst.weights))
        inf = np.int64(BIG)
    else:
        a, b, ld, lc, w = (np.asarray(x, dtype=np.float64) for x in (inst.a, inst.b, inst.ld, inst.lc, inst.weights))
        inf = np.float64(np.inf)
    table = np.zeros((n + 1, 8), dtype=np.int64)
    table[:, PR] = np.random.default_rng(SEED).integers(0, 1 << 62, size=len(table), dtype=np.int64)
    values = table if inst.mode == "int" else table.view(np.float64)
    dist, infinite, created, moved, merges, max_seg, worst, violations = _kernel(
        values, table, rt.order, rt.child_ptr, rt.child_idx, w, a, b, ld, lc, inf
    )
    if infinite:
        distance = math.inf
    elif inst.mode == "int":
        distance = int(dist)
    else:
        distance = float(dist)
    info = {
        "segments_created": int(created) + 2 * n,
        "segments_moved": int(moved),
        "merges": int(merges),
        "max_segments": int(max_seg),
        "max_segment_ratio": float(worst),
        "segment_bound_violations": int(violations),
    }
    return distance, info
