"""Convex piecewise-linear functions in (min value, argmin, segments) form.

A function ``g`` is stored as its minimum ``m``, its leftmost minimiser
``b`` and the multiset of its linear pieces ``(slope, length)`` in
ascending slope order. Pieces with negative slope lie left of ``b``
(nearest first when read from the end of the sequence), the others lie
right of ``b``. Lengths may be infinite, slopes may be ``+-inf``.

The pieces live in a treap ordered by slope. Each treap node keeps the
total length and the total ``slope * length`` of its subtree plus a pending
slope offset, so that splitting at a coordinate, shifting all slopes on one
side, and inserting a piece are logarithmic.

All arithmetic is generic: Python ints give exact results, floats give
double precision. ``math.inf`` is the infinity sentinel in both modes.

A zero-slope piece of infinite length can only be the left tail of a
leaf with zero creation cost; such pieces are flagged ``lean`` and sorted
before the other zero slopes so that they stay on the left of ``b``.
"""
from __future__ import annotations

import math
import random
from typing import Iterable

INF = math.inf

DESTROY = 1
CREATE = -1


class _Node:
    __slots__ = (
        "slope",
        "length",
        "lean",
        "origin",
        "kind",
        "pri",
        "left",
        "right",
        "sum_len",
        "sum_sl",
        "lazy",
    )

    def __init__(self, slope, length, lean=False, origin=-1, kind=0, pri=None):
        self.slope = slope
        self.length = length
        self.lean = lean
        self.origin = origin
        self.kind = kind
        self.pri = _rng.random() if pri is None else pri
        self.left = None
        self.right = None
        self.sum_len = length
        self.sum_sl = _sl(slope, length)
        self.lazy = 0

    def is_left(self) -> bool:
        s = self.slope
        return s < 0 or (s == 0 and self.lean)

    def key(self):
        return (self.slope, 0 if self.lean else 1)


_rng = random.Random(0x5EED)


def _sl(slope, length):
    return 0 if slope == 0 else slope * length


def _apply(t: _Node | None, d) -> None:
    if t is None:
        return
    if -INF < t.slope < INF:
        t.slope += d
    t.lazy += d
    # garbage when the subtree holds an infinite piece; never read then
    t.sum_sl += d * t.sum_len


def _push(t: _Node) -> None:
    d = t.lazy
    if d:
        _apply(t.left, d)
        _apply(t.right, d)
        t.lazy = 0


def _pull(t: _Node) -> None:
    sl = _sl(t.slope, t.length)
    total = t.length
    if t.left is not None:
        total += t.left.sum_len
        sl += t.left.sum_sl
    if t.right is not None:
        total += t.right.sum_len
        sl += t.right.sum_sl
    t.sum_len = total
    t.sum_sl = sl


def _merge(a: _Node | None, b: _Node | None) -> _Node | None:
    if a is None:
        return b
    if b is None:
        return a
    if a.pri > b.pri:
        _push(a)
        a.right = _merge(a.right, b)
        _pull(a)
        return a
    _push(b)
    b.left = _merge(a, b.left)
    _pull(b)
    return b


def _split_sign(t: _Node | None):
    """Split into (pieces left of the argmin, pieces right of it)."""
    if t is None:
        return None, None
    _push(t)
    if t.is_left():
        lo, hi = _split_sign(t.right)
        t.right = lo
        _pull(t)
        return t, hi
    lo, hi = _split_sign(t.left)
    t.left = hi
    _pull(t)
    return lo, t


def _split_key(t: _Node | None, key):
    """Split into (pieces with key < *key*, the rest)."""
    if t is None:
        return None, None
    _push(t)
    if t.key() < key:
        lo, hi = _split_key(t.right, key)
        t.right = lo
        _pull(t)
        return t, hi
    lo, hi = _split_key(t.left, key)
    t.left = hi
    _pull(t)
    return lo, t


def _cut(t: _Node, keep) -> _Node:
    """Shorten *t* to length *keep* and return a new node for the remainder."""
    rest = _Node(t.slope, t.length - keep if t.length != INF else INF, t.lean, t.origin, t.kind)
    t.length = keep
    return rest


def _split_prefix_len(t: _Node | None, target):
    """Split so that the left part has total length exactly *target*.

    The piece straddling the cut is divided in two. If the whole treap is
    shorter than *target*, everything goes left. Returns ``(lo, hi, cut)``
    where *cut* tells whether a piece was divided.
    """
    if t is None:
        return None, None, False
    _push(t)
    left_len = t.left.sum_len if t.left is not None else 0
    if target <= left_len:
        lo, hi, cut = _split_prefix_len(t.left, target)
        t.left = hi
        _pull(t)
        return lo, t, cut
    rem = target - left_len
    if rem < t.length:
        rest = _cut(t, rem)
        rest.right = t.right
        t.right = None
        _pull(t)
        _pull(rest)
        return t, rest, True
    lo, hi, cut = _split_prefix_len(t.right, rem - t.length)
    t.right = lo
    _pull(t)
    return t, hi, cut


def _split_suffix_len(t: _Node | None, target):
    """Mirror of :func:`_split_prefix_len`: the right part has length *target*."""
    if t is None:
        return None, None, False
    _push(t)
    right_len = t.right.sum_len if t.right is not None else 0
    if target <= right_len:
        lo, hi, cut = _split_suffix_len(t.right, target)
        t.right = lo
        _pull(t)
        return t, hi, cut
    rem = target - right_len
    if rem < t.length:
        # t keeps the right-hand `rem`, a new node takes the far part
        far = _cut(t, rem)
        far.left = t.left
        t.left = None
        _pull(t)
        _pull(far)
        return far, t, True
    lo, hi, cut = _split_suffix_len(t.left, rem - t.length)
    t.left = hi
    _pull(t)
    return lo, t, cut


def _walk_cost(t: _Node | None, target, from_left: bool):
    """Cost ``sum(|slope| * covered)`` of covering *target* length.

    Walks from the first piece (``from_left``) or from the last one. Returns
    ``INF`` when the pieces run out or an infinite slope is reached.
    """
    cost = 0
    while t is not None:
        _push(t)
        near, far = (t.left, t.right) if from_left else (t.right, t.left)
        near_len = near.sum_len if near is not None else 0
        if target <= near_len:
            t = near
            continue
        if near is not None:
            cost += near.sum_sl
        rem = target - near_len
        if t.slope == INF or t.slope == -INF:
            return INF
        if rem <= t.length:
            cost += t.slope * rem
            return cost if from_left else -cost
        cost += t.slope * t.length
        target = rem - t.length
        t = far
    return INF


def _insert(t: _Node | None, node: _Node) -> _Node:
    lo, hi = _split_key(t, node.key())
    return _merge(_merge(lo, node), hi)


def _first(t: _Node) -> _Node:
    while True:
        _push(t)
        if t.left is None:
            return t
        t = t.left


def _last(t: _Node) -> _Node:
    while True:
        _push(t)
        if t.right is None:
            return t
        t = t.right


def _inorder(t: _Node | None) -> list[_Node]:
    out = []
    stack = []
    while stack or t is not None:
        while t is not None:
            _push(t)
            stack.append(t)
            t = t.left
        t = stack.pop()
        out.append(t)
        t = t.right
    return out


def _size(t: _Node | None) -> int:
    return len(_inorder(t))


class MergeStats:
    """Counters shared by the functions of one solver run."""

    __slots__ = ("created", "moved", "merges")

    def __init__(self):
        self.created = 0
        self.moved = 0
        self.merges = 0

    def __repr__(self):
        return f"MergeStats(created={self.created}, moved={self.moved}, merges={self.merges})"


class ConvexPLF:
    """A convex piecewise-linear function ``g`` on the real line.

    Parameters
    ----------
    m : number
        Minimum value of ``g``.
    b : number
        Leftmost minimiser of ``g``.
    segments : iterable
        Pieces ``(slope, length)`` (optionally ``(slope, length, origin,
        kind)``) in non-decreasing slope order. An empty collection is the
        function that is ``m`` at ``b`` and infinite elsewhere.
    """

    __slots__ = ("m", "b", "_root", "_count", "stats")

    def __init__(self, m=0, b=0, segments: Iterable = (), stats: MergeStats | None = None):
        self.m = m
        self.b = b
        self._root = None
        self._count = 0
        self.stats = stats
        prev = None
        for i, seg in enumerate(segments):
            slope, length = seg[0], seg[1]
            origin, kind = (seg[2], seg[3]) if len(seg) > 2 else (-1, 0)
            if not length > 0:
                raise ValueError(f"segment {seg} must have positive length")
            if prev is not None and slope < prev:
                raise ValueError("segments must be sorted by slope")
            prev = slope
            lean = i == 0 and slope == 0 and length == INF
            self._push_back(_Node(slope, length, lean, origin, kind))

    def _push_back(self, node: _Node) -> None:
        self._root = _merge(self._root, node)
        self._count += 1
        if self.stats is not None:
            self.stats.created += 1

    @classmethod
    def leaf(cls, a, b, lambda_c, lambda_d, origin: int = -1, stats: MergeStats | None = None):
        """Cost of balancing ``a + x`` supply against ``b`` demand at one node."""
        f = cls(0, b - a, stats=stats)
        f._push_back(_Node(-lambda_c, INF, lambda_c == 0, origin, CREATE))
        f._push_back(_Node(lambda_d, INF, False, origin, DESTROY))
        return f

    # accessors ---------------------------------------------------------

    def __len__(self) -> int:
        return self._count

    @property
    def segment_count(self) -> int:
        return self._count

    @property
    def minimum(self):
        return self.m, self.b

    def segments(self) -> list[tuple]:
        return [(t.slope, t.length) for t in _inorder(self._root)]

    def tagged_segments(self) -> list[tuple]:
        """Pieces as ``(slope, length, origin, kind, left_of_argmin)``."""
        return [(t.slope, t.length, t.origin, t.kind, t.is_left()) for t in _inorder(self._root)]

    def copy(self) -> "ConvexPLF":
        g = ConvexPLF(self.m, self.b, stats=self.stats)
        for t in _inorder(self._root):
            node = _Node(t.slope, t.length, t.lean, t.origin, t.kind)
            g._root = _merge(g._root, node)
        g._count = self._count
        return g

    def __repr__(self):
        return f"ConvexPLF(m={self.m!r}, b={self.b!r}, segments={self.segments()!r})"

    # evaluation ----------------------------------------------------------

    def evaluate(self, x):
        """Value at *x* by walking the pieces outward from ``b``; O(size)."""
        if x == self.b:
            return self.m
        nodes = _inorder(self._root)
        left = [t for t in nodes if t.is_left()]
        right = nodes[len(left):]
        if x > self.b:
            dist, walk = x - self.b, right
        else:
            dist, walk = self.b - x, reversed(left)
        total = self.m
        for t in walk:
            step = t.length if t.length < dist else dist
            total += abs(t.slope) * step
            dist -= step
            if dist == 0:
                return total
        return INF

    __call__ = evaluate

    def value_at(self, x):
        """Value at *x* from the subtree aggregates; O(log size)."""
        if x == self.b:
            return self.m
        neg, pos = _split_sign(self._root)
        if x > self.b:
            cost = _walk_cost(pos, x - self.b, True)
        else:
            cost = _walk_cost(neg, self.b - x, False)
        self._root = _merge(neg, pos)
        return self.m + cost

    # dynamic-programming primitives ---------------------------------------

    def extend(self, w) -> "ConvexPLF":
        """In place: ``g(x) <- |x| * w + g(x)``.

        The piece containing ``x = 0`` (if any) is split there; pieces left of
        0 lose ``w`` of slope and pieces right of it gain ``w``.
        """
        if w == 0:
            return self
        b = self.b
        neg, pos = _split_sign(self._root)
        cut = False
        if b > 0:
            far, near, cut = _split_suffix_len(neg, b)
            _apply(far, -w)
            _apply(near, w)
            _apply(pos, w)
            stay, flipped = _split_sign(near)
            if flipped is not None:
                moved_len = flipped.sum_len
                # original slopes were (new - w)
                gain = flipped.sum_sl - w * moved_len
                self.b = b - moved_len
                self.m = self.m - gain + w * self.b
            else:
                self.m = self.m + w * b
            self._root = _merge(_merge(far, stay), _merge(flipped, pos))
        elif b < 0:
            near, far, cut = _split_prefix_len(pos, -b)
            _apply(neg, -w)
            _apply(near, -w)
            _apply(far, w)
            flipped, stay = _split_sign(near)
            if flipped is not None:
                moved_len = flipped.sum_len
                # original slopes were (new + w)
                cost = flipped.sum_sl + w * moved_len
                self.b = b + moved_len
                self.m = self.m + cost - w * self.b
            else:
                self.m = self.m - w * b
            self._root = _merge(_merge(neg, flipped), _merge(stay, far))
        else:
            _apply(neg, -w)
            _apply(pos, w)
            self._root = _merge(neg, pos)
        if cut:
            self._count += 1
            if self.stats is not None:
                self.stats.created += 1
        return self

    def convolve(self, other: "ConvexPLF") -> "ConvexPLF":
        """Min-sum convolution; consumes both operands and returns the result.

        The pieces of the smaller operand are inserted one by one into the
        larger one.
        """
        big, small = (self, other) if self._count >= other._count else (other, self)
        stats = big.stats or small.stats
        root = big._root
        for t in _inorder(small._root):
            t.left = t.right = None
            t.lazy = 0
            _pull(t)
            root = _insert(root, t)
        if stats is not None:
            stats.moved += small._count
            stats.merges += 1
        big._root = root
        big._count += small._count
        big.m = big.m + small.m
        big.b = big.b + small.b
        big.stats = stats
        small._root = None
        small._count = 0
        return big


# functional interface ------------------------------------------------------


def plf_leaf(a_v, b_v, lambda_c, lambda_d) -> ConvexPLF:
    return ConvexPLF.leaf(a_v, b_v, lambda_c, lambda_d)


def plf_extend(f: ConvexPLF, w) -> ConvexPLF:
    if w < 0 or w == INF:
        raise ValueError("edge weight must be finite and non-negative")
    return f.extend(w)


def plf_convolve(f: ConvexPLF, g: ConvexPLF) -> ConvexPLF:
    return f.convolve(g)


def plf_eval(f: ConvexPLF, x):
    return f.evaluate(x)


def plf_segment_count(f: ConvexPLF) -> int:
    return f.segment_count


def plf_min(f: ConvexPLF) -> tuple:
    return f.minimum
