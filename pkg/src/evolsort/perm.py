"""
Permutations on [n] = {1, ..., n} with a maintained inverse, plus the three
distance measures used throughout the package.

Conventions:
- Positions and values are 1-based everywhere in the public API, matching the
  usual one-line notation (3,1,2) for the permutation p with p(1)=3, p(2)=1,
  p(3)=2.
- Internally a Permutation holds two arrays of length n+1 whose slot 0 is an
  unused sentinel, so ``fwd[i]`` really is p(i). This removes a whole class of
  off-by-one bugs at the cost of one wasted slot.
- The inverse array is always maintained alongside the forward array, making
  position swaps and value swaps O(1).
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "Permutation",
    "swap",
    "mdev",
    "dev",
    "kendall_tau",
    "kendall_tau_naive",
    "random_permutation",
]


class Permutation:
    """A bijection on [n] with its inverse kept in sync.

    >>> Permutation.from_one_line([3, 1, 2]).one_line()
    (3, 1, 2)
    >>> Permutation.identity(3).one_line()
    (1, 2, 3)
    """

    __slots__ = ("n", "fwd", "inv")

    def __init__(self, n: int, fwd: list[int], inv: list[int]):
        self.n = n
        self.fwd = fwd  # fwd[i] = value at position i, i in 1..n; fwd[0] unused
        self.inv = inv  # inv[v] = position of value v; inv[0] unused

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        seq = list(range(n + 1))
        return cls(n, seq, seq.copy())

    @classmethod
    def reverse(cls, n: int) -> "Permutation":
        """The order-reversing permutation (n, n-1, ..., 1)."""
        return cls.from_one_line(range(n, 0, -1))

    @classmethod
    def from_one_line(cls, values) -> "Permutation":
        vals = list(values)
        n = len(vals)
        if n < 1:
            raise ValueError("empty permutation")
        fwd = [0] + [int(v) for v in vals]
        inv = [0] * (n + 1)
        seen = 0
        for i in range(1, n + 1):
            v = fwd[i]
            if v < 1 or v > n:
                raise ValueError(f"value {v} out of range 1..{n}")
            if inv[v]:
                raise ValueError(f"duplicate value {v}")
            inv[v] = i
            seen += 1
        assert seen == n
        return cls(n, fwd, inv)

    @classmethod
    def block_shift(cls, n: int, width: int) -> "Permutation":
        """Cyclic shift of the first ``width``+1 entries; mdev is exactly ``width``.

        Used as a reproducible initial permutation with a prescribed maximum
        deviation: value width+1 sits at position 1 and values 1..width each
        move right by one.
        """
        if not 0 <= width <= n - 1:
            raise ValueError(f"width must be in 0..{n - 1}, got {width}")
        vals = list(range(1, n + 1))
        if width:
            vals[0:width + 1] = [width + 1] + list(range(1, width + 1))
        return cls.from_one_line(vals)

    # -- basic ops ----------------------------------------------------------

    def copy(self) -> "Permutation":
        return Permutation(self.n, self.fwd.copy(), self.inv.copy())

    def one_line(self) -> tuple[int, ...]:
        return tuple(self.fwd[1:])

    def __call__(self, i: int) -> int:
        self._check_pos(i)
        return self.fwd[i]

    def position_of(self, v: int) -> int:
        self._check_pos(v)
        return self.inv[v]

    def inverse(self) -> "Permutation":
        return Permutation(self.n, self.inv.copy(), self.fwd.copy())

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.fwd == other.fwd

    def __hash__(self):
        return hash(tuple(self.fwd))

    def __repr__(self) -> str:
        return f"Permutation{self.one_line()}"

    def _check_pos(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise IndexError(f"position {i} out of range 1..{self.n}")

    def swap_positions(self, i1: int, i2: int) -> None:
        """In-place exchange of the values at positions i1 and i2."""
        self._check_pos(i1)
        self._check_pos(i2)
        fwd, inv = self.fwd, self.inv
        u, w = fwd[i1], fwd[i2]
        fwd[i1], fwd[i2] = w, u
        inv[u], inv[w] = i2, i1

    def swap_values(self, v1: int, v2: int) -> None:
        """In-place exchange of the positions of values v1 and v2."""
        self._check_pos(v1)
        self._check_pos(v2)
        fwd, inv = self.fwd, self.inv
        p1, p2 = inv[v1], inv[v2]
        fwd[p1], fwd[p2] = v2, v1
        inv[v1], inv[v2] = p2, p1

    def validate(self) -> None:
        """Debug-mode invariant check: bijection plus inverse consistency."""
        n = self.n
        if len(self.fwd) != n + 1 or len(self.inv) != n + 1:
            raise AssertionError("array length mismatch")
        seen = [False] * (n + 1)
        for i in range(1, n + 1):
            v = self.fwd[i]
            if not 1 <= v <= n:
                raise AssertionError(f"fwd[{i}]={v} out of range")
            if seen[v]:
                raise AssertionError(f"value {v} appears twice")
            seen[v] = True
            if self.inv[v] != i:
                raise AssertionError(f"inverse out of sync at value {v}")


def swap(p: Permutation, i1: int, i2: int) -> Permutation:
    """Return a copy of p with the values at positions i1 and i2 exchanged.

    >>> swap(Permutation.identity(3), 1, 3).one_line()
    (3, 2, 1)
    """
    q = p.copy()
    q.swap_positions(i1, i2)
    return q


def _check_same_n(p: Permutation, q: Permutation) -> None:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")


def mdev(p: Permutation, q: Permutation | None = None) -> int:
    """Maximum deviation max_i |p(i) - q(i)|; q defaults to the identity."""
    fwd = p.fwd
    if q is None:
        return max(abs(fwd[i] - i) for i in range(1, p.n + 1))
    _check_same_n(p, q)
    qf = q.fwd
    return max(abs(fwd[i] - qf[i]) for i in range(1, p.n + 1))


def dev(p: Permutation, q: Permutation | None = None) -> int:
    """Total deviation (Spearman's footrule) sum_i |p(i) - q(i)|."""
    fwd = p.fwd
    if q is None:
        return sum(abs(fwd[i] - i) for i in range(1, p.n + 1))
    _check_same_n(p, q)
    qf = q.fwd
    return sum(abs(fwd[i] - qf[i]) for i in range(1, p.n + 1))


def _count_inversions(seq: list[int], n: int) -> int:
    # Fenwick tree over values 1..n; O(n log n).
    tree = [0] * (n + 1)
    inversions = 0
    for idx, v in enumerate(seq):
        # count previously seen values strictly greater than v
        j = v
        le = 0
        while j > 0:
            le += tree[j]
            j -= j & (-j)
        inversions += idx - le
        j = v
        while j <= n:
            tree[j] += 1
            j += j & (-j)
    return inversions


def kendall_tau(p: Permutation, q: Permutation | None = None) -> int:
    """Kendall-tau distance |{(i,j): p(i) < p(j), q(i) > q(j)}|.

    Runs in O(n log n) by counting inversions of p read in q-sorted position
    order.  ``kendall_tau_naive`` is the quadratic pair-enumeration oracle.
    """
    n = p.n
    if q is None:
        rel = p.fwd[1:]
    else:
        _check_same_n(p, q)
        qi, pf = q.inv, p.fwd
        rel = [pf[qi[k]] for k in range(1, n + 1)]
    return _count_inversions(rel, n)


def kendall_tau_naive(p: Permutation, q: Permutation | None = None) -> int:
    """Quadratic oracle: enumerate every position pair and count discords."""
    if q is None:
        q = Permutation.identity(p.n)
    _check_same_n(p, q)
    a = np.asarray(p.fwd[1:])
    b = np.asarray(q.fwd[1:])
    lt = a[:, None] < a[None, :]
    gt = b[:, None] > b[None, :]
    return int(np.count_nonzero(lt & gt))


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    return Permutation.from_one_line(rng.permutation(n) + 1)
