"""Binary exposure patterns and the combinatorics on their subset lattice.

An exposure pattern is a length-``p`` vector of 0/1 entries, one per risk
factor, ordered so that ``w <= v`` holds componentwise.  The nonzero
patterns index the structural log-odds-ratio coordinates; their canonical
order is:

    sorted by cardinality (number of ones) ascending, then
    lexicographically by the positions of the ones.

For ``p = 2`` this gives ``(1,0), (0,1), (1,1)``: marginal effects first,
then interactions of increasing order.  All functions here accept patterns
as any sequence of 0/1 ints and return them as tuples.

Internally patterns are integer bitmasks (factor ``j`` is bit ``j``), which
makes the componentwise ``<=`` test a single mask operation.
"""

from functools import lru_cache
from math import comb

import numpy as np

from .errors import InterOddsError

# 2^p parameters blow up quickly; real case-control analyses use a handful
# of factors, so anything past this is almost certainly a mistake.
MAX_FACTORS = 20


def as_mask(bits) -> int:
    """Pack a 0/1 sequence into a bitmask (factor j -> bit j)."""
    bits = tuple(int(b) for b in bits)
    if not 1 <= len(bits) <= MAX_FACTORS:
        raise ValueError(f"pattern length must be in 1..{MAX_FACTORS}, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"pattern entries must be 0 or 1, got {bits}")
    mask = 0
    for j, b in enumerate(bits):
        mask |= b << j
    return mask


def as_bits(mask: int, p: int) -> tuple:
    """Unpack a bitmask into a length-``p`` tuple of 0/1 ints."""
    return tuple((mask >> j) & 1 for j in range(p))


def is_subpattern(w_mask: int, v_mask: int) -> bool:
    """Componentwise ``w <= v`` on bitmasks."""
    return (w_mask & ~v_mask) == 0


def _canonical_masks(p: int) -> list:
    """All 2^p masks in canonical order (cardinality, then one-positions)."""
    key = lambda m: (m.bit_count(), tuple(j for j in range(p) if (m >> j) & 1))
    return sorted(range(1 << p), key=key)


class PatternIndex:
    """Bijection between nonzero patterns and coordinates 0..2^p - 2.

    ``masks[c]`` is the bitmask of the pattern at coordinate ``c``; the
    inverse map is :meth:`coord`.  Instances are cached per ``p`` via
    :func:`pattern_index` and shared freely (all state is read-only).
    """

    def __init__(self, p: int):
        if not 1 <= p <= MAX_FACTORS:
            raise ValueError(f"factor count must be in 1..{MAX_FACTORS}, got {p}")
        self.p = p
        ordered = _canonical_masks(p)[1:]  # drop the zero pattern
        self.masks = np.array(ordered, dtype=np.int64)
        self.masks.setflags(write=False)
        self._coord = {m: c for c, m in enumerate(ordered)}

    @property
    def size(self) -> int:
        return len(self.masks)

    def coord(self, mask: int) -> int:
        """Coordinate of a nonzero pattern mask."""
        return self._coord[mask]

    def pattern(self, coord: int) -> tuple:
        """Pattern tuple stored at a coordinate."""
        return as_bits(int(self.masks[coord]), self.p)

    def patterns(self) -> list:
        """All nonzero patterns as tuples, in coordinate order."""
        return [as_bits(int(m), self.p) for m in self.masks]

    def label(self, coord: int, names=None) -> str:
        """Human-readable name like ``v1:v3`` for the pattern at ``coord``."""
        mask = int(self.masks[coord])
        names = names or [f"v{j + 1}" for j in range(self.p)]
        return ":".join(names[j] for j in range(self.p) if (mask >> j) & 1)


@lru_cache(maxsize=None)
def pattern_index(p: int) -> PatternIndex:
    return PatternIndex(p)


def subpatterns(v) -> list:
    """All patterns ``w <= v`` in canonical order, zero pattern included.

    The result has exactly ``2^|v|`` entries and always contains the zero
    pattern and ``v`` itself.
    """
    bits = tuple(int(b) for b in v)
    p = len(bits)
    v_mask = as_mask(bits)
    out = [m for m in _canonical_masks(p) if is_subpattern(m, v_mask)]
    return [as_bits(m, p) for m in out]


def alternating_sign(v, w) -> int:
    """Inclusion-exclusion sign ``(-1)^(|v| - |w|)`` for ``w <= v``."""
    v_mask, w_mask = as_mask(v), as_mask(w)
    if len(tuple(v)) != len(tuple(w)):
        raise ValueError("patterns must have equal length")
    if not is_subpattern(w_mask, v_mask):
        raise ValueError(f"w={tuple(w)} is not a subpattern of v={tuple(v)}")
    return -1 if (v_mask.bit_count() - w_mask.bit_count()) % 2 else 1


def downset_indicator(u) -> np.ndarray:
    """0/1 vector over the canonical coordinates, marking patterns ``w <= u``.

    The result has exactly ``2^|u| - 1`` ones (every nonzero subpattern
    of ``u``).
    """
    bits = tuple(int(b) for b in u)
    idx = pattern_index(len(bits))
    u_mask = as_mask(bits)
    return ((idx.masks & ~u_mask) == 0).astype(np.int8)


def alternating_binomial_sum(n: int, m: int) -> int:
    """Truncated alternating binomial sum ``sum_{l=0}^{m} (-1)^l C(n, l)``.

    Requires ``0 <= m < n``.  The closed form ``(-1)^m C(n-1, m)`` is
    evaluated alongside the direct sum as a consistency check; the two are
    provably equal, so a mismatch indicates a broken binomial routine.
    """
    if n < 0 or m < 0:
        raise ValueError(f"n and m must be nonnegative, got n={n}, m={m}")
    if m >= n:
        raise ValueError(f"require m < n, got n={n}, m={m}")
    direct = sum((-1) ** l * comb(n, l) for l in range(m + 1))
    closed = (-1) ** m * comb(n - 1, m)
    if direct != closed:
        raise InterOddsError(
            f"alternating binomial identity failed at n={n}, m={m}"
        )
    return direct
