"""Odds ratios and additive odds-scale measures of joint effects.

The structural parameters are the ``2^p - 1`` log odds ratios of a
logistic model saturated in ``p`` binary risk factors.  The odds ratio at
an exposure pattern ``v`` is ``exp`` of the sum of the parameters over the
nonzero subpatterns of ``v``; everything else in this module is built from
alternating-sign combinations of those odds ratios over sublattices:

* :func:`or_increment` -- the inclusion-exclusion increment of the odds
  ratio over the cube below a pattern; order >= 2 increments quantify
  additive interaction.
* :func:`predicted_or` -- the odds ratio reconstructed from increments of
  order at most ``i`` (a truncated expansion).
* :func:`excess_or` -- what the truncation leaves unexplained.
* :func:`measure` -- the joint odds ratio, excess odds ratio, attributable
  proportion and synergy index, all functions of the triple
  (joint OR, predicted OR, baseline OR).

A measure always concerns a set J of varying factors; the remaining
factors K are held fixed at user-chosen levels, so every odds ratio here
is evaluated at a full pattern assembled from (levels over J, fixed levels
over K).
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import comb, fsum
from typing import Mapping, Optional

import numpy as np

from .errors import OrderRangeError, UndefinedSynergyError
from .patterns import MAX_FACTORS, as_mask, pattern_index

KINDS = ("OR", "EOR", "AP", "SI")

_KIND_ALIASES = {
    "OR": "OR",
    "OR_JOINT": "OR",
    "EOR": "EOR",
    "AP": "AP",
    "SI": "SI",
}


def canonical_kind(kind: str) -> str:
    """Normalize a measure-kind token ('or', 'OR_JOINT', ...) to KINDS."""
    try:
        return _KIND_ALIASES[str(kind).strip().upper()]
    except KeyError:
        raise ValueError(f"unknown measure kind {kind!r}; expected one of {KINDS}")


@dataclass(eq=False)
class StructuralParams:
    """The log odds-ratio parameters of the saturated factor model.

    Parameters
    ----------
    psi : array_like
        Length ``2^p - 1`` vector on the log odds-ratio scale, indexed by
        the canonical pattern order of :mod:`interodds.patterns`.
    p : int
        Number of binary risk factors.
    """

    psi: np.ndarray
    p: int

    def __post_init__(self):
        if not 1 <= self.p <= MAX_FACTORS:
            raise ValueError(f"factor count must be in 1..{MAX_FACTORS}, got {self.p}")
        psi = np.array(self.psi, dtype=float)
        if psi.shape != ((1 << self.p) - 1,):
            raise ValueError(
                f"psi must have length 2^{self.p} - 1 = {(1 << self.p) - 1}, "
                f"got shape {psi.shape}"
            )
        if not np.all(np.isfinite(psi)):
            raise ValueError("psi entries must all be finite")
        psi.setflags(write=False)
        self.psi = psi

    @classmethod
    def zeros(cls, p: int) -> "StructuralParams":
        return cls(np.zeros((1 << p) - 1), p)

    @cached_property
    def log_or_table(self) -> np.ndarray:
        """Log odds ratios for all 2^p exposure patterns, indexed by bitmask.

        Computed with the subset-sum dynamic program (one pass per factor),
        so a single evaluation costs ``p * 2^p`` additions.  Entry 0 is
        exactly 0.
        """
        idx = pattern_index(self.p)
        s = np.zeros(1 << self.p)
        s[idx.masks] = self.psi
        s = s.reshape((2,) * self.p)
        for ax in range(self.p):
            sel_hi = (slice(None),) * ax + (1,)
            sel_lo = (slice(None),) * ax + (0,)
            s[sel_hi] += s[sel_lo]
        s = s.reshape(-1)
        s.setflags(write=False)
        return s

    @cached_property
    def or_table(self) -> np.ndarray:
        """Odds ratios for all 2^p exposure patterns, indexed by bitmask.

        ``exp`` of :attr:`log_or_table`; every odds-ratio lookup after the
        first is O(1).  Entry 0 is exactly 1.
        """
        table = np.exp(self.log_or_table)
        table.setflags(write=False)
        return table


@dataclass
class MeasureSpec:
    """Which measure to compute, for which factors, at which order.

    ``fixed`` maps factor positions (0-based) to the 0/1 level they are
    held at; the varying set J is everything else.  ``order`` is the
    smallest interaction order the measure charges: 1 targets the joint
    effect of all of J, ``len(J)`` targets only the highest-order
    interaction.  The joint odds ratio ("OR") does not use an order.
    """

    p: int
    kind: str
    order: Optional[int] = None
    fixed: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self.kind = canonical_kind(self.kind)
        self.fixed = dict(self.fixed)
        for j, level in self.fixed.items():
            if not (isinstance(j, (int, np.integer)) and 0 <= j < self.p):
                raise ValueError(f"fixed factor {j!r} outside 0..{self.p - 1}")
            if level not in (0, 1):
                raise ValueError(f"fixed level for factor {j} must be 0 or 1")
        if len(self.fixed) >= self.p:
            raise ValueError("at least one factor must vary")
        nj = self.p - len(self.fixed)
        if self.kind == "OR":
            if self.order is not None and not 1 <= self.order <= nj:
                raise OrderRangeError(
                    f"order {self.order} outside 1..{nj} for kind OR"
                )
        elif self.kind in ("EOR", "AP"):
            if self.order is None or not 1 <= self.order <= nj:
                raise OrderRangeError(
                    f"{self.kind} requires order in 1..{nj}, got {self.order}"
                )
        else:  # SI quantifies interaction only, so order 1 is meaningless
            if self.order is None or not 2 <= self.order <= nj:
                raise OrderRangeError(
                    f"SI requires order in 2..{nj}, got {self.order}"
                )

    @property
    def varying(self) -> tuple:
        """The factor positions in J, ascending."""
        return tuple(j for j in range(self.p) if j not in self.fixed)

    @property
    def effective_order(self) -> int:
        return 1 if self.order is None else self.order


@dataclass
class MeasureParts:
    """The three odds ratios every measure is built from."""

    joint: float  # OR with every varying factor on
    predicted: float  # reconstruction from increments below the target order
    baseline: float  # OR with every varying factor off


def _validate_fixed(p: int, fixed) -> tuple:
    """Return (varying factors tuple, bitmask of fixed-at-1 factors)."""
    if not fixed:
        return _all_varying(p), 0
    held_mask = 0
    level_mask = 0
    for j, level in fixed.items():
        if not (isinstance(j, (int, np.integer)) and 0 <= j < p):
            raise ValueError(f"fixed factor {j!r} outside 0..{p - 1}")
        held_mask |= 1 << j
        if level == 1:
            level_mask |= 1 << j
        elif level != 0:
            raise ValueError(f"fixed level for factor {j} must be 0 or 1")
    return _varying_of(p, held_mask), level_mask


@lru_cache(maxsize=None)
def _all_varying(p):
    return tuple(range(p))


@lru_cache(maxsize=100_000)
def _varying_of(p, held_mask):
    varying = tuple(j for j in range(p) if not (held_mask >> j) & 1)
    if not varying:
        raise ValueError("at least one factor must vary")
    return varying


def _local_mask(v_j, varying) -> int:
    if len(v_j) != len(varying):
        raise ValueError(
            f"expected {len(varying)} levels for the varying factors, got {len(v_j)}"
        )
    mask = 0
    for i, b in enumerate(v_j):
        if b == 1:
            mask |= 1 << i
        elif b != 0:
            raise ValueError(f"levels must be 0 or 1, got {tuple(v_j)}")
    return mask


def _spread(local: int, varying) -> int:
    """Lift a mask over the varying factors to a full-pattern mask."""
    m = 0
    for i, j in enumerate(varying):
        if (local >> i) & 1:
            m |= 1 << j
    return m


@lru_cache(maxsize=100_000)
def _increment_terms(p, varying, vj_local, fixed_mask):
    """Gather masks and signs for one alternating-sign increment."""
    masks, signs = [], []
    d = vj_local.bit_count()
    for w in range(1 << len(varying)):
        if w & ~vj_local:
            continue
        masks.append(_spread(w, varying) | fixed_mask)
        signs.append(-1.0 if (d - w.bit_count()) % 2 else 1.0)
    masks, signs = np.array(masks), np.array(signs)
    masks.setflags(write=False)
    signs.setflags(write=False)
    return masks, signs


@lru_cache(maxsize=100_000)
def _prediction_terms(p, varying, vj_local, fixed_mask, order):
    """Gather masks and closed-form coefficients for a truncated prediction.

    The coefficient of the odds ratio at subpattern w (|w| <= order) is
    ``(-1)^(order - |w|) * C(|v_J| - 1 - |w|, order - |w|)``.
    """
    d = vj_local.bit_count()
    masks, coeffs = [], []
    for w in range(1 << len(varying)):
        if w & ~vj_local:
            continue
        k = w.bit_count()
        if k > order:
            continue
        masks.append(_spread(w, varying) | fixed_mask)
        coeffs.append((-1.0) ** (order - k) * comb(d - 1 - k, order - k))
    masks, coeffs = np.array(masks), np.array(coeffs)
    masks.setflags(write=False)
    coeffs.setflags(write=False)
    return masks, coeffs


def odds_ratio(params: StructuralParams, v) -> float:
    """Odds ratio of exposure pattern ``v`` against the all-zero pattern.

    Equals ``exp`` of the sum of ``psi`` over the nonzero subpatterns of
    ``v``; exactly 1.0 when ``v`` is the zero pattern.
    """
    bits = tuple(int(b) for b in v)
    if len(bits) != params.p:
        raise ValueError(f"pattern length {len(bits)} != p = {params.p}")
    return float(params.or_table[as_mask(bits)])


def _or_at(params, varying, local_mask, fixed_mask) -> float:
    return float(params.or_table[_spread(local_mask, varying) | fixed_mask])


def or_increment(params: StructuralParams, v_j, fixed=None) -> float:
    """Alternating-sign increment of the odds ratio at ``v_j``.

    Parameters
    ----------
    v_j : sequence of 0/1
        Levels of the varying factors (ascending factor order).
    fixed : mapping, optional
        Levels at which the remaining factors are held.

    Returns
    -------
    float
        ``sum over w <= v_j of (-1)^(|v_j| - |w|) OR(w, fixed)``.  At the
        zero pattern this is the baseline odds ratio; for a single factor
        it is a plain difference of odds ratios; for two or more factors
        it measures additive interaction net of all lower orders.
    """
    varying, fixed_mask = _validate_fixed(params.p, fixed)
    vj_local = _local_mask(v_j, varying)
    masks, signs = _increment_terms(params.p, varying, vj_local, fixed_mask)
    # alternating sums cancel heavily; fsum keeps the increment correctly
    # rounded instead of accumulating error term by term
    return fsum((signs * params.or_table[masks]).tolist())


def predicted_or(params: StructuralParams, v_j, fixed, order: int) -> float:
    """Odds ratio at ``v_j`` predicted from increments of order <= ``order``.

    Uses the closed-form coefficients over the subpatterns with at most
    ``order`` active factors (the fast path); at ``order == |v_j|`` the
    truncation is vacuous and the exact odds ratio is returned.
    """
    varying, fixed_mask = _validate_fixed(params.p, fixed)
    vj_local = _local_mask(v_j, varying)
    d = vj_local.bit_count()
    if not 0 <= order <= d:
        raise OrderRangeError(f"prediction order must be in 0..{d}, got {order}")
    if order == d:
        return _or_at(params, varying, vj_local, fixed_mask)
    masks, coeffs = _prediction_terms(
        params.p, varying, vj_local, fixed_mask, order
    )
    return fsum((coeffs * params.or_table[masks]).tolist())


def predicted_or_increments(params: StructuralParams, v_j, fixed, order: int) -> float:
    """Reference implementation of :func:`predicted_or`: sum the increments.

    Literally adds :func:`or_increment` over every subpattern of ``v_j``
    with at most ``order`` active factors.  Slower than the closed form
    but definitionally transparent; kept as a cross-check.
    """
    varying, fixed_mask = _validate_fixed(params.p, fixed)
    vj_local = _local_mask(v_j, varying)
    d = vj_local.bit_count()
    if not 0 <= order <= d:
        raise OrderRangeError(f"prediction order must be in 0..{d}, got {order}")
    table = params.or_table
    increments = []
    for w in range(1 << len(varying)):
        if w & ~vj_local or w.bit_count() > order:
            continue
        masks, signs = _increment_terms(params.p, varying, w, fixed_mask)
        increments.append(fsum((signs * table[masks]).tolist()))
    return fsum(increments)


def excess_or(params: StructuralParams, fixed, order: int) -> float:
    """Joint odds ratio minus its prediction from orders below ``order``.

    Evaluated with every varying factor on.  Quantifies the contribution
    of increments of order >= ``order``: at order 1 the whole effect of
    the varying factors, at order ``len(J)`` only the top interaction.
    """
    varying, fixed_mask = _validate_fixed(params.p, fixed)
    nj = len(varying)
    if not 1 <= order <= nj:
        raise OrderRangeError(f"order must be in 1..{nj}, got {order}")
    ones = (1,) * nj
    a = _or_at(params, varying, (1 << nj) - 1, fixed_mask)
    b = predicted_or(params, ones, fixed, order - 1)
    return a - b


def excess_or_explicit(params: StructuralParams, fixed, order: int) -> float:
    """Hand-expanded excess odds ratio for one, two or three varying factors.

    Exists purely as a cross-check oracle against :func:`excess_or`; the
    formulas below are written out term by term.
    """
    varying, fixed_mask = _validate_fixed(params.p, fixed)
    nj = len(varying)
    if nj > 3:
        raise ValueError(f"explicit formulas cover up to 3 varying factors, got {nj}")
    if not 1 <= order <= nj:
        raise OrderRangeError(f"order must be in 1..{nj}, got {order}")

    def OR(*levels):
        return _or_at(params, varying, _local_mask(levels, varying), fixed_mask)

    if nj == 1:
        return OR(1) - OR(0)
    if nj == 2:
        if order == 1:
            return OR(1, 1) - OR(0, 0)
        return OR(1, 1) - OR(1, 0) - OR(0, 1) + OR(0, 0)
    if order == 1:
        return OR(1, 1, 1) - OR(0, 0, 0)
    if order == 2:
        return (
            OR(1, 1, 1)
            - OR(1, 0, 0)
            - OR(0, 1, 0)
            - OR(0, 0, 1)
            + 2 * OR(0, 0, 0)
        )
    return (
        OR(1, 1, 1)
        - OR(1, 1, 0)
        - OR(1, 0, 1)
        - OR(0, 1, 1)
        + OR(1, 0, 0)
        + OR(0, 1, 0)
        + OR(0, 0, 1)
        - OR(0, 0, 0)
    )


def measure_parts(params: StructuralParams, spec: MeasureSpec) -> MeasureParts:
    """The (joint, predicted, baseline) odds-ratio triple for a spec."""
    varying, fixed_mask = _validate_fixed(params.p, spec.fixed)
    nj = len(varying)
    joint = _or_at(params, varying, (1 << nj) - 1, fixed_mask)
    baseline = _or_at(params, varying, 0, fixed_mask)
    predicted = predicted_or(
        params, (1,) * nj, spec.fixed, spec.effective_order - 1
    )
    return MeasureParts(joint=joint, predicted=predicted, baseline=baseline)


def measure(params: StructuralParams, spec: MeasureSpec) -> float:
    """Evaluate the measure named by ``spec`` at the given parameters.

    * ``OR``: joint / baseline, the adjusted odds ratio of all varying
      factors together.  Range (0, inf); 1 means no effect.
    * ``EOR``: (joint - predicted) / baseline.  Range (-inf, inf); 0
      means no effect.
    * ``AP``: (joint - predicted) / max(joint, predicted); 0 means no
      effect.  The max-normalized denominator keeps the value inside
      [-1, 1] whenever the prediction is nonnegative (it always is for
      realistic effect sizes; a negative prediction needs extreme
      antagonism and pushes AP above 1).
    * ``SI``: (joint - baseline) / (predicted - baseline).  Defined only
      when both numerator and denominator effects are positive; range
      (0, inf); 1 means no effect.

    Raises
    ------
    UndefinedSynergyError
        For SI when joint <= baseline or predicted <= baseline (strict
        comparisons, no tolerance).
    """
    parts = measure_parts(params, spec)
    a, b, c = parts.joint, parts.predicted, parts.baseline
    if spec.kind == "OR":
        return a / c
    if spec.kind == "EOR":
        return (a - b) / c
    if spec.kind == "AP":
        return (a - b) / max(a, b)
    if not (a > c and b > c):
        raise UndefinedSynergyError(
            "synergy index needs the joint and predicted odds ratios to "
            f"exceed the baseline; got joint={a:.6g}, predicted={b:.6g}, "
            f"baseline={c:.6g}"
        )
    return (a - c) / (b - c)
