"""Neighborhood-pattern projector algebra.

Every neighborhood pattern induces an indicator operator on states: cell i
of the output is 1 exactly when the neighborhood of cell i matches the
pattern.  The 2**|N| indicators of a neighborhood partition every state
(they are pairwise orthogonal and sum to the all-ones vector), which lets a
CA step be written as a sum of indicators over the one-output patterns.

Patterns are stored offset-indexed, (b_{-1}, b_0, b_{+1}) for the elementary
neighborhood.  Compact digit labels such as "110" are read right-to-left
relative to that order (label "110" selects left=0, center=1, right=1); use
`PatternProjector.from_label` to convert.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import ELEMENTARY, NeighborhoodSpec, RuleTable, as_bits


def cyclic_shift(x, offset: int) -> np.ndarray:
    """(K_o x)[i] = x[(i + offset) % L], acting on the last axis."""
    return np.roll(np.asarray(x), -offset, axis=-1)


@dataclass(frozen=True)
class PatternProjector:
    """Indicator of cells whose neighborhood equals `pattern` (offset order)."""

    pattern: tuple[int, ...]
    spec: NeighborhoodSpec = ELEMENTARY

    def __post_init__(self):
        if len(self.pattern) != self.spec.size:
            raise ValueError("pattern length must equal the neighborhood size")
        if any(b not in (0, 1) for b in self.pattern):
            raise ValueError("pattern bits must be 0 or 1")

    @property
    def address(self) -> int:
        return sum(self.spec.weight(o) * b for o, b in zip(self.spec.offsets, self.pattern))

    @classmethod
    def from_address(cls, m: int, spec: NeighborhoodSpec = ELEMENTARY) -> "PatternProjector":
        if not 0 <= m < spec.n_patterns:
            raise ValueError(f"address {m} out of range")
        bits = tuple((m >> (spec.k_right - o)) & 1 for o in spec.offsets)
        return cls(pattern=bits, spec=spec)

    @classmethod
    def from_label(cls, digits: str, spec: NeighborhoodSpec = ELEMENTARY) -> "PatternProjector":
        """Build from a compact digit label, read right-to-left.

        Label "110" selects (left, center, right) = (0, 1, 1).
        """
        return cls(pattern=tuple(int(c) for c in reversed(digits)), spec=spec)


def project_pattern(proj: PatternProjector, x) -> np.ndarray:
    """Bitwise-AND product of shifted factors: x for one-bits, complement for zero-bits."""
    x = as_bits(x)
    if x.shape[-1] < proj.spec.size:
        raise ValueError("lattice shorter than the neighborhood")
    out = np.ones(x.shape, dtype=np.uint8)
    for o, b in zip(proj.spec.offsets, proj.pattern):
        out &= cyclic_shift(x if b else x ^ 1, o)
    return out


def expand_projector_multinomial(proj: PatternProjector, x) -> np.ndarray:
    """Same indicator via the distributed integer expansion of the complements.

    Each zero-bit factor (1 - K_o x) is expanded, so the indicator becomes a
    signed sum over subsets of the zero offsets of plain shifted products,
    evaluated over the integers and mapped back to bits at the end.
    """
    x = as_bits(x).astype(np.int64)
    ones = [o for o, b in zip(proj.spec.offsets, proj.pattern) if b]
    zeros = [o for o, b in zip(proj.spec.offsets, proj.pattern) if not b]
    base = np.ones(x.shape, dtype=np.int64)
    for o in ones:
        base = base * cyclic_shift(x, o)
    total = np.zeros(x.shape, dtype=np.int64)
    for k in range(len(zeros) + 1):
        for subset in itertools.combinations(zeros, k):
            term = base.copy()
            for o in subset:
                term = term * cyclic_shift(x, o)
            total += (-1) ** k * term
    if ((total < 0) | (total > 1)).any():
        raise AssertionError("multinomial expansion left {0,1}")
    return total.astype(np.uint8)


def resolution_of_identity(x, spec: NeighborhoodSpec = ELEMENTARY) -> np.ndarray:
    """Integer sum of all 2**|N| indicators; equals the all-ones vector."""
    x = as_bits(x)
    total = np.zeros(x.shape, dtype=np.int64)
    for m in range(spec.n_patterns):
        total += project_pattern(PatternProjector.from_address(m, spec), x)
    return total


@lru_cache(maxsize=1024)
def _one_projectors(rule: RuleTable) -> tuple[PatternProjector, ...]:
    return tuple(
        PatternProjector.from_address(m, rule.spec)
        for m, bit in enumerate(rule.outputs)
        if bit
    )


def evolve_via_projectors(x, rule: RuleTable) -> np.ndarray:
    """One update as the sum of indicators over the rule's one-output patterns."""
    x = as_bits(x)
    out = np.zeros(x.shape, dtype=np.uint8)
    for proj in _one_projectors(rule):
        out |= project_pattern(proj, x)
    return out


def langlet_matrix(order: int) -> np.ndarray:
    """Binary fractal matrix marking the pairs that XOR-add without carries.

    Built by `order` applications of the block recursion
    h <- [[h, h], [h, 0]] starting from h = [[1, 1], [1, 0]], so the result
    has size 2**(order+1).  Entry (i, j) is 1 exactly when i AND j == 0,
    equivalently when i + j == i XOR j.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if order > 12:
        raise ValueError("order above 12 not supported (matrix would exceed memory guard)")
    h = np.array([[1, 1], [1, 0]], dtype=np.uint8)
    for _ in range(order):
        h = np.block([[h, h], [h, np.zeros_like(h)]])
    return h
