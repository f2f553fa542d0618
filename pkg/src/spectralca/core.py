"""Reference machinery for 1D binary cellular automata on a ring.

Conventions used across the package:

* A state is a uint8 array of 0/1 values whose LAST axis is the lattice;
  leading axes are batch axes.  The boundary is always cyclic, so index
  arithmetic is mod L.
* The neighborhood address of cell i is ``m = sum_o 2**(k_right - o) * x[i+o]``
  over offsets ``o in [-k_left, +k_right]``.  For the elementary neighborhood
  this reads ``m = 4*left + 2*center + 1*right``.
* Rule codes expand LSB-first: the output for address m is bit m of the code,
  so rule 110 expands to (0, 1, 1, 1, 0, 1, 1, 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Neighborhood extent: k_left cells to the left, k_right to the right."""

    k_left: int = 1
    k_right: int = 1

    def __post_init__(self):
        if self.k_left < 0 or self.k_right < 0:
            raise ValueError("neighborhood radii must be non-negative")

    @property
    def size(self) -> int:
        return self.k_left + 1 + self.k_right

    @property
    def offsets(self) -> range:
        return range(-self.k_left, self.k_right + 1)

    @property
    def n_patterns(self) -> int:
        return 1 << self.size

    def weight(self, offset: int) -> int:
        """Power-of-two address weight of the cell at `offset` (left bit is MSB)."""
        return 1 << (self.k_right - offset)


ELEMENTARY = NeighborhoodSpec(1, 1)


@dataclass(frozen=True)
class RuleTable:
    """Transition table: ``outputs[m]`` is the next center bit for address m."""

    code: int
    spec: NeighborhoodSpec
    outputs: tuple[int, ...]

    def reconstruct_code(self) -> int:
        """Fold the output bits back into the integer code (LSB-first)."""
        return sum(bit << m for m, bit in enumerate(self.outputs))

    @property
    def center_bits(self) -> tuple[int, ...]:
        """Center bit of every address; equals the outputs of the identity rule."""
        return tuple((m >> self.spec.k_right) & 1 for m in range(self.spec.n_patterns))


def parse_rule(code: int, spec: NeighborhoodSpec = ELEMENTARY) -> RuleTable:
    """Expand an integer rule code into its output table, LSB-first."""
    code = int(code)
    if not 0 <= code < (1 << spec.n_patterns):
        raise ValueError(f"rule code {code} out of range [0, 2**{spec.n_patterns})")
    outputs = tuple((code >> m) & 1 for m in range(spec.n_patterns))
    return RuleTable(code=code, spec=spec, outputs=outputs)


# --------------------------- bit-state helpers ---------------------------

def as_bits(x) -> np.ndarray:
    """Validate a 0/1 array-like and return it as uint8 (last axis = lattice)."""
    a = np.asarray(x)
    if a.ndim == 0 or a.shape[-1] == 0:
        raise ValueError("state must have at least one cell")
    if not np.isin(a, (0, 1)).all():
        raise ValueError("state cells must be 0 or 1")
    return a.astype(np.uint8)


def complement(x) -> np.ndarray:
    return as_bits(x) ^ 1


def single_seed(length: int, index: int | None = None) -> np.ndarray:
    """All-zero state of the given length with a single 1 (default: center)."""
    x = np.zeros(length, dtype=np.uint8)
    x[length // 2 if index is None else index] = 1
    return x


def random_bits(length: int, rng: np.random.Generator, p: float = 0.5) -> np.ndarray:
    return (rng.random(length) < p).astype(np.uint8)


def enumerate_states(length: int) -> np.ndarray:
    """All 2**length states as a (2**length, length) matrix, row i = bits of i."""
    if length > 24:
        raise ValueError("refusing to enumerate more than 2**24 states")
    codes = np.arange(1 << length, dtype=np.int64)
    return ((codes[:, None] >> np.arange(length)) & 1).astype(np.uint8)


def neighborhood_addresses(x, spec: NeighborhoodSpec = ELEMENTARY) -> np.ndarray:
    """Address m of every cell: m_i = sum_o 2**(k_right - o) * x[(i+o) % L]."""
    a = np.asarray(x)
    addr = np.zeros(a.shape, dtype=np.int64)
    for o in spec.offsets:
        addr += spec.weight(o) * np.roll(a, -o, axis=-1).astype(np.int64)
    return addr


# --------------------------- reference evolution ---------------------------

def step_reference(x, rule: RuleTable) -> np.ndarray:
    """One synchronous update by direct table lookup; the oracle for all other paths."""
    x = as_bits(x)
    if x.shape[-1] < rule.spec.size:
        raise ValueError(f"lattice shorter than the neighborhood ({rule.spec.size})")
    lut = np.asarray(rule.outputs, dtype=np.uint8)
    return lut[neighborhood_addresses(x, rule.spec)]


def evolve(x, rule: RuleTable, steps: int) -> np.ndarray:
    """Trajectory of `steps` updates; shape (steps+1,) + x.shape, row 0 = x."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    x = as_bits(x)
    out = np.empty((steps + 1,) + x.shape, dtype=np.uint8)
    out[0] = x
    for t in range(steps):
        out[t + 1] = step_reference(out[t], rule)
    return out


# --------------------------- circulant filters ---------------------------

@dataclass(frozen=True)
class ConvolutionMask:
    """Integer-weighted cyclic convolution: (C x)[i] = sum_o w_o * x[(i+o) % L].

    `weights` is a sorted tuple of (offset, weight) pairs with zero weights
    dropped, so equal masks compare equal.  The L x L matrix realization is
    circulant: every row is a cyclic shift of the previous one.
    """

    weights: tuple[tuple[int, int], ...]

    @classmethod
    def from_dict(cls, weights: Mapping[int, int]) -> "ConvolutionMask":
        items = tuple(sorted((int(o), int(w)) for o, w in weights.items() if w != 0))
        return cls(items)

    @classmethod
    def identity(cls) -> "ConvolutionMask":
        return cls.from_dict({0: 1})

    def as_dict(self) -> dict[int, int]:
        return dict(self.weights)

    @property
    def span(self) -> int:
        if not self.weights:
            return 0
        offsets = [o for o, _ in self.weights]
        return max(offsets) - min(offsets) + 1

    def shifted_by_identity(self) -> "ConvolutionMask":
        """The mask I + C (used by the truncated split form)."""
        d = self.as_dict()
        d[0] = d.get(0, 0) + 1
        return ConvolutionMask.from_dict(d)

    def defining_vector(self, length: int) -> np.ndarray:
        """Length-L vector c with dft(c) = the circulant's eigenvalues."""
        c = np.zeros(length, dtype=np.int64)
        for o, w in self.weights:
            c[(-o) % length] += w
        return c


def addressing_mask(spec: NeighborhoodSpec = ELEMENTARY) -> ConvolutionMask:
    """The mask whose circulant computes neighborhood addresses ({-1:4, 0:2, +1:1})."""
    return ConvolutionMask.from_dict({o: spec.weight(o) for o in spec.offsets})


def apply_circulant(mask: ConvolutionMask, x) -> np.ndarray:
    """Apply the cyclic convolution to an integer or real vector (last axis)."""
    a = np.asarray(x)
    if mask.weights and a.shape[-1] < mask.span:
        raise ValueError("lattice shorter than the mask span")
    dtype = np.int64 if np.issubdtype(a.dtype, np.integer) else np.result_type(a.dtype, np.float64)
    out = np.zeros(a.shape, dtype=dtype)
    for o, w in mask.weights:
        out += w * np.roll(a, -o, axis=-1).astype(dtype)
    return out


# --------------------------- polynomial global map ---------------------------

@dataclass(frozen=True)
class RulePolynomial:
    """Univariate polynomial acting on the shifted address h = 1 + C x.

    kind "root-product": monic of degree 2**|N| built from integer roots,
    one root per address (one-outputs contribute roots shifted by +1).
    kind "interpolated": the unique polynomial of degree < 2**|N| with
    p(m+1) = outputs[m]; this is the form that drives the dynamics.
    """

    coefficients: tuple[Fraction, ...]  # ascending degree
    kind: str
    roots: tuple[int, ...] | None = None

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc


def polynomial_from_rule_roots(rule: RuleTable) -> RulePolynomial:
    """Monic degree-2**|N| polynomial with one integer root per address.

    A zero-output at address m contributes the root m+1; a one-output
    contributes the shifted root (m+1)+1.  Expanded with exact integer
    arithmetic.
    """
    roots = tuple(sorted((m + 1) + bit for m, bit in enumerate(rule.outputs)))
    coeffs = [1]
    for r in roots:
        nxt = [0] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] += c
            nxt[k] -= r * c
        coeffs = nxt
    return RulePolynomial(
        coefficients=tuple(Fraction(c) for c in coeffs),
        kind="root-product",
        roots=roots,
    )


def interpolated_rule_polynomial(rule: RuleTable) -> RulePolynomial:
    """The unique polynomial with p(m+1) = outputs[m], exact rational arithmetic.

    Built by Newton divided differences and verified at every address before
    being returned.
    """
    n = rule.spec.n_patterns
    xs = [Fraction(m + 1) for m in range(n)]
    diffs = [Fraction(v) for v in rule.outputs]
    for k in range(1, n):
        for i in range(n - 1, k - 1, -1):
            diffs[i] = (diffs[i] - diffs[i - 1]) / (xs[i] - xs[i - k])
    # expand the Newton form into ascending monomial coefficients
    poly = [Fraction(0)] * n
    basis = [Fraction(1)]
    for k in range(n):
        for d, b in enumerate(basis):
            poly[d] += diffs[k] * b
        nxt = [Fraction(0)] * (len(basis) + 1)
        for d, b in enumerate(basis):
            nxt[d + 1] += b
            nxt[d] -= xs[k] * b
        basis = nxt
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    result = RulePolynomial(coefficients=tuple(poly), kind="interpolated")
    for m, bit in enumerate(rule.outputs):
        if result(m + 1) != bit:
            raise AssertionError("interpolation failed to reproduce the rule table")
    return result


@lru_cache(maxsize=1024)
def _interpolant_bit_table(rule: RuleTable) -> np.ndarray:
    """Exact values of the interpolated polynomial at h = 1 .. 2**|N|, as bits."""
    p = interpolated_rule_polynomial(rule)
    values = [p(h) for h in range(1, rule.spec.n_patterns + 1)]
    if any(v not in (0, 1) for v in values):
        raise AssertionError("interpolant is not 0/1 on the address range")
    return np.asarray([int(v) for v in values], dtype=np.uint8)


def polynomial_step(x, rule: RuleTable) -> np.ndarray:
    """One update via the polynomial global map: y_i = p(1 + (C x)_i).

    Uses the interpolated polynomial, whose exact values on the address range
    reproduce the rule table, so this always agrees with `step_reference`.
    """
    x = as_bits(x)
    if x.shape[-1] < rule.spec.size:
        raise ValueError(f"lattice shorter than the neighborhood ({rule.spec.size})")
    h = 1 + apply_circulant(addressing_mask(rule.spec), x)
    if h.min() < 1 or h.max() > rule.spec.n_patterns:
        raise ValueError("address outside the polynomial's domain")
    return _interpolant_bit_table(rule)[h - 1]
