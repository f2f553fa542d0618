"""Rule truncation, transition-economy classification, and split linearization.

A rule table can be rewritten as a ternary transition vector (+1 where a 0
cell turns on, -1 where a 1 cell turns off, 0 where it idles), so a step
becomes "state plus transitions".  Searching for the integer convolution
mask that absorbs the most transitions, and repairing the few residual
neighborhoods with signed pattern indicators, splits any rule into a linear
circulant part plus a minimal correction sum that reproduces it exactly.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    ELEMENTARY,
    ConvolutionMask,
    NeighborhoodSpec,
    RuleTable,
    apply_circulant,
    as_bits,
    neighborhood_addresses,
    parse_rule,
)
from .projectors import PatternProjector, project_pattern


@dataclass(frozen=True)
class TruncatedRule:
    """Ternary transition vector: entries[m] = outputs[m] - center_bit(m)."""

    entries: tuple[int, ...]
    spec: NeighborhoodSpec
    source_code: int


def truncate_rule(rule: RuleTable) -> TruncatedRule:
    """Extract the transitions by the bitwise formula (XOR difference, AND sign).

    Componentwise: (s XOR g) - 2*((1-s) AND g) with g the center bit, which
    equals s - g with values in {-1, 0, +1}.
    """
    entries = tuple(
        (s ^ g) - 2 * ((1 - s) & g)
        for s, g in zip(rule.outputs, rule.center_bits)
    )
    return TruncatedRule(entries=entries, spec=rule.spec, source_code=rule.code)


def truncated_step(x, rt: TruncatedRule) -> np.ndarray:
    """One update as state plus transition: y_i = x_i + entries[m(i)]."""
    x = as_bits(x)
    delta = np.asarray(rt.entries, dtype=np.int64)[neighborhood_addresses(x, rt.spec)]
    y = x.astype(np.int64) + delta
    if ((y < 0) | (y > 1)).any():
        raise AssertionError("truncated step left {0,1}; transition table inconsistent")
    return y.astype(np.uint8)


@dataclass(frozen=True)
class RuleStats:
    """Activity fraction lam, transition fraction lam_t, and their ratio."""

    lam: Fraction
    lam_t: Fraction
    ratio: Fraction | float  # math.inf when lam_t == 0


def rule_stats(rule: RuleTable) -> RuleStats:
    n = rule.spec.n_patterns
    lam = Fraction(sum(rule.outputs), n)
    lam_t = Fraction(sum(abs(e) for e in truncate_rule(rule).entries), n)
    ratio = math.inf if lam_t == 0 else lam / lam_t
    return RuleStats(lam=lam, lam_t=lam_t, ratio=ratio)


def classify_efficient_rules() -> frozenset[int]:
    """Elementary rules whose transition fraction is strictly below their activity."""
    efficient = []
    for code in range(256):
        s = rule_stats(parse_rule(code))
        if s.lam_t < s.lam:
            efficient.append(code)
    return frozenset(efficient)


def truncated_rule_codes() -> list[tuple[int, int, int]]:
    """(rule, signed code, magnitude code) for all 256 elementary rules.

    signed = sum_m entries[m] * 2**m, magnitude = sum_m |entries[m]| * 2**m.
    """
    rows = []
    for code in range(256):
        entries = truncate_rule(parse_rule(code)).entries
        signed = sum(e << m for m, e in enumerate(entries))
        magnitude = sum(abs(e) << m for m, e in enumerate(entries))
        rows.append((code, signed, magnitude))
    return rows


def write_rule_economy_csv(path) -> None:
    """Emit the 256-rule table: rule, lambda, lambda_T, signed/magnitude codes, efficient flag."""
    efficient = classify_efficient_rules()
    codes = truncated_rule_codes()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rule", "lambda", "lambda_T", "signed_code", "magnitude_code", "efficient"])
        for code, signed, magnitude in codes:
            s = rule_stats(parse_rule(code))
            writer.writerow(
                [code, repr(float(s.lam)), repr(float(s.lam_t)), signed, magnitude, int(code in efficient)]
            )


def search_linear_mask(
    target, bound: int = 2, spec: NeighborhoodSpec = ELEMENTARY
) -> tuple[ConvolutionMask, dict[int, int]]:
    """Exhaustive search for the integer mask best matching a per-address target.

    For every weight triple in [-bound, bound]^|N| the prediction at address m
    is sum_o w_o * bit_o(m).  The winner minimizes, in order: the number of
    nonzero residuals, their L1 norm, then the lexicographically smallest
    weight tuple (offsets ascending), so results are reproducible.  Returns
    the mask and the map {address: target - prediction} of nonzero residuals.
    """
    target = tuple(int(t) for t in target)
    if len(target) != spec.n_patterns:
        raise ValueError("target must give one value per neighborhood address")
    if bound < 1:
        raise ValueError("bound must be >= 1")
    offsets = list(spec.offsets)
    bits = [
        [(m >> (spec.k_right - o)) & 1 for o in offsets]
        for m in range(spec.n_patterns)
    ]
    best_key = None
    best = None
    for ws in itertools.product(range(-bound, bound + 1), repeat=len(offsets)):
        residuals = {}
        for m in range(spec.n_patterns):
            r = target[m] - sum(w * b for w, b in zip(ws, bits[m]))
            if r:
                residuals[m] = r
        key = (len(residuals), sum(abs(r) for r in residuals.values()), ws)
        if best_key is None or key < best_key:
            best_key = key
            best = (ws, residuals)
    ws, residuals = best
    mask = ConvolutionMask.from_dict(dict(zip(offsets, ws)))
    return mask, residuals


@dataclass(frozen=True)
class SplitForm:
    """A rule split into a circulant linear part plus signed indicator corrections.

    The step y = linear*x + sum(coeff * indicator_p(x)) reproduces the source
    rule exactly; there is one correction per residual address of the mask
    search.
    """

    linear: ConvolutionMask
    corrections: tuple[tuple[PatternProjector, int], ...]
    source_code: int
    mode: str
    spec: NeighborhoodSpec = ELEMENTARY


def split_linearize(rule: RuleTable, mode: str = "truncated", bound: int = 2) -> SplitForm:
    """Split a rule over its truncation ("truncated") or its raw outputs ("raw")."""
    if mode == "truncated":
        target = truncate_rule(rule).entries
        mask, residuals = search_linear_mask(target, bound, rule.spec)
        linear = mask.shifted_by_identity()
    elif mode == "raw":
        mask, residuals = search_linear_mask(rule.outputs, bound, rule.spec)
        linear = mask
    else:
        raise ValueError(f"unknown mode {mode!r}")
    corrections = tuple(
        (PatternProjector.from_address(m, rule.spec), r)
        for m, r in sorted(residuals.items())
    )
    return SplitForm(
        linear=linear,
        corrections=corrections,
        source_code=rule.code,
        mode=mode,
        spec=rule.spec,
    )


def split_step(x, form: SplitForm) -> np.ndarray:
    """One update via the split form; integer intermediate, provably 0/1 result."""
    x = as_bits(x)
    y = apply_circulant(form.linear, x)
    for proj, coeff in form.corrections:
        y = y + coeff * project_pattern(proj, x).astype(np.int64)
    if ((y < 0) | (y > 1)).any():
        raise AssertionError("split step left {0,1}; form does not match its rule")
    return y.astype(np.uint8)
