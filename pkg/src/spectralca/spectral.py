"""CA evolution executed entirely in the DFT domain.

Circulant filters are diagonal in the DFT basis, and a componentwise product
of states maps to a circular convolution of their spectra scaled by 1/L.
Those two facts turn every spatial update path (table polynomial, projector
sum, split form) into an expression over one spectrum: filtered copies are
componentwise scalings, AND-products become convolution chains, complements
shift only the DC bin.

Conventions: forward transform unnormalized with negative exponent,
X_k = sum_j x_j exp(-2*pi*i*j*k/L); the inverse carries the 1/L factor.
"""

from __future__ import annotations

import numpy as np

from .core import (
    ConvolutionMask,
    RuleTable,
    addressing_mask,
    interpolated_rule_polynomial,
)
from .linearize import SplitForm
from .projectors import PatternProjector


def dft(x) -> np.ndarray:
    """Forward transform of a real or complex signal (last axis)."""
    return np.fft.fft(np.asarray(x, dtype=complex), axis=-1)


def idft(spectrum, imag_tol: float = 1e-9) -> np.ndarray:
    """Inverse transform; asserts the result is real to within imag_tol * L."""
    s = np.asarray(spectrum, dtype=complex)
    y = np.fft.ifft(s, axis=-1)
    length = s.shape[-1]
    worst = np.abs(y.imag).max()
    if worst > imag_tol * length:
        raise ValueError(
            f"spectrum is not that of a real signal (imag residue {worst:.3e})"
        )
    return y.real


def spectrum_to_bits(spectrum, tol: float = 1e-6) -> np.ndarray:
    """Recover the bit-state a spectrum encodes, refusing to round silently.

    Every inverse-transformed value must lie within `tol` of 0 or 1 (and have
    imaginary residue below `tol`); anything else raises instead of rounding.
    """
    y = np.fft.ifft(np.asarray(spectrum, dtype=complex), axis=-1)
    if np.abs(y.imag).max() > tol:
        raise ValueError("spectrum does not encode a real signal")
    rounded = np.rint(y.real)
    if np.abs(y.real - rounded).max() > tol or not np.isin(rounded, (0.0, 1.0)).all():
        raise ValueError("spectrum does not encode a bit-state")
    return rounded.astype(np.uint8)


def dc_spectrum(length: int) -> np.ndarray:
    """Spectrum of the all-ones state: (L, 0, ..., 0)."""
    s = np.zeros(length, dtype=complex)
    s[0] = length
    return s


def circulant_eigenvalues(mask: ConvolutionMask, length: int) -> np.ndarray:
    """Eigenvalue profile of a circulant: the DFT of its defining vector.

    Applying the circulant in space is the componentwise product with this
    profile in frequency.
    """
    return np.fft.fft(mask.defining_vector(length).astype(complex))


def shift_eigenvalues(offset: int, length: int) -> np.ndarray:
    """Eigenvalues of the elementary shift filter K_o."""
    return circulant_eigenvalues(ConvolutionMask.from_dict({offset: 1}), length)


def spectral_product(x_spec, y_spec) -> np.ndarray:
    """Spectrum of the componentwise product: (1/L) times the circular convolution."""
    a = np.asarray(x_spec, dtype=complex)
    b = np.asarray(y_spec, dtype=complex)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError("spectra must have equal length")
    length = a.shape[-1]
    conv = np.fft.ifft(np.fft.fft(a, axis=-1) * np.fft.fft(b, axis=-1), axis=-1)
    return conv / length


def pattern_chain_spectrum(x_spec, proj: PatternProjector) -> np.ndarray:
    """Spectrum of a pattern indicator, built from the state spectrum alone.

    One factor per offset: the shift eigenvalues times the spectrum for a
    one-bit, the DC spectrum minus that for a zero-bit (the complement rule),
    chained with spectral products.
    """
    x_spec = np.asarray(x_spec, dtype=complex)
    length = x_spec.shape[-1]
    dc = dc_spectrum(length)
    chain = None
    for o, b in zip(proj.spec.offsets, proj.pattern):
        filtered = shift_eigenvalues(o, length) * x_spec
        factor = filtered if b else dc - filtered
        chain = factor if chain is None else spectral_product(chain, factor)
    return chain


def spectral_projector_step(x_spec, rule: RuleTable) -> np.ndarray:
    """One update in frequency: sum of indicator chains over one-output patterns."""
    x_spec = np.asarray(x_spec, dtype=complex)
    out = np.zeros(x_spec.shape, dtype=complex)
    for m, bit in enumerate(rule.outputs):
        if bit:
            out = out + pattern_chain_spectrum(
                x_spec, PatternProjector.from_address(m, rule.spec)
            )
    return out


def spectral_polynomial_step(x_spec, rule: RuleTable) -> np.ndarray:
    """One update in frequency via the interpolated polynomial of the rule.

    The address spectrum is dft(1) + Lambda_addr * X; the polynomial is then
    evaluated in Horner form, each multiplication a spectral product and each
    constant an addition on the DC bin.
    """
    x_spec = np.asarray(x_spec, dtype=complex)
    spectrum_to_bits(x_spec)  # domain check: input must encode a bit-state
    length = x_spec.shape[-1]
    lam = circulant_eigenvalues(addressing_mask(rule.spec), length)
    dc = dc_spectrum(length)
    address_spec = dc + lam * x_spec
    coeffs = [float(c) for c in interpolated_rule_polynomial(rule).coefficients]
    acc = coeffs[-1] * dc  # leading coefficient as a constant signal
    for c in reversed(coeffs[:-1]):
        acc = spectral_product(acc, address_spec) + c * dc
    return acc


def spectral_split_step(x_spec, form: SplitForm) -> np.ndarray:
    """One update in frequency via a split form: diagonal linear term plus chains."""
    x_spec = np.asarray(x_spec, dtype=complex)
    length = x_spec.shape[-1]
    out = circulant_eigenvalues(form.linear, length) * x_spec
    for proj, coeff in form.corrections:
        out = out + coeff * pattern_chain_spectrum(x_spec, proj)
    return out
