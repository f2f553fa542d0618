import numpy as np
import pytest

from spectralca.core import (
    ConvolutionMask,
    addressing_mask,
    apply_circulant,
    enumerate_states,
    parse_rule,
    step_reference,
)
from spectralca.linearize import split_linearize, split_step
from spectralca.projectors import PatternProjector, project_pattern
from spectralca.spectral import (
    circulant_eigenvalues,
    dc_spectrum,
    dft,
    idft,
    pattern_chain_spectrum,
    spectral_polynomial_step,
    spectral_product,
    spectral_projector_step,
    spectral_split_step,
    spectrum_to_bits,
)


def random_state(length, seed):
    rng = np.random.default_rng(seed)
    return (rng.random(length) < 0.5).astype(np.uint8)


def test_dft_of_all_ones():
    assert np.allclose(dft(np.ones(8)), np.r_[8.0, np.zeros(7)], atol=1e-12)


def test_dft_round_trip():
    x = np.random.default_rng(0).random(33)
    assert np.abs(idft(dft(x)) - x).max() < 1e-12 * 33


def test_complement_identity():
    for seed in range(5):
        x = random_state(24, seed)
        lhs = dft(1 - x)
        rhs = dc_spectrum(24) - dft(x)
        assert np.abs(lhs - rhs).max() < 1e-9


def test_parseval():
    x = random_state(64, 1).astype(float)
    lhs = np.sum(x**2)
    rhs = np.sum(np.abs(dft(x)) ** 2) / 64
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, lhs)


def test_idft_rejects_non_real_spectrum():
    with pytest.raises(ValueError):
        idft(np.array([1.0, 2.0, 3.0, 4.0j * 100]))


def test_spectrum_to_bits_rejects_non_bits():
    with pytest.raises(ValueError):
        spectrum_to_bits(dft(np.array([0.0, 0.5, 1.0, 0.0])))


def test_circulant_eigenvalues_identity():
    assert np.array_equal(circulant_eigenvalues(ConvolutionMask.identity(), 8), np.ones(8))


def test_circulant_eigenvalues_shift():
    # (K x)[i] = x[i+1]  <=>  eigenvalues exp(+2 pi i k / L)
    lam = circulant_eigenvalues(ConvolutionMask.from_dict({1: 1}), 8)
    assert np.abs(lam - np.exp(2j * np.pi * np.arange(8) / 8)).max() < 1e-12


@pytest.mark.parametrize("mask", [{-1: 4, 0: 2, 1: 1}, {-2: 1, 1: -3}, {0: 2, 2: 5}])
def test_circulant_diagonalization_contract(mask):
    mask = ConvolutionMask.from_dict(mask)
    for seed in range(5):
        x = random_state(16, seed)
        lam = circulant_eigenvalues(mask, 16)
        spatial = apply_circulant(mask, x)
        spectral = idft(lam * dft(x))
        assert np.abs(spectral - spatial).max() < 1e-9 * 16


def test_spectral_product_is_product_spectrum():
    for seed in range(5):
        x = random_state(32, seed)
        y = random_state(32, seed + 100)
        got = spectral_product(dft(x), dft(y))
        want = dft(x * y)
        assert np.abs(got - want).max() < 1e-9 * 32


def test_spectral_product_against_definition():
    # definition oracle: (1/L) * direct circular convolution sum
    rng = np.random.default_rng(5)
    X = rng.normal(size=9) + 1j * rng.normal(size=9)
    Y = rng.normal(size=9) + 1j * rng.normal(size=9)
    direct = np.array(
        [sum(X[j] * Y[(k - j) % 9] for j in range(9)) for k in range(9)]
    ) / 9
    assert np.abs(spectral_product(X, Y) - direct).max() < 1e-12


def test_spectral_product_identities():
    X = dft(random_state(16, 3))
    assert np.abs(spectral_product(X, dc_spectrum(16)) - X).max() < 1e-9
    assert np.abs(spectral_product(X, np.zeros(16))).max() == 0.0


def test_spectral_product_commutes_and_associates():
    X, Y, Z = (dft(random_state(20, s)) for s in (1, 2, 3))
    assert np.abs(spectral_product(X, Y) - spectral_product(Y, X)).max() < 1e-9 * 20
    lhs = spectral_product(spectral_product(X, Y), Z)
    rhs = spectral_product(X, spectral_product(Y, Z))
    assert np.abs(lhs - rhs).max() < 1e-9 * 20


def test_spectral_product_length_mismatch():
    with pytest.raises(ValueError):
        spectral_product(np.zeros(4), np.zeros(5))


def test_pattern_chain_matches_spatial_projection():
    for seed in range(5):
        x = random_state(24, seed)
        for m in range(8):
            proj = PatternProjector.from_address(m)
            got = idft(pattern_chain_spectrum(dft(x), proj))
            assert np.abs(got - project_pattern(proj, x)).max() < 1e-9 * 24


def test_spectral_projector_step_trivial_rules():
    x = random_state(16, 0)
    X = dft(x)
    assert np.abs(spectral_projector_step(X, parse_rule(0))).max() == 0.0
    out = spectral_projector_step(X, parse_rule(204))
    assert np.abs(out - X).max() < 1e-8 * 16


def test_spectral_projector_step_exhaustive_l8():
    states = enumerate_states(8)
    rule = parse_rule(110)
    for x in states:
        got = spectrum_to_bits(spectral_projector_step(dft(x), rule))
        assert np.array_equal(got, step_reference(x, rule))


def test_spectral_polynomial_step_matches_spatial():
    rule = parse_rule(110)
    for seed in range(100):
        x = random_state(32, seed)
        out = spectral_polynomial_step(dft(x), rule)
        err = np.abs(idft(out, imag_tol=1e-9) - step_reference(x, rule)).max()
        assert err < 1e-8 * 32


def test_spectral_polynomial_step_trivial():
    x = random_state(24, 9)
    X = dft(x)
    out = spectral_polynomial_step(X, parse_rule(204))
    assert np.abs(out - X).max() < 1e-8 * 24
    zeros = dft(np.zeros(16, np.uint8))
    assert np.abs(spectral_polynomial_step(zeros, parse_rule(110))).max() < 1e-8 * 16


def test_spectral_polynomial_step_rejects_non_bit_state():
    with pytest.raises(ValueError):
        spectral_polynomial_step(dft(np.full(8, 0.25)), parse_rule(110))


def test_spectral_split_step_matches_spatial():
    for code, mode in ((110, "truncated"), (106, "raw")):
        form = split_linearize(parse_rule(code), mode=mode)
        for seed in range(50):
            x = random_state(32, seed)
            got = idft(spectral_split_step(dft(x), form), imag_tol=1e-9)
            assert np.abs(got - split_step(x, form)).max() < 1e-8 * 32


def test_spectral_split_step_exhaustive_l8():
    form = split_linearize(parse_rule(106), mode="raw")
    rule = parse_rule(106)
    for x in enumerate_states(8):
        got = spectrum_to_bits(spectral_split_step(dft(x), form))
        assert np.array_equal(got, step_reference(x, rule))


def test_spectral_split_identity_form_is_exact_diagonal():
    # no corrections: the linear term alone must match the circulant exactly
    form = split_linearize(parse_rule(204), mode="truncated")
    assert form.corrections == ()
    x = random_state(40, 2)
    got = spectral_split_step(dft(x), form)
    assert np.abs(got - dft(apply_circulant(form.linear, x))).max() < 1e-9 * 40


def test_round_trip_tolerance_scaling_l256():
    rule = parse_rule(110)
    x = random_state(256, 0)
    out = spectral_projector_step(dft(x), rule)
    err = np.abs(idft(out) - step_reference(x, rule)).max()
    assert err < 1e-8 * 256


def test_addressing_eigenvalues_agree_with_spatial():
    x = random_state(48, 4)
    lam = circulant_eigenvalues(addressing_mask(), 48)
    got = idft(lam * dft(x))
    assert np.abs(got - apply_circulant(addressing_mask(), x)).max() < 1e-9 * 48
