"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.  Every tolerance and time budget is pinned here.
"""

import time

import numpy as np
import pytest

from spectralca.armas import (
    PAYLOAD_BITS,
    PAYLOAD_SPECTRUM,
    AgentFrame,
    FrameDecodeError,
    build_network,
    decode_frame,
    encode_frame,
    run_cycles,
)
from spectralca.core import (
    enumerate_states,
    evolve,
    parse_rule,
    polynomial_from_rule_roots,
    polynomial_step,
    step_reference,
)
from spectralca.linearize import (
    classify_efficient_rules,
    search_linear_mask,
    split_linearize,
    split_step,
    truncate_rule,
    truncated_step,
)
from spectralca.projectors import (
    PatternProjector,
    evolve_via_projectors,
    langlet_matrix,
    project_pattern,
    resolution_of_identity,
)
from spectralca.reservoir import ReservoirConfig, TaskSpec, run_task, train_readout
from spectralca.spectral import (
    dft,
    idft,
    spectral_polynomial_step,
    spectral_projector_step,
    spectral_split_step,
)

RULE_110_COEFFS = [134400, -319360, 291716, -140289, 39729, -6870, 714, -41, 1]


class Criterion:
    def __init__(self, number, label, budget_s):
        self.number = number
        self.label = label
        self.budget_s = budget_s
        self.start = time.perf_counter()

    def finish(self, passed, detail=""):
        elapsed = time.perf_counter() - self.start
        status = "PASS" if passed and elapsed < self.budget_s else "FAIL"
        print(
            f"{status} criterion {self.number}: {self.label} "
            f"({elapsed:.1f}s / budget {self.budget_s:.0f}s){' - ' + detail if detail else ''}"
        )
        assert passed, f"criterion {self.number} failed: {detail}"
        assert elapsed < self.budget_s, f"criterion {self.number} over budget: {elapsed:.1f}s"


def random_states(n, length, seed):
    rng = np.random.default_rng(seed)
    return (rng.random((n, length)) < 0.5).astype(np.uint8)


def test_criterion_01_projector_evolution_oracle():
    c = Criterion(1, "projector evolution == reference, 256 rules x all L=10 states", 30)
    states = enumerate_states(10)
    failing = [
        code
        for code in range(256)
        if not np.array_equal(
            evolve_via_projectors(states, parse_rule(code)),
            step_reference(states, parse_rule(code)),
        )
    ]
    c.finish(not failing, f"failing rules: {failing}" if failing else "262144 cases per path")


def test_criterion_02_resolution_and_orthogonality():
    c = Criterion(2, "resolution of identity + pairwise orthogonality", 10)
    violations = 0
    for states in (enumerate_states(10), random_states(1000, 64, seed=0)):
        if not (resolution_of_identity(states) == 1).all():
            violations += 1
        indicators = [
            project_pattern(PatternProjector.from_address(m), states) for m in range(8)
        ]
        for a in range(8):
            for b in range(a + 1, 8):
                if (indicators[a] & indicators[b]).any():
                    violations += 1
    c.finish(violations == 0, f"{violations} violations")


def test_criterion_03_truncation():
    c = Criterion(3, "truncation tuples + truncated step == reference (all rules, L=10)", 30)
    ok = truncate_rule(parse_rule(110)).entries == (0, 1, 0, 0, 0, 1, 0, -1)
    ok &= truncate_rule(parse_rule(106)).entries == (0, 1, -1, 0, 0, 1, 0, -1)
    states = enumerate_states(10)
    for code in range(256):
        rule = parse_rule(code)
        if not np.array_equal(
            truncated_step(states, truncate_rule(rule)), step_reference(states, rule)
        ):
            ok = False
            break
    c.finish(bool(ok))


def test_criterion_04_economy_classification():
    c = Criterion(4, "economy set has exactly 80 rules, 110 in, 106 out", 1)
    efficient = classify_efficient_rules()
    ok = len(efficient) == 80 and 110 in efficient and 106 not in efficient
    c.finish(ok, f"|set| = {len(efficient)}")


def test_criterion_05_mask_search_and_split():
    c = Criterion(5, "mask-search residuals {3,7}/{6,7} + split == reference at L=12", 10)
    _, res110 = search_linear_mask(truncate_rule(parse_rule(110)).entries, bound=2)
    _, res106 = search_linear_mask(parse_rule(106).outputs, bound=2)
    ok = set(res110) == {3, 7} and set(res106) == {6, 7}
    states = enumerate_states(12)
    for code, mode in ((110, "truncated"), (106, "raw")):
        rule = parse_rule(code)
        form = split_linearize(rule, mode=mode)
        ok &= np.array_equal(split_step(states, form), step_reference(states, rule))
    c.finish(bool(ok), f"residuals: {res110} / {res106}")


def test_criterion_06_polynomials():
    c = Criterion(6, "root-product coefficients exact + polynomial step == reference", 30)
    coeffs = [int(x) for x in polynomial_from_rule_roots(parse_rule(110)).coefficients]
    ok = coeffs == RULE_110_COEFFS
    states = enumerate_states(10)
    for code in range(256):
        rule = parse_rule(code)
        if not np.array_equal(polynomial_step(states, rule), step_reference(states, rule)):
            ok = False
            break
    c.finish(bool(ok), f"coefficients: {coeffs}")


def test_criterion_07_spectral_round_trips():
    c = Criterion(7, "spectral steps match spatial twins (exhaustive L=8, 1000 x L=32)", 60)
    worst = 0.0
    form110 = split_linearize(parse_rule(110), mode="truncated")
    form106 = split_linearize(parse_rule(106), mode="raw")

    def check(states, length):
        nonlocal worst
        rule = parse_rule(110)
        tol = 1e-8 * length
        for x in states:
            spec = dft(x)
            pairs = [
                (spectral_projector_step(spec, rule), step_reference(x, rule)),
                (spectral_polynomial_step(spec, rule), polynomial_step(x, rule)),
                (spectral_split_step(spec, form110), split_step(x, form110)),
                (spectral_split_step(spec, form106), split_step(x, form106)),
            ]
            for got_spec, want in pairs:
                err = np.abs(idft(got_spec) - want).max()
                worst = max(worst, err)
                if err >= tol:
                    return False
        return True

    ok = check(enumerate_states(8), 8)
    ok = ok and check(random_states(1000, 32, seed=1), 32)
    c.finish(bool(ok), f"worst componentwise error {worst:.2e}")


def test_criterion_08_langlet_matrix():
    c = Criterion(8, "carry-free fractal matrix characterizations up to order 8", 5)
    ok = True
    for order in range(9):
        h = langlet_matrix(order)
        n = h.shape[0]
        i, j = np.indices((n, n))
        ok &= np.array_equal(h == 1, (i & j) == 0)
        ok &= np.array_equal(h == 1, (i + j) == (i ^ j))
    c.finish(bool(ok))


def test_criterion_09_armas_equivalence_and_codec():
    c = Criterion(9, "ring == monolithic (m x rules x modes) + 10^4 frame round-trips", 60)
    ok = True
    rng = np.random.default_rng(2)
    x0 = (rng.random(64) < 0.5).astype(np.uint8)
    for code in (110, 106, 90, 30, 204):
        rule = parse_rule(code)
        reference = evolve(x0, rule, 200)
        for agents in (1, 2, 4, 8):
            for mode in ("spatial", "spectral"):
                net = build_network(agents, rule, mode=mode)
                _, log = run_cycles(net, x0, 200)
                states = np.stack([rec["state"] for rec in log])
                ok &= np.array_equal(states, reference[1:])
                ok &= max(rec["max_error"] for rec in log) < 1e-8 * 64
    undetected = 0
    for k in range(10_000):
        length = int(rng.integers(1, 65))
        if k % 2 == 0:
            frame = AgentFrame(
                int(rng.integers(0, 1 << 16)), int(rng.integers(0, 1 << 32)),
                PAYLOAD_BITS, (rng.random(length) < 0.5).astype(np.uint8),
            )
        else:
            frame = AgentFrame(
                int(rng.integers(0, 1 << 16)), int(rng.integers(0, 1 << 32)),
                PAYLOAD_SPECTRUM, rng.normal(size=length) + 1j * rng.normal(size=length),
            )
        wire = encode_frame(frame)
        if decode_frame(wire) != frame:
            ok = False
        corrupted = bytearray(wire)
        corrupted[int(rng.integers(0, len(wire)))] ^= int(rng.integers(1, 256))
        try:
            decode_frame(bytes(corrupted))
            undetected += 1  # decoding corrupted bytes without an error
        except FrameDecodeError:
            pass
    ok &= undetected == 0
    c.finish(bool(ok), f"undetected corruptions: {undetected}")


def test_criterion_10_reservoir_comparisons():
    c = Criterion(10, "rule-110 reservoir >= raw baseline (parity-3) and >= rule-204 (5-bit)", 300)
    seeds = range(10)
    parity = TaskSpec(kind="temporal-parity", delay=3, sequence_length=120, trials=40)
    five_bit = TaskSpec(kind="five-bit-memory", distractor_period=20)
    parity_110, parity_raw, fb_110, fb_204 = [], [], [], []
    residuals = []
    for seed in seeds:
        cfg_parity = ReservoirConfig(
            rule=parse_rule(110), width=40, iterations=4, redundancy=8, seed=seed, copies=8
        )
        m = run_task(parity, cfg_parity, seed=seed, ridge=16.0)
        parity_110.append(m["accuracy"])
        residuals.append(m["readout_residual"])
        parity_raw.append(
            run_task(parity, cfg_parity, seed=seed, ridge=16.0, feature_kind="raw")["accuracy"]
        )
        cfg_110 = ReservoirConfig(
            rule=parse_rule(110), width=40, iterations=4, redundancy=8, seed=seed
        )
        cfg_204 = ReservoirConfig(
            rule=parse_rule(204), width=40, iterations=4, redundancy=8, seed=seed
        )
        m110 = run_task(five_bit, cfg_110, seed=seed, ridge=16.0)
        m204 = run_task(five_bit, cfg_204, seed=seed, ridge=16.0)
        fb_110.append(m110["accuracy"])
        fb_204.append(m204["accuracy"])
        residuals.extend([m110["readout_residual"], m204["readout_residual"]])
    parity_ok = np.mean(parity_110) >= np.mean(parity_raw)
    fb_ok = np.mean(fb_110) >= np.mean(fb_204)
    ridge_ok = max(residuals) < 1e-8
    detail = (
        f"parity 110/raw: {np.mean(parity_110):.3f}/{np.mean(parity_raw):.3f}; "
        f"5-bit 110/204: {np.mean(fb_110):.3f}/{np.mean(fb_204):.3f}; "
        f"worst readout residual {max(residuals):.1e}"
    )
    c.finish(bool(parity_ok and fb_ok and ridge_ok), detail)
