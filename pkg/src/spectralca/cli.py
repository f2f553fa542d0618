"""Command-line surface: batch verifications, figure data, and run manifests.

Every subcommand writes a JSON manifest (config echo, seed, versions, check
results, artifact paths with content hashes) into the output directory.
Outputs are plain text (CSV, JSON, JSON-lines, P1 bitmaps) so they diff
cleanly; artifact bytes are reproducible under a fixed seed and config.

Exit codes: 0 all checks passed, 1 check failure, 2 usage error, 3 I/O error.
Environment overrides: SPECTRALCA_SEED, SPECTRALCA_OUTDIR.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .armas import build_network, run_cycles, write_log_jsonl
from .core import (
    enumerate_states,
    evolve,
    parse_rule,
    random_bits,
    single_seed,
    step_reference,
)
from .linearize import (
    classify_efficient_rules,
    rule_stats,
    split_linearize,
    split_step,
    truncate_rule,
    truncated_rule_codes,
    write_rule_economy_csv,
)
from .projectors import evolve_via_projectors, langlet_matrix, resolution_of_identity
from .reservoir import ReservoirConfig, TaskSpec, run_task
from .spectral import (
    dft,
    spectral_polynomial_step,
    spectral_projector_step,
    spectral_split_step,
)


def _rule_code(text: str) -> int:
    try:
        code = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"rule must be an integer, got {text!r}")
    if not 0 <= code < 256:
        raise argparse.ArgumentTypeError(f"rule {code} out of range [0, 256)")
    return code


def _rule_or_all(text: str):
    if text == "all":
        return "all"
    return _rule_code(text)


def _default_seed() -> int:
    return int(os.environ.get("SPECTRALCA_SEED", "0"))


def _default_outdir() -> str:
    return os.environ.get("SPECTRALCA_OUTDIR", ".")


def write_p1(path: Path, matrix: np.ndarray) -> None:
    """Plain portable bitmap: header P1, width height, then 0/1 tokens."""
    rows, cols = matrix.shape
    lines = [f"{' '.join(str(int(v)) for v in row)}" for row in matrix]
    path.write_text(f"P1\n{cols} {rows}\n" + "\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Run:
    """Collects checks and artifacts for one command and writes the manifest."""

    def __init__(self, args, name: str):
        self.name = name
        self.outdir = Path(args.out_dir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.seed = getattr(args, "seed", None)
        self.config = {k: v for k, v in vars(args).items() if k != "func"}
        self.checks: list[dict] = []
        self.artifacts: list[Path] = []
        self.extra: dict = {}

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})
        return bool(passed)

    def artifact(self, path: Path) -> Path:
        self.artifacts.append(path)
        return path

    def finish(self) -> int:
        ok = all(c["passed"] for c in self.checks)
        manifest = {
            "command": self.name,
            "config": self.config,
            "seed": self.seed,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
            "versions": {
                "spectralca": __version__,
                "python": sys.version.split()[0],
                "numpy": np.__version__,
            },
            "checks": self.checks,
            "artifacts": [
                {"path": str(p), "sha256": _sha256(p)} for p in self.artifacts
            ],
            "passed": ok,
        }
        if self.extra:
            manifest.update(self.extra)
        path = self.outdir / f"{self.name}-manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        for c in self.checks:
            status = "ok" if c["passed"] else "FAIL"
            print(f"[{status}] {c['name']}" + (f": {c['detail']}" if c["detail"] else ""))
        return 0 if ok else 1


def _initial_state(length: int, init: str, seed: int) -> np.ndarray:
    if init == "single":
        return single_seed(length)
    return random_bits(length, np.random.default_rng(seed))


def cmd_evolve(args) -> int:
    run = Run(args, "evolve")
    rule = parse_rule(args.rule)
    x0 = _initial_state(args.length, args.init, args.seed)
    traj = evolve(x0, rule, args.steps)
    out = run.artifact(run.outdir / args.out)
    write_p1(out, traj)
    run.check("trajectory-shape", traj.shape == (args.steps + 1, args.length))
    run.check("p1-written", out.exists(), str(out))
    return run.finish()


def cmd_verify_identity(args) -> int:
    run = Run(args, "verify-identity")
    rules = range(256) if args.rule == "all" else [args.rule]
    if args.exhaustive:
        states = enumerate_states(args.length)
    else:
        rng = np.random.default_rng(args.seed)
        states = (rng.random((args.samples, args.length)) < 0.5).astype(np.uint8)
    res = resolution_of_identity(states)
    run.check(
        "resolution-of-identity",
        bool((res == 1).all()),
        f"{states.shape[0]} states of length {args.length}",
    )
    bad = []
    for code in rules:
        rule = parse_rule(code)
        if not np.array_equal(evolve_via_projectors(states, rule), step_reference(states, rule)):
            bad.append(code)
    run.check(
        "projector-evolution-matches-reference",
        not bad,
        f"rules checked: {len(list(rules))}" + (f"; failing: {bad}" if bad else ""),
    )
    return run.finish()


def cmd_truncate(args) -> int:
    run = Run(args, "truncate")
    rule = parse_rule(args.rule)
    rt = truncate_rule(rule)
    stats = rule_stats(rule)
    signed, magnitude = next(
        (s, m) for code, s, m in truncated_rule_codes() if code == args.rule
    )
    payload = {
        "rule": args.rule,
        "entries": list(rt.entries),
        "lambda": str(stats.lam),
        "lambda_T": str(stats.lam_t),
        "ratio": str(stats.ratio),
        "signed_code": signed,
        "magnitude_code": magnitude,
    }
    out = run.artifact(run.outdir / f"truncate-{args.rule}.json")
    out.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"rule {args.rule}: transitions {tuple(rt.entries)}")
    run.check("entries-consistent", all(e in (-1, 0, 1) for e in rt.entries))
    return run.finish()


def cmd_classify(args) -> int:
    run = Run(args, "classify")
    out = run.artifact(run.outdir / args.csv)
    write_rule_economy_csv(out)
    count = len(classify_efficient_rules())
    print(f"efficient rules: {count}")
    run.check("efficient-count", count == 80, f"found {count}")
    run.check("csv-rows", sum(1 for _ in out.open()) == 257, str(out))
    return run.finish()


def cmd_split(args) -> int:
    run = Run(args, "split")
    rule = parse_rule(args.rule)
    form = split_linearize(rule, mode=args.mode)
    payload = {
        "rule": args.rule,
        "mode": args.mode,
        "linear": {str(o): w for o, w in form.linear.weights},
        "corrections": [
            {"pattern": list(p.pattern), "coefficient": c} for p, c in form.corrections
        ],
    }
    out = run.artifact(run.outdir / f"split-{args.rule}-{args.mode}.json")
    out.write_text(json.dumps(payload, indent=2) + "\n")
    print(json.dumps(payload))
    rng = np.random.default_rng(args.seed)
    states = (rng.random((256, args.length)) < 0.5).astype(np.uint8)
    ok = np.array_equal(split_step(states, form), step_reference(states, rule))
    run.check("split-matches-reference", ok, f"256 random states, L={args.length}")
    return run.finish()


def cmd_spectral_step(args) -> int:
    run = Run(args, "spectral-step")
    rule = parse_rule(args.rule)
    x = _initial_state(args.length, args.init, args.seed)
    spec_in = dft(x)
    if args.engine == "projector":
        spec_out = spectral_projector_step(spec_in, rule)
    elif args.engine == "polynomial":
        spec_out = spectral_polynomial_step(spec_in, rule)
    else:
        spec_out = spectral_split_step(spec_in, split_linearize(rule, mode="truncated"))
    spatial = step_reference(x, rule)
    err = float(np.abs(np.fft.ifft(spec_out) - spatial).max())
    for tag, spec in (("before", spec_in), ("after", spec_out)):
        out = run.artifact(run.outdir / f"spectrum-{tag}.csv")
        with out.open("w") as fh:
            fh.write("k,re,im\n")
            for k, v in enumerate(spec):
                fh.write(f"{k},{v.real!r},{v.imag!r}\n")
    print(f"max round-trip error: {err:.3e}")
    run.check("round-trip-error", err < 1e-8 * args.length, f"{err:.3e}")
    return run.finish()


def cmd_langlet(args) -> int:
    run = Run(args, "langlet")
    matrix = langlet_matrix(args.order)
    out = run.artifact(run.outdir / args.out)
    write_p1(out, matrix)
    n = matrix.shape[0]
    i, j = np.indices((n, n))
    ok = bool(np.array_equal(matrix == 1, (i & j) == 0))
    run.check("and-zero-characterization", ok, f"size {n}x{n}")
    return run.finish()


def cmd_reservoir_run(args) -> int:
    run = Run(args, "reservoir-run")
    task = TaskSpec(
        kind=args.task,
        delay=args.delay,
        distractor_period=args.distractor,
        sequence_length=args.seq_len,
        trials=args.trials,
    )
    cfg = ReservoirConfig(
        rule=parse_rule(args.rule),
        width=args.length,
        iterations=args.iterations,
        redundancy=args.redundancy,
        seed=args.seed,
        copies=args.copies,
        complement=not args.no_complement,
    )
    csv_path = run.artifact(run.outdir / args.csv) if args.csv else None
    metrics = run_task(task, cfg, seed=args.seed, ridge=args.ridge, csv_path=csv_path)
    run.extra["wall_time_s"] = metrics.pop("wall_time_s")
    out = run.artifact(run.outdir / "reservoir-metrics.json")
    out.write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    print(f"{args.task} rule {args.rule}: accuracy {metrics['accuracy']:.4f}")
    run.check("readout-normal-equations", metrics["readout_residual"] < 1e-8)
    run.check("metrics-written", out.exists(), str(out))
    return run.finish()


def cmd_armas_run(args) -> int:
    run = Run(args, "armas-run")
    rule = parse_rule(args.rule)
    engine = split_linearize(rule, mode="truncated") if args.engine == "split" else rule
    net = build_network(args.agents, engine, mode=args.mode, seed=args.seed)
    x0 = _initial_state(args.length, args.init, args.seed)
    wires = [] if args.frames_out else None
    window, log = run_cycles(net, x0, args.steps, wire_sink=wires)
    out = run.artifact(run.outdir / "armas-log.jsonl")
    write_log_jsonl(log, out)
    if args.frames_out:
        dump = run.artifact(run.outdir / args.frames_out)
        dump.write_bytes(b"".join(wires))
    reference = evolve(x0, rule, args.steps)
    got = np.stack([rec["state"] for rec in log]) if log else np.empty((0, args.length))
    ok = np.array_equal(got, reference[1:])
    worst = max((rec["max_error"] for rec in log), default=0.0)
    run.check("distributed-equals-monolithic", ok, f"{args.steps} steps, {args.agents} agents")
    run.check("pre-rounding-error", worst < 1e-8 * args.length, f"{worst:.3e}")
    run.check(
        "window-contiguous",
        window.start_step + window.states.shape[0] - 1 == args.steps,
        f"window [{window.start_step}, {args.steps}]",
    )
    return run.finish()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectralca",
        description="1D binary CA toolkit: reference, projector, split and spectral execution.",
    )
    parser.add_argument("--out-dir", default=_default_outdir(), help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, rule_type=_rule_code):
        p.add_argument("--rule", type=rule_type, required=True)
        p.add_argument("--length", type=int, default=64)
        p.add_argument("--seed", type=int, default=_default_seed())

    p = sub.add_parser("evolve", help="space-time diagram as a P1 bitmap (rows = time)")
    common(p)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--init", choices=["single", "random"], default="single")
    p.add_argument("--out", default="spacetime.pbm")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("verify-identity", help="projector partition and evolution suites")
    common(p, rule_type=_rule_or_all)
    p.add_argument("--exhaustive", action="store_true", help="all 2**length states")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_verify_identity)

    p = sub.add_parser("truncate", help="ternary transition vector of a rule")
    common(p)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("classify", help="economy classification of all 256 rules")
    p.add_argument("--csv", default="rules.csv")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("split", help="linear mask plus projector corrections")
    common(p)
    p.add_argument("--mode", choices=["truncated", "raw"], default="truncated")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("spectral-step", help="one DFT-domain step with spectrum dumps")
    common(p)
    p.add_argument("--engine", choices=["projector", "polynomial", "split"], default="projector")
    p.add_argument("--init", choices=["single", "random"], default="random")
    p.set_defaults(func=cmd_spectral_step)

    p = sub.add_parser("langlet", help="carry-free-addition fractal matrix as P1")
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--out", default="langlet.pbm")
    p.set_defaults(func=cmd_langlet)

    p = sub.add_parser("reservoir-run", help="CA reservoir task with JSON metrics")
    common(p)
    p.set_defaults(length=40)
    p.add_argument("--task", choices=["temporal-parity", "temporal-density", "five-bit-memory"],
                   default="temporal-parity")
    p.add_argument("--delay", type=int, default=3)
    p.add_argument("--distractor", type=int, default=20)
    p.add_argument("--seq-len", type=int, default=120)
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--iterations", type=int, default=4)
    p.add_argument("--redundancy", type=int, default=8)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--no-complement", action="store_true")
    p.add_argument("--ridge", type=float, default=1.0)
    p.add_argument("--csv", default=None, help="also write the per-step learning table")
    p.set_defaults(func=cmd_reservoir_run)

    p = sub.add_parser("armas-run", help="agent-ring run with JSON-lines hop log")
    common(p)
    p.add_argument("--agents", type=int, default=4)
    p.add_argument("--mode", choices=["spatial", "spectral"], default="spatial")
    p.add_argument("--engine", choices=["rule", "split"], default="rule")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--init", choices=["single", "random"], default="random")
    p.add_argument("--frames-out", default=None, help="also dump the raw wire frames")
    p.set_defaults(func=cmd_armas_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
