"""Ring of active-router agents, each applying one CA update to passing frames.

Agents sit on a ring and forward tagged frames; a frame carries either a
bit-state or its spectrum.  Each hop decodes the frame, applies one update
step (spatial table lookup or a frequency-domain filter cascade), re-tags it
for the next agent, and re-encodes it.  With m agents the ring collectively
holds a moving window of m+1 consecutive trajectory states: each agent keeps
the state it last received and the in-flight frame carries the newest one.

The simulation is in-process with a deterministic round-robin scheduler, so
the logged sequence of states is bit-for-bit comparable with the monolithic
trajectory.  Frames use a fixed little-endian wire format with a trailing
CRC-32 so the codec is portable as-is.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .core import RuleTable, as_bits, step_reference
from .linearize import SplitForm, split_step
from .spectral import dft, spectral_projector_step, spectral_split_step, spectrum_to_bits

MAGIC = b"HGRD"
VERSION = 1
PAYLOAD_BITS = 0
PAYLOAD_SPECTRUM = 1

_HEADER = struct.Struct("<BHIBI")  # version, agent id, step index, payload type, payload length
_CRC = struct.Struct("<I")
_U32 = struct.Struct("<I")


class FrameError(Exception):
    """Base class for frame encode/decode failures."""


class FrameDecodeError(FrameError):
    pass


class BadMagicError(FrameDecodeError):
    pass


class BadVersionError(FrameDecodeError):
    pass


class TruncatedFrameError(FrameDecodeError):
    pass


class ChecksumError(FrameDecodeError):
    pass


class TransportError(RuntimeError):
    """A frame failed to decode in transit; the message names the hop."""


class RoutingError(ValueError):
    """Unknown agent id."""


@dataclass
class AgentFrame:
    """One wire frame: routing tag, step counter, and a state or spectrum payload."""

    agent_id: int
    step_index: int
    payload_type: int
    payload: np.ndarray  # uint8 bits (type 0) or complex128 spectrum (type 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AgentFrame):
            return NotImplemented
        return (
            self.agent_id == other.agent_id
            and self.step_index == other.step_index
            and self.payload_type == other.payload_type
            and np.array_equal(self.payload, other.payload)
        )


def payload_bytes(frame: AgentFrame) -> bytes:
    """Canonical payload section: u32 length-in-cells plus packed data."""
    if frame.payload_type == PAYLOAD_BITS:
        bits = as_bits(frame.payload)
        if bits.ndim != 1:
            raise FrameError("frame payload must be one-dimensional")
        packed = np.packbits(bits, bitorder="little").tobytes()
        return _U32.pack(bits.shape[0]) + packed
    if frame.payload_type == PAYLOAD_SPECTRUM:
        spec = np.asarray(frame.payload, dtype=np.complex128)
        if spec.ndim != 1:
            raise FrameError("frame payload must be one-dimensional")
        interleaved = np.empty(2 * spec.shape[0], dtype="<f8")
        interleaved[0::2] = spec.real
        interleaved[1::2] = spec.imag
        return _U32.pack(spec.shape[0]) + interleaved.tobytes()
    raise FrameError(f"unknown payload type {frame.payload_type}")


def encode_frame(frame: AgentFrame) -> bytes:
    """Serialize a frame; all multi-byte integers little-endian, CRC-32 trailer."""
    if not 0 <= frame.agent_id < (1 << 16):
        raise FrameError("agent id out of range")
    if not 0 <= frame.step_index < (1 << 32):
        raise FrameError("step index out of range")
    body = payload_bytes(frame)
    head = MAGIC + _HEADER.pack(
        VERSION, frame.agent_id, frame.step_index, frame.payload_type, len(body)
    )
    crc = zlib.crc32(head + body) & 0xFFFFFFFF
    return head + body + _CRC.pack(crc)


def decode_frame(data: bytes) -> AgentFrame:
    """Parse a frame, raising a distinct error per failure mode."""
    if len(data) < len(MAGIC):
        raise TruncatedFrameError("frame shorter than the magic")
    if data[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    header_end = len(MAGIC) + _HEADER.size
    if len(data) < header_end:
        raise TruncatedFrameError("frame shorter than the header")
    version, agent_id, step_index, ptype, body_len = _HEADER.unpack(
        data[len(MAGIC) : header_end]
    )
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    total = header_end + body_len + _CRC.size
    if len(data) < total:
        raise TruncatedFrameError("frame shorter than its declared payload")
    if len(data) > total:
        raise FrameDecodeError("trailing bytes after the frame")
    (stored_crc,) = _CRC.unpack(data[total - _CRC.size : total])
    if zlib.crc32(data[: total - _CRC.size]) & 0xFFFFFFFF != stored_crc:
        raise ChecksumError("CRC-32 mismatch")
    body = data[header_end : total - _CRC.size]
    if len(body) < _U32.size:
        raise FrameDecodeError("payload shorter than its length prefix")
    (length,) = _U32.unpack(body[: _U32.size])
    raw = body[_U32.size :]
    if ptype == PAYLOAD_BITS:
        if len(raw) != (length + 7) // 8:
            raise FrameDecodeError("bit payload size mismatch")
        bits = np.unpackbits(
            np.frombuffer(raw, dtype=np.uint8), count=length, bitorder="little"
        )
        payload = bits.astype(np.uint8)
    elif ptype == PAYLOAD_SPECTRUM:
        if len(raw) != 16 * length:
            raise FrameDecodeError("spectrum payload size mismatch")
        flat = np.frombuffer(raw, dtype="<f8")
        payload = (flat[0::2] + 1j * flat[1::2]).astype(np.complex128)
    else:
        raise FrameDecodeError(f"unknown payload type {ptype}")
    return AgentFrame(
        agent_id=agent_id, step_index=step_index, payload_type=ptype, payload=payload
    )


def payload_hash(frame: AgentFrame) -> str:
    return hashlib.sha256(payload_bytes(frame)).hexdigest()


# --------------------------- the agent ring ---------------------------

MODES = ("spatial", "spectral")


@dataclass
class Agent:
    agent_id: int
    pending_perturbation: np.ndarray | None = None
    last_input_state: np.ndarray | None = None
    last_input_step: int | None = None


@dataclass
class ArmasNetwork:
    """Ordered ring of agents sharing one update engine and one mode."""

    agents: list[Agent]
    engine: RuleTable | SplitForm
    mode: str
    seed: int
    events: list[dict] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.agents)


@dataclass
class TrajectoryWindow:
    """Contiguous slice of the trajectory held across the ring after a run."""

    start_step: int
    states: np.ndarray  # (window, L)


def build_network(
    agent_count: int,
    engine: RuleTable | SplitForm,
    mode: str = "spatial",
    seed: int = 0,
) -> ArmasNetwork:
    if agent_count < 1:
        raise ValueError("need at least one agent")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not isinstance(engine, (RuleTable, SplitForm)):
        raise TypeError("engine must be a RuleTable or a SplitForm")
    agents = [Agent(agent_id=i) for i in range(agent_count)]
    return ArmasNetwork(agents=agents, engine=engine, mode=mode, seed=seed)


def inject(net: ArmasNetwork, agent_id: int, perturbation) -> None:
    """XOR `perturbation` into the next frame the agent processes, pre-update."""
    for agent in net.agents:
        if agent.agent_id == agent_id:
            agent.pending_perturbation = as_bits(perturbation)
            return
    raise RoutingError(f"no agent with id {agent_id}")


def _engine_step_spatial(engine, bits: np.ndarray) -> np.ndarray:
    if isinstance(engine, SplitForm):
        return split_step(bits, engine)
    return step_reference(bits, engine)


def _engine_step_spectral(engine, spectrum: np.ndarray) -> np.ndarray:
    if isinstance(engine, SplitForm):
        return spectral_split_step(spectrum, engine)
    return spectral_projector_step(spectrum, engine)


def run_cycles(
    net: ArmasNetwork, x0, steps: int, wire_sink: list | None = None
) -> tuple[TrajectoryWindow, list[dict]]:
    """Carry a frame around the ring for `steps` hops; return window and hop log.

    Each hop: decode, apply any pending perturbation, apply one update step,
    advance the step counter, re-tag for the next agent, re-encode.  In
    spectral mode the agent recovers the exact bit-state behind the incoming
    spectrum before stepping (a digital-repeater discipline, so per-hop
    float error never compounds); the log records the pre-rounding deviation
    of each hop's output.  Passing a list as wire_sink collects the raw bytes
    of every frame put on the ring.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    x0 = as_bits(x0)
    if x0.ndim != 1:
        raise ValueError("initial state must be one-dimensional")
    for agent in net.agents:
        agent.last_input_state = None
        agent.last_input_step = None
    spectral = net.mode == "spectral"
    if spectral:
        first = AgentFrame(0, 0, PAYLOAD_SPECTRUM, dft(x0))
    else:
        first = AgentFrame(0, 0, PAYLOAD_BITS, x0)
    wire = encode_frame(first)
    if wire_sink is not None:
        wire_sink.append(wire)
    log: list[dict] = []
    for hop in range(steps):
        agent = net.agents[hop % net.size]
        try:
            frame = decode_frame(wire)
        except FrameDecodeError as exc:
            raise TransportError(
                f"hop {hop} into agent {agent.agent_id}: {exc}"
            ) from exc
        bits_in = (
            spectrum_to_bits(frame.payload) if spectral else frame.payload
        )
        if agent.pending_perturbation is not None:
            if agent.pending_perturbation.shape != bits_in.shape:
                raise ValueError("perturbation length does not match the state")
            bits_in = bits_in ^ agent.pending_perturbation
            net.events.append(
                {"agent": agent.agent_id, "step": frame.step_index, "kind": "perturbation"}
            )
            agent.pending_perturbation = None
        agent.last_input_state = bits_in
        agent.last_input_step = frame.step_index
        if spectral:
            out_spec = _engine_step_spectral(net.engine, dft(bits_in))
            inverse = np.fft.ifft(out_spec)
            bits_out = spectrum_to_bits(out_spec)
            max_error = float(
                max(np.abs(inverse.real - bits_out).max(), np.abs(inverse.imag).max())
            )
            payload = dft(bits_out)
            ptype = PAYLOAD_SPECTRUM
        else:
            bits_out = _engine_step_spatial(net.engine, bits_in)
            max_error = 0.0
            payload = bits_out
            ptype = PAYLOAD_BITS
        out = AgentFrame(
            agent_id=(agent.agent_id + 1) % net.size,
            step_index=frame.step_index + 1,
            payload_type=ptype,
            payload=payload,
        )
        log.append(
            {
                "step": out.step_index,
                "agent": agent.agent_id,
                "payload": payload_hash(out),
                "state": bits_out,
                "max_error": max_error,
            }
        )
        wire = encode_frame(out)
        if wire_sink is not None:
            wire_sink.append(wire)
    window = _gather_window(net, wire, x0, spectral)
    return window, log


def _gather_window(net, wire, x0, spectral) -> TrajectoryWindow:
    frame = decode_frame(wire)
    held: dict[int, np.ndarray] = {
        frame.step_index: spectrum_to_bits(frame.payload) if spectral else frame.payload
    }
    for agent in net.agents:
        if agent.last_input_step is not None:
            held.setdefault(agent.last_input_step, agent.last_input_state)
    if frame.step_index == 0:
        held.setdefault(0, x0)
    steps = sorted(held)
    if steps != list(range(steps[0], steps[-1] + 1)):
        raise AssertionError("ring holds a non-contiguous trajectory slice")
    return TrajectoryWindow(
        start_step=steps[0], states=np.stack([held[s] for s in steps])
    )


def write_log_jsonl(log: list[dict], path) -> None:
    """One JSON record per hop: step, agent, payload hash."""
    with open(path, "w") as fh:
        for rec in log:
            fh.write(
                json.dumps(
                    {"step": rec["step"], "agent": rec["agent"], "payload": rec["payload"]}
                )
                + "\n"
            )
