"""PIN-diode bias frames and the daisy-chained shift-register bitstream.

Line order (board-specific convention, not taken from a schematic): cells
row-major (i outer, j inner); within a cell diode 1 then diode 2; per diode
the positive-drive line then the negative-drive line.  Line ``n`` is the
``n``-th bit shifted in.  Once the whole vector has been clocked through the
chain, line 0 sits on the last register's top output (QH), so line ``n``
lands on register ``R - 1 - n // W``, output ``W - 1 - n % W``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .synthesis import QuantizedMap

DIODES_PER_CELL = 2
LINES_PER_DIODE = 2  # positive, negative
POSITIVE, NEGATIVE = 0, 1


class InvalidBiasFrame(ValueError):
    """A diode has both or neither polarity asserted."""


class BitstreamError(ValueError):
    pass


@dataclass(frozen=True)
class StateMapping:
    """State index -> (diode1_on, diode2_on), a bijection over the 4 diode pairs."""

    table: Mapping[int, tuple[bool, bool]]

    def __post_init__(self):
        table = {int(k): (bool(v[0]), bool(v[1])) for k, v in dict(self.table).items()}
        if sorted(table) != list(range(len(table))):
            raise ValueError(f"state indices must be 0..{len(table) - 1}, got {sorted(table)}")
        if len(set(table.values())) != len(table):
            raise ValueError("mapping is not injective: two states share a diode configuration")
        if len(table) != 4:
            raise ValueError("a two-diode cell mapping must cover exactly 4 states")
        object.__setattr__(self, "table", table)

    @classmethod
    def default(cls) -> "StateMapping":
        return cls({0: (False, False), 1: (False, True), 2: (True, False), 3: (True, True)})

    def to_json(self) -> dict:
        return {str(k): ["ON" if a else "OFF", "ON" if b else "OFF"] for k, (a, b) in sorted(self.table.items())}

    @classmethod
    def from_json(cls, data: Mapping) -> "StateMapping":
        def flag(v) -> bool:
            if isinstance(v, bool):
                return v
            if isinstance(v, str) and v.upper() in ("ON", "OFF"):
                return v.upper() == "ON"
            if v in (0, 1):
                return bool(v)
            raise ValueError(f"diode state must be ON/OFF or a boolean, got {v!r}")

        return cls({int(k): (flag(v[0]), flag(v[1])) for k, v in data.items()})

    def inverse(self) -> dict[tuple[bool, bool], int]:
        return {v: k for k, v in self.table.items()}


@dataclass(frozen=True)
class BiasFrame:
    """Per-diode polarity lines, bool array of shape (n_cells, 2 diodes, 2 lines)."""

    lines: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.lines, dtype=bool)
        if arr.ndim != 3 or arr.shape[1:] != (DIODES_PER_CELL, LINES_PER_DIODE):
            raise ValueError("bias lines must have shape (n_cells, 2, 2)")
        object.__setattr__(self, "lines", arr)

    @property
    def n_cells(self) -> int:
        return self.lines.shape[0]

    def exclusive(self) -> np.ndarray:
        """True per diode when exactly one polarity is asserted."""
        return self.lines[..., POSITIVE] ^ self.lines[..., NEGATIVE]

    def validate(self) -> "BiasFrame":
        bad = np.argwhere(~self.exclusive())
        if bad.size:
            cell, diode = bad[0]
            raise InvalidBiasFrame(
                f"cell {cell} diode {diode + 1}: positive={self.lines[cell, diode, 0]}, "
                f"negative={self.lines[cell, diode, 1]} (need exactly one)"
            )
        return self

    def diode_on(self) -> np.ndarray:
        return self.lines[..., POSITIVE]

    def __eq__(self, other):
        return isinstance(other, BiasFrame) and np.array_equal(self.lines, other.lines)

    __hash__ = None


@dataclass(frozen=True)
class ChainConfig:
    register_width: int = 8
    shift_order: str = "msb-first"

    def __post_init__(self):
        if self.register_width < 1:
            raise ValueError("register_width must be >= 1")
        if self.shift_order != "msb-first":
            raise ValueError("only msb-first shifting is modelled")

    def n_lines(self, n_cells: int) -> int:
        return n_cells * DIODES_PER_CELL * LINES_PER_DIODE

    def n_registers(self, n_cells: int) -> int:
        return -(-self.n_lines(n_cells) // self.register_width)


def apply_mapping(qmap: QuantizedMap, mapping: StateMapping) -> BiasFrame:
    """ON diodes get the positive line, OFF diodes the negative (reverse bias) line."""
    idx = qmap.state_indices.ravel()
    lines = np.zeros((idx.size, DIODES_PER_CELL, LINES_PER_DIODE), dtype=bool)
    for cell, s in enumerate(idx):
        if int(s) not in mapping.table:
            i, j = divmod(cell, qmap.geometry.n_cols)
            raise ValueError(f"cell ({i}, {j}) has state {s}, not in the mapping")
        for d, on in enumerate(mapping.table[int(s)]):
            lines[cell, d, POSITIVE if on else NEGATIVE] = True
    return BiasFrame(lines)


def frame_states(frame: BiasFrame, mapping: StateMapping) -> np.ndarray:
    """Recover per-cell state indices from a valid frame."""
    frame.validate()
    inv = mapping.inverse()
    on = frame.diode_on()
    return np.array([inv[(bool(a), bool(b))] for a, b in on], dtype=int)


def serialize(frame: BiasFrame, chain: ChainConfig | None = None) -> np.ndarray:
    """Canonical line order as a 0/1 uint8 vector, zero-padded to whole registers."""
    chain = chain or ChainConfig()
    bits = frame.lines.reshape(-1).astype(np.uint8)
    pad = (-bits.size) % chain.register_width
    return np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])


def simulate_chain(bits, chain: ChainConfig | None = None) -> np.ndarray:
    """Clock ``bits`` through a chain of W-bit shift registers, latch, and read back.

    Each clock moves every stage one place toward the far end; the last stage
    of a register feeds the first stage of the next.  The latched outputs are
    returned in canonical line order.
    """
    chain = chain or ChainConfig()
    bits = np.asarray(bits, dtype=np.uint8)
    w = chain.register_width
    if bits.ndim != 1 or bits.size == 0 or bits.size % w:
        raise BitstreamError(f"bit vector length {bits.size} is not a positive multiple of {w}")
    if np.any(bits > 1):
        raise BitstreamError("bit vector must contain only 0 and 1")
    n_reg = bits.size // w
    # stages[r, q]: register r (0 = nearest the controller), output q (0 = QA ... w-1 = QH)
    stages = np.zeros((n_reg, w), dtype=np.uint8)
    for b in bits:
        carry = stages[:, -1].copy()
        stages[:, 1:] = stages[:, :-1]
        stages[1:, 0] = carry[:-1]
        stages[0, 0] = b
    latched = stages.copy()

    n = np.arange(bits.size)
    return latched[n_reg - 1 - n // w, w - 1 - n % w]


def reparse(lines, n_cells: int) -> BiasFrame:
    """Build and validate a frame from recovered line states (padding ignored)."""
    lines = np.asarray(lines)
    need = n_cells * DIODES_PER_CELL * LINES_PER_DIODE
    if lines.size < need:
        raise BitstreamError(f"need {need} lines for {n_cells} cells, got {lines.size}")
    frame = BiasFrame(lines[:need].reshape(n_cells, DIODES_PER_CELL, LINES_PER_DIODE))
    return frame.validate()


def to_hex(bits) -> str:
    """Bytes in shift order, each byte MSB = first bit shifted; lowercase, newline-terminated."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise BitstreamError("hex encoding needs a multiple of 8 bits")
    return np.packbits(bits).tobytes().hex() + "\n"


def from_hex(text: str) -> np.ndarray:
    payload = "".join(line.strip() for line in text.splitlines() if not line.startswith("#"))
    try:
        raw = bytes.fromhex(payload)
    except ValueError as exc:
        raise BitstreamError(f"invalid hex bitstream: {exc}") from None
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))


def sidecar(n_cells: int, chain: ChainConfig, mapping: StateMapping) -> dict:
    return {
        "n_cells": n_cells,
        "lines": chain.n_lines(n_cells),
        "registers": chain.n_registers(n_cells),
        "register_width": chain.register_width,
        "mapping": mapping.to_json(),
    }


def sidecar_json(n_cells: int, chain: ChainConfig, mapping: StateMapping) -> str:
    return json.dumps(sidecar(n_cells, chain, mapping), indent=2) + "\n"
