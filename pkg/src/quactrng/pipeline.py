"""End-to-end random number pipeline: reserved-row initialization by
in-DRAM copy, quadruple activation across four bank groups, plan-driven
block extraction, SHA-256 whitening, and a small FIFO output buffer.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, SegmentAddress
from .engine import copy_row, run_quac

__all__ = [
    "ReservedLayout",
    "RngBuffer",
    "generate_iteration",
    "vnc",
    "sha256_digest",
    "stream_bits",
    "pack_bits",
    "unpack_bits",
    "write_binary",
    "write_ascii",
]

WORD_BITS = 256


def pack_bits(bits):
    """Pack a 0/1 array into bytes, MSB first; the last byte is zero-padded."""
    bits = np.asarray(bits, dtype=np.uint8)
    return np.packbits(bits).tobytes()


def unpack_bits(data, n_bits):
    """Unpack bytes (MSB first) into a 0/1 uint8 array of length n_bits."""
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    if n_bits > len(bits):
        raise ValueError("not enough bytes for the requested bit count")
    return bits[:n_bits]


def sha256_digest(message_bits):
    """SHA-256 digest of a bit message, returned as a 256-bit 0/1 array.

    The message is byte-packed MSB first (zero-padding any final partial
    byte) and hashed with the standard library's FIPS 180-4 implementation.
    """
    digest = hashlib.sha256(pack_bits(message_bits)).digest()
    return unpack_bits(digest, WORD_BITS)


def vnc(bits):
    """Von Neumann corrector: scan non-overlapping pairs, emit 1 for "01",
    0 for "10", nothing for "00"/"11"; an odd trailing bit is dropped.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    n = len(bits) - (len(bits) % 2)
    first, second = bits[0:n:2], bits[1:n:2]
    return second[first != second].copy()


@dataclass(frozen=True)
class ReservedLayout:
    """Rows the pipeline owns: in each of the four bank groups, one bank
    contributes one four-row segment plus two source rows (one all-0s, one
    all-1s) in the same subarray — six reserved rows per bank.
    """

    banks: tuple = ((0, 0), (1, 0), (2, 0), (3, 0))

    def __post_init__(self):
        if len(self.banks) != 4 or \
                len({bg for bg, _ in self.banks}) != 4:
            raise ConfigError(
                "banks: need one bank in each of 4 distinct bank groups")

    def source_rows(self, geometry, segment_index):
        """(all_zeros_row, all_ones_row) in the segment's subarray."""
        base = 4 * segment_index
        zeros, ones = base + 4, base + 5
        if geometry.subarray_of_row(ones) != geometry.subarray_of_row(base):
            zeros, ones = base - 2, base - 1
        return zeros, ones

    def reserved_rows(self, geometry, segment_index):
        base = 4 * segment_index
        return set(range(base, base + 4)) | set(
            self.source_rows(geometry, segment_index))

    def ensure_sources(self, device, segment_index):
        """Write the source-row fills if they have not been written yet."""
        zeros, ones = self.source_rows(device.geometry, segment_index)
        for bg, bank in self.banks:
            if (bg, bank, zeros) not in device._cells:
                device.write_row(bg, bank, zeros, 0)
            if (bg, bank, ones) not in device._cells:
                device.write_row(bg, bank, ones, 1)


def generate_iteration(device, layout, plan, temperature=50.0, iteration=0):
    """Run one full pipeline iteration; returns a list of 256-bit words
    (0/1 uint8 arrays), 4 x SIB of them.

    Per bank: rows are initialized to the "0111" layout by in-DRAM copy
    (row 0 from the all-0s source, rows 1-3 from the all-1s source), a
    quadruple activation is performed, the plan's column ranges are read
    out, and each range is hashed into one 256-bit word.
    """
    bin_index = plan.bin_for(temperature)
    entry = plan.entries[bin_index]
    ranges = entry["ranges"]
    if not ranges:
        raise ValueError("insufficient entropy: plan bin has zero input blocks")
    seg_index = entry["segment"].segment_index
    layout.ensure_sources(device, seg_index)
    zeros_row, ones_row = layout.source_rows(device.geometry, seg_index)
    reserved = (zeros_row, ones_row)

    words = []
    for bg, bank in layout.banks:
        address = SegmentAddress(bg, bank, seg_index)
        base = address.base_row
        copy_row(device, bg, bank, zeros_row, base, reserved_rows=reserved)
        for r in (1, 2, 3):
            copy_row(device, bg, bank, ones_row, base + r,
                     reserved_rows=reserved)
        bits = run_quac(device, address, pattern=None,
                        experiment_seed=iteration, temperature=temperature)
        for start, end, _ in ranges:
            words.append(sha256_digest(bits[start:end]))
    return words


@dataclass
class RngBuffer:
    """Bounded FIFO of 256-bit words with a low-water refill policy."""

    capacity_bits: int = 16384
    refill_fraction: float = 0.5
    _words: deque = field(default_factory=deque)
    events: list = field(default_factory=list)

    def __post_init__(self):
        if self.capacity_bits < WORD_BITS:
            raise ValueError("capacity_bits must hold at least one word")
        if not 0.0 < self.refill_fraction <= 1.0:
            raise ValueError("refill_fraction must be in (0, 1]")

    @property
    def fill_bits(self):
        return WORD_BITS * len(self._words)

    @property
    def needs_refill(self):
        return self.fill_bits < self.refill_fraction * self.capacity_bits

    def push(self, word):
        if self.fill_bits + WORD_BITS > self.capacity_bits:
            return False
        self._words.append(word)
        return True

    def pop(self):
        if not self._words:
            raise IndexError("buffer empty")
        return self._words.popleft()


def stream_bits(device, layout, plan, n_bits, buffer=None, temperature=50.0,
                start_iteration=0):
    """Produce exactly ``n_bits`` of output through the FIFO buffer.

    Whenever the buffer drops below its refill threshold, full iterations
    run until the buffer is full again (each refill is recorded in
    ``buffer.events``). Returns (bits, next_iteration).
    """
    if n_bits <= 0:
        raise ValueError("n_bits must be > 0")
    if buffer is None:
        buffer = RngBuffer()
    out = []
    produced = 0
    iteration = start_iteration
    while produced < n_bits:
        if buffer.needs_refill or buffer.fill_bits == 0:
            buffer.events.append(("refill", iteration))
            while True:
                words = generate_iteration(device, layout, plan,
                                           temperature=temperature,
                                           iteration=iteration)
                iteration += 1
                full = False
                for w in words:
                    if not buffer.push(w):
                        # buffer full: surplus words of this iteration spill
                        # straight to the output
                        out.append(w)
                        produced += WORD_BITS
                        full = True
                if full or not buffer.needs_refill:
                    break
        word = buffer.pop()
        out.append(word)
        produced += WORD_BITS
    bits = np.concatenate(out)[:n_bits]
    return bits, iteration


def write_binary(path, bits):
    """Write a bitstream as packed flat binary (MSB first)."""
    with open(path, "wb") as fh:
        fh.write(pack_bits(bits))


def write_ascii(path, bits):
    """Write a bitstream as ASCII '0'/'1' characters (external test suites)."""
    bits = np.asarray(bits, dtype=np.uint8)
    with open(path, "w") as fh:
        fh.write("".join("1" if b else "0" for b in bits))
        fh.write("\n")
