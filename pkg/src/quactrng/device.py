"""Simulated DRAM device: static variation parameters, cell array state,
the row-decoder latch state machine, and the sense-amplifier sampling model.

The physical model is a weighted charge-sharing + Gaussian-noise probit:
each open cell pulls the bitline away from the precharge level with a
weight (the first-activated row pulls hardest because its cells share
charge the longest), a per-bitline sense-amplifier offset is added, and
the amplifier resolves 1 with probability Phi(deviation / noise_sigma).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .config import (ConfigError, DeviceConfig, DramGeometry, SegmentAddress,
                     TimingParams, VariationProfile)
from .rng import TAG_CHIP_TRAITS, TAG_SEGMENT_PARAMS, stream

__all__ = [
    "DecoderState",
    "DecoderError",
    "SegmentParams",
    "DeviceState",
    "build_device",
    "decoder_step",
    "charge_share_deviation",
    "sample_sense_amp",
]

PRECHARGE_LEVEL = 0.5
REFERENCE_TEMP_C = 50.0


class DecoderError(RuntimeError):
    """Command sequence the decoder model does not define."""


# ---------------------------------------------------------------------------
# Row decoder latch state machine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecoderState:
    """Latch state of the hierarchical row decoder for one bank.

    The four select lines are pure functions of the latches:
    S0 = A0b & A1b, S1 = A0 & A1b, S2 = A0b & A1, S3 = A0 & A1.
    """

    a0: bool = False
    a0b: bool = False
    a1: bool = False
    a1b: bool = False
    active_master_wordline: int | None = None
    wordline_enable_time: float | None = None
    precharge_issue_time: float | None = None

    def select_lines(self):
        return (self.a0b and self.a1b, self.a0 and self.a1b,
                self.a0b and self.a1, self.a0 and self.a1)

    @property
    def any_latched(self):
        return self.a0 or self.a0b or self.a1 or self.a1b

    def active_rows(self):
        if self.active_master_wordline is None:
            return frozenset()
        base = self.active_master_wordline * 4
        return frozenset(base + i for i, s in enumerate(self.select_lines()) if s)


def decoder_step(state, command, now, timings):
    """Apply one command to the decoder; returns (new_state, active_row_set).

    ``command`` is ``("ACT", row)`` or ``("PRE",)``. A PRE that arrives
    before tRAS has elapsed fails to reset the latches (it only records
    its issue time); a subsequent ACT then adds its latches to the ones
    already set, which is what opens all four rows of a segment when the
    two ACT addresses have inverted low bits.
    """
    kind = command[0]
    if kind == "ACT":
        row = command[1]
        master = row >> 2
        if state.any_latched and state.active_master_wordline is not None \
                and master != state.active_master_wordline:
            raise DecoderError(
                "cross-segment sequence undefined: second ACT selects master "
                f"wordline {master} while {state.active_master_wordline} is latched")
        bit0, bit1 = row & 1, (row >> 1) & 1
        new = replace(
            state,
            a0=state.a0 or bool(bit0),
            a0b=state.a0b or not bit0,
            a1=state.a1 or bool(bit1),
            a1b=state.a1b or not bit1,
            active_master_wordline=master,
            wordline_enable_time=now,
        )
        return new, new.active_rows()
    if kind == "PRE":
        if state.wordline_enable_time is None or \
                now - state.wordline_enable_time >= timings.tRAS:
            return DecoderState(), frozenset()
        # tRAS violated: the precharge cannot reset the latches.
        new = replace(state, precharge_issue_time=now)
        return new, new.active_rows()
    raise ValueError(f"unknown decoder command {command!r}")


# ---------------------------------------------------------------------------
# Physical model
# ---------------------------------------------------------------------------

def charge_share_deviation(cells, first_row_weight, later_row_weight,
                           weight_multiplier, sa_offset, first_row=0):
    """Pre-sense bitline deviation from the precharge level.

    ``cells`` is a (4, n) array of normalized charges, row-major in segment
    order. The row activated first (``first_row``) contributes with
    ``first_row_weight``; the other three with ``later_row_weight``. The
    per-segment ``weight_multiplier`` scales the charge term only; the
    per-bitline ``sa_offset`` is added afterwards.
    """
    cells = np.asarray(cells, dtype=np.float64)
    weights = np.full(cells.shape[0], later_row_weight, dtype=np.float64)
    weights[first_row] = first_row_weight
    shared = weights @ (cells - PRECHARGE_LEVEL)
    return weight_multiplier * shared + sa_offset


def sample_sense_amp(deviation, thermal_noise_sigma, temperature_adjust,
                     rng_draw):
    """Resolve deviations to bits: P(1) = Phi(adjusted deviation / sigma).

    ``rng_draw`` is an array of uniforms from the experiment stream, one
    per bitline (a scalar works for a single bitline).
    """
    if thermal_noise_sigma <= 0:
        raise ValueError("thermal_noise_sigma must be > 0")
    p_one = ndtr(np.asarray(deviation, dtype=np.float64)
                 * temperature_adjust / thermal_noise_sigma)
    return (np.asarray(rng_draw) < p_one).astype(np.uint8)


def success_probability(deviation, thermal_noise_sigma, temperature_adjust=1.0):
    """Analytic P(1) for a deviation; the sampling path must match this."""
    return ndtr(np.asarray(deviation, dtype=np.float64)
                * temperature_adjust / thermal_noise_sigma)


# ---------------------------------------------------------------------------
# Device state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentParams:
    """Deterministic per-segment electrical parameters."""

    sa_offset: np.ndarray          # per-bitline SA offset, normalized volts
    weight_multiplier: float       # per-segment charge-sharing multiplier


class DeviceState:
    """A simulated device: immutable derived parameters plus mutable cell
    and decoder state.

    Static parameters are derived lazily (a full device is 8K segments x
    64K bitlines per bank; materializing every offset array up front would
    be gigabytes) from splittable streams keyed by
    (master_seed, bank_group, bank, segment_index), so any evaluation
    order reproduces identical values.
    """

    def __init__(self, geometry, timings, variation):
        self.geometry = geometry
        self.timings = timings
        self.variation = variation
        self._param_cache = {}
        self._cells = {}     # (bg, bank, row) -> float32 array of charges
        self._decoders = {}  # (bg, bank) -> DecoderState
        traits = stream(variation.master_seed, TAG_CHIP_TRAITS)
        # +1: entropy rises with temperature (deviation shrinks); -1: falls.
        self.temperature_trend = 1 if traits.uniform() < variation.trend_sign_fraction else -1

    # -- static parameters --------------------------------------------------

    def segment_params(self, address):
        key = (address.bank_group, address.bank, address.segment_index)
        cached = self._param_cache.get(key)
        if cached is not None:
            return cached
        v = self.variation
        rng = stream(v.master_seed, TAG_SEGMENT_PARAMS, *key)
        n = self.geometry.bitlines_per_row
        sigma = np.full(n, v.sa_offset_sigma)
        if v.column_sigma_wave_amplitude:
            col = np.arange(n)
            sigma = sigma * (1.0 + v.column_sigma_wave_amplitude
                             * np.sin(np.pi * col / n))
        offsets = rng.normal(0.0, 1.0, n) * sigma
        mult = 1.0 + rng.normal(0.0, v.segment_weight_jitter_sigma) \
            + v.spatial_wave_amplitude * np.sin(
                2.0 * np.pi * address.segment_index / v.spatial_wave_period)
        params = SegmentParams(sa_offset=offsets, weight_multiplier=mult)
        if len(self._param_cache) > 64:
            self._param_cache.clear()
        self._param_cache[key] = params
        return params

    def temperature_adjust(self, temperature_c):
        """Multiplicative factor on deviation magnitude at a temperature."""
        k = self.variation.temp_coefficient_per_chip
        return 1.0 - self.temperature_trend * k * (temperature_c - REFERENCE_TEMP_C)

    # -- mutable cell / decoder state ---------------------------------------

    def validate_address(self, address):
        g = self.geometry
        if not (address.bank_group < g.bank_groups
                and address.bank < g.banks_per_group
                and address.segment_index < g.segments_per_bank):
            raise ConfigError(
                f"segment address {address} outside device geometry")

    def write_row(self, bank_group, bank, row, value):
        """Write a full row; ``value`` is a fill bit or a per-bitline array."""
        n = self.geometry.bitlines_per_row
        if np.isscalar(value):
            data = np.full(n, float(value), dtype=np.float32)
        else:
            data = np.asarray(value, dtype=np.float32).copy()
            if data.shape != (n,):
                raise ValueError(f"row data must have shape ({n},)")
        self._cells[(bank_group, bank, row)] = data

    def read_cells(self, bank_group, bank, row):
        """Current charges of a row (uninitialized rows read precharge level)."""
        data = self._cells.get((bank_group, bank, row))
        if data is None:
            return np.full(self.geometry.bitlines_per_row, PRECHARGE_LEVEL,
                           dtype=np.float32)
        return data

    def decoder(self, bank_group, bank):
        return self._decoders.get((bank_group, bank), DecoderState())

    def set_decoder(self, bank_group, bank, state):
        self._decoders[(bank_group, bank)] = state

    def fork(self):
        """Fresh device sharing the same static description (clean cells)."""
        return DeviceState(self.geometry, self.timings, self.variation)


def build_device(geometry=None, timings=None, variation=None):
    """Construct a DeviceState, validating all configuration invariants."""
    if isinstance(geometry, DeviceConfig):
        cfg = geometry
        return DeviceState(cfg.geometry, cfg.timings, cfg.variation)
    return DeviceState(geometry or DramGeometry(),
                       timings or TimingParams(),
                       variation or VariationProfile())
