"""Parallel code-phase search: the 1 ms processing unit.

For each trial Doppler bin the unit mixes the real IF samples to baseband
I/Q, takes the forward DFT, multiplies by the conjugate DFT of the sampled
code, and inverse-transforms, yielding one row of circular correlations per
bin.  The grid stays complex so downstream integrators can combine units
coherently; magnitudes are taken by the integrators, not here.

The local oscillator keeps a single phase origin across units (phase derived
from each unit's absolute start time), which preserves the unit-to-unit
phase relationships that coherent and differential integration rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .prn_code import ChipSequence, sample_code
from .signal_synth import SampledSignal

_FFT_WORKERS = -1  # all cores; per-row transforms, deterministic


@dataclass(frozen=True)
class FrequencyPlan:
    """Trial Doppler offsets around a mixing center frequency."""

    center: float       # Hz, absolute (typically the IF)
    half_span: float    # Hz
    bin_width: float    # Hz
    bins: tuple         # Doppler offsets relative to center, ascending


def make_plan(center: float, half_span: float, total_coh_ms: int) -> FrequencyPlan:
    """Build the Doppler search plan for a given coherent span.

    Bin width follows the 500/T rule (T in ms): longer coherent integration
    narrows the frequency search bandwidth.
    """
    if half_span <= 0:
        raise ValueError(f"half_span must be positive, got {half_span}")
    if total_coh_ms < 1:
        raise ValueError(f"total_coh_ms must be >= 1, got {total_coh_ms}")
    bin_width = 500.0 / total_coh_ms
    n_side = math.ceil(half_span / bin_width)
    bins = tuple((k - n_side) * bin_width for k in range(2 * n_side + 1))
    return FrequencyPlan(center=center, half_span=half_span,
                         bin_width=bin_width, bins=bins)


@dataclass
class CorrelationGrid:
    """Complex correlation values over (Doppler bin, code-phase sample)."""

    values: np.ndarray          # shape (len(plan.bins), samples_per_code)
    plan: FrequencyPlan
    samples_per_code: int
    samples_per_chip: int


def samples_per_code(code: ChipSequence, sample_rate: float) -> int:
    return round(sample_rate * code.code_length / code.chip_rate)


# Mixing tables are pure functions of (plan, length, sample rate); cache the
# big complex exponentials so repeated units reuse them.
_MIX_CACHE: dict = {}
_MIX_CACHE_MAX_ELEMENTS = 8_000_000  # ~128 MB of complex128


def _mixing_table(plan: FrequencyPlan, n: int, sample_rate: float) -> np.ndarray:
    key = (plan, n, sample_rate)
    table = _MIX_CACHE.get(key)
    if table is None:
        freqs = plan.center + np.asarray(plan.bins)
        t = np.arange(n) / sample_rate
        table = np.exp(-2j * np.pi * np.outer(freqs, t))
        while _MIX_CACHE and (sum(v.size for v in _MIX_CACHE.values())
                              + table.size > _MIX_CACHE_MAX_ELEMENTS):
            _MIX_CACHE.pop(next(iter(_MIX_CACHE)))
        _MIX_CACHE[key] = table
    return table


def _code_fft(code: ChipSequence, sample_rate: float) -> np.ndarray:
    return np.conj(scipy.fft.fft(sample_code(code, sample_rate)))


def process_unit(signal: SampledSignal, code: ChipSequence,
                 plan: FrequencyPlan) -> CorrelationGrid:
    """Correlate one unit (one code period) against all Doppler bins."""
    return _process_unit(signal.samples, signal.t0, signal.sample_rate,
                         code, plan, _code_fft(code, signal.sample_rate))


def _process_unit(x, t0, fs, code, plan, code_fft) -> CorrelationGrid:
    n = samples_per_code(code, fs)
    if len(x) != n:
        raise ValueError(
            f"unit length mismatch: got {len(x)} samples, one code period "
            f"is {n} at {fs} Hz")
    table = _mixing_table(plan, n, fs)
    mixed = table * x
    spec = scipy.fft.fft(mixed, axis=1, workers=_FFT_WORKERS)
    spec *= code_fft
    values = scipy.fft.ifft(spec, axis=1, workers=_FFT_WORKERS)
    if t0 != 0.0:
        # Fold in the local-oscillator phase accumulated up to this unit's
        # start so the LO is continuous across units.
        freqs = plan.center + np.asarray(plan.bins)
        values *= np.exp(-2j * np.pi * ((freqs * t0) % 1.0))[:, None]
    return CorrelationGrid(values=values, plan=plan, samples_per_code=n,
                           samples_per_chip=round(fs / code.chip_rate))


def process_units(signal: SampledSignal, code: ChipSequence,
                  plan: FrequencyPlan, count: int | None = None) -> list[CorrelationGrid]:
    """Split a multi-millisecond signal into consecutive units and process each.

    All grids share the same plan; unit m starts count*m samples into the
    signal with its start time advanced accordingly.
    """
    fs = signal.sample_rate
    n = samples_per_code(code, fs)
    m_total = len(signal.samples) // n
    if count is None:
        count = m_total
        if count * n != len(signal.samples):
            raise ValueError(
                f"signal length {len(signal.samples)} is not a multiple of "
                f"the {n}-sample unit")
    elif count > m_total:
        raise ValueError(f"signal too short for {count} units of {n} samples")
    code_fft = _code_fft(code, fs)
    return [_process_unit(signal.samples[m * n:(m + 1) * n],
                          signal.t0 + m * n / fs, fs, code, plan, code_fft)
            for m in range(count)]
