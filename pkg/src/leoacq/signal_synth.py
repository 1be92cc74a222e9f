"""Sampled-IF signal synthesis: the ground-truth source for acquisition runs.

Produces real-valued IF sample streams of the BPSK-spread navigation signal:
amplitude * code * data * sin(2*pi*phase) + Gaussian noise, with 50 bps data
(possible sign transition every 20 ms), carrier phase accumulated as a chirp
(Doppler + Doppler rate), code-Doppler coupling on the chip rate, and noise
variance set from C/N0 referenced to the full real-sampling Nyquist band.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .prn_code import ChipSequence, generate_code
from .geometry import PassScenario

BIT_PERIOD_MS = 20.0  # 50 bps navigation data


@dataclass
class SynthParams:
    """Everything needed to synthesize (and later label) one signal epoch."""

    prn_id: int = 1
    sample_rate: float = 4.092e6
    intermediate_freq: float = 1.25e6
    carrier_freq: float = 1.5e9     # for code-Doppler coupling
    amplitude: float = 1.0
    code_phase0: float = 0.0        # chips
    doppler0: float = 0.0           # Hz at t = 0
    doppler_rate: float = 0.0       # Hz/s
    data_bits: Optional[np.ndarray] = None  # +/-1 at 50 bps; None -> all +1
    bit_phase0: float = 0.0         # ms offset of first bit boundary in [0, 20)
    cn0: Optional[float] = None     # dB-Hz; None -> noiseless
    duration: float = 1e-3          # s
    seed: int = 0


@dataclass
class SampledSignal:
    """Real-valued IF sample stream with its sampling metadata."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0
    truth: Optional[SynthParams] = None

    def __len__(self):
        return len(self.samples)


def noise_sigma(cn0: float, amplitude: float, sample_rate: float) -> float:
    """Noise standard deviation for a target C/N0 (dB-Hz).

    Solves (A^2/2) / (sigma^2 / (fs/2)) = 10^(cn0/10): real sampling with the
    noise power spread over the full Nyquist band.
    """
    if not np.isfinite(cn0):
        raise ValueError(f"cn0 must be finite, got {cn0}")
    if amplitude <= 0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    return float(np.sqrt(amplitude ** 2 / 2.0 * (sample_rate / 2.0)
                         / 10.0 ** (cn0 / 10.0)))


def _bit_indices(t: np.ndarray, bit_phase0: float) -> np.ndarray:
    """Index of the data bit active at each time (bit boundaries every 20 ms,
    the first boundary offset by bit_phase0 ms)."""
    offset_ms = (BIT_PERIOD_MS - bit_phase0) % BIT_PERIOD_MS
    return np.floor((t * 1e3 + offset_ms) / BIT_PERIOD_MS).astype(np.int64)


def synthesize(params: SynthParams, code: ChipSequence | None = None) -> SampledSignal:
    """Synthesize one epoch of sampled IF signal.

    Deterministic given params.seed.  Carrier phase is accumulated
    continuously across the whole epoch (chirp, not stepped per
    millisecond); the code NCO runs at chip_rate * (1 + doppler/carrier).
    """
    fs = params.sample_rate
    f_max = (params.intermediate_freq + abs(params.doppler0)
             + abs(params.doppler_rate) * params.duration)
    if fs <= 2.0 * f_max:
        raise ValueError(
            f"sample rate {fs} Hz violates Nyquist for max instantaneous "
            f"frequency {f_max} Hz")

    if code is None:
        code = generate_code(params.prn_id)
    n = round(params.duration * fs)
    t = np.arange(n) / fs

    # Doppler phase integral, shared by carrier chirp and code-rate scaling.
    doppler_cycles = params.doppler0 * t + 0.5 * params.doppler_rate * t * t
    carrier_cycles = params.intermediate_freq * t + doppler_cycles

    chip_phase = (params.code_phase0
                  + code.chip_rate * (t + doppler_cycles / params.carrier_freq))
    chips = code.chips[np.floor(chip_phase).astype(np.int64) % code.code_length]

    if params.data_bits is None:
        bits = 1.0
    else:
        data = np.asarray(params.data_bits, dtype=np.float64)
        if not np.all(np.abs(data) == 1.0):
            raise ValueError("data_bits must all be +1 or -1")
        idx = _bit_indices(t, params.bit_phase0)
        if idx[-1] >= len(data):
            raise ValueError(
                f"data_bits too short: need {idx[-1] + 1} bits for "
                f"{params.duration} s, got {len(data)}")
        bits = data[idx]

    samples = params.amplitude * chips * bits * np.sin(2.0 * np.pi * carrier_cycles)
    if params.cn0 is not None:
        sigma = noise_sigma(params.cn0, params.amplitude, fs)
        rng = np.random.default_rng(params.seed)
        samples = samples + rng.normal(0.0, sigma, n)
    return SampledSignal(samples=samples, sample_rate=fs, t0=0.0, truth=params)


def synthesize_pass_signal(scenario: PassScenario, base: SynthParams,
                           code: ChipSequence | None = None,
                           random_bits: bool = False):
    """Yield one signal epoch per scenario sample.

    Epoch Doppler/Doppler-rate follow the scenario; amplitude and C/N0 are
    both reduced by the path-loss excess over the pass minimum, which keeps
    the synthesized noise floor constant while the signal fades.  Per-epoch
    seeds are derived as base.seed XOR epoch index so epochs can be produced
    independently in any order.  With random_bits, each epoch gets its own
    seeded random +/-1 data sequence (a stream independent of the noise).
    """
    if not scenario.samples:
        raise ValueError("empty pass scenario")
    if code is None:
        code = generate_code(base.prn_id)
    loss_min = min(s.path_loss_db for s in scenario.samples)
    n_bits = int(base.duration * 1e3 / BIT_PERIOD_MS) + 2
    for k, s in enumerate(scenario.samples):
        excess_db = s.path_loss_db - loss_min
        params = replace(
            base,
            doppler0=s.doppler,
            doppler_rate=s.doppler_rate,
            amplitude=base.amplitude * 10.0 ** (-excess_db / 20.0),
            cn0=None if base.cn0 is None else base.cn0 - excess_db,
            seed=base.seed ^ k,
        )
        if random_bits:
            bit_rng = np.random.default_rng([base.seed, k])
            params = replace(
                params,
                data_bits=1.0 - 2.0 * bit_rng.integers(0, 2, n_bits))
        epoch = synthesize(params, code=code)
        epoch.t0 = s.t
        yield epoch
