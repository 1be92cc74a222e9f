"""Shared helpers for the test suite.

Fast-profile signal parameters (1 sample per chip, low IF) keep the
Monte-Carlo tests quick; the paper-profile 4 samples/chip defaults are
exercised where accuracy claims demand them.
"""

import numpy as np
import pytest

from leoacq.acq_core import FrequencyPlan, make_plan
from leoacq.integrators import CorrelationGrid, DetectionGrid, IntegrationSpec, Strategy
from leoacq.prn_code import generate_code
from leoacq.signal_synth import SampledSignal, SynthParams, synthesize

# fast profile: 1 sample/chip
FS_FAST = 1.023e6
FIF_FAST = 0.25e6

# paper-style profile: 4 samples/chip
FS_FULL = 4.092e6
FIF_FULL = 1.25e6


@pytest.fixture(scope="session")
def code1():
    return generate_code(1)


def fast_params(**overrides) -> SynthParams:
    base = dict(prn_id=1, sample_rate=FS_FAST, intermediate_freq=FIF_FAST,
                carrier_freq=1.5e9, duration=1e-3)
    base.update(overrides)
    return SynthParams(**base)


def full_params(**overrides) -> SynthParams:
    base = dict(prn_id=1, sample_rate=FS_FULL, intermediate_freq=FIF_FULL,
                carrier_freq=1.5e9, duration=1e-3)
    base.update(overrides)
    return SynthParams(**base)


def noise_only_signal(rng, sigma, n, fs=FS_FAST) -> SampledSignal:
    return SampledSignal(samples=rng.normal(0.0, sigma, n), sample_rate=fs)


def dummy_plan(n_bins=3) -> FrequencyPlan:
    side = n_bins // 2
    return FrequencyPlan(center=0.0, half_span=side * 500.0, bin_width=500.0,
                         bins=tuple((k - side) * 500.0 for k in range(n_bins)))


def grids_from_values(value_arrays, plan=None, samples_per_chip=1):
    """Wrap raw complex matrices as unit grids sharing one plan."""
    arrays = [np.atleast_2d(np.asarray(v, dtype=np.complex128)) for v in value_arrays]
    if plan is None:
        plan = dummy_plan(arrays[0].shape[0])
    return [CorrelationGrid(values=a, plan=plan,
                            samples_per_code=a.shape[1],
                            samples_per_chip=samples_per_chip)
            for a in arrays]


def detection_grid_from(values, samples_per_chip=1,
                        strategy=Strategy.NON_COHERENT) -> DetectionGrid:
    v = np.atleast_2d(np.asarray(values, dtype=np.float64))
    return DetectionGrid(values=v, spec=IntegrationSpec(strategy, total_ms=1),
                         plan=dummy_plan(v.shape[0]),
                         samples_per_chip=samples_per_chip)


def synth_units(m, code, d0=1000.0, cn0=None, seed=0, fs=FS_FAST,
                fif=FIF_FAST, code_phase0=0.0, data_bits=None,
                bit_phase0=0.0, amplitude=1.0, doppler_rate=0.0):
    """Synthesize m milliseconds and return (signal, plan-ready params)."""
    params = SynthParams(prn_id=code.prn_id, sample_rate=fs,
                         intermediate_freq=fif, carrier_freq=1.5e9,
                         amplitude=amplitude, code_phase0=code_phase0,
                         doppler0=d0, doppler_rate=doppler_rate,
                         data_bits=data_bits, bit_phase0=bit_phase0,
                         cn0=cn0, duration=m * 1e-3, seed=seed)
    return synthesize(params, code=code), params


def plan_for(total_ms, fif=FIF_FAST, half_span=2e3):
    return make_plan(fif, half_span, total_ms)
