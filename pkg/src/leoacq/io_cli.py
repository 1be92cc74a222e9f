"""Raw sample file I/O, scenario configuration, CSV emitters, and the CLI.

Binary sample formats are little-endian; integer formats carry samples
scaled to [-1, 1) by the type's max magnitude, and the -iq variants
interleave I then Q per sample.  A synthesized sample file is accompanied
by a plain-text key=value truth sidecar (<name>.truth) that records the
file layout and the per-epoch synthesis truth, which is enough to label
acquisition results without re-synthesizing.

Subcommands: synth, pass, acquire, sweep, duration.  Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .prn_code import generate_code
from .geometry import simulate_pass, PassScenario
from .signal_synth import SampledSignal, SynthParams, synthesize_pass_signal
from .acq_core import make_plan, samples_per_code
from .integrators import IntegrationSpec, Strategy, strategy_valid_at
from .eval_harness import (EpochLabel, PfCurve, acquisition_timeline,
                           label_epochs, pf_sweep, threshold_bounds,
                           truth_from_epoch)
from .detector import AcqResult


class SampleFileError(Exception):
    """Base for sample-file data errors."""


class UnknownFormatError(SampleFileError):
    pass


class TruncatedFileError(SampleFileError):
    pass


class ReadRangeError(SampleFileError):
    pass


# format tag -> (little-endian dtype, integer full-scale or None, is_iq)
_FORMATS = {
    "int8-real": ("<i1", 128.0, False),
    "int16-real": ("<i2", 32768.0, False),
    "float32-real": ("<f4", None, False),
    "int8-iq": ("<i1", 128.0, True),
    "int16-iq": ("<i2", 32768.0, True),
    "float32-iq": ("<f4", None, True),
}


@dataclass
class SampleFileMeta:
    sample_rate: float
    intermediate_freq: float
    format: str = "float32-real"
    byte_order: str = "little"
    t0: float = 0.0

    def __post_init__(self):
        if self.format not in _FORMATS:
            raise UnknownFormatError(
                f"unknown sample format {self.format!r}; "
                f"supported: {', '.join(sorted(_FORMATS))}")
        if self.byte_order != "little":
            raise UnknownFormatError("only little-endian files are supported")

    @property
    def bytes_per_sample(self) -> int:
        dtype, _, is_iq = _FORMATS[self.format]
        return np.dtype(dtype).itemsize * (2 if is_iq else 1)


def read_samples(path, meta: SampleFileMeta, offset: int = 0,
                 count: int | None = None) -> SampledSignal:
    """Read samples [offset, offset+count) from a binary sample file."""
    dtype, scale, is_iq = _FORMATS[meta.format]
    frame = meta.bytes_per_sample
    size = os.path.getsize(path)
    if size % frame != 0:
        raise TruncatedFileError(
            f"{path}: file truncated at byte {size}: length is not a "
            f"multiple of the {frame}-byte sample frame "
            f"(last whole sample ends at byte {size - size % frame})")
    total = size // frame
    if count is None:
        count = total - offset
    if offset < 0 or count < 0 or offset + count > total:
        raise ReadRangeError(
            f"{path}: read range [{offset}, {offset + count}) outside the "
            f"{total} samples in the file")
    raw = np.fromfile(path, dtype=dtype, count=count * (2 if is_iq else 1),
                      offset=offset * frame)
    vals = raw.astype(np.float64)
    if scale is not None:
        vals /= scale
    if is_iq:
        vals = vals[0::2] + 1j * vals[1::2]
    return SampledSignal(samples=vals, sample_rate=meta.sample_rate,
                         t0=meta.t0 + offset / meta.sample_rate)


def write_samples(signal: SampledSignal, path, meta: SampleFileMeta) -> int:
    """Write samples to a binary file; returns the clip-saturation count
    (0 for lossless writes)."""
    dtype, scale, is_iq = _FORMATS[meta.format]
    x = np.asarray(signal.samples)
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite samples")
    if is_iq:
        x = x.astype(np.complex128)
        flat = np.empty(2 * len(x), dtype=np.float64)
        flat[0::2] = x.real
        flat[1::2] = x.imag
    else:
        if np.iscomplexobj(x):
            raise ValueError(
                f"complex samples cannot be written to real format {meta.format}")
        flat = x.astype(np.float64)
    clipped = 0
    if scale is None:
        out = flat.astype(dtype)
    else:
        scaled = np.round(flat * scale)
        info = np.iinfo(dtype)
        clipped = int(np.count_nonzero((scaled < info.min) | (scaled > info.max)))
        out = np.clip(scaled, info.min, info.max).astype(dtype)
    out.tofile(path)
    return clipped


# ---------------------------------------------------------------------------
# Truth sidecar
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_truth_sidecar(path, meta: SampleFileMeta, epochs: list[SampledSignal],
                        chip_rate: float, code_length: int,
                        epoch_step: float) -> None:
    """Record the file layout plus the per-epoch synthesis truth."""
    base = epochs[0].truth
    spe = len(epochs[0].samples)
    lines = [
        f"format={meta.format}",
        f"sample_rate={_fmt(meta.sample_rate)}",
        f"intermediate_freq={_fmt(meta.intermediate_freq)}",
        f"t0={_fmt(meta.t0)}",
        f"prn_id={base.prn_id}",
        f"carrier_freq={_fmt(base.carrier_freq)}",
        f"chip_rate={_fmt(chip_rate)}",
        f"code_length={code_length}",
        f"bit_phase0={_fmt(base.bit_phase0)}",
        f"duration={_fmt(base.duration)}",
        f"epoch_step={_fmt(epoch_step)}",
        f"samples_per_epoch={spe}",
        f"epoch_count={len(epochs)}",
    ]
    for k, e in enumerate(epochs):
        p = e.truth
        bits = ("" if p.data_bits is None
                else ",".join(str(int(b)) for b in np.asarray(p.data_bits)))
        lines += [
            f"epoch.{k}.t={_fmt(e.t0)}",
            f"epoch.{k}.doppler0={_fmt(p.doppler0)}",
            f"epoch.{k}.doppler_rate={_fmt(p.doppler_rate)}",
            f"epoch.{k}.amplitude={_fmt(p.amplitude)}",
            f"epoch.{k}.cn0={_fmt(p.cn0)}",
            f"epoch.{k}.code_phase0={_fmt(p.code_phase0)}",
            f"epoch.{k}.seed={p.seed}",
            f"epoch.{k}.data_bits={bits}",
        ]
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_truth_sidecar(path) -> tuple[dict, list[dict]]:
    """Parse a truth sidecar into a header dict and per-epoch dicts."""
    kv = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key] = val
    header = {
        "format": kv["format"],
        "sample_rate": float(kv["sample_rate"]),
        "intermediate_freq": float(kv["intermediate_freq"]),
        "t0": float(kv["t0"]),
        "prn_id": int(kv["prn_id"]),
        "carrier_freq": float(kv["carrier_freq"]),
        "chip_rate": float(kv["chip_rate"]),
        "code_length": int(kv["code_length"]),
        "bit_phase0": float(kv["bit_phase0"]),
        "duration": float(kv["duration"]),
        "epoch_step": float(kv["epoch_step"]),
        "samples_per_epoch": int(kv["samples_per_epoch"]),
        "epoch_count": int(kv["epoch_count"]),
    }
    epochs = []
    for k in range(header["epoch_count"]):
        pre = f"epoch.{k}."
        bits_str = kv[pre + "data_bits"]
        epochs.append({
            "t": float(kv[pre + "t"]),
            "doppler0": float(kv[pre + "doppler0"]),
            "doppler_rate": float(kv[pre + "doppler_rate"]),
            "amplitude": float(kv[pre + "amplitude"]),
            "cn0": None if kv[pre + "cn0"] == "none" else float(kv[pre + "cn0"]),
            "code_phase0": float(kv[pre + "code_phase0"]),
            "seed": int(kv[pre + "seed"]),
            "data_bits": (None if bits_str == "" else
                          np.array([float(b) for b in bits_str.split(",")])),
        })
    return header, epochs


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------

_STRATEGY_NAMES = {s.value: s for s in Strategy}


@dataclass
class ScenarioConfig:
    """One experiment: synthesis + geometry + run parameters (JSON file)."""

    prn_id: int = 1
    sample_rate: float = 1.023e6
    intermediate_freq: float = 0.25e6
    carrier_freq: float = 1.5e9
    amplitude: float = 1.0
    code_phase0: float = 0.0
    bit_phase0: float = 0.0
    data_bits: str = "ones"         # "ones" | "random"
    cn0: float | None = 45.0        # dB-Hz at the pass minimum range
    duration: float = 0.04          # s of signal per epoch
    seed: int = 1
    orbit_height: float = 645e3
    elevation_mask: float = 10.0
    cross_track_offset_deg: float = 0.0
    epoch_step: float = 1.0
    strategies: list = field(default_factory=lambda: ["coherent"])
    total_ms: list = field(default_factory=lambda: [1])
    threshold: float = 2.5
    half_span: float = 10e3
    pf_thresholds: list = field(default_factory=lambda: [1.0, 6.0, 0.05])
    sample_format: str = "float32-real"

    def __post_init__(self):
        for name in self.strategies:
            if name not in _STRATEGY_NAMES:
                raise ValueError(
                    f"unknown strategy {name!r}; "
                    f"supported: {', '.join(sorted(_STRATEGY_NAMES))}")
        if self.data_bits not in ("ones", "random"):
            raise ValueError("data_bits must be 'ones' or 'random'")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.duration < max(self.total_ms) / 1e3:
            raise ValueError(
                f"epoch duration {self.duration}s shorter than the longest "
                f"integration {max(self.total_ms)} ms")
        if self.sample_format not in _FORMATS:
            raise UnknownFormatError(f"unknown sample format {self.sample_format!r}")
        generate_code(self.prn_id)  # validates the PRN id

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        with open(path) as f:
            return cls(**json.load(f))

    def base_synth_params(self) -> SynthParams:
        return SynthParams(
            prn_id=self.prn_id, sample_rate=self.sample_rate,
            intermediate_freq=self.intermediate_freq,
            carrier_freq=self.carrier_freq, amplitude=self.amplitude,
            code_phase0=self.code_phase0, bit_phase0=self.bit_phase0,
            cn0=self.cn0, duration=self.duration, seed=self.seed)

    def scenario(self) -> PassScenario:
        return simulate_pass(self.orbit_height, self.elevation_mask,
                             self.cross_track_offset_deg, self.epoch_step,
                             self.carrier_freq)

    def threshold_grid(self) -> np.ndarray:
        t = self.pf_thresholds
        if len(t) == 3 and t[2] < t[1] - t[0]:
            lo, hi, step = t
            return np.round(np.arange(lo, hi + step / 2, step), 10)
        return np.asarray(t, dtype=np.float64)

    def run_combos(self):
        """Valid (strategy, total_ms) pairs in config order."""
        for name in self.strategies:
            strat = _STRATEGY_NAMES[name]
            for t_ms in self.total_ms:
                if strategy_valid_at(strat, t_ms):
                    yield strat, t_ms


def pass_epochs(config: ScenarioConfig) -> list[SampledSignal]:
    """Geometry + synthesis for the configured pass, in memory."""
    return list(synthesize_pass_signal(
        config.scenario(), config.base_synth_params(),
        random_bits=config.data_bits == "random"))


# ---------------------------------------------------------------------------
# CSV emitters (decimal-point floats, header row, \n line endings)
# ---------------------------------------------------------------------------

def timeline_rows(results: list[AcqResult], labels: list[EpochLabel],
                  strategy: Strategy, total_ms: int) -> str:
    lines = ["t_s,strategy,total_ms,doppler_hz,code_phase_samples,mtsmr,mtmr,decided,ok"]
    for r, l in zip(results, labels):
        lines.append(f"{l.t!r},{strategy.value},{total_ms},{float(r.doppler_hat)!r},"
                     f"{r.code_phase_hat},{float(r.mtsmr)!r},{float(r.mtmr)!r},"
                     f"{int(r.decided)},{int(l.estimate_ok)}")
    return "\n".join(lines) + "\n"


def pf_curve_rows(curve: PfCurve) -> str:
    lines = ["threshold,pf,miss_rate,false_alarm_rate"]
    for k in range(len(curve.thresholds)):
        lines.append(f"{float(curve.thresholds[k])!r},{float(curve.pf[k])!r},"
                     f"{float(curve.miss_rate[k])!r},{float(curve.false_alarm_rate[k])!r}")
    return "\n".join(lines) + "\n"


def bounds_rows(entries: list[tuple[Strategy, int, tuple | None]]) -> str:
    lines = ["strategy,total_ms,lower,upper"]
    for strat, t_ms, bounds in entries:
        if bounds is None:
            lines.append(f"{strat.value},{t_ms},none,none")
        else:
            lines.append(f"{strat.value},{t_ms},{bounds[0]!r},{bounds[1]!r}")
    return "\n".join(lines) + "\n"


def duration_rows(entries: list[tuple[Strategy, int, float, float]]) -> str:
    lines = ["strategy,total_ms,success_s,decided_s"]
    for strat, t_ms, success_s, decided_s in entries:
        lines.append(f"{strat.value},{t_ms},{float(success_s)!r},{float(decided_s)!r}")
    return "\n".join(lines) + "\n"


def _write_text(path, text: str) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(text)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="leoacq",
                     description="LEO navigation-signal acquisition engine")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize a pass into a sample file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default=None, help="override sample format")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("pass", help="write the pass geometry CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="default: stdout")

    p = sub.add_parser("acquire", help="acquire epochs from a sample file")
    p.add_argument("--samples", required=True)
    p.add_argument("--strategy", default="coherent",
                   choices=sorted(_STRATEGY_NAMES))
    p.add_argument("--total-ms", type=int, default=1)
    p.add_argument("--threshold", type=float, default=2.5)
    p.add_argument("--half-span", type=float, default=10e3)
    p.add_argument("--out", default=None, help="default: stdout")

    p = sub.add_parser("sweep", help="false-alarm-vs-threshold sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pf-target", type=float, default=0.10)

    p = sub.add_parser("duration", help="success duration vs integration duration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    return parser


def _load_config(args) -> ScenarioConfig:
    config = ScenarioConfig.from_file(args.config)
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


def _cmd_synth(args) -> int:
    config = _load_config(args)
    fmt = args.format or config.sample_format
    epochs = pass_epochs(config)
    meta = SampleFileMeta(sample_rate=config.sample_rate,
                          intermediate_freq=config.intermediate_freq,
                          format=fmt, t0=epochs[0].t0)
    stream = SampledSignal(
        samples=np.concatenate([e.samples for e in epochs]),
        sample_rate=config.sample_rate, t0=epochs[0].t0)
    clipped = write_samples(stream, args.out, meta)
    code = generate_code(config.prn_id)
    write_truth_sidecar(args.out + ".truth", meta, epochs,
                        chip_rate=code.chip_rate, code_length=code.code_length,
                        epoch_step=config.epoch_step)
    msg = (f"wrote {len(epochs)} epochs x {len(epochs[0].samples)} samples "
           f"({fmt}) to {args.out}")
    if clipped:
        msg += f" [{clipped} samples clipped]"
    print(msg)
    return 0


def _cmd_pass(args) -> int:
    config = _load_config(args)
    csv = config.scenario().to_csv()
    if args.out:
        _write_text(args.out, csv)
    else:
        sys.stdout.write(csv)
    return 0


def _cmd_acquire(args) -> int:
    header, epoch_truths = read_truth_sidecar(args.samples + ".truth")
    meta = SampleFileMeta(sample_rate=header["sample_rate"],
                          intermediate_freq=header["intermediate_freq"],
                          format=header["format"], t0=header["t0"])
    strategy = _STRATEGY_NAMES[args.strategy]
    if not strategy_valid_at(strategy, args.total_ms):
        raise ValueError(
            f"strategy {args.strategy} is not defined at {args.total_ms} ms")
    spec = IntegrationSpec(strategy=strategy, total_ms=args.total_ms)
    plan = make_plan(header["intermediate_freq"], args.half_span, args.total_ms)

    spe = header["samples_per_epoch"]
    epochs = []
    for k, tru in enumerate(epoch_truths):
        sig = read_samples(args.samples, meta, offset=k * spe, count=spe)
        sig.t0 = tru["t"]
        sig.truth = SynthParams(
            prn_id=header["prn_id"], sample_rate=header["sample_rate"],
            intermediate_freq=header["intermediate_freq"],
            carrier_freq=header["carrier_freq"], amplitude=tru["amplitude"],
            code_phase0=tru["code_phase0"], doppler0=tru["doppler0"],
            doppler_rate=tru["doppler_rate"], data_bits=tru["data_bits"],
            bit_phase0=header["bit_phase0"], cn0=tru["cn0"],
            duration=header["duration"], seed=tru["seed"])
        epochs.append(sig)

    results, labels, summary = acquisition_timeline(
        epochs, spec, plan, args.threshold)
    csv = timeline_rows(results, labels, strategy, args.total_ms)
    if args.out:
        _write_text(args.out, csv)
    else:
        sys.stdout.write(csv)
    print(f"success {summary.success_s!r} s, decided {summary.decided_s!r} s",
          file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    os.makedirs(args.out_dir, exist_ok=True)
    epochs = pass_epochs(config)
    code = generate_code(config.prn_id)
    thresholds = config.threshold_grid()
    bounds_entries = []
    first = True
    for strategy, t_ms in config.run_combos():
        spec = IntegrationSpec(strategy=strategy, total_ms=t_ms)
        plan = make_plan(config.intermediate_freq, config.half_span, t_ms)
        results, labels, _ = acquisition_timeline(
            epochs, spec, plan, config.threshold, code=code)
        curve = pf_sweep(results, labels, thresholds)
        csv = pf_curve_rows(curve)
        _write_text(os.path.join(
            args.out_dir, f"pf_curve_{strategy.value}_{t_ms}ms.csv"), csv)
        if first:
            _write_text(os.path.join(args.out_dir, "pf_curve.csv"), csv)
            first = False
        bounds_entries.append((strategy, t_ms,
                               threshold_bounds(curve, args.pf_target)))
    _write_text(os.path.join(args.out_dir, "bounds.csv"),
                bounds_rows(bounds_entries))
    print(f"wrote pf curves and bounds for "
          f"{len(bounds_entries)} strategy/duration combos to {args.out_dir}")
    return 0


def _cmd_duration(args) -> int:
    config = _load_config(args)
    epochs = pass_epochs(config)
    code = generate_code(config.prn_id)
    entries = []
    for strategy, t_ms in config.run_combos():
        spec = IntegrationSpec(strategy=strategy, total_ms=t_ms)
        plan = make_plan(config.intermediate_freq, config.half_span, t_ms)
        _, _, summary = acquisition_timeline(
            epochs, spec, plan, config.threshold, code=code)
        entries.append((strategy, t_ms, summary.success_s, summary.decided_s))
    _write_text(args.out, duration_rows(entries))
    print(f"wrote {len(entries)} duration rows to {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "pass": _cmd_pass,
    "acquire": _cmd_acquire,
    "sweep": _cmd_sweep,
    "duration": _cmd_duration,
}


def cli(argv) -> int:
    """Run the CLI; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (SampleFileError, OSError, ValueError, KeyError,
            json.JSONDecodeError) as e:
        print(f"leoacq {args.command}: error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
