"""Six-stage ECG denoising: decompose, drop Gaussian components, shrink two
component groups, high-pass, then nonlocal means.

``WLNH`` decomposes with the wavelet MRA, ``VLWNH`` with VMD (modes sorted
highest centre frequency first).  Everything else is shared.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import iir, lilliefors, nlm, vmd, wavelet
from .metrics import AggregateReport, MetricReport, aggregate
from .noise import NoiseSource, mix_at_snr
from .signal import Component, Decomposition, Signal, labels_of, segment, sum_components

logger = logging.getLogger(__name__)


class Method(str, Enum):
    WLNH = "wlnh"
    VLWNH = "vlwnh"


class Stage5Sum(str, Enum):
    DENOISED = "denoised"  # stage-3 output + stage-4 output
    RAW = "raw"  # surviving first-group sum before shrinkage + stage-4 output


class PipelineError(ValueError):
    """Failure inside one stage; ``stage`` is 1..6."""

    def __init__(self, stage: int, name: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} ({name}): {cause}")


@dataclass(frozen=True)
class PipelineConfig:
    """Flat pipeline configuration.

    The sub-configurations used by each stage are exposed as properties
    (``highpass``, ``nlm``, ``vmd``, ``bank``) built from these fields, so
    the whole thing round-trips through a ``key = value`` file.
    ``nlm_bandwidth = None`` picks the bandwidth from the stage-6 input.
    """

    method: Method = Method.WLNH
    levels: int = 10
    modes: int = 10
    first_group: int = 5
    lilliefors_alpha: float = 0.05
    # deeper shrinkage biases the QRS scales whenever a noise component survives
    high_group_denoise_level: int = 3
    low_group_denoise_level: int = 2
    threshold_scale: float = 1.0
    wavelet_bank: str = "fk14"
    highpass_hz: float = 0.5  # 3 Hz strips too much ST/T energy
    highpass_order: int = 4
    nlm_bandwidth: float | None = None
    nlm_bandwidth_scale: float = 0.6
    nlm_patch: int = 10
    nlm_search: int = 500
    vmd_alpha: float = 2000.0
    vmd_tau: float = 0.0
    vmd_tol: float = 1e-7
    vmd_max_iter: int = 500
    remove_gaussian: bool = True
    highpass_enabled: bool = True
    nlm_enabled: bool = True
    stage5_sum: Stage5Sum = Stage5Sum.DENOISED
    keep_intermediates: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "stage5_sum", Stage5Sum(self.stage5_sum))
        count = self.levels + 1 if self.method is Method.WLNH else self.modes
        if not 1 <= self.first_group < count:
            raise ValueError(f"first_group must be in [1, {count - 1}], got {self.first_group}")
        if self.levels < 1 or self.modes < 1:
            raise ValueError("levels and modes must be >= 1")
        lilliefors._match_alpha(self.lilliefors_alpha)
        # build every sub-config once so invalid values fail here, not mid-run
        wavelet.DenoiseSpec(self.high_group_denoise_level, threshold_scale=self.threshold_scale)
        wavelet.DenoiseSpec(self.low_group_denoise_level, threshold_scale=self.threshold_scale)
        wavelet.get_bank(self.wavelet_bank)
        self.highpass
        self.vmd
        if self.nlm_bandwidth is not None:
            self.nlm_params(self.nlm_bandwidth)
        elif not self.nlm_bandwidth_scale > 0:
            raise ValueError("nlm_bandwidth_scale must be positive")

    @property
    def highpass(self) -> iir.IirSpec:
        return iir.IirSpec(iir.FilterKind.HIGHPASS, self.highpass_hz, self.highpass_order, zero_phase=True)

    @property
    def vmd(self) -> vmd.VmdConfig:
        return vmd.VmdConfig(self.modes, self.vmd_alpha, self.vmd_tau, self.vmd_tol, self.vmd_max_iter)

    @property
    def bank(self) -> wavelet.FilterBank:
        return wavelet.get_bank(self.wavelet_bank)

    def nlm_params(self, bandwidth: float) -> nlm.NlmParams:
        return nlm.NlmParams(bandwidth, self.nlm_patch, self.nlm_search)

    @classmethod
    def pass_through(cls, **overrides) -> "PipelineConfig":
        """Every stage that changes the signal is switched off."""
        base = dict(remove_gaussian=False, threshold_scale=0.0, highpass_enabled=False, nlm_enabled=False)
        base.update(overrides)
        return cls(**base)

    # key = value text form

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Enum):
                v = v.value
            lines.append(f"{f.name} = {'none' if v is None else v}")
        return "\n".join(lines) + "\n"

    def one_line(self) -> str:
        return " ".join(ln.replace(" = ", "=") for ln in self.to_text().splitlines())

    @classmethod
    def from_mapping(cls, values: dict, base: "PipelineConfig | None" = None) -> "PipelineConfig":
        """Override ``base`` (default config) with string or typed values."""
        base = base or cls()
        known = {f.name: f for f in fields(cls)}
        parsed = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            parsed[key] = _coerce(key, raw, getattr(cls(), key))
        return replace(base, **parsed)

    @classmethod
    def from_text(cls, text: str, base: "PipelineConfig | None" = None) -> "PipelineConfig":
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            values[k] = v
        return cls.from_mapping(values, base)

    @classmethod
    def load(cls, path, base: "PipelineConfig | None" = None) -> "PipelineConfig":
        return cls.from_text(Path(path).read_text(), base)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


_OPTIONAL_FLOATS = {"nlm_bandwidth"}


def _coerce(key: str, raw, default):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if key in _OPTIONAL_FLOATS:
        return None if text.lower() in ("none", "auto", "") else float(text)
    if isinstance(default, bool):
        if text.lower() in ("true", "1", "yes", "on"):
            return True
        if text.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"config key {key!r}: not a boolean: {raw!r}")
    if isinstance(default, Enum):
        return type(default)(text.lower())
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


@dataclass
class StageTrace:
    """What happened inside one run.

    ``removed`` lists the labels deleted as Gaussian; ``tests`` holds every
    first-group verdict; ``stages`` maps stage names to intermediate signals
    when the config asks for them.
    """

    components: list[str] = field(default_factory=list)
    removed: list[str] = field(default_factory=list)
    tests: dict[str, lilliefors.LillieforsResult | None] = field(default_factory=dict)
    center_freqs: dict[str, float] = field(default_factory=dict)
    nlm_bandwidth: float | None = None
    stages: dict[str, np.ndarray] = field(default_factory=dict)

    def write_csv(self, path) -> None:
        """One column per stored intermediate, one row per sample."""
        if not self.stages:
            raise ValueError("trace holds no intermediates; enable keep_intermediates")
        names = list(self.stages)
        cols = np.column_stack([self.stages[k] for k in names])
        with open(path, "w", newline="") as fh:
            fh.write(f"# removed={';'.join(self.removed) or 'none'}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample", *names])
            for i, row in enumerate(cols):
                w.writerow([i, *(repr(float(v)) for v in row)])


def _decompose(x: Signal, cfg: PipelineConfig) -> Decomposition:
    if cfg.method is Method.WLNH:
        # stricter than the MRA itself, which only needs the mirrored window
        if len(x) < 2**cfg.levels:
            raise ValueError(f"insufficient length for levels: {len(x)} samples < 2**{cfg.levels}")
        return wavelet.mra_decompose(x, cfg.levels, cfg.bank)
    result = vmd.sort_modes_by_freq(vmd.vmd_decompose(x, cfg.vmd), "descending")
    if not result.converged:
        logger.debug("vmd stopped at max_iter=%d", result.iterations)
    return result.modes


def _gaussian_verdict(c: Component, alpha: float) -> lilliefors.LillieforsResult | None:
    """None when the component is constant (no variance to test; kept)."""
    if not np.ptp(c.samples) > 0:
        return None
    return lilliefors.lilliefors_test(c.samples, alpha)


def _highpass(x: Signal, cfg: PipelineConfig) -> Signal:
    """Zero-phase high-pass that leaves the segment mean in place.

    The mean is removed before filtering and restored after, and the mirror
    padding spans the whole segment so the low cutoff does not ring at the
    edges.
    """
    chain = iir.design(cfg.highpass, x.fs)
    mean = float(np.mean(x.samples))
    centred = x.with_samples(x.samples - mean)
    out = iir.apply(centred, chain, zero_phase=True, padlen=len(x) - 1)
    return out.with_samples(out.samples + mean)


def run(noisy: Signal, cfg: PipelineConfig = PipelineConfig()) -> tuple[Signal, StageTrace]:
    """Denoise one segment.  Errors are re-raised as :class:`PipelineError`."""
    trace = StageTrace()
    n, fs = len(noisy), noisy.fs
    keep = cfg.keep_intermediates
    if keep:
        trace.stages["input"] = noisy.samples

    try:
        decomp = _decompose(noisy, cfg)
    except ValueError as e:
        raise PipelineError(1, "decompose", e) from e
    comps = decomp.components
    trace.components = labels_of(comps)
    trace.center_freqs = {str(c.label): c.center_freq for c in comps if c.center_freq is not None}
    if keep:
        for c in comps:
            trace.stages[str(c.label)] = c.samples

    first, rest = comps[: cfg.first_group], comps[cfg.first_group :]
    survivors = []
    try:
        for c in first:
            verdict = _gaussian_verdict(c, cfg.lilliefors_alpha)
            trace.tests[str(c.label)] = verdict
            if cfg.remove_gaussian and verdict is not None and verdict.is_gaussian:
                trace.removed.append(str(c.label))
            else:
                survivors.append(c)
    except ValueError as e:
        raise PipelineError(2, "gaussianity test", e) from e

    high_raw = sum_components(survivors, n, fs)
    try:
        spec = wavelet.DenoiseSpec(cfg.high_group_denoise_level, threshold_scale=cfg.threshold_scale)
        high = wavelet.wavelet_denoise(high_raw, spec, cfg.bank)
    except ValueError as e:
        raise PipelineError(3, "high-group shrinkage", e) from e
    try:
        spec = wavelet.DenoiseSpec(cfg.low_group_denoise_level, threshold_scale=cfg.threshold_scale)
        low = wavelet.wavelet_denoise(sum_components(rest, n, fs), spec, cfg.bank)
    except ValueError as e:
        raise PipelineError(4, "low-group shrinkage", e) from e

    summed = (high if cfg.stage5_sum is Stage5Sum.DENOISED else high_raw) + low
    try:
        filtered = _highpass(summed, cfg) if cfg.highpass_enabled else summed
    except ValueError as e:
        raise PipelineError(5, "high-pass", e) from e
    if keep:
        trace.stages.update(stage3=high.samples, stage4=low.samples, stage5_sum=summed.samples, stage5=filtered.samples)

    out = filtered
    if cfg.nlm_enabled:
        try:
            k = cfg.nlm_bandwidth
            if k is None:
                k = cfg.nlm_bandwidth_scale * nlm.difference_sigma(filtered.samples)
            if k > 0:
                trace.nlm_bandwidth = k
                out = nlm.nlm_denoise(filtered, cfg.nlm_params(k))
            else:
                logger.debug("no difference noise left; skipping nonlocal means")
        except ValueError as e:
            raise PipelineError(6, "nonlocal means", e) from e
    if keep:
        trace.stages["stage6"] = out.samples
    return out, trace


@dataclass(frozen=True)
class RecordResult:
    aggregate: AggregateReport
    reports: tuple[MetricReport, ...]
    removed_counts: tuple[int, ...]


def run_segment(clean: Signal, noise: NoiseSource, index: int, snr_db: float, cfg: PipelineConfig):
    noisy = mix_at_snr(clean, noise.segment(index, len(clean), clean.fs), snr_db)
    denoised, trace = run(noisy, cfg)
    return MetricReport.compute(clean, noisy, denoised), len(trace.removed)


def run_record(
    record: Signal,
    noise: NoiseSource,
    snr_db: float,
    cfg: PipelineConfig = PipelineConfig(),
    segment_len: int = 3600,
    workers: int = 1,
) -> RecordResult:
    """Segment ``record``, add noise per segment, denoise, and average the metrics.

    Segment ``i`` always draws noise block ``i``, so the result does not
    depend on ``workers``.
    """
    segs = segment(record, segment_len)

    def job(i):
        return run_segment(segs[i], noise, i, snr_db, cfg)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, range(len(segs))))
    else:
        results = [job(i) for i in range(len(segs))]
    reports = tuple(r for r, _ in results)
    return RecordResult(aggregate(reports), reports, tuple(c for _, c in results))


def config_dict(cfg: PipelineConfig) -> dict:
    return {k: (v.value if isinstance(v, Enum) else v) for k, v in asdict(cfg).items()}
