"""Command-line interface: ``ecgscrub {decompose,denoise,bench,synth,fetch}``.

Exit status: 0 success, 1 numeric failure, 2 usage or config error,
3 I/O error (including missing records when no bench cell could run).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, reference, wfdbio
from .metrics import MetricReport
from .noise import RNG_ALGORITHM, NoiseKind, NoiseSource, awgn, mix_at_snr, synth_ecg
from .pipeline import Method, PipelineConfig, PipelineError, run, run_record
from .signal import Signal
from .vmd import sort_modes_by_freq, vmd_decompose
from .wavelet import mra_decompose, nominal_band

logger = logging.getLogger("ecgscrub")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _csv_list(kind):
    def parse(text: str):
        return [kind(t.strip()) for t in text.split(",") if t.strip()]
    return parse


# flag dest -> PipelineConfig field
_FLAG_FIELDS = {
    "method": "method",
    "levels": "levels",
    "modes": "modes",
    "alpha_lilliefors": "lilliefors_alpha",
    "highpass_hz": "highpass_hz",
    "nlm_bandwidth": "nlm_bandwidth",
    "nlm_patch": "nlm_patch",
    "nlm_search": "nlm_search",
}


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", type=Path, help="key = value config file; flags override it")
    g.add_argument("--method", choices=[m.value for m in Method])
    g.add_argument("--levels", type=int, help="wavelet decomposition levels")
    g.add_argument("--modes", type=int, help="VMD mode count")
    g.add_argument("--alpha-lilliefors", type=float, help="Gaussianity test significance level")
    g.add_argument("--highpass-hz", type=float, help="stage-5 high-pass cutoff")
    g.add_argument("--nlm-bandwidth", type=float, help="nonlocal-means bandwidth (default: from data)")
    g.add_argument("--nlm-patch", type=int, help="nonlocal-means patch half-width")
    g.add_argument("--nlm-search", type=int, help="nonlocal-means search half-width")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")


def pipeline_config(args) -> PipelineConfig:
    try:
        cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
        overrides = {}
        for dest, key in _FLAG_FIELDS.items():
            v = getattr(args, dest, None)
            if v is not None:
                overrides[key] = v
        for item in getattr(args, "set", []):
            if "=" not in item:
                raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            overrides[k.strip()] = v.strip()
        return PipelineConfig.from_mapping(overrides, cfg) if overrides else cfg
    except OSError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _config_comment(cfg: PipelineConfig, **extra) -> str:
    lines = [f"ecgscrub {__version__}"]
    lines += [f"{k}={v}" for k, v in extra.items()]
    lines.append("config: " + cfg.one_line())
    return "\n".join(lines)


def load_input(path: Path, fs: float, lead: int) -> Signal:
    if path.suffix == ".hea":
        leads = wfdbio.read_record(path)
        if not 0 <= lead < len(leads):
            raise ConfigError(f"lead {lead} out of range; record has {len(leads)}")
        return leads[lead]
    return wfdbio.read_csv(path, fs)


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", type=Path, help="WFDB header (.hea) or one-column CSV")
    p.add_argument("--fs", type=float, default=360.0, help="sampling rate for CSV input (Hz)")
    p.add_argument("--lead", type=int, default=0, help="lead index for WFDB input")


# commands


def cmd_denoise(args) -> int:
    cfg = pipeline_config(args)
    if args.trace:
        cfg = replace(cfg, keep_intermediates=True)
    x = load_input(args.input, args.fs, args.lead)
    y, trace = run(x, cfg)
    comment = _config_comment(cfg, input=args.input, removed=";".join(trace.removed) or "none")
    wfdbio.write_csv(y, args.out, header="denoised", comment=comment)
    if args.trace:
        trace.write_csv(args.trace)
    print(f"wrote {args.out} ({len(y)} samples, removed: {', '.join(trace.removed) or 'none'})")
    return EXIT_OK


def _spectrum(x: np.ndarray, fs: float):
    return np.fft.rfftfreq(x.size, 1.0 / fs), np.abs(np.fft.rfft(x)) / x.size


def cmd_decompose(args) -> int:
    cfg = pipeline_config(args)
    x = load_input(args.input, args.fs, args.lead)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "wavelet":
        decomp = mra_decompose(x, cfg.levels, cfg.bank)
    else:
        decomp = sort_modes_by_freq(vmd_decompose(x, cfg.vmd), "descending").modes
    comment = _config_comment(cfg, input=args.input, decomposition=args.kind)
    manifest = {"label": [], "center_freq_hz": [], "band_low_hz": [], "band_high_hz": []}
    for c in decomp.components:
        label = str(c.label)
        wfdbio.write_csv(x.with_samples(c.samples), out / f"component_{label}.csv", header=label, comment=comment)
        f, mag = _spectrum(c.samples, x.fs)
        wfdbio.write_columns(out / f"spectrum_{label}.csv", {"frequency_hz": f, "magnitude": mag}, comment)
        if c.label.kind == "D":
            lo, hi = nominal_band(c.label.index, x.fs)
        elif c.label.kind == "A":
            lo, hi = 0.0, x.fs / 2 ** (c.label.index + 1)
        else:
            lo = hi = float("nan")
        manifest["label"].append(label)
        manifest["center_freq_hz"].append(float("nan") if c.center_freq is None else c.center_freq)
        manifest["band_low_hz"].append(lo)
        manifest["band_high_hz"].append(hi)
    _write_manifest(out / "manifest.csv", manifest, comment)
    print(f"wrote {len(decomp)} components to {out}")
    return EXIT_OK


def _write_manifest(path, cols, comment) -> None:
    with open(path, "w") as fh:
        for ln in comment.splitlines():
            fh.write(f"# {ln}\n")
        fh.write(",".join(cols) + "\n")
        for row in zip(*cols.values()):
            fh.write(",".join(str(v) if isinstance(v, str) else repr(float(v)) for v in row) + "\n")


def cmd_synth(args) -> int:
    clean = synth_ecg(args.duration, args.fs, args.heart_rate)
    comment = f"synth_ecg duration={args.duration} fs={args.fs} heart_rate={args.heart_rate}"
    if args.clean_out:
        wfdbio.write_csv(clean, args.clean_out, header="clean", comment=comment)
    sig = clean
    if args.snr_db is not None:
        sig = mix_at_snr(clean, awgn(len(clean), args.seed, args.fs), args.snr_db)
        comment += f"\nawgn snr_db={args.snr_db} seed={args.seed} rng={RNG_ALGORITHM}"
    wfdbio.write_csv(sig, args.out, header="value", comment=comment)
    print(f"wrote {args.out} ({len(sig)} samples)")
    return EXIT_OK


@dataclass(frozen=True)
class BenchSpec:
    records: tuple[str, ...]
    noises: tuple[NoiseKind, ...]
    snrs: tuple[float, ...]
    methods: tuple[Method, ...]
    seed: int
    output_dir: Path
    segment_len: int = 3600
    max_segments: int | None = None
    lead: int = 0
    noise_offset: int = 0
    workers: int = 1
    sweep: tuple[str, tuple[str, ...]] | None = None  # (config key, values)

    def __post_init__(self):
        for name in ("records", "noises", "snrs", "methods"):
            if not getattr(self, name):
                raise ValueError(f"bench needs at least one entry in {name}")
        if self.sweep is not None and not self.sweep[1]:
            raise ValueError(f"--sweep {self.sweep[0]} has no values")

    def variants(self, cfg: PipelineConfig) -> list[tuple[str, PipelineConfig]]:
        """``("", cfg)`` alone, or one ``("key=value", cfg')`` per swept value."""
        if self.sweep is None:
            return [("", cfg)]
        key, values = self.sweep
        return [(f"{key}={v}", PipelineConfig.from_mapping({key: v}, cfg)) for v in values]


def _cell_name(record: str, noise: NoiseKind, snr: float) -> str:
    return f"{record}_{noise.value}_{snr:g}dB"


def _bench_cell(spec: BenchSpec, cfg: PipelineConfig, record: str, noise: NoiseKind, snr: float):
    """Run one (record, noise, snr) cell; returns (rows, skip reason)."""
    hea = wfdbio.find_record(record)
    if hea is None:
        return None, f"record {record} not found under ECGSCRUB_DATA_DIR"
    clean = wfdbio.read_record(hea)[spec.lead]
    if noise is NoiseKind.AWGN:
        source = NoiseSource(noise, seed=spec.seed)
    else:
        nhea = wfdbio.find_record(noise.value)
        if nhea is None:
            return None, f"noise record {noise.value} not found under ECGSCRUB_DATA_DIR"
        source = NoiseSource(noise, record=wfdbio.read_record(nhea)[0], channel=0, offset=spec.noise_offset)
    if spec.max_segments is not None:
        clean = clean.with_samples(clean.samples[: spec.max_segments * spec.segment_len])
    rows = []
    for variant, vcfg in spec.variants(cfg):
        for method in spec.methods:
            result = run_record(clean, source, snr, replace(vcfg, method=method), spec.segment_len, spec.workers)
            rows.append((variant, method, result, source.describe()))
    return rows, None


def cmd_bench(args) -> int:
    cfg = pipeline_config(args)
    try:
        sweep = None
        if args.sweep:
            if "=" not in args.sweep:
                raise ValueError(f"--sweep expects KEY=V1,V2,..., got {args.sweep!r}")
            key, values = args.sweep.split("=", 1)
            sweep = (key.strip(), tuple(v.strip() for v in values.split(",") if v.strip()))
        spec = BenchSpec(
            tuple(args.records), tuple(NoiseKind(n) for n in args.noise), tuple(args.snr_db),
            tuple(Method(m) for m in args.methods), args.seed, Path(args.out),
            args.segment_len, args.max_segments, args.lead, args.noise_offset, args.workers, sweep,
        )
        spec.variants(cfg)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    header = _config_comment(cfg, seed=spec.seed, rng=RNG_ALGORITHM, segment_len=spec.segment_len,
                             max_segments=spec.max_segments, lead=spec.lead)
    summary = []
    ran = 0
    for record in spec.records:
        for noise in spec.noises:
            for snr in spec.snrs:
                name = _cell_name(record, noise, snr)
                rows, reason = _bench_cell(spec, cfg, record, noise, snr)
                ref = reference.flat_columns(record, noise.value, snr)
                if rows is None:
                    print(f"SKIPPED {name}: {reason}")
                    summary.append({"record": record, "noise": noise.value, "snr_db": snr,
                                    "method": "SKIPPED", "note": reason})
                    continue
                ran += 1
                cell_rows = []
                for variant, method, result, noise_desc in rows:
                    m = result.aggregate.mean
                    row = {"method": method.value.upper(), **({"variant": variant} if variant else {}), "MSE": m.mse, "RMSE": m.rmse, "PRD": m.prd,
                           "SNRimp": m.snr_imp, "SNRin": m.snr_in, "SNRout": m.snr_out,
                           "segments": result.aggregate.count, **ref}
                    cell_rows.append(row)
                    summary.append({"record": record, "noise": noise.value, "snr_db": snr,
                                    "method": row["method"], **({"variant": variant} if variant else {}), "MSE": m.mse, "PRD": m.prd,
                                    "SNRimp": m.snr_imp, "note": noise_desc, **ref})
                _write_rows(spec.output_dir / f"bench_{name}.csv", cell_rows, header + f"\ncell={name}")
                print(f"wrote bench_{name}.csv")
    _write_rows(spec.output_dir / "summary.csv", summary, header)
    if ran == 0:
        print("error: no bench cell ran; fetch records with 'ecgscrub fetch' and set ECGSCRUB_DATA_DIR",
              file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _write_rows(path: Path, rows: list[dict], comment: str) -> None:
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    with open(path, "w") as fh:
        for ln in comment.splitlines():
            fh.write(f"# {ln}\n")
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r.get(c, "")) for c in cols) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v).replace(",", ";")


def cmd_fetch(args) -> int:
    dest = args.out or wfdbio.data_dir()
    if dest is None:
        raise ConfigError("give --out or set ECGSCRUB_DATA_DIR")
    for name in args.records:
        path = wfdbio.fetch(name, dest, args.base_url)
        print(f"fetched {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgscrub", description="ECG denoising by decomposition, "
                                     "Gaussianity screening, wavelet shrinkage and nonlocal means.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise one signal")
    _add_input(p)
    _add_pipeline_flags(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--trace", type=Path, help="write per-stage intermediates as CSV")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("decompose", help="write decomposition components and spectra")
    _add_input(p)
    _add_pipeline_flags(p)
    p.add_argument("--kind", choices=["wavelet", "vmd"], default="wavelet")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("synth", help="write a synthetic ECG, optionally with white noise")
    p.add_argument("--duration", type=float, default=10.0, help="seconds")
    p.add_argument("--fs", type=float, default=360.0)
    p.add_argument("--heart-rate", type=float, default=72.0, help="beats per minute")
    p.add_argument("--snr-db", type=float)
    p.add_argument("--noise", choices=["awgn"], default="awgn")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clean-out", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="run the record x noise x SNR benchmark grid")
    _add_pipeline_flags(p)
    p.add_argument("--records", type=_csv_list(str), default=["100", "103", "105"])
    p.add_argument("--noise", type=_csv_list(str), default=["awgn"], help="comma list of awgn,bw,ma")
    p.add_argument("--snr-db", type=_csv_list(float), default=[10.0])
    p.add_argument("--methods", type=_csv_list(str), default=["wlnh", "vlwnh"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--segment-len", type=int, default=3600)
    p.add_argument("--max-segments", type=int, help="only the first N segments of each record")
    p.add_argument("--lead", type=int, default=0)
    p.add_argument("--noise-offset", type=int, default=0, help="start sample in the noise record")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sweep", metavar="KEY=V1,V2,...",
                   help="rerun every cell once per value of one config key (sensitivity analysis)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fetch", help="download records (network)")
    p.add_argument("records", nargs="+")
    p.add_argument("--out", type=Path, help="destination (default: $ECGSCRUB_DATA_DIR)")
    p.add_argument("--base-url")
    p.set_defaults(func=cmd_fetch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except PipelineError as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        # malformed input files surface here (CSV/WFDB parsing)
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
