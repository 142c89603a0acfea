"""Command-line front end: ingestion, pipeline, JSON reports, SVG plots.

Subcommands: ``knee`` (capacity CSV to knee/knee-onset report), ``psd``
(per-phase or whole-series curvature PSD), ``ica`` (dQ/dV curves and peak
trajectory from an RPT manifest), ``report`` (one bundle of all three).
JSON goes to stdout or --output; reports are byte-stable for identical
inputs. Exit codes: 0 success, 1 internal error, 2 user/input error.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from ._json import dumps
from .curvature import approximate_curvature
from .dataset_io import parse_capacity_csv, parse_rpt_csv, resample_uniform
from .errors import ConfigurationError, KneecapError
from .ica import incremental_capacity, peak_trajectory
from .preprocess import SmootherConfig, default_smoother_config
from .segmentation import PhasePartition, identify_knee
from .spectral import WelchConfig, phase_psd, welch_psd

SCHEMA_VERSION = 1

DEFAULT_NOMINAL_AH = 5.0


@dataclass(frozen=True)
class AnalysisConfig:
    """Flat bag of pipeline parameters; None means derive from the data."""

    smoother_window_length: int | None = None
    smoother_poly_order: int = 3
    segmentation_m: int | None = None
    segmentation_exclusion_factor: float = 0.5
    welch_segment_len: int | None = None
    welch_overlap: float = 0.5
    welch_window: str = "hann"
    welch_detrend: bool = True
    ica_dv: float = 0.005
    ica_v_min: float | None = None
    ica_v_max: float | None = None
    input: str | None = None
    manifest: str | None = None
    output: str | None = None
    svg: str | None = None


def config_from_dict(data):
    """Build an AnalysisConfig from a flat dict, rejecting unknown keys."""
    known = {f.name for f in fields(AnalysisConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    return AnalysisConfig(**data)


def config_to_dict(cfg):
    return asdict(cfg)


def load_config(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return config_from_dict(data)


def _resolve_config(args):
    cfg = load_config(args.config) if args.config else AnalysisConfig()
    overrides = {}
    for flag, key in (
        ("smoother_window", "smoother_window_length"),
        ("smoother_poly", "smoother_poly_order"),
        ("m", "segmentation_m"),
        ("segment_len", "welch_segment_len"),
        ("overlap", "welch_overlap"),
        ("dv", "ica_dv"),
        ("v_min", "ica_v_min"),
        ("v_max", "ica_v_max"),
        ("input", "input"),
        ("manifest", "manifest"),
        ("output", "output"),
        ("svg", "svg"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    window = getattr(args, "window", None)
    if window is not None:
        overrides["welch_window"] = {"rect": "rectangular"}.get(window, window)
    if getattr(args, "no_detrend", False):
        overrides["welch_detrend"] = False
    if overrides:
        cfg = config_from_dict({**config_to_dict(cfg), **overrides})
    return cfg


def _load_series(args, cfg):
    path = cfg.input
    if path is None:
        raise ConfigurationError("no capacity CSV given (flag --input or config key)")
    cell_id = args.cell_id or Path(path).stem
    series = parse_capacity_csv(Path(path).read_bytes(), cell_id, args.nominal_ah)
    if not series.is_uniform:
        series = resample_uniform(series, args.grid_step)
    return series


def _smoother(cfg, n):
    if cfg.smoother_window_length is None:
        window = default_smoother_config(n).window_length
    else:
        window = cfg.smoother_window_length
    return SmootherConfig(
        window_length=window, poly_order=cfg.smoother_poly_order, max_deriv=2
    )


def _segmentation_params(cfg, n):
    m = cfg.segmentation_m
    if m is None:
        m = int(np.clip(round(n / 20), 10, 100))
    exclusion = max(1, int(np.ceil(cfg.segmentation_exclusion_factor * m)))
    return m, exclusion


def _run_knee(series, cfg):
    smoother = _smoother(cfg, len(series))
    curv = approximate_curvature(series, smoother)
    m, exclusion = _segmentation_params(cfg, len(curv))
    part = identify_knee(curv, m=m, exclusion=exclusion)
    return curv, part, smoother, m, exclusion


def _config_echo(cfg):
    # output/svg route the report; they are not analysis parameters and
    # would break byte-identity of reruns writing to different paths.
    echo = config_to_dict(cfg)
    del echo["output"]
    del echo["svg"]
    return echo


def _resolved_config_echo(cfg, smoother=None, m=None, exclusion=None):
    echo = _config_echo(cfg)
    if smoother is not None:
        echo["smoother_window_length"] = smoother.window_length
        echo["smoother_poly_order"] = smoother.poly_order
    if m is not None:
        echo["segmentation_m"] = m
        echo["segmentation_exclusion"] = exclusion
    return echo


def _knee_payload(series, curv, part, echo):
    n = len(curv)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "knee",
        "cell_id": series.cell_id,
        "software_version": __version__,
        "onset_index": part.onset_index,
        "knee_index": part.knee_index,
        "onset_cycle": part.onset_cycle,
        "knee_cycle": part.knee_cycle,
        "phases": [
            {
                "phase": 1,
                "start_cycle": float(curv.cycle[0]),
                "end_cycle": part.onset_cycle,
                "samples": part.onset_index,
            },
            {
                "phase": 2,
                "start_cycle": part.onset_cycle,
                "end_cycle": part.knee_cycle,
                "samples": part.knee_index - part.onset_index,
            },
            {
                "phase": 3,
                "start_cycle": part.knee_cycle,
                "end_cycle": float(curv.cycle[-1]),
                "samples": n - part.knee_index,
            },
        ],
        "config": echo,
    }


def _estimate_payload(est):
    return {
        "freq": est.freq,
        "density": est.density,
        "df": est.df,
        "dt": est.dt,
        "segment_len": int(round(1.0 / (est.df * est.dt))),
        "total_power": est.total_power,
    }


def _welch_config(cfg, segments, target_len):
    seg_len = cfg.welch_segment_len
    if segments is not None:
        seg_len = max(4, target_len // segments)
    return WelchConfig(
        segment_len=seg_len,
        overlap=cfg.welch_overlap,
        window=cfg.welch_window,
        detrend=cfg.welch_detrend,
    )


def _psd_payload(cell_id, curv, part, cfg, whole, segments, echo):
    warnings = []
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "psd",
        "cell_id": cell_id,
        "software_version": __version__,
        "whole": None,
        "phases": None,
        "knee": None,
        "warnings": warnings,
        "config": echo,
    }
    if whole:
        n = len(curv.kappa)
        wcfg = _welch_config(cfg, segments, n)
        seg = wcfg.segment_len if wcfg.segment_len is not None else max(8, (2 * n) // 9)
        est = welch_psd(
            curv.kappa,
            min(seg, n),
            wcfg.overlap,
            kind=wcfg.window,
            dt=curv.dt,
            detrend=wcfg.detrend,
        )
        payload["whole"] = _estimate_payload(est)
        return payload, [est]
    payload["knee"] = {
        "onset_index": part.onset_index,
        "knee_index": part.knee_index,
        "onset_cycle": part.onset_cycle,
        "knee_cycle": part.knee_cycle,
    }
    if segments is None:
        wcfg = _welch_config(cfg, None, 0)
        estimates = list(phase_psd(curv, part, wcfg, skip_degenerate=True))
    else:
        # --segments asks for a per-phase split count, so the segment
        # length must be derived from each phase's own length.
        estimates = []
        for sl in part.slices(len(curv.kappa)):
            chunk = curv.kappa[sl]
            if len(chunk) < 8:
                estimates.append(None)
                continue
            wcfg = _welch_config(cfg, segments, len(chunk))
            estimates.append(
                welch_psd(
                    chunk,
                    min(wcfg.segment_len, len(chunk)),
                    wcfg.overlap,
                    kind=wcfg.window,
                    dt=curv.dt,
                    detrend=wcfg.detrend,
                )
            )
    phase_blocks = []
    for phase_no, est in enumerate(estimates, start=1):
        if est is None:
            warnings.append(f"phase {phase_no} shorter than 8 samples; omitted")
            continue
        block = {"phase": phase_no}
        block.update(_estimate_payload(est))
        phase_blocks.append(block)
    payload["phases"] = phase_blocks
    return payload, estimates


def _load_manifest(cfg):
    if cfg.manifest is None:
        raise ConfigurationError("no RPT manifest given (flag --manifest or config key)")
    mpath = Path(cfg.manifest)
    try:
        data = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"manifest {mpath} is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or not isinstance(data.get("rpts"), list):
        raise ConfigurationError(f"manifest {mpath} must hold an object with an 'rpts' list")
    entries = data["rpts"]
    if not entries:
        raise ConfigurationError(f"manifest {mpath} lists no RPTs")
    rpts = []
    for i, ent in enumerate(entries):
        missing = {"path", "rpt_index", "cycle_at_rpt", "direction"} - set(ent)
        if missing:
            raise ConfigurationError(
                f"manifest entry {i} is missing keys: {', '.join(sorted(missing))}"
            )
        csv_path = mpath.parent / ent["path"]
        if not csv_path.is_file():
            raise ConfigurationError(f"manifest entry '{ent['path']}' not found")
        rpts.append(
            parse_rpt_csv(
                csv_path.read_bytes(),
                ent["rpt_index"],
                ent["cycle_at_rpt"],
                ent["direction"],
            )
        )
    cell_id = data.get("cell_id")
    return cell_id, rpts


def _ica_payload(cell_id, rpts, cfg, echo):
    curves = [incremental_capacity(r, dv=cfg.ica_dv) for r in rpts]
    track = peak_trajectory(rpts, dv=cfg.ica_dv, v_min=cfg.ica_v_min, v_max=cfg.ica_v_max)
    by_index = {r.rpt_index: r.direction for r in rpts}
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ica",
        "cell_id": cell_id,
        "software_version": __version__,
        "curves": [
            {
                "rpt_index": c.rpt_index,
                "cycle_at_rpt": c.cycle_at_rpt,
                "direction": by_index[c.rpt_index],
                "voltage_v": c.voltage_v,
                "dq_dv": c.dq_dv,
            }
            for c in sorted(curves, key=lambda c: c.rpt_index)
        ],
        "peak_track": [
            {
                "rpt_index": rec.rpt_index,
                "cycle_at_rpt": rec.cycle_at_rpt,
                "v_peak": rec.v_peak,
                "amplitude": rec.amplitude,
                "is_interior": rec.is_interior,
            }
            for rec in track.records
        ],
        "config": echo,
    }, curves, track


def _emit(payload, cfg):
    text = dumps(payload)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_knee_report(path):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return PhasePartition(
            onset_index=int(data["onset_index"]),
            knee_index=int(data["knee_index"]),
            onset_cycle=float(data["onset_cycle"]),
            knee_cycle=float(data["knee_cycle"]),
            cac=np.empty(0),
        )
    except KeyError as exc:
        raise ConfigurationError(f"knee report {path} is missing field {exc}") from None


def cmd_knee(args):
    cfg = _resolve_config(args)
    series = _load_series(args, cfg)
    curv, part, smoother, m, exclusion = _run_knee(series, cfg)
    echo = _resolved_config_echo(cfg, smoother, m, exclusion)
    payload = _knee_payload(series, curv, part, echo)
    _emit(payload, cfg)
    if cfg.svg:
        from . import _plots

        _plots.save_knee_svg(cfg.svg, series, curv, part, smoother)
    return 0


def cmd_psd(args):
    cfg = _resolve_config(args)
    series = _load_series(args, cfg)
    smoother = _smoother(cfg, len(series))
    curv = approximate_curvature(series, smoother)
    part = None
    m = exclusion = None
    if not args.whole:
        if args.knee_report:
            part = _load_knee_report(args.knee_report)
        else:
            curv, part, smoother, m, exclusion = _run_knee(series, cfg)
    echo = _resolved_config_echo(cfg, smoother, m, exclusion)
    payload, estimates = _psd_payload(
        series.cell_id, curv, part, cfg, args.whole, args.segments, echo
    )
    _emit(payload, cfg)
    if cfg.svg:
        from . import _plots

        if args.whole:
            labeled = [("whole series", estimates[0], "tab:blue")]
        else:
            labeled = [
                (f"phase {i + 1}", est, color)
                for i, (est, color) in enumerate(
                    zip(estimates, ("tab:blue", "tab:orange", "tab:green"))
                )
                if est is not None
            ]
        _plots.save_psd_svg(cfg.svg, series.cell_id, labeled)
    return 0


def cmd_ica(args):
    cfg = _resolve_config(args)
    manifest_cell, rpts = _load_manifest(cfg)
    cell_id = args.cell_id or manifest_cell or Path(cfg.manifest).stem
    echo = _config_echo(cfg)
    payload, curves, track = _ica_payload(cell_id, rpts, cfg, echo)
    _emit(payload, cfg)
    if cfg.svg:
        from . import _plots

        _plots.save_ica_svg(cfg.svg, cell_id, curves, track)
    return 0


def cmd_report(args):
    cfg = _resolve_config(args)
    series = _load_series(args, cfg)
    warnings = []
    knee_block = psd_block = ica_block = None
    try:
        curv, part, smoother, m, exclusion = _run_knee(series, cfg)
        echo = _resolved_config_echo(cfg, smoother, m, exclusion)
        knee_block = _knee_payload(series, curv, part, echo)
        psd_block, _ = _psd_payload(series.cell_id, curv, part, cfg, False, None, echo)
    except KneecapError as exc:
        warnings.append(f"knee/psd skipped: {exc}")
    if cfg.manifest is not None:
        try:
            manifest_cell, rpts = _load_manifest(cfg)
            ica_echo = _config_echo(cfg)
            ica_block, _, _ = _ica_payload(
                args.cell_id or manifest_cell or series.cell_id, rpts, cfg, ica_echo
            )
        except KneecapError as exc:
            warnings.append(f"ica skipped: {exc}")
    else:
        warnings.append("no RPT manifest provided; ica section omitted")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "report",
        "cell_id": series.cell_id,
        "software_version": __version__,
        "knee": knee_block,
        "psd": psd_block,
        "ica": ica_block,
        "warnings": warnings,
        "config": _config_echo(cfg),
    }
    _emit(payload, cfg)
    return 0


def _add_common(parser):
    parser.add_argument("--input", help="capacity CSV (header cycle,capacity_ah)")
    parser.add_argument("--nominal-ah", type=float, default=DEFAULT_NOMINAL_AH,
                        help="nameplate capacity in Ah (default %(default)s)")
    parser.add_argument("--cell-id", help="cell label (default: input file stem)")
    parser.add_argument("--grid-step", type=float, default=1.0,
                        help="cycle grid step for resampling non-uniform input")
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument("--output", help="write JSON here instead of stdout")
    parser.add_argument("--svg", help="write an SVG figure here")
    parser.add_argument("--smoother-window", type=int, dest="smoother_window",
                        help="odd smoothing window length (default: ~10%% of series)")
    parser.add_argument("--smoother-poly", type=int, dest="smoother_poly",
                        help="smoother polynomial order (default 3)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kneecap",
        description="Knee and knee-onset detection on battery capacity fade "
        "curves, with phase-wise spectral analysis and IC peak tracking.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_knee = sub.add_parser("knee", help="detect knee and knee-onset")
    _add_common(p_knee)
    p_knee.add_argument("--m", type=int, help="subsequence length (default: len/20)")
    p_knee.set_defaults(func=cmd_knee)

    p_psd = sub.add_parser("psd", help="curvature PSD, per phase or whole series")
    _add_common(p_psd)
    p_psd.add_argument("--m", type=int, help="subsequence length (default: len/20)")
    p_psd.add_argument("--whole", action="store_true",
                       help="PSD of the whole curvature series, no segmentation")
    p_psd.add_argument("--knee-report", dest="knee_report",
                       help="reuse boundaries from an existing knee JSON report")
    p_psd.add_argument("--segments", type=int,
                       help="split each analyzed stretch into this many segments")
    p_psd.add_argument("--segment-len", type=int, dest="segment_len",
                       help="Welch segment length (default: ~2/9 of the stretch)")
    p_psd.add_argument("--overlap", type=float, help="segment overlap fraction (default 0.5)")
    p_psd.add_argument("--window", choices=["hann", "rect", "rectangular"],
                       help="window kind (default hann)")
    p_psd.add_argument("--no-detrend", action="store_true", dest="no_detrend",
                       help="skip per-segment mean removal")
    p_psd.set_defaults(func=cmd_psd)

    p_ica = sub.add_parser("ica", help="incremental-capacity curves and peak track")
    _add_common(p_ica)
    p_ica.add_argument("--manifest", help="JSON manifest listing RPT CSVs")
    p_ica.add_argument("--dv", type=float, help="voltage grid step in V (default 0.005)")
    p_ica.add_argument("--v-min", type=float, dest="v_min", help="peak search lower bound (V)")
    p_ica.add_argument("--v-max", type=float, dest="v_max", help="peak search upper bound (V)")
    p_ica.set_defaults(func=cmd_ica)

    p_rep = sub.add_parser("report", help="bundled knee + psd + ica report")
    _add_common(p_rep)
    p_rep.add_argument("--m", type=int, help="subsequence length (default: len/20)")
    p_rep.add_argument("--manifest", help="JSON manifest listing RPT CSVs")
    p_rep.add_argument("--dv", type=float, help="voltage grid step in V (default 0.005)")
    p_rep.add_argument("--v-min", type=float, dest="v_min")
    p_rep.add_argument("--v-max", type=float, dest="v_max")
    p_rep.set_defaults(func=cmd_report)
    return parser


def _error_json(exc):
    return dumps({"error": type(exc).__name__, "message": str(exc)})


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KneecapError as exc:
        sys.stderr.write(_error_json(exc))
        return 2
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        sys.stderr.write(_error_json(exc))
        return 2
    except Exception as exc:  # pragma: no cover - internal failure path
        sys.stderr.write(_error_json(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
