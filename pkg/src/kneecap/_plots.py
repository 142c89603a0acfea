"""Static SVG figures for the CLI. Presentation only; no numbers of
record are computed here."""

import matplotlib

matplotlib.use("Agg")
# keep rerun SVGs stable: fixed glyph-id salt, no embedded creation date
matplotlib.rcParams["svg.hashsalt"] = "kneecap"

import matplotlib.pyplot as plt  # noqa: E402

from .preprocess import normalize, savgol_filter  # noqa: E402

PHASE_COLORS = ("tab:blue", "tab:orange", "tab:green")


def save_knee_svg(path, series, curv, part, smoother_cfg):
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    smoothed = savgol_filter(normalize(series), smoother_cfg, deriv=0, dt=curv.dt)
    axes[0].plot(series.cycle, normalize(series), ".", ms=2, alpha=0.4, label="measured")
    axes[0].plot(series.cycle, smoothed, lw=1.2, label="smoothed")
    axes[0].set_ylabel("normalized capacity")
    axes[0].legend(loc="lower left", fontsize=8)
    axes[1].plot(curv.cycle, curv.kappa, lw=0.8)
    axes[1].set_ylabel("curvature (cycle$^{-2}$)")
    axes[2].plot(curv.cycle[: len(part.cac)], part.cac, lw=1.0)
    axes[2].set_ylabel("corrected arc curve")
    axes[2].set_xlabel("cycle")
    axes[2].set_ylim(-0.05, 1.05)
    for ax in axes:
        ax.axvline(part.onset_cycle, color="tab:red", ls="--", lw=0.8)
        ax.axvline(part.knee_cycle, color="tab:red", lw=0.8)
    axes[0].set_title(
        f"{series.cell_id}: knee-onset {part.onset_cycle:g}, knee {part.knee_cycle:g}"
    )
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def save_psd_svg(path, cell_id, labeled_estimates):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for label, est, color in labeled_estimates:
        if est is None:
            continue
        # skip DC for the log axis
        ax.loglog(est.freq[1:], est.density[1:], lw=1.0, label=label, color=color)
    ax.set_xlabel("frequency (cycle$^{-1}$)")
    ax.set_ylabel("PSD")
    ax.set_title(f"{cell_id}: curvature power spectral density")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def save_ica_svg(path, cell_id, curves, track):
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
    cmap = plt.get_cmap("viridis")
    hi = max(c.rpt_index for c in curves) or 1
    for curve in curves:
        axes[0].plot(
            curve.voltage_v,
            curve.dq_dv,
            lw=0.9,
            color=cmap(curve.rpt_index / hi),
            label=f"RPT {curve.rpt_index}",
        )
    for rec in track.records:
        axes[0].plot(rec.v_peak, rec.amplitude, "rs", ms=4)
    axes[0].set_xlabel("voltage (V)")
    axes[0].set_ylabel("dQ/dV (Ah/V)")
    axes[0].set_title(f"{cell_id}: IC curves with largest peaks")
    if len(curves) <= 10:
        axes[0].legend(fontsize=7)
    cycles = [rec.cycle_at_rpt for rec in track.records]
    axes[1].plot(cycles, track.amplitudes, "o-", ms=4)
    axes[1].set_xlabel("cycle")
    axes[1].set_ylabel("largest-peak amplitude (Ah/V)")
    axes[1].set_title("peak amplitude across aging")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
