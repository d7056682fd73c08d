"""The seven standard figures rendered from a finished run directory.

Every renderer reads only the run's output files (CSV tables and snapshot
files); none of them touches the simulator package. A renderer raises
:class:`~ksefigs.io.MissingInput` when its inputs are absent, and
:func:`render_figures` turns that into a per-figure "skipped" result so the
remaining figures still come out.
"""

import collections
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    LP_LABELS,
    MissingInput,
    final_checkpoint,
    lp_field_names,
    read_diagnostics,
    read_drift,
    read_snapshot,
    read_spectrum,
    spectrum_paths,
)

FIGURE_IDS = (
    "drift",
    "spectrum",
    "lp_phi",
    "lp_derivs",
    "planes",
    "energy_terms",
    "snapshots",
)

FigureResult = collections.namedtuple("FigureResult", "figure_id path message")

#: fixed style so re-rendering the same run gives byte-identical files
_RC = {
    "figure.dpi": 100,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "legend.fontsize": 8,
    "figure.max_open_warning": 0,
}

_LP_LEGEND = {"L1": "p=1", "L1.5": "p=1.5", "L2": "p=2", "L3": "p=3",
              "L4": "p=4", "L5": "p=5", "L6": "p=6", "Linf": "p=inf"}


def _save(fig, out_dir, figure_id):
    path = os.path.join(out_dir, f"{figure_id}.png")
    # fixed metadata: the default embeds the library version string
    fig.savefig(path, metadata={"Software": "ksefigs"})
    plt.close(fig)
    return path


def _positive(values):
    """Copy with nonpositive entries masked out, for log-scale axes."""
    arr = np.asarray(values, dtype=float).copy()
    arr[~(arr > 0.0)] = np.nan
    return arr


def render_drift(run_dir, out_dir):
    """Log-linear traces of the three drift norms against time."""
    frame = read_drift(run_dir)
    t = frame["t"].to_numpy(float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for col, label in (("norm_Pu_L2", r"$\|Pu\|_{L^2}$"),
                       (r"norm_grad_v_L2", r"$\|\nabla v\|_{L^2}$"),
                       ("norm_lap_v_L2", r"$\|\Delta v\|_{L^2}$")):
        if col in frame.columns:
            ax.semilogy(t, _positive(frame[col].to_numpy(float)), label=label)
    if not ax.lines:
        plt.close(fig)
        raise MissingInput("drift.csv carries none of the drift norm columns")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title("divergence-free drift of a gradient state")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_dir, "drift")


def late_time_average(paths):
    """Mean spectrum over the last tenth of the sample files (at least one).

    Returns ``(shells, averaged)``.
    """
    tail = paths[-max(1, len(paths) // 10):]
    shells = None
    stack = []
    for path in tail:
        tail_shells, amp = read_spectrum(path)
        if shells is None:
            shells = tail_shells
        elif tail_shells.shape != shells.shape:
            raise MissingInput("spectrum files disagree on the shell axis")
        stack.append(amp)
    return shells, np.mean(stack, axis=0)


def render_spectrum(run_dir, out_dir):
    """Log-log shell spectrum: initial, final, and late-time average."""
    paths = spectrum_paths(run_dir)
    shells, first = read_spectrum(paths[0])
    _, last = read_spectrum(paths[-1])
    avg_shells, averaged = late_time_average(paths)
    if avg_shells.shape != shells.shape:
        raise MissingInput("spectrum files disagree on the shell axis")

    keep = shells >= 1.0  # shell zero cannot sit on a log axis
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(shells[keep], _positive(first[keep]), linestyle="none",
              marker="+", color="c", label="initial")
    ax.loglog(shells[keep], _positive(last[keep]), linestyle="none",
              marker="*", color="r", label="final")
    ax.loglog(shells[keep], _positive(averaged[keep]), linestyle="none",
              marker="o", markerfacecolor="none", color="g",
              label="time-averaged")
    ax.set_xlabel("shell radius |k|")
    ax.set_ylabel("shell amplitude")
    ax.set_title("energy spectrum")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_dir, "spectrum")


def _render_lp(run_dir, out_dir, figure_id, take):
    frame = read_diagnostics(run_dir)
    fields = take(lp_field_names(frame))
    if not fields:
        raise MissingInput("diagnostics.csv carries no full norm families")
    t = frame["t"].to_numpy(float)
    ncols = min(len(fields), 3 if len(fields) <= 3 else 2)
    nrows = -(-len(fields) // ncols)
    fig, axes = plt.subplots(nrows, ncols,
                             figsize=(3.4 * ncols, 2.9 * nrows),
                             squeeze=False)
    flat = axes.ravel()
    for ax, field in zip(flat, fields):
        for lab in LP_LABELS:
            ax.semilogy(t, _positive(frame[f"{field}_{lab}"].to_numpy(float)),
                        label=_LP_LEGEND[lab])
        ax.set_title(field)
        ax.set_xlabel("t")
    for ax in flat[len(fields):]:
        ax.set_visible(False)
    flat[0].legend(ncol=2)
    fig.tight_layout()
    return _save(fig, out_dir, figure_id)


def render_lp_phi(run_dir, out_dir):
    """Norm histories of the field itself and its first derivatives."""
    return _render_lp(run_dir, out_dir, "lp_phi", lambda names: names[:3])


def render_lp_derivs(run_dir, out_dir):
    """Norm histories of the second-derivative diagnostics."""
    return _render_lp(run_dir, out_dir, "lp_derivs", lambda names: names[3:])


def render_planes(run_dir, out_dir):
    """Pairwise trajectories of energy, enstrophy, and palinstrophy."""
    frame = read_diagnostics(run_dir)
    cols = ("energy", "enstrophy", "palenstrophy")
    values = {c: _positive(frame[c].to_numpy(float)) for c in cols}
    pairs = ((cols[0], cols[1]), (cols[0], cols[2]), (cols[1], cols[2]))
    fig, axes = plt.subplots(1, 3, figsize=(10.2, 3.4))
    for ax, (cx, cy) in zip(axes, pairs):
        ax.loglog(values[cx], values[cy])
        ax.set_xlabel(cx)
        ax.set_ylabel(cy)
    fig.suptitle("quadratic-functional trajectories")
    fig.tight_layout()
    return _save(fig, out_dir, "planes")


def render_energy_terms(run_dir, out_dir):
    """Histories of the four inner-product functionals."""
    frame = read_diagnostics(run_dir)
    cols = ("ip_phi_gradsq_half", "ip_phi_gradsq_plus_lapsq",
            "ip_advection", "ip_advection2_plus_lapsq")
    t = frame["t"].to_numpy(float)
    available = 0
    fig, axes = plt.subplots(2, 2, figsize=(7.2, 5.4))
    for ax, col in zip(axes.ravel(), cols):
        ax.set_title(col)
        data = (frame[col].to_numpy(float) if col in frame.columns
                else np.full(t.shape, np.nan))
        if np.all(np.isnan(data)):
            ax.text(0.5, 0.5, "unavailable", ha="center", va="center",
                    transform=ax.transAxes)
            ax.grid(False)
            continue
        ax.plot(t, data)
        ax.set_xlabel("t")
        available += 1
    if not available:
        plt.close(fig)
        raise MissingInput("diagnostics.csv carries no inner-product columns")
    fig.tight_layout()
    return _save(fig, out_dir, "energy_terms")


def _spectral_derivative(values, order1, order2):
    """Mixed derivative of a periodic sample grid via the FFT.

    The unmatched highest frequency line is dropped for odd orders so the
    result stays real.
    """
    n = values.shape[0]
    k = np.fft.fftfreq(n, 1.0 / n)
    k1 = np.copy(k)
    k2 = np.copy(k)
    if n % 2 == 0:
        if order1 % 2:
            k1[n // 2] = 0.0
        if order2 % 2:
            k2[n // 2] = 0.0
    mult = (1j * k1[:, None]) ** order1 * (1j * k2[None, :]) ** order2
    return np.real(np.fft.ifft2(np.fft.fft2(values) * mult))


def render_snapshots(run_dir, out_dir):
    """Heatmaps of the final saved field and its derived quantities."""
    path = final_checkpoint(run_dir, "phi")
    phi, meta = read_snapshot(path)
    d1 = _spectral_derivative(phi, 1, 0)
    d2 = _spectral_derivative(phi, 0, 1)
    lap = _spectral_derivative(phi, 2, 0) + _spectral_derivative(phi, 0, 2)
    gradsq = d1 * d1 + d2 * d2
    panels = (
        ("phi", phi),
        ("d1 phi", d1),
        ("d2 phi", d2),
        ("lap phi", lap),
        ("phi |grad phi|^2", phi * gradsq),
        ("lap phi |grad phi|^2", lap * gradsq),
    )
    fig, axes = plt.subplots(2, 3, figsize=(10.8, 6.6))
    for ax, (title, field) in zip(axes.ravel(), panels):
        vmax = float(np.max(np.abs(field)))
        vmax = vmax if vmax > 0.0 else 1.0
        # transpose so the first coordinate runs along the horizontal axis
        im = ax.imshow(field.T, origin="lower", cmap="RdBu_r",
                       vmin=-vmax, vmax=vmax,
                       extent=(-np.pi, np.pi, -np.pi, np.pi))
        ax.set_title(title)
        ax.grid(False)
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.suptitle(f"final state at t={meta['time']:.6g} (n={meta['n']})")
    fig.tight_layout()
    return _save(fig, out_dir, "snapshots")


_RENDERERS = {
    "drift": render_drift,
    "spectrum": render_spectrum,
    "lp_phi": render_lp_phi,
    "lp_derivs": render_lp_derivs,
    "planes": render_planes,
    "energy_terms": render_energy_terms,
    "snapshots": render_snapshots,
}


def render_figures(run_dir, out_dir, figure_ids=None):
    """Render every requested figure whose inputs exist.

    Returns one :class:`FigureResult` per figure, in the canonical order.
    ``path`` is ``None`` for skipped figures and ``message`` says why.
    """
    if figure_ids is None:
        figure_ids = FIGURE_IDS
    unknown = [fid for fid in figure_ids if fid not in _RENDERERS]
    if unknown:
        raise ValueError(f"unknown figure ids: {', '.join(unknown)}")
    os.makedirs(out_dir, exist_ok=True)
    results = []
    with matplotlib.rc_context(_RC):
        for fid in FIGURE_IDS:
            if fid not in figure_ids:
                continue
            try:
                path = _RENDERERS[fid](run_dir, out_dir)
            except MissingInput as exc:
                results.append(FigureResult(fid, None, str(exc)))
            else:
                results.append(FigureResult(fid, path, ""))
    return results
