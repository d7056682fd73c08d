"""Builders that synthesize run directories in the documented file formats.

Nothing here imports the simulator; the files are written from scratch so
the reader/renderer tests exercise the format contract alone.
"""

import csv
import os

import numpy as np

SCALAR_FIELDS = ("phi", "d1phi", "d2phi", "d11phi", "d12phi", "d22phi",
                 "lap_phi")
VECTOR_FIELDS = ("u1", "u2", "d1u1", "d2u1", "d1u2", "d2u2", "div_u")
LP_LABELS = ("L1", "L1.5", "L2", "L3", "L4", "L5", "L6", "Linf")
IP_COLUMNS = ("ip_phi_gradsq_half", "ip_phi_gradsq_plus_lapsq",
              "ip_advection", "ip_advection2_plus_lapsq")


def write_snapshot(path, values, time=0.0, lam=8.1, name="phi"):
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    header = f"KSEFIELD v1 n={n} time={float(time)!r} lambda={float(lam)!r} name={name}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def sample_field(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.linspace(-np.pi, np.pi, n, endpoint=False)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    field = np.sin(x1) * np.cos(2.0 * x2) + 0.25 * np.cos(3.0 * x1 + x2)
    return field + 0.01 * rng.standard_normal((n, n))


def write_diagnostics(run_dir, fields, samples=20, scalar=True):
    t = np.linspace(0.0, 1.0, samples)
    header = ["t"]
    for field in fields:
        header.extend(f"{field}_{lab}" for lab in LP_LABELS)
    header.extend(["energy", "enstrophy", "palenstrophy"])
    header.extend(IP_COLUMNS)
    header.extend(["resolution_margin", "spectrum_max"])
    header.extend(["crit_U_p2_r2", "crit_GRADU_pinf_r1"])
    rows = []
    for i, ti in enumerate(t):
        row = [repr(float(ti))]
        for fi, field in enumerate(fields):
            for li in range(len(LP_LABELS)):
                row.append(repr(float((1.0 + 0.1 * fi + 0.03 * li)
                                      * np.exp(0.3 * ti))))
        row.extend(repr(float(v * np.exp(0.5 * ti)))
                   for v in (2.0, 5.0, 11.0))
        for ci in range(len(IP_COLUMNS)):
            if scalar or ci >= 2:
                row.append(repr(float(np.sin(ti + ci) * (1.0 + ci))))
            else:
                row.append("nan")
        row.append(repr(1e-17))
        row.append(repr(1.0))
        row.append(repr(float(0.5 * (i + 1))))
        row.append(repr(float(0.25 * (i + 1))))
        rows.append(row)
    with open(os.path.join(run_dir, "diagnostics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return t


def write_spectra(run_dir, steps, n=16, amplitude_of=None):
    os.makedirs(os.path.join(run_dir, "spectra"), exist_ok=True)
    shells = np.arange(int(n / np.sqrt(2.0)) + 1)
    if amplitude_of is None:
        def amplitude_of(step, shell):
            return np.exp(-0.5 * shell) * (1.0 + step / 100.0)
    for step in steps:
        path = os.path.join(run_dir, "spectra", f"spectrum_{step:09d}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "shell", "amplitude"])
            for shell in shells:
                writer.writerow([repr(step * 1e-3), shell,
                                 repr(float(amplitude_of(step, shell)))])
    return shells


def write_drift(run_dir, samples=30):
    t = np.linspace(0.0, 3.0, samples)
    with open(os.path.join(run_dir, "drift.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "norm_Pu_L2", "norm_grad_v_L2",
                         "norm_lap_v_L2", "coupling_term"])
        for i, ti in enumerate(t):
            pu = 0.0 if i == 0 else 1e-14 * np.exp(4.0 * ti)
            writer.writerow([repr(float(ti)), repr(float(pu)),
                             repr(float(3.0 * np.exp(0.2 * ti))),
                             repr(float(9.0 * np.exp(0.25 * ti))),
                             repr(float(0.1 * np.sin(ti)))])
    return t


def build_scalar_run(run_dir, n=16, samples=20, seed=0):
    """A complete scalar-style run directory: every figure's inputs exist."""
    os.makedirs(run_dir, exist_ok=True)
    write_diagnostics(run_dir, SCALAR_FIELDS, samples=samples, scalar=True)
    write_spectra(run_dir, steps=range(0, 100, 5), n=n)
    write_drift(run_dir)
    for step, time in ((0, 0.0), (95, 0.095)):
        write_snapshot(os.path.join(run_dir, f"checkpoint_{step:09d}_phi.ksef"),
                       sample_field(n, seed=seed + step), time=time)
    return run_dir


def build_vector_run(run_dir, n=16, samples=20, seed=1):
    """Vector-style run: u1/u2 checkpoints, nan scalar inner products."""
    os.makedirs(run_dir, exist_ok=True)
    write_diagnostics(run_dir, VECTOR_FIELDS, samples=samples, scalar=False)
    write_spectra(run_dir, steps=range(0, 40, 4), n=n)
    for name in ("u1", "u2"):
        write_snapshot(os.path.join(run_dir, f"checkpoint_{36:09d}_{name}.ksef"),
                       sample_field(n, seed=seed), time=0.036, name=name)
    return run_dir


def build_drift_only_run(run_dir):
    """Directory holding nothing but drift.csv."""
    os.makedirs(run_dir, exist_ok=True)
    write_drift(run_dir)
    return run_dir
