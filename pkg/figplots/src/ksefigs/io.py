"""Readers for the simulator's on-disk outputs.

Everything here is derived from the documented file formats only:

* snapshots: one ASCII header line
  ``KSEFIELD v1 n=<n> time=<t> lambda=<l> name=<s>`` followed by n*n
  little-endian float64 values in row-major order;
* ``diagnostics.csv`` / ``drift.csv`` / ``galerkin.csv``: plain CSV with a
  header row;
* ``spectra/spectrum_<step>.csv``: columns t, shell, amplitude.
"""

import glob
import os
import re

import numpy as np
import pandas as pd

SNAPSHOT_MAGIC = "KSEFIELD"
SNAPSHOT_VERSION = "v1"

#: the p-labels diagnostics columns use, in increasing-p order
LP_LABELS = ("L1", "L1.5", "L2", "L3", "L4", "L5", "L6", "Linf")


class MissingInput(RuntimeError):
    """An expected run artifact is absent or malformed."""


def read_snapshot(path):
    """Read one field snapshot; returns ``(values, meta)``.

    ``values`` is an ``(n, n)`` float array sampled on the uniform grid of
    [-pi, pi)^2, ``meta`` has keys n, time, lambda, name.
    """
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise MissingInput(f"cannot open snapshot {path}: {exc}") from exc
    with fh:
        header = fh.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if len(parts) != 6 or parts[0] != SNAPSHOT_MAGIC or parts[1] != SNAPSHOT_VERSION:
            raise MissingInput(f"{path}: not a {SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} snapshot")
        kv = dict(tok.split("=", 1) for tok in parts[2:])
        try:
            meta = {"n": int(kv["n"]), "time": float(kv["time"]),
                    "lambda": float(kv["lambda"]), "name": kv["name"]}
        except (KeyError, ValueError) as exc:
            raise MissingInput(f"{path}: corrupt snapshot header {header!r}") from exc
        n = meta["n"]
        raw = fh.read(n * n * 8)
        if len(raw) != n * n * 8:
            raise MissingInput(f"{path}: truncated payload")
    return np.frombuffer(raw, dtype="<f8").reshape(n, n).copy(), meta


def _read_csv(path, required=()):
    if not os.path.exists(path):
        raise MissingInput(f"missing {path}")
    frame = pd.read_csv(path)
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise MissingInput(f"{path}: missing columns {', '.join(missing)}")
    if frame.empty:
        raise MissingInput(f"{path}: no data rows")
    return frame


def read_diagnostics(run_dir):
    return _read_csv(os.path.join(run_dir, "diagnostics.csv"),
                     required=("t", "energy", "enstrophy", "palenstrophy"))


def read_drift(run_dir):
    return _read_csv(os.path.join(run_dir, "drift.csv"),
                     required=("t", "norm_Pu_L2"))


def lp_field_names(frame):
    """Field names carrying the full 8-label norm family, in header order."""
    names = []
    for col in frame.columns:
        m = re.fullmatch(r"(.+)_Linf", col)
        if not m:
            continue
        field = m.group(1)
        if all(f"{field}_{lab}" in frame.columns for lab in LP_LABELS):
            names.append(field)
    return names


def spectrum_paths(run_dir):
    """Spectrum CSVs sorted by step number."""
    paths = glob.glob(os.path.join(run_dir, "spectra", "spectrum_*.csv"))

    def step_of(p):
        m = re.search(r"spectrum_(\d+)\.csv$", p)
        return int(m.group(1)) if m else -1

    paths = sorted((p for p in paths if step_of(p) >= 0), key=step_of)
    if not paths:
        raise MissingInput(f"no spectra/spectrum_*.csv under {run_dir}")
    return paths


def read_spectrum(path):
    frame = _read_csv(path, required=("t", "shell", "amplitude"))
    return frame["shell"].to_numpy(float), frame["amplitude"].to_numpy(float)


def final_checkpoint(run_dir, name="phi"):
    """Path of the highest-step ``checkpoint_*_<name>.ksef`` snapshot."""
    pattern = os.path.join(run_dir, f"checkpoint_*_{name}.ksef")
    best, best_step = None, -1
    for path in glob.glob(pattern):
        m = re.search(r"checkpoint_(\d+)_", os.path.basename(path))
        if m and int(m.group(1)) > best_step:
            best, best_step = path, int(m.group(1))
    if best is None:
        raise MissingInput(f"no checkpoint_*_{name}.ksef under {run_dir}")
    return best
