"""Run configurations, experiment drivers, and the self-check battery.

Config files are flat ``key=value`` text (``#`` comments allowed); keys match
the :class:`RunConfig` field names, with ``lambda`` spelled out on disk.  The
environment variable ``KSE_OUTPUT_DIR`` overrides ``output_dir``.
"""

import math
import os
from dataclasses import dataclass, field, fields as dc_fields
from typing import Optional

import numpy as np
from scipy import fft as _fft

from . import etdrk4
from .criteria import criterion_check
from .diagnostics import DiagnosticsWriter, DriftWriter, SpectrumWriter, sobolev_norm
from .fields import Grid, SpectralField, VectorField, save_field
from .helmholtz import fit_drift_rate, leray_project
from .models import (ConfigError, ModelConfig, _cached_coefficients, initial_data,
                     make_scalar_rhs, make_vector_rhs, simulate,
                     unstable_mode_count, with_updates)

EXPERIMENTS = ("plain", "drift", "scaling", "galerkin", "figures")

FIGURE_DEFAULTS = {"model": "scalar", "lam": 8.1, "n": 128, "h": 2e-4,
                   "t_final": 3.0, "save_every": 10, "init": "KKP"}


@dataclass
class RunConfig(ModelConfig):
    output_dir: str = "kse_out"
    experiment: str = "plain"
    csv_stride: Optional[int] = None
    checkpoint_stride: Optional[int] = None
    beta: int = 2
    provided: frozenset = field(default_factory=frozenset)

    def validate(self):
        super().validate()
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.csv_stride is not None and self.csv_stride < 1:
            raise ConfigError(f"csv_stride must be >= 1, got {self.csv_stride}")
        if self.checkpoint_stride is not None and self.checkpoint_stride < 1:
            raise ConfigError(f"checkpoint_stride must be >= 1, got {self.checkpoint_stride}")
        if self.experiment == "drift" and self.model != "vector":
            raise ConfigError("experiment=drift requires model=vector")
        if self.experiment == "scaling":
            if self.lam != 0.0:
                raise ConfigError("experiment=scaling requires lambda=0")
            if self.beta < 1:
                raise ConfigError(f"beta must be a positive integer, got {self.beta}")
        return self


_KEY_ALIASES = {"lambda": "lam"}
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _convert(name, text, target_type):
    text = text.strip()
    if name in ("galerkin_n", "csv_stride", "checkpoint_stride") and text.lower() in ("", "none"):
        return None
    try:
        if target_type is bool:
            low = text.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(text)
        if target_type is int:
            return int(text)
        if target_type is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {text!r}") from exc


_FIELD_TYPES = {
    "model": str, "lam": float, "n": int, "h": float, "t_final": float,
    "save_every": int, "galerkin_n": float, "init": str, "seed": int,
    "band": int, "amplitude": float, "mean_subtraction": bool,
    "output_dir": str, "experiment": str, "csv_stride": int,
    "checkpoint_stride": int, "beta": int,
}


def parse_config(path):
    """Read a key=value config file into a validated :class:`RunConfig`."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, raw = line.partition("=")
                key = key.strip()
                name = _KEY_ALIASES.get(key, key)
                if name not in _FIELD_TYPES:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[name] = _convert(name, raw, _FIELD_TYPES[name])
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = RunConfig(**values, provided=frozenset(values))
    return cfg.validate()


def resolve_output_dir(config):
    out = os.environ.get("KSE_OUTPUT_DIR") or config.output_dir
    os.makedirs(out, exist_ok=True)
    return out


class CheckpointWriter:
    """Writes snapshot + metadata sidecar pairs under the output directory."""

    def __init__(self, directory, config, stride=None):
        self.directory = directory
        self.config = config
        self.stride = stride

    def __call__(self, state):
        if self.stride is None or state.step_count == 0:
            return
        if state.step_count % self.stride == 0:
            self.write(state)

    def write(self, state, stem=None):
        if stem is None:
            stem = f"checkpoint_{state.step_count:09d}"
        base = os.path.join(self.directory, stem)
        if state.model == "scalar":
            save_field(base + "_phi.ksef", state.phi, time=state.t,
                       lam=self.config.lam, name="phi")
        else:
            save_field(base + "_u1.ksef", state.u.u1, time=state.t,
                       lam=self.config.lam, name="u1")
            save_field(base + "_u2.ksef", state.u.u2, time=state.t,
                       lam=self.config.lam, name="u2")
        seed = self.config.seed if self.config.init == "random" else "none"
        with open(base + ".meta", "w") as fh:
            fh.write(f"model={self.config.model}\n")
            fh.write(f"lambda={self.config.lam!r}\n")
            fh.write(f"h={self.config.h!r}\n")
            fh.write(f"step_count={state.step_count}\n")
            fh.write(f"seed={seed}\n")
        return base


def run_plain(config, extra_observers=()):
    """Standard run: diagnostics.csv, per-sample shell spectra, checkpoints."""
    out = resolve_output_dir(config)
    diag = DiagnosticsWriter(os.path.join(out, "diagnostics.csv"), config.model)
    spec = SpectrumWriter(os.path.join(out, "spectra"), config.csv_stride)
    ckpt = CheckpointWriter(out, config, config.checkpoint_stride)
    observers = [diag, spec, ckpt] + list(extra_observers)
    try:
        result = simulate(config, observers)
    finally:
        diag.close()
    ckpt.write(result.state)
    return result


def run_drift(config):
    """Vector run from a gradient start, tracking the solenoidal part."""
    config = with_updates(config, model="vector")
    out = resolve_output_dir(config)
    drift = DriftWriter(os.path.join(out, "drift.csv"))
    diag = DiagnosticsWriter(os.path.join(out, "diagnostics.csv"), "vector")
    ckpt = CheckpointWriter(out, config, config.checkpoint_stride)
    try:
        result = simulate(config, [drift, diag, ckpt])
    finally:
        drift.close()
        diag.close()
    ckpt.write(result.state)
    rate, t_start = fit_drift_rate(drift.times, drift.norms)
    with open(os.path.join(out, "drift_fit.txt"), "w") as fh:
        if rate is None:
            fh.write("rate=degenerate\n")
        else:
            fh.write(f"rate={rate!r}\nwindow_start={t_start!r}\n")
    return result, rate


def run_figures(config):
    """Desk-scale figure-reproduction run; unset keys fall to canned defaults."""
    updates = {k: v for k, v in FIGURE_DEFAULTS.items() if k not in config.provided}
    config = with_updates(config, **updates)
    if config.model != "scalar":
        raise ConfigError("experiment=figures requires model=scalar")
    return run_plain(config)


# ---------------------------------------------------------------------------
# scaling symmetry

@dataclass
class ScalingResult:
    beta: int
    times: list
    discrepancies: list

    @property
    def max_discrepancy(self):
        return max(self.discrepancies)


def _integrate_raw(grid, raw0, model, lam, h, nsteps, sample_steps, mean_subtraction):
    coeffs = _cached_coefficients(grid, lam, h)
    rhs = make_scalar_rhs(grid, grid.dealias_mask) if model == "scalar" \
        else make_vector_rhs(grid, grid.dealias_mask)
    raw = raw0.copy()
    if mean_subtraction:
        raw[..., 0, 0] = 0.0
    samples = {}
    if 0 in sample_steps:
        samples[0] = raw.copy()
    for s in range(1, nsteps + 1):
        raw = etdrk4.step(raw, rhs, coeffs)
        if mean_subtraction:
            raw[..., 0, 0] = 0.0
        if s in sample_steps:
            samples[s] = raw.copy()
    return samples


def _spectral_of_raw(grid, raw):
    return raw * grid.phase / grid.n ** 2


def _rescale_spectrum(grid, coeffs, beta, amp):
    """Scatter fhat(k) -> amp * fhat at mode beta*k on the same grid."""
    n = grid.n
    k = _fft.fftfreq(n, 1.0 / n).astype(int)
    sel = np.where(np.abs(beta * k) <= n // 2 - 1)[0]
    idx = (beta * k[sel]) % n
    out = np.zeros_like(coeffs)
    out[np.ix_(idx, idx)] = amp * coeffs[np.ix_(sel, sel)]
    return out


def _scaling_discrepancy(grid, coeffs_a, coeffs_b, beta, amp):
    """Relative L2 gap between w/amp pulled down to the base lattice and u."""
    n = grid.n
    k = _fft.fftfreq(n, 1.0 / n).astype(int)
    sel = np.where(np.abs(beta * k) <= n // 2 - 1)[0]
    idx = (beta * k[sel]) % n
    down = coeffs_b[np.ix_(idx, idx)] / amp
    base = coeffs_a[np.ix_(sel, sel)]
    num_sq = float(np.sum(np.abs(down - base) ** 2))
    num_sq += float(np.sum(np.abs(coeffs_a) ** 2)) - float(np.sum(np.abs(base) ** 2))
    num_sq += float(np.sum(np.abs(coeffs_b / amp) ** 2)) - float(np.sum(np.abs(down) ** 2))
    den = math.sqrt(float(np.sum(np.abs(coeffs_a) ** 2)))
    return math.sqrt(max(num_sq, 0.0)) / den


def scaling_symmetry_test(beta, config, comparisons=5):
    """Check u_beta(t, x) = beta^3 u(beta^4 t, beta x) discretely.

    Runs the configured model twice -- once as given, once from the rescaled
    initial data with step h/beta^4 -- and reports the relative L2 gap at
    evenly spaced comparison times.  The potential scales with beta^2 (its
    gradient then carries the beta^3).  With lam = 0 the two flows coincide
    to integrator accuracy; any lam != 0 (negative control) breaks the
    symmetry.
    """
    config.validate()
    beta = int(beta)
    amp = float(beta) ** (2 if config.model == "scalar" else 3)
    if beta < 1:
        raise ConfigError(f"beta must be a positive integer, got {beta}")
    if beta >= config.n / 6.0:
        raise ConfigError(f"beta={beta} too large for n={config.n} (need beta < n/6)")
    grid = Grid(config.n)
    state0 = initial_data(config, grid)
    if config.model == "scalar":
        raw0 = state0.phi.fft_array()
        comps0 = (state0.phi.spectral,)
    else:
        raw0 = np.stack([state0.u.u1.fft_array(), state0.u.u2.fft_array()])
        comps0 = (state0.u.u1.spectral, state0.u.u2.spectral)
    band_limit = grid.n / (3.0 * beta)
    for c in comps0:
        occupied = grid.kabs[np.abs(c) > 1e-14]
        if occupied.size and occupied.max() > band_limit:
            raise ConfigError(
                f"initial data must be band-limited to |k| <= n/(3*beta) = {band_limit:g}")

    nsteps = int(round(config.t_final / config.h))
    sample_steps = sorted({max(1, round(nsteps * i / comparisons)) for i in range(1, comparisons + 1)})
    a_samples = _integrate_raw(grid, raw0, config.model, config.lam, config.h,
                               nsteps, set(sample_steps), config.mean_subtraction)
    rawb0 = np.empty_like(raw0)
    if config.model == "scalar":
        rawb0 = _rescale_spectrum(grid, state0.phi.spectral, beta, amp) * grid.phase * grid.n ** 2
    else:
        for i, c in enumerate(comps0):
            rawb0[i] = _rescale_spectrum(grid, c, beta, amp) * grid.phase * grid.n ** 2
    b_samples = _integrate_raw(grid, rawb0, config.model, config.lam,
                               config.h / beta ** 4, nsteps, set(sample_steps),
                               config.mean_subtraction)

    times, gaps = [], []
    for s in sample_steps:
        if config.model == "scalar":
            gap = _scaling_discrepancy(grid, _spectral_of_raw(grid, a_samples[s]),
                                       _spectral_of_raw(grid, b_samples[s]), beta, amp)
        else:
            g1 = _scaling_discrepancy(grid, _spectral_of_raw(grid, a_samples[s][0]),
                                      _spectral_of_raw(grid, b_samples[s][0]), beta, amp)
            g2 = _scaling_discrepancy(grid, _spectral_of_raw(grid, a_samples[s][1]),
                                      _spectral_of_raw(grid, b_samples[s][1]), beta, amp)
            gap = max(g1, g2)
        times.append(s * config.h)
        gaps.append(gap)
    return ScalingResult(beta=beta, times=times, discrepancies=gaps)


# ---------------------------------------------------------------------------
# Galerkin truncation study

def run_galerkin(config):
    """Truncation ladder vs the untruncated run; writes galerkin.csv."""
    out = resolve_output_dir(config)
    base = with_updates(config, galerkin_n=None)
    ref = simulate(base)
    ladder = sorted({config.n // 8, 3 * config.n // 16, config.n // 4, 5 * config.n // 16})
    rows = []
    for n_modes in ladder:
        res = simulate(with_updates(config, galerkin_n=float(n_modes)))
        diff = _state_l2_diff(ref.state, res.state)
        rows.append((n_modes, diff))
    with open(os.path.join(out, "galerkin.csv"), "w", newline="") as fh:
        fh.write("n_modes,l2_diff\n")
        for n_modes, diff in rows:
            fh.write(f"{n_modes},{diff!r}\n")
    return rows


def _state_l2_diff(state_a, state_b):
    if state_a.model == "scalar":
        return float(np.sqrt(np.sum(np.abs(state_a.phi.spectral - state_b.phi.spectral) ** 2)))
    return float(np.sqrt(
        np.sum(np.abs(state_a.u.u1.spectral - state_b.u.u1.spectral) ** 2)
        + np.sum(np.abs(state_a.u.u2.spectral - state_b.u.u2.spectral) ** 2)))


# ---------------------------------------------------------------------------
# validation battery

@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _check_transform_roundtrip():
    grid = Grid(16)
    rng = np.random.default_rng(7)
    values = rng.standard_normal((16, 16))
    f = SpectralField.from_physical(grid, values)
    back = SpectralField.from_spectral(grid, f.spectral).physical
    err = float(np.abs(back - values).max())
    g = SpectralField.from_physical(grid, np.sin(grid.x1))
    c = g.spectral
    err = max(err, abs(c[1, 0] - (-0.5j)), abs(c[-1, 0] - 0.5j))
    return err < 1e-12, f"max error {err:g}"


def _check_derivative_identity():
    grid = Grid(16)
    f = SpectralField.from_physical(grid, np.sin(grid.x1) * np.cos(2 * grid.x2))
    d = f.derive((1, 0)).physical
    err = float(np.abs(d - np.cos(grid.x1) * np.cos(2 * grid.x2)).max())
    # odd derivative of a pure-Nyquist line must vanish
    nyq = SpectralField.from_physical(grid, np.cos(8 * grid.x1))
    err = max(err, float(np.abs(nyq.derive((1, 0)).physical).max()))
    return err < 1e-12, f"max error {err:g}"


def _check_parseval():
    grid = Grid(16)
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        f = SpectralField.from_physical(grid, rng.standard_normal((16, 16)))
        grid_side = float(np.sum(f.physical ** 2)) / grid.n ** 2
        coef_side = float(np.sum(np.abs(f.spectral) ** 2))
        worst = max(worst, abs(grid_side - coef_side) / coef_side)
    return worst < 1e-12, f"worst relative gap {worst:g}"


def _check_interpolation():
    grid = Grid(16)
    worst = -np.inf
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        f = SpectralField.from_physical(grid, rng.standard_normal((16, 16))).subtract_mean()
        lhs = sobolev_norm(f, 2) ** 2
        rhs = sobolev_norm(f, 3) * sobolev_norm(f, 1)
        worst = max(worst, lhs - rhs * (1 + 1e-13))
    return worst <= 0.0, f"worst excess {worst:g}"


def _check_leray():
    grid = Grid(16)
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(200 + seed)
        u = VectorField(
            SpectralField.from_physical(grid, rng.standard_normal((16, 16))).subtract_mean(),
            SpectralField.from_physical(grid, rng.standard_normal((16, 16))).subtract_mean())
        dec = leray_project(u)
        # per-mode divergence with raw wavenumbers (the projector's invariant;
        # the derivative operator would drop the unmatched highest line)
        div_v = grid.k1 * dec.v.u1.spectral + grid.k2 * dec.v.u2.spectral
        worst = max(worst, float(np.abs(div_v).max()))
        re1 = dec.v.u1.spectral + dec.grad_q.u1.spectral - u.u1.spectral
        re2 = dec.v.u2.spectral + dec.grad_q.u2.spectral - u.u2.spectral
        worst = max(worst, float(np.abs(re1).max()), float(np.abs(re2).max()))
        dec2 = leray_project(dec.v)
        worst = max(worst, float(np.abs(dec2.v.u1.spectral - dec.v.u1.spectral).max()))
    return worst < 1e-12, f"worst residual {worst:g}"


def _check_etd_limits():
    h = 0.37
    c = etdrk4.precompute_coefficients(np.array([0.0]), h)
    expect = {"E": 1.0, "E2": 1.0, "Q": h / 2, "f1": h / 6, "f2": h / 6, "f3": h / 6}
    worst = max(abs(getattr(c, k)[0] - v) / v for k, v in expect.items() if v != 1.0)
    worst = max(worst, abs(c.E[0] - 1.0), abs(c.E2[0] - 1.0))
    stiff = etdrk4.precompute_coefficients(np.array([-1e4]), 1e-3)
    worst = max(worst, abs(stiff.E[0] - np.exp(-10.0)) / np.exp(-10.0))
    return worst < 1e-10, f"worst relative gap {worst:g}"


def _check_etd_order():
    L = np.array([-1.0])
    u_exact = 1.0 / (1.0 + 9.0 * np.exp(1.0))   # u' = -u + u^2, u(0) = 0.1, t = 1
    errs = []
    hs = [0.1, 0.05, 0.025]
    for h in hs:
        c = etdrk4.precompute_coefficients(L, h)
        u = np.array([0.1 + 0j])
        for _ in range(int(round(1.0 / h))):
            u = etdrk4.step(u, lambda s: s * s, c)
        errs.append(abs(u[0].real - u_exact))
    order = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    return 3.7 <= order <= 4.3, f"fitted order {order:.3f}"


def _check_unstable_modes():
    cases = [((8.1, 2), 24), ((29.1, 2), 96), ((1.0, 2), 0), ((1.5, 3), 6)]
    bad = [(args, unstable_mode_count(*args), want)
           for args, want in cases if unstable_mode_count(*args) != want]
    return not bad, f"mismatches: {bad}" if bad else "counts match"


def _check_criteria_table():
    ok = (criterion_check("GRADU", 2, 0.0, np.inf, 1.0).admissible
          and criterion_check("GRADU", 2, 0.0, 1.0, 2.0).admissible
          and not criterion_check("U", 2, 0.0, 1.0, 2.0).admissible
          and criterion_check("PHI", 2, 0.0, np.inf, 2.0).admissible
          and not criterion_check("D12PHI", 2, 0.0, np.inf, 2.0).admissible)
    return ok, "spot tuples classified"


def _check_resolution_margin(corrupt_dealias=False):
    cfg = ModelConfig(model="scalar", lam=8.1, n=32, h=1e-3, t_final=0.1,
                      save_every=20, init="KKP")
    mask = None
    if corrupt_dealias:
        mask = np.ones((cfg.n, cfg.n), dtype=bool)
    margins = []

    def watch(state):
        s = state.phi.shell_spectrum()
        margins.append((s.resolution_margin, s.max_amplitude))

    simulate(cfg, [watch], dealias_mask=mask)
    worst = max(m / s if s > 0 else 0.0 for m, s in margins)
    return worst < 1e-15, f"worst margin/spectrum_max {worst:g}"


def validate(corrupt_dealias=False):
    """Run the full micro-scale self-check battery; returns CheckResults."""
    checks = [
        ("transform_roundtrip", _check_transform_roundtrip),
        ("derivative_identity", _check_derivative_identity),
        ("parseval", _check_parseval),
        ("interpolation", _check_interpolation),
        ("leray", _check_leray),
        ("etd_limits", _check_etd_limits),
        ("etd_order", _check_etd_order),
        ("unstable_modes", _check_unstable_modes),
        ("criteria_table", _check_criteria_table),
        ("resolution_margin", lambda: _check_resolution_margin(corrupt_dealias)),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:   # a crashed check is a failed check
            ok, detail = False, f"exception: {exc!r}"
        results.append(CheckResult(name=name, ok=ok, detail=detail))
    return results
