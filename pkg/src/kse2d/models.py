"""Scalar and vector Kuramoto-Sivashinsky models on the 2-torus.

Scalar form:  d_t phi + 0.5*|grad phi|^2 + lam*Lap phi + Lap^2 phi = 0
Vector form:  d_t u + (u.grad) u + lam*Lap u + Lap^2 u = 0

Both share the diagonal linear symbol L(k) = lam*|k|^2 - |k|^4 and integrate
with ETD-RK4; nonlinear products are formed in physical space and dealiased
with the radial 2/3 mask.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import fft as _fft

from . import etdrk4
from .fields import Grid, SpectralField, VectorField, load_field

log = logging.getLogger(__name__)

KKP_AMPLITUDE = math.sqrt(1.5)  # L2 size of the standard three-mode start


class ConfigError(ValueError):
    """Invalid model or run configuration; message names the offending field."""


@dataclass
class ModelConfig:
    """Parameters of one simulation.

    ``init`` selects the initial data: ``KKP`` (the three-mode potential
    sin(x1+x2)+sin(x1)+sin(x2), taken as a gradient for the vector model),
    ``random`` (seeded band-limited noise of prescribed L2 amplitude), or
    ``file:<stem>`` (restart from a checkpoint written by a previous run).
    """

    model: str = "scalar"
    lam: float = 8.1
    n: int = 128
    h: float = 2e-4
    t_final: float = 3.0
    save_every: int = 10
    galerkin_n: Optional[float] = None
    init: str = "KKP"
    seed: int = 0
    band: int = 8
    amplitude: float = KKP_AMPLITUDE
    mean_subtraction: bool = True

    def validate(self):
        if self.model not in ("scalar", "vector"):
            raise ConfigError(f"model must be 'scalar' or 'vector', got {self.model!r}")
        if self.n % 2 != 0 or self.n < 8:
            raise ConfigError(f"n must be even and >= 8, got {self.n}")
        if not (self.h > 0):
            raise ConfigError(f"h must be positive, got {self.h}")
        if not (self.t_final > 0):
            raise ConfigError(f"t_final must be positive, got {self.t_final}")
        if self.save_every < 1:
            raise ConfigError(f"save_every must be >= 1, got {self.save_every}")
        if self.galerkin_n is not None and not (self.galerkin_n > 0):
            raise ConfigError(f"galerkin_n must be positive, got {self.galerkin_n}")
        if not (self.init == "KKP" or self.init == "random" or self.init.startswith("file:")):
            raise ConfigError(f"init must be KKP, random or file:<stem>, got {self.init!r}")
        if self.init == "random":
            if self.band < 1 or self.band > self.n // 2 - 1:
                raise ConfigError(f"band must lie in [1, n/2-1], got {self.band}")
            if not (self.amplitude > 0):
                raise ConfigError(f"amplitude must be positive, got {self.amplitude}")
        return self


def linear_symbol(k1, k2, lam):
    """Growth rate lam*|k|^2 - |k|^4 of mode (k1, k2); vectorizes over arrays."""
    ksq = np.asarray(k1, dtype=float) ** 2 + np.asarray(k2, dtype=float) ** 2
    return lam * ksq - ksq ** 2


def unstable_mode_count(lam, dim=2):
    """Number of nonzero integer modes with |k|^2 < lam (exact lattice count)."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if lam <= 1.0:
        return 0
    kmax = int(math.floor(math.sqrt(lam)))
    ax = np.arange(-kmax, kmax + 1)
    if dim == 2:
        ksq = ax[:, None] ** 2 + ax[None, :] ** 2
    else:
        ksq = ax[:, None, None] ** 2 + ax[None, :, None] ** 2 + ax[None, None, :] ** 2
    return int(np.count_nonzero((ksq < lam) & (ksq > 0)))


# ---------------------------------------------------------------------------
# nonlinear terms

def make_scalar_rhs(grid, mask):
    """Nonlinear evaluator -0.5*|grad phi|^2 on raw FFT-layout coefficients."""
    m1 = grid.derivative_multiplier((1, 0))
    m2 = grid.derivative_multiplier((0, 1))

    def rhs(F):
        px = _fft.ifft2(m1 * F).real
        py = _fft.ifft2(m2 * F).real
        return _fft.fft2(-0.5 * (px * px + py * py)) * mask

    return rhs


def make_vector_rhs(grid, mask):
    """Nonlinear evaluator -(u.grad)u on stacked raw FFT-layout coefficients."""
    m1 = grid.derivative_multiplier((1, 0))
    m2 = grid.derivative_multiplier((0, 1))

    def rhs(F):
        u1 = _fft.ifft2(F[0]).real
        u2 = _fft.ifft2(F[1]).real
        d1u1 = _fft.ifft2(m1 * F[0]).real
        d2u1 = _fft.ifft2(m2 * F[0]).real
        d1u2 = _fft.ifft2(m1 * F[1]).real
        d2u2 = _fft.ifft2(m2 * F[1]).real
        r1 = _fft.fft2(-(u1 * d1u1 + u2 * d2u1)) * mask
        r2 = _fft.fft2(-(u1 * d1u2 + u2 * d2u2)) * mask
        return np.stack([r1, r2])

    return rhs


def scalar_nonlinearity(phi):
    """dealias(-0.5*((d1 phi)^2 + (d2 phi)^2)) with products in physical space."""
    rhs = make_scalar_rhs(phi.grid, phi.grid.dealias_mask)
    return SpectralField.from_fft(phi.grid, rhs(phi.fft_array()))


def vector_nonlinearity(u):
    """dealias(-(u1 d1 uj + u2 d2 uj)) with products in physical space."""
    rhs = make_vector_rhs(u.grid, u.grid.dealias_mask)
    out = rhs(np.stack([u.u1.fft_array(), u.u2.fft_array()]))
    return VectorField(SpectralField.from_fft(u.grid, out[0]),
                       SpectralField.from_fft(u.grid, out[1]))


# ---------------------------------------------------------------------------
# initial data

def kkp_potential(grid):
    """phi = sin(x1+x2) + sin(x1) + sin(x2); mean-zero, L2 size sqrt(3/2)."""
    x1, x2 = grid.x1, grid.x2
    return SpectralField.from_physical(grid, np.sin(x1 + x2) + np.sin(x1) + np.sin(x2))


def random_potential(grid, seed, band=8, amplitude=KKP_AMPLITUDE):
    """Seeded mean-zero field with modes 0 < |k| <= band and given L2 size.

    Coefficients are drawn uniformly on the complex unit disk, conjugate
    symmetrized, then rescaled so the normalized L2 norm equals ``amplitude``.
    """
    if band < 1 or band > grid.n // 2 - 1:
        raise ValueError(f"band must lie in [1, n/2-1], got {band}")
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random((grid.n, grid.n)))
    arg = 2.0 * np.pi * rng.random((grid.n, grid.n))
    draw = r * np.exp(1j * arg)
    inband = (grid.kabs <= band) & (grid.ksq > 0)
    draw = np.where(inband, draw, 0.0)
    # conj(fhat(-k)) for every k: index [-i, -j] reverses both axes mod n
    flipped = np.conj(draw[(-np.arange(grid.n)) % grid.n][:, (-np.arange(grid.n)) % grid.n])
    coeffs = 0.5 * (draw + flipped)
    size = np.sqrt(np.sum(np.abs(coeffs) ** 2))
    if size == 0.0:
        raise ValueError("degenerate random draw; choose another seed")
    return SpectralField.from_spectral(grid, coeffs * (amplitude / size))


@dataclass
class SimulationState:
    """One observed instant of a run (fields in the coefficient convention)."""

    t: float
    step_count: int
    model: str
    phi: Optional[SpectralField] = None
    u: Optional[VectorField] = None

    def primary_field(self):
        return self.phi if self.model == "scalar" else self.u


def initial_data(config, grid=None):
    """Construct the configured initial state on its grid."""
    config.validate()
    if grid is None:
        grid = Grid(config.n)
    if config.init == "KKP":
        phi = kkp_potential(grid)
    elif config.init == "random":
        phi = random_potential(grid, config.seed, config.band, config.amplitude)
    else:
        stem = config.init[len("file:"):]
        return _load_checkpoint_state(config, grid, stem)
    if config.model == "scalar":
        return SimulationState(t=0.0, step_count=0, model="scalar", phi=phi)
    return SimulationState(t=0.0, step_count=0, model="vector",
                           u=VectorField.from_gradient(phi))


def _load_checkpoint_state(config, grid, stem):
    if config.model == "scalar":
        phi, meta = load_field(f"{stem}_phi.ksef", grid)
        return SimulationState(t=meta["time"], step_count=0, model="scalar", phi=phi)
    u1, meta = load_field(f"{stem}_u1.ksef", grid)
    u2, _ = load_field(f"{stem}_u2.ksef", grid)
    return SimulationState(t=meta["time"], step_count=0, model="vector",
                           u=VectorField(u1, u2))


def galerkin_truncate(f, n_modes):
    """Project onto modes with |k| <= n_modes (sharp radial cutoff)."""
    keep = f.grid.kabs <= n_modes
    return SpectralField(f.grid, spectral=np.where(keep, f.spectral, 0.0))


# ---------------------------------------------------------------------------
# driver

@dataclass
class SimulationResult:
    status: str                   # 'completed' | 'diverged'
    state: SimulationState
    steps_completed: int
    nsteps: int
    cfl_violations: int
    config: ModelConfig


_COEFF_CACHE = {}


def _cached_coefficients(grid, lam, h):
    key = (grid.n, float(lam), float(h))
    if key not in _COEFF_CACHE:
        if len(_COEFF_CACHE) > 8:
            _COEFF_CACHE.clear()
        L = linear_symbol(grid.k1, grid.k2, lam)
        _COEFF_CACHE[key] = etdrk4.precompute_coefficients(L, h)
    return _COEFF_CACHE[key]


def _state_to_raw(state):
    if state.model == "scalar":
        return state.phi.fft_array()
    return np.stack([state.u.u1.fft_array(), state.u.u2.fft_array()])


def _raw_to_state(grid, raw, t, step_count, model):
    if model == "scalar":
        return SimulationState(t=t, step_count=step_count, model="scalar",
                               phi=SpectralField.from_fft(grid, raw))
    return SimulationState(t=t, step_count=step_count, model="vector",
                           u=VectorField(SpectralField.from_fft(grid, raw[0]),
                                         SpectralField.from_fft(grid, raw[1])))


def _max_speed(grid, raw, model):
    """Pointwise max advection speed |grad phi| resp. |u| on the grid."""
    if model == "scalar":
        m1 = grid.derivative_multiplier((1, 0))
        m2 = grid.derivative_multiplier((0, 1))
        a = _fft.ifft2(m1 * raw).real
        b = _fft.ifft2(m2 * raw).real
    else:
        a = _fft.ifft2(raw[0]).real
        b = _fft.ifft2(raw[1]).real
    return float(np.sqrt(a * a + b * b).max())


def simulate(config, observers=(), dealias_mask=None):
    """Integrate the configured model, invoking observers at sample times.

    Observers are callables taking a :class:`SimulationState`; they run at
    step 0, every ``save_every`` steps, and at the final step.  Runs that
    restart from a checkpoint continue its clock.  The advective CFL bound
    h < dx / (0.5 * max speed) is checked at sample times and only warned
    about.  ``dealias_mask`` overrides the grid's 2/3 mask (test hook).
    """
    config.validate()
    grid = Grid(config.n)
    mask = grid.dealias_mask if dealias_mask is None else dealias_mask
    nsteps = int(round(config.t_final / config.h))
    if nsteps < 1 or abs(nsteps * config.h - config.t_final) > 1e-9 * max(1.0, config.t_final):
        raise ConfigError(f"t_final must be an integer number of steps h, got t_final={config.t_final}, h={config.h}")

    state0 = initial_data(config, grid)
    t0 = state0.t          # nonzero when restarting from a checkpoint
    raw = _state_to_raw(state0)
    if config.mean_subtraction:
        raw[..., 0, 0] = 0.0
    gmask = None
    if config.galerkin_n is not None:
        gmask = grid.kabs <= config.galerkin_n
        raw = raw * gmask

    coeffs = _cached_coefficients(grid, config.lam, config.h)
    rhs = make_scalar_rhs(grid, mask) if config.model == "scalar" else make_vector_rhs(grid, mask)

    cfl_violations = 0

    def sample(step_count):
        nonlocal cfl_violations
        t = t0 + step_count * config.h
        speed = _max_speed(grid, raw, config.model)
        if speed > 0 and config.h >= grid.dx / (0.5 * speed):
            if cfl_violations == 0:
                log.warning("advective CFL advisory: h=%g >= dx/(0.5*max|grad|)=%g at t=%g",
                            config.h, grid.dx / (0.5 * speed), t)
            cfl_violations += 1
        st = _raw_to_state(grid, raw, t, step_count, config.model)
        for obs in observers:
            obs(st)
        return st

    last = sample(0)
    for step_count in range(1, nsteps + 1):
        try:
            raw = etdrk4.step(raw, rhs, coeffs)
        except etdrk4.DivergenceError:
            log.warning("diverged at step %d (t=%g)", step_count, t0 + step_count * config.h)
            return SimulationResult(status="diverged", state=last,
                                    steps_completed=step_count - 1, nsteps=nsteps,
                                    cfl_violations=cfl_violations, config=config)
        if config.mean_subtraction:
            raw[..., 0, 0] = 0.0
        if gmask is not None:
            raw *= gmask
        if step_count % config.save_every == 0 or step_count == nsteps:
            last = sample(step_count)
    return SimulationResult(status="completed", state=last, steps_completed=nsteps,
                            nsteps=nsteps, cfl_violations=cfl_violations, config=config)


def with_updates(config, **kw):
    """Copy a config with replaced fields (validated)."""
    return replace(config, **kw).validate()
