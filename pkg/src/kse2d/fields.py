"""Real periodic fields on the torus [-pi, pi)^2 and their spectral machinery.

Coefficients follow the convention

    f(x) = sum_k fhat(k) exp(i k . x),   k_i in {-n/2, ..., n/2 - 1},

so ``fhat(0)`` is the spatial mean and the forward transform carries the
1/n^2 normalization.  Physical nodes are x_j = -pi + j * dx with dx = 2*pi/n,
which puts a (-1)^(k1+k2) phase between numpy's FFT layout and these
coefficients.
"""

import numpy as np
from scipy import fft as _fft

SNAPSHOT_MAGIC = "KSEFIELD"
SNAPSHOT_VERSION = "v1"


class Grid:
    """Uniform n x n grid with integer wavenumbers and the 2/3-rule mask.

    The dealias mask keeps modes with Euclidean radius |k| < n/3; everything
    at or beyond the cutoff is zeroed.  The same radius defines the resolved
    region used by the resolution-margin report.
    """

    def __init__(self, n):
        if n % 2 != 0 or n < 8:
            raise ValueError(f"grid size n must be even and >= 8, got {n}")
        self.n = n
        self.dx = 2.0 * np.pi / n
        x = -np.pi + self.dx * np.arange(n)
        self.x1, self.x2 = np.meshgrid(x, x, indexing="ij")
        k = _fft.fftfreq(n, 1.0 / n).astype(int)
        self.k1, self.k2 = np.meshgrid(k, k, indexing="ij")
        self.ksq = (self.k1 ** 2 + self.k2 ** 2).astype(float)
        self.kabs = np.sqrt(self.ksq)
        self.dealias_radius = n / 3.0
        self.dealias_mask = self.kabs < self.dealias_radius
        # nodes start at -pi, so numpy FFT output picks up (-1)^(k1+k2)
        self.phase = np.where((self.k1 + self.k2) % 2 == 0, 1.0, -1.0)
        self._mult_cache = {}

    def derivative_multiplier(self, order):
        """Per-mode factor (i k1)^a1 * (i k2)^a2 for ``order = (a1, a2)``.

        For odd derivative orders the unmatched Nyquist line (k_i = -n/2) is
        zeroed so derivatives of real fields stay real.
        """
        a1, a2 = int(order[0]), int(order[1])
        if a1 < 0 or a2 < 0:
            raise ValueError(f"derivative order must be non-negative, got {order}")
        key = (a1, a2)
        if key not in self._mult_cache:
            k1 = self.k1.astype(float)
            k2 = self.k2.astype(float)
            if a1 % 2 == 1:
                k1 = np.where(self.k1 == -self.n // 2, 0.0, k1)
            if a2 % 2 == 1:
                k2 = np.where(self.k2 == -self.n // 2, 0.0, k2)
            self._mult_cache[key] = (1j * k1) ** a1 * (1j * k2) ** a2
        return self._mult_cache[key]

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self):
        return hash(("Grid", self.n))

    def __repr__(self):
        return f"Grid(n={self.n})"


class SpectralField:
    """Real scalar field holding physical samples and/or Fourier coefficients.

    Whichever representation is missing is computed lazily and cached; all
    operations return new fields.
    """

    def __init__(self, grid, physical=None, spectral=None):
        if physical is None and spectral is None:
            raise ValueError("need at least one representation")
        self.grid = grid
        shape = (grid.n, grid.n)
        if physical is not None:
            physical = np.asarray(physical, dtype=float)
            if physical.shape != shape:
                raise ValueError(f"physical shape {physical.shape} != {shape}")
        if spectral is not None:
            spectral = np.asarray(spectral, dtype=complex)
            if spectral.shape != shape:
                raise ValueError(f"spectral shape {spectral.shape} != {shape}")
        self._physical = physical
        self._spectral = spectral

    @classmethod
    def from_physical(cls, grid, values):
        return cls(grid, physical=values)

    @classmethod
    def from_spectral(cls, grid, coeffs):
        return cls(grid, spectral=coeffs)

    @classmethod
    def from_fft(cls, grid, fft_coeffs):
        """Wrap raw numpy-convention FFT output (n^2-scaled, unphased)."""
        return cls(grid, spectral=np.asarray(fft_coeffs) * grid.phase / grid.n ** 2)

    @property
    def physical(self):
        if self._physical is None:
            F = self._spectral * self.grid.phase * self.grid.n ** 2
            self._physical = _fft.ifft2(F).real
        return self._physical

    @property
    def spectral(self):
        if self._spectral is None:
            self._spectral = _fft.fft2(self._physical) * self.grid.phase / self.grid.n ** 2
        return self._spectral

    def fft_array(self):
        """Raw numpy-convention FFT coefficients (inverse of ``from_fft``)."""
        return self.spectral * self.grid.phase * self.grid.n ** 2

    def derive(self, order):
        """Spectral partial derivative of multi-order ``(a1, a2)``."""
        return SpectralField(self.grid, spectral=self.spectral * self.grid.derivative_multiplier(order))

    def dealias(self):
        """Zero every coefficient with |k| >= n/3."""
        return SpectralField(self.grid, spectral=np.where(self.grid.dealias_mask, self.spectral, 0.0))

    def subtract_mean(self):
        """Return the field minus its spatial mean (zeroed k=0 coefficient)."""
        if self._spectral is not None:
            s = self._spectral.copy()
            s[0, 0] = 0.0
            return SpectralField(self.grid, spectral=s)
        p = self._physical
        return SpectralField(self.grid, physical=p - p.mean())

    def mean(self):
        if self._spectral is not None:
            return self._spectral[0, 0].real
        return float(self._physical.mean())

    def shell_spectrum(self):
        """Max |fhat(k)| per integer shell rho <= |k| < rho+1, plus the margin."""
        amp = np.abs(self.spectral)
        shell = np.floor(self.grid.kabs).astype(int)
        nshell = int(np.floor(self.grid.n / np.sqrt(2.0))) + 1
        amps = np.zeros(nshell)
        np.maximum.at(amps, shell.ravel(), amp.ravel())
        margin = float(amp[~self.grid.dealias_mask].max())
        return ShellSpectrum(radii=np.arange(nshell), amplitudes=amps, resolution_margin=margin)

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.grid, spectral=self.spectral + other.spectral)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.grid, spectral=self.spectral - other.spectral)

    def __mul__(self, scalar):
        return SpectralField(self.grid, spectral=self.spectral * float(scalar))

    __rmul__ = __mul__

    def _check(self, other):
        if not isinstance(other, SpectralField) or other.grid != self.grid:
            raise ValueError("fields live on different grids")


class ShellSpectrum:
    """Shell-maximum amplitude profile of a field's coefficients."""

    def __init__(self, radii, amplitudes, resolution_margin):
        self.radii = radii
        self.amplitudes = amplitudes
        self.resolution_margin = resolution_margin

    @property
    def max_amplitude(self):
        return float(self.amplitudes.max())


class VectorField:
    """Pair of scalar fields (u1, u2) on a shared grid."""

    def __init__(self, u1, u2):
        if u1.grid != u2.grid:
            raise ValueError("components live on different grids")
        self.u1 = u1
        self.u2 = u2
        self.grid = u1.grid

    @classmethod
    def from_gradient(cls, phi):
        return cls(phi.derive((1, 0)), phi.derive((0, 1)))

    def divergence(self):
        return self.u1.derive((1, 0)) + self.u2.derive((0, 1))

    def components(self):
        return (self.u1, self.u2)

    def subtract_mean(self):
        return VectorField(self.u1.subtract_mean(), self.u2.subtract_mean())


def save_field(path, field, time=0.0, lam=0.0, name="field"):
    """Write a snapshot: one ASCII header line, then n^2 little-endian doubles.

    Layout is row-major over (x1, x2) node indices.
    """
    if any(c.isspace() for c in str(name)) or name == "":
        raise ValueError(f"snapshot name must be a non-blank token, got {name!r}")
    header = (
        f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} n={field.grid.n} "
        f"time={float(time)!r} lambda={float(lam)!r} name={name}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.physical, dtype="<f8").tobytes())


def load_field(path, grid=None):
    """Read a snapshot written by :func:`save_field`.

    Returns ``(field, meta)`` where meta holds time, lambda and name.  A grid
    may be passed to reuse cached multipliers; its size must match the header.
    """
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if len(parts) != 6 or parts[0] != SNAPSHOT_MAGIC or parts[1] != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: not a {SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} snapshot")
        kv = {}
        for tok in parts[2:]:
            key, _, val = tok.partition("=")
            kv[key] = val
        try:
            n = int(kv["n"])
            meta = {"time": float(kv["time"]), "lambda": float(kv["lambda"]), "name": kv["name"]}
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: corrupt snapshot header {header!r}") from exc
        raw = fh.read(n * n * 8)
        if len(raw) != n * n * 8:
            raise ValueError(f"{path}: truncated payload ({len(raw)} bytes for n={n})")
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after payload")
    if grid is None:
        grid = Grid(n)
    elif grid.n != n:
        raise ValueError(f"{path}: snapshot n={n} does not match grid n={grid.n}")
    values = np.frombuffer(raw, dtype="<f8").reshape(n, n)
    return SpectralField.from_physical(grid, values.copy()), meta
