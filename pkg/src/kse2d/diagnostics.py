"""Norms, per-sample diagnostic records, and the CSV observers.

Lebesgue norms are normalized Riemann sums,

    ||f||_{L^p} = ((dx^2 / (4 pi^2)) * sum |f|^p)^(1/p),   p = inf -> grid max,

so constants have unit-independent size; Sobolev norms are plain lattice
sums over the coefficients.  The inner products feeding the energy balance
are deliberately *not* normalized.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .criteria import criterion_check
from .fields import SpectralField

TWO_PI_SQ = 4.0 * np.pi ** 2

LP_EXPONENTS = (1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, np.inf)
LP_LABELS = ("L1", "L1.5", "L2", "L3", "L4", "L5", "L6", "Linf")

SCALAR_FIELDS = ("phi", "d1phi", "d2phi", "d11phi", "d12phi", "d22phi", "lap_phi")
VECTOR_FIELDS = ("u1", "u2", "d1u1", "d2u1", "d1u2", "d2u2", "div_u")


def lp_norm(f, p, normalized=True):
    """Lebesgue p-norm of a field or sample array; p may be numpy.inf."""
    values = f.physical if isinstance(f, SpectralField) else np.asarray(f, dtype=float)
    if np.isinf(p):
        return float(np.abs(values).max())
    if p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    total = np.sum(np.abs(values) ** p) / values.size
    if not normalized:
        total *= TWO_PI_SQ
    return float(total ** (1.0 / p))


def sobolev_norm(f, s, homogeneous=True):
    """Lattice Sobolev norm: (sum w(k) |fhat(k)|^2)^(1/2).

    Homogeneous weight |k|^(2s) (the k = 0 term drops for s > 0);
    inhomogeneous weight 1 + |k|^(2s).
    """
    grid = f.grid
    asq = np.abs(f.spectral) ** 2
    kpow = np.zeros_like(grid.ksq)
    nz = grid.ksq > 0
    kpow[nz] = grid.ksq[nz] ** float(s)
    if s == 0:
        kpow[~nz] = 1.0
    if homogeneous:
        return float(np.sqrt(np.sum(kpow * asq)))
    return float(np.sqrt(np.sum((1.0 + kpow) * asq)))


def wmp_norm(f, m, p):
    """Fractional W^{m,p} norm via the Bessel multiplier (1+|k|^2)^(m/2)."""
    if not (0.0 <= m < 1.0):
        raise ValueError(f"m must lie in [0, 1), got {m}")
    grid = f.grid
    lifted = SpectralField(grid, spectral=(1.0 + grid.ksq) ** (m / 2.0) * f.spectral)
    return lp_norm(lifted, p)


def _raw_inner(dx, a, b):
    return float(dx * dx * np.sum(a * b))


@dataclass
class DiagnosticsRecord:
    """Everything sampled at one instant; lp maps field name -> label -> norm.

    The four inner products are un-normalized; the phi-based pair is None for
    vector runs (no potential is available there).
    """

    t: float
    model: str
    lp: dict
    energy: float
    enstrophy: float
    palenstrophy: float
    ip_phi_gradsq_half: Optional[float]
    ip_phi_gradsq_plus_lapsq: Optional[float]
    ip_advection: float
    ip_advection2_plus_lapsq: float
    resolution_margin: float
    spectrum_max: float
    max_speed: float = 0.0
    raw: dict = field(default_factory=dict)


def _scalar_physical_fields(phi):
    out = {"phi": phi.physical}
    out["d1phi"] = phi.derive((1, 0)).physical
    out["d2phi"] = phi.derive((0, 1)).physical
    out["d11phi"] = phi.derive((2, 0)).physical
    out["d12phi"] = phi.derive((1, 1)).physical
    out["d22phi"] = phi.derive((0, 2)).physical
    out["lap_phi"] = out["d11phi"] + out["d22phi"]
    return out


def _vector_physical_fields(u):
    out = {"u1": u.u1.physical, "u2": u.u2.physical}
    out["d1u1"] = u.u1.derive((1, 0)).physical
    out["d2u1"] = u.u1.derive((0, 1)).physical
    out["d1u2"] = u.u2.derive((1, 0)).physical
    out["d2u2"] = u.u2.derive((0, 1)).physical
    out["div_u"] = out["d1u1"] + out["d2u2"]
    return out


def energy_record(state):
    """Assemble the full :class:`DiagnosticsRecord` for a simulation state."""
    return _assemble(state)[0]


def _assemble(state):
    """(record, physical field table) -- shared so observers pay for FFTs once."""
    if state.model == "scalar":
        f = _scalar_physical_fields(state.phi)
        return _scalar_record(state, f), f
    f = _vector_physical_fields(state.u)
    return _vector_record(state, f), f


def _lp_table(fields_physical):
    table = {}
    for name, values in fields_physical.items():
        table[name] = {lab: lp_norm(values, p) for p, lab in zip(LP_EXPONENTS, LP_LABELS)}
    return table


def _scalar_record(state, f=None):
    phi = state.phi
    grid = phi.grid
    dx = grid.dx
    if f is None:
        f = _scalar_physical_fields(phi)
    lp = _lp_table(f)
    gradsq = f["d1phi"] ** 2 + f["d2phi"] ** 2
    # raw (un-normalized) L2 squares from the coefficient sums
    asq = np.abs(phi.spectral) ** 2
    raw_phi_sq = TWO_PI_SQ * float(np.sum(asq))
    raw_grad_sq = TWO_PI_SQ * float(np.sum(grid.ksq * asq))
    raw_lap_sq = TWO_PI_SQ * float(np.sum(grid.ksq ** 2 * asq))
    raw_gradlap_sq = TWO_PI_SQ * float(np.sum(grid.ksq ** 3 * asq))
    ip_half = 0.5 * _raw_inner(dx, f["phi"], gradsq)
    ip_adv = -0.5 * _raw_inner(dx, f["lap_phi"], gradsq)
    shells = phi.shell_spectrum()
    return DiagnosticsRecord(
        t=state.t, model="scalar", lp=lp,
        energy=np.sqrt(raw_phi_sq / TWO_PI_SQ),
        enstrophy=np.sqrt(raw_grad_sq / TWO_PI_SQ),
        palenstrophy=np.sqrt(raw_lap_sq / TWO_PI_SQ),
        ip_phi_gradsq_half=ip_half,
        ip_phi_gradsq_plus_lapsq=2.0 * ip_half + raw_lap_sq,
        ip_advection=ip_adv,
        ip_advection2_plus_lapsq=2.0 * ip_adv + raw_gradlap_sq,
        resolution_margin=shells.resolution_margin,
        spectrum_max=shells.max_amplitude,
        max_speed=float(np.sqrt(gradsq).max()),
        raw={"u_sq": raw_grad_sq, "grad_u_sq": raw_lap_sq, "lap_u_sq": raw_gradlap_sq,
             "phi_sq": raw_phi_sq, "lap_phi_sq": raw_lap_sq},
    )


def _vector_record(state, f=None):
    u = state.u
    grid = u.grid
    dx = grid.dx
    if f is None:
        f = _vector_physical_fields(u)
    lp = _lp_table(f)
    a1sq = np.abs(u.u1.spectral) ** 2
    a2sq = np.abs(u.u2.spectral) ** 2
    raw_u_sq = TWO_PI_SQ * float(np.sum(a1sq + a2sq))
    raw_grad_sq = TWO_PI_SQ * float(np.sum(grid.ksq * (a1sq + a2sq)))
    raw_lap_sq = TWO_PI_SQ * float(np.sum(grid.ksq ** 2 * (a1sq + a2sq)))
    adv1 = f["u1"] * f["d1u1"] + f["u2"] * f["d2u1"]
    adv2 = f["u1"] * f["d1u2"] + f["u2"] * f["d2u2"]
    ip_adv = _raw_inner(dx, adv1, f["u1"]) + _raw_inner(dx, adv2, f["u2"])
    s1 = u.u1.shell_spectrum()
    s2 = u.u2.shell_spectrum()
    margin = max(s1.resolution_margin, s2.resolution_margin)
    smax = max(s1.max_amplitude, s2.max_amplitude)
    return DiagnosticsRecord(
        t=state.t, model="vector", lp=lp,
        energy=np.sqrt(raw_u_sq / TWO_PI_SQ),
        enstrophy=np.sqrt(raw_grad_sq / TWO_PI_SQ),
        palenstrophy=np.sqrt(raw_lap_sq / TWO_PI_SQ),
        ip_phi_gradsq_half=None,
        ip_phi_gradsq_plus_lapsq=None,
        ip_advection=ip_adv,
        ip_advection2_plus_lapsq=2.0 * ip_adv + raw_lap_sq,
        resolution_margin=margin,
        spectrum_max=smax,
        max_speed=float(np.sqrt(f["u1"] ** 2 + f["u2"] ** 2).max()),
        raw={"u_sq": raw_u_sq, "grad_u_sq": raw_grad_sq, "lap_u_sq": raw_lap_sq},
    )


# ---------------------------------------------------------------------------
# tracked criteria: one admissible (p, r) choice per theorem applicable in 2D

@dataclass(frozen=True)
class TrackedCriterion:
    theorem_id: str
    p: float
    r: float
    column: str


def _col(tid, p, r):
    ptxt = "inf" if np.isinf(p) else f"{p:g}"
    rtxt = "inf" if np.isinf(r) else f"{r:g}"
    return f"crit_{tid}_p{ptxt}_r{rtxt}"


SCALAR_TRACKED = tuple(
    TrackedCriterion(tid, p, r, _col(tid, p, r))
    for tid, p, r in [
        ("U", 2.0, 2.0),
        ("U1", 2.0, 2.0),
        ("GRADU", np.inf, 1.0),
        ("DIV", np.inf, 1.0),
        ("D2U2", np.inf, 1.0),
        ("PHI", np.inf, 2.0),
        ("D12PHI", np.inf, 1.0),
    ]
)

VECTOR_TRACKED = tuple(tc for tc in SCALAR_TRACKED if tc.theorem_id not in ("PHI", "D12PHI"))

for _tc in SCALAR_TRACKED:
    assert criterion_check(_tc.theorem_id, 2, 0.0, _tc.p, _tc.r).admissible, _tc


def criterion_values(record, fields_physical, model):
    """Norm sample per tracked criterion, from the already-built lp table."""
    lp = record.lp
    if model == "scalar":
        grad_u = np.sqrt(fields_physical["d11phi"] ** 2
                         + 2.0 * fields_physical["d12phi"] ** 2
                         + fields_physical["d22phi"] ** 2)
        return {
            "U": record.enstrophy,
            "U1": lp["d1phi"]["L2"],
            "GRADU": float(grad_u.max()),
            "DIV": lp["lap_phi"]["Linf"],
            "D2U2": lp["d22phi"]["Linf"],
            "PHI": lp["phi"]["Linf"],
            "D12PHI": lp["d12phi"]["Linf"],
        }
    grad_u = np.sqrt(fields_physical["d1u1"] ** 2 + fields_physical["d2u1"] ** 2
                     + fields_physical["d1u2"] ** 2 + fields_physical["d2u2"] ** 2)
    return {
        "U": record.energy,
        "U1": lp["u1"]["L2"],
        "GRADU": float(grad_u.max()),
        "DIV": lp["div_u"]["Linf"],
        "D2U2": lp["d2u2"]["Linf"],
    }


# ---------------------------------------------------------------------------
# CSV observers

def _fmt(x):
    if x is None:
        return "nan"
    return repr(float(x))


class DiagnosticsWriter:
    """Observer writing one diagnostics.csv row per sample.

    Criterion columns hold the running integral of value^r (running max for
    r = inf) accumulated by the trapezoid rule over the samples seen so far.
    """

    def __init__(self, path, model):
        self.path = path
        self.model = model
        self.tracked = SCALAR_TRACKED if model == "scalar" else VECTOR_TRACKED
        self.field_names = SCALAR_FIELDS if model == "scalar" else VECTOR_FIELDS
        self._prev = None          # (t, {tid: value})
        self._accum = {tc.theorem_id: 0.0 for tc in self.tracked}
        self._fh = open(path, "w", newline="")
        self._fh.write(",".join(self.header()) + "\n")

    def header(self):
        cols = ["t"]
        for name in self.field_names:
            cols += [f"{name}_{lab}" for lab in LP_LABELS]
        cols += ["energy", "enstrophy", "palenstrophy",
                 "ip_phi_gradsq_half", "ip_phi_gradsq_plus_lapsq",
                 "ip_advection", "ip_advection2_plus_lapsq",
                 "resolution_margin", "spectrum_max"]
        cols += [tc.column for tc in self.tracked]
        return cols

    def __call__(self, state):
        record, fphys = _assemble(state)
        values = criterion_values(record, fphys, self.model)
        if self._prev is not None:
            t0, v0 = self._prev
            dt = record.t - t0
            for tc in self.tracked:
                if np.isinf(tc.r):
                    self._accum[tc.theorem_id] = max(self._accum[tc.theorem_id],
                                                     values[tc.theorem_id])
                else:
                    self._accum[tc.theorem_id] += 0.5 * dt * (
                        v0[tc.theorem_id] ** tc.r + values[tc.theorem_id] ** tc.r)
        else:
            for tc in self.tracked:
                if np.isinf(tc.r):
                    self._accum[tc.theorem_id] = values[tc.theorem_id]
        self._prev = (record.t, values)
        row = [_fmt(record.t)]
        for name in self.field_names:
            row += [_fmt(record.lp[name][lab]) for lab in LP_LABELS]
        row += [_fmt(record.energy), _fmt(record.enstrophy), _fmt(record.palenstrophy),
                _fmt(record.ip_phi_gradsq_half), _fmt(record.ip_phi_gradsq_plus_lapsq),
                _fmt(record.ip_advection), _fmt(record.ip_advection2_plus_lapsq),
                _fmt(record.resolution_margin), _fmt(record.spectrum_max)]
        row += [_fmt(self._accum[tc.theorem_id]) for tc in self.tracked]
        self._fh.write(",".join(row) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class SpectrumWriter:
    """Observer writing spectra/spectrum_<step>.csv shell profiles."""

    def __init__(self, directory, stride_steps=None):
        self.directory = directory
        self.stride = stride_steps
        os.makedirs(directory, exist_ok=True)

    def __call__(self, state):
        if self.stride is not None and state.step_count % self.stride != 0:
            return
        f = state.phi if state.model == "scalar" else state.u.u1
        shells = f.shell_spectrum()
        if state.model == "vector":
            shells2 = state.u.u2.shell_spectrum()
            amps = np.maximum(shells.amplitudes, shells2.amplitudes)
        else:
            amps = shells.amplitudes
        path = os.path.join(self.directory, f"spectrum_{state.step_count:09d}.csv")
        with open(path, "w", newline="") as fh:
            fh.write("t,shell,amplitude\n")
            for rho, amp in zip(shells.radii, amps):
                fh.write(f"{_fmt(state.t)},{int(rho)},{_fmt(amp)}\n")


class DriftWriter:
    """Observer writing drift.csv rows for vector runs."""

    HEADER = "t,norm_Pu_L2,norm_grad_v_L2,norm_lap_v_L2,coupling_term"

    def __init__(self, path):
        from .helmholtz import drift_quantities
        self._drift = drift_quantities
        self._fh = open(path, "w", newline="")
        self._fh.write(self.HEADER + "\n")
        self.times = []
        self.norms = []

    def __call__(self, state):
        if state.model != "vector":
            raise ValueError("drift diagnostics require the vector model")
        d = self._drift(state.u)
        self.times.append(state.t)
        self.norms.append(d.norm_Pu_L2)
        self._fh.write(",".join([_fmt(state.t), _fmt(d.norm_Pu_L2),
                                 _fmt(d.norm_grad_v_L2), _fmt(d.norm_lap_v_L2),
                                 _fmt(d.coupling_term)]) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()
