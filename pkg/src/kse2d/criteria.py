"""Registry of space-time integrability criteria that rule out blow-up.

Each entry answers: is the window  quantity in L^r_t W^{m,p}_x  admissible
for the given dimension, and what scaling relation ties (m, p, r) together?
Open interval endpoints are strict; the relation itself is checked within an
absolute tolerance band of 1e-12.  ``m`` is meaningful only for the theorems
stated in W^{m,p}; the pure-L^p entries require m = 0.
"""

from dataclasses import dataclass

import numpy as np

RELATION_TOL = 1e-12

THEOREM_IDS = ("U", "U1", "U1U2", "GRADU", "DIV", "D2U2", "PHI", "D12PHI")

#: quantity whose norm each criterion windows, keyed by theorem id
QUANTITY = {
    "U": "u",
    "U1": "u1",
    "U1U2": "(u1, u2)",
    "GRADU": "grad u",
    "DIV": "div u",
    "D2U2": "d2 u2",
    "PHI": "phi",
    "D12PHI": "d12 phi",
}


@dataclass(frozen=True)
class CriterionSpec:
    theorem_id: str
    dim: int
    m: float
    p: float
    r: float
    admissible: bool
    relation_lhs: float
    relation_rhs: float
    reason: str = ""


class _Window:
    """Closed/open interval with optional infinite endpoints."""

    def __init__(self, lo, hi, lo_open=False, hi_open=False):
        self.lo, self.hi = lo, hi
        self.lo_open, self.hi_open = lo_open, hi_open

    def contains(self, x):
        if self.lo_open:
            if not x > self.lo:
                return False
        elif not x >= self.lo:
            return False
        if self.hi_open:
            if not x < self.hi:
                return False
        elif not x <= self.hi:
            return False
        return True

    def __str__(self):
        return (("(" if self.lo_open else "[") + f"{self.lo}, {self.hi}"
                + (")" if self.hi_open else "]"))


def _windows(theorem_id, dim, m):
    """(p window, r window) or None when the theorem does not cover (dim, m)."""
    inf = np.inf
    positive_m = 0.0 < m < 1.0
    if theorem_id == "U":
        if dim == 2 and positive_m:
            return _Window(1.0, 2.0 / m, hi_open=True), _Window(4.0 / 3.0, 4.0 / (1.0 + m), lo_open=True)
        if dim == 3 and positive_m:
            return _Window(3.0 / (m + 2.0), 3.0 / m, hi_open=True), _Window(4.0 / 3.0, 4.0, lo_open=True)
        if dim == 2 and m == 0.0:
            return _Window(1.0, inf, lo_open=True), _Window(4.0 / 3.0, 4.0, hi_open=True)
        if dim == 3 and m == 0.0:
            return _Window(1.5, inf), _Window(4.0 / 3.0, 4.0)
    elif theorem_id == "U1":
        if dim != 2:
            return None
        if positive_m:
            return _Window(1.0, 2.0 / m, hi_open=True), _Window(4.0 / 3.0, 4.0 / (1.0 + m), lo_open=True)
        if m == 0.0:
            return _Window(1.0, inf, lo_open=True), _Window(4.0 / 3.0, 4.0, hi_open=True)
    elif theorem_id == "U1U2":
        if dim != 3:
            return None
        if positive_m:
            return _Window(3.0 / (m + 2.0), 3.0 / m, hi_open=True), _Window(4.0 / 3.0, 4.0, lo_open=True)
        if m == 0.0:
            return _Window(1.5, inf), _Window(4.0 / 3.0, 4.0)
    elif theorem_id in ("GRADU", "DIV"):
        if m != 0.0:
            return None
        return _Window(1.0, inf), _Window(1.0, 4.0 / (4.0 - dim))
    elif theorem_id in ("D2U2", "D12PHI"):
        if dim != 2 or m != 0.0:
            return None
        return _Window(1.0, inf), _Window(1.0, 2.0)
    elif theorem_id == "PHI":
        if dim == 2 and positive_m:
            return _Window(1.0, 2.0 / m, hi_open=True), _Window(2.0, 4.0 / m, lo_open=True)
        if dim == 3 and positive_m:
            return _Window(3.0 / (m + 2.0), 3.0 / m, lo_open=True, hi_open=True), _Window(2.0, inf, lo_open=True, hi_open=True)
        if m == 0.0:
            return _Window(dim / 2.0, inf, lo_open=True), _Window(2.0, inf, hi_open=True)
    return None


def _relation(theorem_id, dim, m, p, r):
    """(lhs, rhs) of the scaling relation; infinite exponents contribute 0."""
    ip = 0.0 if np.isinf(p) else 1.0 / p
    ir = 0.0 if np.isinf(r) else 1.0 / r
    if theorem_id == "U":
        return dim * ip + 2.0 * ir, (3.0 + m) / 2.0 + dim * ip / 2.0
    if theorem_id == "U1":
        return 2.0 * ip + 2.0 * ir, ip + (3.0 + m) / 2.0
    if theorem_id == "U1U2":
        return 3.0 * ip + 2.0 * ir, 1.5 * ip + (3.0 + m) / 2.0
    if theorem_id in ("GRADU", "DIV"):
        return dim * ip + 2.0 * ir, 2.0 + dim * ip / 2.0
    if theorem_id in ("D2U2", "D12PHI"):
        return 2.0 * ip + 2.0 * ir, 2.0 + ip
    if theorem_id == "PHI":
        return dim * ip + 2.0 * ir, (2.0 + m) / 2.0 + dim * ip / 2.0
    raise AssertionError(theorem_id)


def criterion_check(theorem_id, dim, m, p, r):
    """Classify one (theorem, dim, m, p, r) tuple.

    Returns a :class:`CriterionSpec` whose ``admissible`` flag requires the
    exponents to sit inside the theorem's windows *and* satisfy the scaling
    relation; ``relation_rhs`` is reported either way.  Unknown theorem ids
    raise ``ValueError``.
    """
    if theorem_id not in THEOREM_IDS:
        raise ValueError(f"unknown theorem id {theorem_id!r}; known: {', '.join(THEOREM_IDS)}")
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    lhs, rhs = _relation(theorem_id, dim, m, p, r)

    def spec(ok, reason=""):
        return CriterionSpec(theorem_id=theorem_id, dim=dim, m=float(m), p=float(p),
                             r=float(r), admissible=ok, relation_lhs=lhs,
                             relation_rhs=rhs, reason=reason)

    if not (0.0 <= m < 1.0):
        return spec(False, f"m={m} outside [0, 1)")
    win = _windows(theorem_id, dim, m)
    if win is None:
        return spec(False, f"theorem {theorem_id} does not cover dim={dim}, m={m}")
    pw, rw = win
    if not pw.contains(p):
        return spec(False, f"p={p} outside {pw}")
    if not rw.contains(r):
        return spec(False, f"r={r} outside {rw}")
    if abs(lhs - rhs) > RELATION_TOL:
        return spec(False, f"relation violated: lhs={lhs} rhs={rhs}")
    return spec(True)


def criterion_integral(times, values, r):
    """Trapezoid of value(t)^r over the sample times; r = inf takes the max.

    ``values`` must be non-negative norm samples on increasing times.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError("times and values must be matching 1-d arrays")
    if times.size and np.any(np.diff(times) < 0):
        raise ValueError("times must be non-decreasing")
    if np.any(values < 0):
        raise ValueError("norm samples must be non-negative")
    if np.isinf(r):
        return float(values.max()) if values.size else 0.0
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if times.size < 2:
        return 0.0
    return float(np.trapezoid(values ** r, times))
