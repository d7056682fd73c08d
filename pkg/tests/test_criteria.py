"""Admissibility registry: windows, scaling relations, and edge cases."""

import numpy as np
import pytest

from kse2d.criteria import (
    QUANTITY,
    RELATION_TOL,
    THEOREM_IDS,
    criterion_check,
)

INF = np.inf

# (theorem_id, dim, m, p, r, expected admissibility)
TRUTH_TABLE = [
    # energy-type windows on u
    ("U", 2, 0.0, 2.0, 2.0, True),
    ("U", 2, 0.0, INF, 4.0 / 3.0, True),        # closed lower r endpoint
    ("U", 2, 0.0, 6.0, 1.5, True),
    ("U", 3, 0.0, 3.0, 2.0, True),
    ("U", 3, 0.0, 1.5, 4.0, True),              # both 3-d endpoints closed
    ("U", 2, 0.5, 2.0, 1.6, True),              # fractional smoothness
    ("U", 2, 0.0, 1.0, 4.0, False),             # p = 1 excluded (open)
    ("U", 2, 0.0, 2.0, 4.0, False),             # r = 4 excluded in 2-d (open)
    ("U", 2, 0.0, 2.0, 3.0, False),             # relation violated
    ("U", 3, 0.0, 1.4, 4.0, False),             # p below the 3-d floor
    ("U", 2, 1.2, 2.0, 2.0, False),             # m outside [0, 1)
    ("U", 2, -0.1, 2.0, 2.0, False),
    # single-component variants
    ("U1", 2, 0.0, 2.0, 2.0, True),
    ("U1", 2, 0.0, 4.0, 1.6, True),
    ("U1", 3, 0.0, 2.0, 2.0, False),            # stated only in 2-d
    ("U1U2", 3, 0.0, 3.0, 2.0, True),
    ("U1U2", 2, 0.0, 2.0, 2.0, False),          # stated only in 3-d
    # first-derivative quantities
    ("GRADU", 2, 0.0, INF, 1.0, True),
    ("GRADU", 2, 0.0, 1.0, 2.0, True),
    ("GRADU", 3, 0.0, 2.0, 1.6, True),
    ("GRADU", 2, 0.5, 2.0, 2.0, False),         # no fractional version
    ("GRADU", 2, 0.0, 2.0, 2.0, False),         # relation violated
    ("DIV", 2, 0.0, 2.0, 4.0 / 3.0, True),
    ("DIV", 2, 0.0, INF, 1.0, True),
    ("D2U2", 2, 0.0, INF, 1.0, True),
    ("D2U2", 2, 0.0, 1.0, 2.0, True),
    ("D2U2", 3, 0.0, INF, 1.0, False),          # stated only in 2-d
    ("D12PHI", 2, 0.0, INF, 1.0, True),
    ("D12PHI", 2, 0.0, 2.0, 4.0, False),        # r beyond [1, 2]
    # potential-level criteria
    ("PHI", 2, 0.0, INF, 2.0, True),
    ("PHI", 2, 0.0, 4.0, 8.0 / 3.0, True),
    ("PHI", 2, 0.5, 2.0, 8.0 / 3.0, True),
    ("PHI", 3, 0.0, 3.0, 4.0, True),
    ("PHI", 2, 0.0, 1.0, 4.0, False),           # p = 1 excluded (open)
]


@pytest.mark.parametrize("tid, dim, m, p, r, expected", TRUTH_TABLE)
def test_admissibility_truth_table(tid, dim, m, p, r, expected):
    spec = criterion_check(tid, dim, m, p, r)
    assert spec.admissible is expected, spec.reason
    if expected:
        assert spec.reason == ""
        assert abs(spec.relation_lhs - spec.relation_rhs) <= RELATION_TOL
    else:
        assert spec.reason != ""


def test_relation_sides_are_reported():
    spec = criterion_check("GRADU", 2, 0.0, 1.0, 2.0)
    assert spec.relation_rhs == pytest.approx(3.0, abs=1e-14)
    assert spec.relation_lhs == pytest.approx(3.0, abs=1e-14)
    bad = criterion_check("U", 2, 0.0, 2.0, 3.0)
    assert bad.relation_lhs == pytest.approx(1.0 + 2.0 / 3.0, abs=1e-14)
    assert bad.relation_rhs == pytest.approx(2.0, abs=1e-14)


def test_rejection_reasons_name_the_offender():
    assert "p=" in criterion_check("U", 2, 0.0, 1.0, 4.0).reason
    assert "r=" in criterion_check("D12PHI", 2, 0.0, 2.0, 4.0).reason
    assert "relation" in criterion_check("GRADU", 2, 0.0, 2.0, 2.0).reason
    assert "does not cover" in criterion_check("U1", 3, 0.0, 2.0, 2.0).reason
    assert "m=" in criterion_check("U", 2, 1.2, 2.0, 2.0).reason


def test_relation_tolerance_band_boundary():
    # near the admissible point p = 2, r = 4/3 for the gradient criterion,
    # nudge r so the relation misses by 3e-13 (inside the band) and by
    # 3e-12 (outside)
    for eps, expected in [(3e-13, True), (3e-12, False)]:
        r = 2.0 / (1.5 + eps)
        spec = criterion_check("GRADU", 2, 0.0, 2.0, r)
        assert spec.admissible is expected, (eps, spec.reason)


def test_unknown_theorem_and_dimension_raise():
    with pytest.raises(ValueError, match="unknown theorem id"):
        criterion_check("VORT", 2, 0.0, 2.0, 2.0)
    with pytest.raises(ValueError, match="dim"):
        criterion_check("U", 4, 0.0, 2.0, 2.0)


def test_quantity_map_covers_every_theorem():
    assert set(QUANTITY) == set(THEOREM_IDS)
    assert QUANTITY["GRADU"] == "grad u"


def test_fractional_windows_shrink_with_m():
    # at m = 0.9 the p window for the energy criterion is [1, 20/9)
    spec = criterion_check("U", 2, 0.9, 2.3, 1.5)
    assert not spec.admissible and "p=" in spec.reason
    # the r balancing the relation at p = 2 is 2 / ((3 + m)/2 - 1/2)
    r = 2.0 / ((3.0 + 0.9) / 2.0 - 0.5)
    spec = criterion_check("U", 2, 0.9, 2.0, r)
    assert spec.admissible, spec.reason
