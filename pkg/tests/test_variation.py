"""Lq norm assembly, scalar and dilation invariance, family sweeps."""

import numpy as np
import pytest

from maxvar.core import AmbientParams
from maxvar.families import scale_profile, standard_family, tent
from maxvar.geometry import AxisBall
from maxvar.search import GridSpec, MaximalProfile
from maxvar.variation import (UnconvergedSweepError, VariationReport,
                              combined_derivative, family_sweep,
                              lq_norm_derivative, variation_report)

from conftest import rel_err


class _StubResult:
    def __init__(self, kind="boundary_inner", converged=True):
        self.ball = AxisBall(1.0, 1.0)
        self.contact = type("C", (), {"kind": kind})()
        self.converged = converged
        self.region = "E2"
        self.tie_candidates = 1


def stub_profile(grid, values, deriv, corners=None):
    mp = MaximalProfile(grid=np.asarray(grid, dtype=float),
                        values=np.asarray(values, dtype=float),
                        results=[_StubResult() for _ in grid])
    mp.deriv_fd = np.asarray(deriv, dtype=float)
    mp.deriv_formula = np.asarray(deriv, dtype=float)
    mp.corner_flags = np.zeros(len(grid), dtype=bool) if corners is None \
        else np.asarray(corners, dtype=bool)
    return mp


class TestLqNorm:
    def test_constant_m_is_zero(self):
        mp = stub_profile([1, 2, 3], [5, 5, 5], [0, 0, 0])
        assert lq_norm_derivative(mp, AmbientParams(2, 0.5)) == 0.0

    def test_closed_form_linear_decay(self):
        # m(s) = max(0, 1-s) on [0, 1], n = 1, beta = 1/2 gives q = 2 and
        # norm (2 * integral of 1 ds)^(1/2) = sqrt(2)
        grid = np.linspace(1e-9, 1.0, 300)
        mp = stub_profile(grid, 1.0 - grid, -np.ones_like(grid))
        val = lq_norm_derivative(mp, AmbientParams(1, 0.5))
        assert val == pytest.approx(np.sqrt(2.0), rel=1e-8)

    def test_corner_substitution_takes_larger_magnitude(self):
        mp = stub_profile([1, 2, 3], [1, 2, 3], [1.0, 1.0, 1.0],
                          corners=[False, True, False])
        mp.deriv_formula = np.array([0.5, 2.0, 0.5])
        combined = combined_derivative(mp)
        assert combined[1] == 2.0 and combined[0] == 1.0

    def test_unconverged_points_listed(self):
        mp = stub_profile([1, 2, 3], [1, 1, 1], [0, 0, 0])
        mp.results[1].converged = False
        with pytest.raises(UnconvergedSweepError) as exc:
            lq_norm_derivative(mp, AmbientParams(2, 0.5))
        assert exc.value.radii == [2.0]


@pytest.fixture(scope="module")
def small_report():
    prof = tent()
    return variation_report(prof, AmbientParams(2, 0.5),
                            GridSpec.standard(prof, 24),
                            include_refinement=False, include_dilation=True)


class TestVariationReport:
    def test_ratio_finite_and_consistent(self, small_report):
        rep = small_report
        assert np.isfinite(rep.ratio) and rep.ratio > 0
        assert rep.ratio == pytest.approx(rep.lq_norm_dm / rep.l1_norm_df)

    def test_exponent_identity(self, small_report):
        assert small_report.exponent_residual <= 1e-12

    def test_dilation_invariance(self, small_report):
        assert small_report.dilation_deviation <= 1e-2

    def test_histogram_partitions_grid(self, small_report):
        assert sum(small_report.region_histogram.values()) == 24

    def test_scalar_invariance(self, small_report):
        prof = scale_profile(tent(), 7.0)
        rep = variation_report(prof, AmbientParams(2, 0.5),
                               GridSpec.standard(tent(), 24),
                               include_refinement=False, include_dilation=False)
        assert rel_err(rep.ratio, small_report.ratio) <= 1e-9

    def test_json_roundtrip(self, small_report):
        import json
        data = json.loads(small_report.to_json())
        assert data["n"] == 2 and data["ratio"] == small_report.ratio


class TestFamilySweep:
    def test_singleton(self):
        rows, maxima = family_sweep({"tent": tent()}, [AmbientParams(2, 0.5)],
                                    grid_count=16, include_refinement=False,
                                    include_dilation=False)
        assert len(rows) == 1
        assert maxima[(2, 0.5)] == rows[0]["report"].ratio

    def test_deterministic_rerun(self):
        kwargs = dict(grid_count=12, include_refinement=False,
                      include_dilation=False)
        a = family_sweep(standard_family(), [AmbientParams(2, 0.5)], **kwargs)
        b = family_sweep(standard_family(), [AmbientParams(2, 0.5)], **kwargs)
        assert [r["report"].ratio for r in a[0]] == [r["report"].ratio for r in b[0]]
        assert a[1] == b[1]
