"""Tests for pollutant buildup, washoff and LID removal."""

import math

import numpy as np
import pytest

from lidscore.errors import ValidationError
from lidscore.hydrology import HortonParams, Subcatchment, LandUse
from lidscore.lid import LidKind, LidPlacement
from lidscore.quality import (PollutantSpec, Pollutograph, apply_lid_removal,
                              buildup, event_load, event_mean_concentration,
                              initial_buildup_kg, simulate_quality,
                              washoff_series, washoff_step)
from lidscore.hydrology import Hydrograph

TSS = PollutantSpec(
    name="TSS", buildup_max_kg_ha=50.0, half_saturation_days=10.0,
    washoff_coeff=0.01, washoff_exponent=1.5,
    lid_removal={"bio_retention": 0.8, "storage_tank": 0.2},
)


class TestBuildup:
    def test_zero_time(self):
        assert buildup(TSS, 0.0) == 0.0

    def test_half_saturation_identity(self):
        assert buildup(TSS, 10.0) == pytest.approx(25.0)

    def test_thirty_days(self):
        """C1=50, C2=10, t=30 -> 50*30/40 = 37.5 kg/ha."""
        assert buildup(TSS, 30.0) == pytest.approx(37.5)

    def test_bounded_and_monotone(self):
        times = np.linspace(0, 200, 50)
        values = [buildup(TSS, t) for t in times]
        assert np.all(np.diff(values) > 0)
        assert values[-1] < TSS.buildup_max_kg_ha

    def test_negative_time_raises(self):
        with pytest.raises(ValidationError):
            buildup(TSS, -1.0)


class TestWashoff:
    def test_zero_runoff_removes_nothing(self):
        assert washoff_step(TSS, 0.0, 10.0, 3600) == 0.0

    def test_never_exceeds_available(self):
        removed = washoff_step(TSS, 500.0, 10.0, 3600 * 100)
        assert removed <= 10.0

    def test_closed_form_hour(self):
        """C3=0.01, C4=1.5, q=10, B=10, dt=1h -> 10(1-exp(-0.3162))."""
        expected = 10.0 * (1.0 - math.exp(-0.01 * 10 ** 1.5))
        got = washoff_step(TSS, 10.0, 10.0, 3600.0)
        assert got == pytest.approx(expected, abs=1e-9)
        assert got == pytest.approx(2.713, abs=0.01)

    def test_series_conserves_mass(self):
        """Washed-off plus residual equals the initial buildup."""
        q = np.array([0.0, 5.0, 12.0, 8.0, 2.0, 0.0])
        loads = washoff_series(TSS, q, 10.0, 60.0)
        rates = TSS.washoff_coeff * q ** TSS.washoff_exponent * 60.0 / 3600.0
        residual = 10.0 * math.exp(-rates.sum())
        assert loads.sum() + residual == pytest.approx(10.0, rel=1e-6)

    def test_series_matches_stepwise(self):
        q = np.array([3.0, 7.0, 1.0])
        loads = washoff_series(TSS, q, 5.0, 120.0)
        b = 5.0
        for k, qk in enumerate(q):
            removed = washoff_step(TSS, qk, b, 120.0)
            assert loads[k] == pytest.approx(removed, rel=1e-12)
            b -= removed

    def test_negative_inputs_raise(self):
        with pytest.raises(ValidationError):
            washoff_step(TSS, -1.0, 5.0, 60)


class TestLidRemoval:
    def make(self, loads):
        return Pollutograph(site="s", pollutant="TSS", step_s=60,
                            loads_kg=np.asarray(loads, float))

    def test_zero_removal_is_identity(self):
        p = self.make([1.0, 2.0])
        out = apply_lid_removal(p, 0.7, 0.0)
        np.testing.assert_array_equal(out.loads_kg, p.loads_kg)

    def test_full_treatment_half_removal(self):
        out = apply_lid_removal(self.make([2.0, 4.0]), 1.0, 0.5)
        np.testing.assert_allclose(out.loads_kg, [1.0, 2.0])

    def test_partial_treatment(self):
        """treated 0.6, removal 0.5 on 10 kg -> 7 kg."""
        out = apply_lid_removal(self.make([10.0]), 0.6, 0.5)
        assert out.loads_kg[0] == pytest.approx(7.0)

    def test_fraction_validation(self):
        with pytest.raises(ValidationError):
            apply_lid_removal(self.make([1.0]), 1.2, 0.5)


class TestEventStatistics:
    def test_zero_loads(self):
        p = Pollutograph(site="s", pollutant="TSS", step_s=60,
                         loads_kg=np.zeros(5))
        assert event_load(p) == 0.0

    def test_constant_concentration(self):
        """1 mg/L inflow everywhere -> EMC of exactly 1 mg/L."""
        flows = np.full(10, 1000.0)                      # L/s
        loads = flows * 60 * 1e-6                        # kg per 60 s step
        h = Hydrograph(site="s", step_s=60, flows_lps=flows)
        p = Pollutograph(site="s", pollutant="TSS", step_s=60, loads_kg=loads)
        assert event_mean_concentration(p, h) == pytest.approx(1.0)

    def test_hand_sum(self):
        p = Pollutograph(site="s", pollutant="TSS", step_s=60,
                         loads_kg=np.array([0.5, 1.25, 0.25]))
        assert event_load(p) == pytest.approx(2.0)

    def test_zero_flow_emc(self):
        h = Hydrograph(site="s", step_s=60, flows_lps=np.zeros(3))
        p = Pollutograph(site="s", pollutant="TSS", step_s=60,
                         loads_kg=np.zeros(3))
        assert event_mean_concentration(p, h) == 0.0

    def test_length_mismatch(self):
        h = Hydrograph(site="s", step_s=60, flows_lps=np.zeros(3))
        p = Pollutograph(site="s", pollutant="TSS", step_s=60,
                         loads_kg=np.zeros(4))
        with pytest.raises(ValidationError):
            event_mean_concentration(p, h)


class TestSubcatchmentQuality:
    def make_sc(self):
        return Subcatchment(
            id="q", area_ha=2.0, impervious_fraction=0.5, width_m=100,
            slope=0.01, horton=HortonParams(76.2, 3.81, 4.14),
            land_uses=(LandUse("road", 0.9, 1.2, "roads"),
                       LandUse("lawn", 0.15, 0.8, "green")),
        )

    def test_class_factors_weight_buildup(self):
        spec = PollutantSpec(
            name="TSS", buildup_max_kg_ha=50.0, half_saturation_days=10.0,
            washoff_coeff=0.01, washoff_exponent=1.5,
            surface_class_factors={"roads": 1.0, "green": 0.25},
        )
        got = initial_buildup_kg(self.make_sc(), spec, 10.0)
        # 25 kg/ha * (1.0*1.2 + 0.25*0.8)
        assert got == pytest.approx(25.0 * 1.4)

    def test_lid_area_reduces_buildup(self):
        sc = self.make_sc()
        full = initial_buildup_kg(sc, TSS, 10.0)
        less = initial_buildup_kg(sc, TSS, 10.0, lid_area_ha=0.5)
        assert less == pytest.approx(full * 0.75)

    def test_scenario_load_never_exceeds_baseline(self):
        sc = self.make_sc()
        runoff = np.array([0.0, 5.0, 20.0, 12.0, 3.0, 0.0])  # m3 per step
        base = simulate_quality(sc, runoff, TSS, 60.0)
        placements = [LidPlacement("q", LidKind.BIO_RETENTION, 0.2, 0.5)]
        scen = simulate_quality(sc, runoff * 0.8, TSS, 60.0,
                                placements=placements)
        assert event_load(scen) <= event_load(base)
        reduction_pct = (event_load(base) - event_load(scen)) / event_load(base) * 100
        assert 0.0 <= reduction_pct <= 100.0


class TestPollutographExport:
    def test_csv_with_concentrations(self, tmp_path):
        flows = np.array([0.0, 500.0, 250.0])
        h = Hydrograph(site="s", step_s=60, flows_lps=flows)
        p = Pollutograph(site="s", pollutant="TSS", step_s=60,
                         loads_kg=np.array([0.0, 0.03, 0.015]))
        path = tmp_path / "poll.csv"
        p.to_csv(path, h)
        lines = path.read_text().splitlines()
        assert lines[0] == "t_s,load_kg,conc_mg_L"
        assert lines[1].endswith(",0.0,")          # no flow, no concentration
        # 0.03 kg over 500 L/s * 60 s = 1 mg/L
        assert lines[2].split(",")[2] == "1.0"
