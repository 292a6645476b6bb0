import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eebeam import (
    Scenario,
    WeightVector,
    dbm_to_watts,
    make_channels,
    scenario_from_config,
    total_power,
    watts_to_dbm,
)

from conftest import paper_scenario


class TestDbmConversion:
    def test_reference_points(self):
        assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
        assert dbm_to_watts(40.0) == pytest.approx(10.0, rel=1e-12)
        assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-12)

    @given(st.floats(min_value=-80.0, max_value=80.0))
    def test_round_trip(self, dbm):
        assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, abs=1e-10)

    @given(st.floats(min_value=1e-9, max_value=1e6))
    def test_round_trip_watts(self, w):
        assert dbm_to_watts(watts_to_dbm(w)) == pytest.approx(w, rel=1e-12)

    def test_nonpositive_watts_rejected(self):
        with pytest.raises(ValueError):
            watts_to_dbm(0.0)


class TestMakeChannels:
    def test_aligned_case(self):
        h1, h2 = make_channels(1.0, 0.0, 4)
        np.testing.assert_allclose(h1, np.ones(4))
        np.testing.assert_allclose(h2, np.ones(4))

    def test_reference_angle(self):
        theta = 2 * np.pi / 9
        _, h2 = make_channels(1.0, theta, 4)
        expected = np.exp(1j * theta * np.arange(4))
        np.testing.assert_allclose(h2, expected, atol=1e-15)

    def test_orthogonal_case(self):
        h1, h2 = make_channels(0.3, np.pi / 2, 4)
        assert np.linalg.norm(h2) == pytest.approx(0.6, rel=1e-12)
        assert abs(np.vdot(h1, h2)) == pytest.approx(0.0, abs=1e-12)

    @given(
        st.floats(min_value=0.0, max_value=2.0),
        st.floats(min_value=-np.pi, max_value=np.pi),
        st.integers(min_value=1, max_value=8),
    )
    def test_magnitude_structure(self, gamma, theta, nt):
        _, h2 = make_channels(gamma, theta, nt)
        np.testing.assert_allclose(np.abs(h2), gamma, atol=1e-12)
        assert np.linalg.norm(h2) ** 2 == pytest.approx(nt * gamma**2, rel=1e-9, abs=1e-12)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            make_channels(1.0, 0.0, 0)
        with pytest.raises(ValueError):
            make_channels(-0.1, 0.0, 4)


class TestTotalPower:
    def test_zero_transmit(self):
        s = paper_scenario(pdyn_dbm=30.0, psta_dbm=30.0)  # 1 W each
        assert total_power(0.0, s) == pytest.approx(4 * 1.0 + 1.0)

    def test_reference_values(self):
        s = paper_scenario(pdyn_dbm=40.0, psta_dbm=30.0)  # P_cir = 4*10 + 1 = 41 W
        assert total_power(10.0, s) == pytest.approx(10.0 / 0.35 + 41.0, rel=1e-12)

    def test_ideal_amplifier(self):
        s = Scenario(nt=2, channels=make_channels(1.0, 0.0, 2), p_t=10.0, eta=1.0)
        assert total_power(10.0, s) == pytest.approx(10.0)

    def test_affine_increasing(self):
        s = paper_scenario()
        vals = [total_power(p, s) for p in (0.0, 1.0, 2.0, 5.0)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        # affine: equal second differences
        assert vals[2] - vals[1] == pytest.approx(vals[1] - vals[0], rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            total_power(-1.0, paper_scenario())


class TestScenarioValidation:
    def test_noise_must_be_positive(self):
        with pytest.raises(ValueError):
            Scenario(nt=2, channels=make_channels(1, 0, 2), p_t=1.0, noise_power=(0.0, 1.0))

    def test_eta_bounds(self):
        for eta in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                Scenario(nt=2, channels=make_channels(1, 0, 2), p_t=1.0, eta=eta)

    def test_channel_length_checked(self):
        with pytest.raises(ValueError):
            Scenario(nt=3, channels=make_channels(1, 0, 2), p_t=1.0)

    def test_both_channels_zero_rejected(self):
        z = np.zeros(2, dtype=complex)
        with pytest.raises(ValueError):
            Scenario(nt=2, channels=(z, z), p_t=1.0)

    def test_one_zero_channel_allowed(self):
        z = np.zeros(2, dtype=complex)
        s = Scenario(nt=2, channels=(np.ones(2, dtype=complex), z), p_t=1.0)
        assert s.p_cir == 0.0

    def test_circuit_power(self):
        s = paper_scenario(pdyn_dbm=40.0, psta_dbm=30.0)
        assert s.p_cir == pytest.approx(41.0)


class TestWeightVector:
    def test_both_zero_rejected(self):
        with pytest.raises(ValueError):
            WeightVector(0.0, 0.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            WeightVector(-1.0, 2.0)

    def test_single_sided_ok(self):
        assert WeightVector(1.0, 0.0).u2 == 0.0


class TestConfig:
    def test_parametric_channels(self):
        cfg = {"nt": 4, "gamma": 0.3, "theta": 0.5, "p_t_dbm": 40, "p_dyn_dbm": 30,
               "p_sta_dbm": 30, "eta": 0.35}
        s = scenario_from_config(cfg)
        assert s.p_t == pytest.approx(10.0)
        assert s.p_cir == pytest.approx(5.0)
        np.testing.assert_allclose(np.abs(s.channels[1]), 0.3)

    def test_explicit_channels(self):
        cfg = {"nt": 2, "channels": [[[1, 0], [0, 1]], [[0.5, 0], [0, -0.5]]], "p_t_dbm": 30}
        s = scenario_from_config(cfg)
        np.testing.assert_allclose(s.channels[0], [1, 1j])
        np.testing.assert_allclose(s.channels[1], [0.5, -0.5j])

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            scenario_from_config({"nt": 2, "gamma": 1.0, "bogus": 3})

    def test_channels_and_gamma_conflict(self):
        with pytest.raises(ValueError):
            scenario_from_config({"nt": 1, "gamma": 1.0, "channels": [[[1, 0]], [[1, 0]]]})

    def test_json_round_trip(self, tmp_path):
        from eebeam.scenario import scenario_from_json

        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"nt": 2, "gamma": 1.0, "theta": 0.0, "p_t_dbm": 30}))
        s = scenario_from_json(str(path))
        assert s.nt == 2 and s.p_t == pytest.approx(1.0)
