import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eebeam import (
    CommonRateSplit,
    PrecoderSet,
    Scenario,
    WeightVector,
    evaluate_ee,
    make_channels,
)
from eebeam.conic import max_violation
from eebeam.oracle import GridSpec, grid_ee_nt1
from eebeam.schemes import BOTH_ORDERS, DecodingOrder, noma_as_rsma, sdma_as_rsma
from eebeam.sca import (
    ScaOptions,
    SubproblemFailure,
    build_subproblem,
    initialize,
    linearize_qol,
    linearize_ratio,
    sca_solve,
    solve_noma,
    solve_scheme,
    state_to_assignment,
    trace_csv_rows,
)

from conftest import paper_scenario


def nt1_scenario(gamma=0.3):
    return Scenario(
        nt=1,
        channels=make_channels(gamma, 0.0, 1),
        p_t=10.0,
        eta=0.35,
        p_dyn=1.0,
        p_sta=1.0,
    )


class TestLinearizeRatio:
    def test_tight_at_expansion(self):
        lin = linearize_ratio(2.0, 4.0)
        assert lin.evaluate(2.0, 4.0) == pytest.approx(1.0, rel=1e-15)

    def test_lower_bound_nearby(self):
        lin = linearize_ratio(2.0, 4.0)
        assert lin.evaluate(3.0, 4.0) == pytest.approx(2.0, rel=1e-15)
        assert lin.evaluate(3.0, 4.0) <= 9.0 / 4.0

    def test_zero_expansion_gives_zero_functional(self):
        lin = linearize_ratio(0.0, 1.0)
        assert lin.coef_omega == 0.0 and lin.coef_z == 0.0
        assert lin.evaluate(7.0, 0.5) == 0.0

    def test_rejects_nonpositive_z(self):
        with pytest.raises(ValueError):
            linearize_ratio(1.0, 0.0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(min_value=0.0, max_value=50.0),
        st.floats(min_value=1e-3, max_value=100.0),
        st.floats(min_value=-50.0, max_value=50.0),
        st.floats(min_value=1e-3, max_value=100.0),
    )
    def test_global_lower_bound(self, om_bar, z_bar, om, z):
        lin = linearize_ratio(om_bar, z_bar)
        assert lin.evaluate(om, z) <= om**2 / z + 1e-9


class TestLinearizeQol:
    def test_tight_at_expansion(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        p = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        lin = linearize_qol(p, 2.5, h)
        exact = abs(np.vdot(h, p)) ** 2 / 2.5
        assert lin.evaluate(p, 2.5) == pytest.approx(exact, rel=1e-12)

    def test_zero_expansion_is_zero_form(self):
        h = np.ones(3, dtype=complex)
        lin = linearize_qol(np.zeros(3, dtype=complex), 1.0, h)
        assert lin.evaluate(np.ones(3), 0.7) == 0.0
        assert lin.coef_beta == 0.0

    def test_scalar_hand_example(self):
        lin = linearize_qol(np.array([2.0 + 0j]), 1.0, np.array([1.0 + 0j]))
        val = lin.evaluate(np.array([3.0 + 0j]), 1.0)
        assert val == pytest.approx(8.0, rel=1e-12)
        assert val <= 9.0

    def test_coefficient_vector_matches_evaluate(self):
        rng = np.random.default_rng(4)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        p_bar = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        lin = linearize_qol(p_bar, 1.7, h)
        p = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        x = np.concatenate([p.real, p.imag])
        via_coeffs = float(lin.precoder_coeffs() @ x) + lin.coef_beta * 0.9
        assert via_coeffs == pytest.approx(lin.evaluate(p, 0.9), rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_global_lower_bound(self, seed):
        rng = np.random.default_rng(seed)
        nt = int(rng.integers(1, 5))
        h = rng.standard_normal(nt) + 1j * rng.standard_normal(nt)
        p_bar = rng.standard_normal(nt) + 1j * rng.standard_normal(nt)
        beta_bar = float(rng.uniform(0.05, 10.0))
        lin = linearize_qol(p_bar, beta_bar, h)
        p = rng.standard_normal(nt) + 1j * rng.standard_normal(nt)
        beta = float(rng.uniform(0.05, 10.0))
        exact = abs(np.vdot(h, p)) ** 2 / beta
        assert lin.evaluate(p, beta) <= exact + 1e-9


class TestInitialize:
    def test_sdma_uniform_power(self, scenario_orthogonal):
        state = initialize("sdma", scenario_orthogonal, WeightVector(1, 1))
        for k in range(2):
            power = float(np.vdot(state.precoders.private[k], state.precoders.private[k]).real)
            assert power == pytest.approx(5.0, rel=1e-12)

    def test_rsma_full_power_and_even_split(self):
        s = paper_scenario(gamma=0.6, theta=0.5)
        state = initialize("rsma", s, WeightVector(1, 1))
        assert state.precoders.transmit_power() == pytest.approx(s.p_t, rel=1e-12)
        assert state.split.c1 == pytest.approx(state.split.c2, rel=1e-12)
        assert state.split.total <= min(state.alpha_c) + 1e-9

    def test_beta_equality(self):
        s = paper_scenario(gamma=0.4, theta=0.2)
        state = initialize("sdma", s, WeightVector(1, 1))
        for k in range(2):
            j = 1 - k
            expected = s.noise_power[k] + abs(np.vdot(s.channels[k], state.precoders.private[j])) ** 2
            assert state.beta[k] == pytest.approx(expected, rel=1e-12)

    def test_initial_state_feasible_for_own_subproblem(self):
        for scheme, order in [("sdma", None), ("rsma", None), ("noma", DecodingOrder(1, 2))]:
            s = paper_scenario(gamma=0.5, theta=0.8)
            state = initialize(scheme, s, WeightVector(1, 1), order)
            prog = build_subproblem(scheme, s, WeightVector(1, 1), state)
            assignment = state_to_assignment(state, s)
            assert max_violation(prog, assignment) <= 1e-9

    def test_iterate_invariants(self):
        s = paper_scenario(gamma=0.5, theta=0.8)
        state = initialize("rsma", s, WeightVector(1, 1))
        assert state.z >= s.p_cir
        assert np.all(state.beta >= np.asarray(s.noise_power) - 1e-12)
        assert np.all(state.theta_priv >= 1.0)
        assert np.all(state.alpha >= 0.0)


class TestBuildSubproblem:
    def test_sdma_variable_census(self):
        s = paper_scenario()
        state = initialize("sdma", s, WeightVector(1, 1))
        prog = build_subproblem("sdma", s, WeightVector(1, 1), state)
        assert prog.total_scalars() == 2 * 2 * 4 + 3 + 2 + 2 + 2

    def test_rsma_exponential_census(self):
        from eebeam.conic import ExpConstraint

        s = paper_scenario()
        state = initialize("rsma", s, WeightVector(1, 1))
        prog = build_subproblem("rsma", s, WeightVector(1, 1), state)
        n_exp = sum(isinstance(c, ExpConstraint) for c in prog.constraints)
        assert n_exp == 4

    def test_pwl_mode_has_no_exponentials(self):
        from eebeam.conic import ExpConstraint

        s = paper_scenario()
        state = initialize("rsma", s, WeightVector(1, 1))
        prog = build_subproblem("rsma", s, WeightVector(1, 1), state, exp_mode="pwl")
        assert not any(isinstance(c, ExpConstraint) for c in prog.constraints)


class TestScaSolve:
    def test_nt1_matches_grid_oracle(self):
        s = nt1_scenario(gamma=0.3)
        w = WeightVector(1, 1)
        opts = ScaOptions(extra_starts=1, corner_starts=True)
        result = sca_solve("rsma", s, w, opts)
        oracle_ee, _ = grid_ee_nt1("rsma", s, w, GridSpec())
        assert abs(result.ee - oracle_ee) / oracle_ee <= 0.02

    def test_trace_monotone_and_consistent(self, fast_options):
        s = paper_scenario(gamma=0.7, theta=0.6)
        w = WeightVector(1, 1)
        result = sca_solve("rsma", s, w, fast_options)
        tr = result.trace
        assert all(tr[i + 1] >= tr[i] - 1e-6 for i in range(len(tr) - 1))
        recomputed = evaluate_ee(
            result.scheme, result.precoders, w, s, split=result.split, order=result.order
        )
        assert result.ee == pytest.approx(recomputed, rel=1e-6)

    def test_warm_start_never_loses(self, fast_options):
        s = paper_scenario(gamma=0.5, theta=1.0)
        w = WeightVector(1, 1)
        sdma = sca_solve("sdma", s, w, fast_options)
        warm = sdma_as_rsma(sdma.precoders)
        warm_ee = evaluate_ee("rsma", warm[0], w, s, split=warm[1])
        result = sca_solve("rsma", s, w, fast_options, warm_start=warm)
        assert result.ee >= warm_ee - 1e-6

    def test_not_converged_flag(self):
        s = paper_scenario(gamma=0.5, theta=1.0)
        result = sca_solve("sdma", s, WeightVector(1, 1), ScaOptions(extra_starts=0, max_iter=1))
        assert not result.converged
        assert result.iterations == 1

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            sca_solve("tdma", paper_scenario(), WeightVector(1, 1))

    def test_noma_requires_order(self):
        with pytest.raises(ValueError):
            sca_solve("noma", paper_scenario(), WeightVector(1, 1))

    def test_pwl_fallback_backend(self):
        from eebeam.conic import ClarabelBackend

        class SocOnly(ClarabelBackend):
            supports_exponential = False

        s = paper_scenario(gamma=0.5, theta=1.0)
        w = WeightVector(1, 1)
        cone = sca_solve("sdma", s, w, ScaOptions(extra_starts=0))
        pwl = sca_solve("sdma", s, w, ScaOptions(extra_starts=0, backend=SocOnly()))
        assert pwl.ee == pytest.approx(cone.ee, rel=5e-3)
        # the fallback restricts the feasible set, so it may not exceed the cone value by more than noise
        assert pwl.ee <= cone.ee + 1e-4


class TestNoma:
    def test_symmetric_tie_reports_order_12(self, fast_options):
        s = paper_scenario(gamma=1.0, theta=0.0)
        result = solve_noma(s, WeightVector(1, 1), fast_options)
        assert (result.order.first, result.order.second) == (1, 2)

    def test_winner_at_least_each_order(self, fast_options):
        s = paper_scenario(gamma=0.3, theta=0.0)
        w = WeightVector(1, 1)
        winner = solve_noma(s, w, fast_options)
        for order in BOTH_ORDERS:
            single = sca_solve("noma", s, w, fast_options, order=order)
            assert winner.ee >= single.ee - 1e-9

    def test_aligned_noma_close_to_rsma(self, fast_options):
        # strong gain disparity, aligned channels: superposition coding nearly matches rate splitting
        s = paper_scenario(gamma=0.3, theta=np.pi / 9)
        w = WeightVector(1, 1)
        noma = solve_noma(s, w, fast_options)
        rsma = sca_solve("rsma", s, w, fast_options, warm_start=noma_as_rsma(noma.precoders, noma.order, s))
        assert rsma.ee >= noma.ee - 1e-6
        assert noma.ee >= 0.9 * rsma.ee

    def test_embedded_warm_start_feasible(self, fast_options):
        s = paper_scenario(gamma=0.4, theta=0.7)
        w = WeightVector(1, 1)
        noma = solve_noma(s, w, fast_options)
        warm = noma_as_rsma(noma.precoders, noma.order, s)
        warm_ee = evaluate_ee("rsma", warm[0], w, s, split=warm[1])
        result = sca_solve("rsma", s, w, fast_options, warm_start=warm)
        assert result.ee >= warm_ee - 1e-6


class TestTraceExport:
    def test_rows_schema(self, fast_options):
        s = paper_scenario(gamma=0.5, theta=0.9)
        result = sca_solve("sdma", s, WeightVector(1, 1), fast_options)
        rows = trace_csv_rows(result)
        assert rows[0]["iteration"] == 0 and rows[0]["status"] == "init"
        assert set(rows[0]) == {"iteration", "t", "wsr", "power_w", "status"}
        assert len(rows) == result.iterations + 1

    def test_feasible_point_preserved_across_iterations(self):
        s = paper_scenario(gamma=0.6, theta=0.9)
        w = WeightVector(1, 1)
        state = initialize("rsma", s, w)
        from eebeam.conic import default_backend
        from eebeam.sca import _extract_state

        backend = default_backend()
        for _ in range(4):
            prog = build_subproblem("rsma", s, w, state)
            res = backend.solve(prog)
            assert res.is_optimal
            state = _extract_state("rsma", s, res.assignment, None, res.objective_value)
            next_prog = build_subproblem("rsma", s, w, state)
            assert max_violation(next_prog, state_to_assignment(state, s)) <= 1e-6
