import numpy as np
import pytest

from dcboost import (
    Example2dProblem,
    ProblemDefinitionError,
    SolverParams,
    eval_phi,
    make_d1,
    make_d2,
)
from dcboost.core import Termination
from dcboost.solvers import (
    DfoState,
    SelfAdaptiveState,
    _drive,
    armijo_backtrack,
    check_d_stationarity,
    dca_step,
    dfo_escape,
    next_trial_step,
    run_bdca,
    run_bdca_plus,
    run_dca,
)

D1 = make_d1(2)


# ---------------------------------------------------------------- dca_step


def test_dca_step_from_axis_point(example2d):
    y, d, u = dca_step(example2d, np.array([0.0, 1.0]))
    assert np.array_equal(u, [1.0, 2.0])
    assert np.allclose(y, [0.0, 1.0 / 3.0], atol=1e-15)
    assert np.allclose(d, [0.0, -2.0 / 3.0], atol=1e-15)


def test_dca_step_fixed_point(example2d):
    y, d, u = dca_step(example2d, np.array([-1.0, -1.0]))
    assert np.array_equal(u, [-2.0, -2.0])
    assert np.array_equal(y, [-1.0, -1.0])
    assert np.array_equal(d, [0.0, 0.0])


def test_dca_step_mssc_matches_closed_form(mssc3, rng):
    x = mssc3.sample_start(rng)
    y, d, u = dca_step(mssc3, x)
    expect = (u.reshape(3, -1) + 2.0 * mssc3.data.mean) / (2.0 + mssc3.rho)
    assert np.allclose(y, expect.ravel(), atol=1e-14)
    assert np.array_equal(d, y - x)


def test_dca_step_rejects_bad_subproblem(example2d):
    class BadSolve(Example2dProblem):
        def solve_subproblem(self, u):
            return np.asarray(u) / 3.0  # forgets the offset

    with pytest.raises(ProblemDefinitionError, match="residual"):
        dca_step(BadSolve(), np.array([0.4, 0.7]))


def test_dca_step_rejects_inflated_rho(example2d):
    class LiedRho(Example2dProblem):
        rho = 50.0  # not a valid common modulus; descent check must fire

    with pytest.raises(ProblemDefinitionError, match="descent"):
        dca_step(LiedRho(), np.array([1.2, 0.3]))


# ---------------------------------------------------------------- armijo


def test_armijo_zero_trial(example2d):
    lam = armijo_backtrack(
        example2d, np.array([0.0, 1.0 / 3.0]), np.array([0.0, -2.0 / 3.0]), 0.0, 1e-4, 0.25
    )
    assert lam == 0.0


def test_armijo_matches_scan_oracle(example2d):
    y = np.array([0.0, 1.0 / 3.0])
    d = np.array([0.0, -2.0 / 3.0])
    alpha, beta1, trial = 1e-4, 0.25, 10.0
    lam = armijo_backtrack(example2d, y, d, trial, alpha, beta1)

    # Oracle: scan the same ladder evaluating the objective directly.
    phi_y = eval_phi(example2d, y)
    dd = float(np.dot(d, d))
    expected = trial
    while eval_phi(example2d, y + expected * d) > phi_y - alpha * expected**2 * dd:
        expected *= beta1
    assert lam == expected

    # Accepted step satisfies the inequality; one rung higher violates it.
    assert eval_phi(example2d, y + lam * d) <= phi_y - alpha * lam**2 * dd
    if lam != trial:
        above = lam / beta1
        assert eval_phi(example2d, y + above * d) > phi_y - alpha * above**2 * dd


def test_armijo_gives_up_on_ascent_direction(example2d, caplog):
    # Uphill direction: every rung fails until the floor guard trips.
    y = np.array([0.5, 0.5])
    d = np.array([1.0, 1.0])
    with caplog.at_level("WARNING"):
        lam = armijo_backtrack(example2d, y, d, 10.0, 0.9, 0.25)
    assert lam == 0.0
    assert "line search" in caplog.text


# ---------------------------------------------------------------- trial rule


def test_trial_starts_at_zero():
    assert next_trial_step(SelfAdaptiveState(), 2.0, 10.0) == 0.0


def test_trial_second_invocation_uses_lambda_bar1():
    state = SelfAdaptiveState()
    state.advance(0.0, 0.0)
    assert next_trial_step(state, 2.0, 10.0) == 10.0


def test_trial_grows_after_two_clean_accepts():
    state = SelfAdaptiveState(
        lambda_prev=20.0, trial_prev=20.0, lambda_prev2=10.0, trial_prev2=10.0, k=3
    )
    assert next_trial_step(state, 2.0, 10.0) == 40.0


def test_trial_copies_after_backtracking():
    state = SelfAdaptiveState(
        lambda_prev=0.625, trial_prev=10.0, lambda_prev2=10.0, trial_prev2=10.0, k=3
    )
    assert next_trial_step(state, 2.0, 10.0) == 0.625


def test_trial_requires_positive_history():
    # A zero trial in the window (e.g. the very first iteration) blocks growth.
    state = SelfAdaptiveState(
        lambda_prev=10.0, trial_prev=10.0, lambda_prev2=0.0, trial_prev2=0.0, k=2
    )
    assert next_trial_step(state, 2.0, 10.0) == 10.0


def test_state_advance_shifts_window():
    state = SelfAdaptiveState()
    state.advance(1.0, 2.0)
    state.advance(3.0, 4.0)
    assert (state.lambda_prev2, state.trial_prev2) == (1.0, 2.0)
    assert (state.lambda_prev, state.trial_prev) == (3.0, 4.0)
    assert state.k == 2


# ---------------------------------------------------------------- dfo escape


def test_dfo_entry_radius_growth(example2d, params):
    state = DfoState(mu=10.0)
    out = dfo_escape(example2d, np.array([-1.0, -1.0]), D1, state, params)
    assert out.event.mu_tried[0] == 2.0 * 10.0 + 1e-4  # 20.0001


def test_dfo_escapes_left_from_saddle_axis_point(example2d, params):
    # At (0, -1) moving left improves for radii below 2; enter just below 1.
    state = DfoState(mu=(0.5 - params.tau) / params.eta)
    out = dfo_escape(example2d, np.array([0.0, -1.0]), D1, state, params)
    assert out.escaped
    assert out.event.direction_index == 1  # -e1 comes second in the scan
    mu = out.event.mu_accepted
    assert mu == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(out.x_next, [-mu, -1.0])
    assert state.mu == mu  # accepted radius is kept for the next entry
    # Hand expansion: phi(-mu, -1) - phi(0, -1) = mu^2 - 2 mu < 0.
    assert out.phi_next == pytest.approx(-1.0 + mu**2 - 2.0 * mu, abs=1e-12)


def test_dfo_certifies_global_minimum(example2d, params):
    state = DfoState(mu=10.0)
    out = dfo_escape(example2d, np.array([-1.0, -1.0]), D1, state, params)
    assert not out.escaped
    assert out.event.mu_accepted is None and out.event.direction_index is None
    tried = out.event.mu_tried
    assert all(b < a for a, b in zip(tried, tried[1:]))
    assert tried[-1] <= params.eps2 / params.beta2  # shrank to the stopping radius
    assert tried[-1] == state.mu


# ---------------------------------------------------------------- drivers


def test_run_dca_follows_closed_form_map(example2d):
    # Per coordinate the iteration is t -> (sign(t) + t - 1) / 3.
    res = run_dca(example2d, np.array([0.5, 0.5]))
    x = np.array([0.5, 0.5])
    for rec in res.iterations[:6]:
        expect = (np.sign(x) + x - 1.0) / 3.0
        assert np.allclose(rec.y_k, expect, atol=1e-15)
        x = expect
    assert np.linalg.norm(res.final_point) < 1e-4
    assert res.termination is Termination.CRITICAL_POINT


def test_run_dca_axis_start_reaches_origin(example2d):
    res = run_dca(example2d, np.array([0.0, 1.0]))
    assert np.linalg.norm(res.final_point - [0.0, 0.0]) < 1e-4


def test_run_dca_fixed_point_is_one_iteration(example2d):
    res = run_dca(example2d, np.array([-1.0, -1.0]))
    assert res.n_iterations == 1
    assert np.array_equal(res.final_point, [-1.0, -1.0])


def test_run_dca_records_pure_steps(example2d):
    res = run_dca(example2d, np.array([0.3, 0.9]))
    for rec in res.iterations:
        assert rec.lambda_k == 0.0 and rec.lambda_trial == 0.0
        assert np.array_equal(rec.d_k, rec.y_k - rec.x_k)


def test_bdca_with_zero_trials_reproduces_dca_bitwise(example2d):
    x0 = np.array([0.37, -1.21])
    plain = run_dca(example2d, x0)
    forced = _drive(
        example2d, x0, None, boost=True, trial_rule=lambda state, g, l1: 0.0
    )
    assert plain.n_iterations == forced.n_iterations
    assert np.array_equal(plain.final_point, forced.final_point)
    for a, b in zip(plain.iterations, forced.iterations):
        assert np.array_equal(a.x_k, b.x_k)
        assert np.array_equal(a.y_k, b.y_k)
        assert a.phi_x == b.phi_x and a.phi_y == b.phi_y


def test_bdca_escapes_origin_but_not_saddle(example2d):
    # The boosted run jumps the axis iterate past the origin and stalls at
    # the other non-minimizing critical point instead.
    res = run_bdca(example2d, np.array([0.0, 1.0]))
    assert np.linalg.norm(res.final_point - [0.0, -1.0]) < 1e-4
    assert res.termination is Termination.CRITICAL_POINT
    assert res.dfo_invocations == 0


def test_bdca_plus_reaches_global_minimum_certified(example2d):
    res = run_bdca_plus(example2d, np.array([0.0, 1.0]))
    assert np.linalg.norm(res.final_point - [-1.0, -1.0]) < 1e-4
    assert res.termination is Termination.D_STATIONARY_CERTIFIED
    assert res.dfo_invocations >= 1


def test_bdca_plus_rejects_dim_mismatch(example2d):
    with pytest.raises(ValueError):
        run_bdca_plus(example2d, np.zeros(2), make_d1(3))


def test_max_iterations_termination(example2d):
    res = run_dca(example2d, np.array([0.5, 0.5]), SolverParams(max_iter=3))
    assert res.termination is Termination.MAX_ITERATIONS
    assert res.n_iterations == 3


def test_runs_never_mislabel_termination(example2d):
    assert (
        run_dca(example2d, np.array([1.0, 1.0])).termination
        is Termination.CRITICAL_POINT
    )
    assert (
        run_bdca(example2d, np.array([1.0, 1.0])).termination
        is Termination.CRITICAL_POINT
    )
    assert (
        run_bdca_plus(example2d, np.array([1.0, 1.0])).termination
        is Termination.D_STATIONARY_CERTIFIED
    )


# ------------------------------------------------------- invariant sweeps


def _check_run_invariants(problem, res, params):
    alpha = params.alpha
    prev_phi = None
    for rec in res.iterations:
        dd = float(np.dot(rec.d_k, rec.d_k))
        slack = 1e-9 * (1.0 + abs(rec.phi_x))
        assert rec.phi_y <= rec.phi_x - problem.rho * dd + slack
        if rec.lambda_k > 0.0:
            lhs = eval_phi(problem, rec.y_k + rec.lambda_k * rec.d_k)
            assert lhs <= rec.phi_y - alpha * rec.lambda_k**2 * dd
            assert rec.lambda_k <= rec.lambda_trial
        if prev_phi is not None:
            assert rec.phi_x <= prev_phi + 1e-9 * (1.0 + abs(prev_phi))
        prev_phi = rec.phi_x


@pytest.mark.parametrize("algo", [run_dca, run_bdca, run_bdca_plus])
def test_invariants_on_random_example2d_starts(example2d, params, algo):
    for i in range(60):
        rng = np.random.default_rng((7, i))
        x0 = rng.uniform(-1.5, 1.5, 2)
        res = algo(example2d, x0)
        _check_run_invariants(example2d, res, params)
        # Finite partial-sum form of the step-size summability bound.
        total = sum(float(np.dot(r.d_k, r.d_k)) for r in res.iterations)
        drop = eval_phi(example2d, x0) - res.final_phi
        assert total <= 10.0 * drop / example2d.rho + 1e-9


@pytest.mark.parametrize("algo", [run_dca, run_bdca, run_bdca_plus])
def test_invariants_on_random_mssc_starts(mssc3, params, algo):
    for i in range(8):
        rng = np.random.default_rng((13, i))
        x0 = mssc3.sample_start(rng)
        res = algo(mssc3, x0)
        _check_run_invariants(mssc3, res, params)


def test_certified_points_pass_the_analytic_test(example2d, mssc3):
    for problem, starts in ((example2d, 25), (mssc3, 6)):
        pss = make_d1(problem.dim)
        for i in range(starts):
            rng = np.random.default_rng((21, i))
            x0 = (
                rng.uniform(-1.5, 1.5, 2)
                if problem is example2d
                else problem.sample_start(rng)
            )
            res = run_bdca_plus(problem, x0, pss)
            assert res.termination is Termination.D_STATIONARY_CERTIFIED
            report = check_d_stationarity(problem, res.final_point, pss, tol=1e-4)
            assert report.is_d_stationary, report.min_deriv


def test_paired_bdca_plus_never_worse_than_dca(mssc3):
    for i in range(10):
        rng = np.random.default_rng((29, i))
        x0 = mssc3.sample_start(rng)
        phi_dca = run_dca(mssc3, x0).final_phi
        phi_plus = run_bdca_plus(mssc3, x0).final_phi
        assert phi_plus <= phi_dca + 1e-12


# --------------------------------------------------------- stationarity


def test_stationarity_values_at_the_four_points(example2d):
    at_min = check_d_stationarity(example2d, np.array([-1.0, -1.0]), D1)
    assert at_min.is_d_stationary
    assert at_min.dir_derivs == pytest.approx([0.0, 0.0, 0.0, 0.0], abs=1e-12)

    at_origin = check_d_stationarity(example2d, np.array([0.0, 0.0]), D1)
    assert not at_origin.is_d_stationary
    assert at_origin.min_deriv == pytest.approx(-2.0, abs=1e-12)

    at_saddle = check_d_stationarity(example2d, np.array([0.0, -1.0]), D1)
    assert not at_saddle.is_d_stationary
    assert at_saddle.min_deriv == pytest.approx(-2.0, abs=1e-12)


def test_stationarity_with_finite_difference_fallback(example2d):
    class NoExact(Example2dProblem):
        dir_deriv_h = None

    prob = NoExact()
    ok = check_d_stationarity(prob, np.array([-1.0, -1.0]), D1, tol=1e-5)
    assert ok.is_d_stationary
    bad = check_d_stationarity(prob, np.array([0.0, 0.0]), D1, tol=1e-5)
    assert not bad.is_d_stationary
    assert bad.min_deriv == pytest.approx(-2.0, abs=1e-5)


def test_stationarity_works_with_other_spanning_sets(example2d):
    pss = make_d2(2)
    assert check_d_stationarity(example2d, np.array([-1.0, -1.0]), pss).is_d_stationary
    assert not check_d_stationarity(example2d, np.array([0.0, 0.0]), pss).is_d_stationary


def test_stationarity_report_round_trip(example2d):
    from dcboost.solvers import StationarityReport

    rep = check_d_stationarity(example2d, np.array([0.0, -1.0]), D1)
    back = StationarityReport.from_dict(rep.to_dict())
    assert back.is_d_stationary == rep.is_d_stationary
    assert back.dir_derivs == rep.dir_derivs
    assert np.array_equal(back.point, rep.point)
    assert np.array_equal(
        back.directions_checked.directions, rep.directions_checked.directions
    )


def test_stationarity_validation(example2d):
    with pytest.raises(ValueError):
        check_d_stationarity(example2d, np.zeros(2), D1, tol=-1.0)
    with pytest.raises(ValueError):
        check_d_stationarity(example2d, np.zeros(2), D1, fd_step=0.0)
