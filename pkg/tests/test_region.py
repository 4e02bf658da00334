import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privacy_rde.errors import InfeasibleError, ValidationError
from privacy_rde.prob import (Channel, DistortionSpec, Pmf, Role, conditional_entropy,
                              entropy, push_forward)
from privacy_rde.rd import rate_distortion
from privacy_rde.region import (PrivacyProblem, SolverConfig, decoded_distortion, equivocation,
                                feasibility_window, gamma_curve, gamma_of_D,
                                markov_gamma_of_D, markov_restricted_solver, optimal_decoder,
                                project_rows_to_simplex, r_of_DE, rate_objective, region_curve)

from conftest import joint

FAST = SolverConfig(multistarts=4)


def hr_problem(seed=0, n_h=2, n_r=3):
    rng = np.random.default_rng(seed)
    j = joint((n_h, n_r), ["h", "r"], [Role.PRIVATE, Role.PUBLIC], rng.dirichlet(np.ones(n_h * n_r)))
    return PrivacyProblem(j, DistortionSpec.hamming(n_r))


def hrz_problem(seed=1):
    rng = np.random.default_rng(seed)
    j = joint((2, 2, 2), ["h", "r", "z"], [Role.PRIVATE, Role.PUBLIC, Role.SIDE],
              rng.dirichlet(np.ones(8)))
    return PrivacyProblem(j, DistortionSpec.hamming(2), 3)


def test_problem_validation():
    j = joint((2, 2), ["h", "z"], [Role.PRIVATE, Role.SIDE], np.full(4, 0.25))
    with pytest.raises(ValidationError):
        PrivacyProblem(j, DistortionSpec.hamming(2))
    j = joint((2, 2), ["h", "r"], [Role.PRIVATE, Role.PUBLIC], np.full(4, 0.25))
    with pytest.raises(ValidationError):
        PrivacyProblem(j, DistortionSpec.hamming(3))


def test_default_u_cardinality():
    assert hr_problem().u_cardinality == 2 * 3 + 2


def test_census_matches_rate_distortion():
    p = Pmf.from_probs([0.6, 0.3, 0.1])
    prob = PrivacyProblem.census(p)
    for D in (0.05, 0.15, 0.3):
        g = gamma_of_D(prob, D)
        assert g.equivocation == pytest.approx(entropy(p) - rate_distortion(
            p, DistortionSpec.hamming(3), D).rate, abs=1e-6)
        assert g.rate == pytest.approx(entropy(p) - g.equivocation, abs=1e-6)


def test_returned_points_are_feasible_and_labelled():
    prob = hr_problem()
    g = gamma_of_D(prob, 0.2)
    assert g.distortion <= 0.2 + 1e-12
    assert g.bound_type == "achievable"
    E = 0.5 * sum(feasibility_window(prob)) if g.equivocation > sum(feasibility_window(prob)) / 2 \
        else g.equivocation
    r = r_of_DE(prob, 0.2, E)
    assert r.distortion <= 0.2 + 1e-12 and r.equivocation >= E - 1e-12
    d = r.to_dict()
    assert set(d) >= {"rate", "distortion", "equivocation", "bound_type", "channel", "decoder"}


def test_reported_metrics_match_channel_evaluation():
    prob = hrz_problem()
    pt = gamma_of_D(prob, 0.08, FAST)
    assert equivocation(prob, pt.channel) == pytest.approx(pt.equivocation, abs=1e-12)
    assert decoded_distortion(prob, pt.channel) == pytest.approx(pt.distortion, abs=1e-12)
    assert rate_objective(prob, pt.channel) == pytest.approx(pt.rate, abs=1e-12)
    assert np.array_equal(optimal_decoder(prob, pt.channel), pt.decoder)


def test_rate_objective_against_direct_formula():
    prob = hrz_problem()
    rng = np.random.default_rng(3)
    c = Channel.from_matrix(rng.dirichlet(np.ones(3), size=4))
    j = push_forward(prob.joint, c, input_axes=["h", "r"], output_name="u")
    expected = (conditional_entropy(j, "u", "z") - conditional_entropy(j, "u", ["h", "r"]))
    assert rate_objective(prob, c) == pytest.approx(expected, abs=1e-12)
    assert equivocation(prob, c) == pytest.approx(conditional_entropy(j, "h", ["u", "z"]),
                                                  abs=1e-12)


def test_decoder_ties_and_empty_cells_use_lowest_index():
    prob = hrz_problem()
    c = Channel.constant(prob.encoder_alphabet, [1.0, 0.0, 0.0])
    g = optimal_decoder(prob, c)
    assert np.all(g[1:] == 0)


def test_window_bounds_every_point():
    prob = hrz_problem()
    lo, hi = feasibility_window(prob)
    for D in (0.02, 0.1, 0.25):
        g = gamma_of_D(prob, D, FAST)
        assert lo - 1e-9 <= g.equivocation <= hi + 1e-9


def test_constant_endpoint():
    prob = hrz_problem()
    hi = feasibility_window(prob)[1]
    g = gamma_of_D(prob, 0.5, FAST)
    assert g.rate == 0.0 and g.equivocation == pytest.approx(hi)


def test_infeasible_requests():
    prob = hr_problem()
    with pytest.raises(InfeasibleError):
        gamma_of_D(prob, -0.1)
    g = gamma_of_D(prob, 0.1)
    with pytest.raises(InfeasibleError) as ei:
        r_of_DE(prob, 0.1, g.equivocation + 0.05)
    assert ei.value.estimate == pytest.approx(g.equivocation, abs=1e-6)


def test_rate_flat_below_window():
    prob = hr_problem()
    lo, _ = feasibility_window(prob)
    a = r_of_DE(prob, 0.1, 0.0)
    b = r_of_DE(prob, 0.1, lo)
    assert a.rate == pytest.approx(b.rate, abs=1e-6)


def test_rate_dominates_plain_rate_distortion():
    # with X_r = public and E at the window floor, R(D, E) equals R(D) of X_r
    prob = hr_problem()
    p_r = Pmf.from_probs(prob.joint.marginal(["r"]))
    for D in (0.1, 0.3):
        r = r_of_DE(prob, D, 0.0)
        assert r.rate == pytest.approx(rate_distortion(p_r, DistortionSpec.hamming(3), D).rate,
                                       abs=1e-5)


def test_markov_solver_never_beats_unrestricted():
    prob = hrz_problem()
    for D in (0.05, 0.12):
        assert markov_gamma_of_D(prob, D, FAST).equivocation <= \
            gamma_of_D(prob, D, FAST).equivocation + 1e-6
    g = markov_gamma_of_D(prob, 0.05, FAST)
    E = g.equivocation - 0.002
    assert markov_restricted_solver(prob, 0.05, E, FAST).rate >= \
        r_of_DE(prob, 0.05, E, FAST).rate - 1e-6


def test_markov_channel_ignores_private_input():
    prob = hrz_problem()
    W = markov_gamma_of_D(prob, 0.05, FAST).channel.matrix
    # encoder index is (h, r) row-major: rows with the same r must agree
    assert np.allclose(W[0], W[2]) and np.allclose(W[1], W[3])


def test_gamma_curve_non_decreasing():
    prob = hrz_problem()
    res = gamma_curve(prob, np.linspace(0.0, 0.25, 6), FAST)
    E = [p.equivocation for p in res.boundary]
    assert np.all(np.diff(E) >= -1e-6)


def test_region_curve_grids_must_be_sorted():
    with pytest.raises(ValidationError):
        region_curve(hr_problem(), [0.2, 0.1], [0.5])


def test_region_curve_records_infeasible_cells():
    prob = hr_problem()
    res = region_curve(prob, [0.1], [0.0, 5.0])
    assert len(res.points) == 1
    assert all(p.target_equivocation == 0.0 for p in res.points)


@settings(max_examples=50, deadline=None)
@given(rows=st.integers(1, 5), cols=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_simplex_projection(rows, cols, seed):
    V = np.random.default_rng(seed).normal(size=(rows, cols)) * 3
    P = project_rows_to_simplex(V)
    assert np.all(P >= 0)
    assert np.allclose(P.sum(axis=1), 1.0)
    # projection of a point already on the simplex is itself
    assert np.allclose(project_rows_to_simplex(P), P)
