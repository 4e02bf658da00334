import itertools

import numpy as np
import pytest

from privacy_rde.errors import InfeasibleError, ValidationError
from privacy_rde.oracle import (OracleBudgetError, OracleConfig, channel_count,
                                enumerate_channels, oracle_gamma, oracle_rate, oracle_rd)
from privacy_rde.prob import (Channel, DistortionSpec, Pmf, Role, conditional_entropy,
                              entropy, mutual_information, push_forward)
from privacy_rde.rd import rate_distortion
from privacy_rde.region import PrivacyProblem, gamma_of_D, r_of_DE, decoded_distortion

from conftest import h2, joint


def test_config_validation():
    with pytest.raises(ValidationError):
        OracleConfig(0.3)
    with pytest.raises(ValidationError):
        OracleConfig(0.5, 0)


@pytest.mark.parametrize("n_in,n_out,q,count", [(1, 2, 0.5, 3), (2, 2, 0.5, 9), (2, 2, 0.25, 25)])
def test_enumeration_counts(n_in, n_out, q, count):
    chans = list(enumerate_channels(n_in, n_out, OracleConfig(q)))
    assert len(chans) == count == channel_count(n_in, n_out, round(1 / q))
    assert len({c.matrix.tobytes() for c in chans}) == count
    for c in chans:
        assert np.all(c.matrix.sum(axis=1) == 1.0)


def test_single_row_grid():
    rows = [tuple(c.matrix[0]) for c in enumerate_channels(1, 2, OracleConfig(0.5))]
    assert sorted(rows) == [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]


def test_budget_refusal_reports_count():
    with pytest.raises(OracleBudgetError) as ei:
        list(enumerate_channels(3, 3, OracleConfig(0.05, 1000)))
    assert ei.value.count == channel_count(3, 3, 20)


def test_rd_endpoints():
    p = Pmf.from_probs([0.5, 0.25, 0.25])
    d = DistortionSpec.hamming(3)
    assert oracle_rd(p, d, 0.5, OracleConfig(0.25)).value == 0.0
    assert oracle_rd(p, d, 0.0, OracleConfig(0.25)).value == pytest.approx(1.5, abs=1e-12)


def test_rd_binary_fine_grid():
    r = oracle_rd(Pmf.uniform(2), DistortionSpec.hamming(2), 0.1, OracleConfig(0.01))
    assert r.value == pytest.approx(1 - h2(0.1), abs=1e-3)
    assert r.value >= 1 - h2(0.1) - 1e-12


def test_rd_refining_grid_never_increases():
    p = Pmf.from_probs([0.6, 0.3, 0.1])
    d = DistortionSpec.hamming(3)
    vals = [oracle_rd(p, d, 0.15, OracleConfig(q)).value for q in (0.5, 0.25, 0.125)]
    assert vals[0] >= vals[1] >= vals[2]
    assert vals[2] >= rate_distortion(p, d, 0.15).rate - 1e-9


def test_rd_infeasible():
    d = DistortionSpec(np.array([[0.5, 1.0], [1.0, 0.5]]))
    with pytest.raises(InfeasibleError):
        oracle_rd(Pmf.uniform(2), d, 0.2, OracleConfig(0.25))


def _naive_privacy(j, d, D, n_u, q, E=None):
    """Plain loop over every quantized channel, for cross-checking."""
    prob = PrivacyProblem(j, d, n_u)
    best = None
    for c in enumerate_channels(prob.encoder_alphabet.size, n_u, OracleConfig(q)):
        if decoded_distortion(prob, c) > D + 1e-12:
            continue
        full = push_forward(j, c, input_axes=list(prob.encoder_names), output_name="u")
        eq = conditional_entropy(full, list(prob.private_names), ["u", *prob.side_names])
        if E is None:
            best = eq if best is None else max(best, eq)
        elif eq >= E - 1e-12:
            rate = (mutual_information(full, list(prob.encoder_names), "u")
                    - (mutual_information(full, list(prob.side_names), "u")
                       if prob.side_names else 0.0))
            best = rate if best is None else min(best, rate)
    return best


def small_problem():
    rng = np.random.default_rng(4)
    j = joint((2, 2, 2), ["h", "r", "z"], [Role.PRIVATE, Role.PUBLIC, Role.SIDE],
              rng.dirichlet(np.ones(8)))
    return j, DistortionSpec.hamming(2)


def test_gamma_matches_naive_enumeration():
    j, d = small_problem()
    for D in (0.05, 0.15):
        fast = oracle_gamma(j, d, D, 2, OracleConfig(0.25)).value
        assert fast == pytest.approx(_naive_privacy(j, d, D, 2, 0.25), abs=1e-12)


def test_rate_matches_naive_enumeration():
    j, d = small_problem()
    D = 0.15
    E = oracle_gamma(j, d, D, 2, OracleConfig(0.25)).value - 0.05
    fast = oracle_rate(j, d, D, E, 2, OracleConfig(0.25)).value
    assert fast == pytest.approx(_naive_privacy(j, d, D, 2, 0.25, E), abs=1e-12)


def test_gamma_endpoints():
    j, d = small_problem()
    hi = conditional_entropy(j, "h", "z")
    assert oracle_gamma(j, d, 1.0, 2, OracleConfig(0.5)).value == pytest.approx(hi, abs=1e-12)
    census = Pmf.from_probs([0.5, 0.25, 0.25]).to_joint()
    assert oracle_gamma(census, DistortionSpec.hamming(3), 0.0, 3,
                        OracleConfig(0.5)).value == pytest.approx(0.0, abs=1e-12)


def test_solver_dominates_oracle_on_small_problem():
    j, d = small_problem()
    prob = PrivacyProblem(j, d, 2)
    cfg = OracleConfig(0.1)
    g = gamma_of_D(prob, 0.1)
    o = oracle_gamma(j, d, 0.1, 2, cfg)
    assert g.equivocation >= o.value - 1e-9
    assert g.equivocation <= o.value + o.continuity_gap
    E = o.value - 0.01
    r = r_of_DE(prob, 0.1, E)
    o = oracle_rate(j, d, 0.1, E, 2, cfg)
    assert r.rate <= o.value + 1e-9


def test_result_json_fields():
    r = oracle_rd(Pmf.uniform(2), DistortionSpec.hamming(2), 0.2, OracleConfig(0.25))
    assert set(r.to_dict()) >= {"value", "channel", "quantization_step", "enumeration_count"}
