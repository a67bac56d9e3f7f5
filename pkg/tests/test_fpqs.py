from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpqs_adiabatic.fpqs import (
    adjoint_tokens,
    apply_sequence,
    build_sequence,
    dense_v,
    failure_probability,
    fpqs_step,
    pair_with_failure,
    parse_sequence,
    query_count,
    selective_rotation,
    verify_fixed_point,
)
from fpqs_adiabatic.qcore import basis_state, is_unitary, random_state

seeds = st.integers(0, 2**32 - 1)


def test_token_strings():
    assert build_sequence(0).tokens == ""
    assert build_sequence(1).tokens == "BA"
    assert build_sequence(2).tokens == "BABabABA"


@pytest.mark.parametrize("n", range(6))
def test_query_counts(n):
    assert build_sequence(n).query_count == query_count(n) == 3**n - 1


def test_parse_roundtrip():
    for n in range(4):
        seq = build_sequence(n)
        assert parse_sequence(str(seq)) == seq
    with pytest.raises(ValueError):
        parse_sequence("AB")
    with pytest.raises(ValueError):
        parse_sequence("BX")


def test_adjoint_is_inverse(rng):
    alpha, beta = random_state(5, rng), random_state(5, rng)
    seq = build_sequence(2)
    out, _ = apply_sequence(seq, alpha, beta)
    from fpqs_adiabatic.fpqs import exact_provider

    prov = exact_provider(alpha, beta)
    back = out
    for t in seq.adjoint().tokens:
        back = prov(t, back)
    assert np.allclose(back, alpha, atol=1e-12)
    assert adjoint_tokens(adjoint_tokens("BAba")) == "BAba"


def test_rotation_unitary(rng):
    r = selective_rotation(random_state(4, rng))
    assert is_unitary(r)


@given(seeds, st.integers(2, 16), st.floats(0, 1))
def test_single_step_cubes_failure(seed, dim, eps):
    rng = np.random.default_rng(seed)
    beta = random_state(dim, rng)
    alpha = pair_with_failure(beta, eps, rng)
    eps = failure_probability(alpha, beta)
    assert failure_probability(fpqs_step(alpha, beta), beta) == pytest.approx(eps**3, abs=1e-10)


@given(seeds, st.integers(1, 3), st.floats(0, 1))
def test_levels_match_dense_recursion(seed, n, eps):
    rng = np.random.default_rng(seed)
    beta = random_state(4, rng)
    alpha = pair_with_failure(beta, eps, rng)
    out, queries = apply_sequence(build_sequence(n), alpha, beta)
    assert queries == 3**n - 1
    assert np.allclose(out, dense_v(n, alpha, beta) @ alpha, atol=1e-10)


def test_failure_is_monotone_in_level(rng):
    beta = random_state(6, rng)
    alpha = pair_with_failure(beta, 0.7, rng)
    fails = [failure_probability(apply_sequence(build_sequence(n), alpha, beta)[0], beta) for n in range(4)]
    assert all(a >= b - 1e-15 for a, b in zip(fails, fails[1:]))


def test_extremes():
    beta = basis_state(0, 2)
    assert failure_probability(fpqs_step(beta, beta), beta) == pytest.approx(0.0, abs=1e-15)
    orth = basis_state(1, 2)
    assert failure_probability(fpqs_step(orth, beta), beta) == pytest.approx(1.0)


def test_verify_fixed_point_report(rng):
    reports = verify_fixed_point(3, 2, 20, rng)
    assert max(r.error for r in reports) < 1e-10


def test_level_bounds():
    with pytest.raises(ValueError):
        build_sequence(-1)
