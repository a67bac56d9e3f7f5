from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpqs_adiabatic.evolution import CostLedger
from fpqs_adiabatic.fpqs import PI_3, rotate
from fpqs_adiabatic.interpolation import make_random_instance
from fpqs_adiabatic.qcore import eig_hermitian, is_unitary, random_state
from fpqs_adiabatic.selective import (
    AncillaConfig,
    MarkedSet,
    PEAOperator,
    approx_selective,
    apply_qft,
    boosted_b,
    boosted_b2,
    circular_median,
    estimate_anchor,
    eta_bounds,
    fejer_probabilities,
    make_oracle,
    pea_measurement,
    phase_register,
    qft,
    selective_quality,
    synthetic_discriminator,
)


@pytest.fixture(scope="module")
def instance():
    return make_random_instance(4, 0.6, seed=3)


def test_qft_matrix_and_fft_agree(rng):
    f = qft(5)
    assert is_unitary(f)
    psi = rng.normal(size=(2, 32)) + 1j * rng.normal(size=(2, 32))
    assert np.allclose(apply_qft(psi), psi @ f.T, atol=1e-12)


@given(st.floats(0, 1, exclude_max=True), st.integers(2, 9))
def test_phase_register_matches_closed_form(phase, l):
    probs = np.abs(phase_register(phase, l)) ** 2
    assert np.allclose(probs, fejer_probabilities(phase, l), atol=1e-12)
    assert np.isclose(probs.sum(), 1.0)


def test_pea_operator_structural_matches_dense(instance, rng):
    cfg = AncillaConfig.for_problem(instance, 4)
    op = PEAOperator(instance.hamiltonian(0.3), cfg, shift=instance.gamma)
    dense = op.to_dense()
    assert is_unitary(dense)
    psi = random_state(4 * 16, rng).reshape(4, 16)
    assert np.allclose(op.apply(psi).reshape(-1), dense @ psi.reshape(-1), atol=1e-12)
    assert np.allclose(op.apply_adjoint(op.apply(psi)), psi, atol=1e-12)


def test_pea_operator_charges_ledger(instance):
    cfg = AncillaConfig.for_problem(instance, 6)
    ledger = CostLedger()
    op = PEAOperator(instance.hamiltonian(0.5), cfg, shift=instance.gamma, ledger=ledger)
    psi = np.zeros((4, 64), dtype=complex)
    op.apply(psi)
    op.apply_adjoint(psi)
    assert ledger.pea_runs == 2 and ledger.u_applications == 2 * 64


def test_pea_operator_preconditions(instance):
    with pytest.raises(ValueError):
        PEAOperator(instance.hamiltonian(0.5), AncillaConfig(4, 1.0), shift=instance.gamma)
    with pytest.raises(ValueError):
        PEAOperator(instance.hamiltonian(0.5), AncillaConfig.for_problem(instance, 4), shift=0.0)


def test_ancilla_config_validation(instance):
    with pytest.raises(ValueError):
        AncillaConfig.for_problem(instance, 2).validate(instance.gamma, instance.min_gap)
    AncillaConfig.for_problem(instance, 10).validate(instance.gamma, instance.min_gap)
    with pytest.raises(ValueError):
        AncillaConfig(0, 0.1)


@given(st.integers(0, 1023), st.integers(0, 40), st.integers(0, 1023))
def test_marked_set_wraps(anchor, width, k):
    m = MarkedSet.around(anchor, width, 1024)
    assert len(set(m.members.tolist())) == width + 1
    assert anchor in m
    assert (k in m) == bool(m.mask[k])


def test_marked_offset_is_two_for_narrow_windows():
    assert MarkedSet.around(10, 4, 64).start == 8
    assert MarkedSet.around(10, 0, 64).members.tolist() == [10]


def test_quality_recovers_synthetic_overlaps(rng):
    marked = MarkedSet.around(20, 6, 64)
    gammas = [0.97, 0.05, 0.02]
    b = synthetic_discriminator(gammas, marked, rng)
    qual = selective_quality(b, marked)
    assert np.allclose(qual.gamma_j, gammas, atol=1e-12)
    assert qual.eta0 == pytest.approx(0.03)
    assert qual.eta_excited_max == pytest.approx(0.05)


def test_perfect_discriminator_gives_exact_rotation(rng):
    marked = MarkedSet.around(5, 4, 32)
    b = synthetic_discriminator([1.0, 0.0, 0.0], marked, rng)
    psi = random_state(3, rng)
    ok, out, p = approx_selective(psi, b, marked, PI_3, rng)
    assert ok and p == pytest.approx(1.0)
    assert np.allclose(out, rotate(psi, b.basis[:, 0], PI_3), atol=1e-12)


def test_post_selection_probability_formula(rng):
    marked = MarkedSet.around(5, 4, 32)
    b = synthetic_discriminator([0.9, 0.2, 0.1], marked, rng)
    qual = selective_quality(b, marked, PI_3)
    psi = random_state(3, rng)
    c = b.basis.conj().T @ psi
    _, _, p = approx_selective(psi, b, marked, PI_3, np.random.default_rng(0))
    # success branch amplitude on |E_j> is mu_j c_j
    expected = float(np.sum(np.abs(qual.mu_j * c) ** 2))
    assert p == pytest.approx(expected) or 1 - p == pytest.approx(expected)


def test_boosted_dense_matches_apply_and_cost(rng):
    marked = MarkedSet.around(5, 4, 16)
    base = synthetic_discriminator([0.95, 0.05], marked, rng)
    b2 = boosted_b2(boosted_b(base, marked, 2, 0.05), marked, 2, 0.05)
    psi = random_state(2 * 16, rng).reshape(2, 16)
    assert np.allclose(b2.apply(psi).reshape(-1), b2.to_dense() @ psi.reshape(-1), atol=1e-12)
    before = base.applications
    b2.apply(psi)
    assert base.applications - before == b2.base_cost == 9 <= 4 * 2 * 2
    assert np.allclose(b2.apply_adjoint(b2.apply(psi)), psi, atol=1e-12)


def test_boost_preconditions(rng):
    marked = MarkedSet.around(5, 4, 16)
    base = synthetic_discriminator([0.7, 0.3], marked, rng)
    with pytest.raises(ValueError):
        boosted_b(base, marked, 2, eta=0.3)  # (q+1) eta^2 = 0.27 > 0.2
    with pytest.raises(ValueError):
        boosted_b(base, marked, 3)
    with pytest.raises(ValueError):
        boosted_b2(base, marked, 2)


def test_boosting_shrinks_both_errors(rng):
    marked = MarkedSet.around(30, 8, 64)
    base = synthetic_discriminator([0.9, 0.1, 0.1, 0.1], marked, rng)
    before = selective_quality(base, marked)
    after = selective_quality(boosted_b2(boosted_b(base, marked, 2), marked, 2), marked)
    assert after.eta0 < before.eta0 and after.eta_excited_max < before.eta_excited_max


def test_eta_bounds_hold_for_pea(instance):
    cfg = AncillaConfig.for_problem(instance, 10)
    bound = eta_bounds(cfg, instance.min_gap)
    for s in (0.0, 0.3, 0.7, 1.0):
        b = PEAOperator(instance.hamiltonian(s), cfg, shift=instance.gamma, spectrum=instance.spectrum(s))
        marked = MarkedSet.for_config(int(np.rint(b.peak(0))), cfg, instance.min_gap)
        qual = selective_quality(b, marked)
        assert qual.eta0 <= bound.eta0 and qual.eta_excited_max <= bound.eta_excited_max


def test_circular_median_wraps():
    assert circular_median([1023, 0, 1, 1022, 2], 1024) % 1024 == 0
    assert circular_median([5, 6, 7], 1024) == 6


def test_anchor_estimate_recovers_peak(instance, rng):
    cfg = AncillaConfig.for_problem(instance, 10)
    h = instance.hamiltonian(0.4)
    op = PEAOperator(h, cfg, shift=instance.gamma)
    a = estimate_anchor(instance.ground(0.4), h, cfg, 15, rng, shift=instance.gamma)
    assert abs(a - op.peak(0)) <= 1.5


def test_exact_integer_spectrum_measurement_is_exact(rng):
    # eigenphases land exactly on ancilla indices 0, 1, 2: t = 1/16, l = 4
    h = np.diag([0.0, 1.0, 2.0]).astype(complex)
    cfg = AncillaConfig(4, 1 / 16)
    marked = MarkedSet.around(0, 0, 16)
    psi = random_state(3, rng)
    p_ground = abs(psi[0]) ** 2
    spec = eig_hermitian(h)
    seeds = range(2000)
    hits_pea = []
    for s in seeds:
        ok, post = pea_measurement(psi, h, cfg, marked, np.random.default_rng(s), spectrum=spec)
        hits_pea.append(ok)
        if ok:
            assert abs(abs(post[0]) - 1) < 1e-12
    assert abs(np.mean(hits_pea) - p_ground) < 4 * np.sqrt(p_ground * (1 - p_ground) / 2000)


def test_pea_measurement_close_to_projective(instance):
    cfg = AncillaConfig.for_problem(instance, 10)
    s = 0.6
    h = instance.hamiltonian(s)
    spec = instance.spectrum(s)
    op = PEAOperator(h, cfg, shift=instance.gamma, spectrum=spec)
    marked = MarkedSet.for_config(int(np.rint(op.peak(0))), cfg, instance.min_gap)
    eta = selective_quality(op, marked).eta
    psi = random_state(4, np.random.default_rng(1))
    p_exact = abs(np.vdot(spec.ground, psi)) ** 2
    trials = 10_000
    rng = np.random.default_rng(2)
    freq = np.mean([pea_measurement(psi, h, cfg, marked, rng, discriminator=op)[0] for _ in range(trials)])
    assert abs(freq - p_exact) <= 5 * eta
    g_freq = np.mean([pea_measurement(spec.ground, h, cfg, marked, rng, discriminator=op)[0]
                      for _ in range(2000)])
    assert g_freq >= 1 - 5 * eta


def test_make_oracle_argument_checks(instance, rng):
    with pytest.raises(ValueError):
        make_oracle(instance, 0.2, 0.01, mode="pea")
    with pytest.raises(ValueError):
        make_oracle(instance, 0.2, 0.01, mode="telepathy")
    cfg = AncillaConfig.for_problem(instance, 10)
    with pytest.raises(ValueError):
        make_oracle(instance, 0.2, 0.01, mode="pea_boosted", cfg=cfg, anchors=(1, 2), rng=rng)
