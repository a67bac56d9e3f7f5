"""Seeded property checks shared by the ``verify`` command and the acceptance tests.

Each check returns a :class:`CheckResult`; the ``worst`` field records the
statistic that decided pass/fail so reports can show the margin.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .evolution import CostLedger, EvolutionConfig, evolve
from .fpqs import apply_sequence, build_sequence, dense_v, failure_probability, pair_with_failure, query_count
from .interpolation import make_grover_instance, make_random_instance, overlap_bound_check
from .qcore import random_state
from .selective import (
    AncillaConfig,
    MarkedSet,
    PEAOperator,
    boosted_b,
    boosted_b2,
    eta_bounds,
    fejer_probabilities,
    phase_register,
    selective_quality,
    synthetic_discriminator,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- fixed-point search ----------------------------------------------------

@_timed
def check_fixed_point_identity(rng, n_pairs: int = 200, dims=(2, 16), tol: float = 1e-10) -> CheckResult:
    """One level of search maps the failure probability eps to eps^3."""
    seq = build_sequence(1)
    worst = 0.0
    for i in range(n_pairs):
        dim = int(rng.integers(dims[0], dims[1] + 1))
        eps = (i + rng.random()) / n_pairs
        beta = random_state(dim, rng)
        alpha = pair_with_failure(beta, eps, rng)
        eps = failure_probability(alpha, beta)
        out, _ = apply_sequence(seq, alpha, beta)
        worst = max(worst, abs(failure_probability(out, beta) - eps**3))
    return CheckResult("fixed-point identity eps -> eps^3", worst <= tol, worst,
                       f"{n_pairs} pairs, max |failure - eps^3| = {worst:.2e} (tol {tol:g})")


@_timed
def check_recursion(rng, levels=(1, 2, 3), n_pairs: int = 100, tol: float = 1e-9) -> CheckResult:
    """Level-n search gives eps^(3^n); the unrolled tokens agree with the matrix recursion."""
    worst = 0.0
    for n in levels:
        seq = build_sequence(n)
        for i in range(n_pairs):
            dim = int(rng.integers(2, 17))
            eps = (i + rng.random()) / n_pairs
            beta = random_state(dim, rng)
            alpha = pair_with_failure(beta, eps, rng)
            eps = failure_probability(alpha, beta)
            out, _ = apply_sequence(seq, alpha, beta)
            worst = max(worst, abs(failure_probability(out, beta) - eps ** (3**n)))
            if i < 5:
                worst = max(worst, float(np.max(np.abs(dense_v(n, alpha, beta) @ alpha - out))))
    return CheckResult(f"recursive search eps -> eps^(3^n), n = {list(levels)}", worst <= tol, worst,
                       f"max deviation {worst:.2e} (tol {tol:g})")


@_timed
def check_query_counts(levels=(1, 2, 3), expected=(2, 8, 26)) -> CheckResult:
    counts = [build_sequence(n).query_count for n in levels]
    ok = counts == list(expected) and all(query_count(n) == c for n, c in zip(levels, counts))
    return CheckResult("query counts 3^n - 1", ok, float(max(abs(a - b) for a, b in zip(counts, expected))),
                       f"levels {list(levels)} use {counts} queries")


# -- interpolation bounds --------------------------------------------------

@_timed
def check_perturbation_bound(rng, n_instances: int = 100, n_samples: int = 100, tol: float = 1e-9) -> CheckResult:
    """|<E_{s+d,0}|E_{s,0}>|^2 >= 1 - (d Gamma / g)^2 for d <= g / (2 Gamma)."""
    worst = np.inf
    violations = 0
    for i in range(n_instances):
        if i % 4 == 0:
            p = make_grover_instance(int(rng.integers(1, 5)), seed=int(rng.integers(1 << 30)))
        else:
            p = make_random_instance(int(rng.integers(2, 7)), 0.05, seed=int(rng.integers(1 << 30)))
        dmax = p.min_gap / (2 * p.gamma)
        for _ in range(n_samples):
            s = rng.random() * (1 - 1e-9)
            d = rng.uniform(0, min(dmax, 1 - s))
            lhs, rhs, _ = overlap_bound_check(p, s, d)
            margin = lhs - rhs
            worst = min(worst, margin)
            violations += margin < -tol
    return CheckResult("ground-state overlap perturbation bound", violations == 0, float(worst),
                       f"{n_instances * n_samples} samples, min(lhs - rhs) = {worst:.3e}, violations {violations}")


@_timed
def check_pea_tail(rng, n_phases: int = 200, ls=(6, 8, 10), cs=range(2, 9)) -> CheckResult:
    """Probability within c of the nearest index is at least 1 - 1/(2(c-1))."""
    worst = np.inf
    kernel_err = 0.0
    for _ in range(n_phases):
        phase = rng.random()
        for l in ls:
            n = 2**l
            probs = np.abs(phase_register(phase, l)) ** 2
            kernel_err = max(kernel_err, float(np.max(np.abs(probs - fejer_probabilities(phase, l)))))
            nearest = int(np.rint(n * phase)) % n
            dist = np.abs((np.arange(n) - nearest + n // 2) % n - n // 2)
            for c in cs:
                worst = min(worst, float(probs[dist <= c].sum() - (1 - 1 / (2 * (c - 1)))))
    ok = worst >= 0 and kernel_err < 1e-12
    return CheckResult("phase-estimation tail bound", ok, worst,
                       f"min margin {worst:.3e}; FFT vs closed-form kernel {kernel_err:.1e}")


@_timed
def check_eta_bounds(rng, n_instances: int = 50, l: int = 10, dim: int = 4, gap_floor: float = 0.4) -> CheckResult:
    """Plain PEA discriminator: eta0 <= 1/(2X) and eta_j <= 1/sqrt(X), X = 2^l g t."""
    worst = 0.0
    for _ in range(n_instances):
        p = make_random_instance(dim, gap_floor, seed=int(rng.integers(1 << 30)))
        cfg = AncillaConfig.for_problem(p, l)
        bound = eta_bounds(cfg, p.min_gap)
        s = rng.random()
        b = PEAOperator(p.hamiltonian(s), cfg, shift=p.gamma, spectrum=p.spectrum(s))
        marked = MarkedSet.for_config(int(np.rint(b.peak(0))), cfg, p.min_gap)
        qual = selective_quality(b, marked)
        worst = max(worst, qual.eta0 / bound.eta0, qual.eta_excited_max / bound.eta_excited_max)
    return CheckResult("discriminator accuracy eta bounds", worst <= 1.0, worst,
                       f"max measured/bound ratio {worst:.3f} over {n_instances} instances, l = {l}")


# -- boosting ------------------------------------------------------------

@_timed
def check_boosting(rng, etas=(0.02, 0.05, 0.1), q: int = 2, q_prime: int = 2, dim: int = 4, l: int = 6) -> CheckResult:
    """Boosted accuracy within a factor 2 of the predictions; at most 4 q q' base applications."""
    size = 2**l
    worst = 1.0
    cost_ok = True
    details = []
    for eta in etas:
        marked = MarkedSet.around(size // 3, 6, size)
        base = synthetic_discriminator([1 - eta] + [eta] * (dim - 1), marked, rng)
        b2 = boosted_b2(boosted_b(base, marked, q, eta), marked, q_prime, eta)
        qual = selective_quality(b2, marked)
        pred0 = (q_prime + 1) / 2 * (2 * eta) ** (q + 1)
        pred_exc = (np.sqrt(q + 1) * eta) ** (q_prime + 1)
        ratios = [qual.eta0 / pred0] + [gj / pred_exc for gj in qual.gamma_j[1:]]
        worst = max(worst, max(ratios), 1 / min(ratios))
        before = base.applications
        b2.apply(np.zeros((dim, size), dtype=complex))
        used = base.applications - before
        cost_ok &= used <= 4 * q * q_prime and used == b2.base_cost
        details.append(f"eta={eta}: eta0 {qual.eta0:.3e}/{pred0:.3e}, cost {used}")
    ok = worst <= 2.0 and cost_ok
    return CheckResult("boosted discriminator accuracy and cost", ok, worst, "; ".join(details))


# -- cost ledger ---------------------------------------------------------

@_timed
def check_ledger_identities(rng, l: int = 8) -> CheckResult:
    """Exact integer identities between ledger counters."""
    problems = []
    g = make_grover_instance(2, seed=int(rng.integers(1 << 30)))
    for n in (0, 1, 2):
        cfg = EvolutionConfig(M=5, fpqs_level=n)
        res = evolve(g, cfg, np.random.default_rng(int(rng.integers(1 << 30))))
        expected = len(res.per_step_success) * query_count(n)
        if res.ledger.oracle_queries != expected or res.ledger.u_applications != 0:
            problems.append(f"exact n={n}: queries {res.ledger.oracle_queries} != {expected}")
        if res.completed and res.ledger.oracle_queries != 5 * query_count(n):
            problems.append(f"exact n={n}: completed run used {res.ledger.oracle_queries} queries")
    p = make_random_instance(2, 0.8, seed=int(rng.integers(1 << 30)))
    anc = AncillaConfig.for_problem(p, l)
    M = int(np.ceil(2 * p.ratio))
    cfg = EvolutionConfig(M=M, fpqs_level=1, oracle_mode="pea_boosted", boost=(2, 2), ancilla=anc,
                          measurement_mode="pea_marked")
    res = evolve(p, cfg, np.random.default_rng(int(rng.integers(1 << 30))))
    led = res.ledger
    if led.u_applications != led.pea_runs * anc.dim:
        problems.append(f"u_applications {led.u_applications} != pea_runs * 2^l")
    ledger = CostLedger()
    b = PEAOperator(p.hamiltonian(0.5), anc, shift=p.gamma, ledger=ledger, spectrum=p.spectrum(0.5))
    marked = MarkedSet.for_config(int(np.rint(b.peak(0))), anc, p.min_gap)
    b2 = boosted_b2(boosted_b(b, marked, 2), marked, 2)
    b2.apply(np.zeros((2, anc.dim), dtype=complex))
    if ledger.pea_runs > 4 * 2 * 2:
        problems.append(f"boosted discriminator charged {ledger.pea_runs} PEA runs > 16")
    return CheckResult("cost ledger identities", not problems, float(len(problems)),
                       "; ".join(problems) or f"pea run: {led.pea_runs} runs, {led.u_applications} U; boosted B: {ledger.pea_runs} runs")


@_timed
def check_pea_operator(rng, l: int = 4, dim: int = 3) -> CheckResult:
    """Structural phase estimation agrees with the literal (I (x) F) C_U matrix."""
    p = make_random_instance(dim, 0.05, seed=int(rng.integers(1 << 30)))
    cfg = AncillaConfig.for_problem(p, l)
    s = rng.random()
    op = PEAOperator(p.hamiltonian(s), cfg, shift=p.gamma)
    dense = op.to_dense()
    psi = random_state(dim * cfg.dim, rng).reshape(dim, cfg.dim)
    err = float(np.max(np.abs(op.apply(psi).reshape(-1) - dense @ psi.reshape(-1))))
    err = max(err, float(np.max(np.abs(op.apply_adjoint(psi).reshape(-1) - dense.conj().T @ psi.reshape(-1)))))
    return CheckResult("phase-estimation operator matches dense construction", err < 1e-10, err,
                       f"max entry error {err:.1e}")


SUITES = {
    "fpqs": (check_fixed_point_identity, check_recursion, lambda rng: check_query_counts()),
    "pea": (check_pea_operator, check_pea_tail, check_ledger_identities),
    "boost": (check_boosting,),
    "bounds": (check_perturbation_bound, check_pea_tail, check_eta_bounds),
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(name)
    return [check(np.random.default_rng(seed + i)) for i, check in enumerate(SUITES[name])]
