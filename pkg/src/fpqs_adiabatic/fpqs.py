"""pi/3 fixed-point quantum search.

Token alphabet (application order, first-applied first)::

    A = R_alpha    a = R_alpha^dagger
    B = R_beta     b = R_beta^dagger

``build_sequence(1).tokens == "BA"`` because V_1 = R_alpha R_beta acts
right-to-left.  Every ``A``/``a`` rotates the *original* alpha axis; the
conjugated rotations of deeper levels come from the unrolled structure.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .qcore import as_state, fidelity, inner_product, random_state

PI_3 = np.pi / 3
MAX_LEVEL = 8
TOKENS = "ABab"
_DAGGER = {"A": "a", "a": "A", "B": "b", "b": "B"}


def selective_rotation(axis, angle: float = PI_3, dagger: bool = False) -> np.ndarray:
    """1 - (1 - e^{i angle}) |axis><axis|, or its adjoint."""
    chi = as_state(axis)
    phase = np.exp(-1j * angle) if dagger else np.exp(1j * angle)
    return np.eye(len(chi), dtype=complex) - (1.0 - phase) * np.outer(chi, chi.conj())


def rotate(state: np.ndarray, axis: np.ndarray, angle: float = PI_3, dagger: bool = False):
    """Apply the selective rotation about ``axis`` without forming the matrix."""
    phase = np.exp(-1j * angle) if dagger else np.exp(1j * angle)
    return state - (1.0 - phase) * axis * np.vdot(axis, state)


def failure_probability(state, beta) -> float:
    return 1.0 - fidelity(beta, state)


def fpqs_step(alpha, beta) -> np.ndarray:
    """R_alpha R_beta |alpha>: maps failure eps to eps^3."""
    alpha = as_state(alpha)
    beta = as_state(beta)
    if alpha.shape != beta.shape:
        raise ValueError("alpha and beta dimensions differ")
    return rotate(rotate(alpha, beta), alpha)


@dataclass(frozen=True)
class QuerySequence:
    level: int
    tokens: str

    @property
    def steps(self) -> list[str]:
        return list(self.tokens)

    @property
    def query_count(self) -> int:
        return len(self.tokens)

    def adjoint(self) -> "QuerySequence":
        return QuerySequence(self.level, adjoint_tokens(self.tokens))

    def __str__(self) -> str:
        return self.tokens


def adjoint_tokens(tokens: str) -> str:
    return "".join(_DAGGER[t] for t in reversed(tokens))


def build_sequence(level: int) -> QuerySequence:
    """Unroll V_{n+1} = V_n R_alpha V_n^dag R_beta V_n (V_0 = 1) into tokens."""
    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in 0..{MAX_LEVEL}")
    seq = ""
    for _ in range(level):
        # rightmost factor is applied first
        seq = seq + "B" + adjoint_tokens(seq) + "A" + seq
    return QuerySequence(level, seq)


def query_count(level: int) -> int:
    return 3**level - 1


def parse_sequence(text: str) -> QuerySequence:
    """Inverse of ``str(seq)``; whitespace is ignored."""
    tokens = "".join(text.split())
    if any(t not in TOKENS for t in tokens):
        raise ValueError(f"unknown token in {text!r}")
    n = 0
    while query_count(n) < len(tokens):
        n += 1
    if build_sequence(n).tokens != tokens:
        raise ValueError("token string is not a fixed-point sequence")
    return QuerySequence(n, tokens)


Provider = Callable[[str, np.ndarray], np.ndarray]


def exact_provider(alpha, beta, angle: float = PI_3) -> Provider:
    """Token -> exact selective rotation about alpha or beta."""
    alpha = as_state(alpha)
    beta = as_state(beta)
    axes = {"A": alpha, "a": alpha, "B": beta, "b": beta}

    def apply(token: str, state: np.ndarray) -> np.ndarray:
        return rotate(state, axes[token], angle, dagger=token.islower())

    return apply


def apply_sequence(seq: QuerySequence, alpha, beta=None, provider: Provider | None = None):
    """Run the unrolled sequence on |alpha>.  Returns (state, queries used)."""
    alpha = as_state(alpha)
    if provider is None:
        if beta is None:
            raise ValueError("need beta or an explicit provider")
        provider = exact_provider(alpha, beta)
    state = alpha.copy()
    for token in seq.tokens:
        state = provider(token, state)
    return state, seq.query_count


def dense_v(level: int, alpha, beta) -> np.ndarray:
    """V_n built literally from the matrix recursion; independent of the token path."""
    r_a = selective_rotation(alpha)
    r_b = selective_rotation(beta)
    v = np.eye(len(alpha), dtype=complex)
    for _ in range(level):
        v = v @ r_a @ v.conj().T @ r_b @ v
    return v


@dataclass(frozen=True)
class FixedPointReport:
    epsilon: float
    level: int
    predicted_failure: float
    observed_failure: float

    @property
    def error(self) -> float:
        return abs(self.observed_failure - self.predicted_failure)


def pair_with_failure(beta: np.ndarray, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """A random state alpha with 1 - |<beta|alpha>|^2 = epsilon (random phases)."""
    perp = random_state(len(beta), rng)
    perp = perp - beta * inner_product(beta, perp)
    perp /= np.linalg.norm(perp)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return phase * np.sqrt(1.0 - epsilon) * beta + np.sqrt(epsilon) * perp


def verify_fixed_point(dim: int, level: int, n_trials: int, rng: np.random.Generator, epsilons=None):
    """Random (alpha, beta) pairs with eps stratified over [0, 1]."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if epsilons is None:
        epsilons = (np.arange(n_trials) + rng.random(n_trials)) / n_trials
    seq = build_sequence(level)
    reports = []
    for eps in epsilons:
        beta = random_state(dim, rng)
        alpha = pair_with_failure(beta, float(eps), rng)
        eps_actual = failure_probability(alpha, beta)
        out, _ = apply_sequence(seq, alpha, beta)
        reports.append(
            FixedPointReport(eps_actual, level, eps_actual ** (3**level), failure_probability(out, beta))
        )
    return reports
