"""Approximate selective rotations of unknown ground states.

A *discriminator* B acts on system (x) ancilla and, for system eigenstates
|E_j>, sends the uniform ancilla state |e> close to the marked subspace
(j = 0) or the unmarked subspace (j != 0).  Register states are handled as
``(d, L)`` matrices ``Psi[i, z]`` (system index i, ancilla index z), so an
ancilla operator A acts as ``Psi @ A.T``.

Discriminators expose ``apply(Psi)`` / ``apply_adjoint(Psi)`` and an
``applications`` counter.  The phase-estimation operator is applied
structurally (eigenbasis phases followed by an FFT along the ancilla axis);
``to_dense`` builds the literal matrix for small registers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fpqs import PI_3, adjoint_tokens, build_sequence
from .qcore import (
    SpectralData,
    as_state,
    eig_hermitian,
    evolve_unitary,
    random_unitary,
    sample_index,
    uniform_state,
)

MAX_L = 12
ADMISSIBLE_Q = {3**n - 1: n for n in range(1, 6)}
BOOST_CONDITION = 0.2  # (q + 1) * eta^2 must not exceed this


class PostSelectionFailure(RuntimeError):
    """The ancilla was not found back in |e> after an approximate rotation."""


# -- configuration -----------------------------------------------------

@dataclass(frozen=True)
class AncillaConfig:
    l: int
    t: float

    def __post_init__(self):
        if not 1 <= self.l <= MAX_L:
            raise ValueError(f"l must be in 1..{MAX_L}")
        if self.t <= 0:
            raise ValueError("t must be positive")

    @property
    def dim(self) -> int:
        return 2**self.l

    @classmethod
    def for_problem(cls, problem, l: int) -> "AncillaConfig":
        """Largest t allowed uniformly in s: t = 1 / (2 pi Gamma)."""
        return cls(l, 1.0 / (2 * np.pi * problem.gamma))

    def separation(self, g: float) -> float:
        """2^l g t, the ancilla-index distance between ground and excited peaks."""
        return self.dim * g * self.t

    def marked_width(self, g: float) -> int:
        return int(math.floor(self.separation(g) / 2))

    def validate(self, gamma: float, g: float, min_separation: float = 8.0) -> None:
        if self.t > 1.0 / (2 * np.pi * gamma) * (1 + 1e-12):
            raise ValueError("evolution time violates t <= 1/(2 pi Gamma)")
        if self.separation(g) < min_separation:
            raise ValueError(
                f"ancilla too small: 2^l g t = {self.separation(g):.3g} < {min_separation}"
            )

    def to_dict(self) -> dict:
        return {"l": self.l, "t": self.t}


@dataclass(frozen=True)
class MarkedSet:
    """Contiguous block of ancilla indices (mod 2^l) around an anchor estimate.

    Members are ``anchor - offset, ..., anchor - offset + width``.
    """

    anchor: int
    width: int
    size: int
    offset: int = 2

    def __post_init__(self):
        if self.width < 0 or self.width + 1 > self.size:
            raise ValueError("marked width out of range")

    @classmethod
    def around(cls, anchor: int, width: int, size: int) -> "MarkedSet":
        """Window of ``width`` centred on the anchor, starting at least 2 below it
        when the window is wide enough to allow that."""
        width = int(width)
        return cls(int(anchor) % size, width, size, min(width, max(2, width // 2)))

    @classmethod
    def for_config(cls, anchor: int, cfg: AncillaConfig, g: float) -> "MarkedSet":
        return cls.around(anchor, cfg.marked_width(g), cfg.dim)

    @property
    def start(self) -> int:
        return (self.anchor - self.offset) % self.size

    @property
    def members(self) -> np.ndarray:
        return (self.start + np.arange(self.width + 1)) % self.size

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.size, dtype=bool)
        m[self.members] = True
        return m

    def __contains__(self, k) -> bool:
        return bool((int(k) - self.start) % self.size <= self.width)

    def to_dict(self) -> dict:
        return {"anchor": self.anchor, "width": self.width, "size": self.size, "offset": self.offset}


@dataclass(frozen=True)
class ApproxQuality:
    eta0: float
    eta_excited_max: float
    eta: float
    gamma_j: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu_j: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))


def eta_bounds(cfg: AncillaConfig, g: float) -> ApproxQuality:
    """PEA accuracy bounds eta0 <= 1/(2X), eta_j <= 1/sqrt(X), X = 2^l g t."""
    x = cfg.separation(g)
    if x <= 1:
        raise ValueError("separation condition 2^l g t > 1 violated")
    eta0 = 1.0 / (2 * x)
    eta_exc = 1.0 / np.sqrt(x)
    return ApproxQuality(eta0, eta_exc, max(eta0, eta_exc))


# -- Fourier transform and controlled powers ---------------------------

def phase_register(phase: float, l: int) -> np.ndarray:
    """Ancilla amplitudes left by phase estimation of an eigenphase ``phase`` (in turns).

    The distribution peaks at k = 2^l * phase (mod 2^l).
    """
    z = np.arange(2**l)
    return apply_qft(np.exp(-2j * np.pi * phase * z) / np.sqrt(2**l))


def fejer_probabilities(phase: float, l: int) -> np.ndarray:
    """Closed-form |<k|phase>|^2 = sin^2(pi L d) / (L^2 sin^2(pi d)), d = phase - k/L."""
    n = 2**l
    d = phase - np.arange(n) / n
    num = np.sin(np.pi * n * d) ** 2
    den = (n * np.sin(np.pi * d)) ** 2
    exact = np.isclose(np.sin(np.pi * d), 0.0, atol=1e-15)
    return np.where(exact, 1.0, num / np.where(exact, 1.0, den))


def qft(l: int) -> np.ndarray:
    """F|z> = 2^{-l/2} sum_k exp(2 pi i k z / 2^l) |k>."""
    if not 1 <= l <= MAX_L:
        raise ValueError(f"l must be in 1..{MAX_L}")
    n = 2**l
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def apply_qft(psi: np.ndarray) -> np.ndarray:
    """F along the last (ancilla) axis; matches ``qft`` entrywise."""
    return np.fft.ifft(psi, axis=-1, norm="ortho")


def apply_qft_adjoint(psi: np.ndarray) -> np.ndarray:
    return np.fft.fft(psi, axis=-1, norm="ortho")


def controlled_power(u: np.ndarray, l: int) -> np.ndarray:
    """sum_z U^z (x) |z><z| on system (x) ancilla (dense)."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    n = 2**l
    out = np.zeros((d * n, d * n), dtype=complex)
    power = np.eye(d, dtype=complex)
    for z in range(n):
        idx = np.arange(d) * n + z
        out[np.ix_(idx, idx)] = power
        power = u @ power
    return out


# -- discriminators ----------------------------------------------------

def ancilla_e(size: int) -> np.ndarray:
    return uniform_state(size)


def _charge(ledger, pea_runs: int, u_per_run: int) -> None:
    if ledger is not None:
        ledger.pea_runs += pea_runs
        ledger.u_applications += pea_runs * u_per_run


class PEAOperator:
    """P = (I (x) F) C_U with U = exp(-2 pi i (H + shift) t).

    Each application (or adjoint) is one phase-estimation run and charges the
    ledger 2^l applications of U.
    """

    def __init__(self, h_s, cfg: AncillaConfig, shift: float = 0.0, ledger=None,
                 spectrum: SpectralData | None = None):
        self.cfg = cfg
        self.shift = float(shift)
        self.spectrum = spectrum if spectrum is not None else eig_hermitian(h_s)
        norm = float(np.max(np.abs(self.spectrum.eigenvalues)))
        if norm > 0 and cfg.t * 2 * np.pi * norm > 1 + 1e-12:
            raise ValueError("evolution time violates t <= 1/(2 pi ||H_s||)")
        energies = self.spectrum.eigenvalues + self.shift
        if np.min(energies) < -1e-12:
            raise ValueError("shifted Hamiltonian must be positive semidefinite")
        self.energies = energies
        z = np.arange(cfg.dim)
        self._phases = np.exp(-2j * np.pi * np.outer(energies, z) * cfg.t)
        self.ledger = ledger
        self.applications = 0

    @property
    def basis(self) -> np.ndarray:
        return self.spectrum.eigenvectors

    @property
    def size(self) -> int:
        return self.cfg.dim

    def peak(self, j: int = 0) -> float:
        """2^l E_j t, the (fractional) ancilla index the j-th eigenphase maps to."""
        return self.cfg.dim * self.energies[j] * self.cfg.t

    def apply(self, psi: np.ndarray) -> np.ndarray:
        self.applications += 1
        _charge(self.ledger, 1, self.cfg.dim)
        v = self.basis
        c = v.conj().T @ psi
        return v @ apply_qft(c * self._phases)

    def apply_adjoint(self, psi: np.ndarray) -> np.ndarray:
        self.applications += 1
        _charge(self.ledger, 1, self.cfg.dim)
        v = self.basis
        c = v.conj().T @ psi
        return v @ (apply_qft_adjoint(c) * self._phases.conj())

    def to_dense(self) -> np.ndarray:
        d = self.basis.shape[0]
        h = (self.basis * self.spectrum.eigenvalues) @ self.basis.conj().T
        u = evolve_unitary(h + self.shift * np.eye(d), self.cfg.t)
        return np.kron(np.eye(d), qft(self.cfg.l)) @ controlled_power(u, self.cfg.l)


def pea_operator(h_s, cfg: AncillaConfig, shift: float = 0.0, ledger=None) -> PEAOperator:
    return PEAOperator(h_s, cfg, shift=shift, ledger=ledger)


class BlockDiscriminator:
    """sum_j |v_j><v_j| (x) B_j with explicit ancilla blocks (synthetic harness)."""

    def __init__(self, basis: np.ndarray, blocks: np.ndarray):
        self.basis = np.asarray(basis, dtype=complex)
        self.blocks = np.asarray(blocks, dtype=complex)
        self.size = self.blocks.shape[-1]
        self.applications = 0

    def apply(self, psi):
        self.applications += 1
        c = self.basis.conj().T @ psi
        return self.basis @ np.einsum("jkz,jz->jk", self.blocks, c)

    def apply_adjoint(self, psi):
        self.applications += 1
        c = self.basis.conj().T @ psi
        return self.basis @ np.einsum("jzk,jz->jk", self.blocks.conj(), c)

    def to_dense(self) -> np.ndarray:
        d = self.basis.shape[0]
        out = np.zeros((d * self.size, d * self.size), dtype=complex)
        for j in range(d):
            proj = np.outer(self.basis[:, j], self.basis[:, j].conj())
            out += np.kron(proj, self.blocks[j])
        return out


class DenseDiscriminator:
    """Any unitary on system (x) ancilla given as a dense matrix."""

    def __init__(self, matrix: np.ndarray, system_dim: int):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.d = system_dim
        self.size = self.matrix.shape[0] // system_dim
        self.applications = 0

    def apply(self, psi):
        self.applications += 1
        return (self.matrix @ psi.reshape(-1)).reshape(self.d, self.size)

    def apply_adjoint(self, psi):
        self.applications += 1
        return (self.matrix.conj().T @ psi.reshape(-1)).reshape(self.d, self.size)


def block_with_overlap(gamma: float, marked: MarkedSet, rng: np.random.Generator) -> np.ndarray:
    """Random ancilla unitary with B|e> = gamma |m> + sqrt(1 - gamma^2) |m_perp>.

    |m>, |m_perp> are random unit vectors in the marked / unmarked subspaces.
    """
    n = marked.size
    mask = marked.mask
    m = np.zeros(n, dtype=complex)
    m[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    m /= np.linalg.norm(m)
    mp = np.zeros(n, dtype=complex)
    mp[~mask] = rng.normal(size=(~mask).sum()) + 1j * rng.normal(size=(~mask).sum())
    mp /= np.linalg.norm(mp)
    target = gamma * m + np.sqrt(max(0.0, 1.0 - gamma**2)) * mp
    # unitary with first column = target, then map |e> to |0> with F^dagger
    w = random_unitary(n, rng)
    w[:, 0] = target
    q, r = np.linalg.qr(w)
    q = q * (np.diag(r) / np.abs(np.diag(r)))  # q[:, 0] == target exactly up to rounding
    return q @ qft(int(round(np.log2(n)))).conj().T


def synthetic_discriminator(gammas, marked: MarkedSet, rng: np.random.Generator, basis=None):
    """Block discriminator whose j-th block has marked overlap gammas[j]."""
    gammas = np.asarray(gammas, dtype=float)
    d = len(gammas)
    if basis is None:
        basis = random_unitary(d, rng)
    blocks = np.stack([block_with_overlap(g, marked, rng) for g in gammas])
    return BlockDiscriminator(basis, blocks)


# -- ancilla-only rotations --------------------------------------------

def rotate_e(psi: np.ndarray, omega: float) -> np.ndarray:
    """Selective rotation of |e> on the ancilla: 1 - (1 - e^{i omega}) |e><e|."""
    e = ancilla_e(psi.shape[-1])
    return psi - (1 - np.exp(1j * omega)) * np.outer(psi @ e.conj(), e)


def rotate_subspace(psi: np.ndarray, mask: np.ndarray, omega: float) -> np.ndarray:
    out = psi.copy()
    out[:, mask] *= np.exp(1j * omega)
    return out


class BoostedDiscriminator:
    """B(q) = V_n B with FPQS driving B_j|e> towards the marked subspace
    (``toward="marked"``) or the unmarked one (``toward="unmarked"``).

    alpha-rotations are B R_e B^dagger; beta-rotations are exact phase
    rotations of the target subspace.
    """

    def __init__(self, inner, marked: MarkedSet, q: int, toward: str = "marked"):
        if q not in ADMISSIBLE_Q:
            raise ValueError(f"q must be of the form 3^n - 1, got {q}")
        if toward not in ("marked", "unmarked"):
            raise ValueError("toward must be 'marked' or 'unmarked'")
        self.inner = inner
        self.marked = marked
        self.q = q
        self.toward = toward
        self.sequence = build_sequence(ADMISSIBLE_Q[q])
        mask = marked.mask
        self._target = mask if toward == "marked" else ~mask
        self.size = inner.size
        self.applications = 0

    @property
    def basis(self):
        return self.inner.basis

    def _token(self, token: str, psi: np.ndarray) -> np.ndarray:
        omega = PI_3 if token.isupper() else -PI_3
        if token in "Aa":
            return self.inner.apply(rotate_e(self.inner.apply_adjoint(psi), omega))
        return rotate_subspace(psi, self._target, omega)

    def apply(self, psi):
        self.applications += 1
        psi = self.inner.apply(psi)
        for token in self.sequence.tokens:
            psi = self._token(token, psi)
        return psi

    def apply_adjoint(self, psi):
        self.applications += 1
        for token in adjoint_tokens(self.sequence.tokens):
            psi = self._token(token, psi)
        return self.inner.apply_adjoint(psi)

    @property
    def base_cost(self) -> int:
        """Applications of the innermost discriminator per apply of this one."""
        inner = getattr(self.inner, "base_cost", 1)
        alpha_tokens = sum(t in "Aa" for t in self.sequence.tokens)
        return inner * (2 * alpha_tokens + 1)

    def to_dense(self) -> np.ndarray:
        inner = self.inner.to_dense()
        d = self.basis.shape[0]
        n = self.size
        e = ancilla_e(n)
        eye_d = np.eye(d)
        r_e = {
            s: np.kron(eye_d, np.eye(n) - (1 - np.exp(1j * s * PI_3)) * np.outer(e, e.conj()))
            for s in (1, -1)
        }
        target = self._target.astype(float)
        r_t = {s: np.kron(eye_d, np.diag(np.where(target > 0, np.exp(1j * s * PI_3), 1.0))) for s in (1, -1)}
        out = inner
        for token in self.sequence.tokens:
            sign = 1 if token.isupper() else -1
            if token in "Aa":
                op = inner @ r_e[sign] @ inner.conj().T
            else:
                op = r_t[sign]
            out = op @ out
        return out


def _check_boost(q: int, eta: float | None) -> None:
    if q not in (2, 8, 26):
        raise ValueError(f"q must be one of 2, 8, 26, got {q}")
    if eta is not None and (q + 1) * eta**2 > BOOST_CONDITION:
        raise ValueError(f"boost condition violated: (q+1) eta^2 = {(q + 1) * eta**2:.3g} > {BOOST_CONDITION}")


def boosted_b(b, marked: MarkedSet, q: int, eta: float | None = None) -> BoostedDiscriminator:
    """First boosting layer: ground overlap failure 2 eta0 -> (2 eta0)^(q+1)."""
    _check_boost(q, eta)
    return BoostedDiscriminator(b, marked, q, toward="marked")


def boosted_b2(b_q: BoostedDiscriminator, marked: MarkedSet, q_prime: int,
               eta: float | None = None) -> BoostedDiscriminator:
    """Second layer, towards the unmarked subspace; suppresses excited leakage."""
    if not isinstance(b_q, BoostedDiscriminator) or b_q.toward != "marked":
        raise ValueError("boosted_b2 expects the output of boosted_b")
    _check_boost(q_prime, None)
    _check_boost(b_q.q, eta)  # the small-leakage regime is set by the first layer
    return BoostedDiscriminator(b_q, marked, q_prime, toward="unmarked")


# -- the approximate selective rotation --------------------------------

def approx_selective(psi, b, marked: MarkedSet, omega: float, rng: np.random.Generator):
    """Attach |e>, apply B, phase the marked subspace by omega, apply B^dagger,
    then measure the ancilla in {|e><e|, 1 - |e><e|}.

    Returns ``(success, state, probability)``.  On success ``state`` is the
    normalized system state; on failure it is the normalized (d, L) register
    left in the complement, for diagnostics.
    """
    psi = as_state(psi)
    n = marked.size
    e = ancilla_e(n)
    reg = b.apply(np.outer(psi, e))
    reg = rotate_subspace(reg, marked.mask, omega)
    reg = b.apply_adjoint(reg)
    sys = reg @ e.conj()
    p = float(np.vdot(sys, sys).real)
    if rng.random() < p:
        return True, sys / np.sqrt(p), p
    rest = reg - np.outer(sys, e)
    return False, rest / np.linalg.norm(rest), 1.0 - p


def selective_quality(b, marked: MarkedSet, omega: float = PI_3) -> ApproxQuality:
    """Per-eigenstate marked overlaps gamma_j, eta_j and mu_j of a block discriminator.

    gamma_j = ||Pi_A B_j|e>||; eta_0 = 1 - gamma_0, eta_j = gamma_j (j != 0);
    mu_j = 1 + gamma_j^2 (e^{i omega} - 1).
    """
    basis = b.basis
    e = ancilla_e(marked.size)
    mask = marked.mask
    gam = np.empty(basis.shape[1])
    for j in range(basis.shape[1]):
        out = b.apply(np.outer(basis[:, j], e))
        gam[j] = np.sqrt(np.sum(np.abs(out[:, mask]) ** 2))
    mu = 1 + gam**2 * (np.exp(1j * omega) - 1)
    eta0 = float(1 - gam[0])
    eta_exc = float(gam[1:].max()) if len(gam) > 1 else 0.0
    return ApproxQuality(eta0, eta_exc, max(eta0, eta_exc), gam, mu)


# -- sampling and anchors ----------------------------------------------

def pea_sample(state, b, rng: np.random.Generator):
    """Run B on state (x) |e> and measure the ancilla in the computational basis.

    Returns (outcome k, collapsed system state).
    """
    n = b.size
    reg = b.apply(np.outer(state, ancilla_e(n)))
    probs = np.sum(np.abs(reg) ** 2, axis=0)
    k = sample_index(probs, rng)
    col = reg[:, k]
    return k, col / np.linalg.norm(col)


def circular_median(outcomes, size: int) -> int:
    """Median of ancilla outcomes taken on the circle, unwrapped around the mode."""
    outcomes = np.asarray(outcomes, dtype=int)
    values, counts = np.unique(outcomes, return_counts=True)
    ref = int(values[np.argmax(counts)])
    unwrapped = (outcomes - ref + size // 2) % size - size // 2
    return int(round(float(np.median(unwrapped)))) + ref


def estimate_anchor(ground, h_s, cfg: AncillaConfig, repeats: int, rng: np.random.Generator,
                    shift: float = 0.0, ledger=None, operator: PEAOperator | None = None,
                    return_state: bool = False):
    """Robust PEA estimate of round(2^l E_0 t) from repeated runs on the ground state."""
    if repeats < 1:
        raise ValueError("repeats must be positive")
    op = operator if operator is not None else PEAOperator(h_s, cfg, shift=shift, ledger=ledger)
    state = as_state(ground, normalize=True)
    outcomes = []
    for _ in range(repeats):
        k, state = pea_sample(state, op, rng)
        outcomes.append(k)
    anchor = circular_median(outcomes, cfg.dim) % cfg.dim
    return (anchor, state) if return_state else anchor


# -- oracle provider for the evolution ---------------------------------

class SelectiveOracle:
    """Maps FPQS tokens to (approximate) selective rotations for one step s -> s + delta.

    Token ``A``/``a`` rotates the ground state of H_s, ``B``/``b`` that of H_{s+delta}.
    """

    def __init__(self, mode: str, axes=None, discriminators=None, marked=None,
                 rng=None, ledger=None, config=None, boost=None):
        self.mode = mode
        self.axes = axes
        self.discriminators = discriminators
        self.marked = marked
        self.rng = rng
        self.ledger = ledger
        self.config = config
        self.boost = boost

    def __call__(self, token: str, state: np.ndarray) -> np.ndarray:
        omega = PI_3 if token.isupper() else -PI_3
        which = 0 if token in "Aa" else 1
        if self.mode == "exact":
            axis = self.axes[which]
            out = state - (1 - np.exp(1j * omega)) * axis * np.vdot(axis, state)
            if self.ledger is not None:
                self.ledger.oracle_queries += 1
            return out
        before = self.ledger.pea_runs if self.ledger is not None else 0
        ok, out, _ = approx_selective(state, self.discriminators[which], self.marked[which], omega, self.rng)
        if self.ledger is not None:
            self.ledger.oracle_queries += 1
            self.ledger.selective_pea_runs += self.ledger.pea_runs - before
        if not ok:
            raise PostSelectionFailure(f"ancilla post-selection failed on token {token}")
        return out


def make_discriminator(h_s, cfg: AncillaConfig, marked: MarkedSet, boost=None, shift: float = 0.0,
                       ledger=None, spectrum=None):
    b = PEAOperator(h_s, cfg, shift=shift, ledger=ledger, spectrum=spectrum)
    if boost is None:
        return b
    q, q_prime = boost
    return boosted_b2(boosted_b(b, marked, q), marked, q_prime)


def make_oracle(problem, s: float, delta: float, mode: str = "exact", cfg: AncillaConfig | None = None,
                boost=None, anchors=None, rng=None, ledger=None, shift: float | None = None):
    """Bundle the selective-rotation set for the step s -> s + delta."""
    s_next = min(1.0, s + delta)
    if mode == "exact":
        return SelectiveOracle(
            "exact", axes=(problem.ground(s), problem.ground(s_next)), ledger=ledger
        )
    if mode not in ("pea", "pea_boosted"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    if cfg is None or anchors is None:
        raise ValueError("pea oracle modes need an ancilla config and anchors")
    if mode == "pea_boosted" and boost is None:
        raise ValueError("pea_boosted mode needs (q, q') boost levels")
    if rng is None:
        raise ValueError("pea oracle modes need an rng")
    shift = problem.gamma if shift is None else shift
    marked = tuple(MarkedSet.for_config(a, cfg, problem.min_gap) for a in anchors)
    discs = tuple(
        make_discriminator(
            problem.hamiltonian(x), cfg, m, boost if mode == "pea_boosted" else None,
            shift=shift, ledger=ledger, spectrum=problem.spectrum(x),
        )
        for x, m in zip((s, s_next), marked)
    )
    return SelectiveOracle(mode, discriminators=discs, marked=marked, rng=rng, ledger=ledger,
                           config=cfg, boost=boost)


def pea_measurement(state, h_s, cfg: AncillaConfig, marked: MarkedSet, rng: np.random.Generator,
                    shift: float = 0.0, ledger=None, discriminator=None, spectrum=None):
    """Approximate ground/excited measurement of H_s via one discriminator run.

    The ancilla is read in the computational basis; membership of the
    outcome in the marked set decides ``in_ground``.  Returns
    (in_ground, collapsed system state).
    """
    b = discriminator
    if b is None:
        b = PEAOperator(h_s, cfg, shift=shift, ledger=ledger, spectrum=spectrum)
    k, collapsed = pea_sample(as_state(state, normalize=True), b, rng)
    return k in marked, collapsed

