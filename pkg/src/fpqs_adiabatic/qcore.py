"""Dense numerical kernel: states, Hermitian/unitary matrices, spectra, measurement.

States and operators are plain numpy arrays (complex128).  Composite
registers use the system register as the slow (left) Kronecker factor, so a
system (x) ancilla state of shape ``(d * L,)`` reshapes to a ``(d, L)`` matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
PROJECTOR_TOL = 1e-9
DEGENERACY_RTOL = 1e-9


class DegenerateGroundStateError(ValueError):
    """Raised when a Hamiltonian's ground energy is (numerically) degenerate."""


def as_state(vec, normalize: bool = False) -> np.ndarray:
    psi = np.asarray(vec, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("zero vector is not a state")
    if normalize:
        return psi / norm
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"state is not normalized (norm={norm:.3e})")
    return psi


def basis_state(index: int, dim: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def uniform_state(dim: int) -> np.ndarray:
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with phase correction)."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def check_hermitian(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return h


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0))


def spectral_norm(h) -> float:
    """Largest |eigenvalue| of a Hermitian matrix."""
    return float(np.max(np.abs(np.linalg.eigvalsh(check_hermitian(h)))))


def inner_product(a, b) -> complex:
    """<a|b>, conjugating the first argument."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def fidelity(a, b) -> float:
    return abs(inner_product(a, b)) ** 2


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive.

    Ties (within 1e-12) go to the lowest index.
    """
    mags = np.abs(vec)
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return vec * (abs(vec[idx]) / vec[idx])


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, same order as eigenvalues
    degeneracy_tol: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def vector(self, j: int) -> np.ndarray:
        return self.eigenvectors[:, j]

    @property
    def ground(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def gap(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    def ground_is_degenerate(self) -> bool:
        return self.dim > 1 and self.gap <= self.degeneracy_tol

    @cached_property
    def eigenspaces(self) -> list[np.ndarray]:
        """Index groups of (numerically) equal eigenvalues, ascending."""
        groups = [[0]]
        for j in range(1, self.dim):
            if self.eigenvalues[j] - self.eigenvalues[groups[-1][0]] <= self.degeneracy_tol:
                groups[-1].append(j)
            else:
                groups.append([j])
        return [np.array(g) for g in groups]


def eig_hermitian(h, require_nondegenerate_ground: bool = False) -> SpectralData:
    """Full eigendecomposition, ascending eigenvalues, phase-fixed eigenvectors."""
    h = check_hermitian(h)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError("eigendecomposition failed to converge") from exc
    vecs = np.column_stack([fix_phase(vecs[:, j]) for j in range(len(vals))])
    scale = max(1.0, float(np.max(np.abs(vals))))
    spec = SpectralData(vals, vecs, DEGENERACY_RTOL * scale)
    if require_nondegenerate_ground and spec.ground_is_degenerate():
        raise DegenerateGroundStateError(
            f"degenerate ground state: E0={vals[0]:.12g}, E1={vals[1]:.12g}"
        )
    return spec


def ground_state(h) -> np.ndarray:
    return eig_hermitian(h, require_nondegenerate_ground=True).ground


def evolve_unitary(h, t: float, spectrum: SpectralData | None = None) -> np.ndarray:
    """exp(-i 2 pi H t) by exact eigendecomposition."""
    if t < 0:
        raise ValueError("evolution time must be nonnegative")
    spec = spectrum if spectrum is not None else eig_hermitian(h)
    v = spec.eigenvectors
    return (v * np.exp(-2j * np.pi * spec.eigenvalues * t)) @ v.conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two states or two operators (left factor is slow)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise ValueError("tensor needs two states or two operators")
    return np.kron(a, b)


def check_projectors(projectors, dim: int, tol: float = PROJECTOR_TOL) -> list[np.ndarray]:
    projs = [np.asarray(p, dtype=complex) for p in projectors]
    if not projs:
        raise ValueError("empty projector set")
    total = sum(projs)
    if np.max(np.abs(total - np.eye(dim))) > tol:
        raise ValueError("projectors do not sum to the identity")
    for i, p in enumerate(projs):
        if np.max(np.abs(p @ p - p)) > tol:
            raise ValueError(f"projector {i} is not idempotent")
        for q in projs[i + 1 :]:
            if np.max(np.abs(p @ q)) > tol:
                raise ValueError("projectors are not mutually orthogonal")
    return projs


def measure_projective(state, projectors, rng: np.random.Generator):
    """Von Neumann measurement.  Returns (outcome, collapsed state, probability)."""
    psi = as_state(state)
    projs = check_projectors(projectors, len(psi))
    branches = [p @ psi for p in projs]
    probs = np.array([np.vdot(b, b).real for b in branches])
    k = sample_index(probs, rng)
    return k, branches[k] / np.sqrt(probs[k]), float(probs[k])


def sample_index(probs, rng: np.random.Generator) -> int:
    """Inverse-CDF draw using a single uniform variate."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    # side="right" never lands on a zero-probability entry
    return min(int(np.searchsorted(cdf, u, side="right")), len(probs) - 1)


def measure_eigenbasis(state, spectrum: SpectralData, rng: np.random.Generator):
    """Measure the observable whose eigendecomposition is ``spectrum``.

    Degenerate eigenvalues are grouped into a single projector.  Returns
    (eigenspace index, collapsed state, probability); index 0 is the ground space.
    """
    psi = np.asarray(state)
    amps = spectrum.eigenvectors.conj().T @ psi
    groups = spectrum.eigenspaces
    probs = np.array([np.sum(np.abs(amps[g]) ** 2) for g in groups])
    k = sample_index(probs, rng)
    g = groups[k]
    collapsed = spectrum.eigenvectors[:, g] @ amps[g]
    return k, collapsed / np.linalg.norm(collapsed), float(probs[k])
