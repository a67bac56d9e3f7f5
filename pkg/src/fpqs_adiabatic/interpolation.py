"""Interpolated Hamiltonians H_s = (1-s) H0 + s H1, gap profiles and instance families."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    DegenerateGroundStateError,
    SpectralData,
    basis_state,
    check_hermitian,
    eig_hermitian,
    fidelity,
    random_hermitian,
    spectral_norm,
    uniform_state,
)

DEFAULT_GRID = 257


@dataclass(frozen=True, eq=False)
class InterpolationProblem:
    h0: np.ndarray
    h1: np.ndarray
    grid_resolution: int = DEFAULT_GRID
    family: str = "custom"
    seed: int | None = None
    family_params: dict = field(default_factory=dict)
    # derived on construction
    gamma: float = field(init=False)
    min_gap: float = field(init=False)
    gap_profile: np.ndarray = field(init=False, repr=False)
    _spectra: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        h0 = check_hermitian(self.h0)
        h1 = check_hermitian(self.h1)
        if h0.shape != h1.shape:
            raise ValueError("h0 and h1 must have the same dimension")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "gamma", spectral_norm(h0) + spectral_norm(h1))
        g, profile = gap_scan(self)
        object.__setattr__(self, "min_gap", g)
        object.__setattr__(self, "gap_profile", profile)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def ratio(self) -> float:
        """Gamma / g, the dimensionless hardness of the instance."""
        return self.gamma / self.min_gap

    def hamiltonian(self, s: float) -> np.ndarray:
        return interpolate(self, s)

    def spectrum(self, s: float) -> SpectralData:
        """Cached eigendecomposition of H_s; raises on a degenerate ground state."""
        key = float(s)
        spec = self._spectra.get(key)
        if spec is None:
            spec = eig_hermitian(interpolate(self, s), require_nondegenerate_ground=True)
            if len(self._spectra) < 4096:
                self._spectra[key] = spec
        return spec

    def ground(self, s: float) -> np.ndarray:
        return self.spectrum(s).ground

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "h0": _encode_matrix(self.h0),
            "h1": _encode_matrix(self.h1),
            "seed": self.seed,
            "family": self.family,
            "family_params": self.family_params,
            "grid_resolution": self.grid_resolution,
            "gamma": self.gamma,
            "min_gap": self.min_gap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "InterpolationProblem":
        h0 = _decode_matrix(doc["h0"])
        h1 = _decode_matrix(doc["h1"])
        if h0.shape != (doc["dim"], doc["dim"]):
            raise ValueError("dim field does not match matrix shape")
        return cls(
            h0,
            h1,
            grid_resolution=doc.get("grid_resolution", DEFAULT_GRID),
            family=doc.get("family", "custom"),
            seed=doc.get("seed"),
            family_params=doc.get("family_params", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "InterpolationProblem":
        return cls.from_dict(json.loads(text))


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def interpolate(p: InterpolationProblem, s: float) -> np.ndarray:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    if s == 0.0:
        return p.h0.copy()
    if s == 1.0:
        return p.h1.copy()
    return (1.0 - s) * p.h0 + s * p.h1


def gap_scan(p: InterpolationProblem, grid_resolution: int | None = None):
    """Minimum gap over a uniform s-grid (endpoints included) and the profile.

    The grid minimum is an upper bound on the true minimum gap.
    Returns (g, profile) with profile an (n, 2) array of (s, g_s).
    """
    n = p.grid_resolution if grid_resolution is None else grid_resolution
    if n < 2:
        raise ValueError("grid_resolution must be at least 2")
    grid = np.linspace(0.0, 1.0, n)
    gaps = np.empty(n)
    for i, s in enumerate(grid):
        spec = eig_hermitian(interpolate(p, s))
        if spec.ground_is_degenerate():
            raise DegenerateGroundStateError(f"degenerate ground state at s={s:.6g}")
        gaps[i] = spec.gap
    return float(gaps.min()), np.column_stack([grid, gaps])


def overlap_bound_check(p: InterpolationProblem, s: float, delta: float):
    """Exact ground-state overlap between H_s and H_{s+delta} vs 1 - (delta Gamma / g)^2."""
    if not (0.0 <= s <= 1.0 and 0.0 <= s + delta <= 1.0):
        raise ValueError("s and s + delta must lie in [0, 1]")
    lhs = fidelity(p.ground(s + delta), p.ground(s))
    rhs = 1.0 - (delta * p.gamma / p.min_gap) ** 2
    return lhs, rhs, bool(lhs >= rhs - 1e-9)


def perturbation_overlap(p: InterpolationProblem, s: float, delta: float) -> float:
    """Second-order perturbative estimate of |<E_{s+delta,0}|E_{s,0}>|^2."""
    if not (0.0 <= s <= 1.0 and 0.0 <= s + delta <= 1.0):
        raise ValueError("s and s + delta must lie in [0, 1]")
    spec = p.spectrum(s)  # degenerate excited levels are harmless, a degenerate ground is not
    v = spec.eigenvectors
    elems = v[:, 0].conj() @ (p.h0 - p.h1) @ v[:, 1:]
    denom = (spec.eigenvalues[0] - spec.eigenvalues[1:]) ** 2
    return float(1.0 - delta**2 * np.sum(np.abs(elems) ** 2 / denom))


# -- instance families -------------------------------------------------

def make_grover_instance(n_qubits: int, seed: int = 0, grid_resolution: int = DEFAULT_GRID):
    """H0 = I - |u><u| (uniform u), H1 = I - |w><w| (seeded basis state w).

    Gap profile is sqrt(1 - 4 (1 - 1/N) s (1 - s)); minimum 1/sqrt(N) at s = 1/2.
    """
    if not 1 <= n_qubits <= 6:
        raise ValueError("n_qubits must be in 1..6")
    dim = 2**n_qubits
    marked = int(np.random.default_rng(seed).integers(dim))
    u = uniform_state(dim)
    w = basis_state(marked, dim)
    eye = np.eye(dim, dtype=complex)
    return InterpolationProblem(
        eye - np.outer(u, u.conj()),
        eye - np.outer(w, w.conj()),
        grid_resolution=grid_resolution,
        family="grover",
        seed=seed,
        family_params={"n_qubits": n_qubits, "marked": marked},
    )


def grover_gap(n_states: int, s):
    return np.sqrt(1.0 - 4.0 * (1.0 - 1.0 / n_states) * s * (1.0 - s))


def make_random_instance(
    dim: int,
    min_gap_floor: float,
    seed: int = 0,
    grid_resolution: int = DEFAULT_GRID,
    max_tries: int = 1000,
):
    """Random dense Hermitian pair with ||H0|| = ||H1|| = 2 (so Gamma = 4).

    Rejection-sampled until the scanned minimum gap reaches ``min_gap_floor``.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    rng = np.random.default_rng(seed)
    for attempt in range(max_tries):
        a = random_hermitian(dim, rng)
        b = random_hermitian(dim, rng)
        a *= 2.0 / spectral_norm(a)
        b *= 2.0 / spectral_norm(b)
        try:
            p = InterpolationProblem(
                a,
                b,
                grid_resolution=grid_resolution,
                family="random",
                seed=seed,
                family_params={"dim": dim, "min_gap_floor": min_gap_floor, "attempt": attempt},
            )
        except DegenerateGroundStateError:
            continue
        if p.min_gap >= min_gap_floor:
            return p
    raise RuntimeError(f"no instance with gap >= {min_gap_floor} after {max_tries} tries")


def make_two_level_instance(gap: float, splitting: float = 1.0, grid_resolution: int = DEFAULT_GRID):
    """Avoided crossing with a dialable minimum gap.

    H_s = (gap/2) X + (splitting/2)(1 - 2s) Z, so g_s = sqrt(gap^2 + splitting^2 (1-2s)^2)
    and the minimum ``gap`` sits at s = 1/2.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    return InterpolationProblem(
        gap / 2 * x + splitting / 2 * z,
        gap / 2 * x - splitting / 2 * z,
        grid_resolution=grid_resolution,
        family="two_level",
        family_params={"gap": gap, "splitting": splitting},
    )


def make_instance(family: str, params: dict, seed: int = 0, grid_resolution: int = DEFAULT_GRID):
    """Dispatch by family name (used by the experiment runner)."""
    if family == "grover":
        return make_grover_instance(int(params["n_qubits"]), seed=seed, grid_resolution=grid_resolution)
    if family == "random":
        return make_random_instance(
            int(params["dim"]), float(params["min_gap_floor"]), seed=seed, grid_resolution=grid_resolution
        )
    if family == "two_level":
        return make_two_level_instance(
            float(params["gap"]), float(params.get("splitting", 1.0)), grid_resolution=grid_resolution
        )
    raise ValueError(f"unknown instance family {family!r}")
