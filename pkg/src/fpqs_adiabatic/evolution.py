"""Measurement-driven adiabatic evolution, with and without fixed-point search between measurements.

A run starts in the ground state of H_0 and walks s = 0, 1/M, ..., 1.  At each
step it (optionally) applies the level-n fixed-point sequence built from the
selective rotations about the ground states of H_s and H_{s+1/M}, then measures
H_{s+1/M}.  Level 0 is the plain measure-only baseline.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fpqs import MAX_LEVEL, build_sequence, apply_sequence, query_count
from .qcore import fidelity, measure_eigenbasis
from .selective import (
    ADMISSIBLE_Q,
    AncillaConfig,
    MarkedSet,
    PEAOperator,
    PostSelectionFailure,
    estimate_anchor,
    make_oracle,
    pea_measurement,
)

ORACLE_MODES = ("exact", "pea", "pea_boosted")
MEASUREMENT_MODES = ("exact_projector", "pea_marked")


@dataclass
class CostLedger:
    """Exact counters standing in for running time."""

    u_applications: int = 0
    oracle_queries: int = 0
    measurements: int = 0
    pea_runs: int = 0
    restarts: int = 0
    selective_pea_runs: int = 0  # PEA runs spent inside approximate selective rotations
    anchor_pea_runs: int = 0  # PEA runs spent estimating anchors

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EvolutionConfig:
    M: int
    fpqs_level: int = 0
    oracle_mode: str = "exact"
    boost: tuple[int, int] | None = None
    measurement_mode: str = "exact_projector"
    seed: int = 0
    ancilla: AncillaConfig | None = None
    strict: bool = True
    max_restarts: int = 100
    anchor_repeats: int = 15
    fidelity_threshold: float = 1e-6

    @property
    def delta(self) -> float:
        return 1.0 / self.M

    @property
    def uses_pea(self) -> bool:
        return self.oracle_mode != "exact" or self.measurement_mode == "pea_marked"

    def validate(self, problem) -> None:
        if self.M < 1:
            raise ValueError("M must be a positive integer")
        if not 0 <= self.fpqs_level <= MAX_LEVEL:
            raise ValueError(f"fpqs_level must be in 0..{MAX_LEVEL}")
        if self.oracle_mode not in ORACLE_MODES:
            raise ValueError(f"oracle_mode must be one of {ORACLE_MODES}")
        if self.measurement_mode not in MEASUREMENT_MODES:
            raise ValueError(f"measurement_mode must be one of {MEASUREMENT_MODES}")
        if self.oracle_mode == "pea_boosted":
            if self.boost is None:
                raise ValueError("pea_boosted mode needs boost = (q, q')")
            if any(q not in ADMISSIBLE_Q for q in self.boost):
                raise ValueError(f"boost levels must be admissible (3^n - 1): {self.boost}")
        if self.anchor_repeats < 1:
            raise ValueError("anchor_repeats must be positive")
        if self.uses_pea:
            if self.ancilla is None:
                raise ValueError("PEA modes need an ancilla configuration")
            limit = problem.min_gap / (2 * problem.gamma)
            if self.delta > limit * (1 + 1e-12):
                raise ValueError(
                    f"step-size condition violated: delta = 1/M = {self.delta:.6g} "
                    f"> g/(2 Gamma) = {limit:.6g}"
                )
            self.ancilla.validate(problem.gamma, problem.min_gap)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "fpqs_level": self.fpqs_level,
            "oracle_mode": self.oracle_mode,
            "boost": list(self.boost) if self.boost is not None else None,
            "measurement_mode": self.measurement_mode,
            "seed": self.seed,
            "ancilla": self.ancilla.to_dict() if self.ancilla is not None else None,
            "strict": self.strict,
        }


@dataclass
class RunResult:
    success: bool
    final_fidelity: float
    per_step_success: list[bool]
    ledger: CostLedger
    config: EvolutionConfig
    abort_reason: str | None = None  # None, "measurement" or "post_selection"
    anchors: list[int] = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.abort_reason is None

    def to_record(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "success": bool(self.success),
            "final_fidelity": float(f"{self.final_fidelity:.12g}"),
            "ledger": self.ledger.to_dict(),
            "per_step": [bool(x) for x in self.per_step_success],
            "abort_reason": self.abort_reason,
            "anchors": [int(a) for a in self.anchors],
        }


# -- runs ---------------------------------------------------------------

def childs_run(problem, config: EvolutionConfig, rng: np.random.Generator | None = None) -> RunResult:
    """Measure-only baseline: measure H_{1/M}, H_{2/M}, ..., H_1 in turn."""
    if config.fpqs_level != 0:
        raise ValueError("the baseline run needs fpqs_level = 0")
    return evolve(problem, config, rng)


def fpqs_run(problem, config: EvolutionConfig, rng: np.random.Generator | None = None) -> RunResult:
    """Fixed-point search of level n >= 1 between consecutive measurements."""
    if config.fpqs_level < 1:
        raise ValueError("fpqs_run needs fpqs_level >= 1")
    return evolve(problem, config, rng)


def evolve(problem, config: EvolutionConfig, rng: np.random.Generator | None = None) -> RunResult:
    """Shared driver for both algorithms, so level 0 reproduces the baseline exactly.

    Strict mode stops at the first failed measurement or post-selection.
    Experiment mode restarts the whole run (from the ground state of H_0)
    until it completes or ``max_restarts`` is exhausted; the ledger
    accumulates over all attempts.
    """
    config.validate(problem)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    ledger = CostLedger()
    while True:
        result = _attempt(problem, config, rng, ledger)
        if config.strict or result.completed or ledger.restarts >= config.max_restarts:
            return result
        ledger.restarts += 1


def _wrap_diff(a: int, b: int, size: int) -> int:
    """a - b taken on the circle of ``size`` ancilla indices."""
    return (a - b + size // 2) % size - size // 2


def _attempt(problem, config: EvolutionConfig, rng, ledger: CostLedger) -> RunResult:
    M = config.M
    delta = config.delta
    cfg = config.ancilla
    shift = problem.gamma
    seq = build_sequence(config.fpqs_level)
    state = problem.ground(0.0)
    per_step: list[bool] = []
    anchors: list[int] = []
    abort = None

    def anchor_of(vec, s, return_state=False):
        before = ledger.pea_runs
        op = PEAOperator(problem.hamiltonian(s), cfg, shift=shift, ledger=ledger,
                         spectrum=problem.spectrum(s))
        out = estimate_anchor(vec, None, cfg, config.anchor_repeats, rng, operator=op,
                              return_state=return_state)
        ledger.anchor_pea_runs += ledger.pea_runs - before
        return out

    for r in range(M):
        s = r / M
        s_next = (r + 1) / M
        next_anchor = None
        if config.uses_pea:
            if r == 0:
                # H_0's ground state is re-preparable, so both anchors come from fresh copies
                current = anchor_of(problem.ground(0.0), 0.0)
                next_anchor = anchor_of(problem.ground(0.0), s_next)
                anchors.append(current)
            else:
                current, state = anchor_of(state, s, return_state=True)
                anchors.append(current)
                step = _wrap_diff(current, anchors[-2], cfg.dim)
                next_anchor = (current + step) % cfg.dim

        if config.fpqs_level > 0:
            oracle = make_oracle(
                problem, s, delta, mode=config.oracle_mode, cfg=cfg,
                boost=config.boost if config.oracle_mode == "pea_boosted" else None,
                anchors=(current, next_anchor) if config.uses_pea else None,
                rng=rng, ledger=ledger, shift=shift,
            )
            try:
                state, _ = apply_sequence(seq, state, provider=oracle)
            except PostSelectionFailure:
                abort = "post_selection"
                break

        ledger.measurements += 1
        if config.measurement_mode == "exact_projector":
            k, state, _ = measure_eigenbasis(state, problem.spectrum(s_next), rng)
            ok = k == 0
        else:
            marked = MarkedSet.for_config(next_anchor, cfg, problem.min_gap)
            ok, state = pea_measurement(
                state, problem.hamiltonian(s_next), cfg, marked, rng, shift=shift,
                ledger=ledger, spectrum=problem.spectrum(s_next),
            )
        per_step.append(bool(ok))
        if not ok:
            abort = "measurement"
            break

    final_fid = fidelity(problem.ground(1.0), state)
    if abort is not None:
        success = False
    elif config.oracle_mode == "exact" and config.measurement_mode == "exact_projector":
        success = final_fid >= 1.0 - config.fidelity_threshold
    else:
        # approximate modes: decide with one exact projective measurement of H_1
        k, _, _ = measure_eigenbasis(state, problem.spectrum(1.0), rng)
        success = k == 0
    return RunResult(bool(success), float(final_fid), per_step, ledger, config, abort, anchors)


# -- predictions and parameter choice -------------------------------------

def step_success_bound(ratio: float, M: int, level: int) -> float:
    """Per-step ground-state probability bound 1 - (ratio/M)^{2(q_n + 1)}."""
    return 1.0 - (ratio / M) ** (2 * (query_count(level) + 1))


def success_bound(ratio: float, M: int, level: int) -> float:
    """Overall bound (1 - (ratio/M)^{2(q_n+1)})^M, clipped to [0, 1]."""
    return max(0.0, step_success_bound(ratio, M, level)) ** M


@dataclass(frozen=True)
class Parameters:
    M: int
    n: int
    q: int
    q_prime: int
    predicted_queries: int
    predicted_success: float

    def to_dict(self) -> dict:
        return asdict(self)


def nearest_admissible_q(target: float) -> int:
    """Admissible q = 3^n - 1 nearest to ``target`` in log space, never below 2."""
    if target <= 2:
        return 2
    return min(ADMISSIBLE_Q, key=lambda q: abs(math.log(q) - math.log(target)))


def parameters_for_ratio(ratio: float, target_success: float = 0.5) -> Parameters:
    if not ratio > 1:
        raise ValueError("parameter choice needs Gamma/g > 1")
    if not 0 < target_success < 1:
        raise ValueError("target_success must lie in (0, 1)")
    q = nearest_admissible_q(math.log(ratio) / 2)
    n = ADMISSIBLE_Q[q]
    M = math.ceil(ratio ** (1 + 1 / (2 * q)))
    while success_bound(ratio, M, n) < target_success:
        M += 1
    return Parameters(M, n, q, q, q * M, success_bound(ratio, M, n))


def choose_parameters(problem, target_success: float = 0.5) -> Parameters:
    """Step count M, level n and boost levels (q, q') for an instance.

    q is the admissible value nearest ln(Gamma/g)/2; M starts at
    ceil((Gamma/g)^{1 + 1/(2q)}) and grows until the success bound reaches
    ``target_success``.
    """
    return parameters_for_ratio(problem.ratio, target_success)


def run_time_accounting(result: RunResult, problem=None) -> dict:
    """Factor the ledger into queries x PEA runs per query x U per PEA run."""
    led = result.ledger
    cfg = result.config
    report = {"raw": led.to_dict(), "total_u_applications": led.u_applications}
    report["selective_transformations"] = led.oracle_queries
    report["pea_runs_per_selective"] = (
        led.selective_pea_runs / led.oracle_queries if led.oracle_queries else 0.0
    )
    report["u_per_pea_run"] = cfg.ancilla.dim if cfg.ancilla is not None else 0
    if problem is not None:
        x = problem.ratio
        report["ratio"] = x
        report["reference_T"] = x**2 * math.log(x) ** 4 if x > 1 else float("nan")
    return report


# -- scaling search -------------------------------------------------------

def success_rate(problem, config: EvolutionConfig, trials: int, seed_base: int = 0,
                 stop_below: float | None = None) -> float:
    """Fraction of ``trials`` seeded runs that succeed.

    With ``stop_below`` set, counting stops once the rate provably cannot
    reach that value, and the partial lower rate is returned.
    """
    wins = 0
    for i in range(trials):
        rng = np.random.default_rng(seed_base + i)
        wins += evolve(problem, config, rng).success
        if stop_below is not None and (i + 1 - wins) > (1 - stop_below) * trials:
            return wins / trials
    return wins / trials


def minimal_steps(problem, level: int, trials: int = 500, threshold: float = 0.9,
                  seed_base: int = 0, max_M: int = 10_000) -> int:
    """Smallest M whose empirical exact-oracle success reaches ``threshold``."""
    for M in range(1, max_M + 1):
        cfg = EvolutionConfig(M=M, fpqs_level=level)
        if success_rate(problem, cfg, trials, seed_base, stop_below=threshold) >= threshold:
            return M
    raise RuntimeError(f"no M <= {max_M} reached success {threshold}")
