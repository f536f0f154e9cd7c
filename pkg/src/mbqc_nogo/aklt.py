"""Non-deterministic rotations on an AKLT chain, simulated in correlation space.

Measuring one qutrit applies one of three operators to the 2-dimensional
logical (correlation-space) state, each with probability 1/3:

    outcome 1: X exp(i Z theta / 2)
    outcome 2: XZ exp(i Z theta / 2)
    outcome 3: Z              (the rotation is lost)

The retry protocol spends up to ``r`` qutrits, stopping at the first
outcome in {1, 2}. It fails with probability ``3**-r``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from . import qmath
from .core import PauliByproduct, pauli_of_operator

OUTCOMES = (1, 2, 3)
SUCCESS_OUTCOMES = (1, 2)
FAILURE_OUTCOME = 3
MAX_R = 20
CERTIFY_MARGIN = 1e-12


@dataclass(frozen=True, eq=False)
class RotationInstrument:
    theta: float
    kraus: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def unitaries(self) -> tuple[np.ndarray, ...]:
        """The Kraus operators rescaled by sqrt(3)."""
        return tuple(np.sqrt(3) * k for k in self.kraus)

    def operator(self, outcome: int) -> np.ndarray:
        return self.unitaries[outcome - 1]

    def completeness_residual(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(total - qmath.I2)))


def instrument(theta: float) -> RotationInstrument:
    rot = qmath.z_rotation(theta)
    ops = (qmath.X @ rot, qmath.X @ qmath.Z @ rot, qmath.Z)
    return RotationInstrument(float(theta), tuple(op / np.sqrt(3) for op in ops))


@dataclass(frozen=True, eq=False)
class RetryRun:
    """One branch of the retry protocol.

    ``accumulated_operator`` is the ordered product of the per-attempt
    unitaries (latest attempt leftmost), phases kept.
    ``failure_operator`` equals it on failed runs and is ``None`` otherwise.
    """

    theta: float
    r: int
    outcomes: tuple[int, ...]
    probability: Fraction
    success: bool
    accumulated_operator: np.ndarray
    failure_operator: np.ndarray | None
    output_state: np.ndarray
    byproduct: PauliByproduct | None

    @property
    def attempts(self) -> int:
        return len(self.outcomes)

    def density(self) -> np.ndarray:
        return qmath.projector(self.output_state)


def failure_probability(r: int) -> Fraction:
    """Exact ``3**-r`` for ``1 <= r <= 20``."""
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= MAX_R:
        raise ValueError(f"r must be an integer in [1, {MAX_R}], got {r!r}")
    return Fraction(1, 3 ** int(r))


def _validate(r: int, logical_state) -> np.ndarray:
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ValueError(f"r must be a positive integer, got {r!r}")
    psi = np.asarray(logical_state, dtype=np.complex128).reshape(-1)
    if psi.shape != (2,) or not qmath.is_normalized(psi):
        raise ValueError("logical_state must be a normalized qubit vector")
    return psi


def _build_run(inst: RotationInstrument, r: int, psi: np.ndarray, outcomes: tuple[int, ...]) -> RetryRun:
    acc = reduce(lambda a, o: inst.operator(o) @ a, outcomes, qmath.I2.copy())
    success = outcomes[-1] in SUCCESS_OUTCOMES
    byproduct = None
    if success:
        byproduct = pauli_of_operator(acc @ qmath.z_rotation(inst.theta).conj().T)
    out = acc @ psi
    return RetryRun(
        theta=inst.theta,
        r=r,
        outcomes=outcomes,
        probability=Fraction(1, 3 ** len(outcomes)),
        success=success,
        accumulated_operator=acc,
        failure_operator=None if success else acc,
        output_state=out,
        byproduct=byproduct,
    )


def run_retry(
    theta: float,
    r: int,
    logical_state,
    outcomes: Sequence[int] | None = None,
    seed: int | None = None,
) -> RetryRun:
    """Follow the given outcomes, or sample them from ``seed``.

    ``outcomes`` must be a complete run: 3s followed by one success, or
    exactly ``r`` 3s.
    """
    psi = _validate(r, logical_state)
    inst = instrument(theta)
    if outcomes is None:
        rng = np.random.default_rng(seed)
        drawn: list[int] = []
        while len(drawn) < r:
            o = int(rng.integers(1, 4))
            drawn.append(o)
            if o in SUCCESS_OUTCOMES:
                break
        outcomes = tuple(drawn)
    else:
        outcomes = tuple(int(o) for o in outcomes)
        _check_run(outcomes, r)
    return _build_run(inst, r, psi, outcomes)


def _check_run(outcomes: tuple[int, ...], r: int) -> None:
    if not outcomes or len(outcomes) > r or any(o not in OUTCOMES for o in outcomes):
        raise ValueError(f"invalid outcome sequence {outcomes} for r={r}")
    if any(o != FAILURE_OUTCOME for o in outcomes[:-1]):
        raise ValueError("attempts stop at the first success")
    if outcomes[-1] == FAILURE_OUTCOME and len(outcomes) != r:
        raise ValueError("a failed run uses all r attempts")


def branch_outcomes(r: int) -> list[tuple[int, ...]]:
    """All complete runs in lexicographic order: (1,), (2,), (3, 1), ..., (3,)*r."""
    out = []
    for j in range(r):
        out.extend((FAILURE_OUTCOME,) * j + (o,) for o in SUCCESS_OUTCOMES)
    out.append((FAILURE_OUTCOME,) * r)
    return out


def enumerate_retry(theta: float, r: int, logical_state) -> list[RetryRun]:
    """Every branch of the retry protocol (``2r + 1`` runs covering all ``3**r`` outcome strings)."""
    psi = _validate(r, logical_state)
    inst = instrument(theta)
    return [_build_run(inst, r, psi, o) for o in branch_outcomes(r)]


def sample_retry(theta: float, r: int, logical_state, seed: int, shots: int) -> list[RetryRun]:
    """``shots`` independent runs from one generator seeded with ``seed``."""
    psi = _validate(r, logical_state)
    inst = instrument(theta)
    draws = np.random.default_rng(seed).integers(1, 4, size=(shots, r))
    cache: dict[tuple[int, ...], RetryRun] = {}
    out = []
    for row in draws:
        hits = np.flatnonzero(row != FAILURE_OUTCOME)
        stop = int(hits[0]) + 1 if hits.size else r
        key = tuple(int(o) for o in row[:stop])
        if key not in cache:
            cache[key] = _build_run(inst, r, psi, key)
        out.append(cache[key])
    return out


def exact_failure(runs: Sequence[RetryRun]) -> Fraction:
    return sum((run.probability for run in runs if not run.success), Fraction(0))


def retry_marginal(runs: Sequence[RetryRun]) -> np.ndarray:
    """Branch-averaged logical state (what a party without the outcomes holds)."""
    acc = np.zeros((2, 2), dtype=np.complex128)
    for run in sorted(runs, key=lambda run: run.outcomes):
        acc = acc + float(run.probability) * run.density()
    return acc


@dataclass(frozen=True)
class BoundResult:
    lhs: float
    rhs: float
    certified: bool


def _prefactor(r: int) -> float:
    f = Fraction(1, 3**r)
    return float(f / (1 - f))


def discussion_bound(U, V, sigma, r: int, F_U, F_V) -> BoundResult:
    """Compare the output gap against what the failure branches can hide.

    ``lhs = ||U s U^+ - V s V^+||_1`` and
    ``rhs = 3^-r / (1 - 3^-r) * (||F_V s F_V^+||_1 + ||F_U s F_U^+||_1)``.
    ``certified`` means ``lhs > rhs + 1e-12``: a byproduct-free resource of
    this kind would signal at this ``r``.
    """
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ValueError("r must be a positive integer")
    U, V, sigma = (np.asarray(m, dtype=np.complex128) for m in (U, V, sigma))
    F_U, F_V = np.asarray(F_U, dtype=np.complex128), np.asarray(F_V, dtype=np.complex128)
    if not (qmath.is_unitary(U) and qmath.is_unitary(V)):
        raise ValueError("U and V must be unitary")
    if not qmath.is_density(sigma):
        raise ValueError("sigma must be a density matrix")
    lhs = qmath.trace_norm(U @ sigma @ U.conj().T - V @ sigma @ V.conj().T)
    hidden = qmath.trace_norm(F_V @ sigma @ F_V.conj().T) + qmath.trace_norm(F_U @ sigma @ F_U.conj().T)
    rhs = _prefactor(int(r)) * hidden
    return BoundResult(lhs, rhs, lhs > rhs + CERTIFY_MARGIN)


def min_certifying_r(U, V, sigma) -> int | None:
    """Smallest ``r`` that certifies with unitary failure operators, or ``None`` if ``U sigma U^+ = V sigma V^+``."""
    U, V, sigma = (np.asarray(m, dtype=np.complex128) for m in (U, V, sigma))
    lhs = qmath.trace_norm(U @ sigma @ U.conj().T - V @ sigma @ V.conj().T)
    # the bound tends to 0 but certification also needs lhs above the margin
    if lhs <= CERTIFY_MARGIN:
        return None
    r = 1
    while not lhs > 2 * _prefactor(r) + CERTIFY_MARGIN:
        r += 1
    return r
