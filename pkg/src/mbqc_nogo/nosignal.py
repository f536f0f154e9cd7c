"""Two-party audit of measurement programs.

Alice holds the measured sites ``M`` and runs one of several programs
(her input ``x``); her output ``a`` is the full outcome vector. Bob holds
the output sites ``O`` and measures a POVM (his input ``y``) with outcome
``b``. No-signaling demands that Bob's marginal ``sum_a P(a, b | x, y)``
does not depend on ``x``.

Reports are plain dicts shaped like
``{"check", "max_deviation", "tol", "pass", "details"}`` so they serialize
directly.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import qmath
from .core import (
    Branch,
    MeasurementProgram,
    ResourceState,
    ZERO_PROBABILITY,
    bob_marginal,
    byproduct_census,
    corrected_marginal,
    enumerate_branches,
    is_byproduct_free,
)

EQUALITY_TOL = 1e-10
SAMPLED_TOL = 1e-6
POVM_TOL = 1e-10

SCOPE_NOTE = (
    "certified on the constructed instances only; "
    "the general statement quantifies over every universal resource"
)


def z_basis_povm(num_qubits: int = 1) -> list[np.ndarray]:
    d = 2**num_qubits
    return [qmath.projector(np.eye(d, dtype=np.complex128)[i]) for i in range(d)]


def x_basis_povm() -> list[np.ndarray]:
    return [qmath.projector(qmath.KET_PLUS), qmath.projector(qmath.KET_MINUS)]


def trivial_povm(dim: int) -> list[np.ndarray]:
    return [np.eye(dim, dtype=np.complex128)]


def validate_povm(effects: Sequence, dim: int) -> list[np.ndarray]:
    effects = [np.asarray(e, dtype=np.complex128) for e in effects]
    if not effects:
        raise ValueError("a POVM needs at least one effect")
    for e in effects:
        if e.shape != (dim, dim) or not qmath.is_hermitian(e):
            raise ValueError("POVM effects must be Hermitian matrices on the output space")
        if np.linalg.eigvalsh(e)[0] < -qmath.PSD_TOL:
            raise ValueError("POVM effects must be positive semidefinite")
    if np.max(np.abs(sum(effects) - np.eye(dim))) > POVM_TOL:
        raise ValueError("POVM effects must sum to the identity")
    return effects


@dataclass(frozen=True, eq=False)
class TwoPartyExperiment:
    resource: ResourceState
    alice_programs: tuple[MeasurementProgram, ...]
    bob_povms: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        progs = tuple(self.alice_programs)
        if not progs:
            raise ValueError("Alice needs at least one program")
        for p in progs:
            if not p.resource.same_as(self.resource):
                raise ValueError("all programs must share the experiment's resource and partition")
        dim = self.resource.output_dim
        povms = tuple(tuple(validate_povm(e, dim)) for e in self.bob_povms)
        object.__setattr__(self, "alice_programs", progs)
        object.__setattr__(self, "bob_povms", povms)
        object.__setattr__(self, "_branches", {})

    def branches(self, x: int) -> list[Branch]:
        cache = self._branches  # type: ignore[attr-defined]
        if x not in cache:
            cache[x] = enumerate_branches(self.alice_programs[x])
        return cache[x]


@dataclass(frozen=True)
class JointTable:
    """``P(a, b)`` for fixed inputs; ``outcomes[i]`` labels row ``i``."""

    outcomes: tuple[tuple[int, ...], ...]
    entries: np.ndarray

    def bob_marginal(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def alice_marginal(self) -> np.ndarray:
        return self.entries.sum(axis=1)


def joint_distribution(exp: TwoPartyExperiment, x: int, y: int) -> JointTable:
    branches = exp.branches(x)
    effects = exp.bob_povms[y]
    table = np.zeros((len(branches), len(effects)))
    for i, br in enumerate(branches):
        if br.probability <= 0:
            continue
        rho = br.density()
        for j, e in enumerate(effects):
            table[i, j] = br.probability * float(np.real(np.trace(e @ rho)))
    return JointTable(tuple(b.outcomes for b in branches), table)


def _report(check: str, max_dev: float, tol: float, details: list, **extra) -> dict:
    out = {
        "check": check,
        "max_deviation": float(max_dev),
        "tol": float(tol),
        "pass": bool(max_dev <= tol),
        "details": details,
    }
    out.update(extra)
    return out


def check_no_signaling(exp: TwoPartyExperiment, tol: float = EQUALITY_TOL) -> dict:
    """Largest change in Bob's outcome distribution across Alice's inputs."""
    n_x = len(exp.alice_programs)
    details = []
    worst = 0.0
    for y in range(len(exp.bob_povms)):
        marginals = [joint_distribution(exp, x, y).bob_marginal() for x in range(n_x)]
        for x, x2 in itertools.combinations(range(n_x), 2):
            dev = float(np.max(np.abs(marginals[x] - marginals[x2])))
            worst = max(worst, dev)
            details.append({"y": y, "x": x, "x_prime": x2, "deviation": dev})
        details.append({"y": y, "bob_marginals": [m.tolist() for m in marginals]})
    return _report("no_signaling", worst, tol, details, vacuous=n_x < 2)


def marginal_invariance(programs: Sequence[MeasurementProgram], tol: float = EQUALITY_TOL) -> dict:
    """Trace distances between Bob's states under each program and against ``Tr_M(rho)``."""
    programs = list(programs)
    if not programs:
        raise ValueError("need at least one program")
    resource = programs[0].resource
    if not all(p.resource.same_as(resource) for p in programs):
        raise ValueError("programs must share one resource")
    reduced = resource.reduced_output()
    marginals = [bob_marginal(p) for p in programs]
    details = []
    worst = 0.0
    for i, m in enumerate(marginals):
        d = qmath.trace_distance(m, reduced)
        worst = max(worst, d)
        details.append({"program": i, "vs": "reduced_resource", "trace_distance": d})
    for i, j in itertools.combinations(range(len(marginals)), 2):
        d = qmath.trace_distance(marginals[i], marginals[j])
        worst = max(worst, d)
        details.append({"program": i, "vs": j, "trace_distance": d})
    return _report("marginal_invariance", worst, tol, details)


def byproductfree_signaling_gap(U, V, sigma) -> float:
    """``||U s U^+ - V s V^+||_1``: what Bob could read if byproducts never occurred."""
    U, V, sigma = (np.asarray(m, dtype=np.complex128) for m in (U, V, sigma))
    if not (qmath.is_unitary(U) and qmath.is_unitary(V)):
        raise ValueError("U and V must be unitary")
    if not qmath.is_density(sigma):
        raise ValueError("sigma must be a density matrix")
    return qmath.trace_norm(U @ sigma @ U.conj().T - V @ sigma @ V.conj().T)


def counterfactual_check(programs: Sequence[MeasurementProgram], tol: float = EQUALITY_TOL) -> dict:
    """Undo every branch's byproduct on Bob's side and compare marginals.

    This simulates the (impossible) byproduct-free resource. A failing
    report here is the expected demonstration: such a resource would let
    Alice signal, by exactly ``byproductfree_signaling_gap``.
    """
    programs = list(programs)
    corrected = [corrected_marginal(p) for p in programs]
    details = []
    worst = 0.0
    for i, j in itertools.combinations(range(len(programs)), 2):
        gap = qmath.trace_norm(corrected[i] - corrected[j])
        worst = max(worst, gap)
        expected = byproductfree_signaling_gap(programs[i].target, programs[j].target, programs[i].sigma)
        details.append({"program": i, "vs": j, "gap": gap, "predicted_gap": expected})
    return _report("counterfactual_byproduct_free", worst, tol, details, counterfactual=True)


def theorem_check(
    resource: ResourceState,
    programs: Sequence[MeasurementProgram],
    tol: float = EQUALITY_TOL,
    counterfactual: bool = False,
) -> dict:
    """Physical no-signaling plus a byproduct census for each program.

    PASS requires Bob's marginal to be program-independent and every
    program whose target differs observably from another program's target
    to carry at least one non-identity byproduct. With ``counterfactual``
    the byproduct-corrected marginals are compared as well; any difference
    there is flagged as a violation.
    """
    programs = list(programs)
    for p in programs:
        if not p.resource.same_as(resource):
            raise ValueError("programs must share the given resource")
    invariance = marginal_invariance(programs, tol)
    census = []
    ok = invariance["pass"]
    for i, p in enumerate(programs):
        branches = enumerate_branches(p)
        gaps = [
            byproductfree_signaling_gap(p.target, q.target, p.sigma)
            for j, q in enumerate(programs)
            if j != i
        ]
        max_gap = max(gaps, default=0.0)
        free = is_byproduct_free(p, branches)
        needs_byproducts = max_gap > tol
        if needs_byproducts and free:
            ok = False
        census.append(
            {
                "program": i,
                "name": p.name,
                "branches": len(branches),
                "nonzero_branches": sum(b.probability > ZERO_PROBABILITY for b in branches),
                "byproducts": byproduct_census(branches),
                "byproduct_free": free,
                "max_gap": max_gap,
                "consistent": not (needs_byproducts and free),
            }
        )
    verdict = {
        "check": "theorem",
        "marginal_invariance": invariance,
        "census": census,
        "scope_note": SCOPE_NOTE,
    }
    if counterfactual:
        cf = counterfactual_check(programs, tol)
        verdict["counterfactual"] = cf
        ok = ok and cf["pass"]
    verdict["verdict"] = "PASS" if ok else "FAIL"
    return verdict
