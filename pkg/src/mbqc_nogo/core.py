"""Resource states, measurement programs and exhaustive branch enumeration.

A :class:`MeasurementProgram` measures sites of the measured set ``M`` of a
pure resource one at a time. Each step picks an orthonormal basis, possibly
depending on earlier outcomes (feed-forward). Every complete outcome vector
is a :class:`Branch` carrying its Born probability, the post-measurement
state of the output set ``O`` and the Pauli byproduct relative to the
target ``U`` applied to the logical input.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import prod

import numpy as np

from . import qmath

DEFAULT_MAX_BRANCHES = 3**12
#: Branches below this probability are kept but never judged.
ZERO_PROBABILITY = 1e-12
BYPRODUCT_TOL = 1e-9
MAX_PAULI_QUBITS = 8


class BranchCapExceeded(RuntimeError):
    """Enumeration would produce more branches than the configured cap."""


def max_branches() -> int:
    """Enumeration cap; ``MBQC_MAX_BRANCHES`` overrides the default of 3**12."""
    raw = os.environ.get("MBQC_MAX_BRANCHES")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_BRANCHES
    value = int(raw)
    if value < 1:
        raise ValueError("MBQC_MAX_BRANCHES must be a positive integer")
    return value


# --------------------------------------------------------------------------
# Pauli byproducts
# --------------------------------------------------------------------------

_SINGLE = {(0, 0): qmath.I2, (1, 0): qmath.X, (0, 1): qmath.Z, (1, 1): qmath.X @ qmath.Z}
_LABEL = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "XZ"}


@dataclass(frozen=True)
class PauliByproduct:
    """``X^x Z^z`` on each logical qubit, modulo global phase.

    Composition is bitwise XOR of the bit vectors. ``x = z = 1`` is the
    operator ``XZ`` (proportional to ``Y``).
    """

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]

    def __post_init__(self):
        x = tuple(int(b) & 1 for b in self.x_bits)
        z = tuple(int(b) & 1 for b in self.z_bits)
        if len(x) != len(z):
            raise ValueError("x_bits and z_bits must have equal length")
        object.__setattr__(self, "x_bits", x)
        object.__setattr__(self, "z_bits", z)

    @classmethod
    def identity(cls, n: int = 1) -> PauliByproduct:
        return cls((0,) * n, (0,) * n)

    @classmethod
    def single(cls, x: int, z: int) -> PauliByproduct:
        return cls((x,), (z,))

    @property
    def num_qubits(self) -> int:
        return len(self.x_bits)

    @property
    def is_identity(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)

    @property
    def weight(self) -> int:
        return sum(1 for x, z in zip(self.x_bits, self.z_bits) if x or z)

    def __mul__(self, other: PauliByproduct) -> PauliByproduct:
        if self.num_qubits != other.num_qubits:
            raise ValueError("cannot compose byproducts on different qubit counts")
        return PauliByproduct(
            tuple(a ^ b for a, b in zip(self.x_bits, other.x_bits)),
            tuple(a ^ b for a, b in zip(self.z_bits, other.z_bits)),
        )

    def matrix(self) -> np.ndarray:
        return qmath.kron_all(_SINGLE[p] for p in zip(self.x_bits, self.z_bits))

    @property
    def label(self) -> str:
        """``"I"``, ``"X"``, ``"Z"`` or ``"XZ"`` per qubit, joined by ``"⊗"``."""
        return "⊗".join(_LABEL[p] for p in zip(self.x_bits, self.z_bits))

    def __str__(self) -> str:
        return self.label


def all_paulis(n: int) -> list[PauliByproduct]:
    """Every n-qubit Pauli, lowest weight first, then I < X < Z < XZ per qubit."""
    if n > MAX_PAULI_QUBITS:
        raise ValueError(f"Pauli search limited to {MAX_PAULI_QUBITS} qubits")
    order = [(0, 0), (1, 0), (0, 1), (1, 1)]
    out = [
        PauliByproduct(tuple(p[0] for p in combo), tuple(p[1] for p in combo))
        for combo in itertools.product(order, repeat=n)
    ]
    out.sort(key=lambda p: (p.weight, sum(p.x_bits) + sum(p.z_bits)))
    return out


def _num_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a qubit register")
    return n


def _fidelity_with(state: np.ndarray, ref: np.ndarray) -> float:
    if state.ndim == 1:
        return qmath.overlap(ref, state) ** 2
    return float(np.real(np.vdot(ref, state @ ref)))


def extract_byproduct(branch_state, reference_state) -> PauliByproduct | None:
    """Find the Pauli ``P`` with ``P|reference>`` equal to the branch state up to phase.

    ``branch_state`` may be a vector or a density matrix. Several Paulis can
    match when the reference is a Pauli eigenstate (``Z|0> = |0>``); the
    lowest-weight one is returned, ties broken in the order I, X, Z, XZ.
    Returns ``None`` when no Pauli matches.
    """
    state = np.asarray(branch_state, dtype=np.complex128)
    ref = qmath.normalize(reference_state)
    n = _num_qubits(ref.shape[0])
    if state.shape[0] != ref.shape[0]:
        raise qmath.DimensionError("branch and reference states live on different spaces")
    for p in all_paulis(n):
        # |<ref|P|branch>| with P self-inverse up to phase
        if _fidelity_with(state, p.matrix() @ ref) >= (1 - BYPRODUCT_TOL) ** 2:
            return p
    return None


def pauli_of_operator(op) -> PauliByproduct | None:
    """Return the Pauli proportional to ``op`` (up to phase), or ``None``."""
    op = np.asarray(op, dtype=np.complex128)
    d = op.shape[0]
    n = _num_qubits(d)
    scale = np.sqrt(np.real(np.trace(op.conj().T @ op)) / d)
    if scale == 0:
        return None
    for p in all_paulis(n):
        if abs(np.trace(p.matrix().conj().T @ op)) / (d * scale) >= 1 - BYPRODUCT_TOL:
            return p
    return None


# --------------------------------------------------------------------------
# resource and program model
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ResourceState:
    """A pure state over sites ``S`` split into measured ``M`` and output ``O``."""

    site_dims: tuple[int, ...]
    state: np.ndarray
    measured: frozenset[int]
    output: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("site_dims must be a nonempty sequence of positive integers")
        total = prod(dims)
        if total > qmath.MAX_DIM:
            raise qmath.DimensionError(f"resource dimension {total} exceeds {qmath.MAX_DIM}")
        psi = np.asarray(self.state, dtype=np.complex128).reshape(-1)
        if psi.shape[0] != total:
            raise qmath.DimensionError(f"state has length {psi.shape[0]}, expected {total}")
        if not np.all(np.isfinite(psi)) or not qmath.is_normalized(psi):
            raise ValueError("resource state must be finite and normalized")
        measured = frozenset(int(s) for s in self.measured)
        output = tuple(sorted(int(s) for s in self.output))
        sites = set(range(len(dims)))
        if not output:
            raise ValueError("output set O must be nonempty")
        if measured & set(output):
            raise ValueError("measured and output sets overlap")
        if measured | set(output) != sites or len(set(output)) != len(output):
            raise ValueError("M and O must partition the sites")
        psi = psi.copy()
        psi.setflags(write=False)
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "state", psi)
        object.__setattr__(self, "measured", measured)
        object.__setattr__(self, "output", output)

    @property
    def output_dim(self) -> int:
        return prod(self.site_dims[s] for s in self.output)

    def density(self) -> np.ndarray:
        return qmath.projector(self.state)

    def reduced_output(self) -> np.ndarray:
        """``Tr_M(rho)``: the output-set marginal before anyone measures."""
        return qmath.partial_trace(self.density(), self.site_dims, self.output)

    def same_as(self, other: ResourceState) -> bool:
        return (
            self is other
            or (
                self.site_dims == other.site_dims
                and self.measured == other.measured
                and self.output == other.output
                and np.array_equal(self.state, other.state)
            )
        )


BasisRule = Callable[[tuple[int, ...]], np.ndarray]


@dataclass(frozen=True)
class MeasurementStep:
    """Measure ``site`` in the basis returned by ``basis(prior_outcomes)``.

    The basis is a unitary whose columns are the measurement kets; column
    ``o`` is outcome ``o``. Without feed-forward the rule is called with an
    empty outcome tuple at every step.
    """

    site: int
    basis: BasisRule
    label: str = ""


def fixed_basis(kets) -> BasisRule:
    kets = np.asarray(kets, dtype=np.complex128)
    if not qmath.is_unitary(kets):
        raise ValueError("measurement basis must be a unitary (orthonormal columns)")
    return lambda prior: kets


@dataclass(frozen=True, eq=False)
class MeasurementProgram:
    resource: ResourceState
    steps: tuple[MeasurementStep, ...]
    target: np.ndarray
    sigma: np.ndarray
    feed_forward: bool = True
    #: outcome vector -> byproduct, when the backend tracks byproducts algebraically
    tracker: Callable[[tuple[int, ...]], PauliByproduct] | None = None
    name: str = ""

    def __post_init__(self):
        steps = tuple(self.steps)
        sites = [s.site for s in steps]
        if len(set(sites)) != len(sites):
            raise ValueError("each step must address a distinct site")
        if not set(sites) <= self.resource.measured:
            raise ValueError("steps may only measure sites of M")
        target = np.asarray(self.target, dtype=np.complex128)
        sigma = np.asarray(self.sigma, dtype=np.complex128)
        d = self.resource.output_dim
        if target.shape != (d, d) or not qmath.is_unitary(target):
            raise ValueError("target must be a unitary on the output space")
        if sigma.shape != (d, d) or not qmath.is_density(sigma):
            raise ValueError("sigma must be a density matrix on the output space")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "sigma", sigma)

    def reference_state(self) -> np.ndarray:
        """``U|psi_sigma>``, the byproduct-free output (sigma must be pure)."""
        return self.target @ qmath.pure_vector(self.sigma)

    def branch_count(self) -> int:
        dims = self.resource.site_dims
        return prod(dims[s.site] for s in self.steps)


@dataclass(frozen=True, eq=False)
class Branch:
    """One outcome history ``k`` with probability ``p_k``.

    ``output_state`` is a vector over ``O`` when every site of ``M`` was
    measured, otherwise the density matrix left on ``O``.
    """

    outcomes: tuple[int, ...]
    probability: float
    output_state: np.ndarray
    byproduct: PauliByproduct | None = None
    success: bool = True

    def density(self) -> np.ndarray:
        s = self.output_state
        return qmath.projector(s) if s.ndim == 1 else s


# --------------------------------------------------------------------------
# enumeration
# --------------------------------------------------------------------------


def _check_cap(program: MeasurementProgram) -> None:
    cap = max_branches()
    count = program.branch_count()
    if count > cap:
        raise BranchCapExceeded(f"program has {count} branches, cap is {cap}")


def _root(program: MeasurementProgram) -> tuple[np.ndarray, tuple[int, ...]]:
    r = program.resource
    return r.state.reshape(r.site_dims), tuple(range(len(r.site_dims)))


def _children(program, state, remaining, prefix):
    """Project the next step's site onto each basis ket.

    Yields ``(outcome, conditional_probability, normalized_child, remaining)``.
    """
    step = program.steps[len(prefix)]
    basis = np.asarray(step.basis(prefix if program.feed_forward else ()), dtype=np.complex128)
    ax = remaining.index(step.site)
    rest = remaining[:ax] + remaining[ax + 1:]
    out = []
    for o in range(basis.shape[1]):
        child = np.tensordot(basis[:, o].conj(), state, axes=([0], [ax]))
        q = float(np.vdot(child, child).real)
        if q > 0:
            child = child / np.sqrt(q)
        out.append((o, q, child, rest))
    return out


def _leaf(program, state, remaining, prefix, prob) -> Branch:
    r = program.resource
    unmeasured = [i for i, s in enumerate(remaining) if s not in r.output]
    if unmeasured:
        dims = [r.site_dims[s] for s in remaining]
        keep = [i for i, s in enumerate(remaining) if s in r.output]
        out = qmath.partial_trace(qmath.projector(state.reshape(-1)), dims, keep)
    else:
        out = state.reshape(-1).copy()
    byproduct = None
    if prob > ZERO_PROBABILITY:
        if program.tracker is not None and program.feed_forward:
            byproduct = program.tracker(prefix)
        else:
            byproduct = extract_byproduct(out, program.reference_state())
    out.setflags(write=False)
    return Branch(prefix, prob, out, byproduct)


def _descend(program, state, remaining, prefix, prob, out: list) -> None:
    if len(prefix) == len(program.steps):
        out.append(_leaf(program, state, remaining, prefix, prob))
        return
    for o, q, child, rest in _children(program, state, remaining, prefix):
        _descend(program, child, rest, prefix + (o,), prob * q, out)


def enumerate_branches(program: MeasurementProgram, workers: int = 1) -> list[Branch]:
    """Every branch of ``program`` in lexicographic outcome order.

    With ``workers > 1`` the subtrees below the first step's outcomes are
    explored on a thread pool; the result is identical to the serial run.
    """
    _check_cap(program)
    state, remaining = _root(program)
    if not program.steps or workers <= 1:
        out: list[Branch] = []
        _descend(program, state, remaining, (), 1.0, out)
        return out

    def subtree(child):
        o, q, st, rest = child
        part: list[Branch] = []
        _descend(program, st, rest, (o,), q, part)
        return part

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(subtree, _children(program, state, remaining, ())))
    branches = [b for part in parts for b in part]
    branches.sort(key=lambda b: b.outcomes)
    return branches


def total_probability(branches: Sequence[Branch]) -> float:
    return float(np.sum([b.probability for b in sorted(branches, key=lambda b: b.outcomes)]))


def sample_branches(
    program: MeasurementProgram, seed: int, shots: int, workers: int = 1
) -> list[Branch]:
    """Draw ``shots`` branches by sequential Born-rule sampling.

    One generator seeded with ``seed`` drives the run. With ``workers > 1``
    the shots are split into contiguous chunks and chunk ``i`` uses the seed
    ``seed ^ i``.
    """
    if shots < 0:
        raise ValueError("shots must be nonnegative")
    state, remaining = _root(program)
    # prefix -> (normalized state, remaining sites, probability of prefix)
    nodes: dict[tuple[int, ...], tuple] = {(): (state, remaining, 1.0)}
    kids_of: dict[tuple[int, ...], list] = {}
    leaves: dict[tuple[int, ...], Branch] = {}

    def expand(prefix):
        if prefix not in kids_of:
            st, rem, _ = nodes[prefix]
            kids = _children(program, st, rem, prefix)
            qs = np.array([k[1] for k in kids])
            kids_of[prefix] = (kids, np.cumsum(qs) / qs.sum())
        return kids_of[prefix]

    def draw(u_row) -> Branch:
        prefix: tuple[int, ...] = ()
        prob = 1.0
        for u in u_row:
            kids, cdf = expand(prefix)
            o = int(min(np.searchsorted(cdf, u, side="right"), len(kids) - 1))
            _, q, child, rest = kids[o]
            prob *= q
            prefix = prefix + (o,)
            nodes.setdefault(prefix, (child, rest, prob))
        if prefix not in leaves:
            st, rem, p = nodes[prefix]
            leaves[prefix] = _leaf(program, st, rem, prefix, p)
        return leaves[prefix]

    m = len(program.steps)
    if workers <= 1:
        u = np.random.default_rng(seed).random((shots, m))
        return [draw(row) for row in u]
    chunks = np.array_split(np.arange(shots), workers)
    out: list[Branch] = []
    for i, chunk in enumerate(chunks):
        u = np.random.default_rng(seed ^ i).random((len(chunk), m))
        out.extend(draw(row) for row in u)
    return out


def sample_branch(program: MeasurementProgram, seed: int) -> Branch:
    """A single Born-rule sample, deterministic in ``seed``."""
    return sample_branches(program, seed, 1)[0]


def mixture(branches: Sequence[Branch]) -> np.ndarray:
    """``sum_k p_k rho_k`` accumulated in canonical outcome order."""
    ordered = sorted(branches, key=lambda b: b.outcomes)
    acc = np.zeros_like(ordered[0].density())
    for b in ordered:
        if b.probability > 0:
            acc = acc + b.probability * b.density()
    return acc


def bob_marginal(program: MeasurementProgram, branches: Sequence[Branch] | None = None) -> np.ndarray:
    """State of ``O`` averaged over all branches (the receiver's view)."""
    if branches is None:
        branches = enumerate_branches(program)
    return mixture(branches)


def is_byproduct_free(program: MeasurementProgram, branches: Sequence[Branch] | None = None) -> bool:
    """True iff every non-negligible branch carries the identity byproduct."""
    if branches is None:
        branches = enumerate_branches(program)
    return all(
        b.byproduct is not None and b.byproduct.is_identity
        for b in branches
        if b.probability > ZERO_PROBABILITY
    )


def byproduct_census(branches: Sequence[Branch]) -> dict[str, float]:
    """Total probability per byproduct label (``"none"`` for non-Pauli branches)."""
    census: dict[str, float] = {}
    for b in sorted(branches, key=lambda b: b.outcomes):
        if b.probability <= ZERO_PROBABILITY:
            continue
        key = b.byproduct.label if b.byproduct is not None else "none"
        census[key] = census.get(key, 0.0) + b.probability
    return census


def corrected_marginal(program: MeasurementProgram, branches: Sequence[Branch] | None = None) -> np.ndarray:
    """Counterfactual mixture with each branch's byproduct undone.

    This is the state a byproduct-free resource would hand the receiver. It
    is not physically reachable without the outcomes; it exists to show what
    such a resource would signal.
    """
    if branches is None:
        branches = enumerate_branches(program)
    acc = None
    for b in sorted(branches, key=lambda b: b.outcomes):
        if b.probability <= ZERO_PROBABILITY:
            continue
        if b.byproduct is None:
            raise ValueError(f"branch {b.outcomes} has no Pauli byproduct to undo")
        p = b.byproduct.matrix()
        term = b.probability * (p.conj().T @ b.density() @ p)
        acc = term if acc is None else acc + term
    return acc


def product_resource(site_states: Sequence, measured: Sequence[int], output: Sequence[int]) -> ResourceState:
    """Unentangled resource from one ket per site."""
    kets = [qmath.normalize(s) for s in site_states]
    return ResourceState(
        tuple(k.shape[0] for k in kets), qmath.kron_all(kets), frozenset(measured), tuple(output)
    )


__all__ = [
    "BranchCapExceeded",
    "Branch",
    "MeasurementProgram",
    "MeasurementStep",
    "PauliByproduct",
    "ResourceState",
    "all_paulis",
    "bob_marginal",
    "byproduct_census",
    "corrected_marginal",
    "enumerate_branches",
    "extract_byproduct",
    "fixed_basis",
    "is_byproduct_free",
    "max_branches",
    "mixture",
    "pauli_of_operator",
    "product_resource",
    "sample_branch",
    "sample_branches",
    "total_probability",
]
