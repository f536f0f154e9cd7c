"""One-dimensional cluster-state wire.

Sites are numbered ``0 .. n-1`` left to right. Site 0 holds the logical
input ``|psi_sigma>``, every other site starts in ``|+>``, and neighbours are
joined by CZ. Measuring site ``j`` in the basis
``(|0> + (-1)^s e^{i theta}|1>)/sqrt(2)`` moves the logical state to site
``j+1`` transformed by ``X^s H exp(i Z theta / 2)``. Measurements run left to
right; the last site carries the output.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import qmath
from .core import (
    Branch,
    MeasurementProgram,
    MeasurementStep,
    PauliByproduct,
    ResourceState,
    extract_byproduct,
)


@dataclass(frozen=True, eq=False)
class ClusterWire:
    """Cluster wire state.

    ``sites`` lists the original labels of the qubits still present, in
    tensor order; it shrinks as sites are measured.
    """

    n: int
    state: np.ndarray
    input_sigma: np.ndarray
    sites: tuple[int, ...]

    def tensor(self) -> np.ndarray:
        return self.state.reshape((2,) * len(self.sites))


@dataclass(frozen=True)
class WireProgram:
    angles: tuple[float, ...]
    feed_forward: bool = True

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))


def _chain_cz(psi: np.ndarray, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n).copy()
    for i in range(n - 1):
        idx = [slice(None)] * n
        idx[i] = 1
        idx[i + 1] = 1
        t[tuple(idx)] *= -1
    return t.reshape(-1)


def build_cluster(n: int, sigma=None) -> ClusterWire:
    """Cluster wire of ``n`` qubits with logical input ``sigma`` (pure, default ``|+><+|``)."""
    if n < 1:
        raise ValueError("a wire needs at least one site")
    if sigma is None:
        sigma = qmath.projector(qmath.KET_PLUS)
    sigma = np.asarray(sigma, dtype=np.complex128)
    if sigma.shape != (2, 2):
        raise ValueError("sigma must be a single-qubit density matrix")
    psi = qmath.pure_vector(sigma)
    full = qmath.kron_all([psi] + [qmath.KET_PLUS] * (n - 1))
    state = _chain_cz(full, n)
    state.setflags(write=False)
    return ClusterWire(n, state, sigma, tuple(range(n)))


def measurement_ket(angle: float, outcome: int) -> np.ndarray:
    return np.array([1, (-1) ** outcome * np.exp(1j * angle)], dtype=np.complex128) / np.sqrt(2)


def measurement_basis(angle: float) -> np.ndarray:
    """Columns are the kets for outcomes 0 and 1."""
    return np.column_stack([measurement_ket(angle, 0), measurement_ket(angle, 1)])


def measure_step(
    wire: ClusterWire, site: int, angle: float, outcome: int
) -> tuple[float, ClusterWire | None]:
    """Project ``site`` onto the outcome ket and drop it from the wire.

    Returns ``(probability, post_wire)``; ``post_wire`` is ``None`` when the
    outcome has zero probability.
    """
    if site not in wire.sites:
        raise ValueError(f"site {site} is already measured or does not exist")
    if site == wire.n - 1:
        raise ValueError("the last site carries the output and is never measured")
    ax = wire.sites.index(site)
    child = np.tensordot(measurement_ket(angle, outcome).conj(), wire.tensor(), axes=([0], [ax]))
    p = float(np.vdot(child, child).real)
    if p < 1e-300:
        return 0.0, None
    child = (child / np.sqrt(p)).reshape(-1)
    child.setflags(write=False)
    rest = wire.sites[:ax] + wire.sites[ax + 1:]
    return p, ClusterWire(wire.n, child, wire.input_sigma, rest)


def adapt_angle(theta: float, incoming: PauliByproduct) -> float:
    """Flip the angle sign when an X byproduct is pending: ``(-1)^x * theta``."""
    if incoming.num_qubits != 1:
        raise ValueError("wire byproducts are single-qubit")
    return -theta if incoming.x_bits[0] else theta


def propagate_byproduct(incoming: PauliByproduct, outcome: int) -> PauliByproduct:
    """Push ``X^p Z^q`` through one step with outcome ``s``: ``(s ^ q, p)``."""
    p, q = incoming.x_bits[0], incoming.z_bits[0]
    return PauliByproduct.single(outcome ^ q, p)


def tracked_byproduct(outcomes: Sequence[int]) -> PauliByproduct:
    return reduce(propagate_byproduct, outcomes, PauliByproduct.identity(1))


def compile_target(program: WireProgram) -> np.ndarray:
    """``prod_j H exp(i Z theta_j / 2)`` with step 0 acting first."""
    u = qmath.I2.copy()
    for theta in program.angles:
        u = qmath.H @ qmath.z_rotation(theta) @ u
    return u


def _step_angle(program: WireProgram, j: int, prior: Sequence[int]) -> float:
    theta = program.angles[j]
    if program.feed_forward:
        theta = adapt_angle(theta, tracked_byproduct(prior[:j]))
    return theta


def _check_fits(program: WireProgram, wire: ClusterWire) -> None:
    if len(program.angles) != wire.n - 1:
        raise ValueError(
            f"a wire of {wire.n} sites needs exactly {wire.n - 1} angles, got {len(program.angles)}"
        )
    if wire.sites != tuple(range(wire.n)):
        raise ValueError("program must start from an unmeasured wire")


def run_wire(
    program: WireProgram,
    wire: ClusterWire,
    outcomes: Sequence[int] | None = None,
    seed: int | None = None,
) -> Branch:
    """Measure the wire left to right along one branch.

    Pass ``outcomes`` to follow a given branch or ``seed`` to sample one.
    With feed-forward the byproduct comes from the propagation rule;
    without it, it is read off the output state (``None`` if not Pauli).
    """
    _check_fits(program, wire)
    m = len(program.angles)
    if outcomes is not None:
        outcomes = tuple(int(o) for o in outcomes)
        if len(outcomes) != m or any(o not in (0, 1) for o in outcomes):
            raise ValueError(f"need {m} outcome bits")
    rng = np.random.default_rng(seed) if outcomes is None else None
    prob = 1.0
    taken: list[int] = []
    current = wire
    for j in range(m):
        theta = _step_angle(program, j, taken)
        if rng is not None:
            p0, _ = measure_step(current, j, theta, 0)
            s = 0 if rng.random() < p0 else 1
        else:
            s = outcomes[j]
        p, nxt = measure_step(current, j, theta, s)
        prob *= p
        taken.append(s)
        if nxt is None:
            return Branch(tuple(taken), 0.0, np.zeros(2, dtype=np.complex128), None)
        current = nxt
    out = current.state
    if program.feed_forward:
        byproduct = tracked_byproduct(taken)
    else:
        ref = compile_target(program) @ qmath.pure_vector(wire.input_sigma)
        byproduct = extract_byproduct(out, ref)
    return Branch(tuple(taken), prob, out, byproduct)


def wire_resource(wire: ClusterWire) -> ResourceState:
    return ResourceState(
        (2,) * wire.n, wire.state, frozenset(range(wire.n - 1)), (wire.n - 1,)
    )


def wire_program(
    program: WireProgram, wire: ClusterWire, resource: ResourceState | None = None
) -> MeasurementProgram:
    """Express a wire program as a generic measurement program.

    Pass ``resource`` to share one :class:`ResourceState` object between
    several programs on the same wire.
    """
    _check_fits(program, wire)
    if resource is None:
        resource = wire_resource(wire)

    def rule(j):
        return lambda prior: measurement_basis(_step_angle(program, j, prior))

    steps = tuple(
        MeasurementStep(j, rule(j), label=f"theta={theta:.6g}")
        for j, theta in enumerate(program.angles)
    )
    ff = "ff" if program.feed_forward else "no-ff"
    return MeasurementProgram(
        resource=resource,
        steps=steps,
        target=compile_target(program),
        sigma=wire.input_sigma,
        feed_forward=program.feed_forward,
        tracker=tracked_byproduct if program.feed_forward else None,
        name=f"wire({', '.join(f'{a:.6g}' for a in program.angles)}; {ff})",
    )


def stabilizer_expectations(wire: ClusterWire) -> list[float]:
    """``<Z_{i-1} X_i Z_{i+1}>`` for every site of an unmeasured wire."""
    n = wire.n
    psi = wire.state
    out = []
    for i in range(n):
        ops = [qmath.I2] * n
        ops[i] = qmath.X
        if i > 0:
            ops[i - 1] = qmath.Z
        if i < n - 1:
            ops[i + 1] = qmath.Z
        out.append(float(np.real(np.vdot(psi, qmath.kron_all(ops) @ psi))))
    return out
