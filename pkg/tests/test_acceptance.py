"""Acceptance gate: every primary criterion at its stated tolerance and time budget.

Run alone with ``pytest tests/test_acceptance.py``; the terminal summary
ends with one PASS/FAIL line per criterion.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from mbqc_nogo import aklt, cli, cluster, core, nosignal, qmath
from mbqc_nogo.cluster import WireProgram
from mbqc_nogo.qmath import H, I2, KET_0, KET_PLUS, X, Z


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def binomial_ok(count, shots, p, k=5.0):
    sd = np.sqrt(shots * p * (1 - p))
    return abs(count - shots * p) <= k * sd if sd > 0 else count == round(shots * p)


@pytest.mark.acceptance("AC1", "2-step wire census: 4 branches at 1/4 with I, X, Z, XZ")
def test_ac1_byproduct_census():
    with Timer() as t:
        w = cluster.build_cluster(3)
        prog = cluster.wire_program(WireProgram((0.0, 0.0)), w)
        branches = core.enumerate_branches(prog)
        ref = prog.reference_state()
    assert len(branches) == 4
    for b in branches:
        assert abs(b.probability - 0.25) <= 1e-12
        # the tracked label must also be what the output state shows
        assert qmath.overlap(b.output_state, b.byproduct.matrix() @ ref) >= 1 - 1e-12
    assert sorted(b.byproduct.label for b in branches) == sorted(["I", "X", "Z", "XZ"])
    assert t.elapsed < 1.0


@pytest.mark.acceptance("AC2", "one step implements X^s H exp(i Z theta/2)")
def test_ac2_step_semantics():
    inputs = [KET_0, KET_PLUS, qmath.rz(0.7) @ KET_PLUS]
    with Timer() as t:
        worst = 1.0
        for psi, theta, s in itertools.product(inputs, [0.0, np.pi / 4, np.pi / 2, 1.23], [0, 1]):
            w = cluster.build_cluster(2, qmath.projector(psi))
            p, post = cluster.measure_step(w, 0, theta, s)
            expected = np.linalg.matrix_power(X, s) @ H @ qmath.z_rotation(theta) @ psi
            worst = min(worst, qmath.overlap(post.state, expected))
            assert abs(p - 0.5) <= 1e-12
    assert worst >= 1 - 1e-9
    assert t.elapsed < 1.0


AC3_PROGRAMS = [
    ((0.0,) * 10, True),
    (tuple(np.linspace(0.1, 2.9, 10)), True),
    (tuple(np.linspace(0.1, 2.9, 10)), False),
    ((np.pi / 2, np.pi / 4) * 5, False),
]


@pytest.mark.acceptance("AC3", "Bob's marginal is program-independent and equals Tr_M(rho)")
def test_ac3_no_signaling_invariance():
    sigma = qmath.projector(qmath.rz(0.7) @ KET_PLUS)
    povms = (nosignal.z_basis_povm(), nosignal.x_basis_povm())
    with Timer() as t:
        for n in (3, 11):
            w = cluster.build_cluster(n, sigma)
            res = cluster.wire_resource(w)
            progs = [
                cluster.wire_program(WireProgram(a[: n - 1], ff), w, res) for a, ff in AC3_PROGRAMS
            ]
            assert len({p.name for p in progs}) == len(progs)
            exp = nosignal.TwoPartyExperiment(res, tuple(progs), povms)
            ns = nosignal.check_no_signaling(exp, tol=1e-10)
            assert ns["max_deviation"] <= 1e-10
            reduced = res.reduced_output()
            for x, p in enumerate(progs):
                assert qmath.trace_distance(core.bob_marginal(p, exp.branches(x)), reduced) <= 1e-10
    assert t.elapsed < 5.0


@pytest.mark.acceptance("AC4", "nontrivial programs carry byproducts; byproduct-free counterfactual signals")
def test_ac4_theorem_census():
    with Timer() as t:
        # every nontrivial target needs a non-identity byproduct somewhere
        for n in (2, 3, 5):
            w = cluster.build_cluster(n)
            res = cluster.wire_resource(w)
            rng = np.random.default_rng(n)
            angle_sets = [tuple(rng.uniform(-np.pi, np.pi, n - 1)) for _ in range(3)]
            angle_sets.append((np.pi / 2,) * (n - 1))
            for angles, ff in itertools.product(angle_sets, [True, False]):
                prog = cluster.wire_program(WireProgram(angles, ff), w, res)
                if qmath.same_up_to_phase(prog.target, I2):
                    continue
                branches = core.enumerate_branches(prog)
                assert any(
                    b.byproduct is None or not b.byproduct.is_identity
                    for b in branches if b.probability > core.ZERO_PROBABILITY
                )

        w = cluster.build_cluster(3)
        res = cluster.wire_resource(w)
        hh = cluster.wire_program(WireProgram((0.0, 0.0)), w, res)
        hhz = cluster.wire_program(WireProgram((np.pi, 0.0)), w, res)
        np.testing.assert_allclose(hh.target, H @ H, atol=1e-15)
        np.testing.assert_allclose(hhz.target, H @ (H @ qmath.z_rotation(np.pi)), atol=1e-15)
        verdict = nosignal.theorem_check(res, [hh, hhz], counterfactual=True)
        gap = nosignal.byproductfree_signaling_gap(hh.target, hhz.target, hh.sigma)
        cf = verdict["counterfactual"]
        assert abs(cf["max_deviation"] - gap) <= 1e-10
        assert gap > 1e-10
        assert not cf["pass"]
        assert verdict["verdict"] == "FAIL"
        assert verdict["marginal_invariance"]["pass"]
    assert t.elapsed < 5.0


@pytest.mark.acceptance("AC5", "AKLT failure probability is exactly 3^-r; Kraus sets are complete")
def test_ac5_aklt_aggregate():
    with Timer() as t:
        for r in range(1, 9):
            runs = aklt.enumerate_retry(0.37, r, KET_PLUS)
            assert aklt.exact_failure(runs) == Fraction(1, 3**r)
            assert isinstance(aklt.exact_failure(runs), Fraction)
            assert sum((x.probability for x in runs), Fraction(0)) == 1
        for theta in np.linspace(0, 2 * np.pi, 16, endpoint=False):
            assert aklt.instrument(theta).completeness_residual() <= 1e-12
    assert t.elapsed < 5.0


@pytest.mark.acceptance("AC6", "failure-branch bound certifies I vs X at r=1, never U=V")
def test_ac6_discussion_bound(capsys):
    with Timer() as t:
        res = aklt.discussion_bound(I2, X, qmath.projector(KET_0), 1, Z, Z)
        assert abs(res.lhs - 2) <= 1e-12
        assert abs(res.rhs - 1) <= 1e-12
        assert res.certified is True
        code = cli.main(["certify-bound", "--U", "I", "--V", "X", "--sigma", "0", "--r", "1", "--json", "-"])
        assert code == cli.EXIT_OK
        assert '"certified": true' in capsys.readouterr().out
        for u, sigma, r in itertools.product([I2, H, X, qmath.rz(0.4)], [KET_0, KET_PLUS], range(1, 21)):
            fz = np.linalg.matrix_power(Z, r)
            assert not aklt.discussion_bound(u, u, qmath.projector(sigma), r, fz, fz).certified
    assert t.elapsed < 1.0


def _wire_counts(seed, shots):
    w = cluster.build_cluster(3)
    prog = cluster.wire_program(WireProgram((0.3, 1.1)), w)
    sampled = core.sample_branches(prog, seed, shots)
    counts = {}
    for b in sampled:
        counts[b.outcomes] = counts.get(b.outcomes, 0) + 1
    return counts, core.enumerate_branches(prog)


def _aklt_counts(seed, shots):
    runs = aklt.sample_retry(0.4, 2, KET_PLUS, seed, shots)
    counts = {}
    for run in runs:
        counts[run.outcomes] = counts.get(run.outcomes, 0) + 1
    return counts, aklt.enumerate_retry(0.4, 2, KET_PLUS)


@pytest.mark.acceptance("AC7", "10^5 sampled shots match enumeration within 5 sigma, reproducibly")
def test_ac7_sampling_consistency():
    shots, seed = 100_000, 20261016
    with Timer() as t:
        wire_counts, wire_branches = _wire_counts(seed, shots)
        assert sum(wire_counts.values()) == shots
        for b in wire_branches:
            assert binomial_ok(wire_counts.get(b.outcomes, 0), shots, b.probability)
        assert _wire_counts(seed, shots)[0] == wire_counts

        aklt_counts, runs = _aklt_counts(seed, shots)
        assert sum(aklt_counts.values()) == shots
        for run in runs:
            assert binomial_ok(aklt_counts.get(run.outcomes, 0), shots, float(run.probability))
        assert _aklt_counts(seed, shots)[0] == aklt_counts
    assert t.elapsed < 10.0
