import random

import mpmath as mp
import pytest

from zpscan.errors import StructureViolation
from zpscan.isogeny import (
    CyclicSublattice,
    IsogenyWitness,
    cyclic_sublattices,
    isogeny_pair,
    make_witness,
    psi,
    recognize_quadratic,
    solve_de_rham,
    verify_isogeny_identity,
)
from zpscan.periods import Lattice, full_period_matrix

from conftest import random_lattice
from oracles import brute_force_cyclic_triples


def test_psi_counts():
    assert [psi(M) for M in (1, 2, 3, 4, 6, 12)] == [1, 3, 4, 6, 12, 24]


def test_enumeration_matches_brute_force():
    for M in range(1, 201):
        got = sorted((s.a, s.b, s.d) for s in cyclic_sublattices(M))
        assert got == brute_force_cyclic_triples(M)
        assert len(got) == psi(M)


def test_isogeny_pair_unit(ctx):
    lat = Lattice(mp.mpc(1), mp.mpc(mp.mpf(1) / 5, mp.mpf(6) / 5))
    target, hom = isogeny_pair(lat, CyclicSublattice(1, 0, 1), ctx)
    assert hom == (1, 0, 0, 1)


def test_isogeny_pair_square_lattice_example(ctx):
    lat = Lattice(mp.mpc(1), mp.mpc(0, 1))
    target, (p, q, r, s) = isogeny_pair(lat, CyclicSublattice(1, 0, 2), ctx)
    assert p * s - q * r == 2
    assert abs(target.omega1 - 1) < ctx.tol
    assert abs(target.omega2 - mp.mpc(0, 2)) < ctx.tol


def test_solve_de_rham_identity_isogeny(ctx):
    lat = Lattice(mp.mpc(1), mp.mpc(mp.mpf(1) / 5, mp.mpf(6) / 5))
    P1 = full_period_matrix(lat, ctx)
    a, b, c = solve_de_rham(P1, P1, (1, 0, 0, 1), ctx)
    assert abs(a - 1) < ctx.tol and abs(b) < ctx.tol and abs(c - 1) < ctx.tol


def test_solve_de_rham_rejects_wrong_homology(ctx):
    rng = random.Random(4)
    lat = random_lattice(rng)
    witness, target, P1, P2 = make_witness(lat, CyclicSublattice(1, 1, 2), ctx)
    p, q, r, s = witness.homology
    with pytest.raises(StructureViolation):
        solve_de_rham(P1, P2, (p + 1, q, r, s + 1), ctx)


def test_de_rham_determinant_matches_degree(ctx):
    lat = Lattice(mp.mpc(1), mp.mpc(0, 1))
    for sub in cyclic_sublattices(2):
        w, target, P1, P2 = make_witness(lat, sub, ctx)
        a, b, c = w.de_rham
        assert abs(a * c - 2) < ctx.tol


def test_identity_residual_and_perturbation(ctx):
    rng = random.Random(9)
    for _ in range(3):
        lat = random_lattice(rng)
        for sub in cyclic_sublattices(2):
            w, target, P1, P2 = make_witness(lat, sub, ctx)
            norm = max(abs(P2.p[i, j]) for i in range(2) for j in range(2))
            assert w.residual < ctx.tol * norm
            p, q, r, s = w.homology
            if s != 0:
                bad = IsogenyWitness(
                    degree=w.degree, de_rham=w.de_rham, homology=(p + 1, q, r, s), residual=w.residual
                )
                with pytest.raises(StructureViolation):
                    # perturbed integer matrix no longer has determinant M
                    verify_isogeny_identity(bad, P1, P2, ctx)
            # determinant-preserving perturbation: residual must blow up
            bad2 = IsogenyWitness(
                degree=w.degree,
                de_rham=w.de_rham,
                homology=(p + r, q + s, r, s),
                residual=w.residual,
            )
            res = verify_isogeny_identity(bad2, P1, P2, ctx)
            assert res > ctx.sqrt_tol


def test_scaling_invariance_of_de_rham(ctx):
    # multiplying both period matrices by one scalar conjugates nothing away:
    # A = P2*B*P1^-1 is invariant
    from zpscan.periods import FullPeriodMatrix

    rng = random.Random(14)
    lat = random_lattice(rng)
    with ctx.workprec():
        mu = mp.mpc(2, 1)
        w, target, P1, P2 = make_witness(lat, CyclicSublattice(1, 0, 3), ctx)
        P1b = FullPeriodMatrix(p=P1.p * mu, legendre_residual=P1.legendre_residual)
        P2b = FullPeriodMatrix(p=P2.p * mu, legendre_residual=P2.legendre_residual)
        a2, b2, c2 = solve_de_rham(P1b, P2b, w.homology, ctx)
        for got, want in zip((a2, b2, c2), w.de_rham):
            assert abs(got - want) < ctx.sqrt_tol * max(1, abs(want))


def test_all_degrees_up_to_12(ctx):
    rng = random.Random(19)
    lat = random_lattice(rng)
    for M in range(1, 13):
        for sub in cyclic_sublattices(M):
            w, target, P1, P2 = make_witness(lat, sub, ctx)
            p, q, r, s = w.homology
            assert p * s - q * r == M
            norm = max(abs(P2.p[i, j]) for i in range(2) for j in range(2))
            assert w.residual < ctx.tol * norm
            assert abs(w.de_rham[0] * w.de_rham[2] - M) < ctx.tol * M


def test_duality_chain(ctx):
    # L > L' > M*L: composing the homology matrix with its adjugate realizes
    # multiplication by M, so the composite has determinant M^2 and all
    # entries divisible by M
    rng = random.Random(23)
    lat = random_lattice(rng)
    for sub in (CyclicSublattice(2, 1, 2), CyclicSublattice(1, 2, 6)):
        M = sub.degree
        w, target, P1, P2 = make_witness(lat, sub, ctx)
        p, q, r, s = w.homology
        comp = [[s * p - q * r, 0], [0, p * s - r * q]]
        adj = [[s, -q], [-r, p]]
        B = [[p, q], [r, s]]
        composite = [
            [sum(adj[i][k] * B[k][j] for k in range(2)) for j in range(2)]
            for i in range(2)
        ]
        det = composite[0][0] * composite[1][1] - composite[0][1] * composite[1][0]
        assert det == M * M
        for row in composite:
            for entry in row:
                assert entry % M == 0


def test_recognize_quadratic_probe(ctx):
    with ctx.workprec():
        val = mp.mpc(2)  # a = 2 for a degree-2 isogeny with diagonal homology
        assert recognize_quadratic(val, 10, ctx) == (0, 1, -2)
        golden = (1 + mp.sqrt(5)) / 2
        assert recognize_quadratic(golden, 10, ctx) == (1, -1, -1)
        assert recognize_quadratic(mp.mpc(mp.pi), 10, ctx) is None
