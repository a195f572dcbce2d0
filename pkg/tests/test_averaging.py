from fractions import Fraction

import numpy as np
import pytest

from topodd import averaging as avg
from topodd import groups as grp
from topodd import lattice as lat
from topodd.averaging import HamiltonianSpec, HamiltonianTerm
from topodd.lattice import LatticeSpec
from topodd.pauli import PauliString, to_matrix


def random_terms(n: int, count: int, seed: int) -> list[PauliString]:
    rng = np.random.default_rng(seed)
    return [PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n))).hermitian()
            for _ in range(count)]


def dense(h: HamiltonianSpec) -> np.ndarray:
    return sum((float(t.coefficient) * to_matrix(t.system) for t in h.terms),
               np.zeros((1 << h.n_qubits,) * 2, dtype=complex))


# -- the averaging map ---------------------------------------------------------------

def test_matches_dense_group_sum():
    # oracle: (1/|G|) sum_g g^dag A g with explicit matrices
    L = LatticeSpec.torus(2)
    g = grp.build_bz(L)
    mats = [to_matrix(e) for e in g.elements]
    for p in random_terms(L.edge_count, 25, 3):
        want = sum(m.conj().T @ to_matrix(p) @ m for m in mats) / g.order
        got = dense(avg.average(g, HamiltonianSpec.of(L.edge_count, p)))
        assert np.allclose(got, want)


@pytest.mark.parametrize("n", [2, 3])
def test_generators_equal_enumeration(n):
    L = LatticeSpec.torus(n)
    groups = [grp.build_bz(L), grp.build_bx(L), grp.build("Bxz", L), grp.build_txz(L)]
    for p in random_terms(L.edge_count, 200, n):
        for g in groups:
            assert avg.averaging_factor(g, p, "generators") == avg.averaging_factor(g, p, "enumerate")


def test_linear_and_idempotent():
    L = LatticeSpec.torus(3)
    g = grp.build_tz(L)
    a = avg.coupling_hamiltonian(L.edge_count)
    b = HamiltonianSpec(L.edge_count, tuple(HamiltonianTerm(p, Fraction(3, 2)) for p in random_terms(18, 30, 9)))
    assert avg.average(g, a + b) == avg.average(g, a) + avg.average(g, b)
    once = avg.average(g, a + b)
    assert avg.average(g, once) == once


def test_nested_equals_product():
    L = LatticeSpec.torus(3)
    tz, tx = grp.build_tz(L), grp.build_tx(L)
    h = avg.local_terms(L.edge_count) + HamiltonianSpec.of(18, *random_terms(18, 50, 1))
    assert avg.average(tx, avg.average(tz, h)) == avg.average(grp.build_txz(L), h)


def test_term_normalisation():
    n = 2
    y = PauliString.single(n, 0, "y")
    t = HamiltonianTerm(-y)
    assert t.system == y and t.coefficient == -1
    assert HamiltonianSpec.of(n, y, HamiltonianTerm(y, Fraction(-1))).is_zero()
    with pytest.raises(ValueError):
        HamiltonianTerm(PauliString(n, 1, 0, 1))


# -- the named identities --------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3])
def test_bxz_kills_local_terms_keeps_cycles(n):
    L = LatticeSpec.torus(n)
    bxz = grp.build("Bxz", L)
    for q in range(L.edge_count):
        for a in avg.AXES:
            assert avg.averaging_factor(bxz, PauliString.single(L.edge_count, q, a)) == 0
    t1 = grp.t_operators(L)["t1"]
    assert avg.average(bxz, HamiltonianSpec.of(L.edge_count, t1)) == HamiltonianSpec.of(L.edge_count, t1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_torus_identities(n):
    checks = avg.verify_torus(LatticeSpec.torus(n))
    assert [c.status for c in checks] == ["pass"] * len(checks), [c.to_json() for c in checks]


def test_tz_keeps_exactly_z_terms():
    L = LatticeSpec.torus(3)
    h = avg.coupling_hamiltonian(L.edge_count)
    out = avg.average(grp.build_tz(L), h)
    assert len(out) == L.edge_count
    assert all(t.system.x == 0 and t.env_label.startswith("E_z") for t in out.terms)


@pytest.mark.parametrize("shape", [(1, 2), (3, 3)])
def test_planar_identities(shape):
    checks = avg.verify_planar(LatticeSpec.planar(*shape))
    assert all(c.passed for c in checks), [c.to_json() for c in checks]


def test_heisenberg_n3():
    L = LatticeSpec.torus(3)
    a, b = lat.nearest_neighbor_pairs(L)[0]
    rep = avg.verify_heisenberg(L, a, b)
    assert rep.passed
    assert rep.anticommuting == 128 == 2 ** (9 - 2)
    assert rep.after_bz == HamiltonianSpec.of(18, avg.pair_term(18, a, b, "z", "z"))
    assert rep.after_bx.is_zero()


def test_heisenberg_rank_count_matches_enumeration():
    L = LatticeSpec.torus(3)
    bz = grp.build_bz(L)
    for a, b in lat.nearest_neighbor_pairs(L)[:6]:
        h = avg.heisenberg(18, a, b)
        assert avg.anticommuting_count(bz, h) == avg.anticommuting_count_enumerated(bz, h)


def test_heisenberg_rejects_non_neighbours():
    L = LatticeSpec.torus(3)
    h = lat.horizontal_edges(L).indices()
    with pytest.raises(lat.LatticeError):
        avg.verify_heisenberg(L, h[0], h[1])


def test_failed_check_reports_counterexample():
    n = 2
    got = HamiltonianSpec.of(n, PauliString.single(n, 1, "x"))
    c = avg.check_zero("should_vanish", got)
    assert not c.passed and "XI" not in c.counterexample and "IX" in c.counterexample
