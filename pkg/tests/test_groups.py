import json
import time

import pytest

from topodd import groups as grp
from topodd import lattice as lat
from topodd.groups import GroupError, GroupLabel
from topodd.lattice import EdgeSet, HomologyClass, LatticeSpec
from topodd.pauli import PauliString, commutes


@pytest.mark.parametrize("n,order", [(2, 8), (3, 256)])
def test_bz_order(n, order):
    g = grp.build_bz(LatticeSpec.torus(n))
    assert g.order == order == 2 ** (n * n - 1)
    assert len({e.key() for e in g.elements}) == order


@pytest.mark.parametrize("n,order", [(2, 64), (3, 65536)])
def test_bxz_order_and_speed(n, order):
    t0 = time.perf_counter()
    g = grp.build("Bxz", LatticeSpec.torus(n))
    assert g.order == order
    assert len({e.key() for e in g.elements}) == order
    assert time.perf_counter() - t0 < 5


def test_bz_matches_boundary_oracle():
    L = LatticeSpec.torus(3)
    g = grp.build_bz(L)
    assert {e.z for e in g.elements} == grp.boundary_image(L)
    assert all(e.x == 0 for e in g.elements)


def test_bz_elements_are_trivial_cycles():
    L = LatticeSpec.torus(3)
    for e in grp.build_bz(L).elements:
        assert lat.homology_class(L, EdgeSet(L.edge_count, e.z)) is HomologyClass.TRIVIAL


def test_bx_lives_on_dual_crosses():
    L = LatticeSpec.torus(3)
    bx = grp.build_bx(L)
    crosses = {lat.cross(L, v).mask for v in range(L.vertex_count)}
    assert all(g.z == 0 and g.x in crosses for g in bx.generators)
    assert all(commutes(a, b) for a in bx.generators for b in grp.build_bz(L).generators)


@pytest.mark.parametrize("L", [LatticeSpec.torus(2), LatticeSpec.torus(3), LatticeSpec.planar(1, 2)])
def test_closure(L):
    for name in ("Tz", "Tx", "Txz"):
        assert grp.is_closed(grp.build(name, L))
    if L.is_torus:
        assert grp.is_closed(grp.build_bz(L))


def test_t_groups():
    L = LatticeSpec.torus(3)
    tz, tx, txz = grp.build_tz(L), grp.build_tx(L), grp.build_txz(L)
    assert (tz.order, tx.order, txz.order) == (4, 4, 16)
    ops = grp.t_operators(L)
    assert ops["t1"].z == lat.vertical_edges(L).mask
    assert ops["t2"].z == lat.horizontal_edges(L).mask
    # binary-counting element order: I, t1, t2, t1 t2
    assert [e.z for e in tz.elements] == [0, ops["t1"].z, ops["t2"].z, ops["t1"].z ^ ops["t2"].z]


def test_planar_t_operators():
    P = LatticeSpec.planar(1, 2)
    lab = lat.PATCH_1X2_LABELS
    ops = grp.t_operators(P)

    def labels(p):
        inv = {q: k for k, q in lab.items()}
        return sorted(inv[q] for q in p.support)

    assert labels(ops["t1"]) == [2, 4, 6] and ops["t1"].x == 0
    assert labels(ops["t2"]) == [1, 3, 5, 7]
    assert labels(ops["t1d"]) == [1, 3, 5, 7] and ops["t1d"].z == 0
    assert labels(ops["t2d"]) == [2, 4, 6] and ops["t2d"].z == 0
    assert grp.build_tz(P).label is GroupLabel.TZ_PLANAR


def test_generators_only_and_enumerate():
    L = LatticeSpec.torus(3)
    lazy = grp.build_bz(L, full=False)
    assert not lazy.is_enumerated and lazy.order == 256
    full = lazy.enumerate()
    assert full.is_enumerated and full.index_of(full.element(17)) == 17
    assert PauliString(18, 0, full.element(5).z) in full


def test_cap():
    with pytest.raises(GroupError):
        grp.build_bz(LatticeSpec.torus(4), full=True, cap=3)
    assert grp.build_bz(LatticeSpec.torus(4), full=False).order == 2 ** 15


def test_redundant_generators_are_dropped():
    p = PauliString(3, 0, 0b011)
    q = PauliString(3, 0, 0b110)
    g = grp.make_group([p, q, p * q])
    assert g.order == 4 and len(g.generators) == 2


def test_json_dump_sorted():
    g = grp.build_tz(LatticeSpec.planar(1, 2))
    doc = json.loads(g.dumps())
    assert doc["schema"] == "topodd.group/1" and doc["order"] == 4
    assert doc["elements"][0] == "+ I"


def test_unknown_group():
    with pytest.raises(GroupError):
        grp.build("Q", LatticeSpec.torus(2))
