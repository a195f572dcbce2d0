"""Decoupling groups built from lattice cycles.

Every group here is generated by mutually commuting-up-to-sign Pauli strings,
so elements are identified modulo phase and stored as phase-0 representatives.
Element ``k`` of an enumerated group is the product of the generators whose
bit is set in ``k`` (binary counting order); for the two-generator T groups
this gives ``I, t1, t2, t1 t2``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import lattice as lat
from .lattice import FaceChain, LatticeSpec
from .pauli import PauliString, from_edgeset, multiply

DEFAULT_CAP = 3
MAX_ELEMENTS = 1 << 20


class GroupLabel(str, enum.Enum):
    BZ = "Bz"
    BX = "Bx"
    BXZ = "Bxz"
    TZ = "Tz"
    TX = "Tx"
    TZ_PLANAR = "TzPlanar"
    TX_PLANAR = "TxPlanar"
    TXZ = "Txz"
    TRIVIAL = "I"
    CUSTOM = "custom"


class GroupError(ValueError):
    pass


def _independent(gens: list[PauliString]) -> list[PauliString]:
    """Greedy F2-independent subset, in input order."""
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    keep = []
    for g in gens:
        v = g.x | (g.z << g.n)
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                keep.append(g)
                break
            v ^= basis[top]
    return keep


@dataclass(frozen=True)
class DecouplingGroup:
    label: GroupLabel
    n_qubits: int
    generators: tuple[PauliString, ...]
    elements: tuple[PauliString, ...] | None = None
    lattice: LatticeSpec | None = field(default=None, compare=False)

    @property
    def order(self) -> int:
        return 1 << len(self.generators)

    @property
    def is_enumerated(self) -> bool:
        return self.elements is not None

    def enumerate(self) -> "DecouplingGroup":
        if self.elements is not None:
            return self
        return DecouplingGroup(self.label, self.n_qubits, self.generators,
                               _enumerate(self.generators), self.lattice)

    def generators_only(self) -> "DecouplingGroup":
        return DecouplingGroup(self.label, self.n_qubits, self.generators, None, self.lattice)

    def element(self, k: int) -> PauliString:
        """Element ``k`` in binary counting order over the generators."""
        if self.elements is not None:
            return self.elements[k]
        p = PauliString.identity(self.n_qubits)
        for j, g in enumerate(self.generators):
            if k >> j & 1:
                p = p * g
        return p.canonical()

    def index_of(self, p: PauliString) -> int:
        try:
            return self._index[p.key()]
        except KeyError:
            raise GroupError(f"{p} is not an element of {self.label.value}") from None

    @cached_property
    def _index(self) -> dict[tuple[int, int], int]:
        els = self.elements if self.elements is not None else _enumerate(self.generators)
        return {e.key(): k for k, e in enumerate(els)}

    def __contains__(self, p: PauliString) -> bool:
        return p.key() in self._index

    @cached_property
    def masks(self) -> tuple[np.ndarray, np.ndarray]:
        """Element masks as uint64 arrays (requires enumeration and <= 64 qubits)."""
        if self.elements is None:
            raise GroupError("group is not enumerated")
        if self.n_qubits > 64:
            raise GroupError("vectorised masks need at most 64 qubits")
        xs = np.fromiter((e.x for e in self.elements), dtype=np.uint64, count=self.order)
        zs = np.fromiter((e.z for e in self.elements), dtype=np.uint64, count=self.order)
        return xs, zs

    def to_json(self) -> dict:
        els = self.elements if self.elements is not None else _enumerate(self.generators)
        ordered = sorted(els, key=lambda e: (e.x, e.z))
        return {
            "schema": "topodd.group/1",
            "label": self.label.value,
            "n_qubits": self.n_qubits,
            "order": self.order,
            "generators": [g.to_text() for g in self.generators],
            "elements": [e.to_text() for e in ordered],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _enumerate(gens) -> tuple[PauliString, ...]:
    size = 1 << len(gens)
    if size > MAX_ELEMENTS:
        raise GroupError(f"refusing to enumerate {size} elements")
    n = gens[0].n if gens else 0
    xs = [0] * size
    zs = [0] * size
    for j, g in enumerate(gens):
        step = 1 << j
        for k in range(step):
            xs[k + step] = xs[k] ^ g.x
            zs[k + step] = zs[k] ^ g.z
    return tuple(PauliString(n, x, z) for x, z in zip(xs, zs))


def make_group(generators, label: GroupLabel = GroupLabel.CUSTOM, *, full: bool = True,
               lattice: LatticeSpec | None = None, n_qubits: int | None = None) -> DecouplingGroup:
    gens = [g.canonical() for g in generators]
    if n_qubits is None:
        if not gens:
            raise GroupError("need n_qubits for an empty generator list")
        n_qubits = gens[0].n
    gens = tuple(_independent([g for g in gens if not g.is_identity()]))
    group = DecouplingGroup(label, n_qubits, gens, None, lattice)
    return group.enumerate() if full else group


def trivial_group(n_qubits: int) -> DecouplingGroup:
    return make_group([], GroupLabel.TRIVIAL, n_qubits=n_qubits)


def _face_generators(lattice: LatticeSpec, to_qubit, axis: str) -> list[PauliString]:
    faces = [lat.face_edges(lattice, f) for f in range(lattice.face_count)]
    return _independent([from_edgeset(lat.map_edges(f, to_qubit), axis) for f in faces])


def _check_cap(lattice: LatticeSpec, full: bool, cap: int) -> None:
    if full and max(lattice.rows, lattice.cols) > cap:
        raise GroupError(
            f"full enumeration capped at size {cap}; {lattice} requested (use full=False)")


def build_bz(lattice: LatticeSpec, *, full: bool = True, cap: int = DEFAULT_CAP) -> DecouplingGroup:
    """Z strings on the boundaries of all face chains of the primal lattice."""
    _check_cap(lattice, full, cap)
    ident = tuple(range(lattice.edge_count))
    gens = _face_generators(lattice, ident, "Z")
    return make_group(gens, GroupLabel.BZ, full=full, lattice=lattice, n_qubits=lattice.edge_count)


def build_bx(lattice: LatticeSpec, *, full: bool = True, cap: int = DEFAULT_CAP) -> DecouplingGroup:
    """X strings on the boundaries of all face chains of the dual lattice."""
    _check_cap(lattice, full, cap)
    dlat, _ = lat.dual(lattice)
    _, to_primal = lat.dual(dlat)
    gens = _face_generators(dlat, to_primal, "X")
    return make_group(gens, GroupLabel.BX, full=full, lattice=lattice, n_qubits=lattice.edge_count)


def direct_product(a: DecouplingGroup, b: DecouplingGroup, label: GroupLabel = GroupLabel.CUSTOM,
                   *, full: bool | None = None) -> DecouplingGroup:
    """Group generated by the generators of ``a`` followed by those of ``b``."""
    if a.n_qubits != b.n_qubits:
        raise GroupError("groups act on different qubit counts")
    if full is None:
        full = a.is_enumerated and b.is_enumerated
    return make_group(a.generators + b.generators, label, full=full,
                      lattice=a.lattice, n_qubits=a.n_qubits)


def build_bxz(bz: DecouplingGroup, bx: DecouplingGroup, *, full: bool | None = None) -> DecouplingGroup:
    return direct_product(bx, bz, GroupLabel.BXZ, full=full)


def t_operators(lattice: LatticeSpec) -> dict[str, PauliString]:
    """The cycle operators ``t1``, ``t2``, ``t1d``, ``t2d`` of a primal lattice.

    ``t1``/``t2`` are Z on all vertical/horizontal edges.  ``t1d``/``t2d`` are
    X on the vertical/horizontal edges of the dual lattice, which are the
    horizontal/vertical edges of the primal.
    """
    if lattice.is_dual:
        raise GroupError("pass the primal lattice")
    vert = lat.vertical_edges(lattice)
    hor = lat.horizontal_edges(lattice)
    return {
        "t1": from_edgeset(vert, "Z"),
        "t2": from_edgeset(hor, "Z"),
        "t1d": from_edgeset(hor, "X"),
        "t2d": from_edgeset(vert, "X"),
    }


def build_tz(lattice: LatticeSpec) -> DecouplingGroup:
    t = t_operators(lattice)
    label = GroupLabel.TZ if lattice.is_torus else GroupLabel.TZ_PLANAR
    return make_group([t["t1"], t["t2"]], label, lattice=lattice)


def build_tx(lattice: LatticeSpec) -> DecouplingGroup:
    t = t_operators(lattice)
    label = GroupLabel.TX if lattice.is_torus else GroupLabel.TX_PLANAR
    return make_group([t["t1d"], t["t2d"]], label, lattice=lattice)


def build_txz(lattice: LatticeSpec) -> DecouplingGroup:
    """Product of T^z and T^x; its average equals nested T^x(T^z(.)) averaging."""
    return direct_product(build_tz(lattice), build_tx(lattice), GroupLabel.TXZ)


def build(name: str, lattice: LatticeSpec, *, full: bool = True, cap: int = DEFAULT_CAP) -> DecouplingGroup:
    """Build a group by name: Bz, Bx, Bxz, Tz, Tx, Txz (planar T variants implied)."""
    key = name.lower()
    if key == "bz":
        return build_bz(lattice, full=full, cap=cap)
    if key == "bx":
        return build_bx(lattice, full=full, cap=cap)
    if key == "bxz":
        _check_cap(lattice, full, cap)
        return build_bxz(build_bz(lattice, full=False), build_bx(lattice, full=False), full=full)
    if key in ("tz", "tzplanar"):
        return build_tz(lattice)
    if key in ("tx", "txplanar"):
        return build_tx(lattice)
    if key == "txz":
        return build_txz(lattice)
    raise GroupError(f"unknown group {name!r}")


def is_closed(group: DecouplingGroup) -> bool:
    """Exhaustive closure check modulo phase."""
    g = group.enumerate()
    keys = {e.key() for e in g.elements}
    return all(multiply(a, b).key() in keys for a in g.elements for b in g.elements)


def boundary_image(lattice: LatticeSpec) -> set[int]:
    """Masks of all boundaries of face chains, by brute force over 2**faces chains."""
    F = lattice.face_count
    if F > 20:
        raise GroupError("too many faces for exhaustive enumeration")
    return {lat.boundary(lattice, FaceChain(F, c)).mask for c in range(1 << F)}
