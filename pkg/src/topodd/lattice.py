"""Square lattices on the torus and the plane, their duals, and Z2 chains.

Indexing conventions (``R`` rows of faces, ``C`` columns of faces):

* faces are row-major, ``face(i, j) = i*C + j``;
* horizontal edges come first, then vertical edges;
* torus:  ``h(i, j) = i*C + j``           joins vertex (i, j) to (i, j+1),
          ``v(i, j) = R*C + i*C + j``     joins vertex (i, j) to (i+1, j),
          all coordinates taken mod R / C;
* planar: ``h(i, j) = i*C + j``           for i in [0, R], j in [0, C),
          ``v(i, j) = (R+1)*C + i*(C+1) + j`` for i in [0, R), j in [0, C].

Face (i, j) is bounded by h(i, j), h(i+1, j), v(i, j), v(i, j+1) in both
topologies.  The dual of a lattice is flagged with ``is_dual=True`` and keeps
the primal ``rows``/``cols``; its own edge indices again list horizontal dual
edges first.  A dual horizontal edge crosses a primal vertical edge and vice
versa.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator


class Topology(str, enum.Enum):
    TORUS = "torus"
    PLANAR = "planar"


class HomologyClass(str, enum.Enum):
    TRIVIAL = "trivial"
    HANDLE = "handle"  # winds along the rows (horizontal rings)
    GENUS = "genus"  # winds along the columns (vertical rings)
    BOTH = "both"


class LatticeError(ValueError):
    """Raised on malformed lattice input (bad sizes, indices or cycles)."""


class _Bits:
    """Immutable F2 vector stored as an integer bit mask."""

    __slots__ = ("size", "mask")

    def __init__(self, size: int, mask: int = 0):
        if mask >> size:
            raise LatticeError(f"mask has bits beyond length {size}")
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def from_indices(cls, size: int, indices: Iterable[int]):
        mask = 0
        for k in indices:
            if not 0 <= k < size:
                raise LatticeError(f"index {k} out of range for length {size}")
            mask ^= 1 << k
        return cls(size, mask)

    def indices(self) -> list[int]:
        out, m, k = [], self.mask, 0
        while m:
            if m & 1:
                out.append(k)
            m >>= 1
            k += 1
        return out

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def __contains__(self, k: int) -> bool:
        return bool(self.mask >> k & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __xor__(self, other):
        if type(other) is not type(self) or other.size != self.size:
            raise LatticeError("cannot add vectors of different type or length")
        return type(self)(self.size, self.mask ^ other.mask)

    __add__ = __xor__

    def __eq__(self, other):
        return type(other) is type(self) and (self.size, self.mask) == (other.size, other.mask)

    def __hash__(self):
        return hash((type(self).__name__, self.size, self.mask))

    def __repr__(self):
        return f"{type(self).__name__}({self.size}, {self.indices()})"

    def to_json(self) -> list[int]:
        return self.indices()


class EdgeSet(_Bits):
    """Set of lattice edges; addition is symmetric difference."""


class FaceChain(_Bits):
    """Z2 formal sum of lattice faces."""


@dataclass(frozen=True)
class LatticeSpec:
    rows: int
    cols: int
    topology: Topology = Topology.TORUS
    is_dual: bool = False

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if self.rows < 1 or self.cols < 1:
            raise LatticeError("rows and cols must be positive")
        if self.topology is Topology.TORUS and min(self.rows, self.cols) < 2:
            raise LatticeError("a torus needs at least 2 rows and 2 columns")

    @classmethod
    def torus(cls, n: int, m: int | None = None) -> "LatticeSpec":
        return cls(n, n if m is None else m, Topology.TORUS)

    @classmethod
    def planar(cls, rows: int, cols: int) -> "LatticeSpec":
        return cls(rows, cols, Topology.PLANAR)

    @property
    def is_torus(self) -> bool:
        return self.topology is Topology.TORUS

    @property
    def edge_count(self) -> int:
        return _geometry(self).edge_count

    @property
    def face_count(self) -> int:
        return len(_geometry(self).face_edges)

    @property
    def vertex_count(self) -> int:
        return len(_geometry(self).vertex_edges)

    def to_json(self) -> dict:
        doc = {"rows": self.rows, "cols": self.cols, "topology": self.topology.value}
        if self.is_dual:
            doc["dual"] = True
        return doc

    @classmethod
    def from_json(cls, doc: dict | str) -> "LatticeSpec":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            return cls(int(doc["rows"]), int(doc["cols"]), Topology(doc["topology"]),
                       bool(doc.get("dual", False)))
        except (KeyError, ValueError, TypeError) as exc:
            raise LatticeError(f"bad lattice description {doc!r}") from exc

    def __str__(self):
        kind = f"{self.topology.value}{'-dual' if self.is_dual else ''}"
        return f"{kind} {self.rows}x{self.cols}"


@dataclass(frozen=True)
class _Geometry:
    edge_count: int
    horizontal: tuple[int, ...]
    vertical: tuple[int, ...]
    face_edges: tuple[tuple[int, ...], ...]
    vertex_edges: tuple[tuple[int, ...], ...]
    edge_vertices: tuple[tuple[int, ...], ...]  # 1 entry for dangling dual edges


def _incidence(n_vertices: int, edge_vertices) -> tuple[tuple[int, ...], ...]:
    inc: list[list[int]] = [[] for _ in range(n_vertices)]
    for e, ends in enumerate(edge_vertices):
        for v in ends:
            inc[v].append(e)
    return tuple(tuple(sorted(x)) for x in inc)


@lru_cache(maxsize=None)
def _geometry(lat: LatticeSpec) -> _Geometry:
    R, C = lat.rows, lat.cols
    if lat.is_torus:
        # the dual torus is again an R x C torus in its own indices
        E = 2 * R * C
        h = lambda i, j: (i % R) * C + (j % C)  # noqa: E731
        v = lambda i, j: R * C + (i % R) * C + (j % C)  # noqa: E731
        vid = lambda i, j: (i % R) * C + (j % C)  # noqa: E731
        ev = [None] * E
        for i in range(R):
            for j in range(C):
                ev[h(i, j)] = (vid(i, j), vid(i, j + 1))
                ev[v(i, j)] = (vid(i, j), vid(i + 1, j))
        faces = tuple(tuple(sorted((h(i, j), h(i + 1, j), v(i, j), v(i, j + 1))))
                      for i in range(R) for j in range(C))
        return _Geometry(E, tuple(range(R * C)), tuple(range(R * C, E)), faces,
                         _incidence(R * C, ev), tuple(ev))

    H = (R + 1) * C
    E = H + R * (C + 1)
    if not lat.is_dual:
        h = lambda i, j: i * C + j  # noqa: E731
        v = lambda i, j: H + i * (C + 1) + j  # noqa: E731
        vid = lambda i, j: i * (C + 1) + j  # noqa: E731
        ev = [None] * E
        for i in range(R + 1):
            for j in range(C):
                ev[h(i, j)] = (vid(i, j), vid(i, j + 1))
        for i in range(R):
            for j in range(C + 1):
                ev[v(i, j)] = (vid(i, j), vid(i + 1, j))
        faces = tuple(tuple(sorted((h(i, j), h(i + 1, j), v(i, j), v(i, j + 1))))
                      for i in range(R) for j in range(C))
        return _Geometry(E, tuple(range(H)), tuple(range(H, E)), faces,
                         _incidence((R + 1) * (C + 1), ev), tuple(ev))

    # planar dual: vertices sit in primal faces, faces are primal vertices,
    # boundary edges of the primal become dangling dual edges (rough boundary)
    V = R * (C + 1)  # dual horizontal edges, one per primal vertical edge
    primal = _geometry(LatticeSpec(R, C, Topology.PLANAR))
    to_dual = _planar_primal_to_dual(R, C)
    fid = lambda i, j: i * C + j  # noqa: E731
    ev = [None] * E
    for i in range(R):
        for j in range(C + 1):
            ev[i * (C + 1) + j] = tuple(fid(i, jj) for jj in (j - 1, j) if 0 <= jj < C)
    for i in range(R + 1):
        for j in range(C):
            ev[V + i * C + j] = tuple(fid(ii, j) for ii in (i - 1, i) if 0 <= ii < R)
    faces = tuple(tuple(sorted(to_dual[e] for e in cross)) for cross in primal.vertex_edges)
    return _Geometry(E, tuple(range(V)), tuple(range(V, E)), faces,
                     _incidence(R * C, ev), tuple(ev))


def _planar_primal_to_dual(R: int, C: int) -> tuple[int, ...]:
    H = (R + 1) * C
    V = R * (C + 1)
    return tuple(V + e if e < H else e - H for e in range(H + V))


def _torus_primal_to_dual(R: int, C: int) -> tuple[int, ...]:
    # dual vertex (x, y) sits in primal face (x, y); h(i, j) is crossed by the
    # dual vertical edge v'(i-1, j) and v(i, j) by the dual horizontal h'(i, j-1)
    out = [0] * (2 * R * C)
    for i in range(R):
        for j in range(C):
            out[i * C + j] = R * C + ((i - 1) % R) * C + j
            out[R * C + i * C + j] = i * C + (j - 1) % C
    return tuple(out)


def _check_edges(lat: LatticeSpec, edges: EdgeSet) -> None:
    if not isinstance(edges, EdgeSet) or edges.size != lat.edge_count:
        raise LatticeError(f"expected an EdgeSet of length {lat.edge_count}")


def horizontal_edges(lat: LatticeSpec) -> EdgeSet:
    return EdgeSet.from_indices(lat.edge_count, _geometry(lat).horizontal)


def vertical_edges(lat: LatticeSpec) -> EdgeSet:
    return EdgeSet.from_indices(lat.edge_count, _geometry(lat).vertical)


def face_edges(lat: LatticeSpec, face: int) -> EdgeSet:
    faces = _geometry(lat).face_edges
    if not 0 <= face < len(faces):
        raise LatticeError(f"face {face} out of range")
    return EdgeSet.from_indices(lat.edge_count, faces[face])


def boundary(lat: LatticeSpec, chain: FaceChain) -> EdgeSet:
    """Boundary of a face chain: symmetric difference of its faces' edges."""
    if not isinstance(chain, FaceChain) or chain.size != lat.face_count:
        raise LatticeError(f"chain length must equal face count {lat.face_count}")
    faces = _geometry(lat).face_edges
    mask = 0
    for f in chain:
        for e in faces[f]:
            mask ^= 1 << e
    return EdgeSet(lat.edge_count, mask)


def cross(lat: LatticeSpec, vertex: int) -> EdgeSet:
    """Edges incident on ``vertex``."""
    inc = _geometry(lat).vertex_edges
    if not 0 <= vertex < len(inc):
        raise LatticeError(f"vertex {vertex} out of range")
    return EdgeSet.from_indices(lat.edge_count, inc[vertex])


def edge_vertices(lat: LatticeSpec, edge: int) -> tuple[int, ...]:
    return _geometry(lat).edge_vertices[edge]


def dual(lat: LatticeSpec) -> tuple[LatticeSpec, tuple[int, ...]]:
    """Return the dual lattice and the map ``primal edge -> dual edge``.

    Dualizing a dual lattice gives back the primal together with the inverse
    map, so composing the two maps is the identity.
    """
    R, C = lat.rows, lat.cols
    fwd = _torus_primal_to_dual(R, C) if lat.is_torus else _planar_primal_to_dual(R, C)
    if not lat.is_dual:
        return LatticeSpec(R, C, lat.topology, True), fwd
    inv = [0] * len(fwd)
    for p, d in enumerate(fwd):
        inv[d] = p
    return LatticeSpec(R, C, lat.topology, False), tuple(inv)


def map_edges(edges: EdgeSet, mapping: tuple[int, ...]) -> EdgeSet:
    return EdgeSet.from_indices(edges.size, (mapping[e] for e in edges))


def is_cycle(lat: LatticeSpec, edges: EdgeSet) -> bool:
    """True iff every vertex meets an even number of the edges.

    Dangling edges of a planar dual have a single endpoint and so count as
    open ends.
    """
    _check_edges(lat, edges)
    parity = [0] * lat.vertex_count
    ev = _geometry(lat).edge_vertices
    for e in edges:
        for v in ev[e]:
            parity[v] ^= 1
    return not any(parity)


def homology_class(lat: LatticeSpec, cycle: EdgeSet) -> HomologyClass:
    """Classify a closed cycle on the torus by its two winding parities.

    The parities are intersection counts with two reference dual loops: the
    column of horizontal edges at j=0 (detects rings along the rows) and the
    row of vertical edges at i=0 (detects rings along the columns).
    """
    if not lat.is_torus:
        raise LatticeError("homology classes are defined for the torus only")
    if not is_cycle(lat, cycle):
        raise LatticeError("not a cycle")
    R, C = lat.rows, lat.cols
    handle = sum(1 for i in range(R) if (i * C) in cycle) & 1
    genus = sum(1 for j in range(C) if (R * C + j) in cycle) & 1
    return [[HomologyClass.TRIVIAL, HomologyClass.GENUS],
            [HomologyClass.HANDLE, HomologyClass.BOTH]][handle][genus]


def horizontal_ring(lat: LatticeSpec, row: int = 0) -> EdgeSet:
    """All horizontal edges in one row of vertices (torus)."""
    if not lat.is_torus:
        raise LatticeError("rings wrap the torus only")
    C = lat.cols
    return EdgeSet.from_indices(lat.edge_count, (row % lat.rows * C + j for j in range(C)))


def vertical_ring(lat: LatticeSpec, col: int = 0) -> EdgeSet:
    """All vertical edges in one column of vertices (torus)."""
    if not lat.is_torus:
        raise LatticeError("rings wrap the torus only")
    R, C = lat.rows, lat.cols
    return EdgeSet.from_indices(lat.edge_count, (R * C + i * C + col % C for i in range(R)))


def nearest_neighbor_pairs(lat: LatticeSpec) -> list[tuple[int, int]]:
    """Pairs of perpendicular edges that meet at a common vertex.

    These are the pairs sharing a face corner; collinear edges through a
    vertex are not included.
    """
    g = _geometry(lat)
    vert = set(g.vertical)
    pairs = set()
    for inc in g.vertex_edges:
        for a in inc:
            for b in inc:
                if a < b and (a in vert) != (b in vert):
                    pairs.add((a, b))
    return sorted(pairs)


def are_nearest_neighbors(lat: LatticeSpec, a: int, b: int) -> bool:
    return (min(a, b), max(a, b)) in set(nearest_neighbor_pairs(lat))


def all_faces(lat: LatticeSpec) -> FaceChain:
    return FaceChain(lat.face_count, (1 << lat.face_count) - 1)


# Qubit labels 1..7 of the 1x2 planar patch used in the numerical experiments:
# vertical edges carry labels 2, 4, 6 and horizontal edges 1, 3, 5, 7, with
# face 1 = {1, 2, 3, 4} and face 2 = {4, 5, 6, 7}.
PATCH_1X2_LABELS: dict[int, int] = {1: 0, 2: 4, 3: 2, 4: 5, 5: 1, 6: 6, 7: 3}


def patch_label_to_edge(label: int) -> int:
    return PATCH_1X2_LABELS[label]
