"""Exact group averaging of Pauli-decomposed Hamiltonians.

For a Pauli term ``P`` and a group ``G`` of Pauli strings,
``(1/|G|) sum_g g^dag P g = P * (n_commuting - n_anticommuting) / |G|``.
Environment operators are opaque labels that ride along with the system
factor; averaging never touches them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

from . import groups as grp
from . import lattice as lat
from .groups import DecouplingGroup
from .lattice import LatticeSpec
from .pauli import PauliError, PauliString, commutes

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class HamiltonianTerm:
    system: PauliString
    coefficient: Real = Fraction(1)
    env_label: str | None = None

    def __post_init__(self):
        if not self.system.is_hermitian():
            raise PauliError(f"term {self.system} is not Hermitian")
        if isinstance(self.coefficient, float) and not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        herm = self.system.hermitian()
        coeff = self.coefficient if herm.phase == self.system.phase else -self.coefficient
        object.__setattr__(self, "system", herm)
        object.__setattr__(self, "coefficient", coeff)

    @property
    def key(self) -> tuple[int, int, str | None]:
        return (self.system.x, self.system.z, self.env_label)

    def to_text(self) -> str:
        env = f" (x) {self.env_label}" if self.env_label else ""
        return f"{self.coefficient} * [{self.system.to_label()}]{env}"


@dataclass(frozen=True)
class HamiltonianSpec:
    """Canonical sum of terms: identical (system, env) merged, zeros dropped."""

    n_qubits: int
    terms: tuple[HamiltonianTerm, ...] = ()

    def __post_init__(self):
        merged: dict[tuple, HamiltonianTerm] = {}
        for t in self.terms:
            if t.system.n != self.n_qubits:
                raise PauliError("term acts on the wrong number of qubits")
            if t.key in merged:
                old = merged[t.key]
                merged[t.key] = HamiltonianTerm(old.system, old.coefficient + t.coefficient, t.env_label)
            else:
                merged[t.key] = t
        object.__setattr__(self, "terms", tuple(t for t in merged.values() if t.coefficient != 0))

    @classmethod
    def of(cls, n_qubits: int, *terms: HamiltonianTerm | PauliString) -> "HamiltonianSpec":
        return cls(n_qubits, tuple(t if isinstance(t, HamiltonianTerm) else HamiltonianTerm(t)
                                   for t in terms))

    def as_dict(self) -> dict[tuple, Real]:
        return {t.key: t.coefficient for t in self.terms}

    def __eq__(self, other):
        return isinstance(other, HamiltonianSpec) and self.n_qubits == other.n_qubits \
            and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.n_qubits, frozenset(self.as_dict().items())))

    def __add__(self, other: "HamiltonianSpec") -> "HamiltonianSpec":
        return HamiltonianSpec(self.n_qubits, self.terms + other.terms)

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self) -> list[dict]:
        return [{"pauli": t.system.to_text(), "coefficient": str(t.coefficient),
                 "env": t.env_label} for t in self.terms]


def sign_counts(elements: Sequence[PauliString], p: PauliString) -> tuple[int, int]:
    """(#commuting, #anticommuting) elements of a chunk; pure, so shardable."""
    anti = sum(1 for g in elements if not commutes(g, p))
    return len(elements) - anti, anti


def _vector_counts(group: DecouplingGroup, p: PauliString) -> tuple[int, int]:
    xs, zs = group.masks
    par = np.bitwise_count((xs & np.uint64(p.z)) ^ (zs & np.uint64(p.x))) & np.uint64(1)
    anti = int(par.sum())
    return group.order - anti, anti


def averaging_factor(group: DecouplingGroup, p: PauliString, method: str = "auto") -> Fraction:
    """Exact factor multiplying ``p`` under averaging over ``group``.

    ``method='generators'`` uses only generator commutation (the sign map is
    a character of the group, so the sum vanishes unless it is trivial);
    ``'enumerate'`` sums over every element; ``'auto'`` enumerates when the
    group carries its elements.
    """
    if p.n != group.n_qubits:
        raise PauliError("qubit count mismatch between group and term")
    if method == "auto":
        method = "enumerate" if group.is_enumerated else "generators"
    if method == "generators":
        return Fraction(int(all(commutes(g, p) for g in group.generators)))
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    g = group.enumerate()
    if g.n_qubits <= 64 and g.order > 64:
        com, anti = _vector_counts(g, p)
    else:
        com, anti = sign_counts(g.elements, p)
    return Fraction(com - anti, g.order)


def average(group: DecouplingGroup, h: HamiltonianSpec, method: str = "auto") -> HamiltonianSpec:
    if h.n_qubits != group.n_qubits:
        raise PauliError("qubit count mismatch between group and Hamiltonian")
    out = []
    for t in h.terms:
        f = averaging_factor(group, t.system, method)
        if f:
            out.append(HamiltonianTerm(t.system, t.coefficient * f, t.env_label))
    return HamiltonianSpec(h.n_qubits, tuple(out))


def anticommuting_count(group: DecouplingGroup, h: HamiltonianSpec) -> int:
    """Number of group elements that fail to commute with at least one term.

    Computed from generators: elements commuting with every term form a
    subgroup of index ``2**rank`` where ``rank`` is the F2 rank of the terms'
    generator-commutation vectors.
    """
    rows = []
    for t in h.terms:
        rows.append(sum((not commutes(g, t.system)) << j for j, g in enumerate(group.generators)))
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return group.order - (group.order >> len(basis))


def anticommuting_count_enumerated(group: DecouplingGroup, h: HamiltonianSpec) -> int:
    g = group.enumerate()
    return sum(1 for e in g.elements if any(not commutes(e, t.system) for t in h.terms))


# -- Hamiltonian builders -------------------------------------------------

def env_label(axis: str, qubit: int) -> str:
    return f"E_{axis}^{qubit}"


def coupling_hamiltonian(n: int, axes: dict[int, Iterable[str]] | None = None) -> HamiltonianSpec:
    """``sum_i sum_a sigma_a^i (x) E_a^i``; all three axes on every qubit by default."""
    if axes is None:
        axes = {q: AXES for q in range(n)}
    terms = [HamiltonianTerm(PauliString.single(n, q, a), Fraction(1), env_label(a, q))
             for q, al in sorted(axes.items()) for a in al]
    return HamiltonianSpec(n, tuple(terms))


def local_terms(n: int) -> HamiltonianSpec:
    return HamiltonianSpec.of(n, *(PauliString.single(n, q, a) for q in range(n) for a in AXES))


def pair_term(n: int, a: int, b: int, axis_a: str, axis_b: str, coefficient: Real = Fraction(1)) -> HamiltonianTerm:
    return HamiltonianTerm(PauliString.from_axes(n, {a: axis_a, b: axis_b}), coefficient)


def heisenberg(n: int, a: int, b: int, coefficient: Real = Fraction(1)) -> HamiltonianSpec:
    return HamiltonianSpec(n, tuple(pair_term(n, a, b, s, s, coefficient) for s in AXES))


# -- verification reports -------------------------------------------------

@dataclass
class Check:
    identity_name: str
    status: str
    counterexample: str | None = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        doc = {"identity_name": self.identity_name, "status": self.status}
        if self.counterexample is not None:
            doc["counterexample"] = self.counterexample
        if self.detail:
            doc["detail"] = self.detail
        return doc


def expect_equal(name: str, got: HamiltonianSpec, want: HamiltonianSpec, **detail) -> Check:
    if got == want:
        return Check(name, "pass", detail=detail)
    extra = [t for t in got.terms if t.key not in want.as_dict()
             or want.as_dict()[t.key] != t.coefficient]
    missing = [t for t in want.terms if t.key not in got.as_dict()]
    bad = extra[0] if extra else missing[0]
    return Check(name, "fail", bad.to_text(), detail)


def check_zero(name: str, got: HamiltonianSpec, **detail) -> Check:
    return expect_equal(name, got, HamiltonianSpec(got.n_qubits), **detail)


def z_part(h: HamiltonianSpec) -> HamiltonianSpec:
    """Terms whose system factor is a pure Z string."""
    return HamiltonianSpec(h.n_qubits, tuple(t for t in h.terms if t.system.x == 0))


@dataclass
class HeisenbergReport:
    lattice: LatticeSpec
    pair: tuple[int, int]
    group_order: int
    anticommuting: int
    expected_anticommuting: int
    after_bz: HamiltonianSpec
    after_bx: HamiltonianSpec
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_heisenberg(lattice: LatticeSpec, a: int, b: int, *, cap: int = grp.DEFAULT_CAP) -> HeisenbergReport:
    """Heisenberg coupling of a corner-sharing pair under B^z, then B^x."""
    if not lattice.is_torus:
        raise lat.LatticeError("Heisenberg analysis is stated for the torus")
    if not lat.are_nearest_neighbors(lattice, a, b):
        raise lat.LatticeError(f"qubits {a} and {b} are not nearest neighbours")
    n = lattice.edge_count
    full = max(lattice.rows, lattice.cols) <= cap
    bz = grp.build_bz(lattice, full=full, cap=cap)
    bx = grp.build_bx(lattice, full=full, cap=cap)
    h = heisenberg(n, a, b)
    anti = anticommuting_count_enumerated(bz, h) if full else anticommuting_count(bz, h)
    expected = 1 << (lattice.face_count - 2)
    after_bz = average(bz, h)
    after_bx = average(bx, after_bz)
    zz = HamiltonianSpec.of(n, pair_term(n, a, b, "z", "z"))
    checks = [
        Check("heisenberg_anticommuting_count", "pass" if anti == expected else "fail",
              None if anti == expected else str(anti),
              {"count": anti, "expected": expected, "order": bz.order}),
        expect_equal("heisenberg_after_Bz_is_zz", after_bz, zz),
        check_zero("heisenberg_after_Bx_vanishes", after_bx),
    ]
    return HeisenbergReport(lattice, (a, b), bz.order, anti, expected, after_bz, after_bx, checks)


def _pair_checks(lattice: LatticeSpec, tz: DecouplingGroup, tx: DecouplingGroup) -> Check:
    n = lattice.edge_count
    for a, b in lat.nearest_neighbor_pairs(lattice):
        for sa in AXES:
            for sb in AXES:
                h = HamiltonianSpec.of(n, pair_term(n, a, b, sa, sb))
                out = average(tx, average(tz, h))
                if not out.is_zero():
                    return Check("nearest_neighbor_pairs_vanish", "fail", out.terms[0].to_text(),
                                 {"pair": [a, b]})
    return Check("nearest_neighbor_pairs_vanish", "pass",
                 detail={"pairs": len(lat.nearest_neighbor_pairs(lattice)), "axis_combinations": 9})


def verify_planar(lattice: LatticeSpec) -> list[Check]:
    """Coupling and pair identities for the T groups of a planar patch."""
    if lattice.is_torus:
        raise lat.LatticeError("expected a planar lattice")
    n = lattice.edge_count
    tz, tx = grp.build_tz(lattice), grp.build_tx(lattice)
    hse = coupling_hamiltonian(n)
    after_z = average(tz, hse)
    ident = HamiltonianSpec.of(n, PauliString.identity(n))
    return [
        expect_equal("coupling_after_Tz_is_z_only", after_z, z_part(hse), qubits=n),
        check_zero("coupling_after_Tx_Tz_vanishes", average(tx, after_z)),
        _pair_checks(lattice, tz, tx),
        expect_equal("identity_survives", average(tx, average(tz, ident)), ident),
    ]


def logical_operators(lattice: LatticeSpec) -> dict[str, PauliString]:
    return grp.t_operators(lattice)


def verify_torus(lattice: LatticeSpec, *, cap: int = grp.DEFAULT_CAP) -> list[Check]:
    """Every torus identity: T-group coupling/pair identities, B^xz annihilation
    of local terms and preservation of the four nontrivial cycle operators."""
    if not lattice.is_torus:
        raise lat.LatticeError("expected a torus")
    n = lattice.edge_count
    tz, tx = grp.build_tz(lattice), grp.build_tx(lattice)
    hse = coupling_hamiltonian(n)
    after_z = average(tz, hse)
    checks = [
        expect_equal("coupling_after_Tz_is_z_only", after_z, z_part(hse)),
        check_zero("coupling_after_Tx_Tz_vanishes", average(tx, after_z)),
        _pair_checks(lattice, tz, tx),
    ]
    full = max(lattice.rows, lattice.cols) <= cap
    bxz = grp.build("Bxz", lattice, full=full, cap=cap)
    checks.append(check_zero("local_terms_vanish_under_Bxz", average(bxz, local_terms(n)),
                             order=bxz.order))
    logicals = HamiltonianSpec.of(n, *logical_operators(lattice).values())
    checks.append(expect_equal("logical_cycles_survive_Bxz", average(bxz, logicals), logicals))
    return checks
