"""Multi-qubit Pauli strings in the symplectic (x, z, phase) representation.

A ``PauliString`` with masks ``x``, ``z`` and phase ``k`` denotes the operator
``i**k * X^x Z^z`` where ``X^x`` is the tensor product of X on every qubit set
in ``x`` (bit ``q`` of the integer mask is qubit ``q``).  With this ordering
``Y = i X Z`` so a Hermitian string has ``k = popcount(x & z) (mod 2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .lattice import EdgeSet

_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_INV = {v: k for k, v in _PREFIX.items()}
_TEXT_RE = re.compile(r"^\s*([+-]i?)\s*(?:(I)|(?:X\{([\d,\s]*)\})?\s*(?:Z\{([\d,\s]*)\})?)\s*$")


class PauliError(ValueError):
    """Raised for mismatched qubit counts or malformed Pauli input."""


def _mask(indices: Iterable[int], n: int) -> int:
    m = 0
    for q in indices:
        if not 0 <= q < n:
            raise PauliError(f"qubit {q} out of range for {n} qubits")
        m |= 1 << q
    return m


def _bits(mask: int) -> list[int]:
    out, k = [], 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if (self.x | self.z) >> self.n:
            raise PauliError("mask wider than qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, axis: str) -> "PauliString":
        """Hermitian single-qubit Pauli ``axis`` in {'x', 'y', 'z'} on ``qubit``."""
        m = _mask([qubit], n)
        axis = axis.lower()
        if axis == "x":
            return cls(n, m, 0)
        if axis == "z":
            return cls(n, 0, m)
        if axis == "y":
            return cls(n, m, m, 1)
        raise PauliError(f"unknown axis {axis!r}")

    @classmethod
    def from_axes(cls, n: int, axes: dict[int, str]) -> "PauliString":
        """Hermitian tensor product of single-qubit Paulis, e.g. ``{0: 'x', 3: 'y'}``."""
        p = cls.identity(n)
        for q, a in sorted(axes.items()):
            p = p * cls.single(n, q, a)
        return p

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Dense label such as ``'XIZY'`` (qubit 0 first), Hermitian phase."""
        return cls.from_axes(len(label), {q: c for q, c in enumerate(label.lower()) if c != "i"})

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> list[int]:
        return _bits(self.x | self.z)

    def is_identity(self, up_to_phase: bool = True) -> bool:
        return self.x == 0 and self.z == 0 and (up_to_phase or self.phase == 0)

    def is_hermitian(self) -> bool:
        return (self.phase - (self.x & self.z).bit_count()) % 2 == 0

    def canonical(self) -> "PauliString":
        """Phase-0 representative."""
        return PauliString(self.n, self.x, self.z, 0)

    def hermitian(self) -> "PauliString":
        """The Hermitian representative ``i**popcount(x&z) X^x Z^z``."""
        return PauliString(self.n, self.x, self.z, (self.x & self.z).bit_count())

    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    def axis(self, qubit: int) -> str:
        xb, zb = self.x >> qubit & 1, self.z >> qubit & 1
        return "ixzy"[xb | zb << 1]

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def dagger(self) -> "PauliString":
        # (i^k X^x Z^z)^dag = (-i)^k Z^z X^x = (-i)^k (-1)^|x&z| X^x Z^z
        return PauliString(self.n, self.x, self.z, -self.phase + 2 * (self.x & self.z).bit_count())

    def to_text(self) -> str:
        parts = [_PREFIX[self.phase]]
        if self.x:
            parts.append("X{" + ",".join(map(str, _bits(self.x))) + "}")
        if self.z:
            parts.append("Z{" + ",".join(map(str, _bits(self.z))) + "}")
        if not (self.x or self.z):
            parts.append("I")
        return " ".join(parts)

    @classmethod
    def from_text(cls, text: str, n: int) -> "PauliString":
        m = _TEXT_RE.match(text)
        if not m:
            raise PauliError(f"cannot parse Pauli text {text!r}")
        prefix, _ident, xs, zs = m.groups()
        parse = lambda s: [int(t) for t in s.split(",") if t.strip()] if s else []  # noqa: E731
        return cls(n, _mask(parse(xs), n), _mask(parse(zs), n), _PREFIX_INV[prefix])

    def __str__(self):
        return self.to_text()

    def to_label(self) -> str:
        """Dense label, ignoring phase."""
        return "".join(self.axis(q).upper() for q in range(self.n))


def _check(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise PauliError(f"qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a * b`` with phase."""
    _check(a, b)
    # Z^z1 X^x2 = (-1)^|z1 & x2| X^x2 Z^z1
    sign = 2 * ((a.z & b.x).bit_count() & 1)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, a.phase + b.phase + sign)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    _check(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) & 1


def commutes(a: PauliString, b: PauliString) -> bool:
    return symplectic_product(a, b) == 0


def conjugate(g: PauliString, a: PauliString) -> tuple[int, PauliString]:
    """Return ``(sign, a)`` with ``g^dag a g = sign * a``."""
    return (1 if commutes(g, a) else -1), a


def from_edgeset(edges: EdgeSet, axis: str) -> PauliString:
    """Pauli string with ``axis`` ('X' or 'Z') on every edge of ``edges``."""
    axis = axis.upper()
    if axis == "X":
        return PauliString(edges.size, edges.mask, 0)
    if axis == "Z":
        return PauliString(edges.size, 0, edges.mask)
    raise PauliError("axis must be 'X' or 'Z'")


_PHASES = np.array([1, 1j, -1, -1j])


def _reverse_bits(mask: int, n: int) -> int:
    return int(format(mask, f"0{n}b")[::-1], 2) if n else 0


def to_matrix(p: PauliString) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix; qubit 0 is the leftmost tensor factor."""
    dim = 1 << p.n
    b = np.arange(dim)
    xm = _reverse_bits(p.x, p.n)
    zm = _reverse_bits(p.z, p.n)
    signs = 1 - 2 * (np.bitwise_count(b & zm) & 1).astype(np.int64)
    out = np.zeros((dim, dim), dtype=complex)
    out[b ^ xm, b] = _PHASES[p.phase] * signs
    return out
