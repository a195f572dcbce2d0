"""System and bath descriptions, the logical state and dense Hamiltonians."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import reduce
from typing import Union

import numpy as np

from .. import lattice as lat
from ..lattice import LatticeSpec
from ..pauli import PauliString, from_edgeset, to_matrix

DEFAULT_DIM_CAP = 1 << 16
MAX_DENSE_QUBITS = 12
COUPLING_RANGE = (0.01, 0.03)


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SystemSpec:
    lattice: LatticeSpec
    axes: tuple[str, ...]  # coupling axis per qubit (edge index order)
    omega_ab: float = 0.0
    pair_type: str = "heisenberg"  # or two axis letters such as "xx", "zy"
    pairs: tuple[tuple[int, int], ...] | None = None  # default: all nearest-neighbour pairs

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(a.lower() for a in self.axes))
        if len(self.axes) != self.lattice.edge_count:
            raise SimulationError("need one coupling axis per qubit")
        if any(a not in "xyz" or len(a) != 1 for a in self.axes):
            raise SimulationError(f"bad coupling axes {self.axes}")
        if isinstance(self.omega_ab, complex) or self.omega_ab < 0:
            raise SimulationError("omega_ab must be real and non-negative")
        if self.pair_type != "heisenberg" and (len(self.pair_type) != 2 or any(
                c not in "xyz" for c in self.pair_type)):
            raise SimulationError(f"bad pair type {self.pair_type!r}")
        if self.pairs is not None:
            for a, b in self.pairs:
                if not lat.are_nearest_neighbors(self.lattice, a, b):
                    raise SimulationError(f"({a}, {b}) is not a nearest-neighbour pair")

    @property
    def n_qubits(self) -> int:
        return self.lattice.edge_count

    @property
    def interaction_pairs(self) -> list[tuple[int, int]]:
        return list(self.pairs) if self.pairs is not None else lat.nearest_neighbor_pairs(self.lattice)

    def to_json(self) -> dict:
        return {"lattice": self.lattice.to_json(), "axes": "".join(self.axes),
                "omega_ab": self.omega_ab, "pair_type": self.pair_type,
                "pairs": None if self.pairs is None else [list(p) for p in self.pairs]}


@dataclass(frozen=True)
class FewModeBath:
    """A handful of truncated boson modes coupled to every qubit.

    ``couplings[l][k]`` is the coupling of mode ``l`` to qubit ``k``.  The
    strength ``Gamma`` of this bath is defined through the zero-lag bath
    correlation, ``mean_k sum_l |g_lk|^2 = Gamma * gamma / 2``.
    """

    frequencies: tuple[float, ...]
    couplings: tuple[tuple[complex, ...], ...]
    truncation: int = 4
    gamma: float = 1.0

    def __post_init__(self):
        if self.truncation < 2:
            raise SimulationError("truncation must be at least 2")
        if len(self.couplings) != len(self.frequencies):
            raise SimulationError("one coupling row per mode")
        if any(isinstance(w, complex) for w in self.frequencies):
            raise SimulationError("mode frequencies must be real")

    @property
    def strength(self) -> float:
        g = np.abs(np.asarray(self.couplings, dtype=complex)) ** 2
        return 2.0 * float(g.sum(axis=0).mean()) / self.gamma if g.size else 0.0

    def with_strength(self, strength: float) -> "FewModeBath":
        cur = self.strength
        if cur == 0.0:
            return self
        s = math.sqrt(strength / cur)
        return replace(self, couplings=tuple(tuple(c * s for c in row) for row in self.couplings))

    def to_json(self) -> dict:
        return {"mode": "few_mode", "frequencies": list(self.frequencies),
                "couplings": [[complex(c).real if complex(c).imag == 0 else [complex(c).real, complex(c).imag]
                               for c in row] for row in self.couplings],
                "truncation": self.truncation, "gamma": self.gamma, "strength": self.strength}


@dataclass(frozen=True)
class OUBath:
    """Classical stationary Ornstein-Uhlenbeck field ``c_k(t)`` on each qubit,
    with correlation ``(Gamma gamma / 2) exp(-gamma |t - s|)``."""

    strength: float
    gamma: float = 1.0
    trajectories: int = 400
    seed: int = 0
    dt: float | None = None

    def __post_init__(self):
        if self.strength < 0 or self.gamma <= 0 or self.trajectories < 1:
            raise SimulationError("need strength >= 0, gamma > 0, trajectories >= 1")

    @property
    def variance(self) -> float:
        return self.strength * self.gamma / 2

    def with_strength(self, strength: float) -> "OUBath":
        return replace(self, strength=strength)

    def to_json(self) -> dict:
        return {"mode": "ou", "strength": self.strength, "gamma": self.gamma,
                "trajectories": self.trajectories, "seed": self.seed, "dt": self.dt}


BathSpec = Union[FewModeBath, OUBath, None]


def bath_from_json(doc: dict | None) -> BathSpec:
    if doc is None:
        return None
    mode = doc.get("mode")
    if mode == "few_mode":
        cps = tuple(tuple(complex(*c) if isinstance(c, list) else float(c) for c in row)
                    for row in doc["couplings"])
        return FewModeBath(tuple(float(w) for w in doc["frequencies"]), cps,
                           int(doc.get("truncation", 4)), float(doc.get("gamma", 1.0)))
    if mode == "ou":
        return OUBath(float(doc["strength"]), float(doc.get("gamma", 1.0)),
                      int(doc.get("trajectories", 400)), int(doc.get("seed", 0)),
                      None if doc.get("dt") is None else float(doc["dt"]))
    raise SimulationError(f"unknown bath mode {mode!r}")


def draw_couplings(n_modes: int, n_qubits: int, rng: np.random.Generator,
                   low: float = COUPLING_RANGE[0], high: float = COUPLING_RANGE[1]) -> tuple[tuple[float, ...], ...]:
    """Coupling magnitudes uniform in [low, high], zero phase."""
    return tuple(tuple(float(v) for v in rng.uniform(low, high, n_qubits)) for _ in range(n_modes))


def random_axes(n_qubits: int, rng: np.random.Generator) -> tuple[str, ...]:
    return tuple(rng.choice(["x", "y", "z"], n_qubits))


# -- states and operators ------------------------------------------------------

def x_face_operators(lattice: LatticeSpec) -> list[PauliString]:
    return [from_edgeset(lat.face_edges(lattice, f), "X") for f in range(lattice.face_count)]


def logical_state(lattice: LatticeSpec) -> np.ndarray:
    """|0...0> projected onto the +1 eigenspace of every X-type face operator."""
    n = lattice.edge_count
    if n > MAX_DENSE_QUBITS:
        raise SimulationError(f"{n} qubits is too many for a dense state")
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    for f in x_face_operators(lattice):
        psi = 0.5 * (psi + to_matrix(f) @ psi)
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise SimulationError("projection annihilated the reference state")
    return psi / norm


def basis_label(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def single_qubit_op(n: int, qubit: int, axis: str) -> np.ndarray:
    return to_matrix(PauliString.single(n, qubit, axis))


def annihilation(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def system_hamiltonian(system: SystemSpec) -> np.ndarray:
    """Qubit-only part ``sum omega_ab H_ab``."""
    n = system.n_qubits
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    if system.omega_ab == 0:
        return h
    kinds = ("xx", "yy", "zz") if system.pair_type == "heisenberg" else (system.pair_type,)
    for a, b in system.interaction_pairs:
        for k in kinds:
            h += system.omega_ab * to_matrix(PauliString.from_axes(n, {a: k[0], b: k[1]}))
    return h


def dense_dimension(system: SystemSpec, bath: BathSpec) -> int:
    dim = 1 << system.n_qubits
    if isinstance(bath, FewModeBath):
        dim *= bath.truncation ** len(bath.frequencies)
    return dim


def build_hamiltonian(system: SystemSpec, bath: BathSpec = None, *, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Dense Hermitian matrix on qubits (x) modes.

    ``sum omega_ab H_ab + sum_l w_l a_l^dag a_l
      + sum_{k,l} sigma_alpha^k (g_lk a_l + g_lk^* a_l^dag)``.
    Classical baths contribute nothing here; their field is added per step.
    """
    dim = dense_dimension(system, bath)
    if dim > dim_cap:
        raise SimulationError(f"dense dimension {dim} exceeds cap {dim_cap}")
    hs = system_hamiltonian(system)
    if not isinstance(bath, FewModeBath) or not bath.frequencies:
        return hs
    n, d, L = system.n_qubits, bath.truncation, len(bath.frequencies)
    a = annihilation(d)
    eye_d = np.eye(d, dtype=complex)

    def mode_op(l: int, op: np.ndarray) -> np.ndarray:
        return reduce(np.kron, [op if j == l else eye_d for j in range(L)])

    mdim = d ** L
    h = np.kron(hs, np.eye(mdim))
    num = a.conj().T @ a
    for l, w in enumerate(bath.frequencies):
        h += np.kron(np.eye(1 << n), w * mode_op(l, num))
    sig = [single_qubit_op(n, k, system.axes[k]) for k in range(n)]
    for l in range(L):
        al = mode_op(l, a)
        for k in range(n):
            g = complex(bath.couplings[l][k])
            if g != 0:
                h += np.kron(sig[k], g * al + np.conj(g) * al.conj().T)
    return h


def control_hamiltonian(generator: PauliString, amplitude: float) -> np.ndarray:
    """``amplitude * sum_{k in supp} P_k`` for the single-qubit factors of ``generator``."""
    n = generator.n
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for k in generator.support:
        h += amplitude * single_qubit_op(n, k, generator.axis(k))
    return h
