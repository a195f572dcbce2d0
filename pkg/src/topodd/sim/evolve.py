"""Piecewise-constant evolution of a schedule and fidelity sampling.

Two engines share one timeline.  With no bath or a few-mode bath the full
qubit (x) mode state is propagated exactly, each window Hamiltonian being
diagonalised once and reused.  With an OU bath a batch of pure qubit
trajectories is propagated under ``H_window + sum_k c_k(t) sigma^k``; the
single-qubit part is exponentiated exactly per step and any two-qubit part is
applied by symmetric (Strang) splitting.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.linalg import expm

from ..pauli import PauliString, _reverse_bits
from ..scheduler import ControlSegment, FreeEvolution, InstantPulse, LogicalSlot, Schedule
from . import noise
from .model import (
    DEFAULT_DIM_CAP,
    BathSpec,
    FewModeBath,
    OUBath,
    SimulationError,
    SystemSpec,
    build_hamiltonian,
    control_hamiltonian,
    logical_state,
    system_hamiltonian,
)

log = logging.getLogger(__name__)

EPS = 1e-9
_NOISE_CHUNK = 256


@dataclass
class FidelityTrace:
    times: np.ndarray
    fidelity: np.ndarray
    stderr: np.ndarray
    norm_error: float = 0.0

    @property
    def final(self) -> float:
        return float(self.fidelity[-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,fidelity,stderr\n")
        for t, f, s in zip(self.times, self.fidelity, self.stderr):
            buf.write(f"{t:.10g},{f:.12f},{s:.3e}\n")
        return buf.getvalue()

    def at(self, t: float) -> float:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9:
            raise KeyError(f"no sample at t={t}")
        return float(self.fidelity[k])


# -- timeline ----------------------------------------------------------------

@dataclass(frozen=True)
class _Pulse:
    pauli: PauliString


@dataclass(frozen=True)
class _Window:
    start: float
    duration: float
    control: PauliString | None = None
    amplitude: float = 0.0


def _timeline(schedule: Schedule | None, t_final: float) -> Iterator[_Pulse | _Window]:
    if schedule is None or not schedule.events:
        if t_final > 0:
            yield _Window(0.0, t_final)
        return
    period = schedule.duration
    if period <= 0:
        raise SimulationError("schedule has zero duration and cannot be repeated")
    offsets = np.cumsum([0.0] + [e.duration for e in schedule.events])[:-1]
    cycle = 0
    while True:
        base = cycle * period
        for e, off in zip(schedule.events, offsets):
            t = base + off
            if e.duration > 0 and t >= t_final - EPS:
                return
            d = min(e.duration, t_final - t)
            if isinstance(e, InstantPulse):
                yield _Pulse(e.pauli)
            elif isinstance(e, LogicalSlot):
                if not e.pauli.is_identity():
                    yield _Pulse(e.pauli)
                if e.duration > 0:
                    yield _Window(t, d)
            elif isinstance(e, ControlSegment):
                yield _Window(t, d, e.generator, e.amplitude)
            elif isinstance(e, FreeEvolution) and e.duration > 0:
                yield _Window(t, d)
        cycle += 1


def sample_times(t_final: float, sample_dt: float) -> np.ndarray:
    if sample_dt <= 0:
        raise SimulationError("sample_dt must be positive")
    n = int(math.floor(t_final / sample_dt + 1e-9))
    times = [k * sample_dt for k in range(n + 1)]
    if times[-1] < t_final - EPS:
        times.append(t_final)
    return np.array(times)


def _pauli_action(p: PauliString):
    """(permutation, factors) such that ``(P v)[perm] = factors * v``."""
    b = np.arange(1 << p.n)
    xm = _reverse_bits(p.x, p.n)
    zm = _reverse_bits(p.z, p.n)
    signs = 1 - 2 * (np.bitwise_count(b & zm) & 1).astype(np.int64)
    return b ^ xm, (1j ** p.phase) * signs


def apply_pauli(p: PauliString, state: np.ndarray) -> np.ndarray:
    """Apply ``p`` along axis -1 of a ``(..., 2**n)`` or ``(2**n, m)`` array's qubit axis 0."""
    perm, fac = _pauli_action(p)
    out = np.empty_like(state)
    out[perm] = fac.reshape((-1,) + (1,) * (state.ndim - 1)) * state
    return out


def _sqrt_fidelity(overlap: float) -> float:
    # clip rounding overshoot only, so genuine norm errors stay visible
    return math.sqrt(min(1.0, overlap) if overlap <= 1.0 + 1e-12 else overlap)


# -- dense engine --------------------------------------------------------------

def _evolve_dense(schedule, system, bath, t_final, times, psi0, dim_cap) -> FidelityTrace:
    n = system.n_qubits
    h0 = build_hamiltonian(system, bath, dim_cap=dim_cap)
    qdim = 1 << n
    mdim = h0.shape[0] // qdim
    vac = np.zeros(mdim, dtype=complex)
    vac[0] = 1.0
    state = np.kron(psi0, vac).reshape(qdim, mdim)
    ref = psi0.conj()
    eig_cache: dict = {}
    fid = np.full(len(times), np.nan)
    norm_err = 0.0

    def eig(w: _Window):
        key = None if w.control is None else (w.control.key(), round(w.amplitude, 12))
        if key not in eig_cache:
            h = h0 if w.control is None else h0 + np.kron(
                control_hamiltonian(w.control, w.amplitude), np.eye(mdim))
            eig_cache[key] = np.linalg.eigh(h)
        return eig_cache[key]

    def fidelity(s: np.ndarray) -> float:
        amp = ref @ s
        return _sqrt_fidelity(np.vdot(amp, amp).real)

    si = 0
    for item in _timeline(schedule, t_final):
        if isinstance(item, _Pulse):
            state = apply_pauli(item.pauli, state)
            continue
        while si < len(times) and times[si] <= item.start + EPS:
            fid[si] = fidelity(state)
            si += 1
        w, v = eig(item)
        coeff = v.conj().T @ state.reshape(-1)
        while si < len(times) and times[si] < item.start + item.duration - EPS:
            s = times[si] - item.start
            fid[si] = fidelity((v @ (np.exp(-1j * w * s) * coeff)).reshape(qdim, mdim))
            si += 1
        state = (v @ (np.exp(-1j * w * item.duration) * coeff)).reshape(qdim, mdim)
        norm_err = max(norm_err, abs(np.linalg.norm(state) - 1.0))
    while si < len(times):
        fid[si] = fidelity(state)
        si += 1
    return FidelityTrace(times, fid, np.zeros_like(fid), norm_err)


# -- trajectory engine ---------------------------------------------------------

_SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


class _NoiseSource:
    """Standard normals per step, drawn in fixed chunks from per-trajectory streams."""

    def __init__(self, seed: int, n_traj: int, width: int):
        self.rngs = noise.trajectory_rngs(seed, n_traj)
        self.width = width
        self.buf = np.empty((n_traj, 0, width))
        self.pos = 0

    def next(self) -> np.ndarray:
        if self.pos == self.buf.shape[1]:
            self.buf = np.stack([r.standard_normal((_NOISE_CHUNK, self.width)) for r in self.rngs])
            self.pos = 0
        self.pos += 1
        return self.buf[:, self.pos - 1]


def _su2(field: np.ndarray, h: float) -> np.ndarray:
    """``exp(-i h field . sigma)`` for a batch of 3-vectors, shape (T, 2, 2)."""
    r = np.linalg.norm(field, axis=-1)
    c = np.cos(r * h)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(r > 0, np.sin(r * h) / np.where(r > 0, r, 1.0), h)
    fx, fy, fz = field[..., 0], field[..., 1], field[..., 2]
    u = np.empty(field.shape[:-1] + (2, 2), dtype=complex)
    u[..., 0, 0] = c - 1j * s * fz
    u[..., 1, 1] = c + 1j * s * fz
    u[..., 0, 1] = -1j * s * (fx - 1j * fy)
    u[..., 1, 0] = -1j * s * (fx + 1j * fy)
    return u


def _apply_single(u: np.ndarray, states: np.ndarray, k: int, n: int) -> np.ndarray:
    T = states.shape[0]
    s = states.reshape(T, 1 << k, 2, 1 << (n - k - 1))
    return np.einsum("tab,tibj->tiaj", u, s).reshape(T, -1)


def _evolve_trajectories(schedule, system, bath: OUBath, t_final, times, psi0) -> FidelityTrace:
    n = system.n_qubits
    T = bath.trajectories
    tau = schedule.tau if schedule is not None and schedule.tau > 0 else 0.1
    dt = bath.dt if bath.dt is not None else min(tau / 10, 0.01)
    sigma = math.sqrt(bath.variance)
    src = _NoiseSource(bath.seed, T, n)
    c = sigma * src.next()
    axis_idx = np.array([_AXIS_INDEX[a] for a in system.axes])
    h2 = system_hamiltonian(system)
    two_body = bool(np.any(h2))
    half_cache: dict = {}
    states = np.tile(psi0, (T, 1))
    ref = psi0.conj()
    fid = np.full(len(times), np.nan)
    err = np.zeros(len(times))
    norm_err = 0.0

    def record(i: int):
        nonlocal norm_err
        p = np.abs(states @ ref) ** 2
        f = _sqrt_fidelity(float(p.mean()))
        fid[i] = f
        if T > 1 and f > 0:
            err[i] = float(p.std(ddof=1)) / math.sqrt(T) / (2 * f)
        norm_err = max(norm_err, float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0))))

    def step(w: _Window, h: float):
        nonlocal states, c
        if two_body:
            key = round(h, 14)
            if key not in half_cache:
                half_cache[key] = expm(-0.5j * h * h2).T
            states = states @ half_cache[key]
        for k in range(n):
            field = np.zeros((T, 3))
            field[:, axis_idx[k]] = c[:, k]
            if w.control is not None and (w.control.x | w.control.z) >> k & 1:
                field[:, _AXIS_INDEX[w.control.axis(k)]] += w.amplitude
            states = _apply_single(_su2(field, h), states, k, n)
        if two_body:
            states = states @ half_cache[round(h, 14)]
        c = noise.ou_step(c, h, bath.gamma, sigma, src.next())

    si = 0
    for item in _timeline(schedule, t_final):
        if isinstance(item, _Pulse):
            states = apply_pauli(item.pauli, states.T).T
            continue
        while si < len(times) and times[si] <= item.start + EPS:
            record(si)
            si += 1
        t, end = item.start, item.start + item.duration
        while t < end - EPS:
            stop = end
            if si < len(times) and times[si] < end - EPS:
                stop = times[si]
            m = max(1, math.ceil((stop - t) / dt - 1e-9))
            for _ in range(m):
                step(item, (stop - t) / m)
            t = stop
            if stop < end - EPS:
                record(si)
                si += 1
    while si < len(times):
        record(si)
        si += 1
    return FidelityTrace(times, fid, err, norm_err)


# -- public entry points -----------------------------------------------------------

def evolve(schedule: Schedule | None, system: SystemSpec, bath: BathSpec, t_final: float,
           sample_dt: float, *, initial_state: np.ndarray | None = None,
           dim_cap: int = DEFAULT_DIM_CAP, max_stderr: float | None = None) -> FidelityTrace:
    """Repeat ``schedule`` up to ``t_final`` and sample F(t) = sqrt(<psi|rho(t)|psi>).

    ``schedule=None`` means free evolution.  A sample taken at a pulse time
    sees the state after every pulse at that instant.
    """
    if schedule is not None and schedule.n_qubits != system.n_qubits:
        raise SimulationError("schedule and system act on different qubit counts")
    if t_final < 0:
        raise SimulationError("t_final must be non-negative")
    psi0 = logical_state(system.lattice) if initial_state is None else np.asarray(initial_state, complex)
    times = sample_times(t_final, sample_dt) if t_final > 0 else np.array([0.0])
    if isinstance(bath, OUBath):
        trace = _evolve_trajectories(schedule, system, bath, t_final, times, psi0)
        worst = float(trace.stderr.max())
        if max_stderr is not None and worst > max_stderr:
            log.warning("trajectory average not converged: stderr %.3g > %.3g", worst, max_stderr)
        return trace
    return _evolve_dense(schedule, system, bath, t_final, times, psi0, dim_cap)


def final_fidelity(schedule, system, bath, t_final: float, **kw) -> float:
    return evolve(schedule, system, bath, t_final, t_final if t_final > 0 else 1.0, **kw).final


def toggling_average(schedule: Schedule, op: np.ndarray, nodes: int = 24) -> np.ndarray:
    """First-order average ``(1/T) int U_c(t)^dag A U_c(t) dt`` over one period,
    ``U_c`` being the control-only propagator."""
    n = schedule.n_qubits
    dim = 1 << n
    frame = np.eye(dim, dtype=complex)
    acc = np.zeros((dim, dim), dtype=complex)
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    for e in schedule.events:
        if isinstance(e, (InstantPulse, LogicalSlot)):
            frame = apply_pauli(e.pauli, frame)
        if isinstance(e, ControlSegment):
            w, v = np.linalg.eigh(control_hamiltonian(e.generator, e.amplitude))
            for x, wt in zip(xs, ws):
                s = 0.5 * e.duration * (x + 1)
                u = (v * np.exp(-1j * w * s)) @ v.conj().T @ frame
                acc += 0.5 * e.duration * wt * (u.conj().T @ op @ u)
            frame = (v * np.exp(-1j * w * e.duration)) @ v.conj().T @ frame
        elif isinstance(e, (FreeEvolution, LogicalSlot)) and e.duration > 0:
            acc += e.duration * (frame.conj().T @ op @ frame)
    return acc / schedule.duration


def reduced_density_matrix(state: np.ndarray, n_qubits: int) -> np.ndarray:
    """Trace out everything after the first ``n_qubits`` tensor factors."""
    s = state.reshape(1 << n_qubits, -1)
    return s @ s.conj().T


# -- calibration -----------------------------------------------------------------

@dataclass
class Calibration:
    strength: float
    fidelity: float
    bath: BathSpec
    iterations: int


def calibrate_gamma(target: float, system: SystemSpec, bath_template: FewModeBath | OUBath,
                    t_final: float, *, tol: float = 0.005, bracket: tuple[float, float] = (0.0, 1.0),
                    max_iter: int = 60, schedule: Schedule | None = None) -> Calibration:
    """Bisect the bath strength until free evolution ends at ``target`` fidelity.

    Assumes the final fidelity decreases with strength across the bracket.
    """
    if not 0 < target <= 1:
        raise SimulationError("target must lie in (0, 1]")

    def f(g: float) -> float:
        return final_fidelity(schedule, system, bath_template.with_strength(g), t_final)

    lo, hi = bracket
    f_lo, f_hi = f(lo), f(hi)
    if abs(f_lo - target) <= tol:
        return Calibration(lo, f_lo, bath_template.with_strength(lo), 0)
    if not f_hi <= target <= f_lo:
        raise SimulationError(
            f"target {target} unreachable in bracket {bracket}: F in [{f_hi:.4f}, {f_lo:.4f}]")
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm - target) <= tol / 10 or hi - lo < 1e-12 * max(1.0, hi):
            return Calibration(mid, fm, bath_template.with_strength(mid), it)
        if fm > target:
            lo = mid
        else:
            hi = mid
    return Calibration(mid, fm, bath_template.with_strength(mid), max_iter)
