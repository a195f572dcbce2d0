import math

import numpy as np
import pytest

from topodd import groups as grp
from topodd import lattice as lat
from topodd import presets
from topodd import scheduler as sch
from topodd.lattice import LatticeSpec
from topodd.pauli import PauliString, to_matrix
from topodd.sim import (
    FewModeBath,
    OUBath,
    SimulationError,
    SystemSpec,
    build_hamiltonian,
    calibrate_gamma,
    evolve,
    final_fidelity,
    logical_state,
    reduced_density_matrix,
)
from topodd.sim import noise
from topodd.sim.model import annihilation, x_face_operators

PATCH = presets.PATCH


def patch_system(**kw) -> SystemSpec:
    return SystemSpec(PATCH, presets.xy_axes(), **kw)


# -- logical state -----------------------------------------------------------------

def test_logical_state_basis():
    psi = logical_state(PATCH)
    lab = lat.PATCH_1X2_LABELS
    support = {}
    for i in np.flatnonzero(np.abs(psi) > 1e-12):
        bits = format(i, "07b")
        support["".join(bits[lab[k]] for k in range(1, 8))] = psi[i]
    assert set(support) == {"0000000", "1111000", "0001111", "1110111"}
    assert np.allclose(list(support.values()), 0.5)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-14)


def test_logical_state_is_stabilised():
    psi = logical_state(PATCH)
    ops = grp.t_operators(PATCH)
    for p in [ops["t1"], ops["t2"], *x_face_operators(PATCH)]:
        assert np.allclose(to_matrix(p) @ psi, psi)


def test_logical_state_too_large():
    with pytest.raises(SimulationError):
        logical_state(LatticeSpec.planar(3, 3))


# -- Hamiltonian -------------------------------------------------------------------

def test_zero_hamiltonian():
    h = build_hamiltonian(patch_system(), None)
    assert h.shape == (128, 128) and not h.any()


def test_hermitian():
    s = SystemSpec(PATCH, ("x", "y", "z", "y", "x", "z", "y"), omega_ab=0.03)
    bath = presets.bath_template()
    h = build_hamiltonian(s, bath)
    assert h.shape == (512, 512)
    assert np.abs(h - h.conj().T).max() == 0


def test_rabi_oracle():
    # qubit 0 coupled to one mode; the rest idle.  Displaced oscillator:
    # ground energy -g^2 / w, checked against a hand-built matrix.
    g, w, d = 0.2, 1.0, 30
    L = LatticeSpec.planar(1, 1)
    s = SystemSpec(L, ("x",) * L.edge_count)
    bath = FewModeBath((w,), ((g, 0.0, 0.0, 0.0),), truncation=d)
    e_pkg = np.linalg.eigvalsh(build_hamiltonian(s, bath))[0]
    a = annihilation(d)
    sx = np.array([[0, 1], [1, 0]])
    oracle = np.kron(sx, g * (a + a.T)) + np.kron(np.eye(2), w * a.T @ a)
    assert e_pkg == pytest.approx(np.linalg.eigvalsh(oracle)[0], abs=1e-12)
    assert e_pkg == pytest.approx(-g * g / w, abs=1e-8)


def test_dimension_cap():
    with pytest.raises(SimulationError):
        build_hamiltonian(patch_system(), presets.bath_template(), dim_cap=256)


def test_bad_system():
    with pytest.raises(SimulationError):
        SystemSpec(PATCH, ("x",) * 6)
    with pytest.raises(SimulationError):
        SystemSpec(PATCH, presets.xy_axes(), omega_ab=-1)
    with pytest.raises(SimulationError):
        SystemSpec(PATCH, presets.xy_axes(), pairs=((0, 1),))


def test_bath_strength_mapping():
    b = presets.bath_template().with_strength(0.02)
    g = np.asarray(b.couplings)
    assert (np.abs(g) ** 2).sum(axis=0).mean() == pytest.approx(0.02 * b.gamma / 2)


# -- evolution ---------------------------------------------------------------------

def test_trivial_evolution():
    tr = evolve(None, patch_system(), None, 2.0, 0.5)
    assert np.allclose(tr.fidelity, 1.0)
    assert evolve(None, patch_system(), None, 0.0, 0.1).fidelity.tolist() == [1.0]


def test_norm_and_trace_conserved():
    bath = presets.bath_template().with_strength(0.05)
    tr = evolve(presets.dz_eulerian(), patch_system(omega_ab=0.03), bath, 3.2, 0.4)
    assert tr.norm_error < 1e-10
    assert np.all((tr.fidelity >= 0) & (tr.fidelity <= 1))
    psi = np.kron(logical_state(PATCH), np.eye(4)[0])
    rho = reduced_density_matrix(psi, 7)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)


def test_eigenstate_stability_ideal():
    tr = evolve(presets.dz_ideal(), patch_system(), None, 3.2, 0.05)
    assert np.max(np.abs(tr.fidelity - 1)) < 1e-10


def test_eigenstate_stability_eulerian():
    s = presets.dz_eulerian()
    tr = evolve(s, patch_system(), None, 4 * s.duration, 0.05)
    boundaries = [tr.at(k * s.duration) for k in range(5)]
    assert max(abs(f - 1) for f in boundaries) < 1e-8
    assert tr.fidelity.min() < 0.99   # fluctuates inside the cycle


def test_mismatched_schedule():
    s = sch.compile_ideal(grp.build_tz(LatticeSpec.torus(2)))
    with pytest.raises(SimulationError):
        evolve(s, patch_system(), None, 1.0, 0.1)


def test_heisenberg_free_decays_dxz_helps():
    s = patch_system(omega_ab=0.03)
    free = final_fidelity(None, s, None, 6.4)
    assert free < 1
    assert final_fidelity(presets.dxz_ideal(), s, None, 6.4) > free


def test_tau_halving_converges():
    s = patch_system()
    bath = presets.bath_template().with_strength(presets.CALIBRATED_STRENGTH)
    gaps = []
    for tau in (0.1, 0.05, 0.025, 0.0125):
        f_ideal = final_fidelity(presets.dz_ideal(tau), s, bath, 3.2)
        f_eul = final_fidelity(presets.dz_eulerian(tau), s, bath, 3.2)
        gaps.append(abs(f_ideal - f_eul))
    assert all(b < a for a, b in zip(gaps, gaps[1:])), gaps


# -- calibration --------------------------------------------------------------------

def test_calibration_monotone_and_pinned():
    s = patch_system()
    tmpl = presets.bath_template()
    fs = [final_fidelity(None, s, tmpl.with_strength(g), 3.2) for g in (0.002, 0.005, 0.01, 0.02, 0.04)]
    assert all(b < a for a, b in zip(fs, fs[1:]))
    cal = calibrate_gamma(0.882, s, tmpl, 3.2, bracket=(0.0, 0.05))
    assert abs(cal.fidelity - 0.882) <= 0.005
    assert cal.strength == pytest.approx(presets.CALIBRATED_STRENGTH)


def test_calibration_edges():
    s = patch_system()
    tmpl = FewModeBath((0.5,), ((0.0,) * 7,))
    assert calibrate_gamma(1.0, s, tmpl, 1.0).strength == 0.0
    with pytest.raises(SimulationError):
        calibrate_gamma(0.1, s, presets.bath_template(), 0.8, bracket=(0.0, 0.001))
    with pytest.raises(SimulationError):
        calibrate_gamma(1.5, s, tmpl, 1.0)


# -- OU surrogate --------------------------------------------------------------------

def test_ou_autocorrelation():
    strength, gamma, h = 0.02, 1.0, 0.01
    paths = noise.ou_paths(10_000, 150, h, strength=strength, gamma=gamma, seed=11)
    for lag in (0.0, 1.0 / gamma):
        k = round(lag / h)
        want = noise.correlation(strength, gamma, lag)
        assert noise.empirical_autocorrelation(paths, k) == pytest.approx(want, rel=0.05)


def test_trajectory_streams_do_not_depend_on_count():
    a = noise.trajectory_rngs(5, 10)[3].standard_normal(4)
    b = noise.trajectory_rngs(5, 40)[3].standard_normal(4)
    assert np.array_equal(a, b)


def test_ou_zero_noise_matches_dense():
    s = patch_system(omega_ab=0.03)
    dense = evolve(presets.dz_eulerian(), s, None, 1.6, 0.4).fidelity
    traj = evolve(presets.dz_eulerian(), s, OUBath(0.0, trajectories=2, dt=0.001), 1.6, 0.4).fidelity
    assert np.max(np.abs(dense - traj)) < 1e-5


def test_ou_deterministic_and_ordered():
    s = patch_system()
    bath = OUBath(0.02, trajectories=64, seed=4)
    a = evolve(presets.dz_ideal(), s, bath, 1.6, 0.4)
    b = evolve(presets.dz_ideal(), s, bath, 1.6, 0.4)
    assert np.array_equal(a.fidelity, b.fidelity)
    free = evolve(None, s, bath, 1.6, 0.4)
    assert a.final > free.final
    assert free.stderr[-1] > 0 and math.isfinite(free.stderr[-1])
    assert free.norm_error < 1e-10
