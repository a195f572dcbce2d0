"""Numerical simulation of decoupled qubit registers."""

from .evolve import (
    Calibration,
    FidelityTrace,
    calibrate_gamma,
    evolve,
    final_fidelity,
    reduced_density_matrix,
    toggling_average,
)
from .model import (
    BathSpec,
    FewModeBath,
    OUBath,
    SimulationError,
    SystemSpec,
    bath_from_json,
    build_hamiltonian,
    draw_couplings,
    logical_state,
    random_axes,
)

__all__ = [
    "BathSpec", "Calibration", "FewModeBath", "FidelityTrace", "OUBath", "SimulationError",
    "SystemSpec", "bath_from_json", "build_hamiltonian", "calibrate_gamma", "draw_couplings",
    "evolve", "final_fidelity", "logical_state", "random_axes", "reduced_density_matrix",
    "toggling_average",
]
