"""Single spin-flip quantum walks, OTOCs and Trotter circuits for the ferromagnetic J1-J2 model."""
from .errors import (
    DegenerateFitError,
    DimensionMismatchError,
    EmptyFrameError,
    MagnonWalkError,
    NeverDeclinesError,
    SystemTooLargeError,
    ToleranceError,
    UnsupportedGateError,
    ValidationError,
)
from .lattice import CouplingParams, Displacement, KGrid, LatticeSpec, dispersion, group_velocity
from .walk import DensityField, HopMatrix, density, density_field_fft, hop_matrix, walk_frames
from .otoc import OtocSeries, TdLine, butterfly_velocity, detect_td, otoc, otoc_series, velocity_oracle
from .ed import build_full_hamiltonian, ed_density, ed_otoc, single_magnon_evolve
from .circuit import (
    Circuit,
    Gate,
    Statevector,
    build_evolution_circuit,
    build_trotter_step,
    build_u1,
    build_u2_pair,
    measure_densities,
    run,
)
from .qasm import export_qasm, parse_qasm

__version__ = "0.1.0"
