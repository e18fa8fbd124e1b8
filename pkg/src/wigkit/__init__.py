"""wigkit: phase-space kernels of linear operators on centered grids.

The toolkit builds discrete Wigner distributions and the rank-4 Wigner
kernels of operators, factors symplectic matrices into metaplectic token
words, measures modulation-space quasi-norms, constructs type-I Fourier
integral operators with quadratic phases, and propagates Schrodinger
equations with quadratic-plus-bounded Hamiltonians.  Everything lives on
the centered self-dual lattice x_j = (j - n/2) / sqrt(n).
"""

from .config import DEFAULTS, OMEGA, RunConfig, load_config, parse_config_text
from .errors import (
    BadExponent,
    ConfigError,
    DimMismatch,
    FactorizationFailed,
    FormatVersion,
    GridMismatch,
    IllConditioned,
    IllConditionedS,
    KernelTooLarge,
    LatticeMismatch,
    NonSymmetric,
    NonSymmetricC,
    NotHamiltonian,
    NotSymplectic,
    OddDimension,
    OffLattice,
    OrderTooHigh,
    RankMismatch,
    SingularL,
    UnknownSuite,
    UnstableStep,
    WigkitError,
    ZeroWindow,
)
from .signal_core import Grid, PhaseField, Signal, gaussian, hermite, inner, norm
from .symplectic import (
    HamiltonianMat,
    SymplecticMat,
    caustic_window,
    hamiltonian_flow,
    is_symplectic,
    make_DL,
    make_J,
    make_VC,
)
from .transforms import (
    dft,
    idft,
    metaplectic_wigner,
    moyal_pairing,
    rihaczek,
    stft,
    wigner,
)
from .metaplectic import (
    ChirpConv,
    ChirpMul,
    Dilate,
    FTAll,
    FTPartial2,
    FreeBlock,
    MetaplecticWord,
    apply,
    apply_tensor,
    covariance_defect,
    factor_symplectic,
    format_word,
    free_word,
    parse_word,
    tf_shift_cont,
)
from .modnorm import (
    concentration_profile,
    decimated_quasinorm,
    mixed_norm,
    mod_norm,
    shubin_sobolev,
    weight_one_tensor_vs,
    weight_vs,
)
from .wigner_kernel import (
    APPLY,
    DIRECT,
    OperatorKernel,
    WignerKernel,
    adjoint_kernel,
    apply_wigner_kernel,
    compose_kernels,
    compose_operators,
    identity_operator,
    intertwining_defect,
    inverse_kernel,
    norm_equivalence_experiment,
    wigner_kernel,
)
from .fio import (
    QuadraticPhase,
    Symbol,
    fio_membership,
    kn_op,
    kn_phase,
    symbol,
    type1_fio,
    type2_adjoint,
    wigner_kernel_type1,
)
from .propagator import (
    FOURIER_MULTIPLIER,
    KN_SYMBOL,
    MULTIPLIER,
    PerturbedHamiltonian,
    QuadraticHamiltonian,
    classical_flow,
    flow_word,
    free_particle,
    harmonic_oscillator,
    propagator_kernel,
    propagator_matrix,
    quad_propagate,
    semigroup_extension_check,
    split_step,
)
from .wkt_io import load_object, load_wkt, save_object, save_pgm, save_wkt

__version__ = "0.1.0"
