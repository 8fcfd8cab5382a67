"""Real spectra of the PT-symmetric Hamiltonian -d^2/dx^2 - (i sinh x)^a cosh^b x.

Finite differences along optimally shifted complex lines, characteristic
determinant bisection, parameter continuation with level-merge detection,
and a high-precision Riccati-Pade cross-check.
"""

from .potential import (
    ComplexSample,
    PotentialDomainError,
    PotentialParams,
    effective_potential,
    eval_potential,
    eval_potential_line,
    table1_signs,
)
from .contour import (
    ContourDomainError,
    ContourSpec,
    FamilySelector,
    asymptotic_g,
    asymptotic_phase,
    optimal_shift,
)
from .discretization import (
    GridSpec,
    TridiagonalOperator,
    build_hamiltonian,
    default_x_max,
)
from .rpm import (
    RpmConvergenceError,
    RpmDomainError,
    RpmProblem,
    RpmResult,
    convergence_table,
    hankel_root,
    riccati_coefficients,
    transform_iq,
    transform_u,
)
from .spectral import (
    LevelTrack,
    ScaledDeterminant,
    TrackEvent,
    WaveFunction,
    continuation_sweep,
    det_n,
    eigenvector,
    find_real_eigenvalues,
    solve_alpha_for_energy,
    special_level,
)

__version__ = "0.1.0"
