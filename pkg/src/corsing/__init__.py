"""Compressed Petrov-Galerkin solver for periodic advection-diffusion-reaction
problems: biorthogonal spline wavelet trial functions, randomly subsampled
Fourier test functions, orthogonal matching pursuit recovery."""

from corsing.wavelet1d import (
    CDF22,
    FilterBank,
    WaveletIndex,
    dwt_analysis,
    dwt_synthesis,
    enumerate_indices,
    interpolate_to_level,
)
from corsing.tensor_basis import (
    AnisoIndex,
    IsoIndex,
    TrialBasis,
    enumerate_ani,
    enumerate_iso,
    h1_weight,
    tensor_dwt,
    tensor_idwt,
)
from corsing.fourier import (
    phi_fourier,
    psi_fourier,
    tensor_product_coeff,
    test_h1_normsq,
    test_indices,
)
from corsing.assembly import (
    AdrProblem,
    CoeffField,
    assemble_B,
    compute_constant_C,
    condition_number,
    load_vector,
    stiffness_entry,
    stiffness_rows,
)
from corsing.coherence import (
    SamplingMeasure,
    build_measure,
    empirical_coherence,
    nu_1d,
    nu_1d_sharp,
    nu_ani,
    nu_iso,
    nu_practical,
    recommend_R,
    recommend_m,
)
from corsing.solver import (
    CompressedSystem,
    SparseSolution,
    corsing_solve,
    default_measure,
    draw_tests,
    omp_solve,
    precondition,
)
from corsing.experiments import (
    SOLUTIONS,
    ManufacturedSolution,
    StudyConfig,
    TrialStats,
    best_s_term,
    make_problem,
    preset,
    relative_error,
    run_study,
    validate_suite,
)

__version__ = "0.1.0"
