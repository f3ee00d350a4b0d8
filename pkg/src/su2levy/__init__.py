"""Fourier-series densities and Monte Carlo simulation of Levy processes on SU(2)."""

from .density import (
    CoefficientSet,
    DensityProfile,
    choose_k_max,
    class_marginal,
    coefficients,
    convergence_report,
    decay_bound,
    density_at,
    density_class,
    density_profile,
    heat_kernel,
    l2_norm_sq,
    matrix_exp,
    truncation_error,
    tv_bounds,
)
from .generator import (
    ClassJump,
    FixedJump,
    GeneratorSpec,
    LevyAtom,
    LevyMeasure,
    conjugate_rate,
    generator_matrix,
    hypothesis_H,
    is_conjugate_invariant,
    is_inverse_invariant,
    lambda_delta,
    spectral_check,
    spectral_gap,
    square_root_rows,
)
from .group import (
    IDENTITY,
    AlgebraElement,
    GroupElement,
    adjoint,
    bracket,
    compose,
    conjugacy_angle,
    exp_map,
    haar_sample,
    inverse,
)
from .reps import (
    RootDatum,
    angle_weight,
    casimir_eigenvalue,
    character,
    derived_rep,
    su2_root_datum,
    weyl_character_torus,
    weyl_dimension,
    wigner_matrix,
)
from .simulate import PathConfig, SampleSet, compare, empirical_angle_hist, sample_jump, simulate_terminal

__version__ = "0.1.0"
