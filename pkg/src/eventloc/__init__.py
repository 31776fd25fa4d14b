"""Covariant event-localization measures: kinematics, representations,
kernels, densities, coordinate observables, and definiteness probes."""

__version__ = "0.1.0"

from .minkowski import (
    minkowski_dot,
    invariant_mass,
    is_future_cone,
    lorentz_of_sl2c,
    wigner_boost,
    wigner_rotation,
    su2_wigner_matrix,
)
from .irreps import IrrepLabel, build_generators, irrep_matrix_element, s_matrices
from .states import (
    Axis,
    Channel,
    Grid,
    WaveFunction,
    apply_dilatation,
    apply_lorentz,
    apply_translation,
    bump_family,
    gauss_axis,
    gaussian_packet,
    momentum_grid,
    norm_squared,
    realize_family,
    spacetime_grid,
    uniform_axis,
)
from .kernels import (
    KernelCertificate,
    PoincareKernel,
    PoincareSector,
    TranslationKernel,
    certify_kernel,
    make_poincare_kernel,
    make_translation_kernel,
    poincare_catalog,
    translation_catalog,
)
from .density import (
    DensityField,
    amplitude_field,
    conjugate_grid,
    density,
    quasi_baricentric_density,
    region_probability,
)
from .observables import (
    CoordinateEstimate,
    apply_xi_filter,
    casimir_values,
    classify_kernel,
    mean_coordinates_abc,
    mean_coordinates_moment,
    mean_coordinates_operator,
    proper_time_delay,
)
from .definiteness import (
    DefinitenessReport,
    correlator_r,
    correlator_r_hat,
    definiteness_probe,
)
