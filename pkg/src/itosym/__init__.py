"""Standard symmetries, integrating maps and pathwise checks for scalar Ito equations."""

from .errors import (
    BadFactor,
    BadGrid,
    DegenerateNoises,
    DegenerateProbe,
    DomainError,
    IncomparableTrajectories,
    ItosymError,
    QuadratureFailure,
    SingularNoise,
    SpecError,
)
from .expr import Jet2, eval_jet2, evaluate, from_json, to_json
from .kozlov import (
    KozlovMap,
    TransformedCoefficients,
    exact_solution,
    kozlov_map,
    transformed_coefficients,
    transformed_coefficients_numeric,
)
from .model import (
    Additive,
    ExpAffine,
    General,
    ItoEquation,
    Multiplicative,
    Poisson,
    ReducedEquation,
    Simple,
    equation_from_json,
    equation_to_json,
    standard_form_reduce,
    stratonovich_drift,
)
from .paths import (
    Trajectory,
    WienerPath,
    coarsen,
    euler_maruyama,
    load_path,
    sample_wiener,
    save_path,
    strong_error,
)
from .symmetry import (
    AM,
    EA,
    MS,
    PM,
    ConstancyReport,
    NoSymmetry,
    Symmetric,
    SymmetryCoefficient,
    check_compatibility,
    classify,
    compat_J,
    compat_K,
    ito_laplacian,
    lambda_fn,
    make_family,
    make_phi,
    pairwise_compat,
    residual_first_order,
    residual_noise_eqs,
    residual_second_order,
    three_noise_probe,
)

__version__ = "0.1.0"
