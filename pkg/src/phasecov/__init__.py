"""Phase covariant qubit channels and their dynamics."""

__version__ = "0.1.0"

from .attainability import (ClassMembership, in_class_cp, in_class_L, in_class_L_rotated,
                            in_class_phcov_cp, semigroup_generator_from_channel)
from .channel import (BlochVector, PhaseCovChannel, SinkhornForm, apply, compose, in_polyhedron, invert,
                      is_cp, is_positive, pauli_transfer, r_max, sinkhorn_form, to_choi)
from .dynamics import (DivisibilityReport, RateTriple, Trajectory, blp_monotone_at, classify_intervals,
                       generator_pauli_transfer, intermediate_map, is_cp_divisible_at, is_p_divisible_at,
                       population, rates_from_trajectory, trajectory_from_rates)
from .errors import (ConfigError, DegenerateKernel, DomainError, NoNormalForm, NotInInterior, PhaseCovError,
                     PoleOnGrid, QuadratureFailure, SingularChannel, UnsupportedInversion)
from .families import (FamilySpec, eternal_commutative, eternal_noncommutative, kernel_example,
                       nonmonotone_population, rotated_semigroup, semigroup)
from .kernels import (CMReport, KernelSpec, example_kernel, is_completely_monotone,
                      laplace_params_from_kernel, kernel_admissible)
from .rational import RationalLaplace, rational_derivative
from .verdict import EPS, Status, Verdict
