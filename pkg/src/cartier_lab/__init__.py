"""cartier_lab: exact Cartier-module and gamma-sheaf computations over F_q."""

__version__ = "0.1.0"

from .fields import (  # noqa: F401
    Fq,
    FrobeniusContext,
    FieldElement,
    SemilinearMap,
    RelativeExtension,
    P_LINEAR,
    P_INV_LINEAR,
    iterated_image_chain,
    is_nilpotent_semilinear,
    fixed_points_dimension,
)
from .errors import (  # noqa: F401
    CartierLabError,
    ValidationError,
    ParseError,
    ContextMismatchError,
    UnsupportedRingError,
    CapExceeded,
    NonStabilized,
    InvariantViolation,
    CertificateFailed,
)
from .poly import (  # noqa: F401
    PolyRing,
    Polynomial,
    IdealSpec,
    frobenius_decompose,
    frobenius_component,
    is_regular_sequence,
    solve_membership,
)
from .cartier import (  # noqa: F401
    CartierModule,
    CartierMorphism,
    FiniteModel,
    apply_kappa,
    kappa_power,
    image_chain,
    stable_image,
    is_nilpotent,
    kernel,
    cokernel,
    image,
    direct_sum,
    submodule_module,
    quotient_module,
    max_nilpotent_submodule,
    hom_cartier,
    omega_module,
    point_module,
    jordan_block_module,
)
from .gamma import (  # noqa: F401
    GammaSheaf,
    DualizingData,
    UnitRoot,
    structure_gamma,
    cartier_to_gamma,
    gamma_to_cartier,
    gamma_kernel_chain,
    gamma_image_chain,
    gamma_nilpotent,
    gamma_unit_defect,
    gamma_pullback,
    unit_root_stabilize,
)
from .functors import (  # noqa: F401
    RegularSequence,
    LocalizedCartier,
    PushforwardView,
    torsion_gamma_Z,
    torsion_invariant_oracle,
    open_pullback,
    open_pushforward,
    closed_pushforward,
    koszul_pullback,
    restrict_to_subring,
    evaluate_at_point,
    gamma_evaluate_at_point,
    sequence_change_factor,
    sol_dimension,
)
from .ie import (  # noqa: F401
    Lattice,
    IECertificate,
    LocalizedMorphism,
    nil_isomorphic,
    supported_on_Z,
    kappa_saturate,
    test_module_sum,
    intermediate_extension,
    ie_functorial,
    ie_exactness_probe,
    minimality_oracle,
    simple_crystal_probe,
)
from .serialize import (  # noqa: F401
    module_to_json,
    module_from_json,
    sheaf_to_json,
    sheaf_from_json,
    certificate_to_json,
    element_to_string,
    element_from_string,
    canonical_json,
    load_document,
    dump_document,
)
