"""offield: desk-scale numerics for operator fields of nilpotent group algebras.

The library realizes the group algebras of the Heisenberg groups H_n and the
thread-like groups G_N as algebras of operator fields over their duals, at the
level of finite grids: representation fibers as integral kernels, coherent
almost homomorphisms, and the norm-limit conditions that cut the group algebra
out of the ambient field algebra, all evaluated on refinement ladders.
"""

__version__ = "0.1.0"

from . import errors
from .sampling import (
    DECAY_FLOOR,
    GridSpec,
    PartialSpectrum23,
    SampledFunctionH,
    Symbol,
    Window,
    character_transform,
    make_test_function,
    make_window,
    partial_fourier_23,
)
from .linop import (
    KernelOperator,
    VectorL2,
    adjoint_op,
    apply,
    compose,
    hs_norm,
    identity_kernel,
    op_norm,
    rank_one,
    translate,
    truncate,
)
from .heisenberg import (
    HeisenbergField,
    continuity_profile,
    group_convolution,
    group_involution,
    heisenberg_field,
    hs_identity_residual,
    pi_lambda,
    rho_symbol,
)
from .nu_field import (
    CoherentState,
    coefficient,
    defect,
    eta_state,
    field_defect_profile,
    nu_lambda,
    resolution_residual,
)
from .extensions import (
    AlmostHomomorphism,
    delaroche_homomorphism,
    delaroche_nu,
    nu_homomorphism,
    tau_defect_profile,
)
from .threadlike import (
    CoadjointPoint,
    FHat2,
    OrbitPolynomial,
    coadjoint_translate,
    layer_and_canonical,
    make_bump_fhat2,
    make_heisenberg_fhat2,
    pi_ell,
    rho_symbol_N,
    xi_hat,
    xi_hat_inverse,
)
from .perfect_data import (
    OperatorFieldGN,
    PerfectData,
    PolynomialSequence,
    adapted_sequence,
    condition_defect,
    eta_iku,
    field_from_fhat2,
    heisenberg_family,
    nu_ik,
    propose_perfect_data,
    truncation_decay,
    verify_perfect_data,
)
