"""Desk-scale toolkit for normalizer circuits over Abelian and black-box groups.

Exact group/label algebra, three execution engines (dense oracle, structured
coset-plus-phase simulation, closed-form order-finding sampler), black-box
gate extraction, and the algorithm suite built on top of them.
"""

from .algorithms import (
    decompose_group,
    discrete_log,
    ec_discrete_log,
    factor,
    find_order,
    multivariate_dlog,
    solve_hkp,
    solve_hsp,
    solve_linear_system_bb,
)
from .blackbox import (
    DecompositionTable,
    EllipticCurveGroup,
    ZNStarGroup,
    bb_decompose_bruteforce,
    bb_order,
)
from .circuits import (
    AutomorphismGate,
    DesignatedBasis,
    MatrixRep,
    NormalizerCircuit,
    QFTGate,
    QuadraticForm,
    QuadraticGate,
    apply_qft_basis_update,
    check_modexp_normalizable,
    load_circuit,
    save_circuit,
    validate_matrix_rep,
    validate_quadratic,
)
from .coset import CosetPhaseState, coset_run
from .deblackbox import (
    EncodingBridge,
    deblackbox_circuit,
    extract_matrix_rep,
    extract_quadratic,
)
from .dense import DenseState, dense_run, dense_sample
from .dirichlet import DirichletDistribution, dirichlet_peak_mass, dirichlet_sample
from .groups import ElementaryGroup, GroupElement, T, Z, cyclic, group, parse_group

__version__ = "0.1.0"
