"""Manifold learning for third-order tensors under the t-product."""
from .errors import (
    EmptyNeighborhood,
    IllPosed,
    NotConverged,
    NumericalError,
    TManifoldError,
    ValidationError,
)
from .graph import GraphSpec, build_discriminant_graphs, build_graphs, degree_and_laplacian
from .harness import Dataset, RunConfig, evaluate_1nn, load_dataset, run, synth_gaussian_classes
from .io import read_labels, read_t3b, write_labels, write_t3b
from .manifold import lme_fit, lme_weights, mle_fit, mlde_fit, mlde_project
from .spectral import (
    FDiagonal,
    eig_f_symmetric,
    f_orthonormalize,
    generalized_eig,
    is_positive_definite,
    is_positive_semidefinite,
    tubal_rank,
)
from .tensor import (
    bcirc,
    bcirc_oracle,
    fold,
    from_transform,
    identity_tensor,
    t_product,
    t_transpose,
    to_transform,
    trace,
    unfold,
)
from .trace_ratio import TraceRatioProblem, check_well_posed, newton_qr, objective

__version__ = "0.1.0"
