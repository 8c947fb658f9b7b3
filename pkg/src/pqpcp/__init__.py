"""Low-rank + sparse matrix decomposition with reweighted proximal steps."""

from .matrix import (
    NumericError,
    SvdFactors,
    frob_norm,
    load_matrix,
    load_matrix_binary,
    load_matrix_csv,
    randn_matrix,
    rank_estimate,
    save_matrix,
    save_matrix_binary,
    save_matrix_csv,
    svd,
)
from .prox import prox_weighted_shrink, prox_weighted_svt
from .solver import (
    IterationRecord,
    SolverConfig,
    SolverResult,
    compute_weights_l,
    compute_weights_s,
    relaxed_objective,
    solve,
    update_l,
    update_s,
)
from .bench import (
    RecoveryMetrics,
    SweepRow,
    SyntheticProblem,
    SyntheticSpec,
    evaluate,
    generate,
    run_sweep,
    write_sweep_csv,
)
from .images import (
    ImagePlane,
    NoiseSpec,
    corrupt,
    denoise,
    image_rse,
    psnr,
    read_image,
    write_image,
)

__version__ = "0.1.0"

__all__ = [
    "NumericError",
    "SvdFactors",
    "svd",
    "frob_norm",
    "randn_matrix",
    "rank_estimate",
    "load_matrix",
    "save_matrix",
    "load_matrix_csv",
    "save_matrix_csv",
    "load_matrix_binary",
    "save_matrix_binary",
    "prox_weighted_svt",
    "prox_weighted_shrink",
    "SolverConfig",
    "IterationRecord",
    "SolverResult",
    "compute_weights_l",
    "compute_weights_s",
    "relaxed_objective",
    "update_l",
    "update_s",
    "solve",
    "SyntheticSpec",
    "SyntheticProblem",
    "RecoveryMetrics",
    "SweepRow",
    "generate",
    "evaluate",
    "run_sweep",
    "write_sweep_csv",
    "ImagePlane",
    "NoiseSpec",
    "read_image",
    "write_image",
    "corrupt",
    "denoise",
    "psnr",
    "image_rse",
    "__version__",
]
