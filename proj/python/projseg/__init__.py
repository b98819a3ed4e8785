"""3D-to-2D projection segmentation for OCTA-like volumes.

Thin python surface over the C++ core: tensor operations, patch tiling,
en-face projections, segmentation metrics, phantom generation, and the
full CLI pipeline via :func:`run_cli`.
"""

from projseg._core import (  # noqa: F401
    ProjsegError,
    __version__,
    balanced_accuracy,
    best_threshold,
    collapse_conv,
    confusion,
    conv2d,
    conv3d,
    dice,
    distance_map,
    gen_phantom,
    generate_all,
    jaccard,
    plan_patches,
    project,
    relu,
    resize_h_linear,
    run_cli,
    seam_score,
    softmax,
    softmax_ce,
    splice,
    uni_pool_h,
)
