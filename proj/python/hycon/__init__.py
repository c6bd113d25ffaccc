"""Tri-modal contrastive representation toolkit."""

from ._hycon import (
    binarize,
    compute_metrics,
    default_hyperparams,
    generate_synthetic,
    gradcheck_loss_names,
    gradient_check,
    loss_gradients,
    loss_report,
    normalize_for_contrast,
    pair_counts,
    pca2d,
    run_experiment,
    silhouette,
)

__all__ = [
    "binarize",
    "compute_metrics",
    "default_hyperparams",
    "generate_synthetic",
    "gradcheck_loss_names",
    "gradient_check",
    "loss_gradients",
    "loss_report",
    "normalize_for_contrast",
    "pair_counts",
    "pca2d",
    "run_experiment",
    "silhouette",
]
