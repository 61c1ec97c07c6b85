"""Proximal Langevin samplers for composite log-concave targets."""

from ._core import (
    __version__,
    gamma_quantile,
    posterior_mean,
    prox_box,
    prox_l1,
    prox_logbarrier,
    prox_logdet,
    prox_psd,
    run_experiment,
    sample,
    trunc_gauss_quantile,
    tune_for_epsilon,
    verify,
    wasserstein2_1d,
)

__all__ = [
    "__version__",
    "gamma_quantile",
    "posterior_mean",
    "prox_box",
    "prox_l1",
    "prox_logbarrier",
    "prox_logdet",
    "prox_psd",
    "run_experiment",
    "sample",
    "trunc_gauss_quantile",
    "tune_for_epsilon",
    "verify",
    "wasserstein2_1d",
]
