from ._core import (
    InputError,
    NumericalError,
    beta_product,
    beta_product_log_truth,
    estimator_variances,
    gauss_hermite,
    gllvm,
    joint_estimate,
    marginal_estimate,
    product_variance,
    required_iterations,
    tci_report,
    tci_sample,
    verify,
)

__all__ = [
    "InputError",
    "NumericalError",
    "beta_product",
    "beta_product_log_truth",
    "estimator_variances",
    "gauss_hermite",
    "gllvm",
    "joint_estimate",
    "marginal_estimate",
    "product_variance",
    "required_iterations",
    "tci_report",
    "tci_sample",
    "verify",
]
