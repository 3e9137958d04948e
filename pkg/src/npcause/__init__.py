"""Functional causal-effect estimation from nonparanormal observational data.

The pipeline: load and trim a data table, learn (or accept) an equivalence
class of causal DAGs with a rank-based PC search, and for every DAG in the
class estimate the effect of each candidate cause on the response as a
function of the cause's value.
"""

__version__ = "0.1.0"

from .dataset import DataMatrix, TrimmedData, load_table, max_spacing_diagnostic, trim
from .effects import (CausalEffectCurve, EffectMultiset, LatentRegression,
                      SeriesSpec, bootstrap_sd, corollary_effect, gaussian_effect,
                      latent_beta, nce_curve, nce_over_class, series_oracle)
from .graph import Cpdag, Dag, cpdag_of, enumerate_extensions, meek_close
from .marginals import GaussianMarginal, KernelSpec, MarginalFit, fit_marginal
from .normal import std_cdf, std_pdf, std_quantile, to_latent
from .rpc import (CiTestConfig, CorrelationMatrix, ci_test, estimate_cpdag,
                  estimate_cpdag_from_corr, kendall_tau, partial_correlation,
                  rank_correlation_matrix, tau_to_pearson)
from .simulate import (ExpCopulaModel, LinearSem, exp_causal_effect_oracle,
                       exp_conditional_mean, mad_experiment, npn_transform,
                       random_dag, sample_exp_model, sample_gaussian)

__all__ = [
    "__version__",
    "DataMatrix", "TrimmedData", "load_table", "trim", "max_spacing_diagnostic",
    "KernelSpec", "MarginalFit", "GaussianMarginal", "fit_marginal",
    "std_pdf", "std_cdf", "std_quantile", "to_latent",
    "Dag", "Cpdag", "cpdag_of", "enumerate_extensions", "meek_close",
    "CorrelationMatrix", "CiTestConfig", "kendall_tau", "tau_to_pearson",
    "rank_correlation_matrix", "partial_correlation", "ci_test",
    "estimate_cpdag", "estimate_cpdag_from_corr",
    "LatentRegression", "CausalEffectCurve", "EffectMultiset", "SeriesSpec",
    "gaussian_effect", "latent_beta", "nce_curve", "nce_over_class",
    "bootstrap_sd", "series_oracle", "corollary_effect",
    "LinearSem", "ExpCopulaModel", "random_dag", "sample_gaussian",
    "npn_transform", "sample_exp_model", "exp_causal_effect_oracle",
    "exp_conditional_mean", "mad_experiment",
]
