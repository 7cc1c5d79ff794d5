"""Quadrature oracles, Monte-Carlo and variational divergence estimators, experiment drivers."""

from .oracles import (
    fisher_mc_ncx2,
    fisher_quadrature_ncx2,
    renyi_finite_n_k1,
    renyi_finite_n_k1_pointwise,
    renyi_gaussian_pair,
    renyi_ncx2_quadrature,
)
from .variational import Adam, DivergenceEstimate, Mlp, TrainConfig, variational_objective, variational_renyi
from .experiments import (
    delta_sweep_experiment,
    finite_n_experiment,
    fisher_table,
    gauss_criterion_table,
    plateau_experiment,
    prior_tradeoff_table,
)
