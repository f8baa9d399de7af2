"""tailgrid: extreme-value estimation for processes observed on discrete grids.

The library covers the full pipeline from grid-sampled observations to
dependence-structure estimates:

* ``grids``: observation grids, piecewise-linear interpolation, exact
  path functionals (mesh width, modulus of continuity, sup distance);
* ``margins``: moment-type tail estimators and their interpolated
  curves, plus extreme-quantile estimation;
* ``standardize``: marginal standardization through exact or estimated
  tails;
* ``expmeasure``: empirical exponent measures, restriction to D_c, a
  discretized complete-dependence reference, and the exact atom-measure
  metric d_c;
* ``models``: closed-form synthetic process families for oracle checks;
* ``conditions``: numerical verification of the smoothness / tail
  approximation conditions and the grid-rate recommendation;
* ``harness``: deterministic Monte Carlo experiment runner;
* ``cli``: the ``tailgrid`` command-line interface.
"""

from .grids import (Grid, GridError, PiecewiseLinearPath, SampledPath, interpolate,
                    mesh, modulus_of_continuity, sup_distance)
from .margins import (DegenerateSampleError, MarginCurves, TailTriple, TopOrderStats,
                      estimate_margins, moment_estimators, quantile_curves,
                      quantile_estimate, top_order_statistics)
from .standardize import (StandardizationError, StandardizedPath, scaled_atoms,
                          xi_hat, xi_true)
from .expmeasure import (MonteCarloEstimate, PointMeasure, ReferenceMeasure, TestSet,
                         dc_distance, nu_hat, nu_oracle_monte_carlo,
                         reference_complete_dependence, restrict)
from .models import (CompleteDependenceFrechet, CovarianceSpec, ExpGaussian,
                     GammaCurve, ParetoPower, counterexample_error, simulate,
                     simulate_matrix, true_marginals)
from .conditions import (ConditionReport, MeshRecommendation, check_M,
                         check_lemma31, check_smoothness, estimate_S,
                         recommend_mesh)
from .harness import (ExperimentConfig, ExperimentResult, derive_seed,
                      run_experiment)

__version__ = "0.1.0"

__all__ = [
    "Grid", "GridError", "PiecewiseLinearPath", "SampledPath",
    "interpolate", "mesh", "modulus_of_continuity", "sup_distance",
    "DegenerateSampleError", "MarginCurves", "TailTriple", "TopOrderStats",
    "estimate_margins", "moment_estimators", "quantile_curves",
    "quantile_estimate", "top_order_statistics",
    "StandardizationError", "StandardizedPath", "scaled_atoms", "xi_hat", "xi_true",
    "MonteCarloEstimate", "PointMeasure", "ReferenceMeasure", "TestSet",
    "dc_distance", "nu_hat", "nu_oracle_monte_carlo",
    "reference_complete_dependence", "restrict",
    "CompleteDependenceFrechet", "CovarianceSpec", "ExpGaussian", "GammaCurve",
    "ParetoPower", "counterexample_error", "simulate", "simulate_matrix",
    "true_marginals",
    "ConditionReport", "MeshRecommendation", "check_M", "check_lemma31",
    "check_smoothness", "estimate_S", "recommend_mesh",
    "ExperimentConfig", "ExperimentResult", "derive_seed", "run_experiment",
    "__version__",
]
