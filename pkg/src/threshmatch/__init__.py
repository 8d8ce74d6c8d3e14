"""Treatment-effect estimation for threshold-allocated treatments.

Estimates the average treatment effect on the treated (ATT) when treatment
is assigned by comparing a score against a fixed cutoff and the score's
unobserved residual may confound the outcome.  The pipeline splits the
sample in three, residualizes the score, estimates the linear outcome
coefficients from first-order differences of residual-sorted controls,
matches each treated observation to its nearest control in residual space,
and averages the adjusted matched differences.  Cross-fitting, bootstrap
inference, an individual-effect surface estimator, and a synthetic
Monte-Carlo harness are included.
"""

from .att import (
    AttEstimate,
    CrossfitEstimate,
    crossfit_on_splits,
    estimate_att,
    estimate_att_crossfit,
    matched_differences,
)
from .bootstrap import BootstrapResult, bootstrap_att, bootstrap_replicate
from .data_model import (
    ColumnSpec,
    ObservationSet,
    SplitAssignment,
    load_csv,
    split_three_way,
    treatment_mask,
    write_csv,
)
from .diff_beta import BetaFit, first_differences, fit_beta, order_by_eta
from .errors import (
    ArityMismatch,
    DegenerateCovariate,
    DimensionMismatch,
    EmptyControlGroup,
    EmptyTreatedGroup,
    IndexOutOfRange,
    InputError,
    InvalidLevel,
    MissingColumn,
    NonFiniteValue,
    NumericError,
    ParseError,
    RankDeficient,
    SplitTooSmall,
    StructuralError,
    ThreshmatchError,
    TooFewControls,
    TooFewRows,
    TooManyFailures,
)
from .ite import (
    IteModel,
    SplineBasisSpec,
    build_basis,
    fit_ite,
    ite_mse,
    load_ite_model,
    predict_ite,
    predict_ite_batch,
    save_ite_model,
)
from .linreg import LinearFit, ols
from .matching import MatchResult, match_controls, match_controls_brute
from .residualize import GammaFit, fit_gamma, residuals_eta
from .simulate import (
    DgpConfig,
    McReport,
    generate,
    monte_carlo_att,
    monte_carlo_ite,
    true_att_oracle,
    true_ite_fn,
)

__version__ = "0.1.0"

__all__ = [
    "AttEstimate",
    "ArityMismatch",
    "BetaFit",
    "BootstrapResult",
    "ColumnSpec",
    "CrossfitEstimate",
    "DegenerateCovariate",
    "DgpConfig",
    "DimensionMismatch",
    "EmptyControlGroup",
    "EmptyTreatedGroup",
    "GammaFit",
    "IndexOutOfRange",
    "InputError",
    "InvalidLevel",
    "IteModel",
    "LinearFit",
    "MatchResult",
    "McReport",
    "MissingColumn",
    "NonFiniteValue",
    "NumericError",
    "ObservationSet",
    "ParseError",
    "RankDeficient",
    "SplineBasisSpec",
    "SplitAssignment",
    "SplitTooSmall",
    "StructuralError",
    "ThreshmatchError",
    "TooFewControls",
    "TooFewRows",
    "TooManyFailures",
    "bootstrap_att",
    "bootstrap_replicate",
    "build_basis",
    "crossfit_on_splits",
    "estimate_att",
    "estimate_att_crossfit",
    "first_differences",
    "fit_beta",
    "fit_gamma",
    "fit_ite",
    "generate",
    "ite_mse",
    "load_csv",
    "load_ite_model",
    "match_controls",
    "match_controls_brute",
    "matched_differences",
    "monte_carlo_att",
    "monte_carlo_ite",
    "ols",
    "order_by_eta",
    "predict_ite",
    "predict_ite_batch",
    "residuals_eta",
    "save_ite_model",
    "split_three_way",
    "treatment_mask",
    "true_att_oracle",
    "true_ite_fn",
    "write_csv",
]
