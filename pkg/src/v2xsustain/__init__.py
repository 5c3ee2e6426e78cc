"""Sustainability analysis and security management for backhaul-aware
vehicular networks: closed-form metrics, predictors, a key hierarchy, a
decision engine, and a Monte Carlo simulator with CSV emitters.
"""

from .errors import (
    AuthenticationError,
    ConfigError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    IntegrandError,
    OrderingError,
    OverflowRangeError,
    SimulationTruncated,
)
from .specfun import (
    EULER_GAMMA,
    QuadResult,
    QuadSpec,
    beta_pdf,
    expint_ei,
    integrate,
    ln_gamma,
)
from .sustain import (
    NetworkParams,
    RangeParams,
    RateParams,
    TimeWindow,
    empirical_loss_probability,
    loss_probability_model,
    message_overhead,
    signaling_overhead,
    signaling_overhead_raw,
    signaling_time_factor,
    sustainability_asymptote,
    sustainability_point,
    sustainability_window,
    sustainability_window_quadrature,
    vehicles_in_range,
    window_integrand,
)
from .predict import (
    SCALE_FLOOR,
    BetaTraffic,
    FailsafeLikelihood,
    LikelihoodBounds,
    OverheadPrediction,
    best_failsafe_window,
    connectivity_prob,
    connectivity_window_factor,
    density_beta,
    failsafe_likelihood,
    predicted_key_updates,
    predicted_message_overhead,
    scale_asymptote,
    scale_growth_diagnostic,
    scale_param,
)
from .keychain import (
    KEY_BYTES,
    LABELS,
    MODE_PASSKEY,
    PARENTS,
    KeyHierarchy,
    KeyNode,
    PeerCredential,
    Session,
    build_hierarchy,
    establish_session,
    export_derivation_log,
    peer_credential,
    refresh_subtree,
    verify_session,
)
from .decision import (
    CONTINUE,
    DECISIONS,
    RECONFIGURE,
    UPDATE_KEYS,
    FactorBounds,
    FactorInputs,
    FailSafeReport,
    Thresholds,
    UtilityLog,
    Violation,
    check_constraints,
    combine_factors,
    decide,
    factor_score,
    failsafe_point,
)
from .sim import (
    ComparisonReport,
    Event,
    Scenario,
    SimTrace,
    SlotMetrics,
    compare_to_model,
    run_simulation,
)
from .config import (
    ENV_CONFIG_PATH,
    ScenarioBundle,
    build_bundle,
    default_config,
    load_bundle,
    load_config,
    merge_config,
)
from .fixtures import CASES, CheckRow, FailsafeCase, run_structural_checks

__version__ = "0.1.0"

__all__ = [
    "AuthenticationError",
    "ConfigError",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "IntegrandError",
    "OrderingError",
    "OverflowRangeError",
    "SimulationTruncated",
    "EULER_GAMMA",
    "QuadResult",
    "QuadSpec",
    "beta_pdf",
    "expint_ei",
    "integrate",
    "ln_gamma",
    "NetworkParams",
    "RangeParams",
    "RateParams",
    "TimeWindow",
    "empirical_loss_probability",
    "loss_probability_model",
    "message_overhead",
    "signaling_overhead",
    "signaling_overhead_raw",
    "signaling_time_factor",
    "sustainability_asymptote",
    "sustainability_point",
    "sustainability_window",
    "sustainability_window_quadrature",
    "vehicles_in_range",
    "window_integrand",
    "SCALE_FLOOR",
    "BetaTraffic",
    "FailsafeLikelihood",
    "LikelihoodBounds",
    "OverheadPrediction",
    "best_failsafe_window",
    "connectivity_prob",
    "connectivity_window_factor",
    "density_beta",
    "failsafe_likelihood",
    "predicted_key_updates",
    "predicted_message_overhead",
    "scale_asymptote",
    "scale_growth_diagnostic",
    "scale_param",
    "KEY_BYTES",
    "LABELS",
    "MODE_PASSKEY",
    "PARENTS",
    "KeyHierarchy",
    "KeyNode",
    "PeerCredential",
    "Session",
    "build_hierarchy",
    "establish_session",
    "export_derivation_log",
    "peer_credential",
    "refresh_subtree",
    "verify_session",
    "CONTINUE",
    "DECISIONS",
    "RECONFIGURE",
    "UPDATE_KEYS",
    "FactorBounds",
    "FactorInputs",
    "FailSafeReport",
    "Thresholds",
    "UtilityLog",
    "Violation",
    "check_constraints",
    "combine_factors",
    "decide",
    "factor_score",
    "failsafe_point",
    "ComparisonReport",
    "Event",
    "Scenario",
    "SimTrace",
    "SlotMetrics",
    "compare_to_model",
    "run_simulation",
    "ENV_CONFIG_PATH",
    "ScenarioBundle",
    "build_bundle",
    "default_config",
    "load_bundle",
    "load_config",
    "merge_config",
    "CASES",
    "CheckRow",
    "FailsafeCase",
    "run_structural_checks",
    "__version__",
]
