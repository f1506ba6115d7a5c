from archsearch_mip.gp.gaussian_process import FitConfig, GpState, condition, factorize, fit, load_gp_state
from archsearch_mip.gp.metrics import PredictiveMetrics, metrics, mnll, predictive_metrics, rmse, spearman

__all__ = [
    "FitConfig",
    "GpState",
    "PredictiveMetrics",
    "condition",
    "factorize",
    "fit",
    "load_gp_state",
    "metrics",
    "mnll",
    "predictive_metrics",
    "rmse",
    "spearman",
]
