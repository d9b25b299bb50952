from .metrics import mse, rmse, pearson, EmptyInput, ZeroVariance
from .kde import (KdeModel, CoverageReport, sym_kl, hellinger_sq, shared_grid,
                  coverage_report, silverman_bandwidth, DegenerateSamples,
                  GridTooCoarse)
from .sensitivity import ParamRange, SensitivityReport, sensitivity_scan, ScanError
from .smbo import HyperoptResult, Trial, smbo_optimize

__all__ = [
    "mse", "rmse", "pearson", "EmptyInput", "ZeroVariance",
    "KdeModel", "CoverageReport", "sym_kl", "hellinger_sq", "shared_grid",
    "coverage_report", "silverman_bandwidth", "DegenerateSamples", "GridTooCoarse",
    "ParamRange", "SensitivityReport", "sensitivity_scan", "ScanError",
    "HyperoptResult", "Trial", "smbo_optimize",
]
