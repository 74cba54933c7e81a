"""Rank-based tests of extreme-value copula dependence with multiplier p-values."""

from .copulas import CopulaModel, Family, kendall_tau_empirical, sample, tau_to_param
from .data import (PseudoObservations, SampleMatrix, TieKind, TiePolicy, compute_ranks,
                   pseudo_observations, read_csv, to_pseudo)
from .empirical import (EmpiricalCopula, EvalGrid, ecop_eval, make_grid, partial_derivative_hat,
                        partial_derivative_rs)
from .errors import (ConfigError, CsvParseError, DegenerateColumn, EvtestError, InvalidModel,
                     TiesDetected, UnattainableTau, UnsupportedExponent)
from .maxstable import (InfluenceMatrix, MultiplierWeights, TestConfig, TestResult,
                        build_influence_matrix, draw_multipliers, p_value, process_d,
                        replicate_statistics, run_test, statistic_S, statistic_T)

__version__ = "0.1.0"
