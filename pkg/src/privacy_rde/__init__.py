"""Utility-privacy tradeoff regions for categorical databases."""
from .errors import ConvergenceError, InfeasibleError, PrivacyRDEError, ValidationError
from .prob import (Alphabet, Axis, Channel, DistortionSpec, JointPmf, Pmf, Role,
                   conditional_entropy, entropy, expected_distortion, kl_divergence,
                   mutual_information, push_forward)
from .rd import BAConfig, RDPoint, blahut_arimoto, d_max, d_min, rate_distortion, rd_curve
from .region import (PrivacyProblem, RegionCurve, RegionPoint, SolverConfig, decoded_distortion,
                     equivocation, feasibility_window, gamma_curve, gamma_of_D,
                     markov_gamma_of_D, markov_restricted_solver, optimal_decoder, r_of_DE,
                     rate_objective, region_curve)
from .closed_forms import (GaussianGamma, GaussianModel, WaterfillSolution, gaussian_gamma,
                           gaussian_region, hamming_gamma_curve, hamming_waterfill)
from .oracle import (OracleConfig, OracleResult, enumerate_channels, oracle_gamma, oracle_rate,
                     oracle_rd)
from .dp import (Mechanism, QuerySpec, accuracy_curve, dp_ratio_check, laplace_mechanism,
                 sensitivity)
from .pipeline import (SanitizationRun, Table, empirical_joint, export_csv, export_json,
                       ingest_csv, measure, run_sanitization, sanitize)

__version__ = "0.1.0"
