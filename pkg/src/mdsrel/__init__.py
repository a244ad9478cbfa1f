"""Reliability analysis for DNA storage with inner and outer MDS codes."""
from mdsrel.bounds import BoundConfig, best_retrieval_bound, choose_r_prime, joint_freq_pmf, retrieval_bound, two_class_bound
from mdsrel.consensus import ConfigurationError, consensus_error_rate, consensus_rates, symbol_error_rate
from mdsrel.inner_code import InnerCode, OutcomeTable, build_outcome_table, mds_weight_distribution, miscorrection_fraction, outcome_probs
from mdsrel.kernels import BACKEND
from mdsrel.optimizer import DesignPoint, ReliabilityTarget, min_reads, opt_density
from mdsrel.retrieval import OuterCode, clt_success_approx, score_pmf, score_pmf_uniform, success_condition_check
from mdsrel.sequencing import SamplingSpec, read_frequency, sample_dirichlet, sample_profile

__version__ = "0.1.0"
