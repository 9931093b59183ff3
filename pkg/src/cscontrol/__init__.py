"""Sparse control vectors for networked feedback loops via compressive sampling."""
from .codec import compression_ratio, decode_control, encode_control
from .config import ConfigError, ExperimentConfig, load_config
from .lift import LiftedSystem, build_lifted, matexp, quadrature_gram_oracle
from .model import (BasisSpec, PlantModel, ReferenceSignal, basis_eval, default_plant,
                    reference_from_sinusoids, reference_from_step, signal_eval)
from .sampling import SampleSelector, draw_selector, make_rng, select_rows
from .simulate import (RidgeController, RunConfig, RunResult, SparseController,
                       TruncatedRidgeController, compare_truncated, control_step,
                       output_trace, propagate, run_closed_loop)
from .solvers import (ControlVector, SolverConfig, fista, lipschitz_estimate, ridge,
                      soft_threshold, truncate_top)

__version__ = "0.1.0"
