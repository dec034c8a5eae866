from .cases import VERIFY_CASES, CaseResult, run_case
from .experiment import PIPELINES, ExperimentConfig, load_experiment, run_experiment
from .main import build_parser, main
