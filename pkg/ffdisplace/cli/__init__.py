from .config import ExperimentConfig, parse_config, apply_overrides
from .runner import RunOutput, run
from .main import main
