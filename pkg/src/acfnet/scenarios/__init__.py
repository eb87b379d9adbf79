"""Figure-level scenarios: configuration, presets, runners and file output."""

from .config import ScenarioConfig, load_config, parse_config
from .presets import preset, preset_names
from .runners import (
    SweepResult,
    TableResult,
    TraceResult,
    run,
    run_chain,
    run_experimental,
    run_sweep,
    run_trace,
)
from .output import write_outputs

__all__ = [
    "ScenarioConfig", "load_config", "parse_config", "preset", "preset_names", "SweepResult",
    "TableResult", "TraceResult", "run", "run_chain", "run_experimental", "run_sweep", "run_trace",
    "write_outputs",
]
