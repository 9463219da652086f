from .basin_tools import run_basin, wilson_interval
from .certify_tools import certify_state, run_certify, run_region_scan
from .figure_tools import run_figure1, run_razor_edge
from .pattern_tools import run_chain_sweep, run_pattern_search

__all__ = [
    "run_basin",
    "wilson_interval",
    "certify_state",
    "run_certify",
    "run_region_scan",
    "run_figure1",
    "run_razor_edge",
    "run_chain_sweep",
    "run_pattern_search",
]
