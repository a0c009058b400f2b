"""Building-block hill-climbing on hierarchical test functions."""
from .bbmodel import BBStructure, BuildingBlock, decode, initial_structure, random_state
from .driver import RunConfig, RunResult, run_bbhc, structure_correct
from .hfuncs import Kind, Objective, ProblemSpec, global_optimum_value, score
from .linkage import MemoryBuffer, detect_clusters, linked, rebuild_structure

__all__ = [
    "BBStructure", "BuildingBlock", "Kind", "MemoryBuffer", "Objective", "ProblemSpec",
    "RunConfig", "RunResult", "decode", "detect_clusters", "global_optimum_value",
    "initial_structure", "linked", "random_state", "rebuild_structure", "run_bbhc",
    "score", "structure_correct",
]
