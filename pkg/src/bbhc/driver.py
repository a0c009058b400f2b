"""The outer BBHC loop: fill memory with climbs, learn linkage, rebuild, repeat."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bbmodel import BBStructure, initial_structure, random_state
from .hfuncs import Kind, Objective, ProblemSpec, optimum_id
from .hillclimb import bb_hill_climb
from .linkage import MemoryBuffer, detect_clusters, rebuild_structure

log = logging.getLogger(__name__)

DEFAULT_MEMORY_CONST = {Kind.HIFF: 8, Kind.HXOR: 8, Kind.HTRAP: 18}


@dataclass(frozen=True)
class RunConfig:
    memory_const_c: int = 8
    log_base: int = 2
    max_evals: int = 2_000_000
    stagnation_epochs: int = 5
    rng_seed: int = 0
    stop_at_optimum: bool = True

    def __post_init__(self):
        if self.memory_const_c < 1:
            raise ValueError("memory_const_c must be >= 1")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.stagnation_epochs < 1:
            raise ValueError("stagnation_epochs must be >= 1")
        if self.log_base < 2:
            raise ValueError("log_base must be >= 2")

    @classmethod
    def for_problem(cls, spec: ProblemSpec, **kwargs) -> "RunConfig":
        """Config with the log base and memory constant matched to the problem."""
        kwargs.setdefault("memory_const_c", DEFAULT_MEMORY_CONST[spec.kind])
        return cls(log_base=spec.k, **kwargs)


@dataclass
class EpochRecord:
    epoch: int
    num_blocks: int
    memory_size: int
    evals_so_far: int
    best_score: float
    merges: list[list[int]]
    structure: BBStructure = field(repr=False)
    learned: bool = True

    def to_dict(self, loci_map=None) -> dict:
        merged = [m for m in self.merges if len(m) > 1]
        return {
            "epoch": self.epoch,
            "num_blocks": self.num_blocks,
            "memory_size": self.memory_size,
            "evals_so_far": self.evals_so_far,
            "best_score": self.best_score,
            "merges": merged,
            "merged": merged,
            "new_blocks": [
                b["loci"] for b in self.structure.to_json(loci_map)[len(self.structure) - len(merged):]
            ],
        }


@dataclass
class RunResult:
    best_genotype: np.ndarray
    best_score: float
    total_evals: int
    epochs: int
    final_structure: BBStructure
    reached_optimum: bool
    epoch_trace: list[EpochRecord]
    initial_structure: BBStructure
    optimum_id: int | None = None
    evals_to_optimum: int | None = None

    def summary(self) -> dict:
        return {
            "best_genotype": "".join(map(str, self.best_genotype.tolist())),
            "best_score": self.best_score,
            "total_evals": self.total_evals,
            "epochs": self.epochs,
            "reached_optimum": self.reached_optimum,
            "optimum_id": self.optimum_id,
            "evals_to_optimum": self.evals_to_optimum,
            "final_num_blocks": len(self.final_structure),
        }


def _ilog(n: int, base: int) -> int:
    # Integer floor(log_base(n)) without float rounding surprises.
    q, value = 0, base
    while value <= n:
        value *= base
        q += 1
    return q


def memory_size(num_blocks: int, config: RunConfig) -> int:
    if num_blocks < 1:
        raise ValueError("num_blocks must be >= 1")
    return max(2, config.memory_const_c + _ilog(num_blocks, config.log_base))


def run_bbhc(spec: ProblemSpec, config: RunConfig) -> RunResult:
    rng = np.random.default_rng(config.rng_seed)
    objective = Objective(spec)
    start_structure = structure = initial_structure(spec.length)
    memory = MemoryBuffer(structure, memory_size(len(structure), config))
    trace: list[EpochRecord] = []
    epoch = 0
    stagnant = 0

    while True:
        # Phase 1: accumulate climbs until memory is full.
        while not memory.full:
            start = random_state(structure, rng)
            result = bb_hill_climb(structure, start, objective, rng,
                                   stop_at_optimum=config.stop_at_optimum)
            if result.stopped_early:
                break
            memory.add(result.final_state, result.final_genotype, result.score)
            if objective.evaluations >= config.max_evals:
                break
        if (config.stop_at_optimum and objective.solved) or objective.evaluations >= config.max_evals:
            break

        # Phase 2: learn linkage and rebuild.
        before = len(structure)
        if memory.distinct_genotypes() < 2:
            # Every entry identical would link every block; keep one and refill.
            clusters = [[b] for b in range(before)]
            learned = False
            memory = MemoryBuffer(structure, memory.capacity,
                                  memory.states[:1], memory.genotypes[:1], memory.scores[:1])
        else:
            clusters = detect_clusters(structure, memory)
            structure = rebuild_structure(structure, clusters, memory)
            learned = True
            memory = MemoryBuffer(structure, memory_size(len(structure), config))
        epoch += 1
        trace.append(EpochRecord(
            epoch, len(structure), memory.capacity, objective.evaluations,
            float(objective.best_score), clusters, structure, learned,
        ))
        log.debug("epoch %d: %d -> %d blocks, %d evals", epoch, before, len(structure),
                  objective.evaluations)

        stagnant = stagnant + 1 if len(structure) == before else 0
        if stagnant >= config.stagnation_epochs:
            break

    best = objective.best_genotype
    return RunResult(
        best_genotype=best,
        best_score=float(objective.best_score),
        total_evals=objective.evaluations,
        epochs=epoch,
        final_structure=structure,
        reached_optimum=objective.solved,
        epoch_trace=trace,
        initial_structure=start_structure,
        optimum_id=optimum_id(spec, best) if objective.solved else None,
        evals_to_optimum=objective.solved_at,
    )


def _is_tree_node(loci: list[int], k: int, length: int) -> bool:
    size = len(loci)
    q = _ilog(size, k)
    if k ** q != size or length % size:
        return False
    lo = loci[0]
    return lo % size == 0 and loci == list(range(lo, lo + size))


def structure_correct(structures, spec: ProblemSpec) -> bool:
    """True when every block ever formed is a node of the problem's k-ary tree.

    ``structures`` is a single structure or a sequence of them (e.g. the
    structures recorded per epoch). Loci are compared in structural order.
    """
    if isinstance(structures, BBStructure):
        structures = [structures]
    to_structural = np.arange(spec.length) if spec.shuffle is None else spec.inverse_shuffle
    for structure in structures:
        for block in structure.blocks:
            loci = sorted(to_structural[block.loci].tolist())
            if not _is_tree_node(loci, spec.k, spec.length):
                return False
    return True


def run_structure_correct(result: RunResult, spec: ProblemSpec) -> bool:
    return structure_correct([r.structure for r in result.epoch_trace] + [result.final_structure], spec)
