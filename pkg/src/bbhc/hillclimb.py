"""Hill-climbers: one pass over building-block space, and the bit-flip baseline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bbmodel import BBStructure, check_state, decode
from .hfuncs import Objective


@dataclass
class ClimbResult:
    final_state: np.ndarray
    final_genotype: np.ndarray
    score: float
    evals_used: int
    stopped_early: bool = False
    trajectory: list[float] = field(default_factory=list)  # score after each block

    def to_dict(self) -> dict:
        return {
            "final_state": [int(i) + 1 for i in self.final_state],
            "final_genotype": "".join(map(str, self.final_genotype.tolist())),
            "score": self.score,
            "evals_used": self.evals_used,
        }


def bb_hill_climb(
    structure: BBStructure,
    start,
    objective: Objective,
    rng: np.random.Generator,
    stop_at_optimum: bool = False,
) -> ClimbResult:
    """Climb every block once, in random order.

    Inside a block every configuration is tried once, in random order, and a
    change is undone only if it lowers the score. Other blocks are frozen while
    one block is climbed, so each candidate's score is independent of the
    order; we evaluate all candidates once and then replay the sequential
    accept rule over the cached scores. The incumbent costs an evaluation like
    any other candidate, so ``evals_used == sum(|V_i|)``.
    """
    state = check_state(structure, start).copy()
    bits = decode(structure, state)
    evals = 0
    current_score = 0.0
    trajectory: list[float] = []
    for b in rng.permutation(len(structure)):
        block = structure.blocks[b]
        order = rng.permutation(block.n_configs)
        scores = np.empty(block.n_configs)
        for c in order:
            bits[block.loci] = block.configs[c]
            scores[c] = objective(bits)
            evals += 1
            if stop_at_optimum and objective.solved:
                state[b] = c
                trajectory.append(float(scores[c]))
                return ClimbResult(state, bits.copy(), float(scores[c]), evals, True, trajectory)
        chosen = state[b]
        best = scores[chosen]
        for c in order:
            if scores[c] >= best:
                chosen, best = c, scores[c]
        state[b] = chosen
        bits[block.loci] = block.configs[chosen]
        current_score = best
        trajectory.append(float(best))
    return ClimbResult(state, bits, float(current_score), evals, trajectory=trajectory)


def bitflip_hill_climb(
    objective: Objective,
    start,
    rng: np.random.Generator,
    max_evals: int,
    stop_at_optimum: bool = False,
    patience: int | None = None,
) -> ClimbResult:
    """Random mutation hill-climber: flip one random bit, keep it unless worse.

    Runs until ``max_evals`` evaluations are spent. With ``patience`` set, it
    also stops after that many consecutive rejected flips, which is how the
    random-restart baseline detects a strict local optimum.
    """
    if max_evals < 1:
        raise ValueError("max_evals must be at least 1")
    bits = np.array(start, dtype=np.int8)
    if bits.size != objective.spec.length:
        raise ValueError("start length does not match the problem")
    current = objective(bits)
    evals = 1
    rejected = 0
    while evals < max_evals:
        if stop_at_optimum and objective.solved:
            break
        if patience is not None and rejected >= patience:
            break
        i = rng.integers(bits.size)
        bits[i] ^= 1
        value = objective(bits)
        evals += 1
        if value < current:
            bits[i] ^= 1
            rejected += 1
        else:
            current = value
            rejected = 0
    return ClimbResult(np.zeros(0, dtype=np.int64), bits, float(current), evals,
                       stopped_early=evals < max_evals)
