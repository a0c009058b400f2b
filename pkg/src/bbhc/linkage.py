"""Linkage detection from a memory of local optima, and structure rebuilding.

Two blocks are linked when the memory entries they split into groups are the
same: whenever one block repeats a configuration across two entries, so does
the other, and vice versa. That is a one-to-one map between the observed
configurations of the two blocks. Equal partitions form an equivalence
relation, so clusters fall out of a single grouping pass and the order in
which blocks are visited does not matter.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bbmodel import BBStructure, BuildingBlock, InvalidState, check_state, decode


@dataclass
class MemoryBuffer:
    structure: BBStructure
    capacity: int
    states: list = field(default_factory=list)
    genotypes: list = field(default_factory=list)
    scores: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def full(self) -> bool:
        return len(self.states) >= self.capacity

    def add(self, state, genotype, score) -> None:
        if self.full:
            raise InvalidState("memory is full")
        self.states.append(check_state(self.structure, state).copy())
        self.genotypes.append(np.array(genotype, dtype=np.int8))
        self.scores.append(score)

    def distinct_genotypes(self) -> int:
        return len({g.tobytes() for g in self.genotypes})

    def state_matrix(self) -> np.ndarray:
        """(entries, blocks) matrix of config indices."""
        if not self.states:
            raise InvalidState("memory is empty")
        return np.vstack(self.states)

    def genotype_matrix(self) -> np.ndarray:
        if not self.genotypes:
            raise InvalidState("memory is empty")
        return np.vstack(self.genotypes)

    @classmethod
    def from_states(cls, structure: BBStructure, states, genotypes=None) -> "MemoryBuffer":
        """Memory filled with the given states; genotypes are decoded when omitted."""
        states = [np.asarray(s, dtype=np.int64) for s in states]
        memory = cls(structure, max(len(states), 1))
        for i, s in enumerate(states):
            g = decode(structure, s) if genotypes is None else genotypes[i]
            memory.add(s, g, None)
        return memory


def partition_signature(column) -> tuple:
    """Canonical label of the partition a column of values induces on entries."""
    labels: dict = {}
    return tuple(labels.setdefault(v, len(labels)) for v in column.tolist())


def linked(i: int, j: int, memory: MemoryBuffer) -> bool:
    m = memory.state_matrix()
    if i == j:
        return True
    return partition_signature(m[:, i]) == partition_signature(m[:, j])


def detect_clusters(structure: BBStructure, memory: MemoryBuffer) -> list[list[int]]:
    """Equivalence classes of ``linked``, ordered by their smallest block index."""
    m = memory.state_matrix()
    if m.shape[1] != len(structure):
        raise InvalidState("memory was filled under a different structure")
    groups: dict[tuple, list[int]] = {}
    for b in range(m.shape[1]):
        groups.setdefault(partition_signature(m[:, b]), []).append(b)
    return sorted(groups.values(), key=lambda c: c[0])


def _observed_rows(rows: np.ndarray) -> np.ndarray:
    """Distinct rows in order of first appearance."""
    _, first = np.unique(rows, axis=0, return_index=True)
    return rows[np.sort(first)]


def rebuild_structure(
    structure: BBStructure, clusters, memory: MemoryBuffer
) -> BBStructure:
    """Merge each multi-block cluster and restrict every block to observed configs.

    Unmerged blocks keep their position and their surviving configs keep
    their relative order; merged blocks are appended in cluster order with
    configs in order of first appearance in memory.
    """
    n = len(structure)
    seen = sorted(b for c in clusters for b in c)
    if any(b < 0 or b >= n for b in seen):
        raise ValueError("cluster references an unknown block")
    if seen != list(range(n)):
        raise ValueError("clusters must partition the block indices")

    genotypes = memory.genotype_matrix()
    states = memory.state_matrix()
    kept: list[BuildingBlock] = []
    merged: list[BuildingBlock] = []
    for cluster in clusters:
        if len(cluster) == 1:
            b = cluster[0]
            block = structure.blocks[b]
            observed = np.isin(np.arange(block.n_configs), states[:, b])
            kept.append(BuildingBlock(block.loci, block.configs[observed]))
        else:
            loci = np.sort(np.concatenate([structure.blocks[b].loci for b in cluster]))
            merged.append(BuildingBlock(loci, _observed_rows(genotypes[:, loci])))
    return BBStructure(tuple(kept + merged), structure.total_length)
