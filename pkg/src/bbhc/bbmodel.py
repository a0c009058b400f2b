"""Building-block representation of search states.

A structure partitions the loci ``[0, l)`` into blocks. Each block carries an
explicit list of admissible bit patterns; a state picks one pattern per block
by index. Indices are 0-based in memory and 1-based in exported traces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class InvalidState(ValueError):
    pass


def _bits_to_str(row) -> str:
    return "".join("1" if b else "0" for b in row)


@dataclass(frozen=True, eq=False)
class BuildingBlock:
    loci: np.ndarray  # sorted ascending, int64
    configs: np.ndarray  # (n_configs, len(loci)) int8, rows distinct

    def __post_init__(self):
        loci = np.asarray(self.loci, dtype=np.int64)
        configs = np.asarray(self.configs, dtype=np.int8)
        if configs.ndim == 1:
            configs = configs.reshape(-1, loci.size)
        if loci.ndim != 1 or loci.size == 0:
            raise InvalidState("a block needs at least one locus")
        if np.unique(loci).size != loci.size:
            raise InvalidState("block loci must be distinct")
        if configs.shape[0] < 1 or configs.shape[1] != loci.size:
            raise InvalidState("configs must be non-empty and match the loci count")
        if np.unique(configs, axis=0).shape[0] != configs.shape[0]:
            raise InvalidState("block configs must be distinct")
        order = np.argsort(loci, kind="stable")
        loci, configs = loci[order], configs[:, order]
        loci.setflags(write=False)
        configs.setflags(write=False)
        object.__setattr__(self, "loci", loci)
        object.__setattr__(self, "configs", configs)

    @classmethod
    def from_strings(cls, loci: Sequence[int], configs: Sequence[str]) -> "BuildingBlock":
        """Build from bit strings whose characters follow ``loci`` in the given order."""
        rows = np.array([[int(c) for c in cfg] for cfg in configs], dtype=np.int8)
        return cls(np.asarray(loci), rows.reshape(len(configs), len(loci)))

    @property
    def size(self) -> int:
        return int(self.loci.size)

    @property
    def n_configs(self) -> int:
        return int(self.configs.shape[0])

    def config_strings(self) -> list[str]:
        return [_bits_to_str(row) for row in self.configs]

    def __eq__(self, other):
        if not isinstance(other, BuildingBlock):
            return NotImplemented
        return np.array_equal(self.loci, other.loci) and np.array_equal(self.configs, other.configs)

    def __hash__(self):
        return hash((self.loci.tobytes(), self.configs.tobytes()))

    def to_dict(self, loci_map=None) -> dict:
        loci = [int(x) for x in self.loci]
        configs = self.config_strings()
        if loci_map is not None:
            mapped = [loci_map(x) for x in loci]
            order = np.argsort(mapped, kind="stable")
            loci = [mapped[i] for i in order]
            configs = ["".join(c[i] for i in order) for c in configs]
        return {"loci": loci, "configs": configs}


@dataclass(frozen=True, eq=False)
class BBStructure:
    blocks: tuple[BuildingBlock, ...]
    total_length: int

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        validate_partition(self.blocks, self.total_length)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i) -> BuildingBlock:
        return self.blocks[i]

    def __eq__(self, other):
        if not isinstance(other, BBStructure):
            return NotImplemented
        return self.total_length == other.total_length and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.total_length, self.blocks))

    @property
    def config_counts(self) -> np.ndarray:
        return np.array([b.n_configs for b in self.blocks], dtype=np.int64)

    def to_json(self, loci_map=None) -> list[dict]:
        """JSON-ready block list; ``loci_map`` rewrites loci (e.g. to unshuffled coordinates)."""
        return [b.to_dict(loci_map) for b in self.blocks]

    @classmethod
    def from_json(cls, data: list[dict], total_length: int | None = None) -> "BBStructure":
        blocks = [BuildingBlock.from_strings(d["loci"], d["configs"]) for d in data]
        if total_length is None:
            total_length = sum(b.size for b in blocks)
        return cls(tuple(blocks), total_length)


def validate_partition(blocks: Sequence[BuildingBlock], total_length: int) -> None:
    if total_length < 1:
        raise InvalidState("structure length must be positive")
    seen = np.zeros(total_length, dtype=np.int64)
    for block in blocks:
        if block.loci.min() < 0 or block.loci.max() >= total_length:
            raise InvalidState(f"locus out of range [0, {total_length})")
        seen[block.loci] += 1
    if not np.all(seen == 1):
        raise InvalidState("block loci do not partition the genotype")


def initial_structure(length: int) -> BBStructure:
    """One block per locus, each able to hold 0 or 1."""
    if length < 1:
        raise InvalidState("length must be positive")
    both = np.array([[0], [1]], dtype=np.int8)
    return BBStructure(tuple(BuildingBlock(np.array([i]), both) for i in range(length)), length)


def check_state(structure: BBStructure, state) -> np.ndarray:
    state = np.asarray(state, dtype=np.int64)
    if state.shape != (len(structure),):
        raise InvalidState(f"state has {state.size} entries, structure has {len(structure)} blocks")
    counts = structure.config_counts
    if np.any(state < 0) or np.any(state >= counts):
        raise InvalidState("config index out of range")
    return state


def decode(structure: BBStructure, state) -> np.ndarray:
    state = check_state(structure, state)
    bits = np.empty(structure.total_length, dtype=np.int8)
    for block, idx in zip(structure.blocks, state):
        bits[block.loci] = block.configs[idx]
    return bits


def encode(structure: BBStructure, bits) -> np.ndarray:
    """Inverse of :func:`decode` for genotypes the structure can express."""
    bits = np.asarray(bits, dtype=np.int8)
    state = np.empty(len(structure), dtype=np.int64)
    for i, block in enumerate(structure.blocks):
        hits = np.flatnonzero((block.configs == bits[block.loci]).all(axis=1))
        if hits.size == 0:
            raise InvalidState(f"block {i} cannot express the genotype")
        state[i] = hits[0]
    return state


def random_state(structure: BBStructure, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, structure.config_counts)


def neighborhood_size(structure: BBStructure) -> int:
    total = 1
    for block in structure.blocks:
        total *= block.n_configs
    return total


def to_one_based(state) -> list[int]:
    return [int(i) + 1 for i in state]


def from_one_based(state) -> np.ndarray:
    return np.asarray(state, dtype=np.int64) - 1
