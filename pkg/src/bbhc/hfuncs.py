"""Hierarchical test functions: hIFF, hXOR and hTrap.

All three are defined over bit strings of length ``k**p``. Each level of the
balanced k-ary tree interprets its blocks as a symbol (0, 1 or null) and
rewards the valid ones. Shuffled variants read structural position ``i`` from
genotype position ``shuffle[i]``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit

NULL = -1


class InvalidInput(ValueError):
    pass


class Kind(str, enum.Enum):
    HIFF = "hiff"
    HXOR = "hxor"
    HTRAP = "htrap"

    @property
    def k(self) -> int:
        return 3 if self is Kind.HTRAP else 2


class LevelWeight(str, enum.Enum):
    BLOCK_SIZE = "block_size"
    UNIFORM = "uniform"


def _levels(length: int, k: int) -> int:
    p, n = 0, 1
    while n < length:
        n *= k
        p += 1
    if n != length:
        raise InvalidInput(f"length {length} is not a power of {k}")
    return p


def _as_bits(bits) -> np.ndarray:
    if isinstance(bits, str):
        arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(bits, dtype=np.int8)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput("genotype must be a non-empty 1-d bit sequence")
    if arr.min() < 0 or arr.max() > 1:
        raise InvalidInput("genotype must contain only 0 and 1")
    return arr.astype(np.int8, copy=False)


@njit(cache=True)
def _pairwise_kernel(bits, complement):
    # Valid blocks collapse to a single symbol; NULL poisons every ancestor.
    sym = bits.copy()
    n = sym.size
    total = n
    size = 1
    while n > 1:
        size *= 2
        n //= 2
        count = 0
        for i in range(n):
            left = sym[2 * i]
            right = sym[2 * i + 1]
            if complement:
                ok = left >= 0 and right >= 0 and left != right
            else:
                ok = left >= 0 and left == right
            if ok:
                count += 1
                sym[i] = left
            else:
                sym[i] = NULL
        total += count * size
    return total


def _pairwise(bits: np.ndarray, complement: bool) -> int:
    _levels(bits.size, 2)
    return int(_pairwise_kernel(bits, complement))


def eval_hiff(bits) -> int:
    """Hierarchical if-and-only-if. A single bit scores 1."""
    return _pairwise(_as_bits(bits), complement=False)


def eval_hxor(bits) -> int:
    """Hierarchical XOR: a block is valid when its halves are valid complements."""
    return _pairwise(_as_bits(bits), complement=True)


def trap(u: int, k: int, f_high: float, f_low: float) -> float:
    if u == k:
        return f_high
    return f_low * (k - 1 - u) / (k - 1)


@njit(cache=True)
def _trap_kernel(bits, k, f_high_top, f_low_top, block_weight):
    sym = bits.copy()
    n = sym.size
    total = 0.0
    size = 1
    while n > 1:
        size *= k
        n //= k
        top = n == 1
        f_high = f_high_top if top else 1.0
        f_low = f_low_top if top else 1.0
        level_sum = 0.0
        for i in range(n):
            u = 0
            defined = True
            for j in range(k):
                s = sym[k * i + j]
                if s < 0:
                    defined = False
                u += s
            if defined:
                if u == k:
                    level_sum += f_high
                else:
                    level_sum += f_low * (k - 1 - u) / (k - 1)
                sym[i] = sym[k * i] if (u == 0 or u == k) else NULL
            else:
                sym[i] = NULL
        total += level_sum * (size if block_weight else 1)
    return total


def eval_htrap(bits, spec: "ProblemSpec | None" = None) -> float:
    """Hierarchical trap of order 3.

    Every level above the bits applies a unitation trap to the three child
    symbols; a null child zeroes the block. Only the root level is deceptive
    (``f_low`` < ``f_high``).
    """
    arr = _as_bits(bits)
    if spec is not None and spec.kind is not Kind.HTRAP:
        raise InvalidInput("eval_htrap needs an htrap spec")
    return _htrap(arr, spec)


def _htrap(arr: np.ndarray, spec: "ProblemSpec | None") -> float:
    _levels(arr.size, 3)
    if spec is None:
        return float(_trap_kernel(arr, 3, 1.0, 0.9, True))
    return float(_trap_kernel(
        arr, 3, spec.f_high, spec.f_low, spec.level_weight is LevelWeight.BLOCK_SIZE
    ))


def make_shuffle(length: int, seed) -> np.ndarray:
    if length < 1:
        raise InvalidInput("length must be positive")
    return np.random.default_rng(seed).permutation(length)


@dataclass(frozen=True)
class ProblemSpec:
    kind: Kind
    p: int
    shuffle_seed: int | None = None
    level_weight: LevelWeight = LevelWeight.BLOCK_SIZE
    f_high: float = 1.0
    f_low: float = 0.9
    shuffle: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "level_weight", LevelWeight(self.level_weight))
        if self.p < 0:
            raise InvalidInput("p must be non-negative")
        if self.shuffle_seed is not None:
            perm = make_shuffle(self.length, self.shuffle_seed)
            perm.setflags(write=False)
            object.__setattr__(self, "shuffle", perm)

    @classmethod
    def for_length(cls, kind, length: int, **kwargs) -> "ProblemSpec":
        kind = Kind(kind)
        return cls(kind, _levels(length, kind.k), **kwargs)

    @property
    def k(self) -> int:
        return self.kind.k

    @property
    def length(self) -> int:
        return self.k ** self.p

    def unshuffle(self, bits: np.ndarray) -> np.ndarray:
        """Map a genotype to structural order."""
        return bits if self.shuffle is None else bits[self.shuffle]

    def structural_locus(self, locus: int) -> int:
        """Structural position read from genotype position ``locus``."""
        if self.shuffle is None:
            return int(locus)
        return int(self.inverse_shuffle[locus])

    @property
    def inverse_shuffle(self) -> np.ndarray:
        inv = np.empty_like(self.shuffle)
        inv[self.shuffle] = np.arange(self.length)
        return inv

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "p": self.p,
            "shuffle_seed": self.shuffle_seed,
            "level_weight": self.level_weight.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        return cls(
            Kind(data["kind"]),
            int(data["p"]),
            data.get("shuffle_seed"),
            LevelWeight(data.get("level_weight", "block_size")),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ProblemSpec":
        return cls.from_dict(json.loads(text))


def score(spec: ProblemSpec, bits) -> float:
    """Uncounted objective value of a genotype (in genotype coordinates)."""
    return _score_checked(spec, _as_bits(bits))


def _score_checked(spec: ProblemSpec, arr: np.ndarray) -> float:
    if arr.size != spec.length:
        raise InvalidInput(f"genotype length {arr.size} != problem length {spec.length}")
    structural = spec.unshuffle(arr)
    if spec.kind is Kind.HIFF:
        return int(_pairwise_kernel(structural, False))
    if spec.kind is Kind.HXOR:
        return int(_pairwise_kernel(structural, True))
    return float(_trap_kernel(
        structural, 3, spec.f_high, spec.f_low, spec.level_weight is LevelWeight.BLOCK_SIZE
    ))


def global_optimum_value(spec: ProblemSpec) -> float:
    if spec.kind is Kind.HTRAP:
        return eval_htrap(np.ones(spec.length, dtype=np.int8), spec)
    return spec.length * (spec.p + 1)


def optimum_id(spec: ProblemSpec, bits) -> int:
    """Which of the two global optima ``bits`` is, by its first structural bit.

    hTrap has a single optimum, reported as 1.
    """
    return int(spec.unshuffle(_as_bits(bits))[0])


class Objective:
    """Per-run evaluation counter around a problem.

    Tracks the best genotype seen and the evaluation index at which the
    global optimum was first produced.
    """

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        self.optimum = global_optimum_value(spec)
        self.evaluations = 0
        self.best_score = -np.inf
        self.best_genotype: np.ndarray | None = None
        self.solved_at: int | None = None

    def __call__(self, bits) -> float:
        return self.evaluate(bits)

    def evaluate(self, bits) -> float:
        # Hot path: the climbers hand over int8 arrays they built themselves.
        if isinstance(bits, np.ndarray) and bits.dtype == np.int8:
            value = _score_checked(self.spec, bits)
        else:
            value = score(self.spec, bits)
        self.evaluations += 1
        if value > self.best_score:
            self.best_score = value
            self.best_genotype = np.array(bits, dtype=np.int8)
        if self.solved_at is None and value >= self.optimum:
            self.solved_at = self.evaluations
        return value

    @property
    def solved(self) -> bool:
        return self.solved_at is not None
