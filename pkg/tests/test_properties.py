"""Randomised invariants over small instances (length <= 32)."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from bbhc.bbmodel import decode, encode, initial_structure, random_state
from bbhc.driver import RunConfig, run_bbhc
from bbhc.hfuncs import Objective, ProblemSpec, global_optimum_value, score
from bbhc.hillclimb import bb_hill_climb
from bbhc.linkage import MemoryBuffer, detect_clusters, linked, rebuild_structure
from oracles import H_iff, H_xor

MANY = settings(max_examples=1000, deadline=None)

pairwise_kind = st.sampled_from(["hiff", "hxor"])
any_instance = st.one_of(
    st.tuples(pairwise_kind, st.sampled_from([1, 2, 4, 8, 16, 32])),
    st.tuples(st.just("htrap"), st.sampled_from([3, 9, 27])),
)


@st.composite
def bits_for(draw, kind_lengths=any_instance):
    kind, n = draw(kind_lengths)
    bits = np.array(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.int8)
    return kind, n, bits


@MANY
@given(bits_for(st.tuples(pairwise_kind, st.sampled_from([1, 2, 4, 8, 16, 32]))))
def test_pairwise_complement_symmetry(case):
    kind, n, bits = case
    spec = ProblemSpec.for_length(kind, n)
    assert score(spec, bits) == score(spec, 1 - bits)


@MANY
@given(bits_for(st.tuples(pairwise_kind, st.sampled_from([1, 2, 4, 8, 16]))))
def test_pairwise_matches_oracle(case):
    kind, n, bits = case
    text = "".join(map(str, bits.tolist()))
    oracle = H_iff if kind == "hiff" else H_xor
    assert score(ProblemSpec.for_length(kind, n), bits) == oracle(text)


@MANY
@given(bits_for(), st.integers(0, 2**32 - 1))
def test_shuffle_invariance(case, seed):
    kind, n, bits = case
    plain = ProblemSpec.for_length(kind, n)
    shuffled = ProblemSpec.for_length(kind, n, shuffle_seed=seed)
    # The shuffled problem reads structural bit i from genotype locus sigma(i).
    genotype = np.empty_like(bits)
    genotype[shuffled.shuffle] = bits
    assert score(shuffled, genotype) == score(plain, bits)
    assert 0 <= score(plain, bits) <= global_optimum_value(plain)


@st.composite
def random_structure(draw, max_len=32):
    """A structure reached by random merges of the initial singletons."""
    n = draw(st.integers(1, max_len))
    structure = initial_structure(n)
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    for _ in range(draw(st.integers(0, 3))):
        nb = len(structure)
        labels = draw(st.lists(st.integers(0, max(nb // 2, 1)), min_size=nb, max_size=nb))
        clusters: dict[int, list[int]] = {}
        for b, lab in enumerate(labels):
            clusters.setdefault(lab, []).append(b)
        entries = draw(st.integers(1, 6))
        memory = MemoryBuffer.from_states(
            structure, [random_state(structure, rng) for _ in range(entries)])
        structure = rebuild_structure(structure, list(clusters.values()), memory)
    return structure, rng


def _assert_partition(structure):
    loci = np.concatenate([b.loci for b in structure.blocks])
    assert sorted(loci.tolist()) == list(range(structure.total_length))
    for b in structure.blocks:
        assert b.n_configs >= 1
        assert b.configs.shape == (b.n_configs, b.size)
        assert len({row.tobytes() for row in b.configs}) == b.n_configs


@MANY
@given(random_structure())
def test_partition_invariants_after_rebuilds(case):
    structure, rng = case
    _assert_partition(structure)
    state = random_state(structure, rng)
    assert np.array_equal(encode(structure, decode(structure, state)), state)


@MANY
@given(random_structure(), st.integers(1, 8))
def test_linkage_is_an_equivalence(case, entries):
    structure, rng = case
    memory = MemoryBuffer.from_states(
        structure, [random_state(structure, rng) for _ in range(entries)])
    nb = len(structure)
    idx = rng.integers(0, nb, 3)
    i, j, k = (int(v) for v in idx)
    assert linked(i, i, memory)
    assert linked(i, j, memory) == linked(j, i, memory)
    if linked(i, j, memory) and linked(j, k, memory):
        assert linked(i, k, memory)
    clusters = detect_clusters(structure, memory)
    assert sorted(b for c in clusters for b in c) == list(range(nb))
    for c in clusters:
        assert all(linked(c[0], b, memory) for b in c)


@MANY
@given(random_structure(), st.integers(1, 8))
def test_rebuild_keeps_loci_and_expresses_memory(case, entries):
    structure, rng = case
    memory = MemoryBuffer.from_states(
        structure, [random_state(structure, rng) for _ in range(entries)])
    clusters = detect_clusters(structure, memory)
    rebuilt = rebuild_structure(structure, clusters, memory)
    _assert_partition(rebuilt)
    assert len(rebuilt) == len(clusters)
    for g in memory.genotypes:
        # Every stored genotype must stay reachable in the new structure.
        assert np.array_equal(decode(rebuilt, encode(rebuilt, g)), g)


@MANY
@given(random_structure(max_len=16), st.sampled_from(["hiff", "hxor"]))
def test_climb_trajectory_is_monotone(case, kind):
    structure, rng = case
    n = structure.total_length
    if n & (n - 1):
        return
    spec = ProblemSpec.for_length(kind, n)
    start = random_state(structure, rng)
    first = score(spec, decode(structure, start))
    result = bb_hill_climb(structure, start, Objective(spec), rng)
    traj = result.trajectory
    assert traj[0] >= first
    assert all(a <= b for a, b in zip(traj, traj[1:]))
    assert result.score == score(spec, result.final_genotype)
    assert result.evals_used == int(structure.config_counts.sum())


@MANY
@given(st.sampled_from([("hiff", 16), ("hxor", 32), ("htrap", 27)]),
       st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_runs_are_deterministic(case, seed, shuffle_seed):
    kind, n = case
    spec = ProblemSpec.for_length(kind, n, shuffle_seed=shuffle_seed)
    cfg = RunConfig.for_problem(spec, rng_seed=seed, max_evals=20_000)
    a, b = run_bbhc(spec, cfg), run_bbhc(spec, cfg)
    assert a.summary() == b.summary()
    assert a.final_structure == b.final_structure
