from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repsel.errors import InvalidSpec
from repsel.generators import FamilySpec, exact_rank, generate, matrix_stats, round_to_simplex, running_example
from repsel.matrix import identity


def test_running_example_family():
    gamma = generate(FamilySpec("example", 5))
    assert gamma == running_example()
    assert gamma.rows[3] == (0, 0, F(2, 5), F(1, 5), F(2, 5))
    with pytest.raises(InvalidSpec):
        FamilySpec("example", 4)


def test_identity_and_uniform():
    assert generate(FamilySpec("identity", 4)).rows == identity(4).rows
    assert set(x for r in generate(FamilySpec("uniform", 3)).rows for x in r) == {F(1, 3)}


def test_block_pure():
    gamma = generate(FamilySpec("block", 5, blocks=(2, 3), intra_mass=1))
    for i in range(5):
        for j in range(5):
            if (i < 2) != (j < 2):
                assert gamma[i, j] == 0
    assert gamma.rows[0] == (F(1, 2), F(1, 2), 0, 0, 0)
    assert matrix_stats(gamma).components == ((0, 1), (2, 3, 4))


def test_block_mixed():
    gamma = generate(FamilySpec("block", 5, blocks=(2, 3), intra_mass=F(9, 10)))
    assert gamma.rows[0] == (F(9, 20), F(9, 20), F(1, 30), F(1, 30), F(1, 30))
    assert gamma.rows[4] == (F(1, 20), F(1, 20), F(3, 10), F(3, 10), F(3, 10))


def test_block_validation():
    with pytest.raises(InvalidSpec):
        FamilySpec("block", 5, blocks=(2, 2))
    with pytest.raises(InvalidSpec):
        FamilySpec("block", 5, blocks=(5,), intra_mass=F(3, 2))


def test_power_seeking():
    gamma = generate(FamilySpec("power", 4, trace_mass=1))
    assert gamma.rows == identity(4).rows
    assert matrix_stats(gamma).trace == 4
    half = generate(FamilySpec("power", 3, trace_mass=F(1, 2)))
    assert half.rows[0] == (F(1, 2), F(1, 4), F(1, 4))
    assert matrix_stats(half).trace == F(3, 2)


def test_stats_example():
    stats = matrix_stats(running_example())
    assert stats.trace == F(16, 5)
    assert stats.rank == 5
    assert stats.components == ((0, 1, 2, 3, 4),)


def test_stats_identity():
    stats = matrix_stats(identity(5))
    assert (stats.trace, stats.rank) == (5, 5)
    assert stats.components == tuple((i,) for i in range(5))


def test_exact_rank():
    assert exact_rank([[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]]) == 1
    assert exact_rank([[1, 0, 0], [0, 1, 0], [F(1, 3), F(2, 3), 0]]) == 2


def test_round_to_simplex():
    out = round_to_simplex([1 / 3, 1 / 3, 1 / 3], 10)
    assert sum(out) == 1
    assert sorted(out) == [F(3, 10), F(3, 10), F(4, 10)]


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**64 - 1), support=st.integers(1, 8), conc=st.sampled_from(["1/10", "1", "10"]))
def test_random_reproducible_and_stochastic(n, seed, support, conc):
    support = min(support, n)
    spec = FamilySpec("random", n, seed=seed, support=support, concentration=conc)
    a, b = generate(spec), generate(spec)
    assert a == b
    for row in a.rows:
        assert sum(row) == 1
        assert sum(1 for x in row if x) <= support
        assert all(x.denominator <= 10**6 for x in row)


def test_concentration_controls_spread():
    flat = generate(FamilySpec("random", 30, seed=1, concentration=1000))
    peaked = generate(FamilySpec("random", 30, seed=1, concentration=F(1, 100)))
    assert max(max(r) for r in flat.rows) < max(max(r) for r in peaked.rows)
