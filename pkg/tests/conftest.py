from fractions import Fraction as F
from itertools import product

import pytest

from repsel.generators import FamilySpec, generate, running_example
from repsel.matrix import CandidateSet


@pytest.fixture
def example():
    return running_example()


@pytest.fixture
def abce(example):
    return CandidateSet.parse(example, "A,B,C,E")


def fracs(*values):
    return tuple(F(v) for v in values)


def sparse_random(n, seed, support=3, cap=1000):
    return generate(FamilySpec("random", n, seed=seed, support=min(support, n), denominator_cap=cap))


# -- independent oracles ----------------------------------------------------
# Written against the plain row data so they share nothing with the library
# beyond the matrix container.


def oracle_project(rows, members, uniform=False):
    n = len(rows)
    out = []
    for i, row in enumerate(rows):
        if i in members:
            out.append([F(int(i == j)) for j in range(n)])
            continue
        mass = sum(row[j] for j in members)
        if mass:
            out.append([row[j] / mass if j in members else F(0) for j in range(n)])
        elif uniform:
            out.append([F(1, len(members)) if j in members else F(0) for j in range(n)])
        else:
            out.append([F(0)] * n)
    return out


def oracle_profiles(rows):
    """All (choices, probability) pairs by brute-force product."""
    n = len(rows)
    per_row = [[(j, p) for j, p in enumerate(r) if p] or [(None, F(1))] for r in rows]
    for combo in product(*per_row):
        prob = F(1)
        for _, p in combo:
            prob *= p
        yield tuple(c for c, _ in combo), prob


def oracle_fptp(rows, members, tie="lex", uniform=False):
    n = len(rows)
    projected = oracle_project(rows, set(members), uniform)
    out = [F(0)] * n
    for choices, prob in oracle_profiles(projected):
        counts = [sum(1 for c in choices if c == j) for j in range(n)]
        top = max(counts)
        if top == 0:
            continue
        tied = [j for j in range(n) if counts[j] == top]
        if tie == "lex":
            out[tied[0]] += prob
        else:
            for j in tied:
                out[j] += prob / len(tied)
    return tuple(out)


def oracle_liquid(rows):
    """Path-sum oracle: P(i's delegation walk ends at sink j).

    A walk from i visits distinct agents, each making an independent choice,
    so its probability is the product of the traversed entries times the
    sink's self-probability. Summing over simple paths gives the expected
    weight without enumerating joint profiles.
    """
    n = len(rows)
    weights = [F(0)] * n

    def walk(v, prob, seen):
        if rows[v][v]:
            weights[v] += prob * rows[v][v]
        for u, p in enumerate(rows[v]):
            if u != v and p and u not in seen:
                walk(u, prob * p, seen | {u})

    for i in range(n):
        walk(i, F(1), frozenset([i]))
    return tuple(weights)


def oracle_min_coalition(weights):
    from itertools import combinations

    total = sum(weights)
    for size in range(1, len(weights) + 1):
        if any(2 * sum(c) > total for c in combinations(weights, size)):
            return size
    raise ValueError("no majority")
