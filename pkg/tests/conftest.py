import itertools
import random

import pytest

from gradedvb import (
    Chart,
    WeightSystem,
    ZERO,
    basic_symbol,
    system_from_rows,
    weight,
)


def make_system(parities, rows):
    return system_from_rows(parities, rows)


def degree_system(n, parity=1):
    """Rank-1 system {0, a, 2a, .., na}."""
    return make_system([parity], [[k] for k in range(n + 1)])


def rank1_chart(n, dims, parity=1, trunc=3):
    ws = degree_system(n, parity)
    a = basic_symbol(1, parity)
    dmap = {ZERO: dims[0]}
    for k in range(1, n + 1):
        dmap[weight({a: k})] = dims[k]
    return Chart.from_dims(ws, dmap, trunc)


def random_nonneg_system(rng: random.Random, max_rank=2, max_mult=3):
    """A random valid non-negative system with bounded multiplicities."""
    rank = rng.randint(1, max_rank)
    parities = [rng.randint(0, 1) for _ in range(rank)]
    caps = [rng.randint(1, max_mult) for _ in range(rank)]
    pool = [row for row in itertools.product(*(range(c + 1) for c in caps))]
    rows = {(0,) * rank}
    for i in range(rank):
        unit = [0] * rank
        unit[i] = 1
        rows.add(tuple(unit))
    extras = [row for row in pool if row not in rows]
    rng.shuffle(extras)
    for row in extras[: rng.randint(0, min(4, len(extras)))]:
        rows.add(row)
    # make sure the caps are attained so multiplicities match intent
    for i in range(rank):
        top = [0] * rank
        top[i] = caps[i]
        if rng.random() < 0.8:
            rows.add(tuple(top))
    return make_system(parities, sorted(rows))


def random_chart(rng: random.Random, system: WeightSystem, max_dim=2, trunc=3,
                 base_dim=None):
    dims = {}
    for w in system.sorted_elements():
        dims[w] = rng.randint(1, max_dim) if w.is_zero else rng.randint(0, max_dim)
    if base_dim is not None:
        dims[ZERO] = base_dim
    if all(dims[w] == 0 for w in dims if not w.is_zero):
        unit = system.unit(system.basic_symbols[0])
        dims[unit] = 1
    return Chart.from_dims(system, dims, trunc)


@pytest.fixture
def rng():
    return random.Random(20240811)
