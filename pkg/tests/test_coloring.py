import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from pauliest.coloring import (build_graph, fractional_coloring, max_weight_independent_set,
                               maximal_independent_sets, schedule, xyz_coloring)
from pauliest.pauli import PauliSet

from . import oracles


def lp_oracle(labels: list[str]) -> float:
    """Fractional chromatic number from every commuting subset (brute force)."""
    V = len(labels)
    comm = [[oracles.commute(a, b) for b in labels] for a in labels]
    sets = []
    for r in range(1, V + 1):
        for combo in itertools.combinations(range(V), r):
            if all(comm[i][j] for i, j in itertools.combinations(combo, 2)):
                sets.append(combo)
    a = np.zeros((V, len(sets)))
    for j, s in enumerate(sets):
        a[list(s), j] = 1
    res = linprog(np.ones(len(sets)), A_ub=-a, b_ub=-np.ones(V), bounds=(0, None), method="highs")
    return res.fun


FAMILIES = [["XI", "IX", "XX"], ["ZI", "IZ", "ZZ"], ["YY", "XZ", "ZX"]]


def test_triangle_is_exactly_three():
    col = fractional_coloring(build_graph(PauliSet.from_labels("XYZ")))
    assert col.exact and col.value == 3
    assert col.dual == [1, 1, 1] and col.dual_bound == 3
    assert col.dual_distribution() == pytest.approx([1 / 3] * 3)


@pytest.mark.parametrize("m", [2, 3])
def test_union_of_disjoint_families(m):
    labels = [p for fam in FAMILIES[:m] for p in fam]
    col = fractional_coloring(build_graph(PauliSet.from_labels(labels)))
    assert col.value == m
    assert col.gap == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_xyz_coloring_weight_and_coverage(n):
    col = xyz_coloring(n)
    assert col.value == 2 * Fraction(3, 2) ** n
    assert all(c == 1 for c in col.coverage())


@pytest.mark.parametrize("n,expected", [(1, Fraction(3)), (2, Fraction(3)), (3, Fraction(27, 4))])
def test_xyz_lp_optimum(n, expected):
    labels = ["".join(t) for t in itertools.product("XYZ", repeat=n)]
    col = fractional_coloring(build_graph(PauliSet.from_labels(labels)), exact=True)
    assert col.value == expected and col.dual_bound == expected
    assert col.value <= xyz_coloring(n).value


def test_all_nontrivial_two_qubit_strings():
    labels = oracles.labels(2)[1:]
    assert lp_oracle(labels) == pytest.approx(5)
    col = fractional_coloring(build_graph(PauliSet.from_labels(labels)))
    assert col.value == 5


def test_column_generation_agrees_with_enumeration():
    labels = oracles.labels(2)[1:]
    g = build_graph(PauliSet.from_labels(labels))
    a = fractional_coloring(g, method="enumerate", exact=False)
    b = fractional_coloring(g, method="colgen", exact=False)
    assert a.value == pytest.approx(b.value, abs=1e-9)
    assert abs(b.gap) <= 1e-8


def test_mwis_small():
    g = build_graph(PauliSet.from_labels(["X", "Y", "Z"]))
    assert max_weight_independent_set(g, [1, 2, 3])[0] == 3
    assert len(maximal_independent_sets(g)) == 3


def test_schedule_covers_and_normalizes():
    col = fractional_coloring(build_graph(PauliSet.from_labels("XYZ")))
    plan = schedule(col)
    assert len(plan.entries) == 3
    assert plan.frequencies() == pytest.approx([1 / 3] * 3)
    assert plan.total_weight == pytest.approx(3)
    for e in plan.entries:
        assert e.family.is_maximal and all(p in e.family for p in e.members)


def test_to_json_fields():
    out = fractional_coloring(build_graph(PauliSet.from_labels(["XX", "ZZ", "XZ"]))).to_json()
    assert set(out) >= {"zeta_f", "sets", "weights", "dual_pi", "duality_gap"}


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.sets(st.sampled_from(oracles.labels(2)[1:]), min_size=1, max_size=9))
def test_lp_value_matches_brute_force(chosen):
    labels = sorted(chosen)
    col = fractional_coloring(build_graph(PauliSet.from_labels(labels)))
    assert float(col.value) == pytest.approx(lp_oracle(labels), abs=1e-7)
    assert abs(col.gap) <= 1e-8
    col.check()
