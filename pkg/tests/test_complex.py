import itertools
from collections import Counter

import pytest

from khovanov_zc.complex import (
    FROBENIUS,
    MAX_CROSSINGS_ENV,
    ONE,
    X,
    EnhancedState,
    GradingError,
    SizeGuardError,
    build_complex,
    dump_complex,
    gradings,
    incident_states,
)
from khovanov_zc.diagram import FIXTURE_NAMES, NEGATIVE, POSITIVE, from_braid, load_fixture, resolve, unlink
from oracles import count_loops_brute


def test_gradings_unknot():
    u = unlink(1)
    assert gradings(u, EnhancedState((), (ONE,))) == (0, 1)
    assert gradings(u, EnhancedState((), (X,))) == (0, -1)
    assert gradings(u, EnhancedState((), (X,), c_exp=1)) == (0, 1)


def test_gradings_reject_bad_marking():
    with pytest.raises(GradingError):
        gradings(load_fixture("hopf_pos"), EnhancedState((POSITIVE,), (ONE,)))


def markings(d):
    return itertools.product((POSITIVE, NEGATIVE), repeat=d.n_crossings)


def test_split_of_one_has_three_incident_states():
    d = load_fixture("unknot1")
    m = next(m for m in markings(d) if POSITIVE in m and len(resolve(d, m)) == 1)
    out = incident_states(d, EnhancedState(m, (ONE,)))
    assert len(out) == 3
    assert sorted(coeff for _, coeff in out) == [1, 1, 2]
    assert sorted(t.labels for t, _ in out) == [(ONE, X), (X, ONE), (X, X)]


def test_all_negative_state_has_no_incident_states():
    d = load_fixture("trefoil_left")
    m = (NEGATIVE,) * 3
    assert incident_states(d, EnhancedState(m, (ONE,) * len(resolve(d, m)))) == []


def test_merge_of_x_x_vanishes():
    d = load_fixture("hopf_pos")
    m = (POSITIVE, POSITIVE)
    assert len(resolve(d, m)) == 2
    assert incident_states(d, EnhancedState(m, (X, X))) == []
    assert len(incident_states(d, EnhancedState(m, (ONE, X)))) == 2


def test_unknot_complex():
    cx = build_complex(unlink(1))
    assert cx.generators == {(0, -1): [EnhancedState((), (X,))], (0, 1): [EnhancedState((), (ONE,))]}
    assert cx.is_zero_differential()


def test_unlink_complex():
    cx = build_complex(unlink(2))
    assert sorted(cx.jdeg[0], reverse=True) == [2, 0, 0, -2]
    assert cx.degrees == [0]
    assert cx.is_zero_differential()


def chain_ranks_by_enumeration(d):
    """Generator counts per (i, j) from loop counts alone."""
    w = d.writhe()
    out = Counter()
    for m in itertools.product((1, -1), repeat=d.n_crossings):
        loops = count_loops_brute(d, {cid: x == 1 for cid, x in zip(d.crossing_ids, m)})
        sigma = sum(m)
        for n_x in range(loops + 1):
            tau = n_x - (loops - n_x)
            ways = len(list(itertools.combinations(range(loops), n_x)))
            out[((w - sigma) // 2, (3 * w - sigma - 2 * tau) // 2)] += ways
    return dict(out)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_chain_ranks_match_enumeration(name):
    d = load_fixture(name)
    cx = build_complex(d)
    got = {k: len(v) for k, v in cx.generators.items()}
    assert got == chain_ranks_by_enumeration(d)


def test_hopf_chain_ranks():
    cx = build_complex(load_fixture("hopf_pos"))
    got = {k: len(v) for k, v in cx.generators.items()}
    # w = 2; ++ has 2 circles, the mixed markings 1 each, -- has 2
    assert got == {(0, 0): 1, (0, 2): 2, (0, 4): 1, (1, 2): 2, (1, 4): 2, (2, 2): 1, (2, 4): 2, (2, 6): 1}


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_differential_properties(name):
    cx = build_complex(load_fixture(name))
    assert cx.check_d_squared() == []
    assert cx.homogeneity_violations() == []
    assert cx.entry_alphabet_ok()


def test_generator_order_is_deterministic():
    d = load_fixture("trefoil_right")
    assert dump_complex(build_complex(d)) == dump_complex(build_complex(d))


def test_dump_format():
    data = dump_complex(build_complex(load_fixture("hopf_pos")))
    first = data["degrees"][0]
    assert {"i", "generators", "d"} <= set(first)
    assert {"marking", "labels", "j"} <= set(first["generators"][0])


def test_size_guard(monkeypatch):
    d = from_braid([1] * 13, 2)
    with pytest.raises(SizeGuardError):
        build_complex(d)
    with pytest.raises(SizeGuardError):
        build_complex(load_fixture("trefoil_left"), max_crossings_bound=2)
    monkeypatch.setenv(MAX_CROSSINGS_ENV, "2")
    with pytest.raises(SizeGuardError):
        build_complex(load_fixture("trefoil_left"))
    monkeypatch.setenv(MAX_CROSSINGS_ENV, "many")
    with pytest.raises(SizeGuardError):
        build_complex(load_fixture("trefoil_left"))


# ---------------------------------------------------------------------------
# forcing: which table cells are pinned by d^2 = 0 and homogeneity

TERMS1 = [(lab, c) for lab in (ONE, X) for c in (1, 2)]
TERMS2 = [((a, b), c) for a in (ONE, X) for b in (ONE, X) for c in (1, 2)]


def single_cell_perturbations():
    for key, cur in FROBENIUS.merge.items():
        for k in range(3):
            for combo in itertools.combinations(TERMS1, k):
                if len({lab for lab, _ in combo}) == k and set(combo) != set(cur):
                    yield FROBENIUS.replace(merge={key: combo})
    for key, cur in FROBENIUS.split.items():
        seen = set()
        for term in TERMS2:
            rest = tuple(t for t in cur if t[0] != term[0])
            for cand in (rest, rest + (term,)):
                if set(cand) != set(cur) and frozenset(cand) not in seen:
                    seen.add(frozenset(cand))
                    yield FROBENIUS.replace(split={key: cand})


def unit_law(table):
    return all(table.merge[(ONE, a)] == ((a, 1),) and table.merge[(a, ONE)] == ((a, 1),) for a in (ONE, X))


def consistent(table, d):
    cx = build_complex(d, table, strict=False)
    return not cx.violations and not cx.check_d_squared()


def test_reconstructed_table_is_consistent():
    assert consistent(FROBENIUS, load_fixture("trefoil_right"))


def test_named_perturbations_break_the_complex():
    d = load_fixture("trefoil_right")
    assert not consistent(FROBENIUS.replace(merge={(X, X): ((ONE, 1),)}), d)
    assert not consistent(FROBENIUS.replace(split={X: ()}), d)
    with pytest.raises(GradingError):
        build_complex(d, FROBENIUS.replace(merge={(X, X): ((ONE, 1),)}))


def test_dropping_the_c_term_gives_the_c_free_theory():
    # d^2 = 0 and homogeneity alone do not see the c term
    assert consistent(FROBENIUS.replace(split={ONE: ((((ONE, X)), 1), ((X, ONE), 1))}), load_fixture("trefoil_right"))


def test_forcing_with_unit_law_and_three_term_split():
    d = load_fixture("trefoil_right")
    count = 0
    for table in single_cell_perturbations():
        count += 1
        ok = consistent(table, d) and unit_law(table) and len(table.split[ONE]) == 3
        assert not ok, (table.merge, table.split)
    assert count > 40
