"""Acceptance gate: one pass/fail line per criterion."""

import json
import random
import time
from pathlib import Path

import pytest

from khovanov_zc import movie
from khovanov_zc.complex import build_complex
from khovanov_zc.diagram import FIXTURE_NAMES, cofacial_pairs, load_fixture, r2_up, random_diagram, unlink
from khovanov_zc.homology import bracket_oracle, euler_characteristic, homology
from khovanov_zc.linalg import SparseMatrix
from khovanov_zc.movie import Movie, induced_chain_map, r2_map_up, random_r2_movie, run_counterexample, slide_u2

DATA = Path(__file__).parent / "data"


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, detail

    return emit


def corpus():
    rng = random.Random(20240)
    return [load_fixture(n) for n in FIXTURE_NAMES] + [random_diagram(rng, 6) for _ in range(100)]


def test_1_differential(report):
    start = time.perf_counter()
    bad = []
    diagrams = corpus()
    for k, d in enumerate(diagrams):
        assert d.n_crossings <= 6
        cx = build_complex(d)
        if cx.check_d_squared() or cx.homogeneity_violations() or not cx.entry_alphabet_ok():
            bad.append(k)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    report(1, "d^2 = 0, entries in {0, 1, c}, bidegree (1,0)", ok, f"{len(diagrams)} diagrams, {elapsed:.2f}s, failures {bad}")


def test_2_euler_bracket(report):
    bad = [k for k, d in enumerate(corpus()) if euler_characteristic(build_complex(d)) != bracket_oracle(d)]
    report(2, "Euler characteristic equals the bracket oracle", not bad, f"failures {bad}")


def test_3_unknot_unlink(report):
    h1 = homology(build_complex(unlink(1)))
    h2 = homology(build_complex(unlink(2)))
    h1b = homology(build_complex(load_fixture("unknot1")))
    ok = (
        h1.entries == {(0, 1): (1, ()), (0, -1): (1, ())}
        and h1b == h1
        and h2.entries == {(0, 2): (1, ()), (0, 0): (2, ()), (0, -2): (1, ())}
    )
    report(3, "unknot and 2-unlink homology", ok)


def test_4_r2_invariance(report):
    pairs = 0
    bad = []
    for name in FIXTURE_NAMES:
        d = load_fixture(name)
        h = homology(build_complex(d))
        for x, y, f in cofacial_pairs(d)[:3]:
            for over in "ab":
                up, _ = r2_up(d, x, y, face=f, over=over)
                pairs += 1
                if homology(build_complex(up)) != h:
                    bad.append((name, x, y, over))
    report(4, "homology unchanged by r2_up", pairs >= 10 and not bad, f"{pairs} pairs, failures {bad}")


def test_5_r2_contracts(report):
    cases = [slide_u2()]
    for name in ("hopf_pos", "trefoil_left", "figure_eight"):
        d = load_fixture(name)
        x, y, f = cofacial_pairs(d)[0]
        up, rec = r2_up(d, x, y, face=f)
        cases.append((d, up, rec))
    problems = []
    for d, up, rec in cases:
        maps = r2_map_up(d, rec, up)
        if not (maps.psi @ maps.psi_inv).is_identity():
            problems.append("psi psi_inv != id")
        cx = maps.contraction.big
        h = maps.contraction.homotopy_block
        gf = maps.psi_inv @ maps.psi
        for i in cx.degrees:
            if SparseMatrix.identity(cx.rank(i)) + gf.block(i) != cx.d(i - 1) @ h(i - 1) + h(i) @ cx.d(i):
                problems.append(f"homotopy identity in degree {i}")
        if not homology(maps.contraction.acyclic).is_zero():
            problems.append("cancelled summand has homology")
    report(5, "R2 equivalence and contraction identities", not problems, "; ".join(problems))


def test_6_counterexample(report):
    movie._COMPLEX_CACHE.clear()
    start = time.perf_counter()
    r = run_counterexample()
    elapsed = time.perf_counter() - start
    frozen = json.loads((DATA / "slide_phi.json").read_text())
    checks = {
        "id mod c": r.identity_mod_c,
        "not id": not r.identity,
        "c divides phi - id": r.entries_divisible_by_c,
        "bidegree (0,0)": r.bidegree_ok,
        "invertible": r.invertible,
        "frozen matrix": r.matrix().to_triplets() == frozen["phi"],
        "under 1s": elapsed < 1,
    }
    failed = [k for k, v in checks.items() if not v]
    report(6, "slide movie on the 2-unlink: phi = id mod c, phi != id", not failed, f"{elapsed:.2f}s, failed {failed}")


def test_7_r2_functoriality_mod_c(report):
    rng = random.Random(7)
    bad = []
    for k in range(50):
        phi = induced_chain_map(random_r2_movie(rng, steps=rng.randint(1, 3)))
        if not phi.is_identity_mod_c():
            bad.append(k)
    report(7, "50 random R2 round trips on the 2-unlink are id mod c", not bad, f"failures {bad}")


def test_8_sphere(report):
    f = induced_chain_map(Movie(unlink(0), [{"type": "birth"}, {"type": "death", "circle": 0}]))
    ok = f.block(0) == SparseMatrix.from_dense([[2]])
    report(8, "birth then death on the empty diagram is multiplication by c", ok, f.block(0).render())
