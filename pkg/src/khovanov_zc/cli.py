"""Command line entry point.

JSON is the canonical output; ``--format text`` renders the same data.
Exit codes: 0 ok, 1 check failed, 2 bad input, 3 size guard, 4 movie
endpoints with a nonzero differential.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from khovanov_zc.complex import MAX_CROSSINGS_ENV, GradingError, SizeGuardError
from khovanov_zc.diagram import DiagramError, load
from khovanov_zc.homology import bracket_oracle, euler_characteristic, homology
from khovanov_zc.movie import (
    VERDICT,
    VERDICT_FAIL,
    Movie,
    MovieError,
    complex_of,
    induced_chain_map,
    random_r2_movie,
    run_counterexample,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_SIZE = 3
EXIT_ENDPOINTS = 4


class EndpointError(Exception):
    pass


def _emit(data: dict, text: str, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_homology(args) -> int:
    d = load(args.diagram)
    cx = complex_of(d)
    table = homology(cx)
    chi, oracle = euler_characteristic(cx), bracket_oracle(d)
    data = {
        "crossings": d.n_crossings,
        "writhe": d.writhe(),
        "homology": table.to_json(),
        "euler": chi.to_json(),
        "bracket_oracle": oracle.to_json(),
        "oracle_match": chi == oracle,
    }
    text = "\n".join(
        [
            table.render(),
            f"euler characteristic: {chi.render()}",
            f"bracket oracle: {oracle.render()}",
            f"oracle match: {str(chi == oracle).lower()}",
        ]
    )
    _emit(data, text, args.format)
    return EXIT_OK if chi == oracle else EXIT_FAIL


def cmd_euler(args) -> int:
    d = load(args.diagram)
    chi, oracle = euler_characteristic(complex_of(d)), bracket_oracle(d)
    data = {"euler": chi.to_json(), "bracket_oracle": oracle.to_json(), "oracle_match": chi == oracle}
    text = f"euler characteristic: {chi.render()}\nbracket oracle: {oracle.render()}\noracle match: {str(chi == oracle).lower()}"
    _emit(data, text, args.format)
    return EXIT_OK if chi == oracle else EXIT_FAIL


def cmd_movie(args) -> int:
    movie = Movie.load(args.movie)
    final = movie.final()
    for name, d in (("initial", movie.initial), ("final", final)):
        if not complex_of(d).is_zero_differential():
            raise EndpointError(f"the {name} diagram has a nonzero differential")
    phi = induced_chain_map(movie)
    data = {
        "map": phi.to_json(),
        "identity": phi.is_identity(),
        "identity_mod_c": phi.is_identity_mod_c(),
    }
    text = "\n".join(
        [
            phi.render(),
            f"id mod c: {str(data['identity_mod_c']).lower()}",
            f"id: {str(data['identity']).lower()}",
        ]
    )
    _emit(data, text, args.format)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    report = run_counterexample()
    data = report.to_json()
    text = "\n".join(
        [
            "generators: " + " ".join(report.generators),
            "phi =",
            report.matrix().render(),
            "phi - id =",
            report.difference.render(),
            f"id mod c: {str(report.identity_mod_c).lower()}",
            f"id: {str(report.identity).lower()}",
            f"entries of phi - id divisible by c: {str(report.entries_divisible_by_c).lower()}",
            f"bidegree (0,0): {str(report.bidegree_ok).lower()}",
            f"invertible: {str(report.invertible).lower()}",
            VERDICT if report.refuted else VERDICT_FAIL,
        ]
    )
    _emit(data, text, args.format)
    return EXIT_OK if report.refuted else EXIT_FAIL


def cmd_fuzz_r2(args) -> int:
    rng = random.Random(args.seed)
    results = []
    for _ in range(args.count):
        movie = random_r2_movie(rng, steps=args.steps)
        phi = induced_chain_map(movie)
        results.append({"events": movie.events, "identity": phi.is_identity(), "identity_mod_c": phi.is_identity_mod_c()})
    ok = all(r["identity_mod_c"] for r in results)
    data = {
        "seed": args.seed,
        "steps": args.steps,
        "movies": results,
        "all_identity_mod_c": ok,
        "not_identity": sum(not r["identity"] for r in results),
    }
    text = (
        f"{len(results)} movies, seed {args.seed}, {args.steps} bigons each\n"
        f"identity mod c: {sum(r['identity_mod_c'] for r in results)}/{len(results)}\n"
        f"identity: {sum(r['identity'] for r in results)}/{len(results)}"
    )
    _emit(data, text, args.format)
    return EXIT_OK if ok else EXIT_FAIL


def _nonnegative(raw: str) -> int:
    n = int(raw)
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--max-crossings", type=_nonnegative, default=None, help=f"crossing bound (default 12, or ${MAX_CROSSINGS_ENV})")

    p = argparse.ArgumentParser(prog="khovanov-zc", description="Khovanov homology over Z2[c] and movie maps.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("homology", parents=[common], help="homology table of a diagram")
    s.add_argument("diagram", help="diagram JSON file or fixture name")
    s.set_defaults(func=cmd_homology)
    s = sub.add_parser("euler", parents=[common], help="Euler characteristic against the bracket oracle")
    s.add_argument("diagram")
    s.set_defaults(func=cmd_euler)
    s = sub.add_parser("movie", parents=[common], help="chain map induced by a movie")
    s.add_argument("movie", help="movie JSON file")
    s.set_defaults(func=cmd_movie)
    s = sub.add_parser("counterexample", parents=[common], help="the slide movie on the 2-unlink")
    s.set_defaults(func=cmd_counterexample)
    s = sub.add_parser("fuzz-r2", parents=[common], help="random R2 round trips on the 2-unlink")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--steps", type=_nonnegative, default=2, help="bigons added per movie")
    s.add_argument("--count", type=_nonnegative, default=50, help="number of movies")
    s.set_defaults(func=cmd_fuzz_r2)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    previous = os.environ.get(MAX_CROSSINGS_ENV)
    if args.max_crossings is not None:
        os.environ[MAX_CROSSINGS_ENV] = str(args.max_crossings)
    try:
        return args.func(args)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except EndpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENDPOINTS
    except (DiagramError, MovieError, GradingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if previous is None:
            os.environ.pop(MAX_CROSSINGS_ENV, None)
        else:
            os.environ[MAX_CROSSINGS_ENV] = previous


if __name__ == "__main__":
    sys.exit(main())
