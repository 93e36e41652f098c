"""Khovanov homology over Z2[c] and chain maps induced by movies."""

from khovanov_zc.complex import build_complex
from khovanov_zc.diagram import Diagram, load, load_fixture
from khovanov_zc.homology import bracket_oracle, euler_characteristic, homology
from khovanov_zc.movie import Movie, induced_chain_map, run_counterexample

__version__ = "0.1.0"

__all__ = [
    "Diagram",
    "Movie",
    "bracket_oracle",
    "build_complex",
    "euler_characteristic",
    "homology",
    "induced_chain_map",
    "load",
    "load_fixture",
    "run_counterexample",
]
