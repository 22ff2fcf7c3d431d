import os

import pytest

from nestedpcenter import Instance

DATA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "data")

# Two colocated customer/site pairs plus a middle site: opening the middle
# site covers both customers at 15, either outer site covers its own customer
# at 0 and the other at 20.
TOY_DIST = [
    [0, 20, 15],
    [20, 0, 15],
    [15, 15, 0],
]

PMED_PATH_GRAPH = "3 2 1\n1 2 4\n2 3 6\n"

PMED_TINY = """5 6 2
1 2 3
2 3 4
3 4 5
4 5 6
1 5 10
2 4 7
"""

TSPLIB_TWO_POINTS = """NAME: two
TYPE: TSP
DIMENSION: 2
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 4
EOF
"""


@pytest.fixture
def toy() -> Instance:
    return Instance.from_matrix("toy", TOY_DIST, customers=(0, 1), triangle_slack=0)


def data_path(*parts: str) -> str:
    return os.path.join(DATA_DIR, *parts)


def require_data(*parts: str) -> str:
    path = data_path(*parts)
    if not os.path.exists(path):
        pytest.skip(f"benchmark file {os.path.join(*parts)} not present (see README)")
    return path


@pytest.fixture
def eil51() -> Instance:
    from nestedpcenter import load_instance

    inst, _ = load_instance(require_data("tsplib", "eil51.tsp"), "tsplib")
    return inst
