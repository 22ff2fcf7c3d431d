"""Instance data model, benchmark file parsers and distance-matrix builders.

Supports the two benchmark families used throughout: graph instances in the
OR-Library text layout (distances are all-pairs shortest paths) and planar
point sets in the TSPLIB layout (distances are Euclidean, rounded to the
nearest integer). In both families every point is simultaneously a customer
and a potential facility site; a customer subset can be specified for the
small hand-built instances used in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np


class ParseError(ValueError):
    """Raised for malformed instance files; carries a line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Instance:
    """An n-point instance with an integer distance matrix.

    ``distinct`` holds the strictly increasing list of all values occurring in
    ``dist`` and ``index_of`` maps each value to its 0-based position. Every
    attainable coverage radius is one of these values.

    ``customers`` restricts which points carry coverage demand (all points by
    default). ``triangle_slack`` is the additive slack by which the triangle
    inequality may fail (0 for shortest-path metrics, 1 for rounded Euclidean).
    """

    name: str
    dist: np.ndarray
    customers: Tuple[int, ...]
    distinct: Tuple[int, ...]
    index_of: Dict[int, int]
    triangle_slack: int = 1

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __post_init__(self):
        self.dist.setflags(write=False)

    @staticmethod
    def from_matrix(
        name: str,
        dist,
        customers: Optional[Sequence[int]] = None,
        triangle_slack: int = 1,
    ) -> "Instance":
        """Build an instance from a square, symmetric, non-negative integer matrix."""
        mat = np.asarray(dist, dtype=np.int64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("distance matrix must be square")
        if (mat < 0).any():
            raise ValueError("distances must be non-negative")
        if (np.diag(mat) != 0).any():
            raise ValueError("self-distances must be zero")
        if (mat != mat.T).any():
            raise ValueError("distance matrix must be symmetric")
        if customers is None:
            customers = range(mat.shape[0])
        cust = tuple(sorted(set(int(i) for i in customers)))
        if not cust or cust[0] < 0 or cust[-1] >= mat.shape[0]:
            raise ValueError("customers must be a non-empty subset of point indices")
        values = np.unique(mat)
        distinct = tuple(int(v) for v in values)
        index_of = {v: k for k, v in enumerate(distinct)}
        return Instance(
            name=name,
            dist=mat,
            customers=cust,
            distinct=distinct,
            index_of=index_of,
            triangle_slack=triangle_slack,
        )


@dataclass(frozen=True)
class Schedule:
    """Time horizon with non-decreasing facility counts per period."""

    p: Tuple[int, ...]

    def __post_init__(self):
        if not self.p:
            raise ValueError("schedule needs at least one period")
        if any(q <= 0 for q in self.p):
            raise ValueError("facility counts must be positive")
        if any(a > b for a, b in zip(self.p, self.p[1:])):
            raise ValueError("facility counts must be non-decreasing")

    @property
    def H(self) -> int:
        return len(self.p)

    def validate_for(self, inst: Instance) -> None:
        if self.p[-1] > inst.n:
            raise ValueError(
                f"last period opens {self.p[-1]} facilities but instance has {inst.n} sites"
            )

    @staticmethod
    def from_spec(spec: str, p_file: Optional[int] = None) -> "Schedule":
        """Parse ``"4,5,6"`` or ``"file+2"`` (the latter needs the file-given p)."""
        spec = spec.strip()
        if spec == "file+2":
            if p_file is None:
                raise ValueError("'file+2' schedule requires an instance format that carries p")
            return Schedule((p_file, p_file + 1, p_file + 2))
        try:
            counts = tuple(int(tok) for tok in spec.split(","))
        except ValueError:
            raise ValueError(f"cannot parse schedule spec {spec!r}") from None
        return Schedule(counts)


@dataclass(frozen=True)
class Chain:
    """A nested solution: facility sets per period with their coverage radii."""

    sets: Tuple[Tuple[int, ...], ...]
    radii: Tuple[int, ...]

    @staticmethod
    def from_sets(inst: Instance, sets: Iterable[Iterable[int]]) -> "Chain":
        ordered = tuple(tuple(sorted(set(s))) for s in sets)
        radii = tuple(eval_radius(inst, s) for s in ordered)
        return Chain(sets=ordered, radii=radii)

    def check(self, inst: Instance, schedule: Schedule) -> None:
        """Raise if any nesting, cardinality or radius invariant is violated."""
        if len(self.sets) != schedule.H:
            raise ValueError("chain length differs from horizon")
        for h, s in enumerate(self.sets):
            if len(s) != schedule.p[h]:
                raise ValueError(f"period {h + 1} opens {len(s)} facilities, expected {schedule.p[h]}")
            if h > 0 and not set(self.sets[h - 1]) <= set(s):
                raise ValueError(f"period {h + 1} does not contain period {h}")
            if eval_radius(inst, s) != self.radii[h]:
                raise ValueError(f"radius of period {h + 1} is stale")
        if any(a < b for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be non-increasing")

    @property
    def objective_abs(self) -> int:
        return int(sum(self.radii))


def eval_radius(inst: Instance, facility_set: Iterable[int]) -> int:
    """Largest distance from any customer to its nearest facility in the set."""
    facs = list(facility_set)
    if not facs:
        raise ValueError("facility set must be non-empty")
    sub = inst.dist[np.ix_(inst.customers, facs)]
    return int(sub.min(axis=1).max())


def parse_pmed(text: str) -> Tuple[List[Tuple[int, int, int]], int, int]:
    """Parse the OR-Library layout: header ``n m p`` then ``m`` edge triples.

    Returns (edges, n, p_file) with 0-based vertex ids. Duplicate edges keep
    their minimum weight at matrix-build time.
    """
    lines = text.splitlines()
    header_idx = None
    for idx, line in enumerate(lines):
        if line.strip():
            header_idx = idx
            break
    if header_idx is None:
        raise ParseError("empty file")
    parts = lines[header_idx].split()
    if len(parts) != 3:
        raise ParseError("header must be 'n m p'", header_idx + 1)
    try:
        n, m, p_file = (int(tok) for tok in parts)
    except ValueError:
        raise ParseError("header must contain three integers", header_idx + 1) from None
    if n <= 0 or m < 0 or p_file <= 0:
        raise ParseError("header values must be positive", header_idx + 1)

    edges: List[Tuple[int, int, int]] = []
    lineno = header_idx + 1
    for raw in lines[header_idx + 1:]:
        lineno += 1
        if not raw.strip():
            continue
        toks = raw.split()
        if len(toks) != 3:
            raise ParseError("edge line must be 'i j cost'", lineno)
        try:
            i, j, cost = (int(tok) for tok in toks)
        except ValueError:
            raise ParseError("non-integer edge entry", lineno) from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError("vertex id out of range", lineno)
        if cost <= 0:
            raise ParseError("edge cost must be a positive integer", lineno)
        edges.append((i - 1, j - 1, cost))
    if len(edges) != m:
        raise ParseError(f"expected {m} edges, found {len(edges)}")
    return edges, n, p_file


def parse_tsplib(text: str) -> List[Tuple[float, float]]:
    """Extract 2-D node coordinates from a TSPLIB file with EUC_2D distances."""
    weight_type = None
    coords: List[Tuple[float, float]] = []
    in_coords = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper.startswith("EDGE_WEIGHT_TYPE"):
            weight_type = line.split(":", 1)[1].strip().upper() if ":" in line else ""
            continue
        if upper == "NODE_COORD_SECTION":
            in_coords = True
            continue
        if upper == "EOF":
            break
        if in_coords:
            toks = line.split()
            if len(toks) < 3:
                raise ParseError("coordinate line must be 'id x y'", lineno)
            try:
                coords.append((float(toks[1]), float(toks[2])))
            except ValueError:
                raise ParseError("non-numeric coordinate", lineno) from None
    if weight_type != "EUC_2D":
        raise ParseError(f"unsupported edge-weight type {weight_type!r}")
    if not coords:
        raise ParseError("missing NODE_COORD_SECTION")
    return coords


def build_graph_distances(
    edges: Sequence[Tuple[int, int, int]], n: int, name: str = "graph"
) -> Instance:
    """All-pairs shortest-path matrix of an undirected weighted graph."""
    INF = np.iinfo(np.int64).max // 4
    dist = np.full((n, n), INF, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    for i, j, cost in edges:
        if cost < dist[i, j]:
            dist[i, j] = cost
            dist[j, i] = cost
    # Floyd-Warshall, vectorized over rows
    for k in range(n):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    if (dist >= INF // 2).any():
        raise ValueError("graph is disconnected; coverage radii would be unbounded")
    return Instance.from_matrix(name, dist, triangle_slack=0)


def build_euclidean_distances(
    coords: Sequence[Tuple[float, float]], name: str = "points"
) -> Instance:
    """Distance matrix with TSPLIB nint rounding (half away from zero)."""
    if not coords:
        raise ValueError("need at least one point")
    pts = np.asarray(coords, dtype=np.float64)
    diff = pts[:, None, :] - pts[None, :, :]
    raw = np.sqrt((diff ** 2).sum(axis=2))
    dist = np.floor(raw + 0.5).astype(np.int64)
    return Instance.from_matrix(name, dist, triangle_slack=1)


def load_instance(path: str, fmt: str) -> Tuple[Instance, Optional[int]]:
    """Read an instance file; returns (instance, file-given p or None)."""
    with open(path) as fh:
        text = fh.read()
    stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    if fmt == "pmed":
        edges, n, p_file = parse_pmed(text)
        return build_graph_distances(edges, n, name=stem), p_file
    if fmt == "tsplib":
        coords = parse_tsplib(text)
        return build_euclidean_distances(coords, name=stem), None
    raise ValueError(f"unknown instance format {fmt!r}")
