"""Symmetric TSP problem representation and desk-scale exact oracles.

Covers a subset of the TSPLIB text format (EUC_2D, CEIL_2D and
EXPLICIT/FULL_MATRIX edge weights), random Euclidean instance generation,
tour arithmetic, canonical tour forms for undirected-tour equality, and two
independent exact solvers used to verify heuristic results on small
instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InstanceTooLargeError, InvalidTourError, TsplibParseError

HELD_KARP_MAX = 16
ENUMERATION_MAX = 10

_SUPPORTED_EDGE_WEIGHT_TYPES = ("EUC_2D", "CEIL_2D", "EXPLICIT")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Instance:
    """A symmetric TSP instance held as a dense distance matrix.

    The matrix must be symmetric with a zero diagonal and strictly positive
    off-diagonal entries; visibility 1/d is undefined for coincident cities,
    so those are rejected at construction time. Arrays are frozen after
    validation, which makes the instance safe for concurrent reads.
    """

    n: int
    dist: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"instance needs at least 2 cities, got n={self.n}")
        dist = np.array(self.dist, dtype=np.float64, order="C")
        if dist.shape != (self.n, self.n):
            raise ValueError(f"distance matrix shape {dist.shape} does not match n={self.n}")
        if not np.array_equal(dist, dist.T):
            i, j = np.argwhere(dist != dist.T)[0]
            raise ValueError(f"distance matrix is not symmetric at ({i}, {j})")
        if np.any(np.diagonal(dist) != 0.0):
            i = int(np.nonzero(np.diagonal(dist))[0][0])
            raise ValueError(f"nonzero diagonal entry at city {i}")
        off = dist[~np.eye(self.n, dtype=bool)]
        if np.any(off <= 0.0):
            i, j = np.argwhere((dist <= 0.0) & ~np.eye(self.n, dtype=bool))[0]
            raise ValueError(
                f"non-positive distance {dist[i, j]} between distinct cities {i} and {j} "
                "(co-located cities are rejected because visibility divides by distance)"
            )
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        if self.coords is not None:
            coords = np.array(self.coords, dtype=np.float64, order="C")
            if coords.shape != (self.n, 2):
                raise ValueError(f"coords shape {coords.shape} does not match n={self.n}")
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)


@dataclass(frozen=True)
class Tour:
    """A closed tour: a permutation of city indices plus its cached length."""

    order: np.ndarray
    length: float

    def __post_init__(self):
        order = np.array(self.order, dtype=np.int64, order="C")
        order.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "length", float(self.length))


def _check_permutation(n, order):
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise InvalidTourError(f"order is not a permutation of 0..{n - 1}: {order!r}")


def cycle_length(dist, order):
    """Length of the closed tour `order` over `dist`, including the closing edge.

    Every cached Tour length in the package goes through this one routine so
    that equal orders always produce bit-equal lengths.
    """
    return float(dist[order, np.roll(order, -1)].sum())


def cycle_lengths(dist, orders):
    """cycle_length for a batch of tours, one per row of `orders`.

    The row-wise reduction is bit-identical to cycle_length on each row
    (pinned by a test), so batched and single paths stay interchangeable.
    """
    return dist[orders, np.roll(orders, -1, axis=1)].sum(axis=1)


def tour_length(inst, order):
    """Sum of consecutive edge weights plus the closing edge.

    Raises InvalidTourError if `order` is not a permutation of 0..n-1.
    """
    order = np.asarray(order, dtype=np.int64)
    _check_permutation(inst.n, order)
    return cycle_length(inst.dist, order)


def tour_from_order(inst, order):
    """Validate `order` and return it as a Tour with its computed length."""
    order = np.asarray(order, dtype=np.int64)
    _check_permutation(inst.n, order)
    return Tour(order, cycle_length(inst.dist, order))


def nearest_neighbor_tour(inst, start=0):
    """Greedy tour: repeatedly visit the closest unvisited city.

    Ties break toward the lowest city index. Provides the L_nn scale used
    for pheromone initialization.
    """
    n = inst.n
    if not 0 <= start < n:
        raise ValueError(f"start city {start} out of range 0..{n - 1}")
    order = np.empty(n, dtype=np.int64)
    order[0] = start
    remaining = inst.dist[start].copy()
    remaining[start] = np.inf
    for k in range(1, n):
        nxt = int(np.argmin(remaining))
        order[k] = nxt
        remaining = inst.dist[nxt].copy()
        remaining[order[: k + 1]] = np.inf
    return Tour(order, cycle_length(inst.dist, order))


def brute_force_optimum(inst):
    """Exact optimum via Held-Karp dynamic programming (n <= 16).

    The first city is fixed to 0 to quotient out rotation symmetry. Ties
    resolve deterministically toward the first minimizer found.
    """
    if inst.n > HELD_KARP_MAX:
        raise InstanceTooLargeError(
            f"Held-Karp oracle supports n <= {HELD_KARP_MAX}, got n={inst.n}"
        )
    n = inst.n
    d = inst.dist
    size = 1 << (n - 1)  # subsets of cities 1..n-1, bit j <-> city j+1
    dp = np.full((size, n - 1), np.inf)
    parent = np.full((size, n - 1), -1, dtype=np.int16)
    for j in range(n - 1):
        dp[1 << j, j] = d[0, j + 1]
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue  # singleton, seeded above
        members = [j for j in range(n - 1) if mask >> j & 1]
        for j in members:
            prev_mask = mask ^ (1 << j)
            prevs = np.array([p for p in members if p != j], dtype=np.int64)
            cand = dp[prev_mask, prevs] + d[prevs + 1, j + 1]
            k = int(np.argmin(cand))
            dp[mask, j] = cand[k]
            parent[mask, j] = prevs[k]
    full = size - 1
    closing = dp[full] + d[np.arange(1, n), 0]
    last = int(np.argmin(closing))
    order = np.empty(n, dtype=np.int64)
    mask, j = full, last
    for pos in range(n - 1, 0, -1):
        order[pos] = j + 1
        mask, j = mask ^ (1 << j), int(parent[mask, j])
    order[0] = 0
    return Tour(order, cycle_length(inst.dist, order))


def enumerate_optimum(inst):
    """Exact optimum by enumerating all tours with city 0 fixed first (n <= 10).

    Independent of the Held-Karp route; the two oracles cross-check each
    other in the test suite.
    """
    if inst.n > ENUMERATION_MAX:
        raise InstanceTooLargeError(
            f"enumeration oracle supports n <= {ENUMERATION_MAX}, got n={inst.n}"
        )
    n = inst.n
    d = inst.dist.tolist()
    best_len = math.inf
    best_perm = None
    for perm in itertools.permutations(range(1, n)):
        total = d[0][perm[0]]
        prev = perm[0]
        for city in perm[1:]:
            total += d[prev][city]
            prev = city
        total += d[prev][0]
        if total < best_len:
            best_len = total
            best_perm = perm
    order = np.array((0,) + best_perm, dtype=np.int64)
    return Tour(order, cycle_length(inst.dist, order))


def random_instance(n, seed):
    """n cities uniform in the unit square from a Philox stream keyed by `seed`.

    Byte-for-byte reproducible given (n, seed). Distances are exact
    Euclidean values. In the (measure-zero) event of coincident points the
    draw is repeated from the same stream.
    """
    if n < 2:
        raise ValueError(f"random instance needs n >= 2, got {n}")
    gen = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    while True:
        coords = gen.random((n, 2))
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
        if np.all(dist[~np.eye(n, dtype=bool)] > 0.0):
            return Instance(n, dist, coords)


def canonical_form(order):
    """The unique representative of a tour's 2n rotations and reflections.

    Rotates city 0 to the front, then reverses direction if the second city
    outranks the last, so every encoding of one undirected tour maps to the
    same array.
    """
    order = np.asarray(order, dtype=np.int64)
    i0 = int(np.nonzero(order == 0)[0][0])
    rot = np.roll(order, -i0)
    if rot.shape[0] > 2 and rot[1] > rot[-1]:
        rot = np.concatenate((rot[:1], rot[:0:-1]))
    return rot


def optimality_gap(inst, tour, reference):
    """Length difference between two tours, each remeasured over its
    canonical form, so the same undirected tour gives exactly 0.0 regardless
    of rotation or direction."""
    a = cycle_length(inst.dist, canonical_form(tour.order))
    b = cycle_length(inst.dist, canonical_form(reference.order))
    return a - b


TOUR_FILE_MAGIC = "TOUR"


def tour_to_text(tour):
    """Serialize a tour: header line `TOUR n <length>`, then one city per line."""
    lines = [f"{TOUR_FILE_MAGIC} {tour.order.shape[0]} {tour.length!r}"]
    lines.extend(str(int(c)) for c in tour.order)
    return "\n".join(lines) + "\n"


def tour_from_text(inst, text):
    """Parse a tour file against `inst`, revalidating the permutation and length."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(TOUR_FILE_MAGIC):
        raise InvalidTourError("tour file must start with a 'TOUR n <length>' header")
    parts = lines[0].split()
    if len(parts) != 3:
        raise InvalidTourError(f"malformed tour header: {lines[0]!r}")
    n, stated = int(parts[1]), float(parts[2])
    if n != inst.n:
        raise InvalidTourError(f"tour is for n={n} but instance has n={inst.n}")
    order = np.array([int(ln) for ln in lines[1:]], dtype=np.int64)
    tour = tour_from_order(inst, order)
    if not math.isclose(tour.length, stated, rel_tol=1e-9):
        raise InvalidTourError(
            f"stated length {stated} disagrees with recomputed {tour.length}"
        )
    return tour


def parse_tsplib(text):
    """Parse TSPLIB file contents into an Instance.

    Supported: EDGE_WEIGHT_TYPE EUC_2D (distances rounded to the nearest
    integer per the TSPLIB convention), CEIL_2D (rounded up), and
    EXPLICIT with EDGE_WEIGHT_FORMAT FULL_MATRIX. Anything else raises
    TsplibParseError naming the offending field or line.
    """
    header = {}
    coord_lines = []
    weight_lines = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper == "EOF":
            break
        if upper == "NODE_COORD_SECTION":
            section = "coords"
            continue
        if upper == "EDGE_WEIGHT_SECTION":
            section = "weights"
            continue
        if upper.endswith("_SECTION"):
            raise TsplibParseError(f"line {lineno}: unsupported section {line!r}")
        if section is None:
            if ":" not in line:
                raise TsplibParseError(f"line {lineno}: malformed header line {line!r}")
            key, _, value = line.partition(":")
            header[key.strip().upper()] = value.strip()
        elif section == "coords":
            coord_lines.append((lineno, line))
        else:
            weight_lines.append((lineno, line))

    if "DIMENSION" not in header:
        raise TsplibParseError("missing DIMENSION field in header")
    try:
        n = int(header["DIMENSION"])
    except ValueError:
        raise TsplibParseError(f"DIMENSION is not an integer: {header['DIMENSION']!r}") from None
    if n < 2:
        raise TsplibParseError(f"DIMENSION must be >= 2, got {n}")
    if "TYPE" in header and header["TYPE"].upper() not in ("TSP",):
        raise TsplibParseError(f"unsupported TYPE {header['TYPE']!r} (only TSP)")
    ewt = header.get("EDGE_WEIGHT_TYPE")
    if ewt is None:
        raise TsplibParseError("missing EDGE_WEIGHT_TYPE field in header")
    ewt = ewt.upper()
    if ewt not in _SUPPORTED_EDGE_WEIGHT_TYPES:
        raise TsplibParseError(
            f"unsupported EDGE_WEIGHT_TYPE {ewt!r} (supported: {', '.join(_SUPPORTED_EDGE_WEIGHT_TYPES)})"
        )

    if ewt in ("EUC_2D", "CEIL_2D"):
        coords = _parse_coord_section(n, coord_lines)
        diff = coords[:, None, :] - coords[None, :, :]
        euclid = np.sqrt((diff * diff).sum(axis=-1))
        dist = np.floor(euclid + 0.5) if ewt == "EUC_2D" else np.ceil(euclid)
        np.fill_diagonal(dist, 0.0)
        try:
            return Instance(n, dist, coords)
        except ValueError as exc:
            raise TsplibParseError(f"invalid {ewt} instance: {exc}") from exc

    fmt = header.get("EDGE_WEIGHT_FORMAT", "").upper()
    if fmt != "FULL_MATRIX":
        raise TsplibParseError(
            f"EXPLICIT weights require EDGE_WEIGHT_FORMAT FULL_MATRIX, got {fmt or 'none'!r}"
        )
    values = []
    for lineno, line in weight_lines:
        for tok in line.split():
            try:
                values.append(float(tok))
            except ValueError:
                raise TsplibParseError(f"line {lineno}: non-numeric weight {tok!r}") from None
    if len(values) != n * n:
        raise TsplibParseError(
            f"dimension mismatch: DIMENSION is {n} so expected {n * n} weights, found {len(values)}"
        )
    dist = np.array(values).reshape(n, n)
    if not np.array_equal(dist, dist.T):
        i, j = np.argwhere(dist != dist.T)[0]
        raise TsplibParseError(f"non-symmetric explicit matrix at ({i}, {j})")
    try:
        return Instance(n, dist)
    except ValueError as exc:
        raise TsplibParseError(f"invalid EXPLICIT instance: {exc}") from exc


def _parse_coord_section(n, coord_lines):
    if len(coord_lines) != n:
        raise TsplibParseError(
            f"dimension mismatch: DIMENSION is {n} but found {len(coord_lines)} coordinate lines"
        )
    coords = np.full((n, 2), np.nan)
    seen = set()
    for lineno, line in coord_lines:
        parts = line.split()
        if len(parts) != 3:
            raise TsplibParseError(f"line {lineno}: expected 'index x y', got {line!r}")
        try:
            idx = int(float(parts[0]))
            x, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise TsplibParseError(f"line {lineno}: non-numeric coordinate in {line!r}") from None
        if not 1 <= idx <= n:
            raise TsplibParseError(f"line {lineno}: city index {idx} outside 1..{n}")
        if idx in seen:
            raise TsplibParseError(f"line {lineno}: duplicate city index {idx}")
        seen.add(idx)
        coords[idx - 1] = (x, y)
    return coords


def load_tsplib(path):
    """Read and parse a TSPLIB file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tsplib(fh.read())
