"""Seeded LT encoding and hard-decision ternary message-passing decoding.

The bipartite graph is stored in CSR form: ``neighbors[offsets[j]:offsets[j+1]]``
are the input nodes XORed into output node ``j``. Encoder and decoder rebuild the
same graph from ``(k, n, dist, seed)``.

Decoder messages live in {-1, 0, +1} with +1 meaning bit 0 and 0 meaning
"unknown". Each sweep is a flooding update:

* output -> input: channel trit times the product of the other incoming
  input messages (any zero makes it zero);
* input -> output: sign of the sum of the other incoming output messages.

Input nodes have no channel observation, so the first sweep only moves
information out of degree-1 output nodes.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import LengthMismatch, LTEnergyError

DEFAULT_MAX_ITERATIONS = 50


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    k: int
    n: int
    offsets: np.ndarray
    neighbors: np.ndarray
    seed: int | None = None

    @property
    def degrees(self):
        return np.diff(self.offsets)

    @property
    def adjacency(self):
        return [self.neighbors[a:b].tolist() for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    def input_degrees(self):
        return np.bincount(self.neighbors, minlength=self.k)

    def same_as(self, other):
        return (
            self.k == other.k
            and self.n == other.n
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
        )

    def to_text(self):
        return "".join(" ".join(map(str, row)) + "\n" for row in self.adjacency)


def graph_from_adjacency(k, adjacency, seed=None):
    """Build a graph from explicit neighbour lists (fixtures, hand examples)."""
    rows = [sorted(set(int(i) for i in row)) for row in adjacency]
    for row in rows:
        if not row or row[0] < 0 or row[-1] >= k:
            raise LTEnergyError(f"bad neighbour list {row!r} for k={k}")
    offsets = np.zeros(len(rows) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(r) for r in rows])
    neighbors = np.array([i for r in rows for i in r], dtype=np.int64)
    return BipartiteGraph(k, len(rows), offsets, neighbors, seed)


def graph_from_text(k, text):
    return graph_from_adjacency(k, [line.split() for line in text.splitlines() if line.strip()])


def _draw_rows(rng, k, d, count):
    """``count`` sorted rows of ``d`` distinct values from range(k).

    Repeated values are redrawn until none remain. The procedure commutes with
    any relabelling of range(k), so each row is uniform over d-subsets.
    """
    if d > k:
        raise LTEnergyError(f"cannot pick {d} distinct inputs out of {k}")
    rows = np.sort(rng.integers(0, k, size=(count, d)), axis=1)
    todo = np.arange(count)
    while todo.size and d > 1:
        sub = rows[todo]
        dup = np.zeros(sub.shape, dtype=bool)
        dup[:, 1:] = sub[:, 1:] == sub[:, :-1]
        hit = dup.any(axis=1)
        todo, sub, dup = todo[hit], sub[hit], dup[hit]
        if not todo.size:
            break
        sub[dup] = rng.integers(0, k, size=int(dup.sum()))
        rows[todo] = np.sort(sub, axis=1)
    return rows


def _draw_distinct(rng, k, degrees):
    """For each node draw ``degrees[j]`` distinct values from range(k); CSR order, sorted per node.

    Nodes are grouped by degree (ascending) so each group is one matrix draw.
    """
    offsets = np.zeros(degrees.shape[0] + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    values = np.empty(int(offsets[-1]), dtype=np.int64)
    for d in np.unique(degrees):
        nodes = np.flatnonzero(degrees == d)
        rows = _draw_rows(rng, k, int(d), nodes.shape[0])
        values[(offsets[nodes][:, None] + np.arange(d)).ravel()] = rows.ravel()
    return values


def build_graph(k, n, dist, seed):
    """Seeded LT graph: per output node a degree from ``dist`` (capped at k),
    then that many distinct inputs chosen uniformly."""
    if k < 1 or n < 1:
        raise LTEnergyError(f"k and n must be >= 1, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    degrees = np.minimum(dist.sample(rng, size=n), k)
    neighbors = _draw_distinct(rng, k, degrees)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    return BipartiteGraph(k, n, offsets, neighbors, seed)


def encode(message, graph):
    """Coded bit j is the XOR of the message bits listed for output node j."""
    message = np.asarray(message, dtype=np.uint8)
    if message.shape != (graph.k,):
        raise LengthMismatch(f"message has {message.shape[0]} bits, graph expects {graph.k}")
    return (np.add.reduceat(message[graph.neighbors], graph.offsets[:-1]) & 1).astype(np.uint8)


class Status(Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"


@dataclass(frozen=True, eq=False)
class DecodeResult:
    status: Status
    message_estimate: np.ndarray
    iterations_used: int
    unresolved_count: int
    # final per-input sign in {-1, 0, +1}
    aggregate: np.ndarray

    @property
    def success(self):
        return self.status is Status.SUCCESS


def propagate_reference(out_of_edge, in_of_edge, offsets, received, k, max_iterations):
    """Array-at-a-time flooding sweeps; returns (aggregate signs, sweeps used).

    Disjoint unions of graphs may be passed in one call: a component whose
    messages stopped changing stays fixed while the others keep iterating.
    This is the readable route; ``propagate`` uses the compiled kernel when
    numba is importable and must agree with this one bit for bit.
    """
    y = np.asarray(received, dtype=np.int8)[out_of_edge]
    starts = offsets[:-1]
    in_to_out = np.zeros(out_of_edge.shape[0], dtype=np.int8)
    out_to_in = np.zeros_like(in_to_out)
    used = 0
    for _ in range(max_iterations):
        used += 1
        is_zero = in_to_out == 0
        is_neg = in_to_out < 0
        zeros_elsewhere = np.add.reduceat(is_zero.view(np.int8).astype(np.int32), starts)[out_of_edge] - is_zero
        neg_elsewhere = np.add.reduceat(is_neg.view(np.int8).astype(np.int32), starts)[out_of_edge] - is_neg
        sign = y * (1 - 2 * (neg_elsewhere & 1)).astype(np.int8)
        new_out_to_in = np.where(zeros_elsewhere == 0, sign, 0).astype(np.int8)
        totals = np.bincount(in_of_edge, weights=new_out_to_in, minlength=k)
        new_in_to_out = np.sign(totals[in_of_edge] - new_out_to_in).astype(np.int8)
        changed = not (np.array_equal(new_out_to_in, out_to_in) and np.array_equal(new_in_to_out, in_to_out))
        out_to_in, in_to_out = new_out_to_in, new_in_to_out
        if not changed:
            break
    totals = np.bincount(in_of_edge, weights=out_to_in, minlength=k)
    return np.sign(totals).astype(np.int8), used


def _flood_kernel(offsets, neighbors, received, k, max_iterations):
    n = offsets.shape[0] - 1
    edges = neighbors.shape[0]
    in_to_out = np.zeros(edges, dtype=np.int8)
    out_to_in = np.zeros(edges, dtype=np.int8)
    totals = np.zeros(k, dtype=np.int32)
    used = 0
    for _ in range(max_iterations):
        used += 1
        changed = False
        totals[:] = 0
        for j in range(n):
            lo = offsets[j]
            hi = offsets[j + 1]
            zeros = 0
            negs = 0
            for e in range(lo, hi):
                m = in_to_out[e]
                if m == 0:
                    zeros += 1
                elif m < 0:
                    negs += 1
            y = received[j]
            for e in range(lo, hi):
                m = in_to_out[e]
                v = 0
                if zeros - (m == 0) == 0:
                    v = y if (negs - (m < 0)) % 2 == 0 else -y
                if v != out_to_in[e]:
                    changed = True
                    out_to_in[e] = v
                totals[neighbors[e]] += v
        for e in range(edges):
            rest = totals[neighbors[e]] - out_to_in[e]
            v = 1 if rest > 0 else (-1 if rest < 0 else 0)
            if v != in_to_out[e]:
                changed = True
                in_to_out[e] = v
        if not changed:
            break
    totals[:] = 0
    for e in range(edges):
        totals[neighbors[e]] += out_to_in[e]
    return np.sign(totals).astype(np.int8), used


try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    _flood_compiled = None
else:
    _flood_compiled = numba.njit(cache=True, nogil=True)(_flood_kernel)


def propagate(out_of_edge, in_of_edge, offsets, received, k, max_iterations):
    """Flooding sweeps on a CSR edge list; same contract as ``propagate_reference``."""
    if _flood_compiled is None:
        return propagate_reference(out_of_edge, in_of_edge, offsets, received, k, max_iterations)
    return _flood_compiled(
        np.ascontiguousarray(offsets, dtype=np.int64),
        np.ascontiguousarray(in_of_edge, dtype=np.int64),
        np.ascontiguousarray(received, dtype=np.int8),
        int(k),
        int(max_iterations),
    )


def decode_ternary(received, graph, max_iterations=DEFAULT_MAX_ITERATIONS):
    """Decode received trits (+1 -> bit 0, -1 -> bit 1, 0 -> erasure)."""
    received = np.asarray(received, dtype=np.int8)
    if received.shape != (graph.n,):
        raise LengthMismatch(f"received {received.shape[0]} trits, graph has {graph.n} output nodes")
    if max_iterations < 1:
        raise LTEnergyError("max_iterations must be >= 1")
    out_of_edge = np.repeat(np.arange(graph.n), graph.degrees)
    aggregate, used = propagate(out_of_edge, graph.neighbors, graph.offsets, received, graph.k, max_iterations)
    unresolved = int(np.count_nonzero(aggregate == 0))
    status = Status.SUCCESS if unresolved == 0 else Status.FAILURE
    estimate = (aggregate < 0).astype(np.uint8)
    return DecodeResult(status, estimate, used, unresolved, aggregate)


def trits_from_bits(bits):
    return (1 - 2 * np.asarray(bits, dtype=np.int8)).astype(np.int8)
