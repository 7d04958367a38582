"""
Building blocks for tensor-product cell quadrature.

Gauss-Legendre and midpoint rules on [-1, 1], batches of axis-aligned cells
with vectorised bisection, and the fixed-tree pairwise reduction that keeps
sums independent of evaluation order.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def midpoint_rule(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """count equal sub-intervals of [-1, 1]: centres and widths."""
    nodes = -1.0 + (2.0 * np.arange(count) + 1.0) / count
    weights = np.full(count, 2.0 / count)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def tensor_rule(kind: str, order: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor-product rule on [-1, 1]^dim: nodes (q, dim) and weights (q,)."""
    nodes_1d, weights_1d = gauss_legendre(order) if kind == "gl" else midpoint_rule(order)
    nodes = np.array(list(itertools.product(nodes_1d, repeat=dim)), dtype=float).reshape(-1, dim)
    weights = np.array([np.prod(w) for w in itertools.product(weights_1d, repeat=dim)], dtype=float)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def pairwise_sum(values: np.ndarray) -> float:
    """Sum with a fixed binary combination tree over the given order."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        return 0.0
    while values.size > 1:
        if values.size % 2:
            values = np.append(values, 0.0)
        values = values[0::2] + values[1::2]
    return float(values[0])


@dataclass
class CellBatch:
    """Axis-aligned parameter cells stored as parallel arrays.

    lo, hi have shape (k, n); depth has shape (k,) and counts bisections.
    """

    lo: np.ndarray
    hi: np.ndarray
    depth: np.ndarray

    @classmethod
    def grid(cls, box: np.ndarray, cells_per_axis: int) -> "CellBatch":
        box = np.asarray(box, dtype=float)
        dim = box.shape[0]
        edges = [np.linspace(box[i, 0], box[i, 1], cells_per_axis + 1) for i in range(dim)]
        index = np.array(list(itertools.product(range(cells_per_axis), repeat=dim)), dtype=int).reshape(-1, dim)
        lo = np.stack([edges[i][index[:, i]] for i in range(dim)], axis=-1)
        hi = np.stack([edges[i][index[:, i] + 1] for i in range(dim)], axis=-1)
        return cls(lo, hi, np.zeros(len(index), dtype=int))

    @classmethod
    def empty(cls, dim: int) -> "CellBatch":
        return cls(np.zeros((0, dim)), np.zeros((0, dim)), np.zeros(0, dtype=int))

    def __len__(self) -> int:
        return self.lo.shape[0]

    @property
    def dim(self) -> int:
        return self.lo.shape[1]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_width(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @property
    def jacobian(self) -> np.ndarray:
        """Volume factor from [-1, 1]^n to each cell."""
        return np.prod(self.half_width, axis=1)

    def map_nodes(self, nodes: np.ndarray) -> np.ndarray:
        """Reference nodes (q, n) mapped into every cell: (k, q, n)."""
        return self.center[:, None, :] + self.half_width[:, None, :] * nodes[None, :, :]

    def select(self, mask: np.ndarray) -> "CellBatch":
        return CellBatch(self.lo[mask], self.hi[mask], self.depth[mask])

    def split(self) -> "CellBatch":
        """Bisect every cell along every axis into 2^n children."""
        mid = self.center
        los, his = [], []
        for corner in itertools.product((0, 1), repeat=self.dim):
            corner = np.array(corner, dtype=bool)
            los.append(np.where(corner, mid, self.lo))
            his.append(np.where(corner, self.hi, mid))
        lo = np.stack(los, axis=1).reshape(-1, self.dim)
        hi = np.stack(his, axis=1).reshape(-1, self.dim)
        depth = np.repeat(self.depth + 1, 2 ** self.dim)
        return CellBatch(lo, hi, depth)

    def ordering(self) -> np.ndarray:
        """Permutation putting cells in lexicographic order of lower corners, then upper corners."""
        if not len(self):
            return np.zeros(0, dtype=int)
        keys = tuple(self.hi[:, i] for i in reversed(range(self.dim))) + tuple(
            self.lo[:, i] for i in reversed(range(self.dim))
        )
        return np.lexsort(keys)

    @staticmethod
    def concat(*batches: "CellBatch") -> "CellBatch":
        if not batches:
            raise ValueError("concat needs at least one batch")
        nonempty = [b for b in batches if len(b)]
        if not nonempty:
            return batches[0]
        batches = nonempty
        return CellBatch(
            np.concatenate([b.lo for b in batches]),
            np.concatenate([b.hi for b in batches]),
            np.concatenate([b.depth for b in batches]),
        )
