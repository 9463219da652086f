import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import gcd
from typing import Iterable, Iterator, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from kuramoto_certify.exceptions import DisconnectedGraphError, DomainError
from kuramoto_certify.schemas import Connectivity

logger = logging.getLogger("kuramoto_certify.graph")


@dataclass(frozen=True, eq=False)
class Graph:
    """
    无向无权网络：对称 0/1 邻接矩阵 + 统一的自环标记。
    构造后不可变，可在线程间共享。
    """

    adjacency: np.ndarray
    self_loops: bool = False

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise DomainError(f"adjacency must be a non-empty square matrix, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise DomainError("adjacency matrix is not symmetric")
        np.fill_diagonal(adj, bool(self.self_loops))
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "self_loops", bool(self.self_loops))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def coupling(self) -> np.ndarray:
        """动力学使用的浮点耦合矩阵，对角线恒为 0（自环项 sin(0) 不参与求和）"""
        w = self.adjacency.astype(float)
        np.fill_diagonal(w, 0.0)
        w.setflags(write=False)
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """含对角线的 A_{jk}，用于能量与证书中的双重求和"""
        w = self.adjacency.astype(float)
        w.setflags(write=False)
        return w

    @cached_property
    def non_edges(self) -> np.ndarray:
        """(1 − A_{jk})，无自环时排除 k = j"""
        w = 1.0 - self.adjacency.astype(float)
        np.fill_diagonal(w, 0.0)
        w.setflags(write=False)
        return w

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1) - (1 if self.self_loops else 0)

    @property
    def is_regular(self) -> bool:
        return bool(np.all(self.degrees == self.degrees[0]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.self_loops == other.self_loops and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self) -> int:
        return hash((self.n, self.self_loops, np.packbits(self.adjacency).tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, self_loops={self.self_loops}, edges={self.edge_count})"

    @property
    def edge_count(self) -> int:
        return int(np.triu(self.adjacency, k=1).sum())


class GraphEngine:
    """网络构造、变换与连通度度量"""

    @staticmethod
    def component_count(g: Graph) -> int:
        n_components, _ = connected_components(csr_matrix(g.adjacency), directed=False)
        return int(n_components)

    @staticmethod
    def ensure_connected(g: Graph) -> Graph:
        count = GraphEngine.component_count(g)
        if count != 1:
            raise DisconnectedGraphError(count)
        return g

    @staticmethod
    def from_adjacency(matrix, self_loops: bool = False, check_connected: bool = True) -> Graph:
        g = Graph(np.asarray(matrix), self_loops=self_loops)
        return GraphEngine.ensure_connected(g) if check_connected else g

    @staticmethod
    def complete(n: int, self_loops: bool = False) -> Graph:
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        return Graph(np.ones((n, n), dtype=bool), self_loops=self_loops)

    @staticmethod
    def circulant(n: int, offsets: Iterable[int]) -> Graph:
        """
        循环图 C_n(S)：节点 j 与 j±s (mod n) 相连
        """
        offsets = sorted(set(int(s) for s in offsets))
        if n < 3:
            raise DomainError(f"circulant graphs need n >= 3, got {n}")
        if not offsets:
            raise DomainError("offset set must be non-empty")
        bad = [s for s in offsets if s <= 0 or s >= n]
        if bad:
            raise DomainError(f"offsets must lie in 1..{n - 1}, got {bad}")

        adj = np.zeros((n, n), dtype=bool)
        idx = np.arange(n)
        for s in offsets:
            adj[idx, (idx + s) % n] = True
            adj[idx, (idx - s) % n] = True

        g = Graph(adj, self_loops=False)
        if gcd(n, *offsets) != 1:
            raise DisconnectedGraphError(gcd(n, *offsets))
        return g

    @staticmethod
    def cycle(n: int) -> Graph:
        return GraphEngine.circulant(n, {1})

    @staticmethod
    def from_descriptor(descriptor: str) -> Graph:
        """
        解析简写描述符：complete:6、cycle:5、circulant:12:1,2,3、twin-c4:3
        """
        parts = descriptor.strip().split(":")
        kind = parts[0].lower()
        try:
            if kind == "complete" and len(parts) == 2:
                return GraphEngine.complete(int(parts[1]))
            if kind == "cycle" and len(parts) == 2:
                return GraphEngine.cycle(int(parts[1]))
            if kind == "circulant" and len(parts) == 3:
                return GraphEngine.circulant(int(parts[1]), [int(s) for s in parts[2].split(",") if s])
            if kind == "twin-c4" and len(parts) == 2:
                return GraphEngine.twin(GraphEngine.cycle(4), int(parts[1]))
        except ValueError as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed graph descriptor {descriptor!r}") from exc
        raise DomainError(f"unknown graph descriptor {descriptor!r}")

    @staticmethod
    def connectivity(g: Graph) -> Connectivity:
        """
        μ = 最小非对角度数 / (n−1)，μ̃ = (μ(n−1)+1)/n，全部用整数精确计算
        """
        if g.n < 2:
            raise DomainError(f"connectivity needs n >= 2, got {g.n}")
        GraphEngine.ensure_connected(g)
        min_degree = int(g.degrees.min())
        return Connectivity.from_min_degree(g.n, min_degree)

    @staticmethod
    def add_self_loops(g: Graph) -> Graph:
        if g.self_loops:
            logger.warning("graph already carries self-loops; add_self_loops is a no-op")
            return g
        return Graph(g.adjacency, self_loops=True)

    @staticmethod
    def twin(g: Graph, tau: int) -> Graph:
        """
        字典积 G[K_τ]：每个节点替换为 τ-团，团间连边当且仅当父节点相邻
        节点 (p, i) 的编号为 p·τ + i
        """
        if tau < 1:
            raise DomainError(f"tau must be >= 1, got {tau}")
        if g.self_loops:
            raise DomainError("twin expects a graph without self-loops")
        if tau == 1:
            return g
        block = np.ones((tau, tau), dtype=bool)
        between = np.kron(g.adjacency, block)
        within = np.kron(np.eye(g.n, dtype=bool), block)
        return Graph(between | within, self_loops=False)

    @staticmethod
    def twin_connectivity(base: Connectivity, tau: int) -> Fraction:
        """由父图连通度推出 G[K_τ] 的连通度 (τ−1+τ·μ(n−1)) / (nτ−1)"""
        if tau < 1:
            raise DomainError(f"tau must be >= 1, got {tau}")
        return Fraction(tau - 1 + tau * base.min_degree, base.n * tau - 1)

    @staticmethod
    def sync_sufficient_mu(n: int) -> Fraction:
        """全局同步的充分连通度 ⌊3n/4 − 1⌋ / (n−1)，严格大于该值即保证同步"""
        if n < 2:
            raise DomainError(f"n must be >= 2, got {n}")
        return Fraction((3 * n) // 4 - 1, n - 1)

    @staticmethod
    def sync_sufficient_mu_continuous(n: int) -> float:
        if n < 2:
            raise DomainError(f"n must be >= 2, got {n}")
        return (0.75 * n - 1.0) / (n - 1.0)

    @staticmethod
    def circulant_offset_level(n: int, degree: int) -> Iterator[Tuple[int, ...]]:
        """度数为 degree 的全部偏移集合；奇数度只在 n 为偶数时出现（含 n/2）"""
        half = n // 2
        even = n % 2 == 0
        plain = list(range(1, half if even else half + 1))
        if degree % 2 == 0:
            yield from combinations(plain, degree // 2)
        elif even:
            for combo in combinations(plain, (degree - 1) // 2):
                yield combo + (half,)

    @staticmethod
    def circulant_offset_sets(n: int) -> Iterator[Tuple[int, Tuple[int, ...]]]:
        """按度数从高到低枚举 {1..⌊n/2⌋} 的偏移子集，产出 (degree, offsets)"""
        for degree in range(n - 1, 1, -1):
            for combo in GraphEngine.circulant_offset_level(n, degree):
                yield degree, combo
