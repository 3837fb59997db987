"""Party partitions defining m-separability, and product vectors across them."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

Partition = tuple[tuple[int, ...], ...]


def canonical_partition(blocks: Iterable[Iterable[int]]) -> Partition:
    """Sort parties inside blocks and blocks by their smallest party."""
    out = [tuple(sorted(int(p) for p in b)) for b in blocks]
    if any(not b for b in out):
        raise ValueError("partition blocks must be nonempty")
    return tuple(sorted(out))


def check_partition(partition: Iterable[Iterable[int]], n: int) -> Partition:
    part = canonical_partition(partition)
    flat = [p for b in part for p in b]
    if sorted(flat) != list(range(n)):
        raise ValueError(f"{part} is not a partition of parties 0..{n - 1}")
    return part


def enumerate_partitions(n: int, m: int) -> list[Partition]:
    """All set partitions of ``{0..n-1}`` whose blocks have at most ``m`` parties.

    Partitions are listed from finest to coarsest (more blocks first), ties
    broken lexicographically.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    found: list[Partition] = []

    def grow(i: int, blocks: list[list[int]]) -> None:
        if i == n:
            found.append(canonical_partition(blocks))
            return
        for b in blocks:
            if len(b) < m:
                b.append(i)
                grow(i + 1, blocks)
                b.pop()
        blocks.append([i])
        grow(i + 1, blocks)
        blocks.pop()

    grow(0, [])
    return sorted(set(found), key=lambda p: (-len(p), p))


def refines(fine: Partition, coarse: Partition) -> bool:
    """True if every block of ``fine`` lies inside some block of ``coarse``."""
    return all(any(set(b) <= set(c) for c in coarse) for b in fine)


@dataclass(frozen=True)
class PartitionScheme:
    """The family of partitions whose product states bound a witness.

    ``m`` is the largest allowed block.  With ``cut`` set, the scheme is the
    single bipartition ``cut | rest``.
    """

    n: int
    m: int
    partitions: tuple[Partition, ...]
    cut: tuple[int, ...] | None = None

    def __post_init__(self):
        if not self.partitions:
            raise ValueError("scheme has no partitions")
        for part in self.partitions:
            check_partition(part, self.n)
            if max(len(b) for b in part) > self.m:
                raise ValueError(f"block larger than m={self.m} in {part}")

    @classmethod
    def m_separable(cls, n: int, m: int = 1) -> "PartitionScheme":
        if n < 2 or not 1 <= m < n:
            raise ValueError(f"need n >= 2 and 1 <= m < n, got n={n}, m={m}")
        return cls(n, m, tuple(enumerate_partitions(n, m)))

    @classmethod
    def bipartition(cls, n: int, cut: Iterable[int]) -> "PartitionScheme":
        side = tuple(sorted({int(i) for i in cut}))
        rest = tuple(i for i in range(n) if i not in side)
        if not side or not rest or any(not 0 <= i < n for i in side):
            raise ValueError(f"cut {side} does not split {n} parties in two")
        part = canonical_partition([side, rest])
        return cls(n, max(len(side), len(rest)), (part,), cut=side)

    def coarsest(self) -> list[Partition]:
        """Partitions not refining another member; their product sets cover the rest."""
        parts = list(dict.fromkeys(self.partitions))
        return [
            p for p in parts if not any(q != p and refines(p, q) for q in parts)
        ]

    def bipartite_cut(self) -> tuple[int, ...] | None:
        """The side-A parties of the single bipartition this scheme represents."""
        if self.cut is not None:
            return self.cut
        if self.n == 2:
            return (0,)
        return None

    def describe(self) -> str:
        if self.cut is not None:
            return "cut=" + ",".join(map(str, self.cut))
        return f"m={self.m}"


def block_layout(
    dims: Sequence[int], partition: Partition
) -> tuple[list[int], tuple[int, ...]]:
    """Party order concatenating the blocks, and the dimension of each block."""
    order = [p for b in partition for p in b]
    return order, tuple(prod(dims[p] for p in b) for b in partition)


def assemble_many(
    dims: Sequence[int], partition: Partition, vectors: Sequence[np.ndarray]
) -> np.ndarray:
    """Tensor block vectors together and reorder to canonical party order.

    ``vectors[k]`` has shape ``(..., dim of block k)``; the result has shape
    ``(..., prod(dims))``.
    """
    dims = tuple(dims)
    order, _ = block_layout(dims, partition)
    out = vectors[0]
    for v in vectors[1:]:
        out = (out[..., :, None] * v[..., None, :]).reshape(*out.shape[:-1], -1)
    lead = out.shape[:-1]
    out = out.reshape(*lead, *(dims[p] for p in order))
    k = len(lead)
    inverse = np.argsort(order)
    out = out.transpose(*range(k), *(k + int(i) for i in inverse))
    return out.reshape(*lead, -1)


@dataclass(frozen=True)
class ProductVector:
    """Pure state that factorizes across the blocks of one partition."""

    dims: tuple[int, ...]
    blocks: tuple[tuple[tuple[int, ...], np.ndarray], ...]

    @property
    def partition(self) -> Partition:
        return tuple(parties for parties, _ in self.blocks)

    @property
    def assembled(self) -> np.ndarray:
        return assemble_many(self.dims, self.partition, [v for _, v in self.blocks])

    def expectation(self, operator: np.ndarray) -> float:
        v = self.assembled
        return float(np.real(np.vdot(v, operator @ v)))

    def to_json(self) -> list[dict]:
        return [
            {"parties": list(parties), "vector": [[z.real, z.imag] for z in vec.tolist()]}
            for parties, vec in self.blocks
        ]


def random_unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Rows distributed uniformly on the unit sphere of C^dim."""
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_block_vectors(
    rng: np.random.Generator, dims: Sequence[int], partition: Partition, count: int
) -> list[np.ndarray]:
    _, bdims = block_layout(dims, partition)
    return [random_unit_vectors(rng, count, d) for d in bdims]
