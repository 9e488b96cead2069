"""Young-diagram combinatorics.

A Partition stores non-increasing row lengths.  Boxes are addressed by
1-based (i, j) = (row, position in row).  Localization call sites map the
pair onto the plane at hand:

  * 12-plane diagrams: (a, b) = (j, i), so rows extend along eps_1 and the
    row index b counts eps_2 steps (weight u_a q1^{a-1} q2^{b-1});
  * 24-plane diagrams: rows along eps_2, columns along eps_4;
  * 34-plane diagrams: rows along eps_3, columns along eps_4.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

from .errors import InvalidData


class Partition:
    """Non-increasing tuple of positive integers."""

    __slots__ = ("rows",)

    def __init__(self, rows=()):
        rows = tuple(int(r) for r in rows if r != 0)
        if any(r < 0 for r in rows):
            raise InvalidData(f"negative row in {rows}")
        if any(rows[k] < rows[k + 1] for k in range(len(rows) - 1)):
            raise InvalidData(f"rows not non-increasing: {rows}")
        self.rows = rows

    def __eq__(self, other):
        return isinstance(other, Partition) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"Partition{self.rows}"

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def size(self) -> int:
        return sum(self.rows)

    def row(self, i: int) -> int:
        """lambda_i with lambda_i = 0 beyond the last row (1-based)."""
        return self.rows[i - 1] if 1 <= i <= len(self.rows) else 0

    def transpose(self) -> "Partition":
        if not self.rows:
            return Partition()
        cols = [0] * self.rows[0]
        for r in self.rows:
            for j in range(r):
                cols[j] += 1
        return Partition(cols)

    def col(self, j: int) -> int:
        """lambda^t_j, the length of column j."""
        return sum(1 for r in self.rows if r >= j)

    def boxes(self) -> Iterator[tuple[int, int]]:
        for i, r in enumerate(self.rows, start=1):
            for j in range(1, r + 1):
                yield (i, j)

    def arm(self, i: int, j: int) -> int:
        return self.row(i) - j

    def leg(self, i: int, j: int) -> int:
        return self.col(j) - i

    def hook(self, i: int, j: int) -> int:
        return self.arm(i, j) + self.leg(i, j) + 1

    def addable(self) -> list[tuple[int, int]]:
        """Corners (i, j) where a box may be appended."""
        out = []
        for i in range(1, len(self.rows) + 2):
            j = self.row(i) + 1
            if i == 1 or self.row(i - 1) >= j:
                out.append((i, j))
        return out

    def removable(self) -> list[tuple[int, int]]:
        out = []
        for i in range(1, len(self.rows) + 1):
            if self.row(i) > self.row(i + 1):
                out.append((i, self.row(i)))
        return out

    def add_box(self, corner: tuple[int, int]) -> "Partition":
        i, j = corner
        if corner not in self.addable():
            raise InvalidData(f"{corner} is not addable on {self}")
        rows = list(self.rows)
        if i == len(rows) + 1:
            rows.append(1)
        else:
            rows[i - 1] += 1
        return Partition(rows)

    def remove_box(self, corner: tuple[int, int]) -> "Partition":
        i, j = corner
        if corner not in self.removable():
            raise InvalidData(f"{corner} is not removable on {self}")
        rows = list(self.rows)
        rows[i - 1] -= 1
        return Partition(rows)


@lru_cache(maxsize=None)
def _partitions_with_cap(size: int, cap: int) -> tuple[tuple[int, ...], ...]:
    if size == 0:
        return ((),)
    out = []
    for first in range(min(size, cap), 0, -1):
        for rest in _partitions_with_cap(size - first, first):
            out.append((first,) + rest)
    return tuple(out)


def enumerate_partitions(size: int) -> list[Partition]:
    """All partitions of `size` in descending lexicographic order."""
    if size < 0:
        raise InvalidData("size must be >= 0")
    return [Partition(rows) for rows in _partitions_with_cap(size, size if size else 1)]


def partition_count(size: int) -> int:
    return len(_partitions_with_cap(size, size if size else 1))


class TupleOfPartitions:
    """Ordered N-tuple of partitions labeling a torus fixed point."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = tuple(p if isinstance(p, Partition) else Partition(p) for p in parts)

    def __eq__(self, other):
        return isinstance(other, TupleOfPartitions) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        return f"TupleOfPartitions{tuple(p.rows for p in self.parts)}"

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, alpha: int) -> Partition:
        return self.parts[alpha]

    @property
    def size(self) -> int:
        return sum(p.size for p in self.parts)

    def boxes(self) -> Iterator[tuple[int, int, int]]:
        """Yield (alpha, a, b), alpha = 1..N, a along eps_1, b along eps_2."""
        for alpha, lam in enumerate(self.parts, start=1):
            for i, j in lam.boxes():
                yield (alpha, j, i)

    def d_omega(self, omega: int) -> int:
        """Number of boxes with Z_N charge alpha + b - 1 = omega mod N."""
        n = len(self.parts)
        return sum(1 for alpha, _a, b in self.boxes() if (alpha + b - 1) % n == omega % n)


def enumerate_tuples(n_colors: int, total: int) -> list[TupleOfPartitions]:
    """All N-tuples of partitions with total size `total`."""
    if n_colors < 1:
        raise InvalidData("n_colors must be >= 1")
    if total < 0:
        raise InvalidData("total must be >= 0")

    def rec(slots: int, budget: int):
        if slots == 1:
            for lam in enumerate_partitions(budget):
                yield (lam,)
            return
        for here in range(budget + 1):
            for lam in enumerate_partitions(here):
                for rest in rec(slots - 1, budget - here):
                    yield (lam,) + rest

    return [TupleOfPartitions(parts) for parts in rec(n_colors, total)]


def diagram_stats(lam: Partition) -> dict:
    """Transpose, arm/hook multisets, contents and boundary boxes of lam."""
    boxes = list(lam.boxes())
    return {
        "transpose": lam.transpose(),
        "arms": {bx: lam.arm(*bx) for bx in boxes},
        "hooks": {bx: lam.hook(*bx) for bx in boxes},
        "contents": {bx: (bx[1] - 1, bx[0] - 1) for bx in boxes},
        "addable": lam.addable(),
        "removable": lam.removable(),
    }
