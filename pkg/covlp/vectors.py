"""Vector types shared by every solver layer.

Dense vectors live in row space (dimension m) and are plain read-only numpy
arrays. Sparse vectors live in column space, which may be exponentially large,
so they are keyed by opaque hashable column identifiers.
"""
from typing import Callable, Dict, Hashable, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np
import numpy.typing as npt

from covlp.exceptions import DomainViolation

ColumnId = Hashable
DenseVec = npt.NDArray[np.float64]


def dense_vec(values: npt.ArrayLike, dimension: Optional[int] = None) -> DenseVec:
    """Validate values as a finite, read-only float64 vector."""
    array = np.array(values, dtype=np.float64).reshape(-1)
    if dimension is not None and array.shape[0] != dimension:
        raise DomainViolation(
            f"Expected dimension {dimension}, received {array.shape[0]}."
        )
    if not np.all(np.isfinite(array)):
        raise DomainViolation(f"Vector entries must be finite: {array.tolist()}")
    array.setflags(write=False)
    return array


def unit_vec(index: int, dimension: int) -> DenseVec:
    """Standard basis vector e_index of the given dimension."""
    array = np.zeros(dimension)
    array[index] = 1.0
    array.setflags(write=False)
    return array


class SparseVec:
    """Nonnegative weights over column identifiers.

    Zero weights are never stored, so len() is the support size.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping[ColumnId, float]] = None):
        self._entries: Dict[ColumnId, float] = {}
        for column, weight in (entries or {}).items():
            self.insert(column, weight)

    @classmethod
    def unit(cls, column: ColumnId, weight: float = 1.0) -> "SparseVec":
        return cls({column: weight})

    def insert(self, column: ColumnId, weight: float):
        """Set the weight of a column, dropping it when the weight is zero."""
        weight = float(weight)
        if not np.isfinite(weight) or weight < 0:
            raise DomainViolation(f"Invalid weight {weight} for column {column!r}")
        if weight == 0:
            self._entries.pop(column, None)
        else:
            self._entries[column] = weight

    def accumulate(self, column: ColumnId, weight: float):
        """Add weight to a column, merging duplicates into one entry."""
        self.insert(column, self._entries.get(column, 0.0) + weight)

    def remove(self, column: ColumnId) -> float:
        """Drop a column and return its weight (zero when absent)."""
        return self._entries.pop(column, 0.0)

    def get(self, column: ColumnId) -> float:
        return self._entries.get(column, 0.0)

    def scaled(self, factor: float) -> "SparseVec":
        """New vector with every weight multiplied by a nonnegative factor."""
        if factor == 0:
            return SparseVec()
        return SparseVec({k: v * factor for k, v in self._entries.items()})

    def copy(self) -> "SparseVec":
        return self.scaled(1.0)

    def dot(self, costs: Callable[[ColumnId], float]) -> float:
        """Weighted sum sum_j costs(j) * x_j over the support."""
        return float(sum(costs(k) * v for k, v in self._entries.items()))

    def total(self) -> float:
        return float(sum(self._entries.values()))

    @property
    def support(self) -> Tuple[ColumnId, ...]:
        return tuple(self._entries)

    def items(self) -> Iterable[Tuple[ColumnId, float]]:
        return self._entries.items()

    def __iter__(self) -> Iterator[ColumnId]:
        return iter(self._entries)

    def __contains__(self, column: object) -> bool:
        return column in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self) -> str:
        return f"SparseVec({self._entries!r})"
