"""Empirical types and type classes for fixed-composition code analysis.

A type is the exact vector of symbol counts of one or several aligned
words; everything here is integer-exact (big-int multinomials, no float
counting).  Enumeration follows ascending lexicographic order of the
flattened count tensor, and the array-based enumeration used by the
exponent solver is guaranteed to match the generator order row for row.

Joint-type enumeration is protected by desk-scale guards: at most
``MAX_ENUM_CELLS`` cells and denominator at most ``MAX_ENUM_DENOM``.
Larger requests raise ``ScaleGuardError`` instead of thrashing; callers
who know what they are doing can pass explicit overrides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import ConstructionError, ScaleGuardError, ValidationError
from .probability import Alphabet, JointDist

MAX_ENUM_CELLS = 32
MAX_ENUM_DENOM = 12


@dataclass(frozen=True)
class SymbolSequence:
    """A word over one alphabet, stored as a tuple of symbol indices."""

    alphabet: Alphabet
    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if len(self.symbols) == 0:
            raise ValidationError("SymbolSequence must have length >= 1")
        if any(s < 0 or s >= self.alphabet.size for s in self.symbols):
            raise ValidationError(
                f"symbol out of range for alphabet {self.alphabet.label!r}"
            )

    def __len__(self) -> int:
        return len(self.symbols)

    def array(self) -> np.ndarray:
        return np.asarray(self.symbols, dtype=np.intp)


@dataclass(frozen=True)
class TypeVector:
    """Exact joint composition of aligned words: counts[cell] sums to n."""

    axes: tuple[Alphabet, ...]
    counts: np.ndarray = field(repr=False)
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        shape = tuple(a.size for a in self.axes)
        counts = np.asarray(self.counts)
        if counts.shape != shape:
            raise ValidationError(f"TypeVector: expected shape {shape}, got {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            raise ValidationError("TypeVector: counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValidationError("TypeVector: negative counts")
        if self.n < 1:
            raise ValidationError("TypeVector: n must be >= 1")
        if int(counts.sum()) != self.n:
            raise ValidationError(
                f"TypeVector: counts sum {int(counts.sum())} != n {self.n}"
            )
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a.label for a in self.axes)

    def key(self) -> tuple:
        """Hashable identity: labels, n and the flat count tuple."""
        return (self.labels, self.n, tuple(int(c) for c in self.counts.ravel()))

    def to_joint(self) -> JointDist:
        return JointDist(self.axes, self.counts / self.n)


def empirical_type(seqs) -> TypeVector:
    """Joint type of one or more aligned words.

    The result's axes are the sequences' alphabets in the order given.
    """
    seqs = list(seqs)
    if not seqs:
        raise ValidationError("empirical_type: need at least one sequence")
    n = len(seqs[0])
    if any(len(s) != n for s in seqs):
        raise ValidationError("empirical_type: sequences must have equal length")
    axes = tuple(s.alphabet for s in seqs)
    shape = tuple(a.size for a in axes)
    flat = np.zeros(int(np.prod(shape)), dtype=np.int64)
    idx = np.ravel_multi_index(tuple(s.array() for s in seqs), shape)
    np.add.at(flat, idx, 1)
    return TypeVector(axes, flat.reshape(shape), n)


def _check_enum_scale(num_cells: int, n: int, max_cells, max_denom) -> None:
    max_cells = MAX_ENUM_CELLS if max_cells is None else max_cells
    max_denom = MAX_ENUM_DENOM if max_denom is None else max_denom
    if num_cells > max_cells:
        raise ScaleGuardError(
            f"joint type enumeration over {num_cells} cells exceeds the "
            f"guard ({max_cells}); pass max_cells to override"
        )
    if n > max_denom:
        raise ScaleGuardError(
            f"type denominator {n} exceeds the guard ({max_denom}); "
            "pass max_denom to override"
        )


def _compositions(num_cells: int, total: int) -> Iterator[tuple[int, ...]]:
    if num_cells == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(num_cells - 1, total - first):
            yield (first,) + rest


def enumerate_types(n: int, axes, max_cells=None, max_denom=None) -> Iterator[TypeVector]:
    """Lazily yield every type with denominator n over the product alphabet.

    Order is ascending lexicographic in the flattened count tensor, so the
    first type is all mass on the last cell.  Deterministic by design; the
    solver's array enumeration mirrors this order exactly.
    """
    axes = tuple(axes)
    if n < 1:
        raise ValidationError("enumerate_types: n must be >= 1")
    shape = tuple(a.size for a in axes)
    num_cells = int(np.prod(shape))
    _check_enum_scale(num_cells, n, max_cells, max_denom)
    for flat in _compositions(num_cells, n):
        counts = np.asarray(flat, dtype=np.int64).reshape(shape)
        yield TypeVector(axes, counts, n)


def enumerate_lattice(denominator: int, axes, max_cells=None, max_denom=None
                      ) -> Iterator[JointDist]:
    """Rational-grid joint distributions: every type / denominator."""
    for t in enumerate_types(denominator, axes, max_cells=max_cells,
                             max_denom=max_denom):
        yield t.to_joint()


def compositions_count(num_cells: int, total: int) -> int:
    return math.comb(total + num_cells - 1, num_cells - 1)


def compositions_array(num_cells: int, total: int) -> np.ndarray:
    """All compositions of ``total`` into ``num_cells`` parts as a uint8
    matrix, rows in the same ascending lexicographic order as
    ``enumerate_types``.  Built bottom-up keeping one level at a time.
    """
    if total > 255:
        raise ValidationError("compositions_array: total too large for uint8")
    if num_cells == 1:
        return np.asarray([[total]], dtype=np.uint8)
    # prev[t] holds all compositions of t into c cells, starting at c=1
    prev = {t: np.asarray([[t]], dtype=np.uint8) for t in range(total + 1)}
    for c in range(2, num_cells + 1):
        cur = {}
        tops = range(total + 1) if c < num_cells else (total,)
        for t in tops:
            blocks = []
            for first in range(t + 1):
                rest = prev[t - first]
                block = np.empty((rest.shape[0], c), dtype=np.uint8)
                block[:, 0] = first
                block[:, 1:] = rest
                blocks.append(block)
            cur[t] = np.concatenate(blocks, axis=0)
        prev = cur
    return prev[total]


def type_class_size(t: TypeVector) -> int:
    """Number of aligned symbol arrangements with exactly this composition
    (an exact big-int multinomial coefficient)."""
    size = math.factorial(t.n)
    for c in t.counts.ravel():
        size //= math.factorial(int(c))
    return size


def in_type_class(t: TypeVector, seqs) -> bool:
    """Exact membership: do these aligned words have joint type ``t``?"""
    seqs = list(seqs)
    if len(seqs) != len(t.axes):
        raise ValidationError("in_type_class: sequence count != axis count")
    if any(len(s) != t.n for s in seqs):
        return False
    e = empirical_type(seqs)
    if tuple(a.size for a in e.axes) != tuple(a.size for a in t.axes):
        raise ValidationError("in_type_class: alphabet size mismatch")
    return bool(np.array_equal(e.counts, t.counts))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_conditional_type_class(p_cond: TypeVector, u: SymbolSequence,
                                  rng) -> SymbolSequence:
    """Uniform draw from the conditional type class along a fixed word u.

    ``p_cond`` is a joint (U, X) type; within each u-section the mandated
    multiset of X symbols is placed by a uniformly random permutation,
    which makes every compatible word equally likely.  ``rng`` is either
    an integer seed or a numpy Generator.
    """
    if len(p_cond.axes) != 2:
        raise ValidationError("sample_conditional_type_class: p_cond must be (U, X)")
    if len(u) != p_cond.n:
        raise ValidationError("sample_conditional_type_class: u length != type n")
    if u.alphabet.size != p_cond.axes[0].size:
        raise ValidationError("sample_conditional_type_class: u alphabet mismatch")
    rng = _as_rng(rng)
    u_arr = u.array()
    u_counts = np.bincount(u_arr, minlength=u.alphabet.size)
    if not np.array_equal(u_counts, p_cond.counts.sum(axis=1)):
        raise ConstructionError(
            "sample_conditional_type_class: the conditional counts are "
            "infeasible along this u (its tally does not match the type's "
            "U-marginal)"
        )
    out = np.empty(p_cond.n, dtype=np.intp)
    for a in range(u.alphabet.size):
        positions = np.flatnonzero(u_arr == a)
        if positions.size == 0:
            continue
        section = np.repeat(np.arange(p_cond.axes[1].size), p_cond.counts[a])
        out[positions] = rng.permutation(section)
    return SymbolSequence(p_cond.axes[1], tuple(int(s) for s in out))
