"""Sparse/dense feature vectors, concatenation, and block bookkeeping.

A FeatureVector is the unit record flowing out of every feature stage and
into every model. Assembled vectors keep a block map (name, offset, length)
so tree importances can be attributed back to the source columns.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse as sp

from .errors import DataError


class FeatureVector:
    """Fixed-dimension real vector, stored dense or as sorted (index, value) pairs.

    Sparse form never carries explicit zeros and indices are strictly
    increasing. Instances are immutable.
    """

    __slots__ = ("dim", "indices", "values", "_dense")

    def __init__(self, dim, indices=None, values=None, dense=None):
        if dim < 0:
            raise DataError("vector dimension must be nonnegative")
        self.dim = int(dim)
        if dense is not None:
            arr = np.asarray(dense, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != self.dim:
                raise DataError("dense payload does not match declared dimension")
            arr = arr.copy()
            arr.flags.writeable = False
            self._dense = arr
            self.indices = None
            self.values = None
        else:
            idx = np.asarray(indices if indices is not None else [], dtype=np.int64)
            val = np.asarray(values if values is not None else [], dtype=np.float64)
            if idx.shape != val.shape or idx.ndim != 1:
                raise DataError("sparse indices and values must be 1-d and aligned")
            order = np.argsort(idx, kind="stable")
            idx, val = idx[order], val[order]
            keep = val != 0.0
            idx, val = idx[keep], val[keep]
            if idx.size:
                if idx[0] < 0 or idx[-1] >= self.dim:
                    raise DataError("sparse index out of range")
                if np.any(np.diff(idx) == 0):
                    raise DataError("duplicate sparse index")
            idx.flags.writeable = False
            val.flags.writeable = False
            self.indices = idx
            self.values = val
            self._dense = None

    @classmethod
    def dense(cls, values):
        values = np.asarray(values, dtype=np.float64)
        return cls(values.shape[0], dense=values)

    @classmethod
    def sparse(cls, dim, indices, values):
        return cls(dim, indices=indices, values=values)

    @classmethod
    def empty(cls, dim):
        return cls(dim, indices=[], values=[])

    @property
    def is_sparse(self):
        return self._dense is None

    @property
    def nnz(self):
        if self.is_sparse:
            return int(self.indices.shape[0])
        return int(np.count_nonzero(self._dense))

    def to_dense(self):
        if self._dense is not None:
            return self._dense.copy()
        out = np.zeros(self.dim, dtype=np.float64)
        out[self.indices] = self.values
        return out

    def items(self):
        """Nonzero (index, value) pairs in index order."""
        if self.is_sparse:
            return list(zip(self.indices.tolist(), self.values.tolist()))
        idx = np.nonzero(self._dense)[0]
        return list(zip(idx.tolist(), self._dense[idx].tolist()))

    def slice(self, offset, length):
        """Sub-vector of [offset, offset+length); inverse of assemble."""
        if offset < 0 or length < 0 or offset + length > self.dim:
            raise DataError("slice out of range")
        if not self.is_sparse:
            return FeatureVector.dense(self._dense[offset : offset + length])
        lo = np.searchsorted(self.indices, offset, side="left")
        hi = np.searchsorted(self.indices, offset + length, side="left")
        return FeatureVector.sparse(
            length, self.indices[lo:hi] - offset, self.values[lo:hi]
        )

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        if self.dim != other.dim:
            return False
        return self.items() == other.items()

    def __hash__(self):
        return hash((self.dim, tuple(self.items())))

    def __repr__(self):
        if self.is_sparse:
            body = ", ".join(f"{i}: {v:g}" for i, v in self.items())
            return f"FeatureVector(dim={self.dim}, sparse={{{body}}})"
        return f"FeatureVector(dim={self.dim}, dense={self._dense.tolist()})"


@dataclass(frozen=True)
class Block:
    name: str
    offset: int
    length: int


class BlockMap:
    """Ordered (name, offset, length) layout of an assembled vector."""

    def __init__(self, blocks):
        self.blocks = list(blocks)
        offset = 0
        for b in self.blocks:
            if b.offset != offset or b.length < 0:
                raise DataError("block map offsets must tile the vector contiguously")
            offset += b.length
        self.dim = offset

    @classmethod
    def from_parts(cls, names, lengths):
        blocks, offset = [], 0
        for name, length in zip(names, lengths):
            blocks.append(Block(name, offset, int(length)))
            offset += int(length)
        return cls(blocks)

    def names(self):
        return [b.name for b in self.blocks]

    def to_json(self):
        return [{"name": b.name, "offset": b.offset, "length": b.length} for b in self.blocks]

    @classmethod
    def from_json(cls, doc):
        return cls(Block(d["name"], d["offset"], d["length"]) for d in doc)

    def __eq__(self, other):
        return isinstance(other, BlockMap) and self.blocks == other.blocks

    def __len__(self):
        return len(self.blocks)


def part_length(part):
    """Dimension contributed by one assemble part (scalars count as 1)."""
    if isinstance(part, FeatureVector):
        return part.dim
    return 1


def assemble(parts, block_map=None):
    """Concatenate scalars and FeatureVectors into one sparse FeatureVector.

    When block_map is given, each part must match its declared block length;
    otherwise the layout is implied by the parts themselves. Null scalars are
    rejected: numeric features must be cleaned upstream.
    """
    lengths = []
    for part in parts:
        if not isinstance(part, FeatureVector):
            if part is None or (isinstance(part, float) and np.isnan(part)):
                raise DataError("null scalar passed to assemble")
        lengths.append(part_length(part))
    if block_map is not None:
        if len(lengths) != len(block_map.blocks) or any(
            n != b.length for n, b in zip(lengths, block_map.blocks)
        ):
            raise DataError("part dimensions do not match the fitted block map")
    indices, values, offset = [], [], 0
    for part, length in zip(parts, lengths):
        if isinstance(part, FeatureVector):
            if part.is_sparse:
                indices.append(part.indices + offset)
                values.append(part.values)
            else:
                nz = np.nonzero(part._dense)[0]
                indices.append(nz + offset)
                values.append(part._dense[nz])
        else:
            value = float(part)
            if value != 0.0:
                indices.append(np.array([offset], dtype=np.int64))
                values.append(np.array([value], dtype=np.float64))
        offset += length
    if indices:
        idx = np.concatenate(indices)
        val = np.concatenate(values)
    else:
        idx, val = [], []
    return FeatureVector.sparse(offset, idx, val)


def stack_vectors(vectors, dense_threshold=0.25):
    """Stack FeatureVectors of equal dimension into a 2-d training matrix.

    Returns a dense ndarray when the occupancy is high, a CSR matrix
    otherwise; models accept both.
    """
    vectors = list(vectors)
    if not vectors:
        raise DataError("cannot stack zero vectors")
    dim = vectors[0].dim
    for v in vectors:
        if v.dim != dim:
            raise DataError("vectors disagree on dimension")
    nnz = sum(v.nnz for v in vectors)
    n = len(vectors)
    if dim == 0:
        return np.zeros((n, 0), dtype=np.float64)
    if nnz >= dense_threshold * n * dim:
        return np.vstack([v.to_dense() for v in vectors])
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = np.empty(nnz, dtype=np.int64)
    data = np.empty(nnz, dtype=np.float64)
    pos = 0
    for row, v in enumerate(vectors):
        pairs = v.items() if not v.is_sparse else None
        if v.is_sparse:
            k = v.indices.shape[0]
            indices[pos : pos + k] = v.indices
            data[pos : pos + k] = v.values
        else:
            k = len(pairs)
            for j, (i, x) in enumerate(pairs):
                indices[pos + j] = i
                data[pos + j] = x
        pos += k
        indptr[row + 1] = pos
    return sp.csr_matrix((data, indices, indptr), shape=(n, dim))
