"""Windowed bi-infinite operator matrices with algebra entries.

A matrix stores the square window |row|, |col| <= radius (doubled units),
a support descriptor, and ``valid2``: entries with both indices inside the
valid square are exact values of the ideal infinite matrix.  Products shrink
validity according to the support calculus; identity checks always state
the window they certify.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import Algebra, block_norms, opposite
from .indices import Parity, max_index2, window2
from .support import (
    INF,
    Support,
    matvec_reach2,
    matvec_valid2,
    product_support,
    product_valid2,
    vecmat_valid2,
)


class WindowExhausted(RuntimeError):
    """Raised when a computation cannot certify the requested window."""

    def __init__(self, msg: str, min_radius2: int | None = None):
        super().__init__(msg)
        self.min_radius2 = min_radius2


def _mm_blocks(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Block matrix product of (r,k,d,d) with (k,c,d,d) arrays."""
    r, k, d, _ = A.shape
    k2, c, _, _ = B.shape
    assert k == k2
    A2 = A.transpose(0, 2, 1, 3).reshape(r * d, k * d)
    B2 = B.transpose(0, 2, 1, 3).reshape(k * d, c * d)
    C2 = A2 @ B2
    return np.ascontiguousarray(C2.reshape(r, d, c, d).transpose(0, 2, 1, 3))


@dataclass(frozen=True)
class OpMatrix:
    alg: Algebra
    row_parity: Parity
    col_parity: Parity
    radius2: int
    entries: np.ndarray = field(repr=False)  # (rows, cols, d, d)
    support: Support
    valid2: int

    def __post_init__(self):
        rows = max_index2(self.row_parity, self.radius2) + 1
        cols = max_index2(self.col_parity, self.radius2) + 1
        if self.entries.shape != (rows, cols, self.alg.dim, self.alg.dim):
            raise ValueError(
                "entries shape %s, expected %s"
                % (self.entries.shape, (rows, cols, self.alg.dim, self.alg.dim))
            )
        if self.valid2 > self.radius2:
            object.__setattr__(self, "valid2", self.radius2)

    # -- window helpers -------------------------------------------------
    @property
    def row_idx2(self) -> np.ndarray:
        return window2(self.row_parity, self.radius2)

    @property
    def col_idx2(self) -> np.ndarray:
        return window2(self.col_parity, self.radius2)

    def rpos(self, n2: int) -> int:
        m = max_index2(self.row_parity, self.radius2)
        return (n2 + m) // 2

    def cpos(self, m2: int) -> int:
        m = max_index2(self.col_parity, self.radius2)
        return (m2 + m) // 2

    def entry(self, n2: int, m2: int) -> np.ndarray:
        return self.entries[self.rpos(n2), self.cpos(m2)]

    def is_square(self) -> bool:
        return self.row_parity == self.col_parity

    # -- basic algebra ---------------------------------------------------
    def _check_like(self, other: "OpMatrix"):
        if self.row_parity != other.row_parity or self.col_parity != other.col_parity:
            raise ValueError("parity mismatch in matrix sum")
        if self.alg.dim != other.alg.dim:
            raise ValueError("algebra dimension mismatch")

    def shrink_to(self, radius2: int) -> "OpMatrix":
        if radius2 > self.radius2:
            raise ValueError("shrink_to cannot grow the window")
        if radius2 == self.radius2:
            return self
        rm, cm = max_index2(self.row_parity, radius2), max_index2(self.col_parity, radius2)
        r0, c0 = self.rpos(-rm), self.cpos(-cm)
        ent = self.entries[r0 : r0 + rm + 1, c0 : c0 + cm + 1]
        return OpMatrix(
            self.alg, self.row_parity, self.col_parity, radius2,
            np.ascontiguousarray(ent), self.support, min(self.valid2, radius2),
        )

    def __add__(self, other: "OpMatrix") -> "OpMatrix":
        self._check_like(other)
        r2 = min(self.radius2, other.radius2)
        a, b = self.shrink_to(r2), other.shrink_to(r2)
        return OpMatrix(
            self.alg, self.row_parity, self.col_parity, r2,
            a.entries + b.entries,
            a.support.union(b.support),
            min(a.valid2, b.valid2),
        )

    def __sub__(self, other: "OpMatrix") -> "OpMatrix":
        return self + (-other)

    def __neg__(self) -> "OpMatrix":
        return replace(self, entries=-self.entries)

    def __mul__(self, c: float) -> "OpMatrix":
        return replace(self, entries=c * self.entries)

    __rmul__ = __mul__

    def scale_left(self, K: np.ndarray) -> "OpMatrix":
        """Entrywise left multiplication by a constant algebra element."""
        return replace(self, entries=np.einsum("ab,rcbe->rcae", K, self.entries))

    def scale_right(self, K: np.ndarray) -> "OpMatrix":
        return replace(self, entries=np.einsum("rcab,be->rcae", self.entries, K))

    def __matmul__(self, other):
        if isinstance(other, OpVector):
            return _mat_vec(self, other)
        if self.col_parity != other.row_parity:
            raise ValueError("parity mismatch: cols %s vs rows %s" % (self.col_parity, other.row_parity))
        if self.alg.dim != other.alg.dim:
            raise ValueError("algebra dimension mismatch")
        r2 = min(self.radius2, other.radius2)
        A, B = self.shrink_to(r2), other.shrink_to(r2)
        ent = _mm_blocks(A.entries, B.entries)
        sup = product_support(A.support, B.support)
        val = product_valid2(A.support, A.valid2, B.support, B.valid2)
        return OpMatrix(self.alg, self.row_parity, other.col_parity, r2, ent, sup, min(val, r2))

    def transpose(self) -> "OpMatrix":
        ent = np.ascontiguousarray(self.entries.transpose(1, 0, 2, 3))
        return OpMatrix(
            self.alg, self.col_parity, self.row_parity, self.radius2,
            ent, self.support.transposed(), self.valid2,
        )

    def transpose_opp(self) -> "OpMatrix":
        ent = np.ascontiguousarray(self.entries.transpose(1, 0, 3, 2))
        return OpMatrix(
            self.alg, self.col_parity, self.row_parity, self.radius2,
            ent, self.support.transposed(), self.valid2,
        )

    def map_entries(self, fn) -> "OpMatrix":
        """Apply an algebra homomorphism entrywise (validity preserved)."""
        ent = fn(self.entries)
        return replace(self, entries=ent)

    # -- measurement -----------------------------------------------------
    def window_block(self, w2: int) -> np.ndarray:
        if w2 > self.radius2:
            raise WindowExhausted(
                "window %s exceeds stored radius %s" % (w2 / 2, self.radius2 / 2)
            )
        rm, cm = max_index2(self.row_parity, w2), max_index2(self.col_parity, w2)
        r0, c0 = self.rpos(-rm), self.cpos(-cm)
        return self.entries[r0 : r0 + rm + 1, c0 : c0 + cm + 1]

    def sup_norm(self, w2: int | None = None) -> float:
        blk = self.window_block(self.radius2 if w2 is None else w2)
        return float(np.max(block_norms(blk))) if blk.size else 0.0

    def max_growth(self) -> int:
        """Radius estimate helper: doubled radius needed to stay meaningful."""
        return self.radius2


def residual(A: OpMatrix, B: OpMatrix, window2_: int | None = None) -> float:
    """Sup of entry operator norms of A - B over |n|,|m| <= window."""
    if A.row_parity != B.row_parity or A.col_parity != B.col_parity:
        raise ValueError("parity mismatch in residual")
    w2 = min(A.valid2, B.valid2) if window2_ is None else window2_
    if w2 < 0 or w2 > min(A.valid2, B.valid2):
        raise WindowExhausted(
            "requested window %s not certified (valid %s / %s)"
            % (None if w2 < 0 else w2 / 2, A.valid2 / 2, B.valid2 / 2),
            min_radius2=2 * max(A.radius2, B.radius2),
        )
    diff = A.window_block(w2) - B.window_block(w2)
    return float(np.max(block_norms(diff))) if diff.size else 0.0


def common_window2(*mats: OpMatrix) -> int:
    return min(m.valid2 for m in mats)


# -- constructors ---------------------------------------------------------

def zeros(alg: Algebra, rp: Parity, cp: Parity, radius2: int,
          support: Support = Support(), valid2: int | None = None) -> OpMatrix:
    rows = max_index2(rp, radius2) + 1
    cols = max_index2(cp, radius2) + 1
    ent = np.zeros((rows, cols, alg.dim, alg.dim))
    return OpMatrix(alg, rp, cp, radius2, ent,
                    support, radius2 if valid2 is None else valid2)


def identity(alg: Algebra, parity: Parity, radius2: int) -> OpMatrix:
    M = zeros(alg, parity, parity, radius2, Support.banded(0))
    n = M.entries.shape[0]
    M.entries[np.arange(n), np.arange(n)] = alg.one
    return M


def half_line(alg: Algebra, parity: Parity, radius2: int, sign: int,
              strict2: int = 0) -> OpMatrix:
    """Projector 1_{S+} (sign=+1) or 1_{S-} (sign=-1); strict2 excludes |n| <= strict2."""
    M = zeros(alg, parity, parity, radius2, Support.banded(0))
    idx = M.row_idx2
    mask = (idx * sign > 0) & (np.abs(idx) > strict2)
    pos = np.nonzero(mask)[0]
    M.entries[pos, pos] = alg.one
    return M


def flip(alg: Algebra, parity: Parity, radius2: int) -> OpMatrix:
    M = zeros(alg, parity, parity, radius2, Support.banded(0))
    n = M.entries.shape[0]
    M.entries[np.arange(n), np.arange(n)[::-1]] = alg.one
    return M


def shift(alg: Algebra, n2: int, col_parity: Parity, radius2: int) -> OpMatrix:
    """Z^n: maps e_k to e_{k+n}; row parity = col parity + parity of n."""
    rp = Parity((int(col_parity) + n2) % 2)
    M = zeros(alg, rp, col_parity, radius2, Support.banded(abs(n2)))
    cm = max_index2(col_parity, radius2)
    rm = max_index2(rp, radius2)
    for cpos, k2 in enumerate(range(-cm, cm + 1, 2)):
        t2 = k2 + n2
        if abs(t2) <= rm:
            M.entries[(t2 + rm) // 2, cpos] = alg.one
    return M


def elem(alg: Algebra, n2: int, m2: int, K: np.ndarray,
         rp: Parity, cp: Parity, radius2: int) -> OpMatrix:
    if n2 % 2 != int(rp) or m2 % 2 != int(cp):
        raise ValueError("elementary matrix indices do not match parities")
    M = zeros(alg, rp, cp, radius2, Support.rect(abs(n2), abs(m2)))
    M.entries[M.rpos(n2), M.cpos(m2)] = K
    return M


def diagonal(alg: Algebra, parity: Parity, radius2: int, fn) -> OpMatrix:
    """Diagonal matrix with entry fn(idx2) at (idx2, idx2)."""
    M = zeros(alg, parity, parity, radius2, Support.banded(0))
    for pos, n2 in enumerate(M.row_idx2):
        M.entries[pos, pos] = fn(int(n2))
    return M


# -- vectors ---------------------------------------------------------------

@dataclass(frozen=True)
class OpVector:
    alg: Algebra
    orientation: str  # "col" | "row"
    parity: Parity
    radius2: int
    entries: np.ndarray = field(repr=False)  # (n, d, d)
    reach2: int
    valid2: int

    def __post_init__(self):
        n = max_index2(self.parity, self.radius2) + 1
        if self.entries.shape != (n, self.alg.dim, self.alg.dim):
            raise ValueError("vector entries shape mismatch")

    @property
    def idx2(self) -> np.ndarray:
        return window2(self.parity, self.radius2)

    def pos(self, n2: int) -> int:
        m = max_index2(self.parity, self.radius2)
        return (n2 + m) // 2

    def entry(self, n2: int) -> np.ndarray:
        return self.entries[self.pos(n2)]

    def shrink_to(self, radius2: int) -> "OpVector":
        if radius2 == self.radius2:
            return self
        m = max_index2(self.parity, radius2)
        p0 = self.pos(-m)
        return OpVector(self.alg, self.orientation, self.parity, radius2,
                        np.ascontiguousarray(self.entries[p0 : p0 + m + 1]),
                        self.reach2, min(self.valid2, radius2))

    def __add__(self, other: "OpVector") -> "OpVector":
        if (self.orientation, self.parity) != (other.orientation, other.parity):
            raise ValueError("vector kind mismatch")
        r2 = min(self.radius2, other.radius2)
        a, b = self.shrink_to(r2), other.shrink_to(r2)
        return OpVector(self.alg, self.orientation, self.parity, r2,
                        a.entries + b.entries, max(a.reach2, b.reach2),
                        min(a.valid2, b.valid2))

    def __sub__(self, other: "OpVector") -> "OpVector":
        return self + (-other)

    def __neg__(self) -> "OpVector":
        return replace(self, entries=-self.entries)

    def __mul__(self, c: float) -> "OpVector":
        return replace(self, entries=c * self.entries)

    __rmul__ = __mul__

    def scale_left(self, K: np.ndarray) -> "OpVector":
        return replace(self, entries=np.einsum("ab,nbe->nae", K, self.entries))

    def scale_right(self, K: np.ndarray) -> "OpVector":
        return replace(self, entries=np.einsum("nab,be->nae", self.entries, K))

    def __matmul__(self, other):
        if isinstance(other, OpMatrix):
            return _vec_mat(self, other)
        return _vec_vec(self, other)

    def sup_norm(self) -> float:
        return float(np.max(block_norms(self.entries)))


def zero_vector(alg: Algebra, orientation: str, parity: Parity, radius2: int,
                reach2: int = -1) -> OpVector:
    n = max_index2(parity, radius2) + 1
    return OpVector(alg, orientation, parity, radius2,
                    np.zeros((n, alg.dim, alg.dim)), reach2, radius2)


def basis_vector(alg: Algebra, orientation: str, n2: int, parity: Parity,
                 radius2: int, K: np.ndarray | None = None) -> OpVector:
    v = zero_vector(alg, orientation, parity, radius2, reach2=abs(n2))
    v.entries[v.pos(n2)] = alg.one if K is None else K
    return v


def _mat_vec(M: OpMatrix, v: OpVector) -> OpVector:
    if v.orientation != "col":
        raise ValueError("matrix @ vector needs a column vector")
    if M.col_parity != v.parity:
        raise ValueError("parity mismatch in matrix @ vector")
    r2 = min(M.radius2, v.radius2)
    A, b = M.shrink_to(r2), v.shrink_to(r2)
    d = M.alg.dim
    rows = A.entries.shape[0]
    ent = (A.entries.transpose(0, 2, 1, 3).reshape(rows * d, -1)
           @ b.entries.transpose(0, 1, 2).reshape(-1, d)).reshape(rows, d, d)
    val = matvec_valid2(A.support, A.valid2, b.reach2, b.valid2)
    reach = matvec_reach2(A.support, b.reach2)
    return OpVector(M.alg, "col", M.row_parity, r2, ent, reach, min(val, r2))


def _vec_mat(v: OpVector, M: OpMatrix) -> OpVector:
    if v.orientation != "row":
        raise ValueError("vector @ matrix needs a row vector")
    if M.row_parity != v.parity:
        raise ValueError("parity mismatch in vector @ matrix")
    r2 = min(M.radius2, v.radius2)
    A, b = M.shrink_to(r2), v.shrink_to(r2)
    d = M.alg.dim
    cols = A.entries.shape[1]
    ent = np.einsum("kab,kcbe->cae", b.entries, A.entries, optimize=True)
    val = vecmat_valid2(b.reach2, b.valid2, A.support, A.valid2)
    reach = matvec_reach2(A.support.transposed(), b.reach2)
    return OpVector(M.alg, "row", M.col_parity, r2, ent, reach, min(val, r2))


def _vec_vec(row: OpVector, col: OpVector) -> np.ndarray:
    if row.orientation != "row" or col.orientation != "col":
        raise ValueError("inner product needs row @ col")
    if row.parity != col.parity:
        raise ValueError("parity mismatch in inner product")
    if row.reach2 >= INF and col.reach2 >= INF:
        raise WindowExhausted("inner product of two non-decaying vectors")
    r2 = min(row.radius2, col.radius2)
    a, b = row.shrink_to(r2), col.shrink_to(r2)
    return np.einsum("kab,kbe->ae", a.entries, b.entries)


def outer(col: OpVector, row: OpVector) -> OpMatrix:
    if col.orientation != "col" or row.orientation != "row":
        raise ValueError("outer product needs col, row")
    r2 = min(col.radius2, row.radius2)
    a, b = col.shrink_to(r2), row.shrink_to(r2)
    ent = np.einsum("nab,mbe->nmae", a.entries, b.entries)
    if a.reach2 >= INF and b.reach2 >= INF:
        sup = Support.full()
    elif a.reach2 < INF and b.reach2 < INF:
        sup = Support.rect(max(a.reach2, 0), max(b.reach2, 0))
    elif a.reach2 < INF:
        sup = Support(hstrip=max(a.reach2, 0))
    else:
        sup = Support(vstrip=max(b.reach2, 0))
    return OpMatrix(col.alg, col.parity, row.parity, r2, ent, sup,
                    min(a.valid2, b.valid2))


def vector_residual(a: OpVector, b: OpVector, w2: int | None = None) -> float:
    if (a.orientation, a.parity) != (b.orientation, b.parity):
        raise ValueError("vector kind mismatch")
    w = min(a.valid2, b.valid2) if w2 is None else w2
    if w > min(a.valid2, b.valid2):
        raise WindowExhausted("vector window not certified")
    m = max_index2(a.parity, w)
    da = a.entries[a.pos(-m) : a.pos(-m) + m + 1]
    db = b.entries[b.pos(-m) : b.pos(-m) + m + 1]
    return float(np.max(block_norms(da - db)))


def transpose_vector(v: OpVector) -> OpVector:
    """Plain transpose: column <-> row, entries unchanged."""
    return replace(v, orientation="row" if v.orientation == "col" else "col")


def opp_entries(arr: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.swapaxes(arr, -1, -2))


def dump_opmatrix(M: OpMatrix, path: str) -> None:
    """Binary dump: header ints then row-major little-endian float64 entries."""
    header = np.array(
        [M.alg.dim, int(M.row_parity), int(M.col_parity), M.radius2, M.valid2,
         M.entries.shape[0], M.entries.shape[1]],
        dtype="<i8",
    )
    with open(path, "wb") as fh:
        fh.write(b"OPMX0001")
        fh.write(header.tobytes())
        fh.write(M.entries.astype("<f8").tobytes())
