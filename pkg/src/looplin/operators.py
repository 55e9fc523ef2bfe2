"""Representation operators: multiplication, rotation, Hilbert, trivial
extensions, real-basis conversion, kernel functions, and the Grassmannian
involutions with their inversion and membership checks."""

from __future__ import annotations

import numpy as np

from .algebra import Algebra, block_norms
from .indices import Parity, max_index2
from .loops import (
    Loop,
    delta_vector,
    loop_cos,
    loop_inverse,
    loop_sin,
    one_loop,
)
from .opmatrix import (
    OpMatrix,
    WindowExhausted,
    diagonal,
    elem,
    flip,
    half_line,
    identity,
    residual,
    zeros,
)
from .support import Support


def mult_op(a: Loop, row_parity: Parity, col_parity: Parity, radius2: int) -> OpMatrix:
    """Left multiplication by a(x): sum_n [a_n]+ Z^n + [a_n]- Z^n T."""
    if Parity((int(a.parity) + int(col_parity)) % 2) != row_parity:
        raise ValueError("parity routing mismatch: loop %s, %s <- %s"
                         % (a.parity, row_parity, col_parity))
    alg = a.alg
    M = zeros(alg, row_parity, col_parity, radius2,
              Support.banded(min(a.band2, radius2)))
    rm = max_index2(row_parity, radius2)
    cm = max_index2(col_parity, radius2)
    cols2 = np.arange(-cm, cm + 1, 2)
    for pos, n2 in enumerate(a.idx2):
        an = a.coeffs[pos]
        if not np.any(an):
            continue
        ap, am = alg.split(an)
        if np.any(ap):
            rows2 = cols2 + int(n2)
            ok = np.abs(rows2) <= rm
            M.entries[(rows2[ok] + rm) // 2, (cols2[ok] + cm) // 2] += ap
        if np.any(am):
            rows2 = int(n2) - cols2
            ok = np.abs(rows2) <= rm
            M.entries[(rows2[ok] + rm) // 2, (cols2[ok] + cm) // 2] += am
    return M


def mult_op_sq(a: Loop, col_parity: Parity, radius2: int) -> OpMatrix:
    return mult_op(a, Parity((int(a.parity) + int(col_parity)) % 2), col_parity, radius2)


def const_right(alg: Algebra, K: np.ndarray, parity: Parity, radius2: int) -> OpMatrix:
    """U of a constant: [K]+ 1 + [K]- T."""
    Kp, Km = alg.split(K)
    M = identity(alg, parity, radius2).scale_left(Kp)
    return M + flip(alg, parity, radius2).scale_left(Km)


def rotation_op(alg: Algebra, x1: float, parity: Parity, radius2: int) -> OpMatrix:
    """Diagonal z1^{-n}."""
    return diagonal(alg, parity, radius2, lambda n2: alg.z_power(x1, -n2))


def reversal_op(alg: Algebra, parity: Parity, radius2: int) -> OpMatrix:
    """Orientation reversal; the flip matrix in the skew-complex basis."""
    return flip(alg, parity, radius2)


def hilbert_op(alg: Algebra, parity: Parity, radius2: int) -> OpMatrix:
    """Diagonal -g sgn(n)."""
    return diagonal(alg, parity, radius2,
                    lambda n2: -float(np.sign(n2)) * alg.g)


def hilbert_op_G(alg: Algebra, G: np.ndarray, radius2: int) -> OpMatrix:
    """Invertible substitute for the even Hilbert transform: G at mode 0."""
    d = alg.dim
    if np.max(np.abs(G @ G + np.eye(d))) > 1e-10:
        raise ValueError("G is not a skew-involution")
    H = hilbert_op(alg, Parity.INT, radius2)
    H.entries[H.rpos(0), H.cpos(0)] = G
    return H


def integration_op(alg: Algebra, u: np.ndarray, radius2: int) -> OpMatrix:
    return elem(alg, 0, 0, u, Parity.INT, Parity.INT, radius2)


def trivial_extension(alg: Algebra, x1: float, parity: Parity, radius2: int,
                      u: np.ndarray | None = None) -> OpMatrix:
    """L^{x1}: z1 on negative modes, z1^{-1} on positive, u (or 1) at mode 0."""
    if parity == Parity.HALF and u is not None:
        raise ValueError("mode-0 entry u only exists on integer parity")

    def fn(n2: int) -> np.ndarray:
        if n2 < 0:
            return alg.z_power(x1, 2)
        if n2 > 0:
            return alg.z_power(x1, -2)
        return alg.one if u is None else u

    return diagonal(alg, parity, radius2, fn)


# -- real basis --------------------------------------------------------------

def real_basis_matrix(alg: Algebra, parity: Parity, radius2: int) -> OpMatrix:
    """N^{r,g}: change of basis from the z-basis to the real Fourier basis."""
    M = zeros(alg, parity, parity, radius2, Support.banded(0))
    s = 1.0 / np.sqrt(2.0)
    for pos, n2 in enumerate(M.row_idx2):
        if n2 == 0:
            M.entries[pos, pos] = alg.one
        elif n2 < 0:
            M.entries[pos, pos] = -s * alg.g
            M.entries[pos, M.cpos(-n2)] = s * alg.g
        else:
            M.entries[pos, M.cpos(-n2)] = s * alg.one
            M.entries[pos, pos] = s * alg.one
    return M


def real_basis_inverse(alg: Algebra, parity: Parity, radius2: int) -> OpMatrix:
    """(N^{r,g})^{-1} = (N^{r,-g})^T."""
    return real_basis_matrix(alg.negated(), parity, radius2).transpose()


def to_real_basis(M: OpMatrix) -> OpMatrix:
    N_row = real_basis_matrix(M.alg, M.row_parity, M.radius2)
    N_col_inv = real_basis_inverse(M.alg, M.col_parity, M.radius2)
    return N_row @ M @ N_col_inv


# -- kernel functions --------------------------------------------------------

def kernel_function(A: OpMatrix, x1: float, x2: float,
                    window2_: int | None = None) -> np.ndarray:
    """delta-bar(x1) . A . delta(x2) over the certified window."""
    w2 = A.valid2 if window2_ is None else window2_
    if w2 < 0:
        raise WindowExhausted("kernel function needs a certified window")
    blk = A.window_block(w2)
    alg = A.alg
    rm = max_index2(A.row_parity, w2)
    cm = max_index2(A.col_parity, w2)
    Z1 = np.stack([alg.z_power(x1, n2) for n2 in range(-rm, rm + 1, 2)])
    Z2 = np.stack([alg.z_power(x2, -m2) for m2 in range(-cm, cm + 1, 2)])
    return np.einsum("rab,rcbe,cef->af", Z1, blk, Z2, optimize=True)


# -- Grassmannians -----------------------------------------------------------

def grassmann_J(a: Loop, radius2: int, a_inv: Loop | None = None) -> OpMatrix:
    """U(a) H U(a^{-1}), routed through half-integer modes.

    Periodic loops give the Z+1/2 Grassmannian, skew-periodic the Z one.
    """
    inv = loop_inverse(a) if a_inv is None else a_inv
    outer_parity = Parity.INT if a.parity == Parity.HALF else Parity.HALF
    U = mult_op(a, outer_parity, Parity.HALF, radius2)
    H = hilbert_op(a.alg, Parity.HALF, radius2)
    Uinv = mult_op(inv, Parity.HALF, outer_parity, radius2)
    return U @ H @ Uinv


def grassmann_invert(J: OpMatrix, x1: float, x2: float) -> np.ndarray:
    """Recover a(x1) a(x2)^{-1} from the Grassmannian involution."""
    alg = J.alg
    r2 = J.radius2
    outer = J.row_parity.other
    s = mult_op(loop_sin(alg, 1), outer, J.row_parity, r2)
    c = mult_op(loop_cos(alg, 1), outer, J.row_parity, r2)
    s_r = mult_op(loop_sin(alg, 1), J.row_parity, outer, r2)
    c_r = mult_op(loop_cos(alg, 1), J.row_parity, outer, r2)
    M = s @ J @ c_r - c @ J @ s_r
    if M.valid2 < 2:
        raise WindowExhausted("inversion window exhausted", min_radius2=2 * r2)
    return kernel_function(M, x1, x2)


def grassmann_membership(J: OpMatrix, core2: int | None = None) -> dict:
    """Residuals of the three membership conditions for a candidate J."""
    alg = J.alg
    r2 = J.radius2
    H = hilbert_op(alg, J.row_parity, r2)
    K = J - H
    w2 = K.valid2
    blk = K.window_block(w2)
    norms = block_norms(blk)
    core = w2 // 2 if core2 is None else core2
    rm = max_index2(J.row_parity, w2)
    cm = max_index2(J.col_parity, w2)
    rows2 = np.arange(-rm, rm + 1, 2)
    cols2 = np.arange(-cm, cm + 1, 2)
    outside = (np.abs(rows2)[:, None] > core) | (np.abs(cols2)[None, :] > core)
    tail = float(np.max(norms[outside])) if np.any(outside) else 0.0

    sq = J @ J + identity(alg, J.row_parity, r2)
    square_res = sq.sup_norm(sq.valid2)

    cosx = mult_op(loop_cos(alg, 2), J.row_parity, J.row_parity, r2)
    sinx = mult_op(loop_sin(alg, 2), J.row_parity, J.row_parity, r2)
    lhs = cosx + J @ cosx @ J
    rhs = sinx @ J - J @ sinx
    eq_res = residual(lhs, rhs)
    return {
        "tail": tail,
        "square": float(square_res),
        "equation": float(eq_res),
        "window2": int(min(lhs.valid2, rhs.valid2)),
    }


def delta_pair(A: OpMatrix, x1: float, x2: float, r: float = 1.0) -> np.ndarray:
    """Pairing with (optionally smoothed) delta vectors, independent route."""
    row = delta_vector(A.alg, x1, A.row_parity, A.radius2, row=True, r=r)
    col = delta_vector(A.alg, x2, A.col_parity, A.radius2, row=False, r=r)
    return (row @ A) @ col
