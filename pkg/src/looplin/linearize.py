"""Deformed multiplication at all angles, correction matrices and primed
variants, kernel homotopies, the E/U-hat factorization matrices, the
linearizing cocycles with their trivializations, and the symmetry suite."""

from __future__ import annotations

import numpy as np

from .algebra import Algebra
from .indices import Parity, max_index2
from .blocks import (
    BraceParts,
    brace_build,
    delta_diff,
    delta_hat,
    xi_left,
    xi_right,
    xi_swapped,
)
from .deform import (
    NEGATED,
    VARIANT_C,
    d_inverse,
    d_matrix,
    deformed_monomial,
    elementary_rotation,
    f_matrix,
    f_prime_matrix,
    omega_power_loop,
    omega_tail_band2,
)
from .loops import (
    Loop,
    column_of,
    const_loop,
    loop_inverse,
    loop_mul,
    monomial,
    one_loop,
    row_of,
)
from .opmatrix import (
    OpMatrix,
    WindowExhausted,
    flip,
    identity,
    residual,
    zeros,
)
from .operators import (
    const_right,
    grassmann_J,
    hilbert_op,
    mult_op,
    rotation_op,
    trivial_extension,
)
from .support import INF, Support

PATH_SWITCH = 0.9  # |sin theta| above which the explicit product path is used

PRIMED = ("pL", "pR")
ALL_VARIANTS = ("R", "R3", "O", "L3", "L") + PRIMED


def base_variant(X: str) -> str:
    return {"pL": "L", "pR": "R"}.get(X, X)


def deformed_mult(a: Loop, theta: float, x1: float, X: str,
                  row_parity: Parity, col_parity: Parity, radius2: int,
                  path: str = "auto") -> OpMatrix:
    """U^X(a, theta, x1): conjugation by D where it exists, else the exact
    finite-product expansion over modes."""
    if X in PRIMED:
        raise ValueError("primed variants go through primed_mult")
    if Parity((int(a.parity) + int(col_parity)) % 2) != row_parity:
        raise ValueError("parity routing mismatch")
    if path == "auto":
        path = "conjugation" if abs(np.sin(theta)) <= PATH_SWITCH else "explicit"
    if path == "conjugation":
        D = d_matrix(a.alg, theta, x1, row_parity, X, radius2)
        Di = d_inverse(a.alg, theta, x1, col_parity, X, radius2)
        return D @ mult_op(a, row_parity, col_parity, radius2) @ Di
    if path != "explicit":
        raise ValueError("unknown path %r" % path)
    out = zeros(a.alg, row_parity, col_parity, radius2,
                Support.banded(0), valid2=radius2)
    for pos, n2 in enumerate(a.idx2):
        an = a.coeffs[pos]
        if not np.any(an):
            continue
        mono = deformed_monomial(a.alg, int(n2), theta, x1, X,
                                 row_parity, col_parity, radius2)
        out = out + mono @ const_right(a.alg, an, col_parity, radius2)
    return out


def correction_O(a: Loop, theta: float, x1: float, side: str,
                 outer_parity: Parity, radius2: int,
                 a_inv: Loop | None = None, n_angles: int = 128) -> OpMatrix:
    """1 + t^2 P^t[ L brace{Xi-column/row} L^{-1} ](x1), exactly invertible.

    The bracketed matrix is a central block; the Poisson transform acts on
    its entries as functions of the twist angle.
    """
    alg = a.alg
    t = float(np.sin(theta))
    i = outer_parity
    ip = i.other
    inv = loop_inverse(a) if a_inv is None else a_inv
    core2 = a.band2 + inv.band2 + 6

    xs = 2.0 * np.pi * np.arange(n_angles) / n_angles
    blocks = []
    for xg in xs:
        if side == "L":
            parts = BraceParts(None, column_of(
                xi_left(a, ip, xg, swapped=False, a_inv=inv), radius2),
                None, None, "L")
        elif side == "R":
            parts = BraceParts(None, None, row_of(
                xi_right(a, ip, xg, swapped=False, a_inv=inv), radius2),
                None, "R")
        else:
            raise ValueError("side must be L or R")
        B = brace_build(alg, i, i, radius2, parts)
        Li = trivial_extension(alg, 0.5 * xg, i, radius2)
        Lm = trivial_extension(alg, -0.5 * xg, i, radius2)
        blocks.append((Li @ B @ Lm).window_block(min(core2, radius2)))
    stack = np.stack(blocks)
    spec = np.fft.fft(stack, axis=0) / n_angles
    kmax = n_angles // 2 - 1
    val = spec[0].real.copy()
    for k in range(1, kmax + 1):
        phase = np.exp(1j * k * x1)
        val += (t ** k) * 2.0 * (spec[k] * phase).real
    out = identity(alg, i, radius2)
    sup = out.support.union(Support.central(min(core2, radius2)))
    out = OpMatrix(alg, i, i, radius2, out.entries, sup, out.valid2)
    w2 = min(core2, radius2)
    m = max_index2(i, w2)
    r0 = out.rpos(-m)
    out.entries[r0 : r0 + m + 1, r0 : r0 + m + 1] += (t * t) * val
    return out


def invert_central(M: OpMatrix, core2: int) -> OpMatrix:
    """Inverse of (identity + central block), exact on the whole window."""
    alg = M.alg
    out = identity(alg, M.row_parity, M.radius2)
    m = max_index2(M.row_parity, min(core2, M.radius2))
    r0 = M.rpos(-m)
    blk = M.entries[r0 : r0 + m + 1, r0 : r0 + m + 1]
    n, d = blk.shape[0], alg.dim
    flat = blk.transpose(0, 2, 1, 3).reshape(n * d, n * d)
    inv = np.linalg.inv(flat).reshape(n, d, n, d).transpose(0, 2, 1, 3)
    sup = out.support.union(Support.central(min(core2, M.radius2)))
    out = OpMatrix(alg, M.row_parity, M.col_parity, M.radius2, out.entries,
                   sup, out.valid2)
    out.entries[r0 : r0 + m + 1, r0 : r0 + m + 1] = inv
    return out


def primed_mult(a: Loop, theta: float, x1: float, side: str,
                row_parity: Parity, col_parity: Parity, radius2: int,
                a_inv: Loop | None = None) -> OpMatrix:
    """U'^{L/R} = O^{-1} U^{L/R}: corrected to behave well at the endpoint."""
    inv = loop_inverse(a) if a_inv is None else a_inv
    O = correction_O(a, theta, x1, side, row_parity, radius2, a_inv=inv)
    core2 = a.band2 + inv.band2 + 6
    Oi = invert_central(O, core2)
    U = deformed_mult(a, theta, x1, side, row_parity, col_parity, radius2)
    return Oi @ U


# -- kernel homotopies --------------------------------------------------------

def _w_factor(alg: Algebra, theta: float, X: str, parity: Parity,
              radius2: int) -> list[tuple[int, OpMatrix]]:
    """sigma-graded decomposition of s * F^X(theta)^{-1} in closed form."""
    t, s = float(np.sin(theta)), float(np.cos(theta))
    tail = omega_tail_band2(theta) if abs(t) < 1.0 else INF
    comps: dict[int, OpMatrix] = {}

    def comp(sigma: int) -> OpMatrix:
        if sigma not in comps:
            sup = Support.banded(min(tail, INF)) if abs(t) < 1.0 else Support.full()
            comps[sigma] = zeros(alg, parity, parity, radius2, sup)
        return comps[sigma]

    m_max = max_index2(parity, radius2)
    if parity == Parity.INT:
        axis = {"R": (1, 1.0), "R3": (0, 1.0 / np.cos(theta / 3.0)),
                "O": (0, 1.0), "L3": (0, np.cos(theta / 3.0)),
                "L": (-1, 1.0)}[X]
        sig0, coef0 = axis
        C = comp(sig0)
        for m2 in range(-m_max, m_max + 1, 2):
            C.entries[C.rpos(m2), C.cpos(0)] = \
                coef0 * (t ** (abs(m2) // 2)) * alg.one
        chain = comp(1)
        for m2 in range(-m_max, m_max + 1, 2):
            if m2 == 0:
                continue
            sgn = 1 if m2 > 0 else -1
            q2 = sgn * 2
            while abs(q2) <= abs(m2):
                v = t ** ((abs(m2) - abs(q2)) // 2)
                if abs(v) < 1e-16:
                    break
                chain.entries[chain.rpos(m2), chain.cpos(q2)] = v * alg.one
                q2 += sgn * 2
    else:
        th3 = theta / 3.0
        kp, km, sig = {
            "R": (1.0, 0.0, 1),
            "R3": (np.cos(2 * th3) / np.cos(th3), np.tan(th3), 0),
            "O": (np.cos(theta / 2.0), np.sin(theta / 2.0), 0),
            "L3": (np.cos(th3), np.sin(2 * th3), 0),
            "L": (1.0, t, -1),
        }[X]
        cross = comp(sig)
        chain = comp(1)
        for m2 in range(-m_max, m_max + 1, 2):
            sgn = 1 if m2 > 0 else -1
            steps = (abs(m2) - 1) // 2
            base = t ** steps
            cross.entries[cross.rpos(m2), cross.cpos(sgn)] = kp * base * alg.one
            cross.entries[cross.rpos(m2), cross.cpos(-sgn)] = km * base * alg.one
            q2 = sgn * 3
            while abs(q2) <= abs(m2):
                v = t ** ((abs(m2) - abs(q2)) // 2)
                if abs(v) < 1e-16:
                    break
                chain.entries[chain.rpos(m2), chain.cpos(q2)] = v * alg.one
                q2 += sgn * 2
    return [(sig, M) for sig, M in comps.items()]


def kernel_homotopy_P(A: OpMatrix, theta: float, x1: float, x2: float, X: str,
                      path: str = "auto") -> OpMatrix:
    """P^X(theta, x1, x2)(A): deformation of a rapidly decreasing matrix.

    The x1 angle rides the left factor, x2 the right one.
    """
    alg = A.alg
    r2 = A.radius2
    t, s = float(np.sin(theta)), float(np.cos(theta))
    if path == "auto":
        path = "conjugation" if abs(t) <= PATH_SWITCH else "explicit"
    if path == "conjugation":
        # F'(x1)^{-1} = F(x1) U(omega1^{-1}); F(x2)^{-1} = U(omega2^{-1}) F'(x2)
        w1 = omega_power_loop(alg, theta, -1.0).rotate(x1)
        w2 = omega_power_loop(alg, theta, -1.0).rotate(x2)
        left = f_matrix(alg, theta, x1, A.row_parity, X, r2) @ \
            mult_op(w1, A.row_parity, A.row_parity, r2)
        right = mult_op(w2, A.col_parity, A.col_parity, r2) @ \
            f_prime_matrix(alg, theta, x2, A.col_parity, X, r2)
        return (s * s) * (left @ A @ right)
    Wrow = _w_factor(alg, theta, NEGATED[X], A.row_parity, r2)
    Wcol = _w_factor(alg, theta, X, A.col_parity, r2)
    R1 = rotation_op(alg, x1, A.row_parity, r2)
    R1i = rotation_op(alg, -x1, A.row_parity, r2)
    R2 = rotation_op(alg, x2, A.col_parity, r2)
    R2i = rotation_op(alg, -x2, A.col_parity, r2)
    out = None
    for s1, V in Wrow:
        Vt = R1 @ V.transpose() @ R1i
        for s2, W in Wcol:
            Wt = R2 @ W @ R2i
            sig = s1 + s2
            if sig < 0:
                raise WindowExhausted("negative s-grade in explicit homotopy")
            term = (s ** sig) * (Vt @ A @ Wt)
            out = term if out is None else out + term
    return out


# -- E and U-hat families -----------------------------------------------------

def e_matrix(a: Loop, x1: float, variant: str, radius2: int,
             a_inv: Loop | None = None) -> OpMatrix:
    """Endpoint factor: L^{x1/2} times a brace pinned at a(x1)."""
    alg = a.alg
    i = a.parity
    outer = i.other
    a1 = a.eval(x1)
    one_i = identity(alg, i, radius2)
    br = {"O": "O", "R3": "R", "L3": "L", "L": "L", "R": "R",
          "pL": "L", "pR": "R"}[variant]
    b = c = None
    if variant == "L":
        b = column_of(delta_diff(a, i, x1), radius2)
    elif variant == "pL":
        if i == Parity.INT:
            b = column_of(const_loop(alg, -0.5 * a.hilbert().eval(x1)), radius2)
    elif variant == "R":
        inv = loop_inverse(a) if a_inv is None else a_inv
        c = row_of(xi_swapped(a, i, x1, inv), radius2)
    elif variant == "pR":
        if i == Parity.INT:
            inv = loop_inverse(a) if a_inv is None else a_inv
            c = row_of(const_loop(alg, 0.5 * a1 @ inv.hilbert().eval(x1)), radius2)
    M = brace_build(alg, outer, outer, radius2, BraceParts(one_i, b, c, a1, br))
    return trivial_extension(alg, 0.5 * x1, outer, radius2) @ M


def uhat_matrix(a: Loop, variant: str, radius2: int,
                a_inv: Loop | None = None) -> OpMatrix:
    alg = a.alg
    i = a.parity
    outer = i.other
    U = mult_op(a, i, Parity.INT, radius2)
    br = {"O": "O", "R3": "R", "L3": "L", "L": "L", "R": "R",
          "pL": "L", "pR": "R"}[variant]
    b = c = None
    if variant == "pL":
        b = column_of(-0.5 * a.hilbert(), radius2)
    elif variant == "pR":
        inv = loop_inverse(a) if a_inv is None else a_inv
        c = row_of(0.5 * loop_mul(a, inv.hilbert()), radius2)
    return brace_build(alg, outer, Parity.HALF, radius2,
                       BraceParts(U, b, c, alg.one, br))


def uhat_inverse(a: Loop, variant: str, radius2: int,
                 a_inv: Loop | None = None) -> OpMatrix:
    """Closed-form inverse of U-hat via the 2x2 block structure."""
    alg = a.alg
    inv = loop_inverse(a) if a_inv is None else a_inv
    i = a.parity
    outer = i.other
    Uinv = mult_op(inv, Parity.INT, i, radius2)
    br = {"O": "O", "R3": "R", "L3": "L", "L": "L", "R": "R",
          "pL": "L", "pR": "R"}[variant]
    b = c = None
    if variant == "pL":
        # [A, b; 0, 1]^{-1} = [A^{-1}, -A^{-1} b; 0, 1]
        b = column_of(0.5 * loop_mul(inv, a.hilbert()), radius2)
    elif variant == "pR":
        # [A, 0; c, 1]^{-1} = [A^{-1}, 0; -c A^{-1}, 1]
        c = row_of(-0.5 * loop_mul(loop_mul(a, inv.hilbert()), inv), radius2)
    return brace_build(alg, Parity.HALF, outer, radius2,
                       BraceParts(Uinv, b, c, alg.one, br))


# -- cocycles ------------------------------------------------------------------

def _u_and_inverse(a: Loop, theta: float, x1: float, X: str,
                   row_parity: Parity, radius2: int, inv: Loop):
    """U^{X-bar}(a, theta, x1) and its inverse, multiplicatively."""
    col = Parity.HALF
    if X in PRIMED:
        side = base_variant(X)
        U = primed_mult(a, theta, x1, side, row_parity, col, radius2, a_inv=inv)
        O = correction_O(a, theta, x1, side, row_parity, radius2, a_inv=inv)
        Ui = deformed_mult(inv, theta, x1, side, col, row_parity, radius2) @ O
    else:
        U = deformed_mult(a, theta, x1, X, row_parity, col, radius2)
        Ui = deformed_mult(inv, theta, x1, X, col, row_parity, radius2)
    return U, Ui


def cocycle_K(a: Loop, theta: float, x1: float, x2: float, X: str,
              radius2: int, a_inv: Loop | None = None) -> OpMatrix:
    """The linearizing cocycle U(x1) L^{(x1-x2)/2} U(x2)^{-1}."""
    alg = a.alg
    row = a.parity.other
    inv = loop_inverse(a) if a_inv is None else a_inv
    U1, _ = _u_and_inverse(a, theta, x1, X, row, radius2, inv)
    _, U2i = _u_and_inverse(a, theta, x2, X, row, radius2, inv)
    L = trivial_extension(alg, 0.5 * (x1 - x2), Parity.HALF, radius2)
    return U1 @ L @ U2i


def pointed_K(a: Loop, theta: float, x1: float, radius2: int,
              a_inv: Loop | None = None, base_tol: float = 1e-9) -> OpMatrix:
    base = np.abs(a.eval(0.0) - a.alg.one).max()
    if base > base_tol:
        raise ValueError("pointed cocycle needs a(0) = 1 (deviation %.2e)" % base)
    return cocycle_K(a, theta, x1, 0.0, "O", radius2, a_inv=a_inv)


def trivializer_N(a: Loop, theta: float, x1: float, X: str, radius2: int,
                  a_inv: Loop | None = None) -> OpMatrix:
    if a.parity != Parity.HALF:
        raise ValueError("the N trivialization is for skew-periodic loops")
    alg = a.alg
    inv = loop_inverse(a) if a_inv is None else a_inv
    U, _ = _u_and_inverse(a, theta, x1, X, Parity.INT, radius2, inv)
    L = trivial_extension(alg, 0.5 * x1, Parity.HALF, radius2)
    return U @ L @ uhat_inverse(a, X, radius2, a_inv=inv)


def dupert1_form(a: Loop, theta: float, x1: float, x2: float, X: str,
                 radius2: int, a_inv: Loop | None = None,
                 path: str = "auto") -> OpMatrix:
    """1 cos + (H + P(theta,x1,x2)(J - H)) sin: the equivalent closed form."""
    alg = a.alg
    row = a.parity.other
    inv = loop_inverse(a) if a_inv is None else a_inv
    J = grassmann_J(a, radius2, a_inv=inv)
    H = hilbert_op(alg, row, radius2)
    half = 0.5 * (x1 - x2)
    PK = kernel_homotopy_P(J - H, theta, x1, x2, base_variant(X), path=path)
    return float(np.cos(half)) * identity(alg, row, radius2) + \
        float(np.sin(half)) * (H + PK)
