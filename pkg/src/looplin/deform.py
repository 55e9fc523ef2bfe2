"""Deformation machinery: elementary rotations, the positive weight omega,
the F/D families in five variants, finite rotation-product representations
of deformed monomials, and the three-factor product law check."""

from __future__ import annotations

import numpy as np

from .algebra import Algebra
from .indices import Parity, max_index2
from .loops import Loop, loop_cos, monomial, one_loop, zero_loop
from .opmatrix import OpMatrix, elem, half_line, identity, residual, shift, zeros
from .operators import hilbert_op, mult_op, mult_op_sq, rotation_op
from .support import Support

VARIANTS = ("R", "R3", "O", "L3", "L")
VARIANT_C = {"R": -1.0, "R3": -1.0 / 3.0, "O": 0.0, "L3": 1.0 / 3.0, "L": 1.0}
NEGATED = {"R": "L", "R3": "L3", "O": "O", "L3": "R3", "L": "R"}


def rotation_block(X: str, theta: float, half: bool) -> np.ndarray:
    """2x2 scalar block of the elementary (half-)rotation."""
    t, s = np.sin(theta), np.cos(theta)
    if not half:
        if X == "O":
            return np.array([[s, t], [-t, s]])
        if X == "R":
            return np.array([[1.0, t], [-t, 1.0 - t * t]])
        if X == "L":
            return np.array([[1.0 - t * t, t], [-t, 1.0]])
        c3, s3 = np.cos(theta / 3.0), np.sin(theta / 3.0)
        if X == "R3":
            return np.array([[s * c3, t], [-t, s / c3]])
        if X == "L3":
            return np.array([[s / c3, t], [-t, s * c3]])
    else:
        if X == "O":
            c2, s2 = np.cos(theta / 2.0), np.sin(theta / 2.0)
            return np.array([[c2, s2], [-s2, c2]])
        if X == "R":
            return np.array([[1.0, 0.0], [-t, 1.0]])
        if X == "L":
            return np.array([[1.0, t], [0.0, 1.0]])
        c23, s3 = np.cos(2.0 * theta / 3.0), np.sin(theta / 3.0)
        if X == "R3":
            return np.array([[c23, s3], [-2.0 * s3, 1.0]])
        if X == "L3":
            return np.array([[1.0, 2.0 * s3], [-s3, c23]])
    raise ValueError("unknown variant %r" % X)


def block_matrix(alg: Algebra, n2: int, blk: np.ndarray, x1: float,
                 radius2: int) -> OpMatrix:
    """Identity with the 2x2 scalar block at center n (doubled n2), twisted.

    Twisting by rotation decorates the off-diagonal block entries with
    z1^{+/-1}.
    """
    parity = Parity((n2 + 1) % 2)
    M = identity(alg, parity, radius2)
    sup = M.support.union(Support.central(abs(n2) + 1))
    M = OpMatrix(alg, parity, parity, radius2, M.entries, sup, M.valid2)
    lo, hi = n2 - 1, n2 + 1
    z1p = alg.z_power(x1, 2)
    z1m = alg.z_power(x1, -2)
    M.entries[M.rpos(lo), M.cpos(lo)] = blk[0, 0] * alg.one
    M.entries[M.rpos(lo), M.cpos(hi)] = blk[0, 1] * z1p
    M.entries[M.rpos(hi), M.cpos(lo)] = blk[1, 0] * z1m
    M.entries[M.rpos(hi), M.cpos(hi)] = blk[1, 1] * alg.one
    return M


def elementary_rotation(alg: Algebra, n2: int, theta: float, X: str,
                        radius2: int, half: bool = False, x1: float = 0.0,
                        inverse: bool = False) -> OpMatrix:
    blk = rotation_block(X, theta, half)
    if inverse:
        blk = np.linalg.inv(blk)
    return block_matrix(alg, n2, blk, x1, radius2)


def center_scalar(alg: Algebra, parity: Parity, radius2: int, n2: int,
                  value: float) -> OpMatrix:
    """Identity with one diagonal entry rescaled (the I_n matrices)."""
    M = identity(alg, parity, radius2)
    M.entries[M.rpos(n2), M.cpos(n2)] = value * alg.one
    return M


# center rescaling of the comparison matrices on the integer lattice; equals
# the upper-left entry of the elementary rotation block (the half-line
# product identities force this pairing)
GAMMA = {
    "R": lambda th: 1.0,
    "R3": lambda th: np.cos(th) * np.cos(th / 3.0),
    "O": lambda th: np.cos(th),
    "L3": lambda th: np.cos(th) / np.cos(th / 3.0),
    "L": lambda th: np.cos(th) ** 2,
}


def bridge_to_R(alg: Algebra, X: str, theta: float, parity: Parity,
                radius2: int, x1: float = 0.0, inverse: bool = False) -> OpMatrix:
    """The comparison matrix between variant X and variant R."""
    if parity == Parity.INT:
        v = GAMMA[X](theta)
        return center_scalar(alg, parity, radius2, 0, 1.0 / v if inverse else v)
    t, s3 = np.sin(theta), np.sin(theta / 3.0)
    blocks = {
        "R": np.eye(2),
        "R3": np.array([[np.cos(2 * theta / 3), -s3], [-s3, np.cos(2 * theta / 3)]]),
        "O": np.array([[np.cos(theta / 2), -np.sin(theta / 2)],
                       [-np.sin(theta / 2), np.cos(theta / 2)]]),
        "L3": np.array([[1.0, -2 * s3], [-2 * s3, 1.0]]),
        "L": np.array([[1.0, -t], [-t, 1.0]]),
    }
    blk = blocks[X]
    if inverse:
        blk = np.linalg.inv(blk)
    return block_matrix(alg, 0, blk, x1, radius2)


def bridge(alg: Algebra, X: str, Y: str, theta: float, parity: Parity,
           radius2: int, x1: float = 0.0) -> OpMatrix:
    """A-tilde^{X,Y} via the displayed (., R) column."""
    return bridge_to_R(alg, X, theta, parity, radius2, x1) @ \
        bridge_to_R(alg, Y, theta, parity, radius2, x1, inverse=True)


# -- omega -------------------------------------------------------------------

def omega(x: float, theta: float) -> float:
    t = np.sin(theta)
    return 1.0 - 2.0 * np.cos(x) * t + t * t


def omega_tail_band2(theta: float, cutoff: float = 1e-14) -> int:
    t = abs(np.sin(theta))
    if t < 1e-12:
        return 0
    if t >= 1.0:
        raise ValueError("sin(theta) = +/-1: geometric tail does not decay; "
                         "use the explicit-formula path")
    return 2 * int(np.ceil(np.log(cutoff) / np.log(t)))


def omega_power_loop(alg: Algebra, theta: float, power: float,
                     cutoff: float = 1e-14) -> Loop:
    """Fourier series of omega(x, theta)^power, truncated at relative cutoff."""
    if power == 0.0:
        return one_loop(alg)
    t = abs(np.sin(theta))
    if t >= 1.0 - 1e-9 and power < 0:
        raise ValueError("omega is singular as |sin theta| -> 1 for negative powers")
    band2 = max(omega_tail_band2(theta, cutoff), 2)
    if power > 0 and power == int(power) and abs(np.sin(theta)) < 1.0:
        band2 = min(band2, 2 * int(power))
    M = 8 * (band2 // 2 + 2)
    xs = 2.0 * np.pi * np.arange(M) / M
    vals = np.power(omega(xs, theta), power)
    spec = np.fft.rfft(vals) / M
    out = zero_loop(alg, Parity.INT, band2)
    out.coeffs[out.pos(0)] = spec[0].real * alg.one
    for k in range(1, band2 // 2 + 1):
        ck = 2.0 * spec[k].real  # even function: cosine coefficients
        out.coeffs[out.pos(2 * k)] = 0.5 * ck * alg.one
        out.coeffs[out.pos(-2 * k)] = 0.5 * ck * alg.one
    return out.trimmed()


# -- F and D families --------------------------------------------------------

def _twist(M: OpMatrix, x1: float) -> OpMatrix:
    if x1 == 0.0:
        return M
    R1 = rotation_op(M.alg, x1, M.row_parity, M.radius2)
    R2 = rotation_op(M.alg, -x1, M.col_parity, M.radius2)
    return R1 @ M @ R2


def f_matrix_R(alg: Algebra, theta: float, parity: Parity, radius2: int,
               x1: float = 0.0) -> OpMatrix:
    """The R-variant F from its half-line form."""
    t = np.sin(theta)
    lm = one_loop(alg) - t * monomial(alg, -2, alg.z_power(x1, 2))
    lp = one_loop(alg) - t * monomial(alg, 2, alg.z_power(x1, -2))
    Um = mult_op_sq(lm, parity, radius2)
    Up = mult_op_sq(lp, parity, radius2)
    if parity == Parity.INT:
        M = half_line(alg, parity, radius2, -1) @ Um \
            + elem(alg, 0, 0, alg.one, parity, parity, radius2) \
            + half_line(alg, parity, radius2, 1) @ Up
    else:
        center = zeros(alg, parity, parity, radius2, Support.central(1))
        center.entries[center.rpos(-1), center.cpos(-1)] = alg.one
        center.entries[center.rpos(1), center.cpos(1)] = alg.one
        M = half_line(alg, parity, radius2, -1, strict2=2) @ Um + center \
            + half_line(alg, parity, radius2, 1, strict2=2) @ Up
    return M


def f_matrix(alg: Algebra, theta: float, x1: float, parity: Parity, X: str,
             radius2: int) -> OpMatrix:
    FR = f_matrix_R(alg, theta, parity, radius2, x1)
    if X == "R":
        return FR
    return bridge_to_R(alg, X, theta, parity, radius2, x1) @ FR


def f_prime_matrix(alg: Algebra, theta: float, x1: float, parity: Parity,
                   X: str, radius2: int) -> OpMatrix:
    base = f_matrix(alg, theta, 0.0, parity, NEGATED[X], radius2).transpose()
    return _twist(base, x1)


def d_matrix(alg: Algebra, theta: float, x1: float, parity: Parity, X: str,
             radius2: int) -> OpMatrix:
    c = VARIANT_C[X]
    F = f_matrix(alg, theta, x1, parity, X, radius2)
    w = omega_power_loop(alg, theta, -(1.0 + c) / 2.0).rotate(x1)
    return F @ mult_op_sq(w, parity, radius2)


def d_inverse(alg: Algebra, theta: float, x1: float, parity: Parity, X: str,
              radius2: int) -> OpMatrix:
    # exponent (c-1)/2 follows from F U(omega^-1) F' = 1; it also makes the
    # transpose law D^X(theta)^-1 = D^{-X}(theta)^T hold
    c = VARIANT_C[X]
    Fp = f_prime_matrix(alg, theta, x1, parity, X, radius2)
    w = omega_power_loop(alg, theta, (c - 1.0) / 2.0).rotate(x1)
    return mult_op_sq(w, parity, radius2) @ Fp


# -- finite product representations -----------------------------------------

def deformed_monomial(alg: Algebra, n2: int, theta: float, x1: float, X: str,
                      row_parity: Parity, col_parity: Parity, radius2: int,
                      right_form: bool = False) -> OpMatrix:
    """Deformed multiplication by z^(n2/2) as a finite rotation product.

    Exact for every theta, including the linearization endpoint.
    """
    if (int(row_parity) + int(col_parity)) % 2 != abs(n2) % 2:
        raise ValueError("monomial parity does not match routing")
    if n2 == 0:
        return identity(alg, row_parity, radius2)
    if n2 < 0:
        from .opmatrix import flip
        inner = deformed_monomial(alg, -n2, theta, -x1, X, row_parity,
                                  col_parity, radius2, right_form)
        return flip(alg, row_parity, radius2) @ inner @ flip(alg, col_parity, radius2)

    def A(k2: int) -> OpMatrix:
        return elementary_rotation(alg, k2, theta, X, radius2, x1=x1)

    def a_half(k2: int, Xv: str, th: float, inv: bool) -> OpMatrix:
        return elementary_rotation(alg, k2, th, Xv, radius2, half=True,
                                   x1=x1, inverse=inv)

    Z = shift(alg, n2, col_parity, radius2)
    fac: list[OpMatrix] = []
    if (row_parity, col_parity) == (Parity.INT, Parity.INT):
        if not right_form:
            fac = [A(k2) for k2 in range(1, n2, 2)]
        else:
            return Z @ _chain([A(k2) for k2 in range(-n2 + 1, 0, 2)], alg,
                              col_parity, radius2)
    elif (row_parity, col_parity) == (Parity.INT, Parity.HALF):
        if not right_form:
            fac = [A(k2) for k2 in range(1, n2 - 1, 2)] + \
                  [a_half(n2, X, theta, False)]
        else:
            return Z @ _chain([A(k2) for k2 in range(-n2 + 1, -1, 2)]
                              + [a_half(0, X, theta, False)], alg,
                              col_parity, radius2)
    elif (row_parity, col_parity) == (Parity.HALF, Parity.INT):
        if not right_form:
            fac = [a_half(0, NEGATED[X], -theta, True)] + \
                  [A(k2) for k2 in range(2, n2, 2)]
        else:
            return Z @ _chain([a_half(-n2, NEGATED[X], -theta, True)]
                              + [A(k2) for k2 in range(-n2 + 2, 0, 2)], alg,
                              col_parity, radius2)
    else:  # (HALF, HALF)
        if not right_form:
            fac = [a_half(0, NEGATED[X], -theta, True)] + \
                  [A(k2) for k2 in range(2, n2, 2)] + \
                  [a_half(n2, X, theta, False)]
        else:
            return Z @ _chain([a_half(-n2, NEGATED[X], -theta, True)]
                              + [A(k2) for k2 in range(-n2 + 2, 0, 2)]
                              + [a_half(0, X, theta, False)], alg,
                              col_parity, radius2)
    return _chain(fac, alg, row_parity, radius2) @ Z


def _chain(mats: list[OpMatrix], alg: Algebra, parity: Parity,
           radius2: int) -> OpMatrix:
    out = identity(alg, parity, radius2)
    for M in mats:
        out = out @ M
    return out


def check_dupert(alg: Algebra, theta: float, x1: float, x2: float,
                 parity: Parity, X: str, radius2: int) -> float:
    """Residual of the three-factor product law for F' (...) F."""
    t, s = np.sin(theta), np.cos(theta)
    half = 0.5 * (x1 - x2)
    one = identity(alg, parity, radius2)
    H = hilbert_op(alg, parity, radius2)
    mid = np.cos(half) * one + np.sin(half) * H
    lhs = f_prime_matrix(alg, theta, x1, parity, X, radius2) @ mid \
        @ f_matrix(alg, theta, x2, parity, X, radius2)
    bump = mult_op_sq(loop_cos(alg, 2, 2.0 * alg.one).rotate(0.5 * (x1 + x2)),
                      parity, radius2)
    rhs = np.cos(half) * (1.0 + t * t) * one + np.sin(half) * (s * s) * H \
        - t * bump
    return residual(lhs, rhs)
