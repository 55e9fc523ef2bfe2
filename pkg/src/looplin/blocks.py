"""2x2 block calculus: arrow matrices, brace build/split in the three
variants, difference functions with critical parts, multiplicative
differences, and the executable factorization/structure checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Algebra
from .indices import Parity, max_index2
from .loops import (
    Loop,
    Parity as _P,
    column_of,
    const_loop,
    delta_vector,
    from_samples,
    loop_inverse,
    loop_mul,
    loop_residual,
    one_loop,
    pv_vector,
    row_of,
    zero_loop,
)
from .opmatrix import (
    OpMatrix,
    OpVector,
    identity,
    outer,
    residual,
    transpose_vector,
    vector_residual,
    zero_vector,
    zeros,
)
from .operators import mult_op, trivial_extension
from .support import Support

SQ2 = np.sqrt(2.0) / 2.0

VARIANTS = ("O", "R", "L")  # plain, right, left


# -- arrow machinery ---------------------------------------------------------

def arrow_in(alg: Algebra, outer: Parity, radius2: int) -> OpMatrix:
    """H-left: (outer x outer') matrix pushing the complement outward with +/-g."""
    inner = outer.other
    M = zeros(alg, outer, inner, radius2, Support.banded(1))
    g = alg.g
    rm = max_index2(outer, radius2)
    for cpos, n2 in enumerate(M.col_idx2):
        if n2 < 0:
            t2 = n2 - 1
            if abs(t2) <= rm:
                M.entries[(t2 + rm) // 2, cpos] = g
        elif n2 > 0:
            t2 = n2 + 1
            if abs(t2) <= rm:
                M.entries[(t2 + rm) // 2, cpos] = -g
        else:  # n2 == 0 only when inner is the integer lattice
            M.entries[(-1 + rm) // 2, cpos] = SQ2 * g
            M.entries[(1 + rm) // 2, cpos] = -SQ2 * g
    return M


def arrow_out(alg: Algebra, outer: Parity, radius2: int) -> OpMatrix:
    """H-right with -g: the transpose of H-left built from -g."""
    return arrow_in(alg.negated(), outer, radius2).transpose()


def f_vector(alg: Algebra, outer: Parity, radius2: int, row: bool = False) -> OpVector:
    v = zero_vector(alg, "row" if row else "col", outer, radius2, reach2=1)
    if outer == Parity.INT:
        v.entries[v.pos(0)] = alg.one
    else:
        v.entries[v.pos(-1)] = SQ2 * alg.one
        v.entries[v.pos(1)] = SQ2 * alg.one
    return v


def x_matrix(alg: Algebra, parity: Parity, radius2: int, power: int = 1) -> OpMatrix:
    """The sqrt2-free rescaling X (power=+1) or its inverse; identity on Z."""
    M = identity(alg, parity, radius2)
    if parity == Parity.INT or power == 0:
        return M
    # central block in the (e_{-1/2}, e_{1/2}) basis
    blk = (SQ2 / 2.0) * np.array([[1.0, -1.0], [-1.0, 1.0]]) \
        + 2.0 * SQ2 * 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
    if power < 0:
        blk = np.linalg.inv(blk)
    sup = M.support.union(Support.central(1))
    M = OpMatrix(alg, parity, parity, radius2, M.entries, sup, M.valid2)
    for a, na in ((0, -1), (1, 1)):
        for b, nb in ((0, -1), (1, 1)):
            M.entries[M.rpos(na), M.cpos(nb)] = blk[a, b] * alg.one
    return M


def _decorated(alg: Algebra, outer: Parity, radius2: int, variant: str):
    """Left/right injectors and f-vectors for the requested brace variant."""
    e = {"O": 0, "R": 1, "L": -1}[variant]
    Hl = arrow_in(alg, outer, radius2)
    Hr = arrow_out(alg, outer, radius2)
    fc = f_vector(alg, outer, radius2, row=False)
    fr = f_vector(alg, outer, radius2, row=True)
    if e != 0 and outer == Parity.HALF:
        X = x_matrix(alg, outer, radius2, e)
        Xi = x_matrix(alg, outer, radius2, -e)
        Hl, fc = X @ Hl, X @ fc
        Hr, fr = Hr @ Xi, fr @ Xi
    return Hl, Hr, fc, fr


@dataclass
class BraceParts:
    A: OpMatrix | None
    b: OpVector | None
    c: OpVector | None
    d: np.ndarray | None
    variant: str = "O"

    def compose(self, other: "BraceParts") -> "BraceParts":
        """2x2 block composition."""
        def mm(x, y):
            return None if x is None or y is None else x @ y

        def add(x, y):
            if x is None:
                return y
            if y is None:
                return x
            return x + y

        A = add(mm(self.A, other.A),
                None if self.b is None or other.c is None else outer(self.b, other.c))
        b = add(mm(self.A, other.b),
                None if self.b is None or other.d is None else self.b.scale_right(other.d))
        c = add(None if self.c is None or other.A is None else self.c @ other.A,
                None if self.d is None or other.c is None else other.c.scale_left(self.d))
        d = add(None if self.c is None or other.b is None else self.c @ other.b,
                None if self.d is None or other.d is None else self.d @ other.d)
        return BraceParts(A, b, c, d, self.variant)


def brace_build(alg: Algebra, row_parity: Parity, col_parity: Parity, radius2: int,
                parts: BraceParts) -> OpMatrix:
    Hl, _, fc_i, _ = _decorated(alg, row_parity, radius2, parts.variant)
    _, Hr, _, fr_j = _decorated(alg, col_parity, radius2, parts.variant)
    out = zeros(alg, row_parity, col_parity, radius2, Support(), valid2=radius2)
    if parts.A is not None:
        out = out + Hl @ parts.A @ Hr
    if parts.b is not None:
        out = out + outer(Hl @ parts.b, fr_j)
    if parts.c is not None:
        out = out + outer(fc_i, parts.c @ Hr)
    if parts.d is not None:
        out = out + outer(fc_i.scale_right(parts.d), fr_j)
    return out


def brace_split(M: OpMatrix, variant: str = "O") -> BraceParts:
    alg = M.alg
    r2 = M.radius2
    Hl_i, Hr_i, fc_i, fr_i = _decorated(alg, M.row_parity, r2, variant)
    Hl_j, Hr_j, fc_j, fr_j = _decorated(alg, M.col_parity, r2, variant)
    # extractors invert the injectors: rows via Hr of the row side, etc.
    A = Hr_i @ M @ Hl_j
    b = Hr_i @ (M @ fc_j)
    c = (fr_i @ M) @ Hl_j
    d = fr_i @ (M @ fc_j)
    return BraceParts(A, b, c, d, variant)


def brace_identity_parts(alg: Algebra, parity: Parity, radius2: int,
                         d: np.ndarray | None = None, variant: str = "O") -> BraceParts:
    return BraceParts(identity(alg, parity.other, radius2), None, None,
                      alg.one if d is None else d, variant)


# -- difference functions ----------------------------------------------------

def delta_diff(a: Loop, target: Parity, x1: float) -> Loop:
    """Difference function as a loop in x, via the per-mode expansions.

    The removable singularity never appears: each monomial z^n expands into
    the finite geometric chain between 0 and n with half weights at shared
    endpoints.
    """
    alg = a.alg
    out_band = max_index2(target, max(a.band2, int(target)))
    out = zero_loop(alg, target, out_band)
    for pos, n2 in enumerate(a.idx2):
        n2 = int(n2)
        an = a.coeffs[pos]
        if n2 == 0 or not np.any(an):
            continue
        sgn = 1 if n2 > 0 else -1
        k2 = 0 if target == Parity.INT else sgn
        while (k2 - n2) * sgn <= 0:
            w = 0.5 if (k2 == 0 or k2 == n2) else 1.0
            zfac = alg.z_power(x1, n2 - k2)
            out.coeffs[out.pos(k2)] += (w * sgn) * (alg.g @ zfac @ an)
            k2 += 2 * sgn
    return out


def delta_hat(a: Loop, target: Parity, x1: float) -> Loop:
    """Critical part: constant and moving Hilbert corrections."""
    alg = a.alg
    Ha = a.hilbert()
    i = int(target)
    j = (i + int(a.parity)) % 2
    out = zero_loop(alg, target, max(Ha.band2, int(target)))
    if i == 0:
        out.coeffs[out.pos(0)] += -0.5 * Ha.eval(x1)
    if j == 0:
        out = out + (-0.5) * Ha.pad_to(out.band2)
    return out


def xi_plain(a: Loop, target: Parity, x1: float) -> Loop:
    """Multiplicative difference with the loop variable first: Xi a(x, x1)."""
    a1_inv = np.linalg.inv(a.eval(x1))
    return delta_diff(a.scale_right(a1_inv), target, x1)


def xi_swapped(a: Loop, target: Parity, x1: float, a_inv: Loop | None = None) -> Loop:
    """Xi a(x1, x) as a loop in x: equals (Delta a)(x) a(x)^{-1}."""
    inv = loop_inverse(a) if a_inv is None else a_inv
    j = Parity((int(target) + int(a.parity)) % 2)
    return loop_mul(delta_diff(a, j, x1), inv)


def xi_left(a: Loop, target: Parity, x1: float, swapped: bool = False,
            a_inv: Loop | None = None) -> Loop:
    """Normalized Xi^L; ``swapped`` exchanges the roles of x and x1."""
    alg = a.alg
    Ha = a.hilbert()
    i = int(target)
    j = (i + int(a.parity)) % 2
    if not swapped:
        out = xi_plain(a, target, x1)
        a1_inv = np.linalg.inv(a.eval(x1))
        if i == 0:
            out = out + const_loop(alg, 0.5 * Ha.eval(x1) @ a1_inv)
        if j == 0:
            out = out + 0.5 * Ha.scale_right(a1_inv)
        return out
    inv = loop_inverse(a) if a_inv is None else a_inv
    out = xi_swapped(a, target, x1, inv)
    if i == 0:
        out = out + 0.5 * loop_mul(Ha, inv)
    if j == 0:
        out = out + 0.5 * inv.scale_left(Ha.eval(x1))
    return out


def xi_right(a: Loop, target: Parity, x1: float, swapped: bool = False,
             a_inv: Loop | None = None) -> Loop:
    """Normalized Xi^R; defined with x1 first, ``swapped`` exchanges roles."""
    alg = a.alg
    inv = loop_inverse(a) if a_inv is None else a_inv
    Hinv = inv.hilbert()
    i = int(target)
    j = (i + int(a.parity)) % 2
    if not swapped:
        out = xi_swapped(a, target, x1, inv)
        a1 = a.eval(x1)
        if i == 0:
            out = out - const_loop(alg, 0.5 * a1 @ Hinv.eval(x1))
        if j == 0:
            out = out - 0.5 * Hinv.scale_left(a1)
        return out
    out = xi_plain(a, target, x1)
    if i == 0:
        out = out - 0.5 * loop_mul(a, Hinv)
    if j == 0:
        out = out - 0.5 * a.scale_right(Hinv.eval(x1))
    return out


# -- executable factorization checks ----------------------------------------

def _brace(alg, i, j, r2, variant, A=None, b=None, c=None, d=None):
    return brace_build(alg, i, j, r2, BraceParts(A, b, c, d, variant))


def check_precorr(a: Loop, x1: float, variant: str, radius2: int,
                  row_parity: Parity, a_inv: Loop | None = None) -> dict:
    """Residuals of the augmented-brace factorizations at one angle.

    Both the row-augmented and column-augmented families are verified as
    full matrix products on the certified window; the principal-value forms
    enter through truncated pole vectors whose windowed identities are exact.
    """
    alg = a.alg
    l = a.parity
    i = row_parity
    j = Parity((int(l) + int(i)) % 2)
    ip, jp = i.other, j.other
    r2 = radius2
    inv = loop_inverse(a) if a_inv is None else a_inv
    a1 = a.eval(x1)

    U_in = mult_op(a, ip, jp, r2)
    one_ip = identity(alg, ip, r2)
    one_jp = identity(alg, jp, r2)
    braceD = _brace(alg, i, j, r2, variant, A=U_in, d=a1)

    out = {}

    # row-augmented family: lower-left entries
    M0 = _brace(alg, i, j, r2, variant, A=U_in,
                c=row_of(delta_diff(a, jp, x1), r2), d=a1)
    F1 = _brace(alg, i, i, r2, variant, A=one_ip,
                c=row_of(xi_swapped(a, ip, x1, inv), r2), d=alg.one)
    out["row_xi"] = residual(F1 @ braceD, M0)
    F2 = _brace(alg, j, j, r2, variant, A=one_jp,
                c=-1.0 * row_of(xi_swapped(inv, jp, x1, a), r2), d=alg.one)
    out["row_xi_inv"] = residual(braceD @ F2, M0)
    Mhat = _brace(alg, i, j, r2, variant, A=U_in,
                  c=row_of(delta_hat(a, jp, x1), r2), d=a1)
    F3 = _brace(alg, i, i, r2, variant, A=one_ip,
                c=row_of(xi_left(a, ip, x1, swapped=True, a_inv=inv), r2), d=alg.one)
    out["row_xiL"] = residual(F3 @ Mhat, M0)
    F4 = _brace(alg, j, j, r2, variant, A=one_jp,
                c=-1.0 * row_of(xi_right(inv, jp, x1, swapped=False, a_inv=a), r2),
                d=alg.one)
    out["row_xiR"] = residual(Mhat @ F4, M0)
    # sign: the row pole vector represents minus the S-bar of the pole loop,
    # so the row factorization carries the opposite signs to the column one
    P1 = _brace(alg, i, i, r2, variant, A=one_ip,
                c=-0.5 * pv_vector(alg, x1, ip, r2, row=True), d=alg.one)
    P2 = _brace(alg, j, j, r2, variant, A=one_jp,
                c=0.5 * pv_vector(alg, x1, jp, r2, row=True), d=alg.one)
    out["row_pv"] = residual(P1 @ braceD @ P2, M0)

    # column-augmented family: upper-right entries
    N0 = _brace(alg, i, j, r2, variant, A=U_in,
                b=column_of(delta_diff(a, ip, x1), r2), d=a1)
    G1 = _brace(alg, i, i, r2, variant, A=one_ip,
                b=column_of(xi_plain(a, ip, x1), r2), d=alg.one)
    out["col_xi"] = residual(G1 @ braceD, N0)
    G2 = _brace(alg, j, j, r2, variant, A=one_jp,
                b=-1.0 * column_of(xi_plain(inv, jp, x1), r2), d=alg.one)
    out["col_xi_inv"] = residual(braceD @ G2, N0)
    Nhat = _brace(alg, i, j, r2, variant, A=U_in,
                  b=column_of(delta_hat(a, ip, x1), r2), d=a1)
    G3 = _brace(alg, i, i, r2, variant, A=one_ip,
                b=column_of(xi_left(a, ip, x1, swapped=False), r2), d=alg.one)
    out["col_xiL"] = residual(G3 @ Nhat, N0)
    G4 = _brace(alg, j, j, r2, variant, A=one_jp,
                b=-1.0 * column_of(xi_right(inv, jp, x1, swapped=True, a_inv=a), r2),
                d=alg.one)
    out["col_xiR"] = residual(Nhat @ G4, N0)
    Q1 = _brace(alg, i, i, r2, variant, A=one_ip,
                b=-0.5 * pv_vector(alg, x1, ip, r2, row=False), d=alg.one)
    Q2 = _brace(alg, j, j, r2, variant, A=one_jp,
                b=0.5 * pv_vector(alg, x1, jp, r2, row=False), d=alg.one)
    out["col_pv"] = residual(Q1 @ braceD @ Q2, N0)
    return out


def expand_in_angle(values: np.ndarray, alg: Algebra) -> dict[int, np.ndarray]:
    """z1-basis coefficients of a sampled function of x1 over the doubled circle.

    ``values`` has shape (M, ..., d, d) sampled at x1 = 4 pi k / M; returns a
    map from doubled mode q2 to coefficient arrays of shape (..., d, d).
    """
    M = values.shape[0]
    spec = np.fft.fft(values, axis=0) / M
    out = {}
    kmax = M // 2 - 1
    out[0] = spec[0].real
    for k in range(1, kmax + 1):
        ck, cmk = spec[k], spec[-k]
        A = (ck + cmk).real
        B = ((ck - cmk) * 1j).real
        gB = np.einsum("ab,...be->...ae", alg.g, B)
        out[k] = 0.5 * (A - gB)
        out[-k] = 0.5 * (A + gB)
    return out


def check_excorr(a: Loop, radius2: int, window2_: int = 16,
                 n_angles: int = 64, tol: float = 1e-9, max_terms: int = 4) -> dict:
    """Structural check: entries of the sandwiched braces are finite sums of
    terms +/- [a_p]^{+/-} z1^q.  Each x1-Fourier coefficient must decompose
    greedily into at most ``max_terms`` candidates."""
    alg = a.alg
    l = a.parity
    results = {}
    # candidate coefficient set
    cands = [alg.zero]
    for pos in range(a.coeffs.shape[0]):
        ap, am = alg.split(a.coeffs[pos])
        for K in (ap, am):
            cands.extend((K, -K))
    cands = np.stack(cands)
    scale = max(float(np.max(np.abs(a.coeffs))), 1e-30)

    def decompose(K: np.ndarray) -> int:
        cur = K.copy()
        for used in range(max_terms + 1):
            if np.abs(cur).max() <= tol * scale:
                return used
            res = np.abs(cur[None] - cands).max(axis=(1, 2))
            k = int(np.argmin(res))
            if k == 0:  # best move is subtracting zero: stuck
                return -1
            cur = cur - cands[k]
        return -1

    for tag, (i, use_col) in {"L_col": (Parity.INT, True),
                              "R_row": (Parity.INT, False)}.items():
        j = Parity((int(l) + int(i)) % 2)
        ip, jp = i.other, j.other
        xs = 4.0 * np.pi * np.arange(n_angles) / n_angles
        samples = []
        for x1 in xs:
            U_in = mult_op(a, ip, jp, radius2)
            if use_col:
                B = _brace(alg, i, j, radius2, "L", A=U_in,
                           b=column_of(delta_hat(a, ip, x1), radius2),
                           d=a.eval(x1))
            else:
                B = _brace(alg, i, j, radius2, "R", A=U_in,
                           c=row_of(delta_hat(a, jp, x1), radius2),
                           d=a.eval(x1))
            Li = trivial_extension(alg, 0.5 * x1, i, radius2)
            Lj = trivial_extension(alg, 0.5 * x1, j, radius2)
            M = Li @ B @ Lj
            samples.append(M.window_block(min(window2_, M.valid2)))
        coeffs = expand_in_angle(np.stack(samples), alg)
        checked = 0
        failures = 0
        terms = 0
        for q2, arr in coeffs.items():
            norms = np.abs(arr).max(axis=(-2, -1))
            for idx in np.argwhere(norms > tol * scale):
                used = decompose(arr[tuple(idx)])
                checked += 1
                if used < 0:
                    failures += 1
                else:
                    terms = max(terms, used)
        results[tag] = {"checked": checked, "failures": failures,
                        "max_terms": terms}
    results["pass"] = all(v["failures"] == 0 for v in results.values()
                          if isinstance(v, dict))
    return results
