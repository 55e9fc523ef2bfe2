"""Algebra-valued loops as finite Fourier series in the z-basis.

A loop of parity 0 is 2pi-periodic, parity 1 is skew-periodic
(a(x + 2pi) = -a(x)); modes live at integers resp. half-integers.  The
basis is z^n(x) = cos(nx) + g sin(nx) with coefficients on the right:
a(x) = sum_n z^n(x) a_n.  Skew-periodic loops are handled by doubling the
circle, so one FFT engine covers both parities.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import Algebra, block_norms
from .indices import Parity, max_index2, window2
from .opmatrix import OpVector, zero_vector
from .support import INF

COEFF_CUTOFF = 1e-14


@dataclass(frozen=True)
class Loop:
    alg: Algebra
    parity: Parity
    band2: int
    coeffs: np.ndarray = field(repr=False)  # (modes, d, d) over window2(parity, band2)

    def __post_init__(self):
        n = max_index2(self.parity, self.band2) + 1
        if self.coeffs.shape != (n, self.alg.dim, self.alg.dim):
            raise ValueError("coefficient array shape mismatch")

    @property
    def idx2(self) -> np.ndarray:
        return window2(self.parity, self.band2)

    def pos(self, n2: int) -> int:
        m = max_index2(self.parity, self.band2)
        return (n2 + m) // 2

    def coeff(self, n2: int) -> np.ndarray:
        m = max_index2(self.parity, self.band2)
        if n2 % 2 != int(self.parity) or abs(n2) > m:
            return self.alg.zero
        return self.coeffs[self.pos(n2)]

    def pad_to(self, band2: int) -> "Loop":
        if band2 < self.band2:
            raise ValueError("pad_to cannot shrink")
        m_new = max_index2(self.parity, band2)
        m_old = max_index2(self.parity, self.band2)
        out = np.zeros((m_new + 1, self.alg.dim, self.alg.dim))
        off = (m_new - m_old) // 2
        out[off : off + m_old + 1] = self.coeffs
        return Loop(self.alg, self.parity, band2, out)

    def trimmed(self, rel_tol: float = COEFF_CUTOFF) -> "Loop":
        norms = block_norms(self.coeffs)
        top = float(np.max(norms)) if norms.size else 0.0
        if top == 0.0:
            return Loop(self.alg, self.parity, int(self.parity),
                        np.zeros((1, self.alg.dim, self.alg.dim)))
        keep = np.nonzero(norms > rel_tol * top)[0]
        m_old = max_index2(self.parity, self.band2)
        b2 = int(np.max(np.abs(-m_old + 2 * keep)))
        b2 = max(b2, int(self.parity))
        m_new = max_index2(self.parity, b2)
        off = (m_old - m_new) // 2
        return Loop(self.alg, self.parity, b2,
                    np.ascontiguousarray(self.coeffs[off : off + m_new + 1]))

    # -- evaluation -------------------------------------------------------
    def eval(self, x: float) -> np.ndarray:
        return self.eval_many(np.array([x]))[0]

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        half = 0.5 * np.outer(xs, self.idx2)  # (nx, modes)
        c, s = np.cos(half), np.sin(half)
        one = np.einsum("xm,mab->xab", c, self.coeffs)
        gee = np.einsum("xm,mab->xab", s, self.coeffs)
        return one + np.einsum("ab,xbe->xae", self.alg.g, gee)

    # -- linear structure --------------------------------------------------
    def __add__(self, other: "Loop") -> "Loop":
        if self.parity != other.parity:
            raise ValueError("parity mismatch in loop sum")
        b2 = max(self.band2, other.band2)
        a, b = self.pad_to(b2), other.pad_to(b2)
        return Loop(self.alg, self.parity, b2, a.coeffs + b.coeffs)

    def __sub__(self, other: "Loop") -> "Loop":
        return self + (-other)

    def __neg__(self) -> "Loop":
        return replace(self, coeffs=-self.coeffs)

    def __mul__(self, c: float) -> "Loop":
        return replace(self, coeffs=c * self.coeffs)

    __rmul__ = __mul__

    def scale_right(self, K: np.ndarray) -> "Loop":
        """a * K: right multiplication by a constant."""
        return replace(self, coeffs=np.einsum("nab,be->nae", self.coeffs, K))

    def scale_left(self, K: np.ndarray) -> "Loop":
        """K * a: constants pass through z-powers via the g-splitting."""
        Kp, Km = self.alg.split(K)
        plus = np.einsum("ab,nbe->nae", Kp, self.coeffs)
        minus = np.einsum("ab,nbe->nae", Km, self.coeffs)[::-1]
        return replace(self, coeffs=plus + minus)

    def rotate(self, beta: float) -> "Loop":
        """x -> a(x - beta): coefficient n picks up z_beta^{-n} on the left."""
        out = self.coeffs.copy()
        half = -0.5 * beta * self.idx2
        c, s = np.cos(half), np.sin(half)
        out = c[:, None, None] * self.coeffs + s[:, None, None] * np.einsum(
            "ab,nbe->nae", self.alg.g, self.coeffs)
        return replace(self, coeffs=out)

    def reverse(self) -> "Loop":
        """Orientation reversal a(x) -> a(-x)."""
        return replace(self, coeffs=np.ascontiguousarray(self.coeffs[::-1]))

    def hilbert(self) -> "Loop":
        return self.hilbert_poisson(1.0)

    def poisson(self, r: float) -> "Loop":
        lo = -1.0 if self.parity == Parity.INT else 0.0
        if not (lo <= r <= 1.0):
            raise ValueError("poisson parameter %r out of range [%s, 1]" % (r, lo))
        n = np.abs(self.idx2) / 2.0
        if r >= 0.0:
            damp = np.power(r, n)
        else:
            ni = n.astype(int)  # parity 0 only: integer exponents
            damp = np.power(abs(r), ni) * np.where(ni % 2 == 1, -1.0, 1.0)
        return replace(self, coeffs=damp[:, None, None] * self.coeffs)

    def hilbert_poisson(self, r: float) -> "Loop":
        if not (0.0 <= r <= 1.0):
            raise ValueError("hilbert-poisson parameter out of range")
        n = np.abs(self.idx2) / 2.0
        fac = -np.sign(self.idx2) * np.power(r, n)
        out = fac[:, None, None] * np.einsum("ab,nbe->nae", self.alg.g, self.coeffs)
        return replace(self, coeffs=out)

    def mean(self) -> np.ndarray:
        """Integral over one period divided by 2pi (the 0-mode, parity 0 only)."""
        return self.coeff(0)

    def dual(self) -> "Loop":
        """Pointwise transpose, re-expanded in the same z-basis."""
        samples = max(256, 8 * (self.band2 + 2))
        return from_samples(self.alg, self.parity,
                            lambda xs: np.swapaxes(self.eval_many(xs), -1, -2),
                            n_samples=samples).trimmed()

    def sup_coeff(self) -> float:
        return float(np.max(block_norms(self.coeffs)))


# -- constructors -----------------------------------------------------------

def zero_loop(alg: Algebra, parity: Parity, band2: int | None = None) -> Loop:
    b2 = int(parity) if band2 is None else band2
    n = max_index2(parity, b2) + 1
    return Loop(alg, parity, b2, np.zeros((n, alg.dim, alg.dim)))


def const_loop(alg: Algebra, K: np.ndarray) -> Loop:
    L = zero_loop(alg, Parity.INT, 0)
    L.coeffs[0] = K
    return L


def one_loop(alg: Algebra) -> Loop:
    return const_loop(alg, alg.one)


def monomial(alg: Algebra, n2: int, K: np.ndarray | None = None) -> Loop:
    """z^(n2/2) * K."""
    parity = Parity(abs(n2) % 2)
    L = zero_loop(alg, parity, abs(n2) if n2 != 0 else 0)
    L.coeffs[L.pos(n2)] = alg.one if K is None else K
    return L


def loop_cos(alg: Algebra, n2: int, K: np.ndarray | None = None) -> Loop:
    """cos((n2/2) x) * K."""
    K = alg.one if K is None else K
    if n2 == 0:
        return const_loop(alg, K)
    return 0.5 * (monomial(alg, n2, K) + monomial(alg, -n2, K))


def loop_sin(alg: Algebra, n2: int, K: np.ndarray | None = None) -> Loop:
    """sin((n2/2) x) * K."""
    K = alg.one if K is None else K
    if n2 == 0:
        return zero_loop(alg, Parity.INT)
    gK = alg.g @ K
    return 0.5 * (monomial(alg, -n2, gK) - monomial(alg, n2, gK))


def linear_loop(alg: Algebra, G: np.ndarray) -> Loop:
    """cos(x/2) + G sin(x/2); for G = g this is z^(1/2)."""
    return loop_cos(alg, 1) + loop_sin(alg, 1, G)


def loop_mul(a: Loop, b: Loop) -> Loop:
    """Pointwise product; parity adds mod 2; graded convolution of modes."""
    if a.alg.dim != b.alg.dim:
        raise ValueError("algebra mismatch in loop product")
    if not np.array_equal(a.alg.g, b.alg.g):
        raise ValueError("loops use different skew-involutions")
    alg = a.alg
    parity = a.parity + b.parity
    m_a = max_index2(a.parity, a.band2)
    m_b = max_index2(b.parity, b.band2)
    m_out = m_a + m_b
    out = np.zeros((m_out + 1, alg.dim, alg.dim))
    gag = np.einsum("ab,nbe,ef->naf", alg.g, a.coeffs, alg.g)
    a_plus = 0.5 * (a.coeffs - gag)
    a_minus = a.coeffs - a_plus
    for mpos, m2 in enumerate(b.idx2):
        bm = b.coeffs[mpos]
        if not np.any(bm):
            continue
        # k = n + m  (plus part), k = n - m (minus part); n over a's window
        for src, off in ((a_plus, int(m2)), (a_minus, -int(m2))):
            lo2 = -m_a + off
            pos0 = (lo2 + m_out) // 2
            out[pos0 : pos0 + m_a + 1] += np.einsum("nab,be->nae", src, bm)
    return Loop(alg, parity, m_out, out)


def from_samples(alg: Algebra, parity: Parity, fn, n_samples: int = 256,
                 wrong_parity_tol: float = 1e-8) -> Loop:
    """Recover z-basis coefficients from samples over the doubled circle.

    ``fn`` maps an array of angles to an (nx, d, d) array.  The doubled
    circle makes half-integer modes integer; modes of the wrong parity must
    be negligible.
    """
    M = int(n_samples)
    if M % 2:
        M += 1
    xs = 4.0 * np.pi * np.arange(M) / M
    vals = np.asarray(fn(xs), dtype=float)  # (M, d, d)
    spec = np.fft.fft(vals, axis=0) / M     # complex (M, d, d)
    kmax = M // 2 - 1
    m_out = max_index2(parity, kmax if kmax % 2 == int(parity) else kmax - 1)
    out = np.zeros((m_out + 1, alg.dim, alg.dim))
    scale = float(np.max(np.abs(spec))) or 1.0
    bad = 0.0
    for k in range(0, kmax + 1):
        ck = spec[k]
        cmk = spec[-k] if k > 0 else ck
        if k % 2 != int(parity):
            bad = max(bad, float(np.max(np.abs(ck))), float(np.max(np.abs(cmk))))
            continue
        if k == 0:
            out[(0 + m_out) // 2] = ck.real
            continue
        if k > m_out:
            continue
        A = (ck + cmk).real
        B = ((ck - cmk) * 1j).real
        gB = alg.g @ B
        out[(k + m_out) // 2] = 0.5 * (A - gB)
        out[(-k + m_out) // 2] = 0.5 * (A + gB)
    if bad > wrong_parity_tol * scale:
        raise ValueError("samples contain wrong-parity modes (%.2e)" % bad)
    return Loop(alg, parity, m_out, out)


def loop_inverse(a: Loop, n_samples: int | None = None,
                 cond_limit: float = 1e8) -> Loop:
    """Pointwise inverse via sampling; fails loudly at ill-conditioned angles."""
    M = n_samples or max(256, 16 * (a.band2 + 2))
    while True:
        xs = 4.0 * np.pi * np.arange(M) / M
        vals = a.eval_many(xs)
        conds = np.linalg.cond(vals)
        worst = int(np.argmax(conds))
        if conds[worst] > cond_limit:
            raise ValueError(
                "loop not invertible near x = %.6f (cond %.2e)" % (xs[worst], conds[worst])
            )
        inv_vals = np.linalg.inv(vals)
        inv = from_samples(a.alg, a.parity, lambda _xs: inv_vals, n_samples=M)
        # edge of the computed spectrum must have decayed, else resample finer
        edge = block_norms(inv.coeffs[[0, -1]]).max()
        top = max(inv.sup_coeff(), 1e-300)
        if edge <= 1e-12 * top or M >= 1 << 17:
            break
        M *= 2
    # Newton-Schulz polish: pointwise inversion noise sits near the trim
    # cutoff for ill-conditioned loops and would inflate the bandwidth
    b = inv.trimmed(1e-10)
    two = const_loop(a.alg, 2.0 * a.alg.one)
    for _ in range(3):
        b = loop_mul(b, two - loop_mul(a, b)).trimmed(1e-13)
        err = loop_residual(loop_mul(a, b), one_loop(a.alg))
        if err <= 1e-13 * max(1.0, b.sup_coeff()):
            break
    return b.trimmed()


def loop_residual(a: Loop, b: Loop) -> float:
    if a.parity != b.parity:
        raise ValueError("parity mismatch")
    b2 = max(a.band2, b.band2)
    return float(np.max(block_norms(a.pad_to(b2).coeffs - b.pad_to(b2).coeffs)))


# -- distinguished vectors ---------------------------------------------------

def column_of(a: Loop, radius2: int) -> OpVector:
    """S(a): column of Fourier coefficients."""
    v = zero_vector(a.alg, "col", a.parity, radius2, reach2=min(a.band2, radius2))
    m = max_index2(a.parity, min(a.band2, radius2))
    for n2 in range(-m, m + 1, 2):
        v.entries[v.pos(n2)] = a.coeff(n2)
    return v


def row_of(a: Loop, radius2: int) -> OpVector:
    """S-bar(a): row with entry(-n) = [a_n]+ + [a_{-n}]-."""
    v = zero_vector(a.alg, "row", a.parity, radius2, reach2=min(a.band2, radius2))
    m = max_index2(a.parity, min(a.band2, radius2))
    for n2 in range(-m, m + 1, 2):
        v.entries[v.pos(-n2)] = (a.alg.split_plus(a.coeff(n2))
                                 + a.alg.split_minus(a.coeff(-n2)))
    return v


def delta_vector(alg: Algebra, x1: float, parity: Parity, radius2: int,
                 row: bool = False, r: float = 1.0) -> OpVector:
    """Algebraic delta at x1: entries z1^{-n} (column) / z1^{n} (row)."""
    reach = INF if r >= 1.0 else _soft_reach2(r, radius2)
    v = zero_vector(alg, "row" if row else "col", parity, radius2, reach2=reach)
    sgn = 1 if row else -1
    for pos, n2 in enumerate(v.idx2):
        v.entries[pos] = (r ** (abs(n2) / 2.0)) * alg.z_power(x1, sgn * n2)
    return v


def pv_vector(alg: Algebra, x1: float, parity: Parity, radius2: int,
              row: bool = False, r: float = 1.0) -> OpVector:
    """Principal-value pole vector: entries -g sgn(n) z1^{-n} (column)."""
    reach = INF if r >= 1.0 else _soft_reach2(r, radius2)
    v = zero_vector(alg, "row" if row else "col", parity, radius2, reach2=reach)
    sgn = 1 if row else -1
    for pos, n2 in enumerate(v.idx2):
        if n2 == 0:
            continue
        fac = -float(np.sign(n2)) * (r ** (abs(n2) / 2.0))
        v.entries[pos] = fac * (alg.g @ alg.z_power(x1, sgn * n2))
    return v


def _soft_reach2(r: float, radius2: int) -> int:
    if r <= 0.0:
        return 0
    n = int(np.ceil(2.0 * np.log(COEFF_CUTOFF) / np.log(r)))
    return min(n, radius2)
