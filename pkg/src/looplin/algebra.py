"""Coefficient algebra: d x d real matrices with a distinguished skew-involution.

Elements of the algebra are plain ``(d, d)`` float arrays.  The ``Algebra``
object fixes the dimension and the skew-involution ``g`` (``g @ g = -1``),
which plays the role of the imaginary unit in the real setting.  The
g-invariant / g-skew-invariant splitting ``[K]+ = (K - gKg)/2``,
``[K]- = (K + gKg)/2`` governs how constants pass through the circle
generator ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def standard_g(dim: int) -> np.ndarray:
    """Canonical skew-involution: block-diagonal 2x2 rotations by +/- 90 degrees."""
    if dim % 2 != 0:
        raise ValueError("skew-involutions need even dimension, got %d" % dim)
    g2 = np.array([[0.0, -1.0], [1.0, 0.0]])
    g = np.zeros((dim, dim))
    for b in range(dim // 2):
        blk = g2 if b % 2 == 0 else -g2
        g[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = blk
    return g


def is_skew_involution(g: np.ndarray, tol: float = 1e-12) -> bool:
    d = g.shape[0]
    return g.shape == (d, d) and np.max(np.abs(g @ g + np.eye(d))) <= tol


@dataclass(frozen=True)
class Algebra:
    """Matrix algebra M_d(R) together with a distinguished skew-involution g."""

    dim: int
    g: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "g", g)
        if g.shape != (self.dim, self.dim):
            raise ValueError("g has shape %s, expected (%d, %d)" % (g.shape, self.dim, self.dim))
        if not is_skew_involution(g):
            raise ValueError("g*g != -1: not a skew-involution")

    @classmethod
    def standard(cls, dim: int = 2) -> "Algebra":
        return cls(dim, standard_g(dim))

    def with_g(self, g: np.ndarray) -> "Algebra":
        return Algebra(self.dim, g)

    def negated(self) -> "Algebra":
        return Algebra(self.dim, -self.g)

    @property
    def one(self) -> np.ndarray:
        return np.eye(self.dim)

    @property
    def zero(self) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def scalar(self, c: float) -> np.ndarray:
        return c * np.eye(self.dim)

    def split_plus(self, K: np.ndarray) -> np.ndarray:
        """g-invariant part (K - gKg)/2; commutes with g."""
        return 0.5 * (K - self.g @ K @ self.g)

    def split_minus(self, K: np.ndarray) -> np.ndarray:
        """g-skew-invariant part (K + gKg)/2; anticommutes with g."""
        return 0.5 * (K + self.g @ K @ self.g)

    def split(self, K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        gKg = self.g @ K @ self.g
        return 0.5 * (K - gKg), 0.5 * (K + gKg)

    def z_power(self, x: float, n2: int) -> np.ndarray:
        """z^(n2/2)(x) = cos(n2 x / 2) + g sin(n2 x / 2); exponents are doubled."""
        half = 0.5 * n2 * x
        return np.cos(half) * np.eye(self.dim) + np.sin(half) * self.g

    def random(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return scale * rng.standard_normal((self.dim, self.dim))

    def random_invertible(self, rng: np.random.Generator) -> np.ndarray:
        while True:
            K = rng.standard_normal((self.dim, self.dim))
            if abs(np.linalg.det(K)) > 0.1:
                return K


def opposite(K: np.ndarray) -> np.ndarray:
    """Opposite element, realized by the transpose anti-isomorphism."""
    return np.asarray(K).T.copy()


def op_norm(K: np.ndarray) -> float:
    """Spectral norm of a single algebra element."""
    return float(np.linalg.norm(K, 2))


def block_norms(blocks: np.ndarray) -> np.ndarray:
    """Spectral norms over the leading axes of an (..., d, d) array."""
    if blocks.size == 0:
        return np.zeros(blocks.shape[:-2])
    return np.linalg.norm(blocks, ord=2, axis=(-2, -1))
