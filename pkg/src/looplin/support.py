"""Support descriptors for windowed operator matrices.

A descriptor over-approximates where a matrix can have non-negligible
entries, in doubled index units.  An entry (n, m) may be nonzero only if

    min(|n - m|, |n + m|) <= band        (two-diagonal band: shifts and
                                          flipped shifts both fall here)
 or |n| <= hstrip                        (full rows near the center)
 or |m| <= vstrip                        (full columns near the center)
 or (|n| <= rrow and |m| <= rcol)        (central rectangle)

``-1`` marks an absent component; ``INF`` saturates.  The descriptor drives
the validity bookkeeping: a product entry counts as exact only when every
inner index that could contribute lies inside both factors' exact squares.
"""

from __future__ import annotations

from dataclasses import dataclass

INF = 10**9


def _plus(a: int, b: int) -> int:
    return INF if (a >= INF or b >= INF) else a + b


@dataclass(frozen=True)
class Support:
    band: int = -1
    hstrip: int = -1
    vstrip: int = -1
    rrow: int = -1
    rcol: int = -1

    def __post_init__(self):
        if (self.rrow < 0) != (self.rcol < 0):
            raise ValueError("rectangle needs both bounds")

    @classmethod
    def banded(cls, band2: int) -> "Support":
        return cls(band=min(max(int(band2), 0), INF))

    @classmethod
    def central(cls, box2: int) -> "Support":
        b = min(max(int(box2), 0), INF)
        return cls(rrow=b, rcol=b)

    @classmethod
    def rect(cls, rrow2: int, rcol2: int) -> "Support":
        return cls(rrow=min(max(int(rrow2), 0), INF),
                   rcol=min(max(int(rcol2), 0), INF))

    @classmethod
    def full(cls) -> "Support":
        return cls(band=INF)

    @property
    def is_full(self) -> bool:
        return (self.band >= INF or self.hstrip >= INF or self.vstrip >= INF
                or (self.rrow >= INF and self.rcol >= INF))

    def pad(self, extra2: int) -> "Support":
        def w(v):
            return -1 if v < 0 else _plus(v, extra2)
        return Support(w(self.band), w(self.hstrip), w(self.vstrip),
                       w(self.rrow), w(self.rcol))

    def union(self, other: "Support") -> "Support":
        rr, rc = self.rrow, self.rcol
        if other.rrow >= 0:
            if rr < 0:
                rr, rc = other.rrow, other.rcol
            else:
                rr, rc = max(rr, other.rrow), max(rc, other.rcol)
        return Support(
            max(self.band, other.band),
            max(self.hstrip, other.hstrip),
            max(self.vstrip, other.vstrip),
            rr, rc,
        )

    def transposed(self) -> "Support":
        return Support(self.band, self.vstrip, self.hstrip, self.rcol, self.rrow)

    def _components(self):
        out = []
        if self.band >= 0:
            out.append(("band", self.band, self.band))
        if self.hstrip >= 0:
            out.append(("h", self.hstrip, self.hstrip))
        if self.vstrip >= 0:
            out.append(("v", self.vstrip, self.vstrip))
        if self.rrow >= 0:
            out.append(("rect", self.rrow, self.rcol))
        return out


def _bounds(row: int | None, col: int | None) -> Support:
    """Tightest single-component superset from row/col index bounds."""
    row = None if (row is not None and row >= INF) else row
    col = None if (col is not None and col >= INF) else col
    if row is None and col is None:
        return Support.full()
    if col is None:
        return Support(hstrip=row)
    if row is None:
        return Support(vstrip=col)
    return Support.rect(row, col)


def _pair(ca: str, ra: int, cca: int, cb: str, rb: int, ccb: int) -> Support:
    """Superset support of (A restricted to one component) @ (B likewise)."""
    if ca == "band":
        if cb == "band":
            return Support(band=_plus(ra, rb))
        if cb == "h":
            return _bounds(_plus(rb, ra), None)
        if cb == "v":
            return _bounds(None, ccb)
        return _bounds(_plus(rb, ra), ccb)  # rect: k <= rb, m <= ccb
    if ca == "h":
        if cb in ("band", "h"):
            return _bounds(ra, None)
        return _bounds(ra, ccb)  # v or rect: cols bounded by B
    if ca == "v":
        if cb == "band":
            return _bounds(None, _plus(cca, rb))
        if cb == "h":
            return Support.full()
        return _bounds(None, ccb)
    # ca == "rect": rows <= ra, inner k <= cca
    if cb == "band":
        return _bounds(ra, _plus(cca, rb))
    if cb == "h":
        return _bounds(ra, None)
    return _bounds(ra, ccb)


def product_support(A: Support, B: Support) -> Support:
    out = Support()
    for ca, ra, cca in A._components():
        for cb, rb, ccb in B._components():
            out = out.union(_pair(ca, ra, cca, cb, rb, ccb))
    return out


def _side_best(sup: Support, V: int, left: bool) -> int:
    """Best certifiable window v relying on this factor to bound inner indices."""
    blocked = sup.hstrip >= 0 if left else sup.vstrip >= 0
    if blocked:
        return -1
    consts = [0]
    if left:
        if sup.vstrip >= 0:
            consts.append(sup.vstrip)
        if sup.rcol >= 0:
            consts.append(sup.rcol)
    else:
        if sup.hstrip >= 0:
            consts.append(sup.hstrip)
        if sup.rrow >= 0:
            consts.append(sup.rrow)
    const = max(consts)
    if const > V:
        return -1
    if sup.band < 0:
        return V
    if sup.band >= INF:
        return -1
    return min(V, V - sup.band)


def product_valid2(A_sup: Support, A_valid2: int, B_sup: Support, B_valid2: int) -> int:
    """Largest v with all product entries |n|,|m| <= v exact; -1 when none."""
    V = min(A_valid2, B_valid2)
    if V < 0:
        return -1
    return max(_side_best(A_sup, V, left=True), _side_best(B_sup, V, left=False))


def matvec_valid2(A_sup: Support, A_valid2: int, vec_reach2: int, vec_valid2: int) -> int:
    """Validity of A @ b for a column vector supported in |k| <= vec_reach2."""
    V = min(A_valid2, vec_valid2)
    if V < 0:
        return -1
    best = _side_best(A_sup, V, left=True)
    if vec_reach2 <= V:
        best = max(best, V)
    return best


def vecmat_valid2(vec_reach2: int, vec_valid2: int, B_sup: Support, B_valid2: int) -> int:
    V = min(B_valid2, vec_valid2)
    if V < 0:
        return -1
    best = _side_best(B_sup, V, left=False)
    if vec_reach2 <= V:
        best = max(best, V)
    return best


def matvec_reach2(A_sup: Support, vec_reach2: int) -> int:
    """Support reach of A @ b."""
    if A_sup.vstrip >= 0:
        return INF
    out = max(A_sup.hstrip, 0)
    if A_sup.rrow >= 0:
        out = max(out, A_sup.rrow)
    if A_sup.band >= 0:
        out = max(out, _plus(vec_reach2, A_sup.band))
    return min(out, INF)
