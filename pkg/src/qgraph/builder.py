"""Construction of the approximating graph for an ST-normalized coupling.

Given the normal form (m, S, T) of a coupling at a degree-n vertex and a
half-length d, the star is disconnected at the vertex and rebuilt from

* the n outer half-lines, now ending at separate vertices v_1 .. v_n,
* for every connected pair {j, k} an inner edge of length 2d made of two
  half-segments that meet at a midpoint vertex; the half adjacent to v_j
  carries local coordinate 0 at v_j and d at the midpoint,
* a delta coupling of strength w_{jk}(d) at each midpoint and w_j(d) at
  each vertex v_j, and a constant magnetic potential A_{(j,k)}(d) on each
  half-segment, with A_{(k,j)} = -A_{(j,k)}.

Which pairs are connected is decided by the index sets N_j: for j <= m the
set N_j collects the k <= m with S_{jk} != 0, the k <= m sharing a column l
with T_jl != 0 != T_kl, and the k > m with T_jk != 0; for k > m it collects
the j <= m with T_jk != 0.  The schedules are chosen so that the family
converges to the original coupling in the norm-resolvent sense as d -> 0+:

    A_{(j,k)}(d) = arg(c)/(2d)            if Re c >= 0,
                   (arg(c) - pi)/(2d)     if Re c < 0,

with c = T_jk for a cross pair j <= m < k and
c = d S_{jk} + sum_l T_jl conj(T_kl) for j, k <= m;

    w_{jk}(d) = (1/d) (-2 + 1/<T_jk>)     for j <= m < k,
    w_{jk}(d) = (1/d) (-2 - 1/<c>)        for j, k <= m,

    w_k(d) = (1 - |N_k| + sum_h <T_hk>)/d                  for k > m,
    w_j(d) = S_jj - |N_j|/d - sum_{k != j, k <= m} <S_jk + (1/d) sum_l T_jl conj(T_kl)>
             + (1/d) sum_l (1 + <T_jl>) <T_jl>             for j <= m,

where <c> denotes |c| for Re c >= 0 and -|c| otherwise.  The strength
w_{jk} is O(1/d) in general and O(1/d^2) exactly when j, k <= m and the
column sum sum_l T_jl conj(T_kl) vanishes.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._util import require_finite_real
from .couplings import STForm
from .errors import DegenerateArgumentError, InputError, SingularDError, StructuralError

__all__ = [
    "NeighborSets",
    "ApproxGraph",
    "Order",
    "bracket",
    "neighbor_sets",
    "magnetic_schedule",
    "inner_delta_schedule",
    "vertex_delta_schedule",
    "build_approx_graph",
    "order_check",
]

#: Entries of S and T smaller than this (relative to the matrix scale) are
#: treated as exact zeros when deciding which inner edges exist.
ZERO_TOL = 1.0e-12

#: Imaginary residue allowed in intermediate complex arithmetic before a
#: schedule value is declared non-real.
IMAG_TOL = 1.0e-14


class Order(Enum):
    """Asymptotic order of an inner-edge strength as d -> 0."""

    D_INV = "O(1/d)"
    D_INV_SQ = "O(1/d^2)"


@dataclass(frozen=True)
class NeighborSets:
    """The index sets N_j: which pairs of edges are joined by inner edges.

    ``m`` is None for sets restored from serialized graphs, where the
    originating normal form is unknown.
    """

    n: int
    m: int | None
    sets: dict[int, frozenset[int]]

    def pairs(self) -> list[tuple[int, int]]:
        """All connected pairs (j, k) with j < k, in lexicographic order."""
        return [
            (j, k)
            for j in range(1, self.n + 1)
            for k in sorted(self.sets[j])
            if j < k
        ]


@dataclass(frozen=True)
class ApproxGraph:
    """The approximating graph at a fixed half-length d.

    ``w_vertex`` maps every edge index j to the strength at v_j, ``w_inner``
    maps each connected pair (j, k), j < k, to the midpoint strength, and
    ``a_inner`` holds the magnetic potential for both orientations of each
    half-segment, with a_inner[(k, j)] = -a_inner[(j, k)].
    """

    n: int
    d: float
    neighbors: NeighborSets
    w_vertex: dict[int, float]
    w_inner: dict[tuple[int, int], float]
    a_inner: dict[tuple[int, int], float]
    source_st: STForm | None = None


# ---------------------------------------------------------------------------
# Elementary pieces
# ---------------------------------------------------------------------------

def bracket(c: complex) -> float:
    """Signed modulus <c>: |c| when Re c >= 0, else -|c| (so <c> = c for real c)."""
    c = complex(c)
    if not (np.isfinite(c.real) and np.isfinite(c.imag)):
        raise InputError(f"bracket argument must be finite, got {c!r}")
    return abs(c) if c.real >= 0.0 else -abs(c)


def _zero_scale(st: STForm) -> float:
    mats = [np.abs(st.S).max() if st.S.size else 0.0, np.abs(st.T).max() if st.T.size else 0.0]
    return ZERO_TOL * max(1.0, *mats)


def _nonzero(value: complex, cutoff: float) -> bool:
    return abs(value) > cutoff


def neighbor_sets(st: STForm) -> NeighborSets:
    """Build the index sets N_j from the sparsity pattern of S and T.

    Membership is a union of three rules; entries below a small relative
    cutoff count as zero so that reconstructed normal forms with rounding
    residue do not sprout spurious edges.
    """
    n, m = st.n, st.m
    cutoff = _zero_scale(st)
    sets: dict[int, set[int]] = {j: set() for j in range(1, n + 1)}
    for j in range(1, m + 1):
        for k in range(m + 1, n + 1):
            if _nonzero(st.T[j - 1, k - m - 1], cutoff):
                sets[j].add(k)
                sets[k].add(j)
    for j in range(1, m + 1):
        for k in range(j + 1, m + 1):
            coupled = _nonzero(st.S[j - 1, k - 1], cutoff) or any(
                _nonzero(st.T[j - 1, l], cutoff) and _nonzero(st.T[k - 1, l], cutoff)
                for l in range(n - m)
            )
            if coupled:
                sets[j].add(k)
                sets[k].add(j)
    return NeighborSets(n=n, m=m, sets={j: frozenset(s) for j, s in sets.items()})


def _check_d(d: float) -> float:
    d = require_finite_real(d, "d")
    if not 0.0 < d <= 1.0:
        raise InputError(f"half-length d must lie in (0, 1], got {d}")
    return d


def _require_pair(st: STForm, nbrs: NeighborSets, j: int, k: int) -> None:
    if not (1 <= j <= st.n and 1 <= k <= st.n) or j == k:
        raise StructuralError(f"invalid edge pair ({j}, {k}) for n={st.n}")
    if k not in nbrs.sets[j]:
        raise InputError(f"edges {j} and {k} are not joined by an inner edge")


def _pair_argument(st: STForm, d: float, j: int, k: int) -> complex:
    """The complex quantity whose phase and signed modulus drive a pair.

    For a cross pair j <= m < k this is T_jk; for j, k <= m it is
    d S_{jk} + sum_l T_jl conj(T_kl).
    """
    m = st.m
    if j <= m < k:
        return complex(st.T[j - 1, k - m - 1])
    if j <= m and k <= m:
        overlap = complex(np.dot(st.T[j - 1, :], st.T[k - 1, :].conj())) if st.T.size else 0.0
        return d * complex(st.S[j - 1, k - 1]) + overlap
    raise StructuralError(f"pair ({j}, {k}) has no inner-edge parameters (both > m)")


def magnetic_schedule(st: STForm, d: float, j: int, k: int) -> float:
    """Magnetic potential A_{(j,k)}(d) on the half-segment adjacent to v_j.

    The phase is the principal argument of the pair quantity c, shifted by
    -pi when Re c < 0 (the sign of <c> absorbs the remaining half-turn),
    and divided by the accumulated path length 2d.  Antisymmetric in (j, k).
    """
    d = _check_d(d)
    nbrs = neighbor_sets(st)
    _require_pair(st, nbrs, j, k)
    if j > k:
        return -magnetic_schedule(st, d, k, j)
    c = _pair_argument(st, d, j, k)
    if abs(c) <= _zero_scale(st) * d:
        raise DegenerateArgumentError(
            f"phase of pair ({j}, {k}) undefined: argument cancels at d={d}", pair=(j, k)
        )
    phase = cmath.phase(c)
    if c.real < 0.0:
        phase -= cmath.pi
    return phase / (2.0 * d)


def inner_delta_schedule(st: STForm, d: float, j: int, k: int) -> float:
    """Midpoint strength w_{jk}(d) of the inner edge joining j and k."""
    d = _check_d(d)
    nbrs = neighbor_sets(st)
    _require_pair(st, nbrs, j, k)
    lo, hi = min(j, k), max(j, k)
    c = _pair_argument(st, d, lo, hi)
    signed = bracket(c)
    if st.m < hi:
        # cross pair: the pre guarantees T_{lo,hi} != 0
        return (-2.0 + 1.0 / signed) / d
    if signed == 0.0 or abs(signed) <= _zero_scale(st) * d:
        raise SingularDError(
            f"strength of pair ({lo}, {hi}) undefined at d={d}: "
            "d S_jk cancels the T-column overlap; use a different d",
            pair=(lo, hi),
        )
    return (-2.0 - 1.0 / signed) / d


def vertex_delta_schedule(st: STForm, nbrs: NeighborSets, d: float, j: int) -> float:
    """Vertex strength w_j(d) at the endpoint of the j-th outer edge."""
    d = _check_d(d)
    if not 1 <= j <= st.n:
        raise StructuralError(f"edge index {j} out of range 1..{st.n}")
    m = st.m
    degree = len(nbrs.sets[j])
    if j > m:
        total = sum(bracket(st.T[h - 1, j - m - 1]) for h in range(1, m + 1))
        return (1.0 - degree + total) / d
    diag = complex(st.S[j - 1, j - 1])
    if abs(diag.imag) > IMAG_TOL * max(1.0, abs(diag)):
        raise InputError(f"S_{{{j}{j}}} must be real, got {diag}")
    value = diag.real - degree / d
    for k in range(1, m + 1):
        if k == j:
            continue
        overlap = complex(np.dot(st.T[j - 1, :], st.T[k - 1, :].conj())) if st.T.size else 0.0
        value -= bracket(complex(st.S[j - 1, k - 1]) + overlap / d)
    for l in range(st.n - m):
        t_br = bracket(st.T[j - 1, l])
        value += (1.0 + t_br) * t_br / d
    return value


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def build_approx_graph(st: STForm, d: float) -> ApproxGraph:
    """Assemble neighbor sets and all three schedules into one graph."""
    d = _check_d(d)
    nbrs = neighbor_sets(st)
    w_vertex = {
        j: vertex_delta_schedule(st, nbrs, d, j) for j in range(1, st.n + 1)
    }
    w_inner: dict[tuple[int, int], float] = {}
    a_inner: dict[tuple[int, int], float] = {}
    for j, k in nbrs.pairs():
        w_inner[(j, k)] = inner_delta_schedule(st, d, j, k)
        a_jk = magnetic_schedule(st, d, j, k)
        a_inner[(j, k)] = a_jk
        a_inner[(k, j)] = -a_jk
    return ApproxGraph(
        n=st.n,
        d=d,
        neighbors=nbrs,
        w_vertex=w_vertex,
        w_inner=w_inner,
        a_inner=a_inner,
        source_st=st,
    )


def order_check(st: STForm, pair: tuple[int, int]) -> Order:
    """Asymptotic order of w_{jk}(d): O(1/d^2) exactly on the degenerate pairs.

    A pair j, k <= m collects the extra power of 1/d iff the column overlap
    sum_l T_jl conj(T_kl) vanishes; every cross pair stays at O(1/d).
    """
    j, k = pair
    nbrs = neighbor_sets(st)
    _require_pair(st, nbrs, j, k)
    lo, hi = min(j, k), max(j, k)
    if hi > st.m:
        return Order.D_INV
    overlap = complex(np.dot(st.T[lo - 1, :], st.T[hi - 1, :].conj())) if st.T.size else 0.0
    if abs(overlap) <= _zero_scale(st):
        return Order.D_INV_SQ
    return Order.D_INV
