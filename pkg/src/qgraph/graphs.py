"""Metric-graph systems: edges, vertex conditions, truncation, gauge removal.

A :class:`MetricGraphSystem` is the generic solver input: a collection of
edges (finite intervals or half-lines), each carrying a constant tangential
magnetic potential a, glued at vertices by either a delta coupling of
strength w or a general coupling matrix pair.  The Schrödinger operator acts
as -(d/ds + i a)^2 f on every edge; at a vertex the boundary data are the
limit value of f and the inward covariant derivative Df = f' + i a f on each
incident edge end.

A delta condition requires all incident values to agree and the inward
covariant derivatives to sum to w times the common value.  A general
condition imposes A [values] + B [inward derivatives] = 0 over the ordered
incident ends.

Constant potentials are removable: substituting f_e = exp(-i a_e s) g_e
turns the operator into the free one while multiplying the boundary data at
the far end of each edge by the phase exp(-i a_e l_e).  The transformed
system carries those phases inside its vertex conditions, and its spectrum
is identical — which the solver tests exploit as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from ._util import require_finite_real
from .builder import ApproxGraph
from .couplings import STForm, VertexCoupling, ab_from_st
from .errors import InputError, StructuralError

__all__ = [
    "Edge",
    "EndRef",
    "DeltaCondition",
    "CouplingCondition",
    "dirichlet_condition",
    "Vertex",
    "EndCondition",
    "Truncation",
    "MetricGraphSystem",
    "truncate",
    "split_components",
    "star_system",
    "system_from_approx",
    "gauge_transform",
]

#: An edge end: (edge id, end index), end 0 at local coordinate 0 and end 1
#: at local coordinate length (finite edges only).
EndRef = tuple[object, int]


@dataclass(frozen=True)
class Edge:
    """An interval of the metric graph; ``length=inf`` marks a half-line."""

    id: object
    length: float
    a: float = 0.0

    def __post_init__(self):
        if self.length != math.inf:
            length = require_finite_real(self.length, "length")
            if length <= 0:
                raise InputError(f"edge length must be positive, got {length}")
            object.__setattr__(self, "length", length)
        object.__setattr__(self, "a", require_finite_real(self.a, "a"))

    @property
    def is_half_line(self) -> bool:
        return self.length == math.inf


@dataclass(frozen=True)
class DeltaCondition:
    """Delta coupling of strength w: continuity plus a derivative-sum jump."""

    w: float

    def __post_init__(self):
        object.__setattr__(self, "w", require_finite_real(self.w, "w"))


@dataclass(frozen=True)
class CouplingCondition:
    """General condition A [values] + B [derivatives] = 0 on the ordered ends."""

    coupling: VertexCoupling


def dirichlet_condition() -> CouplingCondition:
    """Degree-1 Dirichlet condition f = 0."""
    return CouplingCondition(VertexCoupling(1, np.eye(1), np.zeros((1, 1))))


@dataclass(frozen=True)
class Vertex:
    """A vertex: an ordered tuple of incident edge ends plus a condition."""

    id: object
    condition: DeltaCondition | CouplingCondition
    ends: tuple[EndRef, ...]

    def __post_init__(self):
        if not self.ends:
            raise StructuralError(f"vertex {self.id!r} has no incident edge ends")
        if isinstance(self.condition, CouplingCondition):
            if self.condition.coupling.n != len(self.ends):
                raise StructuralError(
                    f"vertex {self.id!r}: coupling degree "
                    f"{self.condition.coupling.n} != {len(self.ends)} incident ends"
                )


class EndCondition(Enum):
    """Boundary condition applied where a half-line is cut."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class Truncation:
    """Cut every half-line at length L and apply the end condition there."""

    L: float = 1.0
    end: EndCondition = EndCondition.DIRICHLET

    def __post_init__(self):
        length = require_finite_real(self.L, "L")
        if length <= 0:
            raise InputError(f"truncation length must be positive, got {length}")
        object.__setattr__(self, "L", length)


@dataclass(frozen=True)
class MetricGraphSystem:
    """Edges plus vertices; every finite end attached to exactly one vertex."""

    edges: tuple[Edge, ...]
    vertices: tuple[Vertex, ...]
    truncation: Truncation | None = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "vertices", tuple(self.vertices))
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise StructuralError("edge ids must be unique")
        expected: set[EndRef] = set()
        for edge in self.edges:
            expected.add((edge.id, 0))
            if not edge.is_half_line:
                expected.add((edge.id, 1))
        seen: set[EndRef] = set()
        for vertex in self.vertices:
            for end in vertex.ends:
                if end not in expected:
                    raise StructuralError(
                        f"vertex {vertex.id!r} references unknown edge end {end!r}"
                    )
                if end in seen:
                    raise StructuralError(f"edge end {end!r} attached twice")
                seen.add(end)
        missing = expected - seen
        if missing:
            raise StructuralError(f"unattached edge ends: {sorted(map(repr, missing))}")

    @property
    def edge_map(self) -> dict[object, Edge]:
        return {e.id: e for e in self.edges}

    @property
    def half_lines(self) -> tuple[Edge, ...]:
        """Half-line edges in listed order; this order defines the channels."""
        return tuple(e for e in self.edges if e.is_half_line)

    @property
    def is_compact(self) -> bool:
        return not any(e.is_half_line for e in self.edges)


def truncate(
    sys: MetricGraphSystem,
    L: float | None = None,
    end: EndCondition | None = None,
) -> MetricGraphSystem:
    """Replace each half-line by a finite edge of length L with an end vertex.

    Arguments override the system's own truncation spec; with neither given,
    the default is L = 1 with Dirichlet ends.
    """
    spec = sys.truncation or Truncation()
    if L is not None:
        spec = replace(spec, L=L)
    if end is not None:
        spec = replace(spec, end=end)
    if sys.is_compact:
        return MetricGraphSystem(sys.edges, sys.vertices, truncation=None)
    edges = []
    extra_vertices = []
    for edge in sys.edges:
        if not edge.is_half_line:
            edges.append(edge)
            continue
        edges.append(Edge(id=edge.id, length=spec.L, a=edge.a))
        if spec.end is EndCondition.DIRICHLET:
            condition: DeltaCondition | CouplingCondition = dirichlet_condition()
        else:
            condition = DeltaCondition(0.0)
        extra_vertices.append(
            Vertex(id=("end", edge.id), condition=condition, ends=((edge.id, 1),))
        )
    return MetricGraphSystem(
        edges=tuple(edges),
        vertices=sys.vertices + tuple(extra_vertices),
        truncation=None,
    )


def split_components(sys: MetricGraphSystem) -> list[MetricGraphSystem]:
    """Connected components as separate systems, preserving listed order."""
    parent: dict[object, object] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent.setdefault(x, x)
        parent.setdefault(y, y)
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for edge in sys.edges:
        parent.setdefault(("e", edge.id), ("e", edge.id))
    for vertex in sys.vertices:
        parent.setdefault(("v", vertex.id), ("v", vertex.id))
        for edge_id, _ in vertex.ends:
            union(("v", vertex.id), ("e", edge_id))
    roots: dict[object, int] = {}
    for edge in sys.edges:
        root = find(("e", edge.id))
        roots.setdefault(root, len(roots))
    groups: list[tuple[list[Edge], list[Vertex]]] = [([], []) for _ in roots]
    for edge in sys.edges:
        groups[roots[find(("e", edge.id))]][0].append(edge)
    for vertex in sys.vertices:
        groups[roots[find(("v", vertex.id))]][1].append(vertex)
    return [
        MetricGraphSystem(tuple(es), tuple(vs), truncation=sys.truncation)
        for es, vs in groups
    ]


def star_system(
    coupling: VertexCoupling | STForm,
    truncation: Truncation | None = None,
) -> MetricGraphSystem:
    """The limit operator: n half-lines meeting in one coupling vertex.

    Edge j (1-based) is the j-th half-line; an ST form is first expanded to
    its (A, B) pair, so the edge order is the renumbered one.
    """
    c = ab_from_st(coupling) if isinstance(coupling, STForm) else coupling
    edges = tuple(Edge(id=j, length=math.inf) for j in range(1, c.n + 1))
    center = Vertex(
        id="v",
        condition=CouplingCondition(c),
        ends=tuple((j, 0) for j in range(1, c.n + 1)),
    )
    return MetricGraphSystem(edges=edges, vertices=(center,), truncation=truncation)


def system_from_approx(
    g: ApproxGraph,
    truncation: Truncation | None = None,
) -> MetricGraphSystem:
    """Metric-graph system of an approximating graph.

    Outer edge j is the half-line with id j; the half-segment of the inner
    edge {j, k} adjacent to v_j has id ``"inner-j-k"``, local coordinate 0
    at v_j and d at the midpoint, and carries the potential A_{(j,k)}.
    With this orientation the accumulated phases reproduce the arguments of
    the complex coupling entries in the d -> 0 limit.
    """
    edges: list[Edge] = [Edge(id=j, length=math.inf) for j in range(1, g.n + 1)]
    vertices: list[Vertex] = []
    for j, k in g.neighbors.pairs():
        for lo, hi in ((j, k), (k, j)):
            edges.append(
                Edge(id=f"inner-{lo}-{hi}", length=g.d, a=g.a_inner[(lo, hi)])
            )
        vertices.append(
            Vertex(
                id=f"mid-{j}-{k}",
                condition=DeltaCondition(g.w_inner[(j, k)]),
                ends=((f"inner-{j}-{k}", 1), (f"inner-{k}-{j}", 1)),
            )
        )
    for j in range(1, g.n + 1):
        ends: list[EndRef] = [(j, 0)]
        for k in sorted(g.neighbors.sets[j]):
            ends.append((f"inner-{j}-{k}", 0))
        vertices.append(
            Vertex(id=f"v-{j}", condition=DeltaCondition(g.w_vertex[j]), ends=tuple(ends))
        )
    return MetricGraphSystem(
        edges=tuple(edges), vertices=tuple(vertices), truncation=truncation
    )


def _delta_matrices(w: float, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """The (A, B) pair of a delta condition of strength w and given degree."""
    a_mat = np.zeros((degree, degree), dtype=complex)
    b_mat = np.zeros((degree, degree), dtype=complex)
    for i in range(degree - 1):
        a_mat[i, i] = 1.0
        a_mat[i, i + 1] = -1.0
    a_mat[degree - 1, 0] = -w
    b_mat[degree - 1, :] = 1.0
    return a_mat, b_mat


def gauge_transform(
    sys: MetricGraphSystem,
) -> tuple[MetricGraphSystem, dict[EndRef, complex]]:
    """Remove constant magnetic potentials at the price of phased conditions.

    Returns a unitarily equivalent system with every ``a = 0`` together with
    the phase table: the multiplier exp(-i a l) picked up by the boundary
    data at end 1 of each finite edge (end 0 keeps phase 1).  Vertices whose
    incident phases are all 1 keep their original condition; the others get
    a general coupling with the phases folded into the matrix columns, which
    leaves the spectrum unchanged.
    """
    phases: dict[EndRef, complex] = {}
    for edge in sys.edges:
        phases[(edge.id, 0)] = 1.0 + 0.0j
        if not edge.is_half_line:
            phases[(edge.id, 1)] = complex(np.exp(-1j * edge.a * edge.length))
    new_edges = tuple(replace(e, a=0.0) for e in sys.edges)
    new_vertices = []
    for vertex in sys.vertices:
        end_phases = np.array([phases[end] for end in vertex.ends])
        if np.allclose(end_phases, 1.0, rtol=0.0, atol=0.0):
            new_vertices.append(vertex)
            continue
        if isinstance(vertex.condition, DeltaCondition):
            a_mat, b_mat = _delta_matrices(vertex.condition.w, len(vertex.ends))
        else:
            a_mat = vertex.condition.coupling.A
            b_mat = vertex.condition.coupling.B
        phased = CouplingCondition(
            VertexCoupling(
                n=len(vertex.ends),
                A=a_mat * end_phases[np.newaxis, :],
                B=b_mat * end_phases[np.newaxis, :],
            )
        )
        new_vertices.append(replace(vertex, condition=phased))
    table = {
        end: phase
        for end, phase in phases.items()
        if any(end in v.ends for v in sys.vertices)
    }
    return (
        MetricGraphSystem(new_edges, tuple(new_vertices), truncation=sys.truncation),
        table,
    )
