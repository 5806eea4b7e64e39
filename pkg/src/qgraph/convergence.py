"""Convergence harness: sweep d -> 0 and fit the approximation rate.

The approximating family H_d is compared against the limit star operator
H* through three metrics,

* ``ScatteringNorm`` — max over a momentum list of the spectral norm of
  the difference of on-shell scattering matrices,
* ``HSResolvent`` — a Hilbert-Schmidt surrogate for the resolvent
  difference: both systems are truncated at length L, the kernels are
  sampled on a tensor-product Gauss-Legendre grid, and the star kernel is
  extended by zero to the inner edges, so their rows and columns
  contribute |G_d|^2 alone,
* ``EigGap`` — the largest displacement among the lowest eigenvalues of
  the truncated systems above a coupling-dependent floor that excludes
  the deep bound states generated by the O(1/d^2) inner strengths.

``run_sweep`` evaluates one metric over a decreasing list of d values,
skipping (with a recorded reason) any d where the construction or the
solve degenerates, and fits log(metric) against log(d) by ordinary least
squares once at least four valid points survive.  Reports serialize to
CSV with one ``d,metric,status`` row per d followed by ``slope``,
``intercept`` and ``residual`` trailer rows; commas inside status
messages are replaced by semicolons so the file stays three columns wide.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._util import DEFAULT_TOL, require_finite_real
from .builder import build_approx_graph
from .couplings import STForm, ab_from_st, star_scattering
from .errors import ConditioningError, InputError, QGraphError, ResonantKError
from .graphs import MetricGraphSystem, star_system, system_from_approx, truncate
from .solver import effective_scattering, eigenvalues_compact, greens_function

__all__ = [
    "DEFAULT_D_VALUES",
    "ScatteringNorm",
    "HSResolvent",
    "EigGap",
    "MetricSpec",
    "SweepConfig",
    "SweepPoint",
    "ConvergenceReport",
    "QuadratureWarning",
    "eigengap_floor",
    "metric_scattering",
    "metric_hs_resolvent",
    "metric_eigengap",
    "fit_rate",
    "run_sweep",
    "report_to_csv",
    "write_report_csv",
]

#: Default sweep grid d = 2^-p, p = 2..10, decreasing.
DEFAULT_D_VALUES: tuple[float, ...] = tuple(2.0**-p for p in range(2, 11))

#: Relative change on doubling quad_n above which the quadrature is
#: reported as unstable.
QUAD_STABILITY_RTOL = 0.01


class QuadratureWarning(UserWarning):
    """The Hilbert-Schmidt quadrature looks under-resolved at this quad_n."""


# ---------------------------------------------------------------------------
# Metric specifications and sweep configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScatteringNorm:
    """Compare on-shell scattering matrices at each momentum in k_list."""

    k_list: tuple[float, ...] = (0.5, 1.0, 2.0)

    def __post_init__(self):
        ks = tuple(require_finite_real(k, "k") for k in self.k_list)
        if not ks:
            raise InputError("k_list must not be empty")
        if any(k <= 0 for k in ks):
            raise InputError(f"momenta must be positive, got {ks}")
        object.__setattr__(self, "k_list", ks)


@dataclass(frozen=True)
class HSResolvent:
    """Compare resolvent kernels of the L-truncated systems at z.

    ``quad_n`` Gauss-Legendre nodes are placed on every edge; values below
    64 are permitted so that instability is observable, but they are
    outside the supported accuracy contract and will normally trigger the
    stability warning.
    """

    z: complex = -1.0
    L: float = 1.0
    quad_n: int = 64

    def __post_init__(self):
        z = complex(self.z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise InputError(f"z must be finite, got {z!r}")
        object.__setattr__(self, "z", z)
        length = require_finite_real(self.L, "L")
        if length <= 0:
            raise InputError(f"truncation length must be positive, got {length}")
        object.__setattr__(self, "L", length)
        if int(self.quad_n) != self.quad_n or self.quad_n < 4:
            raise InputError(f"quad_n must be an integer >= 4, got {self.quad_n}")
        object.__setattr__(self, "quad_n", int(self.quad_n))


@dataclass(frozen=True)
class EigGap:
    """Compare the lowest `count` truncated eigenvalues above the floor."""

    count: int = 5
    L: float = 1.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise InputError(f"count must be a positive integer, got {self.count}")
        object.__setattr__(self, "count", int(self.count))
        length = require_finite_real(self.L, "L")
        if length <= 0:
            raise InputError(f"truncation length must be positive, got {length}")
        object.__setattr__(self, "L", length)


MetricSpec = ScatteringNorm | HSResolvent | EigGap


@dataclass(frozen=True)
class SweepConfig:
    """One convergence experiment: a coupling, a metric, and a d grid.

    Metric values at or below ``tol`` count as converged to roundoff and
    are excluded from the rate fit (their rows stay in the report).
    """

    st: STForm
    metric: MetricSpec
    d_values: tuple[float, ...] = DEFAULT_D_VALUES
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        ds = tuple(require_finite_real(d, "d") for d in self.d_values)
        for d in ds:
            if not 0.0 < d <= 1.0:
                raise InputError(f"d values must lie in (0, 1], got {d}")
        if any(b >= a for a, b in zip(ds, ds[1:])):
            raise InputError("d_values must be strictly decreasing")
        object.__setattr__(self, "d_values", ds)
        tol = require_finite_real(self.tol, "tol")
        if tol < 0:
            raise InputError(f"tol must be nonnegative, got {tol}")
        object.__setattr__(self, "tol", tol)


@dataclass(frozen=True)
class SweepPoint:
    """Outcome at one d: the metric value, or None with a skip reason."""

    d: float
    value: float | None
    status: str


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-d metric values plus the fitted log-log rate.

    ``slope``, ``intercept`` and ``residual`` are None when fewer than
    four valid points survive; ``conclusive`` records that distinction.
    """

    metric: MetricSpec
    points: tuple[SweepPoint, ...]
    slope: float | None
    intercept: float | None
    residual: float | None
    conclusive: bool
    tol: float = field(default=DEFAULT_TOL)

    @property
    def values(self) -> tuple[tuple[float, float], ...]:
        """All successfully evaluated (d, metric) pairs."""
        return tuple((p.d, p.value) for p in self.points if p.value is not None)

    @property
    def skipped(self) -> tuple[tuple[float, str], ...]:
        """The skipped d values with their reasons."""
        return tuple((p.d, p.status) for p in self.points if p.value is None)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def _spectral_norm(mat: np.ndarray) -> float:
    return float(np.linalg.norm(mat, 2))


def metric_scattering(
    st: STForm, d: float, k_list=(0.5, 1.0, 2.0)
) -> float:
    """Max over k_list of ||S_d(k) - S*(k)|| in spectral norm.

    A resonant momentum (singular matching system) is retried once at
    k (1 + 1e-6); if the perturbed momentum still resonates, the error
    propagates and the sweep records the d as skipped.
    """
    spec = ScatteringNorm(tuple(k_list))
    c = ab_from_st(st)
    g = build_approx_graph(st, d)
    worst = 0.0
    for k in spec.k_list:
        try:
            s_d = effective_scattering(g, k)
            s_star = star_scattering(c, k)
        except (ResonantKError, ConditioningError):
            k_shift = k * (1.0 + 1.0e-6)
            s_d = effective_scattering(g, k_shift)
            s_star = star_scattering(c, k_shift)
        worst = max(worst, _spectral_norm(s_d - s_star))
    return worst


def eigengap_floor(st: STForm) -> float:
    """Energy floor -10 max(1, s)^2 with s = ||A|| / sigma_min+(B).

    Every bound state of the star coupling lies above the floor, while the
    parasitic levels of order -1/(4 d^2) fed by the inner delta wells fall
    below it once d is moderately small, so eigenvalue lists on the two
    sides stay in one-to-one correspondence.
    """
    c = ab_from_st(st)
    strength = 0.0
    sigma = np.linalg.svd(c.B, compute_uv=False)
    positive = sigma[sigma > DEFAULT_TOL * max(1.0, float(sigma[0]))]
    if positive.size:
        strength = float(np.linalg.norm(c.A, 2)) / float(positive[-1])
    return -10.0 * max(1.0, strength) ** 2


def metric_eigengap(st: STForm, d: float, count: int = 5, L: float = 1.0) -> float:
    """Max displacement among the lowest eigenvalues above the floor.

    Both the star and the approximating graph are truncated at length L
    with Dirichlet ends; the lowest `count` eigenvalues above
    ``eigengap_floor(st)`` are matched by index.
    """
    spec = EigGap(count=count, L=L)
    floor = eigengap_floor(st)
    star = truncate(star_system(st), L=spec.L)
    lam_star = eigenvalues_compact(star, spec.count, lam_min=floor)
    approx = truncate(system_from_approx(build_approx_graph(st, d)), L=spec.L)
    lam_d = eigenvalues_compact(approx, spec.count, lam_min=floor)
    return float(np.max(np.abs(lam_d - lam_star)))


def _edge_quadrature(sys: MetricGraphSystem, quad_n: int):
    """Gauss-Legendre nodes and weights on every edge, in edge order."""
    nodes, weights = np.polynomial.legendre.leggauss(quad_n)
    points: list[tuple] = []
    w_all: list[float] = []
    for edge in sys.edges:
        half = edge.length / 2.0
        for t, w in zip(nodes, weights):
            points.append((edge.id, half * (t + 1.0)))
            w_all.append(w * half)
    return points, np.array(w_all)


def _hs_value(
    star_t: MetricGraphSystem,
    approx_t: MetricGraphSystem,
    n_outer: int,
    z: complex,
    quad_n: int,
) -> float:
    for j in range(n_outer):
        if star_t.edges[j].id != approx_t.edges[j].id:
            raise QGraphError("outer edge order mismatch between systems")
    g_star = greens_function(star_t, z)
    g_d = greens_function(approx_t, z)
    pts_star, _ = _edge_quadrature(star_t, quad_n)
    pts_d, w_d = _edge_quadrature(approx_t, quad_n)
    kernel_d = g_d.kernel_matrix(pts_d)
    kernel_star = g_star.kernel_matrix(pts_star)
    diff = kernel_d.copy()
    outer = n_outer * quad_n
    diff[:outer, :outer] -= kernel_star
    sq = np.abs(diff) ** 2
    return float(math.sqrt(w_d @ sq @ w_d))


def metric_hs_resolvent(
    st: STForm,
    d: float,
    z: complex = -1.0,
    L: float = 1.0,
    quad_n: int = 64,
) -> float:
    """Hilbert-Schmidt distance of truncated resolvent kernels at z.

    Both systems are truncated at L (Dirichlet); the star kernel is
    extended by zero to the inner edges, so those rows and columns
    contribute the plain Hilbert-Schmidt mass of G_d.  The value is also
    recomputed with 2 quad_n nodes; a relative change above 1% emits a
    :class:`QuadratureWarning` naming both values.
    """
    spec = HSResolvent(z=z, L=L, quad_n=quad_n)
    star_t = truncate(star_system(st), L=spec.L)
    approx_t = truncate(system_from_approx(build_approx_graph(st, d)), L=spec.L)
    value = _hs_value(star_t, approx_t, st.n, spec.z, spec.quad_n)
    refined = _hs_value(star_t, approx_t, st.n, spec.z, 2 * spec.quad_n)
    change = abs(value - refined) / max(abs(refined), 1.0e-300)
    if change > QUAD_STABILITY_RTOL:
        warnings.warn(
            QuadratureWarning(
                f"quadrature unstable at quad_n={spec.quad_n}: value {value:.6e} "
                f"vs {refined:.6e} at 2x nodes (rel change {change:.2e})"
            ),
            stacklevel=2,
        )
    return value


# ---------------------------------------------------------------------------
# Rate fitting and the sweep driver
# ---------------------------------------------------------------------------

def fit_rate(values) -> tuple[float, float, float]:
    """Least-squares slope, intercept and RMS residual of log v vs log d.

    Nonpositive metric values cannot enter the log fit; they are dropped
    with a warning.  At least four positive points must remain.
    """
    kept: list[tuple[float, float]] = []
    for d, v in values:
        d = require_finite_real(d, "d")
        v = require_finite_real(v, "metric")
        if v <= 0.0:
            warnings.warn(f"dropping nonpositive metric {v!r} at d={d!r} from rate fit")
            continue
        kept.append((d, v))
    if len(kept) < 4:
        raise InputError(
            f"rate fit needs at least 4 positive points, got {len(kept)}"
        )
    log_d = np.log([d for d, _ in kept])
    log_v = np.log([v for _, v in kept])
    slope, intercept = np.polyfit(log_d, log_v, 1)
    residual = float(np.sqrt(np.mean((log_v - (slope * log_d + intercept)) ** 2)))
    return float(slope), float(intercept), residual


def _evaluate_metric(st: STForm, d: float, metric: MetricSpec) -> float:
    if isinstance(metric, ScatteringNorm):
        return metric_scattering(st, d, metric.k_list)
    if isinstance(metric, HSResolvent):
        return metric_hs_resolvent(st, d, metric.z, metric.L, metric.quad_n)
    if isinstance(metric, EigGap):
        return metric_eigengap(st, d, metric.count, metric.L)
    raise InputError(f"unknown metric specification {metric!r}")


def _flat(text: str) -> str:
    """One-line, comma-free form of a message for the CSV status column."""
    return " ".join(text.split()).replace(",", ";")


def run_sweep(cfg: SweepConfig) -> ConvergenceReport:
    """Evaluate the metric at every d, fit the rate, assemble the report.

    The d values are processed independently in their listed (decreasing)
    order, so the report is deterministic.  A d where the builder or the
    solver raises is recorded as skipped with the error message; fewer
    than four valid points leave the report inconclusive with the fit
    fields unset.
    """
    points: list[SweepPoint] = []
    for d in cfg.d_values:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                value = _evaluate_metric(cfg.st, d, cfg.metric)
            except QGraphError as exc:
                points.append(
                    SweepPoint(d=d, value=None, status=f"skipped: {_flat(str(exc))}")
                )
                continue
        notes = [
            _flat(str(w.message))
            for w in caught
            if issubclass(w.category, QuadratureWarning)
        ]
        status = "ok" if not notes else "ok; " + "; ".join(notes)
        if value <= cfg.tol:
            status += "; at roundoff; excluded from fit"
        points.append(SweepPoint(d=d, value=value, status=status))
    fit_points = [
        (p.d, p.value) for p in points if p.value is not None and p.value > cfg.tol
    ]
    if len(fit_points) >= 4:
        slope, intercept, residual = fit_rate(fit_points)
        conclusive = True
    else:
        slope = intercept = residual = None
        conclusive = False
    return ConvergenceReport(
        metric=cfg.metric,
        points=tuple(points),
        slope=slope,
        intercept=intercept,
        residual=residual,
        conclusive=conclusive,
        tol=cfg.tol,
    )


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return format(float(value), ".17e")


def report_to_csv(report: ConvergenceReport) -> str:
    """Render a report as `d,metric,status` rows plus fit trailer rows.

    Skipped d values keep their row with an empty metric column; an
    inconclusive report writes ``nan`` in the trailer values.  The output
    is bit-identical for identical reports.
    """
    lines = ["d,metric,status"]
    for p in report.points:
        metric_txt = "" if p.value is None else _fmt(p.value)
        lines.append(f"{_fmt(p.d)},{metric_txt},{p.status}")
    for name, value in (
        ("slope", report.slope),
        ("intercept", report.intercept),
        ("residual", report.residual),
    ):
        lines.append(f"{name},{'nan' if value is None else _fmt(value)}")
    return "\n".join(lines) + "\n"


def write_report_csv(report: ConvergenceReport, path) -> None:
    """Write :func:`report_to_csv` output to a file path."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(report_to_csv(report))
