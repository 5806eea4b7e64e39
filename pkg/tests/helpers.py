"""Test utilities: reference couplings, random generators, fit helpers."""

import numpy as np

from qgraph import (
    CouplingKind,
    DegenerateArgumentError,
    NamedCoupling,
    STForm,
    SingularDError,
    build_approx_graph,
    named_to_st,
)


# -- the four reference couplings exercised throughout the suite ------------

def make_delta(alpha: float = 1.0, n: int = 3) -> STForm:
    return named_to_st(NamedCoupling(kind=CouplingKind.DELTA, n=n, alpha=alpha))


def make_delta_prime(beta: float = 1.0, n: int = 3) -> STForm:
    return named_to_st(NamedCoupling(kind=CouplingKind.DELTA_PRIME_S, n=n, beta=beta))


def make_dirichlet(n: int = 3) -> STForm:
    return named_to_st(NamedCoupling(kind=CouplingKind.DIRICHLET, n=n))


def make_kirchhoff(n: int = 3) -> STForm:
    return named_to_st(NamedCoupling(kind=CouplingKind.KIRCHHOFF, n=n))


def make_kirchhoff_perturbed() -> STForm:
    """A generic rank-one-B coupling close to, but distinct from, Kirchhoff."""
    return STForm(
        n=3, m=1, perm=(1, 2, 3), S=np.array([[0.2]]), T=np.array([[1.0, 0.9]])
    )


def make_complex_t() -> STForm:
    """A coupling with genuinely complex T, so the builder needs magnetic phases."""
    return STForm(
        n=3,
        m=2,
        perm=(1, 2, 3),
        S=np.array([[0.5, 0.3 - 0.2j], [0.3 + 0.2j, -0.4]]),
        T=np.array([[0.8 + 0.6j], [1.1 - 0.3j]]),
    )


def make_singular_at_tenth() -> STForm:
    """A coupling whose (1, 2) pair argument d S_12 + <T row overlap> = 1 - 10 d
    cancels exactly at d = 0.1, so builds there must fail loudly."""
    return STForm(
        n=3,
        m=2,
        perm=(1, 2, 3),
        S=np.array([[0.0, -10.0], [-10.0, 0.0]]),
        T=np.array([[1.0], [1.0]]),
    )


# -- random generators ------------------------------------------------------

def random_st(
    rng: np.random.Generator,
    n: int | None = None,
    m: int | None = None,
    *,
    complex_entries: bool = True,
    permuted: bool = True,
) -> STForm:
    """A random valid ST form with degree <= 6 by default."""
    if n is None:
        n = int(rng.integers(1, 7))
    if m is None:
        m = int(rng.integers(0, n + 1))

    def draw(shape):
        real = rng.standard_normal(shape)
        if complex_entries:
            return real + 1j * rng.standard_normal(shape)
        return real + 0j

    x = draw((m, m))
    s_mat = (x + x.conj().T) / 2.0
    t_mat = draw((m, n - m))
    if permuted:
        perm = tuple(int(p) for p in rng.permutation(np.arange(1, n + 1)))
    else:
        perm = tuple(range(1, n + 1))
    return STForm(n=n, m=m, perm=perm, S=s_mat, T=t_mat)


def random_built_graph(rng: np.random.Generator, d: float, **kwargs):
    """(st, graph) for a random coupling that builds at d; resamples on a
    singular half-length, which for generic entries is measure-zero anyway."""
    for _ in range(50):
        st = random_st(rng, **kwargs)
        try:
            return st, build_approx_graph(st, d)
        except (SingularDError, DegenerateArgumentError):
            continue
    raise AssertionError("could not draw a buildable random coupling in 50 tries")


def loglog_slope(ds, values) -> float:
    """Plain least-squares slope of log(values) against log(ds)."""
    slope, _ = np.polyfit(np.log(ds), np.log(values), 1)
    return float(slope)
