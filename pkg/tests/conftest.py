"""Shared fixtures: the four reference couplings used across the suite."""

import pytest

from helpers import (
    make_complex_t,
    make_delta,
    make_delta_prime,
    make_kirchhoff_perturbed,
)


@pytest.fixture(scope="session")
def st_delta():
    return make_delta()


@pytest.fixture(scope="session")
def st_delta_prime():
    return make_delta_prime()


@pytest.fixture(scope="session")
def st_kirchhoff_perturbed():
    return make_kirchhoff_perturbed()


@pytest.fixture(scope="session")
def st_complex_t():
    return make_complex_t()


@pytest.fixture(scope="session")
def reference_couplings(st_delta, st_delta_prime, st_kirchhoff_perturbed, st_complex_t):
    return {
        "delta": st_delta,
        "delta_prime_s": st_delta_prime,
        "kirchhoff_perturbed": st_kirchhoff_perturbed,
        "complex_t": st_complex_t,
    }
