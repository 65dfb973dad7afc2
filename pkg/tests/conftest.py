import pytest
import numpy as np
from click.testing import CliRunner

from review_pricing.model import ModelParams


@pytest.fixture
def symmetric_params():
    """The symmetric instance used throughout: p=0.6, q=0.4, c=0.43, delta=0.99, x0=0.5."""
    return ModelParams(p=0.6, q=0.4, c=0.43, delta=0.99, x0=0.5)


@pytest.fixture
def general_params():
    """An asymmetric instance (q != 1 - p) whose prior set is dense."""
    return ModelParams(p=0.7, q=0.2, c=0.43, delta=0.99, x0=0.5)


@pytest.fixture
def fast_params():
    """A heavily discounted instance that keeps series and simulation tests short."""
    return ModelParams(p=0.6, q=0.4, c=0.43, delta=0.9, x0=0.5)


@pytest.fixture
def rng():
    """Seeded generator for property draws."""
    return np.random.default_rng(20240601)


@pytest.fixture
def runner():
    """Click test runner."""
    return CliRunner()


@pytest.fixture
def random_params(rng):
    """One hundred random valid instances (q < c < p) with moderate discounting."""
    draws = []
    while len(draws) < 100:
        p = rng.uniform(0.55, 0.9)
        q = rng.uniform(0.1, p - 0.1)
        c = q + rng.uniform(0.1, 0.9) * (p - q)
        draws.append(ModelParams(p=float(p), q=float(q), c=float(c), delta=float(rng.uniform(0.5, 0.9)),
                                 x0=float(rng.uniform(0.05, 0.95))))
    return draws


@pytest.fixture
def lattice_params():
    """
    Factory for instances whose like step is gamma_like / gamma_dislike dislike steps.

    With like odds factor s^gamma_like and dislike odds factor s^gamma_dislike, p
    solves p / q = s^gamma_like and (1 - q) / (1 - p) = s^gamma_dislike.
    """
    def build(gamma_like: int, gamma_dislike: int, s: float, c: float, delta: float = 0.95) -> ModelParams:
        up, down = s ** gamma_like, s ** gamma_dislike
        p = (down - 1) / (down - 1 / up)
        return ModelParams(p=p, q=p / up, c=c, delta=delta, x0=0.5)
    return build
