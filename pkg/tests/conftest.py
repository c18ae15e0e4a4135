import numpy as np
import pytest

from wassquant.intervals import build_probability_box
from wassquant.bounds import BoundProblem
from wassquant.types import pairwise_distances


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_bound_problem(rng, m, d=2, rho=1.0, n=200, beta=0.05, half_width=0.5):
    """A bound problem shaped like the real pipeline output: random centers
    with radii, the radius-form cost matrix clipped at the box diameter,
    multinomial counts, and the Clopper-Pearson box built from them."""
    centers = rng.uniform(-0.8 * half_width, 0.8 * half_width, size=(m, d))
    radii = rng.uniform(0.02, 0.4 * half_width, size=m)
    dist = pairwise_distances(centers, centers, 2)
    diam = 2.0 * half_width * d**0.5
    cost = np.minimum(radii[:, None] + dist, diam)
    np.fill_diagonal(cost, radii)
    cost = cost**rho
    probs = rng.dirichlet(np.ones(m) * rng.uniform(0.4, 3.0))
    counts = rng.multinomial(n, probs)
    box = build_probability_box(counts, n, beta)
    pi = counts / n
    return BoundProblem(cost=cost, pi=pi, box=box, rho=rho, support=centers)
