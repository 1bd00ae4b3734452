import pytest

from qproc.zoo import make_distribution

_SPECS = ("uniform", "bernoulli:p=0.3", "exp:rate=1", "pareto:alpha=3",
          "pareto:alpha=2.5", "pareto:alpha=2", "pareto:alpha=1.5",
          "normal", "logistic", "cantor")


@pytest.fixture(scope="session")
def zoo():
    """All catalog members, built once per session (metadata is costly)."""
    return {spec: make_distribution(spec) for spec in _SPECS}


@pytest.fixture(scope="session")
def finite_mean_zoo(zoo):
    return {k: d for k, d in zoo.items() if d.finite_mean}
