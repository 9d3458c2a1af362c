import pytest

from tljunction.flux import FluxFunction
from tljunction.germs import FluxTriple
from tljunction.signals import Signal


@pytest.fixture
def fluxes():
    return FluxTriple(
        FluxFunction.quadratic(0.0, 1.0, 2.0),
        FluxFunction.quadratic(0.0, 1.0, 1.0),
        FluxFunction.quadratic(0.0, 1.0, 1.0),
    )


@pytest.fixture
def alternating():
    # exit 1 green on the first half period, exit 2 on the second, caps saturated
    return Signal.from_durations([(0.5, 1.0, 1), (0.5, 1.0, 2)])


@pytest.fixture
def stop():
    # red, then green for exit 1, then green for exit 2
    return Signal.from_durations([(0.2, 0.0, 1), (0.4, 1.0, 1), (0.4, 1.0, 2)])
