import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zigzag.losses import LOSSES, dloss, dloss_batch, loss, loss_batch


def test_loss_values():
    assert loss("hinge", 0.5, 1.0) == pytest.approx(0.5)
    assert loss("absolute", -1.0, 1.0) == pytest.approx(2.0)
    assert loss("linear", 0.3, -1.0) == pytest.approx(0.3)


def test_dloss_values():
    assert dloss("hinge", 0.5, 1.0) == -1.0
    assert dloss("hinge", 1.0, 1.0) == 0.0  # kink selection
    assert dloss("hinge", 2.0, 1.0) == 0.0
    assert dloss("absolute", 0.2, 0.2) == 0.0
    assert dloss("absolute", 0.5, 0.2) == 1.0
    assert dloss("linear", 0.0, -1.0) == 1.0


def test_unknown_loss_raises():
    with pytest.raises(ValueError):
        loss("squared", 0.0, 0.0)
    with pytest.raises(ValueError):
        dloss("squared", 0.0, 0.0)


@settings(max_examples=300, deadline=None)
@given(
    st.sampled_from(LOSSES),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.sampled_from([-1.0, 1.0]),
)
def test_subgradient_inequality_and_lipschitz(fn, yhat, z, y):
    g = dloss(fn, yhat, y)
    assert abs(g) <= 1.0
    # subgradient inequality: l(z) >= l(yhat) + g (z - yhat)
    assert loss(fn, z, y) >= loss(fn, yhat, y) + g * (z - yhat) - 1e-12


@pytest.mark.parametrize("fn", ["hinge", "absolute"])
def test_well_behaved_witness(fn):
    # for every label on a grid there is a prediction in [-1, 1] with zero
    # subgradient; yhat = y is such a witness for both kink selections
    # (the linear loss has no witness for y != 0)
    ys = np.linspace(-1, 1, 21) if fn == "absolute" else np.array([-1.0, 1.0])
    for y in ys:
        assert -1.0 <= y <= 1.0
        assert dloss(fn, y, y) == 0.0


def test_batch_matches_pointwise():
    rng = np.random.default_rng(0)
    yh = rng.uniform(-3, 3, size=50)
    y = rng.choice([-1.0, 1.0], size=50)
    for fn in LOSSES:
        assert np.allclose(loss_batch(fn, yh, y), [loss(fn, a, b) for a, b in zip(yh, y)])
        assert np.allclose(dloss_batch(fn, yh, y), [dloss(fn, a, b) for a, b in zip(yh, y)])
