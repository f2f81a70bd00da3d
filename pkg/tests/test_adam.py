import numpy as np
import pytest

from clgd.solvers.adam import AdamState, OptimizerConfig, adam_step

from oracles import adam_scalar


def test_zero_gradient_first_step():
    s = adam_step(AdamState.init([1.0, -2.0]), np.zeros(2), OptimizerConfig())
    assert s.params.tolist() == [1.0, -2.0]
    assert s.t == 1


def test_constant_gradient_trajectory():
    cfg = OptimizerConfig(learning_rate=0.05)
    state = AdamState.init([0.7])
    got = []
    for _ in range(50):
        state = adam_step(state, np.array([0.3]), cfg)
        got.append(state.params[0])
    want = adam_scalar(0.7, [0.3] * 50, 0.05)
    assert np.allclose(got, want, rtol=0, atol=1e-15)
    # bias correction makes every step lr * g / (|g| + eps)
    assert got[-1] == pytest.approx(0.7 - 50 * 0.05 * 0.3 / (0.3 + 1e-8), abs=1e-12)


def test_varying_gradient_matches_recurrence(rng):
    grads = rng.normal(size=200)
    cfg = OptimizerConfig(learning_rate=0.01, beta1=0.8, beta2=0.99, eps=1e-6)
    state = AdamState.init([0.0])
    for g in grads:
        state = adam_step(state, np.array([g]), cfg)
    assert state.params[0] == pytest.approx(adam_scalar(0.0, grads.tolist(), 0.01, 0.8, 0.99, 1e-6)[-1], abs=1e-14)
    assert np.isfinite(state.m).all() and np.isfinite(state.v).all()


def test_state_is_not_mutated():
    s0 = AdamState.init(np.ones(3))
    adam_step(s0, np.ones(3), OptimizerConfig())
    assert s0.t == 0 and np.all(s0.m == 0) and np.all(s0.params == 1)


@pytest.mark.parametrize("kw", [{"iterations": 0}, {"learning_rate": 0.0}, {"beta1": 1.0}, {"beta2": 0.0}, {"eps": 0.0}])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        OptimizerConfig(**kw)
