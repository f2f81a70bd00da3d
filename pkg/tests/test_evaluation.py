import numpy as np
import pytest

from clgd.evaluation import flow_error, registration_error
from clgd.solvers.lie import so3_exp


def _rot(axis, deg):
    axis = np.asarray(axis, dtype=float)
    return so3_exp(axis / np.linalg.norm(axis) * np.radians(deg))


def test_perfect_registration(rng):
    R = _rot(rng.normal(size=3), 37)
    err = registration_error(R, [1, 2, 3], R, [1, 2, 3])
    assert err.re_degrees == pytest.approx(0, abs=1e-6) and err.te == 0


def test_ten_degree_offset(rng):
    for _ in range(20):
        Rgt = _rot(rng.normal(size=3), rng.uniform(0, 180))
        Rhat = Rgt @ _rot(rng.normal(size=3), 10)
        assert registration_error(Rhat, np.zeros(3), Rgt, np.zeros(3)).re_degrees == pytest.approx(10, abs=1e-6)


def test_translation_error():
    assert registration_error(np.eye(3), [3.0, 4.0, 0], np.eye(3), [0, 0, 0]).te == 5.0


def test_right_composition_invariance(rng):
    A, B, C = (_rot(rng.normal(size=3), rng.uniform(0, 170)) for _ in range(3))
    e1 = registration_error(A, np.zeros(3), B, np.zeros(3)).re_degrees
    e2 = registration_error(A @ C, np.zeros(3), B @ C, np.zeros(3)).re_degrees
    assert e1 == pytest.approx(e2, abs=1e-6)


def test_rejects_non_rotation():
    with pytest.raises(ValueError):
        registration_error(np.diag([1.0, 1.0, -1.0]), np.zeros(3), np.eye(3), np.zeros(3))
    with pytest.raises(ValueError):
        registration_error(np.eye(3) * 1.01, np.zeros(3), np.eye(3), np.zeros(3))


def test_perfect_flow(rng):
    F = rng.normal(size=(40, 3))
    err = flow_error(F, F)
    assert (err.epe3d, err.acc_005, err.acc_01, err.outliers) == (0.0, 1.0, 1.0, 0.0)


def test_threshold_construction():
    err = flow_error([[1.04, 0, 0]], [[1.0, 0, 0]])
    assert err.epe3d == pytest.approx(0.04)
    assert err.acc_005 == 1.0


def test_zero_gt_uses_absolute_only():
    err = flow_error([[0.2, 0, 0]], [[0.0, 0, 0]])
    assert (err.acc_005, err.acc_01, err.outliers) == (0.0, 0.0, 0.0)


def test_against_loop_oracle(rng):
    gt = rng.normal(scale=0.3, size=(100, 3))
    pred = gt + rng.normal(scale=0.1, size=(100, 3))
    gt[:5] = 0.0
    e = [float(np.sqrt(sum((p - g) ** 2 for p, g in zip(pr, gr)))) for pr, gr in zip(pred, gt)]
    m = [float(np.sqrt(sum(g * g for g in gr))) for gr in gt]
    acc5 = sum(1 for ei, mi in zip(e, m) if ei < 0.05 or (mi > 0 and ei / mi < 0.05)) / 100
    acc1 = sum(1 for ei, mi in zip(e, m) if ei < 0.1 or (mi > 0 and ei / mi < 0.1)) / 100
    out = sum(1 for ei, mi in zip(e, m) if ei > 0.3 or (mi > 0 and ei / mi > 0.1)) / 100
    err = flow_error(pred, gt)
    assert err.epe3d == pytest.approx(sum(e) / 100, rel=1e-13)
    assert (err.acc_005, err.acc_01, err.outliers) == (acc5, acc1, out)
    assert err.acc_005 <= err.acc_01


def test_shape_mismatch():
    with pytest.raises(ValueError):
        flow_error(np.zeros((3, 3)), np.zeros((4, 3)))
