from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..metric import ClgdParams
from ..pcore import as_points
from ..reference import RNG_ALGORITHM
from .adam import AdamState, OptimizerConfig, adam_step
from .lie import se3_exp, transform_points, xi_gradient
from .objectives import MetricLoss

REGISTRATION_DEFAULTS = OptimizerConfig(iterations=1000, learning_rate=0.02)


@dataclass
class RigidTransform:
    xi: np.ndarray

    @property
    def R(self) -> np.ndarray:
        return se3_exp(self.xi)[0]

    @property
    def t(self) -> np.ndarray:
        return se3_exp(self.xi)[1]

    def apply(self, points) -> np.ndarray:
        R, t = se3_exp(self.xi)
        return transform_points(as_points(points), R, t)


@dataclass
class SolveTrace:
    objective: list[float]
    best_iteration: int
    best_objective: float
    wall_clock_s: float
    config: dict = field(default_factory=dict)


class _EarlyStop:
    def __init__(self, opt: OptimizerConfig):
        self.tol, self.patience = opt.early_stop_tol, opt.early_stop_patience
        self.ref = np.inf
        self.since = 0

    def __call__(self, value: float) -> bool:
        if self.tol is None:
            return False
        if value < self.ref - self.tol:
            self.ref, self.since = value, 0
            return False
        self.since += 1
        return self.since >= self.patience


def solver_config(metric: str, params: ClgdParams, opt: OptimizerConfig, **extra) -> dict:
    cfg = {"metric": metric, "optimizer": opt.to_dict(), **extra}
    if metric == "clgd":
        cfg["clgd"] = params.to_dict()
        cfg["rng"] = RNG_ALGORITHM
    return cfg


def register_rigid(
    src,
    tgt,
    metric: str = "clgd",
    metric_params: ClgdParams | None = None,
    opt: OptimizerConfig = REGISTRATION_DEFAULTS,
    seed: int | None = None,
    workers: int | None = None,
    log=None,
) -> tuple[RigidTransform, SolveTrace]:
    """Find ``xi`` minimizing ``D(R(xi) src + t(xi), tgt)`` with Adam from the identity.

    Returns the best iterate seen, not the last one.
    """
    src, tgt = as_points(src, "src"), as_points(tgt, "tgt")
    params = metric_params or ClgdParams()
    if seed is not None:
        params = replace(params, reference=replace(params.reference, seed=int(seed)))
    if metric == "clgd" and src.shape[0] < params.K:
        raise ValueError(f"source has {src.shape[0]} points, fewer than K={params.K}")

    start = time.perf_counter()
    loss = MetricLoss(metric, tgt, src, params, workers)
    state = AdamState.init(np.zeros(6))
    trace: list[float] = []
    best_xi, best_val, best_it = state.params.copy(), np.inf, 0
    stop = _EarlyStop(opt)
    for it in range(opt.iterations):
        xi = state.params
        R, t = se3_exp(xi)
        moved = transform_points(src, R, t)
        value, pgrad = loss(moved)
        trace.append(value)
        if value < best_val:
            best_xi, best_val, best_it = xi.copy(), value, it
        if log is not None and opt.log_every and it % opt.log_every == 0:
            log(f"iter {it:5d}  objective {value:.6g}")
        if stop(value):
            break
        state = adam_step(state, xi_gradient(xi, moved, pgrad), opt)

    elapsed = time.perf_counter() - start
    cfg = solver_config(metric, params, opt, init="identity")
    return RigidTransform(best_xi), SolveTrace(trace, best_it, float(best_val), elapsed, cfg)
