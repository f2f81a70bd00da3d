from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from ..metric import ClgdParams
from ..pcore import SpatialIndex, as_points, scatter_add
from .adam import AdamState, OptimizerConfig, adam_step
from .objectives import MetricLoss
from .registration import SolveTrace, _EarlyStop, solver_config

FLOW_DEFAULTS = OptimizerConfig(iterations=500, learning_rate=0.01)


@dataclass
class FlowField:
    F: np.ndarray

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=np.float64)
        if self.F.ndim != 2 or self.F.shape[1] != 3 or not np.isfinite(self.F).all():
            raise ValueError("flow must be a finite (N, 3) array")


def smoothness_neighbors(src, Ks: int) -> np.ndarray:
    """``(N, Ks)`` indices of each point's nearest neighbors, itself excluded."""
    pts = as_points(src, "src")
    n = pts.shape[0]
    if int(Ks) != Ks or Ks < 1:
        raise ValueError(f"Ks must be a positive integer, got {Ks}")
    if Ks > n - 1:
        raise ValueError(f"Ks={Ks} needs at least {Ks + 1} source points, got {n}")
    nb = SpatialIndex(pts).query(pts, Ks + 1).indices
    own = np.arange(n)[:, None]
    is_self = nb == own
    # drop the self entry; duplicates can push it off the first slot or out of the list
    drop = np.where(is_self.any(axis=1), is_self.argmax(axis=1), Ks)
    keep = np.ones_like(nb, dtype=bool)
    keep[np.arange(n), drop] = False
    return nb[keep].reshape(n, Ks)


def _smoothness_from_neighbors(F: np.ndarray, nbrs: np.ndarray):
    n, ks = nbrs.shape
    diff = F[:, None, :] - F[nbrs]                    # (N, Ks, 3)
    scale = 1.0 / (3.0 * n * ks)
    value = scale * float(np.einsum("nkc,nkc->", diff, diff))
    grad = 2.0 * scale * diff.sum(axis=1) - scatter_add(nbrs, 2.0 * scale * diff, n)
    return value, grad


def smoothness(F, src, Ks: int) -> float:
    F = FlowField(F).F
    pts = as_points(src, "src")
    if F.shape[0] != pts.shape[0]:
        raise ValueError("flow and source must have the same number of rows")
    return _smoothness_from_neighbors(F, smoothness_neighbors(pts, Ks))[0]


def smoothness_gradient(F, src, Ks: int):
    F = FlowField(F).F
    return _smoothness_from_neighbors(F, smoothness_neighbors(src, Ks))


def estimate_flow(
    src,
    tgt,
    metric: str = "clgd",
    metric_params: ClgdParams | None = None,
    alpha: float = 50.0,
    Ks: int = 30,
    opt: OptimizerConfig = FLOW_DEFAULTS,
    seed: int | None = None,
    workers: int | None = None,
    log=None,
) -> tuple[FlowField, SolveTrace]:
    """Minimize ``D(src + F, tgt) + alpha * smoothness(F)`` over per-point offsets from ``F = 0``."""
    src, tgt = as_points(src, "src"), as_points(tgt, "tgt")
    if not alpha >= 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    params = metric_params or ClgdParams()
    if seed is not None:
        params = replace(params, reference=replace(params.reference, seed=int(seed)))

    start = time.perf_counter()
    nbrs = smoothness_neighbors(src, Ks)
    loss = MetricLoss(metric, tgt, src, params, workers)
    state = AdamState.init(np.zeros_like(src))
    trace: list[float] = []
    best_F, best_val, best_it = state.params.copy(), np.inf, 0
    stop = _EarlyStop(opt)
    for it in range(opt.iterations):
        F = state.params
        dval, dgrad = loss(src + F)
        sval, sgrad = _smoothness_from_neighbors(F, nbrs)
        value = dval + alpha * sval
        trace.append(value)
        if value < best_val:
            best_F, best_val, best_it = F.copy(), value, it
        if log is not None and opt.log_every and it % opt.log_every == 0:
            log(f"iter {it:5d}  objective {value:.6g}")
        if stop(value):
            break
        state = adam_step(state, dgrad + alpha * sgrad, opt)

    elapsed = time.perf_counter() - start
    cfg = solver_config(metric, params, opt, alpha=alpha, Ks=Ks, init="zero")
    return FlowField(best_F), SolveTrace(trace, best_it, float(best_val), elapsed, cfg)
