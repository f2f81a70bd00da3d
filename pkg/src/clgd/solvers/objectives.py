"""Metric losses against a static target, returning value and per-point gradient."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..baselines import EMD_DEFAULT_CAP, chamfer_gradient, emd_gradient
from ..metric import ClgdObjective, ClgdParams
from ..reference import generate_references

METRICS = ("clgd", "cd", "emd")


class MetricLoss:
    """``loss(moving) -> (value, grad)`` for ``D(moving, target)``.

    For CLGD the references are seeded from the target and, unless
    ``resample_every_iter`` is set, generated once from the initial moving cloud.
    """

    def __init__(self, metric: str, target: np.ndarray, initial_moving: np.ndarray,
                 params: ClgdParams | None = None, workers: int | None = None,
                 emd_cap: int = EMD_DEFAULT_CAP):
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}; expected one of {', '.join(METRICS)}")
        self.metric = metric
        self.target = target
        self.params = params or ClgdParams()
        self.workers = workers
        self.emd_cap = emd_cap
        self._calls = 0
        self._clgd = None
        if metric == "clgd":
            self._clgd = self._build(initial_moving, self.params.reference.seed)

    def _build(self, moving, seed) -> ClgdObjective:
        rp = replace(self.params.reference, seed=seed)
        refs = generate_references(self.target, moving, rp, label="second")
        return ClgdObjective(self.target, refs, self.params, self.workers)

    def __call__(self, moving: np.ndarray) -> tuple[float, np.ndarray]:
        self._calls += 1
        if self.metric == "cd":
            return chamfer_gradient(self.target, moving, self.workers)
        if self.metric == "emd":
            return emd_gradient(self.target, moving, self.emd_cap)
        if self.params.reference.resample_every_iter and self._calls > 1:
            seed = (self.params.reference.seed + self._calls - 1) % 2**64
            self._clgd = self._build(moving, seed)
        return self._clgd(moving)
