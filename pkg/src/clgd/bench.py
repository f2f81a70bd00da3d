"""Parameter sweeps and scaling measurements on seeded synthetic scenes.

Wall-clock and memory columns end in ``_wall_s`` / ``peak_rss_mb``; every other
column is a deterministic function of the arguments.
"""

from __future__ import annotations

import csv
import resource
import sys
import time
from dataclasses import replace

import numpy as np

from .baselines import chamfer
from .evaluation import registration_error
from .metric import ClgdParams, clgd
from .reference import ReferenceParams
from .solvers import OptimizerConfig, register_rigid
from .synth import SceneSpec, synth_scene

SUITES = ("scaling", "ablation-K", "ablation-R", "ablation-T", "ablation-beta")
SWEEPS = {
    "ablation-K": ("K", (1, 3, 5, 10)),
    "ablation-R": ("R", (1, 5, 10, 20)),
    "ablation-T": ("T", (1.0, 3.0, 5.0, 10.0)),
    "ablation-beta": ("beta", (0.0, 1.0, 3.0, 5.0, 10.0)),
}
SCALING_SIZES = (1024, 2048, 4096, 8192)
# partial-overlap registration scene used by the ablations: a 1024-point bumpy
# sphere against an independently sampled 2048-point copy with 40% cropped away
REGISTRATION_SCENE = SceneSpec(rotation_deg=30.0, translation=0.3, crop=0.4, relief=0.6, resample=True, target_n=2048)


def registration_scene(n: int) -> SceneSpec:
    """The partial-overlap scene with the target twice as dense as an ``n``-point source."""
    return replace(REGISTRATION_SCENE, target_n=2 * n)


# two rigidly moving objects for scene-flow comparisons
FLOW_SCENE = SceneSpec(flows=((0.2, 0.0, 0.0), (0.0, 0.2, 0.0)))


def peak_rss_mb() -> float:
    kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return kb / (1024.0 * 1024.0) if sys.platform == "darwin" else kb / 1024.0


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def scaling_rows(sizes=SCALING_SIZES, seed: int = 0, repeats: int = 3, params: ClgdParams | None = None, workers=None):
    params = params or ClgdParams()
    for n in sizes:
        scene = synth_scene("sphere", n, seed, SceneSpec(rotation_deg=10.0, translation=0.05, relief=0.3))
        rep = clgd(scene.src, scene.tgt, params, select="second", workers=workers)
        cd = chamfer(scene.src, scene.tgt, workers)
        m = params.reference.R * n + (n if params.reference.include_other else 0)
        yield {
            "n": n,
            "m": m,
            "clgd_value": rep.value,
            "cd_value": cd.value,
            "clgd_wall_s": _median_time(lambda: clgd(scene.src, scene.tgt, params, "second", workers), repeats),
            "cd_wall_s": _median_time(lambda: chamfer(scene.src, scene.tgt, workers), repeats),
            "peak_rss_mb": peak_rss_mb(),
        }


def _with(params: ClgdParams, name: str, value) -> ClgdParams:
    if name in ("R", "T"):
        return replace(params, reference=replace(params.reference, **{name: value}))
    return replace(params, **{name: value})


def ablation_rows(suite: str, n: int = 1024, trials: int = 5, seed: int = 0,
                  opt: OptimizerConfig | None = None, values=None, workers=None,
                  scene: SceneSpec | None = None):
    name, defaults = SWEEPS[suite]
    opt = opt or OptimizerConfig(iterations=1000, learning_rate=0.02)
    base = ClgdParams(beta=3.0, reference=ReferenceParams())
    scene = scene or registration_scene(n)
    for value in values or defaults:
        params = _with(base, name, value)
        re, te, wall = [], [], 0.0
        for trial in range(trials):
            s = seed + trial
            sc = synth_scene("sphere", n, s, scene)
            start = time.perf_counter()
            T, _ = register_rigid(sc.src, sc.tgt, "clgd", params, opt, seed=s, workers=workers)
            wall += time.perf_counter() - start
            err = registration_error(T.R, T.t, sc.R, sc.t)
            re.append(err.re_degrees)
            te.append(err.te)
        yield {
            "param": name,
            "value": value,
            "trials": trials,
            "median_re_deg": float(np.median(re)),
            "median_te": float(np.median(te)),
            "mean_re_deg": float(np.mean(re)),
            "mean_te": float(np.mean(te)),
            "solve_wall_s": wall / trials,
            "peak_rss_mb": peak_rss_mb(),
        }


def run_suite(suite: str, **kwargs) -> list[dict]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    if suite == "scaling":
        keep = {k: kwargs[k] for k in ("sizes", "seed", "repeats", "workers") if k in kwargs}
        return list(scaling_rows(**keep))
    keep = {k: kwargs[k] for k in ("n", "trials", "seed", "opt", "values", "workers") if k in kwargs}
    return list(ablation_rows(suite, **keep))


def write_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
