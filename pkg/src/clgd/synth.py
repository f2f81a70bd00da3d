"""Seeded synthetic scenes with known rigid motion or scene flow."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .solvers.lie import so3_exp

KINDS = ("sphere", "plane", "torus", "two-objects")

# fixed bump directions/amplitudes for the relief field on spheres; chosen so no
# nontrivial rotation maps the modulated surface onto itself
_BUMP_DIRS = np.array([[0.0, 0.0, 1.0], [1.0, 0.3, 0.0], [-0.4, -1.0, 0.5], [0.2, -0.3, -1.0]])
_BUMP_DIRS = _BUMP_DIRS / np.linalg.norm(_BUMP_DIRS, axis=1, keepdims=True)
_BUMP_AMPS = np.array([1.0, 0.7, 0.5, 0.35])
_BUMP_WIDTH = 0.45


@dataclass(frozen=True)
class SceneSpec:
    """What to do to the source to obtain the target.

    ``translation`` is either a 3-vector or a magnitude applied along a random
    direction. ``flows`` gives one constant offset per object and is mutually
    exclusive with a rigid motion. ``crop`` removes that fraction of the target
    on one side of a random plane, keeping ``ceil((1 - crop) * n)`` points.
    With ``resample`` the target is an independent sampling of the same surface
    (``target_n`` points, default ``n``) instead of the moved source points.
    """

    rotation_deg: float = 0.0
    axis: tuple | None = None
    translation: float | tuple = 0.0
    crop: float = 0.0
    flows: tuple | None = None
    noise: float = 0.0
    relief: float = 0.0
    resample: bool = False
    target_n: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.crop < 1.0:
            raise ValueError(f"crop must lie in [0, 1), got {self.crop}")
        if self.noise < 0 or self.relief < 0:
            raise ValueError("noise and relief must be nonnegative")
        if self.flows is not None and (self.rotation_deg != 0 or np.any(np.asarray(self.translation) != 0)):
            raise ValueError("flows cannot be combined with a rigid motion")
        if self.target_n is not None and not self.resample:
            raise ValueError("target_n requires resample=True")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Scene:
    src: np.ndarray
    tgt: np.ndarray
    R: np.ndarray
    t: np.ndarray
    flow: np.ndarray             # ground-truth offsets of every source point
    labels: np.ndarray           # object membership per source point
    kept: np.ndarray             # indices of the uncropped target that survive, in order
    meta: dict = field(default_factory=dict)

    def ground_truth(self) -> dict:
        return {"R": self.R, "t": self.t, "flow": self.flow, "labels": self.labels, "kept": self.kept, **self.meta}


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _relief(u: np.ndarray, relief: float) -> np.ndarray:
    if relief == 0:
        return np.ones(u.shape[0])
    d2 = ((u[:, None, :] - _BUMP_DIRS[None]) ** 2).sum(-1)
    return 1.0 + relief * (np.exp(-d2 / (2 * _BUMP_WIDTH**2)) @ _BUMP_AMPS)


def _sphere(rng, n, relief, radius=1.0, center=(0.0, 0.0, 0.0)):
    u = _unit(rng.standard_normal((n, 3)))
    return radius * u * _relief(u, relief)[:, None] + np.asarray(center)


def _plane(rng, n):
    xy = rng.uniform(-1.0, 1.0, (n, 2))
    return np.column_stack([xy, np.zeros(n)])


def _torus(rng, n, major=1.0, minor=0.35):
    out = np.empty((0, 2))
    # rejection on the tube angle gives area-uniform samples
    while out.shape[0] < n:
        cand = rng.uniform(0, 2 * np.pi, (2 * n, 2))
        accept = rng.uniform(0, 1, 2 * n) < (major + minor * np.cos(cand[:, 1])) / (major + minor)
        out = np.concatenate([out, cand[accept]])
    u, v = out[:n, 0], out[:n, 1]
    ring = major + minor * np.cos(v)
    return np.column_stack([ring * np.cos(u), ring * np.sin(u), minor * np.sin(v)])


def _sample(kind: str, rng, n: int, relief: float):
    labels = np.zeros(n, dtype=np.int64)
    if kind == "sphere":
        pts = _sphere(rng, n, relief)
    elif kind == "plane":
        pts = _plane(rng, n)
    elif kind == "torus":
        pts = _torus(rng, n)
    else:
        n0 = (n + 1) // 2
        pts = np.concatenate([
            _sphere(rng, n0, relief, 0.5, (-0.75, 0.0, 0.0)),
            _sphere(rng, n - n0, relief, 0.5, (0.75, 0.0, 0.0)),
        ])
        labels[n0:] = 1
    return pts, labels


def synth_scene(kind: str, n: int, seed: int = 0, spec: SceneSpec | None = None) -> Scene:
    spec = spec or SceneSpec()
    if kind not in KINDS:
        raise ValueError(f"unknown scene kind {kind!r}; expected one of {KINDS}")
    if int(n) != n or n < 8:
        raise ValueError(f"n must be an integer >= 8, got {n}")
    rng = np.random.Generator(np.random.Philox(int(seed)))

    src, labels = _sample(kind, rng, n, spec.relief)

    axis = _unit(rng.standard_normal(3)) if spec.axis is None else _unit(np.asarray(spec.axis, dtype=np.float64))
    R = so3_exp(axis * math.radians(spec.rotation_deg))
    if np.ndim(spec.translation) == 0:
        t = float(spec.translation) * _unit(rng.standard_normal(3))
    else:
        t = np.asarray(spec.translation, dtype=np.float64).reshape(3)

    if spec.resample:
        base, base_labels = _sample(kind, rng, spec.target_n or n, spec.relief)
    else:
        base, base_labels = src, labels

    if spec.flows is not None:
        flows = np.asarray(spec.flows, dtype=np.float64).reshape(-1, 3)
        if flows.shape[0] != labels.max() + 1:
            raise ValueError(f"{kind} scene has {labels.max() + 1} object(s) but {flows.shape[0]} flows were given")
        flow = flows[labels]
        tgt_full = base + flows[base_labels]
    else:
        flow = src @ R.T + t - src
        tgt_full = base @ R.T + t

    crop_dir = _unit(rng.standard_normal(3))
    noise = rng.standard_normal(tgt_full.shape) * spec.noise
    tgt_full = tgt_full + noise

    n_tgt = tgt_full.shape[0]
    kept = np.arange(n_tgt)
    if spec.crop > 0:
        n_keep = math.ceil(round((1.0 - spec.crop) * n_tgt, 9))
        order = np.argsort(tgt_full @ crop_dir, kind="stable")
        kept = np.sort(order[:n_keep])
    tgt = tgt_full[kept]

    meta = {"kind": kind, "n": n, "seed": seed, "spec": spec.to_dict()}
    return Scene(src, tgt, R, t, flow, labels, kept, meta)
