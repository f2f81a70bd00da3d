"""Reference-point generation.

Each point of the selected cloud is jittered ``R`` times with isotropic Gaussian
noise whose per-axis standard deviation is ``T`` times the distance to that
point's nearest other point. The non-selected cloud can be appended verbatim so
every input point also acts as a probe.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np

from .pcore import PointCloudError, as_points, nearest_other_distance

RNG_ALGORITHM = f"numpy.random.Philox (4x64-10) via Generator.standard_normal, numpy {np.__version__}"


def cloud_digest(points: np.ndarray) -> str:
    """Content hash used to recognise which cloud seeded a reference set."""
    arr = np.ascontiguousarray(points, dtype=np.float64)
    h = hashlib.sha1()
    h.update(np.asarray(arr.shape, dtype=np.int64).tobytes())
    h.update(arr.tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class ReferenceParams:
    R: int = 10
    T: float = 3.0
    include_other: bool = True
    seed: int = 0
    resample_every_iter: bool = False

    def __post_init__(self):
        if int(self.R) != self.R or self.R < 1:
            raise ValueError(f"R must be a positive integer, got {self.R}")
        if not np.isfinite(self.T) or self.T < 0:
            raise ValueError(f"T must be a finite nonnegative real, got {self.T}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ReferenceSet:
    points: np.ndarray
    selected: str
    params: ReferenceParams
    source_digest: str
    n_generated: int
    other_digest: str | None = None
    rng: str = field(default=RNG_ALGORITHM)

    def __len__(self) -> int:
        return self.points.shape[0]


def generate_references(
    selected,
    other=None,
    params: ReferenceParams | None = None,
    label: str = "first",
) -> ReferenceSet:
    """Build the reference set from ``selected`` (and optionally ``other``).

    ``label`` records which metric argument (``"first"`` or ``"second"``)
    ``selected`` will be passed as; it only matters when both arguments are
    equal.
    """
    params = params or ReferenceParams()
    if label not in ("first", "second"):
        raise ValueError(f"label must be 'first' or 'second', got {label!r}")
    sel = as_points(selected, "selected")
    n = sel.shape[0]

    if params.T > 0:
        if n < 2:
            raise PointCloudError("selected cloud needs at least 2 points when T > 0")
        sigma = params.T * nearest_other_distance(sel)
    else:
        sigma = np.zeros(n)

    rng = np.random.Generator(np.random.Philox(int(params.seed)))
    noise = rng.standard_normal((n, params.R, 3))
    jittered = (sel[:, None, :] + sigma[:, None, None] * noise).reshape(-1, 3)

    oth = None
    if other is not None:
        oth = as_points(other, "other")
    if params.include_other and oth is not None:
        pts = np.concatenate([jittered, oth], axis=0)
    else:
        pts = jittered
    pts.setflags(write=False)

    return ReferenceSet(
        points=pts,
        selected=label,
        params=params,
        source_digest=cloud_digest(sel),
        n_generated=jittered.shape[0],
        other_digest=None if oth is None else cloud_digest(oth),
    )
