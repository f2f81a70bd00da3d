import numpy as np
import pytest

from clgd.synth import KINDS, SceneSpec, synth_scene


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic(kind):
    spec = SceneSpec(rotation_deg=20, translation=0.3, crop=0.2, noise=0.01)
    a, b = synth_scene(kind, 200, 7, spec), synth_scene(kind, 200, 7, spec)
    for name in ("src", "tgt", "R", "t", "flow", "kept"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = synth_scene(kind, 200, 8, spec)
    assert not np.array_equal(a.src, c.src)


def test_crop_count():
    scene = synth_scene("sphere", 1024, 0, SceneSpec(crop=0.4))
    assert scene.tgt.shape == (615, 3)
    assert np.all(np.diff(scene.kept) > 0)


def test_rigid_ground_truth(rng):
    scene = synth_scene("torus", 300, 2, SceneSpec(rotation_deg=40, translation=0.5))
    assert np.allclose(scene.src @ scene.R.T + scene.t, scene.tgt, atol=1e-14)
    assert np.allclose(scene.src + scene.flow, scene.tgt, atol=1e-14)
    assert np.linalg.norm(scene.t) == pytest.approx(0.5)
    angle = np.degrees(np.arccos((np.trace(scene.R) - 1) / 2))
    assert angle == pytest.approx(40, abs=1e-9)


def test_two_object_flows():
    flows = ((0.1, 0, 0), (0, -0.2, 0.05))
    scene = synth_scene("two-objects", 101, 0, SceneSpec(flows=flows))
    assert np.bincount(scene.labels).tolist() == [51, 50]
    assert np.array_equal(scene.flow[scene.labels == 1], np.tile(flows[1], (50, 1)))
    assert np.allclose(scene.tgt, scene.src + scene.flow)


def test_resampled_target_lies_on_moved_surface():
    scene = synth_scene("sphere", 400, 1, SceneSpec(rotation_deg=10, translation=0.1, resample=True, target_n=800))
    assert scene.tgt.shape == (800, 3)
    back = (scene.tgt - scene.t) @ scene.R
    assert np.allclose(np.linalg.norm(back, axis=1), 1.0)


def test_relief_breaks_symmetry():
    flat = synth_scene("sphere", 400, 0, SceneSpec())
    bumpy = synth_scene("sphere", 400, 0, SceneSpec(relief=0.3))
    r = np.linalg.norm(bumpy.src, axis=1)
    assert np.allclose(np.linalg.norm(flat.src, axis=1), 1.0)
    assert r.min() >= 1.0 and r.max() > 1.2


@pytest.mark.parametrize("kw", [{"crop": 1.0}, {"crop": -0.1}, {"noise": -1}, {"target_n": 10},
                                {"flows": ((0, 0, 0),), "rotation_deg": 5}])
def test_invalid_spec(kw):
    with pytest.raises(ValueError):
        SceneSpec(**kw)


def test_invalid_scene():
    with pytest.raises(ValueError, match="kind"):
        synth_scene("cube", 100)
    with pytest.raises(ValueError, match="n must"):
        synth_scene("sphere", 7)
    with pytest.raises(ValueError, match="flows"):
        synth_scene("sphere", 100, 0, SceneSpec(flows=((0, 0, 0), (1, 0, 0))))
