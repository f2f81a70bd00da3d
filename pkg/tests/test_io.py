import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from clgd.io import CloudFormatError, dump_json, load_cloud, load_json, save_cloud


@pytest.mark.parametrize("ext", ["xyz", "ply"])
def test_round_trip_bit_exact(tmp_path, rng, ext):
    pts = rng.normal(size=(300, 3)) * 10 ** rng.uniform(-8, 8, size=(300, 1))
    path = tmp_path / f"c.{ext}"
    save_cloud(pts, path)
    assert np.array_equal(load_cloud(path), pts)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 20), st.just(3)),
              elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
def test_round_trip_property(tmp_path_factory, pts):
    path = tmp_path_factory.mktemp("rt") / "c.xyz"
    save_cloud(pts, path)
    assert np.array_equal(load_cloud(path), pts)


def test_ply_with_normals_and_faces(tmp_path):
    text = (
        "ply\nformat ascii 1.0\ncomment made by hand\n"
        "element vertex 2\nproperty float nx\nproperty float x\nproperty float y\n"
        "property float z\nproperty float ny\n"
        "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
        "9 1 2 3 9\n9 4 5 6 9\n3 0 1 1\n"
    )
    path = tmp_path / "n.ply"
    path.write_text(text)
    assert load_cloud(path).tolist() == [[1, 2, 3], [4, 5, 6]]


def test_xyz_comments_and_blanks(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("# header\n\n1 2 3  # trailing\n4 5 6\n")
    assert load_cloud(path).shape == (2, 3)


def test_malformed_line_reported(tmp_path):
    path = tmp_path / "bad.xyz"
    path.write_text("0 0 0\n1 1 1\n2 2 2\n3 3 3\n4 4\n5 5 5\n")
    with pytest.raises(CloudFormatError) as info:
        load_cloud(path)
    assert info.value.line == 5
    assert "bad.xyz:5" in str(info.value)


def test_non_numeric(tmp_path):
    path = tmp_path / "bad.xyz"
    path.write_text("0 0 zero\n")
    with pytest.raises(CloudFormatError, match=":1:"):
        load_cloud(path)


@pytest.mark.parametrize("content", ["", "# nothing\n", "nan 0 0\n", "inf 1 2\n"])
def test_empty_or_nonfinite_refused(tmp_path, content):
    path = tmp_path / "e.xyz"
    path.write_text(content)
    with pytest.raises(CloudFormatError):
        load_cloud(path)


def test_binary_ply_refused(tmp_path):
    path = tmp_path / "b.ply"
    path.write_text("ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nend_header\n")
    with pytest.raises(CloudFormatError, match="ASCII"):
        load_cloud(path)


def test_truncated_ply(tmp_path):
    path = tmp_path / "t.ply"
    path.write_text("ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
                    "property float z\nend_header\n0 0 0\n1 1 1\n")
    with pytest.raises(CloudFormatError, match="ends early"):
        load_cloud(path)


def test_unknown_extension(tmp_path):
    with pytest.raises(ValueError, match="extension"):
        load_cloud(tmp_path / "c.obj")
    with pytest.raises(ValueError, match="format"):
        load_cloud(tmp_path / "c.xyz", format="obj")


def test_json_arrays(tmp_path, rng):
    doc = {"R": np.eye(3), "n": np.int64(4), "x": np.float64(0.1), "nested": [np.arange(2)]}
    text = dump_json(doc, tmp_path / "d.json")
    assert load_json(tmp_path / "d.json") == {"R": np.eye(3).tolist(), "n": 4, "x": 0.1, "nested": [[0, 1]]}
    assert text == dump_json(doc)
