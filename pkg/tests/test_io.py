import numpy as np
import pytest

from uslice.io import (FormatError, read_labels, read_point_cloud, read_raster, write_point_cloud,
                       write_raster, write_trace)


def test_point_cloud_round_trip(tmp_path, rng):
    x = rng.normal(size=(7, 3))
    w = rng.random(7)
    write_point_cloud(tmp_path / "m.csv", x, w)
    m = read_point_cloud(tmp_path / "m.csv")
    assert np.array_equal(m.points, x) and np.array_equal(m.weights, w)
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "x1,x2,x3,w"


@pytest.mark.parametrize("text", [
    "",
    "a,b\n1,2\n",
    "x1,w\n1\n",
    "x1,w\n1,abc\n",
    "x1,w\n1,-2\n",
    "x1,w\n1,nan\n",
    "x1,x2,w\n",
    "x1,w\n1,1,1\n",
])
def test_bad_point_clouds(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(FormatError):
        read_point_cloud(p)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        read_point_cloud(tmp_path / "none.csv")


def test_raster_round_trip(tmp_path, rng):
    v = rng.random((4, 6))
    write_raster(tmp_path / "r.grid", v)
    raw = (tmp_path / "r.grid").read_bytes()
    assert raw.startswith(b"USOTGRID v1\n4 6\n") and len(raw) == 16 + 8 * 24
    assert np.array_equal(read_raster(tmp_path / "r.grid"), v)


@pytest.mark.parametrize("raw", [b"nope", b"USOTGRID v1\n2 2\n" + b"\0" * 8, b"USOTGRID v1\n2 x\n"])
def test_bad_rasters(tmp_path, raw):
    p = tmp_path / "r.grid"
    p.write_bytes(raw)
    with pytest.raises(FormatError):
        read_raster(p)


def test_trace_and_labels(tmp_path):
    write_trace(tmp_path / "t.csv", [0.5, 0.25])
    assert (tmp_path / "t.csv").read_text() == "iter,dual_value\n0,0.5\n1,0.25\n"
    (tmp_path / "l.csv").write_text("doc_id,label,split\na,x,train\nb,y,test\n")
    assert read_labels(tmp_path / "l.csv") == [("a", "x", "train"), ("b", "y", "test")]
    (tmp_path / "l.csv").write_text("doc_id,label\na,x\n")
    with pytest.raises(FormatError):
        read_labels(tmp_path / "l.csv")
    (tmp_path / "l.csv").write_text("doc_id,label,split\na,x,dev\n")
    with pytest.raises(FormatError):
        read_labels(tmp_path / "l.csv")
