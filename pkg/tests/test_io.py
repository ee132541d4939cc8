import struct

import numpy as np
import pytest

from nrlimit.grid import Field, make_grid
from nrlimit.io import MAGIC, read_snapshot, snapshot_bytes, write_csv, write_snapshot


def test_snapshot_roundtrip(tmp_path, rng):
    g = make_grid(2, 8, 3.0)
    f = Field(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    path = tmp_path / "s.nrlb"
    write_snapshot(path, f)
    back = read_snapshot(path, length=3.0)
    assert back.grid == g
    np.testing.assert_array_equal(back.spectral, f.spectral)


def test_snapshot_layout():
    g = make_grid(1, 8)
    f = Field.from_spectral(g, np.arange(8) + 1j)
    data = snapshot_bytes(f)
    assert data[:4] == MAGIC
    assert struct.unpack_from("<III", data, 4) == (1, 1, 8)
    assert len(data) == 16 + 16 * 8
    assert np.frombuffer(data[16:32], "<f8").tolist() == [0.0, 1.0]


@pytest.mark.parametrize("mutate", ["magic", "version", "truncate"])
def test_snapshot_rejects_corruption(tmp_path, mutate):
    data = bytearray(snapshot_bytes(Field.zeros(make_grid(1, 8))))
    if mutate == "magic":
        data[:4] = b"XXXX"
    elif mutate == "version":
        data[4:8] = struct.pack("<I", 9)
    else:
        data = data[:-3]
    path = tmp_path / "bad.nrlb"
    path.write_bytes(bytes(data))
    with pytest.raises(ValueError):
        read_snapshot(path)


def test_write_csv(tmp_path):
    path = tmp_path / "x.csv"
    text = write_csv([(1, "a"), (2, "b")], ("n", "s"), path)
    assert text == "n,s\n1,a\n2,b\n"
    assert path.read_text() == text
