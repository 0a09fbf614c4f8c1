import json
import os
import shutil

import numpy as np
import pytest
from clock_xy_lab.circle_geometry import DiscreteCircle
from clock_xy_lab.constructions import vortex_field
from clock_xy_lab.field_io import (
    MAGIC,
    CorruptPayloadError,
    DimensionMismatchError,
    VersionMismatchError,
    field_header,
    load_field,
    save_field,
)
from clock_xy_lab.lattice_field import Ball, build_domain


@pytest.fixture
def output_folder():
    outputpath = os.path.join(os.path.dirname(__file__), "build-fields")
    yield outputpath
    # cleanup output after tests finish
    shutil.rmtree(outputpath, ignore_errors=True)


@pytest.fixture
def ball_vortex():
    domain = build_domain(Ball((0.1, -0.2), 0.5), 1 / 64)
    return vortex_field((0.0, 0.0), 1, domain, DiscreteCircle(16))


def rewrite_json(path: str, **changes):
    with open(path) as f:
        content = json.load(f)
    content.update(changes)
    with open(path, "w") as f:
        json.dump(content, f)


@pytest.mark.parametrize("name", ["vortex.clk", "vortex.json"])
def test_field_round_trip(output_folder, ball_vortex, name):
    path = os.path.join(output_folder, name)
    save_field(ball_vortex, path)
    loaded = load_field(path)
    assert loaded.epsilon == ball_vortex.epsilon
    assert loaded.circle.n_states == 16
    assert loaded.domain.shape == ball_vortex.domain.shape
    assert loaded.domain.offset == ball_vortex.domain.offset
    np.testing.assert_array_equal(loaded.grid, ball_vortex.grid)


def test_binary_layout(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.clk")
    save_field(ball_vortex, path)
    with open(path, "rb") as f:
        blob = f.read()
    assert blob[:4] == MAGIC
    length = int.from_bytes(blob[4:8], "little")
    assert json.loads(blob[8 : 8 + length]) == field_header(ball_vortex)
    nx, ny = ball_vortex.domain.dims
    assert len(blob) == 8 + length + 4 * nx * ny
    # sites outside the ball are stored as -1
    assert int.from_bytes(blob[8 + length : 12 + length], "little", signed=True) == -1


def test_truncated_payload(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.clk")
    save_field(ball_vortex, path)
    with open(path, "rb") as f:
        blob = f.read()
    with open(path, "wb") as f:
        f.write(blob[:-4])
    with pytest.raises(CorruptPayloadError):
        load_field(path)


def test_bad_magic(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.clk")
    save_field(ball_vortex, path)
    with open(path, "rb") as f:
        blob = f.read()
    with open(path, "wb") as f:
        f.write(b"XXXX" + blob[4:])
    with pytest.raises(CorruptPayloadError):
        load_field(path)


def test_states_beyond_n_states(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.json")
    save_field(ball_vortex, path)
    rewrite_json(path, n_states=8)
    with pytest.raises(DimensionMismatchError):
        load_field(path)


def test_moved_origin(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.json")
    save_field(ball_vortex, path)
    i0, j0 = ball_vortex.domain.offset
    rewrite_json(path, origin=[i0 + 1, j0])
    with pytest.raises(DimensionMismatchError):
        load_field(path)


def test_unknown_format_version(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.json")
    save_field(ball_vortex, path)
    rewrite_json(path, format_version=2)
    with pytest.raises(VersionMismatchError):
        load_field(path)


def test_ragged_json_states(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.json")
    save_field(ball_vortex, path)
    rewrite_json(path, states=[[0, 1], [2]])
    with pytest.raises(CorruptPayloadError):
        load_field(path)


@pytest.mark.parametrize("key", ["dims", "shape", "epsilon", "n_states", "origin"])
def test_json_header_missing_a_key(output_folder, ball_vortex, key):
    path = os.path.join(output_folder, "vortex.json")
    save_field(ball_vortex, path)
    with open(path) as f:
        content = json.load(f)
    del content[key]
    with open(path, "w") as f:
        json.dump(content, f)
    with pytest.raises(CorruptPayloadError, match=key):
        load_field(path)


def test_binary_header_missing_dims(output_folder, ball_vortex):
    path = os.path.join(output_folder, "vortex.clk")
    header = field_header(ball_vortex)
    del header["dims"]
    encoded = json.dumps(header).encode("utf-8")
    os.makedirs(output_folder, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC + len(encoded).to_bytes(4, "little") + encoded)
        f.write(ball_vortex.grid.astype("<i4").tobytes())
    with pytest.raises(CorruptPayloadError, match="dims"):
        load_field(path)
