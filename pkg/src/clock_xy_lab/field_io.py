"""
Reading and writing spin fields

Binary layout: magic b"CLKF", little-endian uint32 header length, UTF-8 JSON header,
then ny * nx little-endian int32 states with -1 outside the domain.
A path ending in .json selects the JSON variant carrying the same header plus the rows.
"""

import json
import os
import struct

import numpy as np
from structlog import get_logger

from clock_xy_lab.circle_geometry import DiscreteCircle
from clock_xy_lab.lattice_field import SpinField, build_domain, shape_from_dict

LOGGER = get_logger(__name__)

FORMAT_VERSION = 1
MAGIC = b"CLKF"
HEADER_KEYS = ("epsilon", "n_states", "origin", "dims", "shape")


class FieldFormatError(ValueError):
    """A field file cannot be read."""


class VersionMismatchError(FieldFormatError):
    pass


class CorruptPayloadError(FieldFormatError):
    pass


class DimensionMismatchError(FieldFormatError):
    pass


def field_header(field: SpinField) -> dict:
    nx, ny = field.domain.dims
    return {
        "format_version": FORMAT_VERSION,
        "epsilon": field.epsilon,
        "n_states": field.circle.n_states,
        "origin": list(field.domain.offset),
        "dims": [nx, ny],
        "shape": field.domain.shape.to_dict(),
    }


def save_field(field: SpinField, path: str) -> None:
    header = field_header(field)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if path.endswith(".json"):
        header["states"] = field.grid.tolist()
        with open(path, "w") as f:
            json.dump(header, f)
    else:
        encoded = json.dumps(header).encode("utf-8")
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(field.grid.astype("<i4").tobytes())
    LOGGER.info(f"Saved field with {field.domain.n_sites} sites to {path}")


def _read_binary(path: str) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC or len(blob) < 8:
        raise CorruptPayloadError(f"{path} is not a field file")
    (length,) = struct.unpack("<I", blob[4:8])
    try:
        header = json.loads(blob[8 : 8 + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptPayloadError(f"Unreadable header in {path}") from e
    _check_version(header, path)
    nx, ny = header["dims"]
    payload = blob[8 + length :]
    if len(payload) != 4 * nx * ny:
        raise CorruptPayloadError(
            f"{path} holds {len(payload)} payload bytes, expected {4 * nx * ny}"
        )
    return header, np.frombuffer(payload, dtype="<i4").reshape(ny, nx)


def _read_json(path: str) -> tuple[dict, np.ndarray]:
    try:
        with open(path) as f:
            header = json.load(f)
    except json.JSONDecodeError as e:
        raise CorruptPayloadError(f"Unreadable field file {path}") from e
    _check_version(header, path)
    nx, ny = header["dims"]
    try:
        grid = np.array(header.pop("states"), dtype=np.int64)
    except (KeyError, ValueError) as e:
        raise CorruptPayloadError(f"Missing or ragged states in {path}") from e
    if grid.shape != (ny, nx):
        raise CorruptPayloadError(f"States of shape {grid.shape} in {path}, expected {(ny, nx)}")
    return header, grid


def _check_version(header: dict, path: str):
    if header.get("format_version") != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path} has format version {header.get('format_version')}, "
            f"this reader understands {FORMAT_VERSION}"
        )
    missing = [key for key in HEADER_KEYS if key not in header]
    if missing:
        raise CorruptPayloadError(f"Header of {path} lacks {', '.join(missing)}")


def load_field(path: str) -> SpinField:
    if path.endswith(".json"):
        header, grid = _read_json(path)
    else:
        header, grid = _read_binary(path)
    domain = build_domain(shape_from_dict(header["shape"]), header["epsilon"])
    if list(domain.dims) != list(header["dims"]) or list(domain.offset) != list(header["origin"]):
        raise DimensionMismatchError(
            f"Header dims {header['dims']} do not match the rebuilt domain {domain.dims}"
        )
    circle = DiscreteCircle(header["n_states"])
    states = grid[domain.mask]
    if states.size and (states.min() < 0 or states.max() >= circle.n_states):
        raise DimensionMismatchError(
            f"States outside [0, {circle.n_states}) for n_states={circle.n_states}"
        )
    LOGGER.info(f"Loaded field with {domain.n_sites} sites from {path}")
    return SpinField(domain, circle, grid)
