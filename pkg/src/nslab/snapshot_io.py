"""Field snapshot files: structured-text header + raw little-endian samples.

Layout::

    NSLAB-SNAPSHOT v1\n
    {json header}\n
    <binary float64 little-endian, row-major (x, y, z, component)>

The binary block stores physical-space samples, so a read->write cycle is
bit-exact: loading caches the raw samples as the field's physical
representation and writing re-emits that cache untouched.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .field import ScalarField, SpectralField
from .gridspec import GridSpec

MAGIC = "NSLAB-SNAPSHOT v1"


def write_snapshot(path, field) -> None:
    """Write a SpectralField or ScalarField to a snapshot file."""
    vec = isinstance(field, SpectralField)
    comps = 3 if vec else 1
    header = {
        "grid": field.grid.to_dict(),
        "time": float(field.time),
        "components": comps,
        "endianness": "little",
        "dtype": "float64",
    }
    phys = field.physical
    if vec:
        data = np.ascontiguousarray(np.moveaxis(phys, 0, -1))
    else:
        data = np.ascontiguousarray(phys)[..., None]
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write((MAGIC + "\n").encode("ascii"))
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        fh.write(data.astype("<f8", copy=False).tobytes())
    os.replace(tmp, path)


def read_snapshot(path):
    """Read a snapshot file; returns SpectralField or ScalarField."""
    with open(path, "rb") as fh:
        magic = fh.readline().decode("ascii").strip()
        if magic != MAGIC:
            raise ValueError(f"{path}: not a snapshot file (magic {magic!r})")
        header = json.loads(fh.readline().decode("ascii"))
        raw = fh.read()
    grid = GridSpec.from_dict(header["grid"])
    comps = int(header["components"])
    n = grid.resolution
    expected = n ** 3 * comps * 8
    if len(raw) != expected:
        raise ValueError(f"{path}: payload has {len(raw)} bytes, expected {expected}")
    data = np.frombuffer(raw, dtype="<f8").reshape(n, n, n, comps)
    t = float(header["time"])
    if comps == 3:
        return SpectralField.from_physical(grid, np.moveaxis(data, -1, 0), time=t)
    return ScalarField.from_physical(grid, data[..., 0], time=t)
