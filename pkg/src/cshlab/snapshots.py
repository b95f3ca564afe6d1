"""Flat binary container for field snapshots, plus a JSON sidecar.

Layout (little endian):

    magic   8 bytes  b"CSHSNAP1"
    M       uint32
    box     float64
    n       uint32   su(n) dimension
    rep     uint8    0 = physical, 1 = spectral
    nfld    uint32
    per field:
        nlen   uint16, name utf-8
        ncomp  uint32          (1 for scalars, n^2-1 for algebra fields)
        data   ncomp*M*M complex128 as interleaved re/im float64

The sidecar `<path>.json` repeats the header and carries free-form metadata.
"""

import json
import struct

import numpy as np

from .grid import Grid2D, LieFieldGrid, PHYSICAL, SPECTRAL, ScalarField

MAGIC = b"CSHSNAP1"
_REP_CODE = {PHYSICAL: 0, SPECTRAL: 1}
_REP_NAME = {0: PHYSICAL, 1: SPECTRAL}


def save_snapshot(path, fields, n, metadata=None):
    """Write named fields (ScalarField or LieFieldGrid) sharing one grid."""
    names = list(fields)
    first = fields[names[0]]
    grid, rep = first.grid, first.rep
    for name in names:
        f = fields[name]
        if f.grid != grid or f.rep != rep:
            raise ValueError("all fields must share grid and representation")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Id I B I", grid.M, grid.box_length, n,
                             _REP_CODE[rep], len(names)))
        for name in names:
            f = fields[name]
            data = f.values if isinstance(f, LieFieldGrid) else f.values[None]
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", data.shape[0]))
            interleaved = np.empty(data.size * 2, dtype="<f8")
            flat = data.reshape(-1)
            interleaved[0::2] = flat.real
            interleaved[1::2] = flat.imag
            fh.write(interleaved.tobytes())
    sidecar = {
        "format": MAGIC.decode(),
        "M": grid.M,
        "box_length": grid.box_length,
        "n": n,
        "representation": rep,
        "fields": names,
    }
    if metadata:
        sidecar["metadata"] = metadata
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_snapshot(path):
    """Read a container; returns (fields dict, n, sidecar metadata or None)."""
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError("not a snapshot container")
        M, box, n, rep_code, nfld = struct.unpack("<Id I B I", fh.read(struct.calcsize("<Id I B I")))
        grid = Grid2D(M, box)
        rep = _REP_NAME[rep_code]
        fields = {}
        for _ in range(nfld):
            (nlen,) = struct.unpack("<H", fh.read(2))
            name = fh.read(nlen).decode("utf-8")
            (ncomp,) = struct.unpack("<I", fh.read(4))
            raw = np.frombuffer(fh.read(ncomp * M * M * 16), dtype="<f8")
            data = (raw[0::2] + 1j * raw[1::2]).reshape(ncomp, M, M)
            if ncomp == 1:
                fields[name] = ScalarField(grid, data[0], rep)
            else:
                fields[name] = LieFieldGrid(grid, data, rep)
    meta = None
    try:
        with open(str(path) + ".json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        pass
    return fields, n, meta
