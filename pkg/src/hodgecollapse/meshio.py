"""Plain-text mesh interchange.

The document lists the dimension, then every simplex of every degree as an
integer tuple (one per line, in the complex's canonical order), then an
optional vertex coordinate block written at full precision:

    dimension 2
    simplices 0 4
    0
    ...
    simplices 2 4
    0 1 2
    ...
    vertices 4 3
    0.0 0.0 1.0

The integer part round-trips bit-exactly: writing a loaded mesh reproduces
the simplex block byte for byte.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .complexes import SimplicialComplex


def mesh_to_text(K: SimplicialComplex, coords=None) -> str:
    """Serialize a complex (and optional vertex coordinates) to text."""
    lines = [f"dimension {K.dimension}"]
    for p in range(K.dimension + 1):
        lines.append(f"simplices {p} {K.num(p)}")
        for s in K.simplices[p]:
            lines.append(" ".join(str(v) for v in s))
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2 or coords.shape[0] != K.num(0):
            raise ValueError("need one coordinate row per vertex")
        lines.append(f"vertices {coords.shape[0]} {coords.shape[1]}")
        for row in coords:
            lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def mesh_from_text(text: str):
    """Parse mesh_to_text output; returns (complex, coords or None)."""
    tokens = [ln.split() for ln in text.splitlines() if ln.strip()]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("truncated mesh document")
        row = tokens[pos]
        pos += 1
        return row

    head = take()
    if head[0] != "dimension" or len(head) != 2:
        raise ValueError("mesh document must start with 'dimension n'")
    n = int(head[1])
    simplices = []
    for p in range(n + 1):
        tag = take()
        if tag[:2] != ["simplices", str(p)] or len(tag) != 3:
            raise ValueError(f"expected 'simplices {p} count' header")
        count = int(tag[2])
        plist = []
        for _ in range(count):
            row = take()
            if len(row) != p + 1:
                raise ValueError(f"degree-{p} simplex needs {p + 1} vertices")
            plist.append(tuple(int(v) for v in row))
        simplices.append(plist)
    coords = None
    if pos < len(tokens):
        tag = take()
        if tag[0] != "vertices" or len(tag) != 3:
            raise ValueError("trailing block must be 'vertices count dim'")
        rows, dim = int(tag[1]), int(tag[2])
        data = []
        for _ in range(rows):
            row = take()
            if len(row) != dim:
                raise ValueError("vertex row width mismatch")
            data.append([float(x) for x in row])
        coords = np.array(data, dtype=float)
    if pos != len(tokens):
        raise ValueError("unexpected trailing content in mesh document")
    # the constructor canonicalizes; writer output is already canonical,
    # so written documents round-trip byte for byte on the integer part
    return SimplicialComplex(n, simplices), coords


def write_mesh(path, K: SimplicialComplex, coords=None) -> Path:
    path = Path(path)
    path.write_text(mesh_to_text(K, coords))
    return path


def read_mesh(path):
    return mesh_from_text(Path(path).read_text())
