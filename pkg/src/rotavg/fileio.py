"""Readers and writers for rotation lists and point clouds.

Rotation files are plain text, one sample per line, either nine
row-major matrix entries (``mat9``) or a ``w x y z`` quaternion
(``quat``).  Lines starting with ``#`` and blank lines are skipped.
Clouds load from ``.xyz`` (three columns per line) or ASCII ``.ply``.
"""

from __future__ import annotations

import os

import numpy as np

from rotavg import so3

__all__ = [
    "RotationFormatError",
    "RotationInvariantError",
    "CloudFormatError",
    "read_rotations",
    "write_rotations",
    "read_xyz",
    "read_ply",
    "load_cloud",
]

# How far from a perfect rotation a parsed mat9 row may be before it is
# rejected (or, with repair=True, projected back onto a rotation).
_ORTHO_TOL = 1e-6


class RotationFormatError(ValueError):
    """A rotation file line could not be parsed.  .line is 1-based."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class RotationInvariantError(ValueError):
    """A parsed value is not a valid rotation.  .line is 1-based."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class CloudFormatError(ValueError):
    """A point-cloud file could not be parsed."""


def _data_lines(path):
    """Yield (1-based line number, stripped text) for non-blank, non-# lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if text and not text.startswith("#"):
                yield lineno, text


def _quat_to_matrix(w: float, x: float, y: float, z: float) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def read_rotations(path, fmt: str = "mat9", repair: bool = False):
    """Read a rotation list from a text file.

    Args:
        path: file to read.
        fmt: "mat9" (nine row-major entries per line) or "quat"
            ("w x y z", normalized on read).
        repair: for mat9, project near-miss rows back onto a rotation
            instead of rejecting them.

    Returns:
        (rotations, repaired_count): an (N, 3, 3) array and how many rows
        needed repair (always 0 for quat input).

    Raises:
        RotationFormatError: a line has the wrong field count or a
            non-numeric field (or a zero-norm quaternion).
        RotationInvariantError: a mat9 row is not a rotation and repair
            is off (or the row is too degenerate to repair).
    """
    if fmt not in ("mat9", "quat"):
        raise ValueError(f"fmt must be 'mat9' or 'quat', got {fmt!r}")
    n_fields = 9 if fmt == "mat9" else 4
    rotations = []
    repaired = 0
    for lineno, text in _data_lines(path):
        fields = text.split()
        if len(fields) != n_fields:
            raise RotationFormatError(
                lineno, f"expected {n_fields} fields, got {len(fields)}"
            )
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise RotationFormatError(lineno, f"non-numeric field in {text!r}") from None
        if not all(np.isfinite(values)):
            raise RotationFormatError(lineno, "non-finite value")
        if fmt == "quat":
            norm = float(np.linalg.norm(values))
            if norm < 1e-12:
                raise RotationFormatError(lineno, "zero-norm quaternion")
            w, x, y, z = (v / norm for v in values)
            rotations.append(_quat_to_matrix(w, x, y, z))
            continue
        r = np.array(values).reshape(3, 3)
        if so3.is_rotation(r, tol=_ORTHO_TOL):
            rotations.append(r)
            continue
        if not repair:
            raise RotationInvariantError(
                lineno, "entries do not form a rotation matrix (use repair to project)"
            )
        try:
            rotations.append(so3.project_to_so3(r))
        except so3.DegenerateMatrix:
            raise RotationInvariantError(
                lineno, "matrix is too degenerate to repair"
            ) from None
        repaired += 1
    return np.array(rotations).reshape(-1, 3, 3), repaired


def write_rotations(path, rotations, header: str | None = None) -> None:
    """Write rotations as mat9 text, one row-major sample per line.

    Entries are printed with repr-faithful precision so a read-back
    reproduces the array bit-for-bit.  An optional header string is written
    as leading '#' comment lines.
    """
    rots = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for r in rots:
            fh.write(" ".join(f"{v:.17g}" for v in r.ravel()) + "\n")


def read_xyz(path) -> np.ndarray:
    """Read an (N, 3) cloud from whitespace-separated x y z lines.

    Lines starting with '#' and blank lines are skipped.  Anything other
    than exactly three finite numbers per line is an error.
    """
    points = []
    for lineno, text in _data_lines(path):
        fields = text.split()
        if len(fields) != 3:
            raise CloudFormatError(
                f"line {lineno}: expected 3 fields, got {len(fields)}"
            )
        try:
            xyz = [float(f) for f in fields]
        except ValueError:
            raise CloudFormatError(f"line {lineno}: non-numeric field in {text!r}") from None
        if not all(np.isfinite(xyz)):
            raise CloudFormatError(f"line {lineno}: non-finite coordinate")
        points.append(xyz)
    if not points:
        raise CloudFormatError(f"no points found in {os.fspath(path)}")
    return np.array(points)


def read_ply(path) -> np.ndarray:
    """Read vertex positions from an ASCII PLY file.

    Only `format ascii` files are supported.  Elements other than `vertex`
    are skipped; list properties inside the vertex element are rejected.
    """
    with open(path, encoding="utf-8") as fh:
        magic = fh.readline().strip()
        if magic != "ply":
            raise CloudFormatError("not a PLY file (missing 'ply' magic line)")
        # (element name, count, property names) in declaration order
        elements: list[tuple[str, int, list[str]]] = []
        fmt_seen = False
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("comment"):
                continue
            if line == "end_header":
                break
            fields = line.split()
            if fields[0] == "format":
                if len(fields) < 2 or fields[1] != "ascii":
                    raise CloudFormatError("only ASCII PLY is supported")
                fmt_seen = True
            elif fields[0] == "element":
                if len(fields) != 3:
                    raise CloudFormatError(f"malformed element line: {line!r}")
                try:
                    count = int(fields[2])
                except ValueError:
                    raise CloudFormatError(f"bad element count in {line!r}") from None
                elements.append((fields[1], count, []))
            elif fields[0] == "property":
                if not elements:
                    raise CloudFormatError("property before any element")
                if fields[1] == "list":
                    if elements[-1][0] == "vertex":
                        raise CloudFormatError("list property in vertex element is not supported")
                    elements[-1][2].append("<list>")
                else:
                    elements[-1][2].append(fields[-1])
        else:
            raise CloudFormatError("missing end_header")
        if not fmt_seen:
            raise CloudFormatError("missing format line")

        points = None
        for name, count, props in elements:
            if name != "vertex":
                # Fixed-column elements occupy one line each; list elements
                # do too in practice (count followed by entries).
                for _ in range(count):
                    if fh.readline() == "":
                        raise CloudFormatError("file ends inside a non-vertex element")
                continue
            try:
                cols = [props.index(axis) for axis in ("x", "y", "z")]
            except ValueError:
                raise CloudFormatError("vertex element lacks x/y/z properties") from None
            rows = []
            for i in range(count):
                line = fh.readline()
                if line == "":
                    raise CloudFormatError(f"file ends after {i} of {count} vertices")
                fields = line.split()
                if len(fields) < len(props):
                    raise CloudFormatError(f"vertex line has {len(fields)} fields, expected {len(props)}")
                try:
                    rows.append([float(fields[c]) for c in cols])
                except ValueError:
                    raise CloudFormatError(f"non-numeric vertex coordinate in {line!r}") from None
            points = np.array(rows)
        if points is None:
            raise CloudFormatError("no vertex element in PLY header")
        if not np.isfinite(points).all():
            raise CloudFormatError("non-finite vertex coordinate")
        return points


def load_cloud(path) -> np.ndarray:
    """Read a cloud from .ply or .xyz, deciding by content then extension."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if first == "ply":
        return read_ply(path)
    return read_xyz(path)
