"""Native ASCII mesh format (``mesh2d 1``)."""

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import structlog

from ..exceptions import MeshParseError, MeshTopologyError
from .mesh import BoundaryPatch, Mesh, PatchTag

logger = structlog.get_logger(__name__)

MAGIC = "mesh2d"
VERSION = 1


class _Lines:
    """Cursor over the significant lines of a mesh file."""

    def __init__(self, text: str, path: str) -> None:
        self._rows: List[Tuple[int, List[str]]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            tokens = line.split("#", 1)[0].split()
            if tokens:
                self._rows.append((lineno, tokens))
        self._pos = 0
        self.path = path

    def next(self, what: str) -> Tuple[int, List[str]]:
        if self._pos >= len(self._rows):
            raise MeshParseError(f"unexpected end of file while reading {what}", path=self.path)
        row = self._rows[self._pos]
        self._pos += 1
        return row

    def exhausted(self) -> bool:
        return self._pos >= len(self._rows)

    def section(self, keyword: str, extra: int = 0) -> Tuple[int, List[str]]:
        lineno, tokens = self.next(f"'{keyword}' header")
        if tokens[0] != keyword or len(tokens) != 2 + extra:
            raise MeshParseError(f"expected '{keyword}' header", line=lineno, path=self.path)
        return lineno, tokens

    def fail(self, message: str, lineno: int) -> MeshParseError:
        return MeshParseError(message, line=lineno, path=self.path)


def _count(lines: _Lines, token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise lines.fail(f"count '{token}' is not an integer", lineno) from None
    if value < 0:
        raise lines.fail("negative count", lineno)
    return value


def parse_mesh(text: str, path: str = "<string>") -> Mesh:
    """Parse mesh text; raises MeshParseError or MeshTopologyError."""
    lines = _Lines(text, path)

    lineno, tokens = lines.next("header")
    if tokens != [MAGIC, str(VERSION)]:
        raise lines.fail(f"expected header '{MAGIC} {VERSION}'", lineno)

    lineno, tokens = lines.section("vertices")
    n_vertices = _count(lines, tokens[1], lineno)
    vertices = np.empty((n_vertices, 2))
    for i in range(n_vertices):
        lineno, tokens = lines.next("vertex coordinates")
        if len(tokens) != 2:
            raise lines.fail("vertex line must hold exactly two coordinates", lineno)
        try:
            vertices[i] = [float(tokens[0]), float(tokens[1])]
        except ValueError:
            raise lines.fail("vertex coordinate is not a number", lineno) from None
    if not np.all(np.isfinite(vertices)):
        raise MeshParseError("non-finite vertex coordinate", path=path)

    lineno, tokens = lines.section("elements")
    n_elements = _count(lines, tokens[1], lineno)
    elements: List[Tuple[int, ...]] = []
    for _ in range(n_elements):
        lineno, tokens = lines.next("element connectivity")
        try:
            ints = [int(t) for t in tokens]
        except ValueError:
            raise lines.fail("element line must hold integers", lineno) from None
        k = ints[0]
        if k not in (3, 4) or len(ints) != k + 1:
            raise lines.fail("element line must be 'k i0 ... i{k-1}' with k = 3 or 4", lineno)
        elements.append(tuple(ints[1:]))

    patches: List[BoundaryPatch] = []
    if not lines.exhausted():
        lineno, tokens = lines.section("patches")
        n_patches = _count(lines, tokens[1], lineno)
        for _ in range(n_patches):
            lineno, tokens = lines.next("patch header")
            if tokens[0] != "patch" or len(tokens) != 4:
                raise lines.fail("expected 'patch <name> <tag> <F>'", lineno)
            try:
                tag = PatchTag(tokens[2].lower())
            except ValueError:
                raise lines.fail(f"unknown patch tag '{tokens[2]}'", lineno) from None
            n_faces = _count(lines, tokens[3], lineno)
            faces = []
            for _ in range(n_faces):
                lineno, pair = lines.next("patch face")
                if len(pair) != 2:
                    raise lines.fail("patch face must be a vertex pair", lineno)
                try:
                    faces.append((int(pair[0]), int(pair[1])))
                except ValueError:
                    raise lines.fail("patch face indices must be integers", lineno) from None
            patches.append(BoundaryPatch(tokens[1], tag, tuple(faces)))

    if not lines.exhausted():
        lineno, _ = lines.next("trailing content")
        raise lines.fail("unexpected content after the last section", lineno)

    return Mesh(vertices, elements, patches)


def load_mesh(path: Union[str, Path]) -> Mesh:
    """Read, build and check a mesh file.

    Face connectivity is derived from the element list. Inverted or degenerate
    elements and inconsistently oriented faces are topology failures.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MeshParseError(f"cannot read mesh file: {exc}", path=str(path)) from exc

    mesh = parse_mesh(text, str(path))

    issues: List[str] = []
    for e in np.flatnonzero(mesh.geometry.area <= 0.0):
        issues.append(f"element {e} has non-positive area {mesh.geometry.area[e]:.6e}")
    for f in mesh.orientation_conflicts:
        issues.append(f"face {f} has inconsistent orientation")
    if issues:
        raise MeshTopologyError("mesh failed topology checks", issues=issues, details={"path": str(path)})

    logger.info(
        "Mesh loaded",
        path=str(path),
        vertices=mesh.n_vertices,
        elements=mesh.n_elements,
        faces=mesh.n_faces,
        patches=[p.name for p in mesh.patches],
    )
    return mesh


def format_mesh(mesh: Mesh) -> str:
    out: List[str] = [f"{MAGIC} {VERSION}", f"vertices {mesh.n_vertices}"]
    out.extend(f"{x!r} {y!r}" for x, y in mesh.vertices.tolist())
    out.append(f"elements {mesh.n_elements}")
    out.extend(" ".join(str(i) for i in (len(el), *el)) for el in mesh.elements)
    out.append(f"patches {len(mesh.patches)}")
    for patch in mesh.patches:
        out.append(f"patch {patch.name} {patch.tag.value} {len(patch.faces)}")
        out.extend(f"{a} {b}" for a, b in patch.faces)
    return "\n".join(out) + "\n"


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Write ``mesh`` in the native format; coordinates round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_mesh(mesh), encoding="utf-8")
    logger.debug("Mesh written", path=str(path), elements=mesh.n_elements)
    return path
