"""Polysquare / polyrectangle translation surfaces.

A surface is a finite set of axis-aligned rectangular faces with every Right
side glued to a Left side and every Top glued to a Bottom by pure
translation.  Gluings pair whole sides of exactly equal (field-exact)
length, so faces stack into constant-width vertical columns and the
vertical edges of the surface are precisely the left sides of the faces,
indexed in face order.

Vertex classes are computed by walking corner identifications; classes with
total angle above 2*pi are the cone points where geodesic flow is singular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .exactnum import FieldElement, Q, expr_text, qify, tower
from .exactnum.cf import PreconditionError


class SurfaceError(ValueError):
    """Structurally invalid gluing data."""


class Side(str, Enum):
    L = "L"
    R = "R"
    T = "T"
    B = "B"


@dataclass(frozen=True)
class EdgeRef:
    face: int  # face label
    side: Side


@dataclass(frozen=True)
class Face:
    id: int
    width: FieldElement
    height: FieldElement


@dataclass(frozen=True)
class VerticalCoord:
    """A point on vertical edge `edge` (0-based index), `y` above its bottom."""

    edge: int
    y: FieldElement


@dataclass
class VertexClass:
    ident: int
    corners: tuple  # of (face index, corner) with corner in {"bl","br","tr","tl"}
    angle_halfpis: int  # total cone angle in units of pi/2

    @property
    def singular(self) -> bool:
        return self.angle_halfpis > 4


@dataclass
class Violation:
    code: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation]
    vertex_count: int = 0
    edge_count: int = 0
    face_count: int = 0
    genus: int | None = None
    vertices: list[VertexClass] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self):
        if self.violations:
            msgs = "; ".join(f"[{v.code}] {v.message}" for v in self.violations)
            raise SurfaceError(msgs)


_CORNERS = ("bl", "br", "tr", "tl")


class Surface:
    """Immutable translation surface; construct via the builders or net files."""

    def __init__(self, tower_spec, faces, v_pairs, h_pairs, check=True):
        self.tower = tower_spec
        self.faces = tuple(faces)
        self.v_pairs = tuple(v_pairs)
        self.h_pairs = tuple(h_pairs)
        self._index = {f.id: i for i, f in enumerate(self.faces)}
        if len(self._index) != len(self.faces):
            raise SurfaceError("duplicate face ids")
        n = len(self.faces)
        self.right_of = [None] * n  # face index to the right (across its R side)
        self.left_of = [None] * n
        self.above = [None] * n
        self.below = [None] * n
        self._vertex_classes = None
        self._columns: dict[int, tuple] = {}
        report = self._wire()
        if check:
            report = self.validate(report)
            report.raise_if_invalid()

    # -- wiring ----------------------------------------------------------------

    def face_index(self, label: int) -> int:
        return self._index[label]

    def _wire(self) -> ValidationReport:
        report = ValidationReport(violations=[], face_count=len(self.faces))
        seen: set[tuple[int, Side]] = set()

        def claim(ref: EdgeRef, want: Side):
            if ref.face not in self._index:
                report.violations.append(
                    Violation("unknown-face", f"gluing names missing face {ref.face}")
                )
                return None
            if ref.side != want:
                report.violations.append(
                    Violation(
                        "bad-side",
                        f"{ref.face}.{ref.side.value} used where a {want.value} side belongs",
                    )
                )
                return None
            key = (ref.face, ref.side)
            if key in seen:
                report.violations.append(
                    Violation("reglued-edge", f"{ref.face}.{ref.side.value} glued twice")
                )
                return None
            seen.add(key)
            return self._index[ref.face]

        for r_ref, l_ref in self.v_pairs:
            a = claim(r_ref, Side.R)
            b = claim(l_ref, Side.L)
            if a is None or b is None:
                continue
            self.right_of[a] = b
            self.left_of[b] = a
            if self.faces[a].height != self.faces[b].height:
                report.violations.append(
                    Violation(
                        "length-mismatch",
                        f"glued vertical sides {r_ref.face}.R / {l_ref.face}.L "
                        f"have different lengths",
                    )
                )
        for t_ref, b_ref in self.h_pairs:
            a = claim(t_ref, Side.T)
            b = claim(b_ref, Side.B)
            if a is None or b is None:
                continue
            self.above[a] = b
            self.below[b] = a
            if self.faces[a].width != self.faces[b].width:
                report.violations.append(
                    Violation(
                        "length-mismatch",
                        f"glued horizontal sides {t_ref.face}.T / {b_ref.face}.B "
                        f"have different lengths",
                    )
                )
        for i, f in enumerate(self.faces):
            for name, arr in (
                ("R", self.right_of),
                ("L", self.left_of),
                ("T", self.above),
                ("B", self.below),
            ):
                if arr[i] is None:
                    report.violations.append(
                        Violation("unmatched-edge", f"face {f.id} side {name} is unglued")
                    )
        return report

    # -- derived structure -------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.faces)

    def edge_length(self, edge: int) -> FieldElement:
        return self.faces[edge].height

    def edge_label(self, edge: int) -> int:
        """Vertical edge i is the left side of face i; expose the face label."""
        return self.faces[edge].id

    def total_vertical_length(self) -> FieldElement:
        acc = self.tower.zero
        for f in self.faces:
            acc = acc + f.height
        return acc

    def area(self) -> FieldElement:
        acc = self.tower.zero
        for f in self.faces:
            acc = acc + f.width * f.height
        return acc

    def streets(self) -> list[list[int]]:
        """Cycles of the right-neighbor map: the horizontal streets, in face order."""
        seen = set()
        out = []
        for start in range(len(self.faces)):
            if start in seen:
                continue
            cyc = []
            cur = start
            while cur not in seen:
                seen.add(cur)
                cyc.append(cur)
                cur = self.right_of[cur]
            out.append(cyc)
        return out

    def column(self, face: int) -> tuple[list[int], list[FieldElement]]:
        """The vertical cylinder through `face`: stacked faces and cumulative heights.

        Returns (faces, cum) with faces[0] == face, cum[0] == 0 and
        cum[k+1] - cum[k] == height(faces[k]); the stack is cyclic.
        """
        cached = self._columns.get(face)
        if cached is not None:
            return cached
        stack = [face]
        cum = [self.tower.zero]
        cur = face
        while True:
            cum.append(cum[-1] + self.faces[cur].height)
            cur = self.above[cur]
            if cur == face:
                break
            stack.append(cur)
        result = (stack, cum)
        for k, f in enumerate(stack):
            # every face in the cycle shares the column; rotate the cache entries
            if f not in self._columns:
                rot_stack = stack[k:] + stack[:k]
                base = cum[k]
                rot_cum = [self.tower.zero]
                for g in rot_stack:
                    rot_cum.append(rot_cum[-1] + self.faces[g].height)
                self._columns[f] = (rot_stack, rot_cum)
        return self._columns[face]

    def vertex_classes(self) -> list[VertexClass]:
        if self._vertex_classes is not None:
            return self._vertex_classes
        n = len(self.faces)
        parent = list(range(4 * n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        def cid(face, corner):
            return 4 * face + _CORNERS.index(corner)

        for i in range(n):
            j = self.right_of[i]
            union(cid(i, "br"), cid(j, "bl"))
            union(cid(i, "tr"), cid(j, "tl"))
            k = self.above[i]
            union(cid(i, "tl"), cid(k, "bl"))
            union(cid(i, "tr"), cid(k, "br"))
        groups: dict[int, list] = {}
        for f in range(n):
            for c in _CORNERS:
                groups.setdefault(find(cid(f, c)), []).append((f, c))
        classes = [
            VertexClass(ident=idx, corners=tuple(g), angle_halfpis=len(g))
            for idx, g in enumerate(groups.values())
        ]
        self._vertex_classes = classes
        return classes

    def vertex_at(self, face: int, corner: str) -> VertexClass:
        """The vertex class containing the given corner of a face (by index)."""
        for vc in self.vertex_classes():
            if (face, corner) in vc.corners:
                return vc
        raise AssertionError("corner missing from vertex classes")

    def vertex_at_column_level(self, face_below: int) -> VertexClass:
        """The vertex class at the top-right corner of `face_below` (a column level)."""
        return self.vertex_at(face_below, "tr")

    def genus(self) -> int:
        v = len(self.vertex_classes())
        e = len(self.v_pairs) + len(self.h_pairs)
        chi = v - e + len(self.faces)
        if chi % 2:
            raise SurfaceError(f"odd Euler characteristic {chi}")
        return (2 - chi) // 2

    # -- validation ----------------------------------------------------------------

    def validate(self, base: ValidationReport | None = None) -> ValidationReport:
        report = base if base is not None else self._wire()
        for f in self.faces:
            if not (f.width > 0):
                report.violations.append(
                    Violation("nonpositive-width", f"face {f.id} has nonpositive width")
                )
            if not (f.height > 0):
                report.violations.append(
                    Violation("nonpositive-height", f"face {f.id} has nonpositive height")
                )
        # connectivity through gluings
        if not report.violations:
            n = len(self.faces)
            seen = {0}
            todo = [0]
            while todo:
                cur = todo.pop()
                for nxt in (
                    self.right_of[cur],
                    self.left_of[cur],
                    self.above[cur],
                    self.below[cur],
                ):
                    if nxt not in seen:
                        seen.add(nxt)
                        todo.append(nxt)
            if len(seen) != n:
                report.violations.append(
                    Violation("disconnected", f"only {len(seen)} of {n} faces reachable")
                )
        if not report.violations:
            classes = self.vertex_classes()
            for vc in classes:
                if vc.angle_halfpis % 4:
                    report.violations.append(
                        Violation(
                            "bad-cone-angle",
                            f"vertex class {vc.ident} has angle {vc.angle_halfpis}*pi/2",
                        )
                    )
            report.vertices = classes
            report.vertex_count = len(classes)
            report.edge_count = len(self.v_pairs) + len(self.h_pairs)
            try:
                report.genus = self.genus()
            except SurfaceError as e:
                report.violations.append(Violation("euler", str(e)))
        return report

    # -- bookkeeping classes for the travel counters ---------------------------------

    def width_classes(self) -> list[FieldElement]:
        out: list[FieldElement] = []
        for f in self.faces:
            if all(f.width != w for w in out):
                out.append(f.width)
        return sorted(out)

    def height_classes(self) -> list[FieldElement]:
        out: list[FieldElement] = []
        for f in self.faces:
            if all(f.height != h for h in out):
                out.append(f.height)
        return sorted(out)

    # -- equality (structural) ----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Surface):
            return NotImplemented
        return (
            self.tower is other.tower
            and self.faces == other.faces
            and set(self.v_pairs) == set(other.v_pairs)
            and set(self.h_pairs) == set(other.h_pairs)
        )

    def __repr__(self):
        return f"<Surface {len(self.faces)} faces, genus {self.genus()}>"


def validate(surface: Surface) -> ValidationReport:
    """Structured validation report (never raises)."""
    return surface.validate()


# -- tables (surfaces with reflecting walls) -------------------------------------


@dataclass
class Table:
    """A billiard table: faces with *partial* gluing; unglued sides are walls."""

    tower: object
    faces: tuple
    v_pairs: tuple
    h_pairs: tuple

    def wall_count(self) -> int:
        glued = {(r.face, r.side) for r, _ in self.v_pairs}
        glued |= {(l.face, l.side) for _, l in self.v_pairs}
        glued |= {(t.face, t.side) for t, _ in self.h_pairs}
        glued |= {(b.face, b.side) for _, b in self.h_pairs}
        return 4 * len(self.faces) - len(glued)


# -- builders --------------------------------------------------------------------


def _unit_faces(tower_spec, count):
    one = tower_spec.one
    return [Face(i + 1, one, one) for i in range(count)]


def build_polysquare(cells, v_glue=None, h_glue=None, tower_spec=None) -> Surface:
    """Surface from unit grid cells plus explicit boundary pairings.

    cells: set of (col, row) integer pairs; faces are ordered row-major
    (bottom row first), labelled 1..s.  Interior shared edges glue to their
    geometric neighbours; v_glue/h_glue list ((right cell),(left cell)) and
    ((top cell),(bottom cell)) pairs covering every boundary edge exactly
    once.  With both omitted, each horizontal and vertical run of cells
    wraps around torus-style.
    """
    cells = sorted(set(map(tuple, cells)), key=lambda cr: (cr[1], cr[0]))
    if not cells:
        raise PreconditionError("no cells")
    cellset = set(cells)
    # chain condition: 4-neighbour connectivity
    seen = {cells[0]}
    todo = [cells[0]]
    while todo:
        x, y = todo.pop()
        for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nxt in cellset and nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    if len(seen) != len(cells):
        raise SurfaceError(
            "region is not edge-connected (squares touching at most at corners)"
        )
    if tower_spec is None:
        tower_spec = tower([])
    label = {cell: i + 1 for i, cell in enumerate(cells)}
    faces = _unit_faces(tower_spec, len(cells))

    if v_glue is None and h_glue is None:
        v_glue, h_glue = wrap_glue(cellset)
    v_glue = list(v_glue or ())
    h_glue = list(h_glue or ())

    v_pairs = []
    h_pairs = []
    for (x, y) in cells:
        if (x + 1, y) in cellset:
            v_pairs.append(
                (EdgeRef(label[(x, y)], Side.R), EdgeRef(label[(x + 1, y)], Side.L))
            )
        if (x, y + 1) in cellset:
            h_pairs.append(
                (EdgeRef(label[(x, y)], Side.T), EdgeRef(label[(x, y + 1)], Side.B))
            )
    for right_cell, left_cell in v_glue:
        right_cell, left_cell = tuple(right_cell), tuple(left_cell)
        for cell, side in ((right_cell, "right"), (left_cell, "left")):
            if cell not in cellset:
                raise SurfaceError(f"glue names missing cell {cell}")
        if (right_cell[0] + 1, right_cell[1]) in cellset:
            raise SurfaceError(f"right edge of {right_cell} is interior, not a boundary edge")
        if (left_cell[0] - 1, left_cell[1]) in cellset:
            raise SurfaceError(f"left edge of {left_cell} is interior, not a boundary edge")
        v_pairs.append((EdgeRef(label[right_cell], Side.R), EdgeRef(label[left_cell], Side.L)))
    for top_cell, bottom_cell in h_glue:
        top_cell, bottom_cell = tuple(top_cell), tuple(bottom_cell)
        for cell in (top_cell, bottom_cell):
            if cell not in cellset:
                raise SurfaceError(f"glue names missing cell {cell}")
        if (top_cell[0], top_cell[1] + 1) in cellset:
            raise SurfaceError(f"top edge of {top_cell} is interior, not a boundary edge")
        if (bottom_cell[0], bottom_cell[1] - 1) in cellset:
            raise SurfaceError(f"bottom edge of {bottom_cell} is interior, not a boundary edge")
        h_pairs.append((EdgeRef(label[top_cell], Side.T), EdgeRef(label[bottom_cell], Side.B)))
    return Surface(tower_spec, faces, v_pairs, h_pairs)


def wrap_glue(cellset):
    """Torus-style pairings: each horizontal/vertical run wraps onto itself."""
    v_glue = []
    h_glue = []
    for (x, y) in cellset:
        if (x + 1, y) not in cellset:  # right end of a run
            lx = x
            while (lx - 1, y) in cellset:
                lx -= 1
            v_glue.append(((x, y), (lx, y)))
        if (x, y + 1) not in cellset:  # top end of a run
            ly = y
            while (x, ly - 1) in cellset:
                ly -= 1
            h_glue.append(((x, y), (x, ly)))
    return v_glue, h_glue


def polysquare_table(cells, tower_spec=None) -> Table:
    """Billiard table from unit cells: interior edges glued, boundary = walls."""
    cells = sorted(set(map(tuple, cells)), key=lambda cr: (cr[1], cr[0]))
    if not cells:
        raise PreconditionError("no cells")
    if tower_spec is None:
        tower_spec = tower([])
    cellset = set(cells)
    label = {cell: i + 1 for i, cell in enumerate(cells)}
    faces = _unit_faces(tower_spec, len(cells))
    v_pairs = []
    h_pairs = []
    for (x, y) in cells:
        if (x + 1, y) in cellset:
            v_pairs.append((EdgeRef(label[(x, y)], Side.R), EdgeRef(label[(x + 1, y)], Side.L)))
        if (x, y + 1) in cellset:
            h_pairs.append((EdgeRef(label[(x, y)], Side.T), EdgeRef(label[(x, y + 1)], Side.B)))
    return Table(tower_spec, tuple(faces), tuple(v_pairs), tuple(h_pairs))


def build_octagon() -> Surface:
    """The regular octagon surface as a 7-rectangle polyrectangle net.

    Two horizontal streets: faces 1-4 of height 1 and faces 5-7 of height
    sqrt2.  Crossing rightward from the left edge of faces 1,3,5,7 covers
    width 1, from faces 2,4,6 width sqrt2; total vertical edge length is
    4 + 3*sqrt2 and the surface has genus 2 with a single cone point of
    angle 6*pi.  See docs/octagon-net.md for the derivation of this net
    from the octagon with opposite sides identified.
    """
    t = tower([("r", 2, 2), ("c", 3, 3)])
    one = t.one
    rt2 = t.generator("r")
    faces = [
        Face(1, one, one),
        Face(2, rt2, one),
        Face(3, one, one),
        Face(4, rt2, one),
        Face(5, one, rt2),
        Face(6, rt2, rt2),
        Face(7, one, rt2),
    ]
    v = [(1, 2), (2, 3), (3, 4), (4, 1), (5, 6), (6, 7), (7, 5)]
    h = [(1, 7), (2, 4), (5, 1), (6, 2), (7, 3), (3, 5), (4, 6)]
    v_pairs = [(EdgeRef(a, Side.R), EdgeRef(b, Side.L)) for a, b in v]
    h_pairs = [(EdgeRef(a, Side.T), EdgeRef(b, Side.B)) for a, b in h]
    return Surface(t, faces, v_pairs, h_pairs)


def four_copy(table: Table) -> Surface:
    """Unfold a table into a translation surface of four reflected copies.

    Copy k of face f is labelled 4*(f-1)+k+1 for k = 0 (identity), 1
    (horizontal mirror), 2 (vertical mirror), 3 (both).  Billiard orbits on
    the table lift to straight geodesics; the area is exactly 4x the input.
    """
    if isinstance(table, Surface):
        raise PreconditionError("input is a closed surface: nothing to unfold")
    if table.wall_count() == 0:
        raise PreconditionError("table has no walls: nothing to unfold")
    ids = {}
    faces = []
    face_list = list(table.faces)
    for k in range(4):
        for f in face_list:
            new_id = 4 * (f.id - 1) + k + 1
            ids[(f.id, k)] = new_id
            faces.append(Face(new_id, f.width, f.height))
    faces.sort(key=lambda f: f.id)
    v_pairs = []
    h_pairs = []
    for r_ref, l_ref in table.v_pairs:
        a, b = r_ref.face, l_ref.face
        for k in (0, 2):  # copies with original orientation in x
            v_pairs.append((EdgeRef(ids[(a, k)], Side.R), EdgeRef(ids[(b, k)], Side.L)))
        for k in (1, 3):  # x-mirrored copies swap left/right
            v_pairs.append((EdgeRef(ids[(b, k)], Side.R), EdgeRef(ids[(a, k)], Side.L)))
    for t_ref, b_ref in table.h_pairs:
        a, b = t_ref.face, b_ref.face
        for k in (0, 1):
            h_pairs.append((EdgeRef(ids[(a, k)], Side.T), EdgeRef(ids[(b, k)], Side.B)))
        for k in (2, 3):  # y-mirrored copies swap top/bottom
            h_pairs.append((EdgeRef(ids[(b, k)], Side.T), EdgeRef(ids[(a, k)], Side.B)))
    glued_v = {(r.face, r.side) for r, _ in table.v_pairs} | {
        (l.face, l.side) for _, l in table.v_pairs
    }
    glued_h = {(t.face, t.side) for t, _ in table.h_pairs} | {
        (b.face, b.side) for _, b in table.h_pairs
    }
    # a wall glues each copy to its mirror image across that wall
    for f in face_list:
        if (f.id, Side.R) not in glued_v:
            v_pairs.append((EdgeRef(ids[(f.id, 0)], Side.R), EdgeRef(ids[(f.id, 1)], Side.L)))
            v_pairs.append((EdgeRef(ids[(f.id, 2)], Side.R), EdgeRef(ids[(f.id, 3)], Side.L)))
        if (f.id, Side.L) not in glued_v:
            v_pairs.append((EdgeRef(ids[(f.id, 1)], Side.R), EdgeRef(ids[(f.id, 0)], Side.L)))
            v_pairs.append((EdgeRef(ids[(f.id, 3)], Side.R), EdgeRef(ids[(f.id, 2)], Side.L)))
        if (f.id, Side.T) not in glued_h:
            h_pairs.append((EdgeRef(ids[(f.id, 0)], Side.T), EdgeRef(ids[(f.id, 2)], Side.B)))
            h_pairs.append((EdgeRef(ids[(f.id, 1)], Side.T), EdgeRef(ids[(f.id, 3)], Side.B)))
        if (f.id, Side.B) not in glued_h:
            h_pairs.append((EdgeRef(ids[(f.id, 2)], Side.T), EdgeRef(ids[(f.id, 0)], Side.B)))
            h_pairs.append((EdgeRef(ids[(f.id, 3)], Side.T), EdgeRef(ids[(f.id, 1)], Side.B)))
    return Surface(table.tower, faces, v_pairs, h_pairs)
