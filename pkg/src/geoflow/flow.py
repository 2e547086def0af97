"""Exact geodesic transport along a fixed slope.

A "shift" moves a point (or an open subinterval) sitting on a vertical edge
rightward along slope alpha to its next intersection with the union of
vertical edges.  Faces stack into constant-width columns, so one shift is:
rise by alpha*width inside the column, reduce through the stacked faces,
land on the next column boundary.  A transported interval splits exactly
when its developed image straddles a stack level, i.e. contains an endpoint
of a destination vertical edge (those endpoints are the only vertices a
shift can meet; a mid-column vertex cannot exist because glued sides have
exactly equal lengths).

Times are kept as horizontal travel h; the arc-length time is
h * sqrt(1 + alpha^2), so time comparisons square both sides and stay in
the field.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactnum import FieldElement
from .exactnum.cf import PreconditionError
from .surfaces import Surface, VerticalCoord


class SingularHit(RuntimeError):
    """The geodesic meets a polygon vertex; carries the exact location."""

    def __init__(self, message, edge=None, y=None, vertex=None):
        super().__init__(message)
        self.edge = edge
        self.y = y
        self.vertex = vertex


@dataclass(frozen=True)
class Slope:
    """A direction 0 < alpha < 1 in the same tower as the surface data."""

    alpha: FieldElement

    def __post_init__(self):
        if not (self.alpha > 0 and self.alpha < 1):
            raise PreconditionError("slope must satisfy 0 < alpha < 1")

    @property
    def one_plus_sq(self) -> FieldElement:
        return 1 + self.alpha * self.alpha

    def time_leq(self, h: FieldElement, bound) -> bool:
        """|h| * sqrt(1+alpha^2) <= bound, decided exactly by squaring."""
        return h * h * self.one_plus_sq <= bound * bound

    def time_float(self, h) -> float:
        return float(h) * (1 + float(self.alpha) ** 2) ** 0.5


@dataclass(frozen=True)
class EdgeInterval:
    """Open subinterval (lo, hi) of vertical edge `edge`."""

    edge: int
    lo: FieldElement
    hi: FieldElement

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise PreconditionError("empty edge interval")

    @property
    def length(self) -> FieldElement:
        return self.hi - self.lo

    def contains(self, y) -> bool:
        return self.lo < y and y < self.hi


@dataclass(frozen=True)
class NoSplit:
    image: EdgeInterval
    width: FieldElement  # horizontal travel of the shift

    @property
    def split(self) -> bool:
        return False


@dataclass(frozen=True)
class Split:
    pieces: tuple  # EdgeIntervals in source order, bottom to top
    vertices: tuple  # VertexClass hit between consecutive pieces
    width: FieldElement

    @property
    def split(self) -> bool:
        return True

    @property
    def top(self) -> EdgeInterval:
        return self.pieces[-1]

    @property
    def bottom(self) -> EdgeInterval:
        return self.pieces[0]


@dataclass(frozen=True)
class Crossing:
    index: int
    t_h: FieldElement  # signed cumulative horizontal travel; t = t_h*sqrt(1+a^2)
    edge: int
    y: FieldElement
    n1: int
    n2: int
    n3: int
    n4: int


@dataclass
class TraceResult:
    crossings: list
    truncated: bool = False
    singular: SingularHit | None = None

    def __iter__(self):
        return iter(self.crossings)

    def __len__(self):
        return len(self.crossings)


class CounterSchema:
    """Maps face widths/heights to the four travel counters.

    n1/n2 count crossings of the narrow/wide width class; n4/n3 count
    downward reductions by the short/tall height class.  Surfaces with more
    than two classes per axis cannot be bookkept this way.
    """

    def __init__(self, surface: Surface):
        self.widths = surface.width_classes()
        self.heights = surface.height_classes()
        if len(self.widths) > 2 or len(self.heights) > 2:
            raise PreconditionError(
                "travel counters need at most two width and height classes"
            )

    def width_slot(self, w) -> int:  # 0 -> n1, 1 -> n2
        return 0 if w == self.widths[0] else 1

    def height_slot(self, h) -> int:  # 0 -> n4, 1 -> n3
        return 0 if h == self.heights[0] else 1


def _column_levels_up(surface, face):
    """Generator of (face, level_top) walking up the column cyclically."""
    stack, cum = surface.column(face)
    n = len(stack)
    total = cum[n]
    offset = surface.tower.zero
    while True:
        for k in range(n):
            yield stack[k], cum[k] + offset, cum[k + 1] + offset
        offset = offset + total


def _column_levels_down(surface, face):
    """Spans (face, bottom, top) walking down; `face`'s own bottom is level 0."""
    bottom = surface.tower.zero
    top = surface.faces[face].height
    cur = face
    while True:
        yield cur, bottom, top
        cur = surface.below[cur]
        top = bottom
        bottom = bottom - surface.faces[cur].height


def shift_point(surface: Surface, p: VerticalCoord, slope: Slope, reverse: bool = False):
    """One shift of a point: the next crossing with the union of vertical edges.

    Returns (VerticalCoord, width, wrapped_faces); `width` is the horizontal
    travel (the crossed face's width) and wrapped_faces lists the faces whose
    horizontal edge was crossed on the way (signed bookkeeping is the
    caller's job).  Raises SingularHit on an exact vertex collision.
    """
    L = surface.edge_length(p.edge)
    if not (p.y > 0 and p.y < L):
        raise SingularHit(
            f"point at edge {surface.edge_label(p.edge)} height {p.y!r} is a vertex",
            edge=p.edge,
            y=p.y,
        )
    if not reverse:
        f0 = p.edge
        w = surface.faces[f0].width
        y2 = p.y + slope.alpha * w
        wrapped = []
        for face, lo, hi in _column_levels_up(surface, f0):
            if y2 < hi:
                return VerticalCoord(surface.right_of[face], y2 - lo), w, wrapped
            if y2 == hi:
                raise SingularHit(
                    f"lands on vertex at the top of face {surface.faces[face].id}'s column level",
                    edge=p.edge,
                    y=p.y,
                    vertex=surface.vertex_at_column_level(face),
                )
            wrapped.append(face)
    else:
        g = surface.left_of[p.edge]
        w = surface.faces[g].width
        y2 = p.y - slope.alpha * w
        wrapped = []
        for face, lo, hi in _column_levels_down(surface, g):
            if y2 > lo:
                return VerticalCoord(face, y2 - lo), w, wrapped
            if y2 == lo:
                raise SingularHit(
                    f"lands on vertex at the bottom of face {surface.faces[face].id}",
                    edge=p.edge,
                    y=p.y,
                    vertex=surface.vertex_at(face, "bl"),
                )
            wrapped.append(surface.below[face])


def _develop_pieces(surface, levels, a, b, cut_corner="tr"):
    """Cut the developed open interval (a, b) at stack levels.

    levels yields (face, lo, hi) spans; returns ([(face, local_lo, local_hi)],
    [vertex classes at the internal cuts]).  cut_corner names which corner
    of the lower face carries the cut vertex ('tr' when images land on
    right edges, 'tl' on left edges).
    """
    pieces = []
    cuts = []
    for face, lo, hi in levels:
        if a >= hi:
            continue
        start = a if a > lo else lo
        if b <= hi:
            pieces.append((face, start - lo, b - lo))
            break
        pieces.append((face, start - lo, hi - lo))
        cuts.append(surface.vertex_at(face, cut_corner))
    return pieces, cuts


def shift_interval(surface: Surface, iv: EdgeInterval, slope: Slope, reverse: bool = False):
    """One shift of an open interval; splits where the image meets an edge endpoint."""
    if not reverse:
        f0 = iv.edge
        w = surface.faces[f0].width
        a = iv.lo + slope.alpha * w
        b = iv.hi + slope.alpha * w
        levels = _column_levels_up(surface, f0)
        pieces, cuts = _develop_pieces(surface, levels, a, b)
        out = tuple(
            EdgeInterval(surface.right_of[face], lo, hi) for face, lo, hi in pieces
        )
    else:
        g = surface.left_of[iv.edge]
        w = surface.faces[g].width
        a = iv.lo - slope.alpha * w
        b = iv.hi - slope.alpha * w
        # walk down to the span containing a, then ascend
        spans = []
        for face, lo, hi in _column_levels_down(surface, g):
            spans.append((face, lo, hi))
            if lo < a or lo == a:
                break
        spans.reverse()
        pieces, cuts = _develop_pieces(surface, iter(spans), a, b, cut_corner="tl")
        out = tuple(EdgeInterval(face, lo, hi) for face, lo, hi in pieces)
    if len(out) == 1:
        return NoSplit(image=out[0], width=w)
    return Split(pieces=out, vertices=tuple(cuts), width=w)


def trace(
    surface: Surface,
    start: VerticalCoord,
    slope: Slope,
    reverse: bool = False,
    max_crossings: int | None = None,
    max_time=None,
) -> TraceResult:
    """Crossing list of the geodesic from `start` (exclusive) onward.

    Stops at max_crossings, or when the *next* crossing would exceed
    max_time (arc length), or at a singular hit (flagged, not raised).
    """
    if max_crossings is None and max_time is None:
        raise PreconditionError("need a stop condition")
    schema = CounterSchema(surface)
    zero = surface.tower.zero
    h = zero
    counters = [0, 0, 0, 0]  # n1, n2, n3, n4
    out = []
    p = start
    result = TraceResult(crossings=out)
    while True:
        if max_crossings is not None and len(out) >= max_crossings:
            return result
        try:
            p, w, wrapped = shift_point(surface, p, slope, reverse=reverse)
        except SingularHit as hit:
            result.truncated = True
            result.singular = hit
            return result
        h = h - w if reverse else h + w
        if max_time is not None and not slope.time_leq(h, max_time):
            return result
        step = -1 if reverse else 1
        counters[schema.width_slot(w)] += step
        for face in wrapped:
            hgt = surface.faces[face].height
            slot = schema.height_slot(hgt)
            counters[3 if slot == 0 else 2] += step
        out.append(
            Crossing(
                index=len(out) + 1,
                t_h=h,
                edge=p.edge,
                y=p.y,
                n1=counters[0],
                n2=counters[1],
                n3=counters[2],
                n4=counters[3],
            )
        )


def crossing_identity_residual(surface, slope, start, crossing) -> FieldElement:
    """y* - y - (n1*a + n2*sqrt2*a - n3*sqrt2 - n4) with the class widths/heights.

    Zero for every crossing of a trace (the travel bookkeeping identity);
    general two-class surfaces use their own width/height class values.
    """
    schema = CounterSchema(surface)
    widths = schema.widths + [surface.tower.zero] * (2 - len(schema.widths))
    heights = schema.heights + [surface.tower.zero] * (2 - len(schema.heights))
    up = crossing.n1 * widths[0] * slope.alpha + crossing.n2 * widths[1] * slope.alpha
    down = (
        crossing.n3 * (heights[1] if len(schema.heights) > 1 else surface.tower.zero)
        + crossing.n4 * heights[0]
    )
    return crossing.y - start.y - up + down


@dataclass
class ReturnMapPiece:
    src: EdgeInterval
    dst: EdgeInterval


def first_return_map(surface: Surface, slope: Slope) -> dict[int, list[ReturnMapPiece]]:
    """Per edge: maximal open subintervals with constant one-shift itinerary.

    Break points are exactly the pullbacks of destination-edge endpoints;
    each piece maps isometrically onto its image, and the images tile the
    edges (checked by the tests, not here).
    """
    out = {}
    for edge in range(surface.edge_count):
        L = surface.edge_length(edge)
        w = surface.faces[edge].width
        a = slope.alpha * w
        b = L + slope.alpha * w
        pieces, _cuts = _develop_pieces(surface, _column_levels_up(surface, edge), a, b)
        entries = []
        src_lo = surface.tower.zero
        for face, lo, hi in pieces:
            length = hi - lo
            src_hi = src_lo + length
            entries.append(
                ReturnMapPiece(
                    src=EdgeInterval(edge, src_lo, src_hi),
                    dst=EdgeInterval(surface.right_of[face], lo, hi),
                )
            )
            src_lo = src_hi
        assert src_lo == L
        out[edge] = entries
    return out


class ShiftEngine:
    """Accelerated repeated shifting via the cached one-shift partition.

    Per source edge the no-split pieces and their destinations are fixed,
    so a shift of an interval strictly inside one piece is a table lookup
    plus one exact addition.  Floats only preselect the piece; membership
    is confirmed exactly, and anything near a boundary (including every
    split) falls back to `shift_interval`, so results are identical to the
    generic path by construction.
    """

    def __init__(self, surface: Surface, slope: Slope, reverse: bool = False):
        self.surface = surface
        self.slope = slope
        self.reverse = reverse
        self._tables: dict[int, tuple] = {}

    def _table(self, edge: int):
        tab = self._tables.get(edge)
        if tab is None:
            surface = self.surface
            L = surface.edge_length(edge)
            if not self.reverse:
                w = surface.faces[edge].width
                a = self.slope.alpha * w
                levels = _column_levels_up(surface, edge)
                pieces, _ = _develop_pieces(surface, levels, a, L + a)
                dst = [surface.right_of[face] for face, _lo, _hi in pieces]
            else:
                g = surface.left_of[edge]
                w = surface.faces[g].width
                a = -(self.slope.alpha * w)
                spans = []
                for face, lo, hi in _column_levels_down(surface, g):
                    spans.append((face, lo, hi))
                    if lo < a or lo == a:
                        break
                spans.reverse()
                pieces, _ = _develop_pieces(surface, iter(spans), a, L + a, cut_corner="tl")
                dst = [face for face, _lo, _hi in pieces]
            bounds = [self.surface.tower.zero]
            offsets = []
            for (face, lo, hi) in pieces:
                offsets.append(lo - bounds[-1])
                bounds.append(bounds[-1] + (hi - lo))
            tab = (
                bounds,  # exact source break points, 0 .. L
                [float(b) for b in bounds],
                dst,
                offsets,  # image_lo - source_lo per piece
                w,
            )
            self._tables[edge] = tab
        return tab

    def shift(self, iv: EdgeInterval):
        """Same contract as shift_interval(surface, iv, slope, reverse)."""
        from bisect import bisect_right

        bounds, bounds_f, dst, offsets, w = self._table(iv.edge)
        i = bisect_right(bounds_f, float(iv.lo)) - 1
        if 0 <= i < len(offsets):
            # exact confirmation that (lo, hi) sits inside piece i
            if bounds[i] <= iv.lo and iv.hi <= bounds[i + 1]:
                off = offsets[i]
                return NoSplit(
                    image=EdgeInterval(dst[i], iv.lo + off, iv.hi + off), width=w
                )
        return shift_interval(self.surface, iv, self.slope, reverse=self.reverse)


@dataclass(frozen=True)
class FacePassage:
    """One straight segment of the geodesic inside a single face."""

    face: int
    x_in: FieldElement
    y_in: FieldElement
    x_out: FieldElement
    y_out: FieldElement
    h_at_in: FieldElement  # cumulative horizontal travel at segment entry


def face_passages(surface: Surface, start: VerticalCoord, slope: Slope):
    """Forward generator of per-face segments; raises SingularHit on a vertex."""
    zero = surface.tower.zero
    h = zero
    p = start
    alpha = slope.alpha
    while True:
        L = surface.edge_length(p.edge)
        if not (p.y > 0 and p.y < L):
            raise SingularHit("start/segment endpoint is a vertex", edge=p.edge, y=p.y)
        f0 = p.edge
        w = surface.faces[f0].width
        y2 = p.y + alpha * w
        x_prev = zero
        y_prev = p.y
        for face, lo, hi in _column_levels_up(surface, f0):
            if y2 < hi:
                yield FacePassage(face, x_prev, y_prev, w, y2 - lo, h + x_prev)
                break
            if y2 == hi:
                raise SingularHit(
                    "vertex hit", edge=p.edge, y=p.y,
                    vertex=surface.vertex_at_column_level(face),
                )
            x_cut = (hi - p.y) / alpha
            yield FacePassage(face, x_prev, y_prev, x_cut, surface.faces[face].height, h + x_prev)
            x_prev = x_cut
            y_prev = zero
        h = h + w
        p = VerticalCoord(surface.right_of[face], y2 - lo)
