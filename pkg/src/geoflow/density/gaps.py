"""Maximum-gap statistics of geodesic segments and density experiments.

The maximum gap of a two-direction segment on a fixed vertical edge is the
largest spacing among its crossing heights, with the edge endpoints 0 and L
as virtual neighbours.  Profiles record the gap against growing time
horizons; the fit report turns a profile into desk-scale density verdicts
(linear for badly approximable polysquare slopes, polynomial for the
octagon slope).
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field

from ..exactnum import FieldElement, Q, decimal_text, expr_text, qify
from ..exactnum.cf import PreconditionError
from ..flow import FacePassage, SingularHit, Slope, face_passages, shift_point
from ..surfaces import Surface, VerticalCoord


def max_gap(surface: Surface, crossings, edge: int) -> FieldElement:
    """Largest spacing of the given crossings' heights on `edge`, exactly.

    The conventions add 0 and the edge length as outer neighbours; an empty
    set therefore yields the full edge length.  `crossings` may be Crossing
    records or bare heights; records are filtered to the edge first.
    """
    heights = []
    for c in crossings:
        if hasattr(c, "edge"):
            if c.edge == edge:
                heights.append(c.y)
        else:
            heights.append(c)
    hs = _HeightSet(surface.edge_length(edge))
    for y in heights:
        hs.insert(y)
    return hs.max_gap()


class _HeightSet:
    """Sorted distinct heights with exact order and float-shadow indexing.

    Floats narrow every search window; ordering and equality inside the
    window are decided exactly.  Shadows come from bounded-denominator
    trace data, so a 1e-9 window with a per-value certified error bound is
    ample; values whose error bound is too large take the slow exact path.
    """

    WINDOW = 1e-9

    def __init__(self, length: FieldElement):
        self.length = length
        self.items: list[FieldElement] = []
        self.shadows: list[float] = []
        self._len_f = float(length)

    def __len__(self):
        return len(self.items)

    def insert(self, y: FieldElement) -> bool:
        """Add a height; returns False when it was already present."""
        y_f, err = _shadow(y)
        lo = bisect_left(self.shadows, y_f - self.WINDOW)
        i = lo
        if err > 1e-10:  # fall back to fully exact placement
            i = lo
            while i < len(self.items) and self.items[i] < y:
                i += 1
            if i < len(self.items) and self.items[i] == y:
                return False
        else:
            while i < len(self.items) and self.shadows[i] < y_f + self.WINDOW:
                if self.items[i] == y:
                    return False
                if self.items[i] > y:
                    break
                i += 1
        self.items.insert(i, y)
        self.shadows.insert(i, y_f)
        return True

    def max_gap(self) -> FieldElement:
        if not self.items:
            return self.length
        # gap candidates by float, winner confirmed exactly
        pts_f = [0.0] + self.shadows + [self._len_f]
        gaps_f = [b - a for a, b in zip(pts_f, pts_f[1:])]
        best_f = max(gaps_f)
        candidates = [i for i, g in enumerate(gaps_f) if g > best_f - 4 * self.WINDOW]
        zero = self.length.tower.zero if hasattr(self.length, "tower") else None
        best = None
        for i in candidates:
            a = self.items[i - 1] if i > 0 else None
            b = self.items[i] if i < len(self.items) else None
            lo = a if a is not None else (zero if zero is not None else 0)
            hi = b if b is not None else self.length
            gap = hi - lo
            if best is None or gap > best:
                best = gap
        return best


def _shadow(y: FieldElement):
    f = 0.0
    a = 1e-300
    for c, m in zip(y.coords, y.tower.monomial_floats()):
        if c != 0:
            t = float(c) * m
            f += t
            a += abs(t)
    return f, a * 1e-13


@dataclass
class GapRow:
    horizon: Q  # arc-length horizon T
    mg: FieldElement
    crossings: int  # heights recorded on the edge (distinct)
    truncated: bool = False


@dataclass
class GapProfile:
    edge: int
    start: VerticalCoord
    slope_text: str
    rows: list = field(default_factory=list)

    def least_horizon_reaching(self, target) -> Q | None:
        """Smallest recorded horizon with mg <= target (exact comparison)."""
        target = qify(target)
        for row in self.rows:
            if row.mg <= target:
                return row.horizon
        return None

    @property
    def final_mg(self) -> FieldElement:
        return self.rows[-1].mg


class GapTracker:
    """Incremental two-direction segment with exact maximum-gap queries."""

    def __init__(self, surface: Surface, slope: Slope, start: VerticalCoord, edge: int):
        self.surface = surface
        self.slope = slope
        self.start = start
        self.edge = edge
        self.heights = _HeightSet(surface.edge_length(edge))
        if start.edge == edge:
            self.heights.insert(start.y)
        self._sq = float(slope.one_plus_sq) ** 0.5
        self._streams = []
        for reverse in (False, True):
            self._streams.append(
                {"p": start, "h": surface.tower.zero, "reverse": reverse,
                 "dead": False, "pending": None}
            )
        self.truncated = False

    def _advance(self, stream):
        if stream["dead"]:
            return None
        if stream["pending"] is not None:
            return stream["pending"]
        try:
            p, w, _ = shift_point(
                self.surface, stream["p"], self.slope, reverse=stream["reverse"]
            )
        except SingularHit:
            stream["dead"] = True
            self.truncated = True
            return None
        stream["p"] = p
        stream["h"] = stream["h"] + w
        stream["pending"] = (stream["h"], p)
        return stream["pending"]

    def extend_to(self, horizon) -> GapRow:
        """Consume crossings with |t| <= horizon and report the row."""
        horizon = qify(horizon)
        hor_f = float(horizon)
        for stream in self._streams:
            while True:
                nxt = self._advance(stream)
                if nxt is None:
                    break
                h, p = nxt
                h_f = float(h) * self._sq
                if h_f > hor_f + 1e-9 or (
                    h_f > hor_f - 1e-9
                    and not self.slope.time_leq(h, horizon)
                ):
                    break  # beyond the horizon; keep pending for later rows
                stream["pending"] = None
                if p.edge == self.edge:
                    self.heights.insert(p.y)
        return GapRow(
            horizon=horizon,
            mg=self.heights.max_gap(),
            crossings=len(self.heights),
            truncated=self.truncated,
        )


def gap_profile(surface, slope, start, edge, horizons) -> GapProfile:
    """Maximum gap of the two-direction segment for each horizon, exactly."""
    horizons = sorted(qify(t) for t in horizons)
    if any(t <= 0 for t in horizons):
        raise PreconditionError("horizons must be positive")
    tracker = GapTracker(surface, slope, start, edge)
    profile = GapProfile(edge=edge, start=start, slope_text=expr_text(slope.alpha))
    for t in horizons:
        profile.rows.append(tracker.extend_to(t))
    return profile


@dataclass
class FitTarget:
    n: int
    horizon: Q | None  # least horizon with mg <= 1/n, None if unreached
    ratio: float | None  # horizon / n


@dataclass
class FitReport:
    targets: list
    max_min_ratio: float | None
    exponent: float | None  # log-log slope of horizon vs n
    verdict: str
    final_mg_text: str

    @property
    def reached(self):
        return [t for t in self.targets if t.horizon is not None]


def superdensity_fit(
    profile: GapProfile, targets, linear_ratio_cap: float = 8.0,
    poly_exponent_cap: float | None = None,
) -> FitReport:
    """Desk-scale density verdict from a gap profile.

    For each target n, the least recorded horizon T(n) with mg <= 1/n; the
    verdict is "consistent with linear" when max/min of T(n)/n stays below
    the cap, a polynomial verdict compares the log-log slope against
    poly_exponent_cap, and unreached targets yield "not dense below ...".
    """
    rows = []
    for n in sorted(targets):
        hor = profile.least_horizon_reaching(Q(1, n))
        rows.append(FitTarget(n=n, horizon=hor, ratio=None if hor is None else float(hor) / n))
    reached = [t for t in rows if t.horizon is not None]
    unreached = [t for t in rows if t.horizon is None]
    ratio = None
    exponent = None
    if len(reached) >= 2:
        import math

        ratios = [t.ratio for t in reached]
        ratio = max(ratios) / min(ratios)
        xs = [math.log(t.n) for t in reached]
        ys = [math.log(float(t.horizon)) for t in reached]
        mx = sum(xs) / len(xs)
        my = sum(ys) / len(ys)
        sxx = sum((a - mx) ** 2 for a in xs)
        exponent = sum((a - mx) * (b - my) for a, b in zip(xs, ys)) / sxx if sxx else None
    final_mg = decimal_text(profile.final_mg, 6)
    final_mg_exact = expr_text(profile.final_mg)
    if unreached:
        verdict = f"not dense below {final_mg_exact}"
    elif poly_exponent_cap is not None:
        if exponent is not None and exponent <= poly_exponent_cap:
            verdict = "polynomial"
        else:
            verdict = "exponent above cap"
    elif ratio is not None and ratio <= linear_ratio_cap:
        verdict = "consistent with linear"
    else:
        verdict = "superlinear at desk scale"
    return FitReport(
        targets=rows,
        max_min_ratio=ratio,
        exponent=exponent,
        verdict=verdict,
        final_mg_text=final_mg,
    )


@dataclass(frozen=True)
class AlignedSquare:
    """Axis-aligned square inside a single face: corner (x0, y0), side d."""

    face: int  # face label
    x0: FieldElement
    y0: FieldElement
    side: FieldElement


@dataclass
class SquareVisit:
    t_h: FieldElement  # horizontal travel to first contact
    face: int
    x: FieldElement
    y: FieldElement

    def time_float(self, slope):
        return slope.time_float(self.t_h)


@dataclass
class SquareMiss:
    horizon_h: FieldElement
    crossings: int


def aligned_square_visit(
    surface: Surface,
    slope: Slope,
    square: AlignedSquare,
    start: VerticalCoord,
    max_h=None,
):
    """Least t >= 0 with the geodesic from `start` inside the square, exactly.

    The geodesic meets the square iff one of its per-face segments does;
    each candidate segment yields a linear equation for the first contact.
    Returns SquareVisit, or SquareMiss if max_h runs out first.
    """
    face_idx = surface.face_index(square.face)
    f = surface.faces[face_idx]
    d = square.side
    if not (d > 0):
        raise PreconditionError("square side must be positive")
    if not (d <= f.width and d <= f.height):
        raise PreconditionError("square side exceeds the face dimensions")
    if not (square.x0 >= 0 and square.y0 >= 0):
        raise PreconditionError("square corner outside the face")
    if not (square.x0 + d <= f.width and square.y0 + d <= f.height):
        raise PreconditionError("square leaves the face")
    alpha = slope.alpha
    x1 = square.x0 + d
    y1 = square.y0 + d
    count = 0
    for seg in face_passages(surface, start, slope):
        if max_h is not None and seg.h_at_in > max_h:
            return SquareMiss(horizon_h=seg.h_at_in, crossings=count)
        count += 1
        if seg.face != face_idx:
            continue
        # x-window where the segment is horizontally inside the square
        xa = seg.x_in if seg.x_in > square.x0 else square.x0
        xb = seg.x_out if seg.x_out < x1 else x1
        if xa > xb:
            continue
        # heights at the window ends (the segment rises with slope alpha)
        ya = seg.y_in + alpha * (xa - seg.x_in)
        yb = seg.y_in + alpha * (xb - seg.x_in)
        if ya > y1 or yb < square.y0:
            continue
        # first contact: either already inside at xa, or entry through y = y0
        if ya >= square.y0:
            hit_x, hit_y = xa, ya
        else:
            hit_x = seg.x_in + (square.y0 - seg.y_in) / alpha
            hit_y = square.y0
        return SquareVisit(
            t_h=seg.h_at_in + (hit_x - seg.x_in),
            face=square.face,
            x=hit_x,
            y=hit_y,
        )


@dataclass
class DecayPoint:
    n: int
    t_h: FieldElement  # signed |h| of the first crossing achieving mg <= 1/n
    t_float: float
    crossings: int


class _GapMultiset:
    """Current gaps of a growing height set, with certified max queries.

    A lazy float heap proposes the maximum; staleness is resolved against an
    exact multiset and threshold decisions fall back to exact comparisons
    whenever the float margin is thin.
    """

    def __init__(self, length):
        import heapq

        self.heapq = heapq
        self.length = length
        self.items = [length.tower.zero, length]  # sentinels at both ends
        self.shadows = [0.0, float(length)]
        self.counts: dict = {}
        self.heap = []
        self._add_gap(length)

    def _add_gap(self, g):
        self.counts[g] = self.counts.get(g, 0) + 1
        self.heapq.heappush(self.heap, (-float(g), g))

    def _drop_gap(self, g):
        self.counts[g] -= 1
        if not self.counts[g]:
            del self.counts[g]

    def insert(self, y) -> bool:
        y_f, err = _shadow(y)
        i = bisect_left(self.shadows, y_f - 1e-9)
        while i < len(self.items) and self.items[i] < y:
            if not (self.shadows[i] < y_f + 1e-9) and err < 1e-10:
                break
            i += 1
        if i < len(self.items) and self.items[i] == y:
            return False
        a, b = self.items[i - 1], self.items[i]
        self._drop_gap(b - a)
        self._add_gap(y - a)
        self._add_gap(b - y)
        self.items.insert(i, y)
        self.shadows.insert(i, y_f)
        return True

    def max_leq(self, target) -> bool:
        """Is the maximum gap <= target (a rational)? Exact decision."""
        t_f = float(target)
        while self.heap:
            neg_f, g = self.heap[0]
            if self.counts.get(g, 0) == 0:
                self.heapq.heappop(self.heap)
                continue
            top_f = -neg_f
            if top_f > t_f * (1 + 1e-9) + 1e-12:
                return False
            if top_f < t_f * (1 - 1e-9) - 1e-12:
                return True
            return g <= target  # thin margin: decide exactly on the true max
        return True


def gap_decay_times(surface, slope, start, edge, targets, max_crossings=2_000_000):
    """First |t| at which the max gap on `edge` drops to 1/n, per target n.

    Crossings stream outward in both time directions in order of |t|; the
    gap multiset updates incrementally, so each threshold time is resolved
    to the exact crossing where it is first met.  Targets that are not
    reached within max_crossings are reported with t_h None.
    """
    targets = sorted(targets)
    gaps = _GapMultiset(surface.edge_length(edge))
    if start.edge == edge:
        gaps.insert(start.y)
    streams = []
    for reverse in (False, True):
        streams.append(
            {"p": start, "h": surface.tower.zero, "h_f": 0.0, "reverse": reverse,
             "dead": False}
        )

    def advance(stream):
        if stream["dead"]:
            return None
        try:
            p, w, _ = shift_point(surface, stream["p"], slope, reverse=stream["reverse"])
        except SingularHit:
            stream["dead"] = True
            return None
        stream["p"] = p
        stream["h"] = stream["h"] + w
        stream["h_f"] += float(w)
        return stream

    out = []
    pending = list(targets)
    sq = float(slope.one_plus_sq) ** 0.5
    count = 0
    for s in streams:
        advance(s)  # each stream now sits on its first crossing
    while pending and count < max_crossings:
        # pick the stream with the smaller |h| (floats suffice: processing
        # order of near-tied |t| crossings cannot change when a gap target
        # is first met by more than the float slack)
        live = [s for s in streams if not s["dead"]]
        if not live:
            break
        stream = min(live, key=lambda s: s["h_f"])
        p = stream["p"]
        h = stream["h"]
        h_f = stream["h_f"]
        count += 1
        if p.edge == edge and gaps.insert(p.y):
            while pending and gaps.max_leq(Q(1, pending[0])):
                n = pending.pop(0)
                out.append(DecayPoint(n=n, t_h=h, t_float=h_f * sq, crossings=count))
        advance(stream)
    for n in pending:
        out.append(DecayPoint(n=n, t_h=None, t_float=float("nan"), crossings=count))
    return out
