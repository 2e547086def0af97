"""Two-direction visiting-time search for a vertical interval.

Given an open interval QR on a vertical edge (top endpoint R) and the
geodesic through R, find t* with L(t*) inside QR:

* the *oracle* walks crossings outward in both time directions and returns
  the visit of smallest |t| -- brute force, exact, minimal;
* the *cascade* runs the constructive search: shift the interval until its
  image either overlaps an earlier image on the same edge (a "run return")
  or splits at a vertex; keep the top piece after each split; when a kept
  piece lands on an edge already holding an earlier kept piece, the two
  R-images exhibit the visit ("edge repetition").  If a kept piece ever
  shrinks below the ledger threshold, restart from the previous piece under
  the reverse flow (the same machinery mirrored).

Every quantity is an exact field element; the certificate logs each split
so the whole search can be replayed and checked independently.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..exactnum import FieldElement, expr_text
from ..exactnum.cf import PreconditionError
from ..flow import (
    EdgeInterval,
    ShiftEngine,
    SingularHit,
    Slope,
    shift_interval,
    shift_point,
)
from ..surfaces import Surface, VerticalCoord
from .constants import ConstantsLedger, HypothesisViolated


class OracleCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SplitStep:
    direction: str  # "F" or "R"
    k: int  # the k-th shift of the previous kept interval split
    edge: int
    length: FieldElement  # kept top piece length
    t_h: FieldElement  # signed horizontal time of the kept R-image
    collapsed: bool = False  # piece abandoned; phase switched after this step


@dataclass(frozen=True)
class FinalEvent:
    reason: str
    j_prev: int | None = None  # run return: shift counts within the final run
    j_cur: int | None = None
    i_prev: int | None = None  # edge repetition: 1-based split-round indices
    i_cur: int | None = None


@dataclass
class VisitCertificate:
    interval: EdgeInterval
    t_star_h: FieldElement  # signed; arc time is t_star_h * sqrt(1+alpha^2)
    reason: str
    steps: tuple
    final: FinalEvent

    def time_float(self, slope: Slope) -> float:
        return slope.time_float(self.t_star_h)


@dataclass(frozen=True)
class OracleVisit:
    t_h: FieldElement  # signed
    at: VerticalCoord
    crossings_scanned: int


def _crossing_stream(surface, start, slope, reverse):
    p = start
    h = surface.tower.zero
    while True:
        p, w, _ = shift_point(surface, p, slope, reverse=reverse)
        h = h - w if reverse else h + w
        yield h, p


def find_visit_oracle(
    surface: Surface,
    qr: EdgeInterval,
    slope: Slope,
    t_cap=None,
    max_crossings: int = 1_000_000,
) -> OracleVisit:
    """Smallest-|t| crossing of the geodesic from R into the open interval QR."""
    _check_interval(surface, qr)
    start = VerticalCoord(qr.edge, qr.hi)
    fwd = _crossing_stream(surface, start, slope, reverse=False)
    rev = _crossing_stream(surface, start, slope, reverse=True)
    hf, pf = next(fwd)
    hr, pr = next(rev)
    for n in range(1, max_crossings + 1):
        if hf <= -hr:  # |forward| <= |reverse|: take the forward candidate
            h, p = hf, pf
            if t_cap is not None and not slope.time_leq(h, t_cap):
                raise OracleCapExceeded(f"no visit within |t| <= {t_cap}")
            hf, pf = next(fwd)
        else:
            h, p = hr, pr
            if t_cap is not None and not slope.time_leq(h, t_cap):
                raise OracleCapExceeded(f"no visit within |t| <= {t_cap}")
            hr, pr = next(rev)
        if p.edge == qr.edge and qr.contains(p.y):
            return OracleVisit(t_h=h, at=p, crossings_scanned=n)
    raise OracleCapExceeded(f"no visit within {max_crossings} crossings")


def _check_interval(surface, qr):
    L = surface.edge_length(qr.edge)
    if not (qr.lo >= 0 and qr.hi < L):
        raise PreconditionError("interval must sit inside its edge (R interior)")


class _RunReturn(Exception):
    def __init__(self, t_h, j_prev, j_cur):
        self.t_h = t_h
        self.j_prev = j_prev
        self.j_cur = j_cur


class _RunWalker:
    """Scalar no-split stepper for an interval of fixed length x.

    Tracks only the interval bottom; a step is a bisect into the one-shift
    partition accepted through certified float margins, with exact
    comparisons near boundaries and the generic shift as the final word.
    Exact signed travel times are reconstructed from per-width counters on
    demand.  Results never depend on floats alone.
    """

    def __init__(self, surface, slope, reverse, engine, x):
        self.surface = surface
        self.slope = slope
        self.reverse = reverse
        self.engine = engine
        self.x = x
        self.x_f = float(x)
        if self.x_f < 1e-12:
            raise HypothesisViolated(
                "interval too short for the float guard bands (beyond desk scale)"
            )
        self.mono_f = surface.tower.monomial_floats()
        self.width_vals = []
        self.counts = []
        self.sign = -1 if reverse else 1
        self.tabs = {}
        self.edge = None
        self.lo = None
        self.lo_f = 0.0
        self.j = 0

    def reset(self, edge, lo):
        self.edge = edge
        self.lo = lo
        self.lo_f, self.m_lo = self.shadow(lo)
        self.j = 0
        self.counts = [0] * len(self.width_vals)

    def shadow(self, elem):
        """(float value, certified absolute error bound) of a field element."""
        f = 0.0
        a = 1e-300
        for c, m in zip(elem.coords, self.mono_f):
            if c != 0:
                t = float(c) * m
                f += t
                a += abs(t)
        return f, a * 1e-13

    def _width_slot(self, w):
        for i, v in enumerate(self.width_vals):
            if v == w:
                return i
        self.width_vals.append(w)
        self.counts.append(0)
        return len(self.width_vals) - 1

    def tau(self):
        acc = self.surface.tower.zero
        for n, wv in zip(self.counts, self.width_vals):
            if n:
                acc = acc + n * wv
        return self.sign * acc

    def _tab(self, edge):
        t = self.tabs.get(edge)
        if t is None:
            bounds, bounds_f, dst, offsets, w = self.engine._table(edge)
            x = self.x
            ub = [b - x for b in bounds[1:]]
            ub_f = [float(u) for u in ub]
            margin = 1e-300
            for b in bounds:
                margin = max(margin, self.shadow(b)[1])
            margin += abs(self.x_f) * 1e-13
            t = (
                bounds,
                bounds_f,
                dst,
                offsets,
                self._width_slot(w),
                ub,
                ub_f,
                margin,
                self.surface.edge_length(edge) - x,  # R-vertex sentinel
            )
            self.tabs[edge] = t
        return t

    def step(self):
        """Advance one shift; returns the Split outcome if the shift splits."""
        from bisect import bisect_right

        bounds, bounds_f, dst, offsets, wslot, ub, ub_f, tab_margin, _ = self._tab(
            self.edge
        )
        lo = self.lo
        lo_f = self.lo_f
        m = self.m_lo + tab_margin
        i = bisect_right(bounds_f, lo_f) - 1
        if not (0 <= i < len(offsets) and lo_f - bounds_f[i] > m and ub_f[i] - lo_f > m):
            ex = None
            for cand in (i, i - 1, i + 1):
                if 0 <= cand < len(offsets) and bounds[cand] <= lo and lo <= ub[cand]:
                    ex = cand
                    break
            if ex is None:
                out = self.engine.shift(EdgeInterval(self.edge, lo, lo + self.x))
                self.j += 1
                if out.split:
                    self.counts[wslot] += 1  # same column width as the no-split case
                    return out
                img = out.image  # grazing no-split on a boundary
                self.counts[self._width_slot(out.width)] += 1
                self.edge, self.lo = img.edge, img.lo
                self.lo_f, self.m_lo = self.shadow(self.lo)
                self._vertex_check()
                return None
            i = ex
        self.j += 1
        self.counts[wslot] += 1
        self.lo = lo + offsets[i]
        self.edge = dst[i]
        self.lo_f, self.m_lo = self.shadow(self.lo)
        self._vertex_check()
        return None

    def _vertex_check(self):
        if self.lo == self._tab(self.edge)[8]:
            raise SingularHit(
                "geodesic through the interval top endpoint hits a vertex",
                edge=self.edge,
                y=self.lo + self.x,
            )


def _run_until_split(surface, iv, slope, reverse, ledger, engine=None):
    """Shift `iv` repeatedly until a split; raise _RunReturn on an image overlap.

    Returns (split_outcome, k, tau) with tau the signed horizontal travel of
    the k shifts.  Overlap of two same-length images puts one bottom within
    the length of the other, so candidates live in neighbouring cells of a
    bucket grid over float shadows and are confirmed exactly.  Both overlap
    orders are checked, so t* may take either sign.
    """
    if engine is None:
        engine = ShiftEngine(surface, slope, reverse=reverse)
    walker = _RunWalker(surface, slope, reverse, engine, iv.length)
    walker.reset(iv.edge, iv.lo)
    x = iv.length
    bw = walker.x_f if walker.x_f > 1e-9 else 1e-9
    buckets = {(iv.edge, int(walker.lo_f / bw)): [(iv.lo, walker.lo_f, (), 0)]}
    limit = ledger.run_window_limit(x)
    while True:
        out = walker.step()
        if out is not None:
            return out, walker.j, walker.tau()
        lo, lo_f, j = walker.lo, walker.lo_f, walker.j
        b = int(lo_f / bw)
        for nb in range(b - 2, b + 3):
            for plo, plo_f, pcounts, pj in buckets.get((walker.edge, nb), ()):
                if abs(plo_f - lo_f) > bw * 2.000001:
                    continue
                if lo == plo:
                    continue  # exact recurrence: endpoints only touch
                if lo < plo:
                    if plo - lo < x:  # new top endpoint inside the earlier image
                        tau = walker.tau()
                        saved = walker.counts[:]
                        walker.counts = list(pcounts) + [0] * (
                            len(walker.counts) - len(pcounts)
                        )
                        ptau = walker.tau()
                        walker.counts = saved
                        raise _RunReturn(tau - ptau, pj, j)
                else:
                    if lo - plo < x:  # earlier top endpoint inside the new image
                        tau = walker.tau()
                        saved = walker.counts[:]
                        walker.counts = list(pcounts) + [0] * (
                            len(walker.counts) - len(pcounts)
                        )
                        ptau = walker.tau()
                        walker.counts = saved
                        raise _RunReturn(ptau - tau, j, pj)
        if j >= limit:
            raise HypothesisViolated(
                f"run of {j} shifts exceeded its window for length {x!r}"
            )
        buckets.setdefault((walker.edge, b), []).append(
            (lo, lo_f, tuple(walker.counts), j)
        )


@dataclass
class _PhaseResult:
    kind: str  # "visit" | "collapse"
    t_star: FieldElement | None = None
    reason: str | None = None
    final: FinalEvent | None = None
    restart: tuple | None = None  # (interval, t_of_its_R) on collapse
    genuine: bool = False


def _phase(
    surface,
    start_iv,
    slope,
    reverse,
    ledger,
    t_base,
    steps,
    check_floors=False,
    x_ref=None,
    force_collapse_at=None,
    engine=None,
) -> _PhaseResult:
    """One cascade phase; forward phases may end in a collapse.

    The run window [coeff/x]+1 is enforced inside each run, which also
    bounds the index k of the splitting shift.
    """
    direction = "R" if reverse else "F"
    return_reason = "claim3-return" if reverse else "claim1-return"
    repeat_reason = "claim4-edge-repetition" if reverse else "claim2-edge-repetition"
    if engine is None:
        engine = ShiftEngine(surface, slope, reverse=reverse)
    cur = start_iv
    t_R = t_base
    x_prev = cur.length
    visited = {}
    round_no = 0
    while True:
        round_no += 1
        if round_no > ledger.split_rounds_budget:
            raise HypothesisViolated(
                f"{direction}-phase passed {ledger.split_rounds_budget} split rounds "
                "without an edge repetition"
            )
        try:
            out, k, tau = _run_until_split(surface, cur, slope, reverse, ledger, engine)
        except _RunReturn as ret:
            return _PhaseResult(
                kind="visit",
                t_star=ret.t_h,
                reason=return_reason,
                final=FinalEvent(return_reason, j_prev=ret.j_prev, j_cur=ret.j_cur),
            )
        top = out.top
        if not (top.lo == 0):
            raise SingularHit(
                "interval top endpoint maps onto a vertex at a split",
                edge=top.edge,
                y=top.hi,
            )
        prev_state = (cur, t_R)
        t_R = t_R + tau
        x_new = top.length
        if check_floors and not ledger.reverse_floor_ok(round_no, x_new, x_ref):
            raise HypothesisViolated(
                f"reverse-phase piece {round_no} below its proven floor"
            )
        if not reverse:
            genuine = ledger.is_collapse(x_new, x_prev)
            if genuine or force_collapse_at == round_no:
                steps.append(
                    SplitStep(direction, k, top.edge, x_new, t_R, collapsed=True)
                )
                return _PhaseResult(kind="collapse", restart=prev_state, genuine=genuine)
        steps.append(SplitStep(direction, k, top.edge, x_new, t_R))
        prior = visited.get(top.edge)
        if prior is not None:
            i_prev, x_old, t_old = prior
            assert x_new < x_old, "kept lengths must strictly decrease"
            return _PhaseResult(
                kind="visit",
                t_star=t_R - t_old,
                reason=repeat_reason,
                final=FinalEvent(repeat_reason, i_prev=i_prev, i_cur=round_no),
            )
        visited[top.edge] = (round_no, x_new, t_R)
        cur = top
        x_prev = x_new


def cascade_search(
    surface: Surface,
    qr: EdgeInterval,
    slope: Slope,
    ledger: ConstantsLedger,
    force_reverse_after: int | None = None,
) -> VisitCertificate:
    """Constructive visiting-time search; returns a replayable certificate.

    force_reverse_after=i pretends the i-th forward split collapsed (a test
    hook for the reverse machinery; length-floor assertions stay off then,
    since they are only proven for genuine collapses).
    """
    _check_interval(surface, qr)
    if not (qr.lo > 0):
        raise PreconditionError("bottom endpoint must be interior to the edge")
    steps: list[SplitStep] = []
    res = _phase(
        surface,
        qr,
        slope,
        False,
        ledger,
        surface.tower.zero,
        steps,
        force_collapse_at=force_reverse_after,
        engine=ShiftEngine(surface, slope, reverse=False),
    )
    if res.kind == "collapse":
        base_iv, base_t = res.restart
        check_floors = ledger.mode == "octagon" or res.genuine
        res = _phase(
            surface,
            base_iv,
            slope,
            True,
            ledger,
            base_t,
            steps,
            check_floors=check_floors,
            x_ref=base_iv.length,
            engine=ShiftEngine(surface, slope, reverse=True),
        )
        assert res.kind == "visit"
    t_star = res.t_star
    if t_star.is_zero():
        raise HypothesisViolated("visiting time must be nonzero")
    if not ledger.visit_bound_ok(slope, t_star, qr.length):
        raise HypothesisViolated(
            f"visiting time {expr_text(t_star)} violates the ledger bound"
        )
    return VisitCertificate(
        interval=qr,
        t_star_h=t_star,
        reason=res.reason,
        steps=tuple(steps),
        final=res.final,
    )


class _PointWalker:
    """Point transport on the ShiftEngine tables with a shift_point fallback.

    The fast path needs the point strictly inside a partition piece by the
    certified margin; boundary brushes drop to the generic exact step.
    """

    def __init__(self, surface, slope, reverse, engine=None):
        self.surface = surface
        self.slope = slope
        self.reverse = reverse
        self.engine = engine or ShiftEngine(surface, slope, reverse=reverse)
        self.mono_f = surface.tower.monomial_floats()
        self.tabs = {}

    def _tab(self, edge):
        t = self.tabs.get(edge)
        if t is None:
            bounds, bounds_f, dst, offsets, w = self.engine._table(edge)
            margin = 1e-300
            for b in bounds:
                f = 0.0
                a = 1e-300
                for c, m in zip(b.coords, self.mono_f):
                    if c != 0:
                        v = float(c) * m
                        f += v
                        a += abs(v)
                margin = max(margin, a * 1e-13)
            t = (bounds_f, dst, offsets, w, margin)
            self.tabs[edge] = t
        return t

    def step(self, edge, y):
        """One shift of the point (edge, y); returns (edge', y', width)."""
        from bisect import bisect_right

        bounds_f, dst, offsets, w, tab_margin = self._tab(edge)
        y_f = 0.0
        a = 1e-300
        for c, m in zip(y.coords, self.mono_f):
            if c != 0:
                v = float(c) * m
                y_f += v
                a += abs(v)
        m0 = a * 1e-13 + tab_margin
        i = bisect_right(bounds_f, y_f) - 1
        if 0 <= i < len(offsets) and y_f - bounds_f[i] > m0 and bounds_f[i + 1] - y_f > m0:
            return dst[i], y + offsets[i], w
        p, width, _ = shift_point(
            self.surface, VerticalCoord(edge, y), self.slope, reverse=self.reverse
        )
        return p.edge, p.y, width


def locate_time(surface: Surface, start: VerticalCoord, slope: Slope, t_h) -> VerticalCoord:
    """The crossing of the geodesic from `start` at signed horizontal time t_h."""
    if t_h.is_zero():
        return start
    reverse = t_h < 0
    target = -t_h if reverse else t_h
    target_f = float(target)
    walker = _PointWalker(surface, slope, reverse)
    widths: list = []
    counts: list = []
    h_f = 0.0
    edge, y = start.edge, start.y
    while True:
        edge, y, w = walker.step(edge, y)
        for i, v in enumerate(widths):
            if v == w:
                counts[i] += 1
                break
        else:
            widths.append(w)
            counts.append(1)
        h_f += float(w)
        # widths are >= their class minimum, so only the last couple of steps
        # can reach the target; everything is decided exactly there
        if h_f > target_f - 0.5:
            h = surface.tower.zero
            for n, v in zip(counts, widths):
                h = h + n * v
            if h == target:
                return VerticalCoord(edge, y)
            if h > target:
                raise PreconditionError(
                    f"{t_h!r} is not a crossing time of this geodesic"
                )


def verify_visit(surface, qr, slope, t_h) -> VerticalCoord:
    """Check L(t_h-time) lies in the open interval; returns the visit point."""
    p = locate_time(surface, VerticalCoord(qr.edge, qr.hi), slope, t_h)
    if p.edge != qr.edge or not qr.contains(p.y):
        raise AssertionError(
            f"claimed visit at t_h={expr_text(t_h)} lands at edge {p.edge}, "
            f"y={expr_text(p.y)}, outside the interval"
        )
    return p


@dataclass
class EndpointSeparation:
    visit: VerticalCoord
    dist_bottom: FieldElement
    dist_top: FieldElement
    ok: bool


def endpoint_distance(
    surface: Surface, qr: EdgeInterval, slope: Slope, t_star_h, ledger: ConstantsLedger
) -> EndpointSeparation:
    """Exact distances from the visit point to the interval endpoints.

    Both must clear the ledger's separation floor (x*c2 on polysquares).
    """
    p = verify_visit(surface, qr, slope, t_star_h)
    d_bot = p.y - qr.lo
    d_top = qr.hi - p.y
    x = qr.length
    ok = ledger.endpoint_bound_ok(d_bot, x) and ledger.endpoint_bound_ok(d_top, x)
    return EndpointSeparation(visit=p, dist_bottom=d_bot, dist_top=d_top, ok=ok)


def replay_certificate(
    surface: Surface, cert: VisitCertificate, slope: Slope, ledger: ConstantsLedger
) -> FieldElement:
    """Re-run a certificate's split log through the flow; returns the recomputed t*.

    Verifies every logged split (edge, kept length, time bookkeeping) and
    the final event, raising AssertionError on any mismatch.
    """
    cur = cert.interval
    t_R = surface.tower.zero
    engines = {
        "F": ShiftEngine(surface, slope, reverse=False),
        "R": ShiftEngine(surface, slope, reverse=True),
    }
    kept: dict[str, dict] = {"F": {}, "R": {}}
    rounds = {"F": 0, "R": 0}
    repetition = None  # (i_prev, t_prev) for the final collision, if any
    for step in cert.steps:
        reverse = step.direction == "R"
        prev_state = (cur, t_R)
        walker = _RunWalker(surface, slope, reverse, engines[step.direction], cur.length)
        walker.reset(cur.edge, cur.lo)
        top = None
        for j in range(1, step.k + 1):
            out = walker.step()
            if j < step.k:
                assert out is None, f"unexpected split at shift {j} of a logged run"
            else:
                assert out is not None, f"logged split at shift {step.k} did not happen"
                top = out.top
        assert top.edge == step.edge and top.length == step.length, "split mismatch"
        t_R = t_R + walker.tau()
        assert t_R == step.t_h, "time bookkeeping mismatch"
        rounds[step.direction] += 1
        if step.collapsed:
            cur, t_R = prev_state  # the next phase restarts one interval back
            continue
        prior = kept[step.direction].get(step.edge)
        if prior is not None:
            repetition = prior
        else:
            kept[step.direction][step.edge] = (rounds[step.direction], t_R)
        cur = top

    final = cert.final
    if final.reason in ("claim1-return", "claim3-return"):
        reverse = final.reason == "claim3-return"
        try:
            _run_until_split(
                surface, cur, slope, reverse, ledger, engines["R" if reverse else "F"]
            )
        except _RunReturn as ret:
            assert {ret.j_prev, ret.j_cur} == {final.j_prev, final.j_cur}, (
                "run-return indices differ"
            )
            t_star = ret.t_h
        else:
            raise AssertionError("logged run return did not re-occur")
    else:
        assert repetition is not None, "repetition certificate without a collision"
        i_prev, t_prev = repetition
        assert i_prev == final.i_prev, "repetition round index differs"
        t_star = cert.steps[-1].t_h - t_prev
    assert t_star == cert.t_star_h, "replayed visiting time differs"
    verify_visit(surface, cert.interval, slope, t_star)
    return t_star
