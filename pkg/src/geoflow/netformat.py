"""The surface-net text format: grammar, parser, canonical serializer.

Line-oriented with `#` comments::

    tower r^2=2, c^3=3
    face 1 width 1 height r
    glue V 1.R 2.L
    glue H 1.T 7.B
    slope alpha = 1/2*c

Expressions are rationals, generator names, +, -, * and parentheses
(evaluated exactly into the declared tower; powers are spelled as repeated
products).  Parsing never throws on arbitrary input: every rejection is a
positioned diagnostic collected into NetFormatError.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exactnum import FieldElement, Q, TowerError, expr_text, tower
from .surfaces import EdgeRef, Face, Side, Surface, Table


@dataclass(frozen=True)
class Diagnostic:
    line: int  # 1-based
    col: int  # 1-based
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


class NetFormatError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass
class NetDocument:
    tower_spec: object
    faces: list = field(default_factory=list)  # Face records, declaration order
    v_glues: list = field(default_factory=list)  # (EdgeRef R, EdgeRef L)
    h_glues: list = field(default_factory=list)  # (EdgeRef T, EdgeRef B)
    slopes: dict = field(default_factory=dict)

    def to_surface(self, check: bool = True) -> Surface:
        return Surface(self.tower_spec, self.faces, self.v_glues, self.h_glues, check=check)

    def to_table(self) -> Table:
        return Table(self.tower_spec, tuple(self.faces), tuple(self.v_glues), tuple(self.h_glues))

    def fully_glued(self) -> bool:
        return 2 * (len(self.v_glues) + len(self.h_glues)) == 4 * len(self.faces)

    @classmethod
    def from_surface(cls, surface, slopes=None):
        return cls(
            tower_spec=surface.tower,
            faces=list(surface.faces),
            v_glues=list(surface.v_pairs),
            h_glues=list(surface.h_pairs),
            slopes=dict(slopes or {}),
        )


_SYMBOLS = set("^=,./+-*()")


def _tokenize(line_no, text, diags):
    """Tokens (kind, value, col) with kind in NAME|INT|SYM; None on failure."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            break
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(("INT", int(text[i:j]), i + 1))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(("NAME", text[i:j], i + 1))
            i = j
        elif ch in _SYMBOLS:
            out.append(("SYM", ch, i + 1))
            i += 1
        else:
            diags.append(Diagnostic(line_no, i + 1, f"unexpected character {ch!r}"))
            return None
    return out


class _LineParser:
    def __init__(self, line_no, tokens, diags):
        self.line_no = line_no
        self.toks = tokens
        self.pos = 0
        self.diags = diags
        self.depth = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of line")
            return None
        if kind is not None and tok[0] != kind:
            self.fail(f"expected {kind}, found {tok[1]!r}", tok[2])
            return None
        if value is not None and tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1]!r}", tok[2])
            return None
        self.pos += 1
        return tok

    def fail(self, message, col=None):
        if col is None:
            col = self.toks[self.pos - 1][2] if self.toks else 1
        self.diags.append(Diagnostic(self.line_no, col, message))
        raise _Bail()

    def done(self):
        tok = self.peek()
        if tok is not None:
            self.fail("trailing tokens", tok[2])


class _Bail(Exception):
    pass


def _parse_expr(p: _LineParser, tower_spec):
    left = _parse_term(p, tower_spec)
    while True:
        tok = p.peek()
        if tok and tok[0] == "SYM" and tok[1] in "+-":
            p.take()
            right = _parse_term(p, tower_spec)
            left = left + right if tok[1] == "+" else left - right
        else:
            return left


def _parse_term(p, tower_spec):
    left = _parse_unary(p, tower_spec)
    while True:
        tok = p.peek()
        if tok and tok[0] == "SYM" and tok[1] == "*":
            p.take()
            left = left * _parse_unary(p, tower_spec)
        else:
            return left


def _parse_unary(p, tower_spec):
    tok = p.peek()
    if tok and tok[0] == "SYM" and tok[1] == "-":
        p.take()
        p.depth += 1
        if p.depth > 64:
            p.fail("expression too deeply nested", tok[2])
        val = -_parse_unary(p, tower_spec)
        p.depth -= 1
        return val
    return _parse_primary(p, tower_spec)


def _parse_primary(p, tower_spec):
    tok = p.peek()
    if tok is None:
        p.fail("expected expression")
    if tok[0] == "INT":
        p.take()
        num = tok[1]
        nxt = p.peek()
        if nxt and nxt[0] == "SYM" and nxt[1] == "/":
            p.take()
            den = p.take("INT")
            if den[1] == 0:
                p.fail("zero denominator", den[2])
            return tower_spec.rational(Q(num, den[1]))
        return tower_spec.rational(Q(num))
    if tok[0] == "NAME":
        p.take()
        try:
            return tower_spec.generator(tok[1])
        except KeyError:
            p.fail(f"unknown generator name {tok[1]!r}", tok[2])
    if tok[0] == "SYM" and tok[1] == "(":
        p.take()
        p.depth += 1
        if p.depth > 64:
            p.fail("expression too deeply nested", tok[2])
        val = _parse_expr(p, tower_spec)
        p.take("SYM", ")")
        p.depth -= 1
        return val
    p.fail(f"expected expression, found {tok[1]!r}", tok[2])


def _parse_edgeref(p):
    face = p.take("INT")
    p.take("SYM", ".")
    side = p.take("NAME")
    if side[1] not in ("L", "R", "T", "B"):
        p.fail(f"side must be L/R/T/B, found {side[1]!r}", side[2])
    return EdgeRef(face[1], Side(side[1]))


def parse_net(text: str) -> NetDocument:
    """Parse a net document; raises NetFormatError carrying all diagnostics."""
    diags: list[Diagnostic] = []
    tower_spec = None
    faces = []
    face_ids = set()
    v_glues = []
    h_glues = []
    glued_sides = set()
    slopes = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line_no, raw, diags)
        if tokens is None or not tokens:
            continue
        p = _LineParser(line_no, tokens, diags)
        try:
            head = p.take("NAME")
            if head is None:
                continue
            kw = head[1]
            if kw == "tower":
                if tower_spec is not None:
                    p.fail("duplicate tower line")
                gens = []
                while True:
                    name = p.take("NAME")
                    p.take("SYM", "^")
                    exp = p.take("INT")
                    p.take("SYM", "=")
                    rad = p.take("INT")
                    gens.append((name[1], exp[1], rad[1]))
                    if p.peek() and p.peek()[1] == ",":
                        p.take()
                    else:
                        break
                p.done()
                try:
                    tower_spec = tower(gens)
                except TowerError as e:
                    p.fail(str(e), head[2])
            elif kw == "face":
                if tower_spec is None:
                    tower_spec = tower([])
                fid = p.take("INT")
                p.take("NAME", "width")
                width = _parse_expr(p, tower_spec)
                p.take("NAME", "height")
                height = _parse_expr(p, tower_spec)
                p.done()
                if fid[1] in face_ids:
                    p.fail(f"duplicate face id {fid[1]}", fid[2])
                if not (width > 0):
                    p.fail("nonpositive width", fid[2])
                if not (height > 0):
                    p.fail("nonpositive height", fid[2])
                face_ids.add(fid[1])
                faces.append(Face(fid[1], width, height))
            elif kw == "glue":
                axis = p.take("NAME")
                if axis[1] not in ("V", "H"):
                    p.fail("glue axis must be V or H", axis[2])
                a = _parse_edgeref(p)
                b = _parse_edgeref(p)
                p.done()
                want = ("R", "L") if axis[1] == "V" else ("T", "B")
                pair = {a.side.value: a, b.side.value: b}
                if set(pair) != set(want):
                    p.fail(
                        f"unbalanced glue: {axis[1]} needs one .{want[0]} and one .{want[1]} side",
                        axis[2],
                    )
                first, second = pair[want[0]], pair[want[1]]
                for ref in (first, second):
                    key = (ref.face, ref.side)
                    if key in glued_sides:
                        p.fail(f"side {ref.face}.{ref.side.value} glued twice", axis[2])
                    glued_sides.add(key)
                (v_glues if axis[1] == "V" else h_glues).append((first, second))
            elif kw == "slope":
                if tower_spec is None:
                    tower_spec = tower([])
                name = p.take("NAME")
                p.take("SYM", "=")
                val = _parse_expr(p, tower_spec)
                p.done()
                if name[1] in slopes:
                    p.fail(f"duplicate slope name {name[1]!r}", name[2])
                slopes[name[1]] = val
            else:
                p.fail(f"unknown directive {kw!r}", head[2])
        except _Bail:
            continue
    # glue references must name declared faces
    for ref_pair in v_glues + h_glues:
        for ref in ref_pair:
            if ref.face not in face_ids:
                diags.append(Diagnostic(0, 0, f"glue names undeclared face {ref.face}"))
    if diags:
        raise NetFormatError(diags)
    if tower_spec is None:
        tower_spec = tower([])
    return NetDocument(
        tower_spec=tower_spec,
        faces=faces,
        v_glues=v_glues,
        h_glues=h_glues,
        slopes=slopes,
    )


def serialize_net(obj, slopes=None) -> str:
    """Canonical text: tower, faces by id, V glues, H glues, slopes by name.

    Serializing twice is byte-identical; parse(serialize(x)) reproduces the
    abstract document.
    """
    if isinstance(obj, (Surface, Table)):
        doc = NetDocument(
            tower_spec=obj.tower,
            faces=list(obj.faces),
            v_glues=list(obj.v_pairs),
            h_glues=list(obj.h_pairs),
            slopes=dict(slopes or {}),
        )
    else:
        doc = obj
        if slopes:
            doc = NetDocument(
                doc.tower_spec, doc.faces, doc.v_glues, doc.h_glues,
                {**doc.slopes, **slopes},
            )
    lines = []
    gens = doc.tower_spec.generators
    if gens:
        lines.append(
            "tower " + ", ".join(f"{g.name}^{g.exponent}={g.radicand}" for g in gens)
        )
    for f in sorted(doc.faces, key=lambda f: f.id):
        lines.append(
            f"face {f.id} width {expr_text(f.width)} height {expr_text(f.height)}"
        )
    for a, b in sorted(doc.v_glues, key=lambda p: (p[0].face, p[1].face)):
        lines.append(f"glue V {a.face}.{a.side.value} {b.face}.{b.side.value}")
    for a, b in sorted(doc.h_glues, key=lambda p: (p[0].face, p[1].face)):
        lines.append(f"glue H {a.face}.{a.side.value} {b.face}.{b.side.value}")
    for name in sorted(doc.slopes):
        lines.append(f"slope {name} = {expr_text(doc.slopes[name])}")
    return "\n".join(lines) + "\n"

def parse_expr_text(tower_spec, text: str):
    """Evaluate a standalone expression string in the given tower."""
    diags: list[Diagnostic] = []
    tokens = _tokenize(1, text, diags)
    if tokens is None or not tokens:
        diags.append(Diagnostic(1, 1, "empty expression"))
        raise NetFormatError(diags)
    p = _LineParser(1, tokens, diags)
    try:
        val = _parse_expr(p, tower_spec)
        p.done()
        return val
    except _Bail:
        raise NetFormatError(diags) from None
