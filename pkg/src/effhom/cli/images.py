"""Binary images, their cubical complexes and the geometric vector field."""

from __future__ import annotations

from dataclasses import dataclass

from ..core_complex import Cell, CellularComplex, finite_complex
from ..dvf import DiscreteVectorField


class ParseError(ValueError):
    """Malformed input file; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class ImageGrid:
    """Row-major boolean pixels; row 0 is the top row."""

    width: int
    height: int
    pixels: tuple

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if len(self.pixels) != self.height or any(len(r) != self.width for r in self.pixels):
            raise ValueError("pixel rows do not match the dimensions")

    @classmethod
    def from_rows(cls, rows) -> "ImageGrid":
        rows = tuple(tuple(bool(v) for v in r) for r in rows)
        return cls(len(rows[0]) if rows else 0, len(rows), rows)

    def filled(self):
        for r, row in enumerate(self.pixels):
            for c, v in enumerate(row):
                if v:
                    yield r, c


def parse_text_grid(text: str) -> ImageGrid:
    """Rows of ``0``/``1`` characters; blanks inside a row and ``#`` comments are ignored."""
    rows = []
    width = None
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        row = []
        for col, ch in enumerate(body, 1):
            if ch in " \t\r":
                continue
            if ch not in "01":
                raise ParseError(f"unexpected character {ch!r}", ln, col)
            row.append(ch == "1")
        if not row:
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"row has {len(row)} pixels, expected {width}", ln, 1)
        rows.append(row)
    if not rows:
        raise ParseError("no pixel rows", 1, 1)
    return ImageGrid.from_rows(rows)


def _pbm_tokens(text: str):
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        col = 0
        while col < len(body):
            if body[col].isspace():
                col += 1
                continue
            start = col
            while col < len(body) and not body[col].isspace():
                col += 1
            yield body[start:col], ln, start + 1


def parse_pbm(text: str) -> ImageGrid:
    """Plain PBM (``P1``); pixel digits may or may not be separated by blanks."""
    toks = _pbm_tokens(text)
    try:
        magic, ln, col = next(toks)
    except StopIteration:
        raise ParseError("empty file", 1, 1) from None
    if magic != "P1":
        raise ParseError(f"expected magic number P1, got {magic!r}", ln, col)
    dims = []
    for _ in range(2):
        try:
            tok, ln, col = next(toks)
        except StopIteration:
            raise ParseError("missing image dimensions", ln, col) from None
        if not tok.isdigit() or int(tok) < 1:
            raise ParseError(f"invalid dimension {tok!r}", ln, col)
        dims.append(int(tok))
    w, h = dims
    bits = []
    for tok, ln, col in toks:
        for i, ch in enumerate(tok):
            if ch not in "01":
                raise ParseError(f"unexpected character {ch!r}", ln, col + i)
            bits.append(ch == "1")
    if len(bits) != w * h:
        raise ParseError(f"expected {w * h} pixels, found {len(bits)}", ln, col)
    return ImageGrid(w, h, tuple(tuple(bits[r * w:(r + 1) * w]) for r in range(h)))


def parse_image(text: str) -> ImageGrid:
    first = text.lstrip().split(None, 1)
    if first and first[0] == "P1":
        return parse_pbm(text)
    return parse_text_grid(text)


def load_image(path: str) -> ImageGrid:
    with open(path) as fh:
        return parse_image(fh.read())


# ---------------------------------------------------------------------------
# cubical complex
#
# vertex (x, y); edge ((x, y), (x', y')) with sorted endpoints, oriented from
# the first to the second; square (x, y) = lower-left corner of the unit square.
# Pixel (row r, column c) of an image of height H is [c, c+1] x [H-1-r, H-r].

def pixel_square(img: ImageGrid, r: int, c: int) -> tuple:
    return (c, img.height - 1 - r)


def square_edges(x: int, y: int) -> dict:
    """``d Q = bottom + right - top - left``."""
    return {((x, y), (x + 1, y)): 1, ((x + 1, y), (x + 1, y + 1)): 1,
            ((x, y + 1), (x + 1, y + 1)): -1, ((x, y), (x, y + 1)): -1}


def build_cubical(img: ImageGrid) -> CellularComplex:
    squares = sorted(pixel_square(img, r, c) for r, c in img.filled())
    edges: set = set()
    verts: set = set()
    for x, y in squares:
        for e in square_edges(x, y):
            edges.add(e)
            verts.update(e)
    bds = {}
    for e in edges:
        a, b = e
        bds[(1, e)] = {b: 1, a: -1}
    for q in squares:
        bds[(2, q)] = square_edges(*q)
    return finite_complex({0: sorted(verts), 1: sorted(edges), 2: squares}, bds, "cubical")


def geometric_vf(C: CellularComplex):
    """Leftward/downward field by a top-to-bottom, left-to-right sweep.

    Vertices take the edge below them, else the edge to their left; remaining
    horizontal edges take the square below, vertical edges the square to
    their left.  Every vector points down or left, which rules out loops.
    """
    verts = set(C.basis(0))
    edges = set(C.basis(1))
    squares = set(C.basis(2))
    used_e, used_q = set(), set()
    pairs = []
    for x, y in sorted(verts, key=lambda v: (-v[1], v[0])):
        down = ((x, y - 1), (x, y))
        left = ((x - 1, y), (x, y))
        for e in (down, left):
            if e in edges and e not in used_e:
                used_e.add(e)
                pairs.append((Cell(0, (x, y)), Cell(1, e)))
                break
    for e in sorted(edges - used_e, key=lambda e: (-e[0][1], e[0][0], e[1])):
        (x0, y0), (x1, y1) = e
        q = (x0, y0 - 1) if y0 == y1 else (x0 - 1, y0)
        if q in squares and q not in used_q:
            used_q.add(q)
            used_e.add(e)
            pairs.append((Cell(1, e), Cell(2, q)))
    return DiscreteVectorField(pairs, name="geometric")
