"""Vector fields on integer matrices, matrix reduction and integral homology.

A boundary matrix is read as a two-degree complex: rows are the faces,
columns the cells.  A matrix vector field selects unit entries ``M[a, b]``
whose rows and columns are all distinct; eliminating them leaves the smaller
matrix ``beta - psi eps^-1 phi`` with the same homology.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

from .core_complex import CellularComplex, ContractError, InvalidComplexError, boundary_matrix


@dataclass(frozen=True)
class IntegerMatrix:
    """Sparse integer matrix with labelled rows and columns."""

    rows: tuple
    cols: tuple
    entries: Mapping

    def __init__(self, rows: Sequence, cols: Sequence, entries: Mapping | None = None):
        object.__setattr__(self, "rows", tuple(rows))
        object.__setattr__(self, "cols", tuple(cols))
        rs, cs = set(self.rows), set(self.cols)
        clean = {}
        for (r, c), v in (entries or {}).items():
            if r not in rs or c not in cs:
                raise ContractError(f"entry ({r!r}, {c!r}) outside the matrix")
            if v:
                clean[(r, c)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[int]], rows: Sequence | None = None,
                   cols: Sequence | None = None) -> "IntegerMatrix":
        """Labels default to 1..m and 1..n."""
        m = len(data)
        n = len(data[0]) if m else 0
        rows = list(rows) if rows is not None else list(range(1, m + 1))
        cols = list(cols) if cols is not None else list(range(1, n + 1))
        ent = {(rows[i], cols[j]): data[i][j] for i in range(m) for j in range(n) if data[i][j]}
        return cls(rows, cols, ent)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def __getitem__(self, rc) -> int:
        return self.entries.get(rc, 0)

    def to_dense(self) -> list[list[int]]:
        return [[self.entries.get((r, c), 0) for c in self.cols] for r in self.rows]

    def column(self, c) -> dict:
        return {r: v for (r, cc), v in self.entries.items() if cc == c}

    def columns(self) -> dict:
        out: dict = {c: {} for c in self.cols}
        for (r, c), v in self.entries.items():
            out[c][r] = v
        return out

    def row_dicts(self) -> dict:
        out: dict = {r: {} for r in self.rows}
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def submatrix(self, rows: Sequence, cols: Sequence) -> "IntegerMatrix":
        rs, cs = set(rows), set(cols)
        return IntegerMatrix(rows, cols, {(r, c): v for (r, c), v in self.entries.items()
                                          if r in rs and c in cs})

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows and set(self.cols) != set(other.rows):
            raise ContractError("inner labels differ")
        orows = other.row_dicts()
        acc: dict = {}
        for (r, k), v in self.entries.items():
            for c, w in orows.get(k, {}).items():
                acc[(r, c)] = acc.get((r, c), 0) + v * w
        return IntegerMatrix(self.rows, other.cols, acc)

    def is_zero(self) -> bool:
        return not self.entries


@dataclass(frozen=True)
class MatrixVectorField:
    """Vectors ``(row, col)`` on unit entries, rows and columns pairwise distinct."""

    vectors: tuple = ()

    def __len__(self) -> int:
        return len(self.vectors)

    def as_set(self) -> set:
        return set(self.vectors)

    def rows(self) -> list:
        return [a for a, _ in self.vectors]

    def cols(self) -> list:
        return [b for _, b in self.vectors]


@dataclass
class OrderGraph:
    """Rows involved in a matrix field: sources, minimal rows and edges ``a -> a'`` (a > a')."""

    sources: set = field(default_factory=set)
    minimal: set = field(default_factory=set)
    edges: set = field(default_factory=set)

    def nodes(self) -> set:
        return self.sources | self.minimal

    def greater_than(self, a, b) -> bool:
        """Whether ``a > b`` follows from the edges."""
        succ: dict = {}
        for x, y in self.edges:
            succ.setdefault(x, set()).add(y)
        seen, stack = set(), [a]
        while stack:
            x = stack.pop()
            for y in succ.get(x, ()):
                if y == b:
                    return True
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False


def _validate_field(M: IntegerMatrix, V: MatrixVectorField) -> None:
    rows = V.rows()
    cols = V.cols()
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise ContractError("matrix vector field reuses a row or a column")
    for a, b in V.vectors:
        if abs(M[(a, b)]) != 1:
            raise ContractError(f"entry M[{a!r}, {b!r}] = {M[(a, b)]} is not a unit")


def vf_by_predefined_order(M: IntegerMatrix, row_order: Sequence | None = None) -> MatrixVectorField:
    """Columns taken in order; a column is paired with its highest-ranked nonzero row
    when that entry is a unit and the row is still free.  Later rows in
    ``row_order`` rank higher (default: the matrix row order)."""
    rank = {r: i for i, r in enumerate(M.rows if row_order is None else row_order)}
    if set(rank) != set(M.rows):
        raise ContractError("row_order must be a permutation of the rows")
    cols = M.columns()
    used: set = set()
    out = []
    for c in M.cols:
        col = cols[c]
        if not col:
            continue
        a = max(col, key=rank.__getitem__)
        if abs(col[a]) == 1 and a not in used:
            used.add(a)
            out.append((a, c))
    return MatrixVectorField(tuple(out))


def vf_incremental(M: IntegerMatrix, skip_rows: Iterable = (), skip_cols: Iterable = (),
                   with_graph: bool = False):
    """Greedy field: rows ascending, then columns ascending.

    A unit entry ``(r, c)`` with ``r`` and ``c`` free is added when ``r`` is not
    yet in the order graph, or when ``r`` is minimal there and no other
    nonzero row of column ``c`` is a source.  Rows and columns listed in
    ``skip_rows``/``skip_cols`` are never used.
    """
    rows_of = M.row_dicts()
    cols = M.columns()
    skip_r, used_c = set(skip_rows), set(skip_cols)
    cpos = {c: j for j, c in enumerate(M.cols)}
    g = OrderGraph()
    out = []
    for r in M.rows:
        if r in skip_r:
            continue
        row = rows_of[r]
        for c in sorted(row, key=cpos.__getitem__):
            if c in used_c or abs(row[c]) != 1:
                continue
            others = [a for a in cols[c] if a != r]
            if r in g.nodes():
                if any(a in g.sources for a in others):
                    continue
                g.minimal.discard(r)
            g.sources.add(r)
            for a in others:
                g.edges.add((r, a))
                if a not in g.sources:
                    g.minimal.add(a)
            used_c.add(c)
            out.append((r, c))
            break
    V = MatrixVectorField(tuple(out))
    return (V, g) if with_graph else V


def order_graph(M: IntegerMatrix, V: MatrixVectorField) -> OrderGraph:
    g = OrderGraph()
    cols = M.columns()
    for a, b in V.vectors:
        g.sources.add(a)
    for a, b in V.vectors:
        for a2 in cols[b]:
            if a2 != a:
                g.edges.add((a, a2))
                if a2 not in g.sources:
                    g.minimal.add(a2)
    return g


@dataclass(frozen=True)
class MatrixOrder:
    """Source rows ordered so that greater rows come first."""

    rows: tuple


@dataclass(frozen=True)
class MatrixLoop:
    rows: tuple


def check_matrix_vf_admissible(M: IntegerMatrix, V: MatrixVectorField):
    """Return a :class:`MatrixOrder` on the source rows or a :class:`MatrixLoop`."""
    _validate_field(M, V)
    g = order_graph(M, V)
    src = set(V.rows())
    below: dict = {a: set() for a in src}
    for a, a2 in g.edges:
        if a2 in src:
            below[a].add(a2)
    # Kahn's algorithm, greatest rows first, ties broken by descending label position
    pos = {r: i for i, r in enumerate(M.rows)}
    above: dict = {a: set() for a in src}
    for a, bs in below.items():
        for b in bs:
            above[b].add(a)
    ts = graphlib.TopologicalSorter({a: above[a] for a in src})
    try:
        ts.prepare()
    except graphlib.CycleError as exc:
        cyc = tuple(exc.args[1])
        return MatrixLoop(cyc)
    order = []
    while ts.is_active():
        ready = sorted(ts.get_ready(), key=lambda r: -pos[r])
        for r in ready:
            order.append(r)
            ts.done(r)
    return MatrixOrder(tuple(order))


def order_by_height(M: IntegerMatrix, V: MatrixVectorField):
    """Source rows by decreasing height (longest chain below them in the order
    graph), ties by matrix row position; a :class:`MatrixLoop` if there is none."""
    cert = check_matrix_vf_admissible(M, V)
    if isinstance(cert, MatrixLoop):
        return cert
    g = order_graph(M, V)
    src = set(V.rows())
    below: dict = {a: [b for x, b in g.edges if x == a and b in src] for a in src}
    height: dict = {}
    for a in reversed(cert.rows):
        height[a] = 1 + max((height[b] for b in below[a]), default=0)
    pos = {r: i for i, r in enumerate(M.rows)}
    return MatrixOrder(tuple(sorted(src, key=lambda r: (-height[r], pos[r]))))


@dataclass(frozen=True)
class MatrixReduction:
    """Result of eliminating a matrix vector field.

    ``residual`` is ``beta - psi eps^-1 phi`` on the critical rows and columns.
    ``col_correction[b][c]`` are the entries of ``eps^-1 phi`` (V-column b,
    critical column c) and ``row_correction[r][a]`` those of ``psi eps^-1``
    (critical row r, V-row a): they describe the changes of basis.
    """

    residual: IntegerMatrix
    row_order: tuple
    col_order: tuple
    vector_field: MatrixVectorField
    col_correction: dict
    row_correction: dict

    def blocks(self, M: IntegerMatrix) -> dict:
        """``eps, phi, psi, beta`` as dense matrices in the reordered basis."""
        k = len(self.vector_field)
        vr, cr = self.row_order[:k], self.row_order[k:]
        vc, cc = self.col_order[:k], self.col_order[k:]
        sub = lambda rs, cs: [[M[(r, c)] for c in cs] for r in rs]
        return {"eps": sub(vr, vc), "phi": sub(vr, cc), "psi": sub(cr, vc), "beta": sub(cr, cc)}


def reduce_matrix(M: IntegerMatrix, V: MatrixVectorField, cert=None) -> MatrixReduction:
    """Eliminate the vectors of an admissible field."""
    if cert is None:
        cert = check_matrix_vf_admissible(M, V)
    if isinstance(cert, MatrixLoop):
        raise ContractError(f"matrix vector field has a loop through rows {cert.rows}")
    _validate_field(M, V)
    col_of = dict(V.vectors)
    vrows = list(cert.rows)
    vcols = [col_of[a] for a in vrows]
    vrow_set, vcol_set = set(vrows), set(vcols)
    crit_rows = [r for r in M.rows if r not in vrow_set]
    crit_cols = [c for c in M.cols if c not in vcol_set]
    rows_of = M.row_dicts()
    cols_of = M.columns()
    # eps is lower triangular in this order: solve eps X = phi row by row
    X: dict = {}
    for i, a in enumerate(vrows):
        b = vcols[i]
        piv = rows_of[a][b]
        acc = {c: v for c, v in rows_of[a].items() if c not in vcol_set}
        for c2, e in rows_of[a].items():
            if c2 in vcol_set and c2 != b:
                for c, v in X[c2].items():
                    n = acc.get(c, 0) - e * v
                    if n:
                        acc[c] = n
                    else:
                        acc.pop(c, None)
        X[b] = {c: v * piv for c, v in acc.items()}
    # psi eps^-1: solve Y eps = psi column by column from the last V-column
    crit_row_set = set(crit_rows)
    Y: dict = {r: {} for r in crit_rows}
    for j in range(len(vrows) - 1, -1, -1):
        a, b = vrows[j], vcols[j]
        piv = rows_of[a][b]
        col = cols_of[b]
        for r in crit_rows:
            s = col.get(r, 0)
            if r in crit_row_set:
                for a2, e in col.items():
                    if a2 in vrow_set and a2 != a:
                        y = Y[r].get(a2, 0)
                        if y:
                            s -= y * e
            if s:
                Y[r][a] = s * piv
    ent: dict = {}
    for r in crit_rows:
        row = {c: v for c, v in rows_of[r].items() if c not in vcol_set}
        for b, e in rows_of[r].items():
            if b in vcol_set:
                for c, v in X[b].items():
                    n = row.get(c, 0) - e * v
                    if n:
                        row[c] = n
                    else:
                        row.pop(c, None)
        for c, v in row.items():
            ent[(r, c)] = v
    residual = IntegerMatrix(crit_rows, crit_cols, ent)
    return MatrixReduction(residual, tuple(vrows + crit_rows), tuple(vcols + crit_cols),
                           V, X, Y)


def smith_normal_form(M: IntegerMatrix | Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Nonzero invariant factors ``d1 | d2 | ...`` (all positive)."""
    if isinstance(M, IntegerMatrix):
        rows = {}
        ridx = {r: i for i, r in enumerate(M.rows)}
        cidx = {c: j for j, c in enumerate(M.cols)}
        for (r, c), v in M.entries.items():
            rows.setdefault(ridx[r], {})[cidx[c]] = v
    else:
        rows = {}
        for i, row in enumerate(M):
            d = {j: v for j, v in enumerate(row) if v}
            if d:
                rows[i] = d
    diag = _sparse_diagonalize(rows)
    return _invariant_factors(diag)


def _sparse_diagonalize(rows: dict) -> list[int]:
    """Reduce a sparse matrix (row -> {col: value}) to diagonal form by unimodular
    row and column operations; returns the nonzero diagonal entries."""
    rows = {i: dict(r) for i, r in rows.items() if r}
    cols: dict = {}
    for i, r in rows.items():
        for j, v in r.items():
            cols.setdefault(j, {})[i] = v

    def set_entry(i, j, v):
        if v:
            rows.setdefault(i, {})[j] = v
            cols.setdefault(j, {})[i] = v
        else:
            if i in rows:
                rows[i].pop(j, None)
                if not rows[i]:
                    del rows[i]
            if j in cols:
                cols[j].pop(i, None)
                if not cols[j]:
                    del cols[j]

    def add_row(dst, src, k):  # row dst += k * row src
        for j, v in list(rows.get(src, {}).items()):
            set_entry(dst, j, rows.get(dst, {}).get(j, 0) + k * v)

    def add_col(dst, src, k):  # col dst += k * col src
        for i, v in list(cols.get(src, {}).items()):
            set_entry(i, dst, cols.get(dst, {}).get(i, 0) + k * v)

    diag = []
    while rows:
        # pivot: smallest absolute value, preferring short rows/columns
        best = None
        for i, r in rows.items():
            for j, v in r.items():
                key = (abs(v), len(r) + len(cols[j]))
                if best is None or key < best[0]:
                    best = (key, i, j)
                    if key[0] == 1 and key[1] == 2:
                        break
            if best is not None and best[0] == (1, 2):
                break
        _, i, j = best
        while True:
            p = rows[i][j]
            done = True
            for i2, v in list(cols[j].items()):
                if i2 == i:
                    continue
                q = v // p
                add_row(i2, i, -q)
                if cols.get(j, {}).get(i2, 0):
                    done = False
            for j2, v in list(rows.get(i, {}).items()):
                if j2 == j:
                    continue
                q = v // p
                add_col(j2, j, -q)
                if rows.get(i, {}).get(j2, 0):
                    done = False
            if done:
                break
            # a remainder is smaller than the pivot: move it to the pivot position
            cand = None
            for i2, v in cols.get(j, {}).items():
                if i2 != i and (cand is None or abs(v) < abs(cand[2])):
                    cand = (i2, j, v)
            for j2, v in rows.get(i, {}).items():
                if j2 != j and (cand is None or abs(v) < abs(cand[2])):
                    cand = (i, j2, v)
            i, j = cand[0], cand[1]
        diag.append(abs(rows[i][j]))
        set_entry(i, j, 0)
    return diag


def _invariant_factors(diag: list[int]) -> tuple[int, ...]:
    from math import gcd
    d = sorted(x for x in diag if x)
    # turn a diagonal into divisibility order: (a, b) -> (gcd, lcm)
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = d[i], d[j]
            g = gcd(a, b)
            d[i], d[j] = g, a // g * b
    return tuple(d)


def invariant_factors_by_reduction(M: IntegerMatrix) -> tuple[int, ...]:
    """Invariant factors of ``M`` by repeated vector-field elimination, with a
    Smith normal form only for the residue left without unit pivots."""
    units = 0
    while True:
        V = vf_incremental(M)
        if not len(V):
            break
        units += len(V)
        M = reduce_matrix(M, V).residual
    return (1,) * units + smith_normal_form(M)


@dataclass
class HomologyGroup:
    betti: int
    torsion: list[int]

    def __str__(self) -> str:
        parts = (["Z^%d" % self.betti if self.betti > 1 else "Z"] if self.betti else []) + \
            [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def _boundary_matrices(C: CellularComplex) -> dict[int, IntegerMatrix]:
    return {p: boundary_matrix(C, p) for p in C.degree_range()}


def reduce_boundary_matrices(mats: dict[int, IntegerMatrix]) -> dict[int, IntegerMatrix]:
    """Iterate heuristic fields and eliminations degree-wise until no unit pivot is selected.

    ``mats[p]`` maps degree-p cells (columns) to degree-(p-1) cells (rows).
    """
    mats = dict(mats)
    changed = True
    while changed:
        changed = False
        for p in sorted(mats):
            M = mats[p]
            V = vf_incremental(M)
            if not len(V):
                continue
            red = reduce_matrix(M, V)
            changed = True
            mats[p] = red.residual
            gone_rows = set(V.rows())
            gone_cols = set(V.cols())
            if p - 1 in mats:
                L = mats[p - 1]
                mats[p - 1] = L.submatrix(L.rows, [c for c in L.cols if c not in gone_rows])
            if p + 1 in mats:
                U = mats[p + 1]
                mats[p + 1] = U.submatrix([r for r in U.rows if r not in gone_cols], U.cols)
    return mats


def homology_from_matrices(mats: dict[int, IntegerMatrix], reduce: bool = True) -> dict[int, HomologyGroup]:
    if reduce:
        mats = reduce_boundary_matrices(mats)
    out = {}
    factors = {p: smith_normal_form(M) for p, M in mats.items()}
    for p, M in mats.items():
        n = len(M.cols)
        r_out = len(factors[p])
        up = factors.get(p + 1, ())
        out[p] = HomologyGroup(n - r_out - len(up), [t for t in up if t > 1])
    return out


def homology_of_finite_complex(C: CellularComplex, reduce: bool = True) -> dict[int, HomologyGroup]:
    """Integral homology in every degree of an enumerable complex."""
    mats = _boundary_matrices(C)
    for p in mats:
        if p + 1 in mats:
            prod = mats[p] @ mats[p + 1]
            if not prod.is_zero():
                raise InvalidComplexError(f"d_{p} d_{p + 1} != 0")
    # include the degree below the range so that rank bookkeeping is uniform
    return homology_from_matrices(mats, reduce)
