"""Prism combinatorics and the Eilenberg-Zilber reduction.

A non-degenerate simplex of ``Delta^p x Delta^q`` is a strictly increasing
lattice path (an s-path) from ``(0,0)``; for a product simplex
``(eta_Dx sigma, eta_Dy tau)`` the path has a vertical step at every time in
``Dx``, a horizontal step at every time in ``Dy`` and a diagonal step
elsewhere.  The Eilenberg-Zilber vector field pairs a path whose last event
(scanning backward from ``(p,q)``) is a diagonal step with the path where that
diagonal is replaced by an up-then-right corner.  Only the last simplex, all
horizontal steps followed by all vertical ones, stays critical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Iterable, Sequence

from .core_complex import (Cell, CellularComplex, Chain, ChainMorphism, ContractError,
                           InternalConsistencyError, Report, add_into)
from .dvf import (CRITICAL_CELL, SOURCE, TARGET, Classification, DiscreteVectorField, Lyapunov,
                  build_reduction_gauss)
from .reduction import Perturbation, Reduction, compose_reductions, identity_reduction, perturb
from .simplicial import (KZ1, Product, SimplicialMorphism, SimplicialSet, Simplex, Sphere, TwistedProduct,
                         apply_degeneracies, degeneracy, canonical_pair, from_bar, nondegenerate_chain_complex,
                         split_pair, kz1_vf, twisting_from_nondegenerate)

H, V_, D_ = (1, 0), (0, 1), (1, 1)


# ---------------------------------------------------------------------------
# s-paths

def steps(path: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    return [(b[0] - a[0], b[1] - a[1]) for a, b in zip(path, path[1:])]


def format_spath(path) -> str:
    return "".join(f"({a},{b})" for a, b in path)


def parse_spath(text: str) -> tuple:
    import re
    pts = re.findall(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)", text)
    return tuple((int(a), int(b)) for a, b in pts)


def is_interior(path, p: int | None = None, q: int | None = None) -> bool:
    """Whether both projections of the path run over all vertices."""
    path = tuple(path)
    if not path:
        return False
    if p is None:
        p, q = path[-1]
    if any(not (0 <= a <= p and 0 <= b <= q) for a, b in path):
        return False
    if any(not (b[0] >= a[0] and b[1] >= a[1] and b != a) for a, b in zip(path, path[1:])):
        return False
    return {a for a, _ in path} == set(range(p + 1)) and {b for _, b in path} == set(range(q + 1))


def config_from_spath(path) -> tuple[tuple, tuple]:
    """Degeneracy configuration ``(Dx, Dy)`` (decreasing lists) of an interior path."""
    path = tuple(path)
    if not is_interior(path):
        raise ContractError(f"path {format_spath(path)} is not interior")
    dx, dy = [], []
    for t, st in enumerate(steps(path)):
        if st == V_:
            dx.append(t)
        elif st == H:
            dy.append(t)
    return tuple(reversed(dx)), tuple(reversed(dy))


def spath_from_config(cfg, p: int, q: int) -> tuple:
    dx, dy = (tuple(c) for c in cfg)
    sx, sy = set(dx), set(dy)
    n = p + len(dx)
    if n != q + len(dy) or len(sx) != len(dx) or len(sy) != len(dy) or sx & sy:
        raise ContractError(f"incoherent configuration {cfg} for ({p},{q})")
    if any(not 0 <= i < n for i in sx | sy) or list(dx) != sorted(dx, reverse=True) \
            or list(dy) != sorted(dy, reverse=True):
        raise ContractError(f"incoherent configuration {cfg} for ({p},{q})")
    pts = [(0, 0)]
    for t in range(n):
        a, b = pts[-1]
        if t in sx:
            pts.append((a, b + 1))
        elif t in sy:
            pts.append((a + 1, b))
        else:
            pts.append((a + 1, b + 1))
    return tuple(pts)


def last_simplex(p: int, q: int) -> tuple:
    return tuple((a, 0) for a in range(p + 1)) + tuple((p, b) for b in range(1, q + 1))


def interior_paths(p: int, q: int) -> list[tuple]:
    """All interior s-paths of the (p,q) prism."""
    out = []

    def rec(path):
        a, b = path[-1]
        if (a, b) == (p, q):
            out.append(tuple(path))
            return
        for da, db in (H, V_, D_):
            if a + da <= p and b + db <= q:
                path.append((a + da, b + db))
                rec(path)
                path.pop()
    rec([(0, 0)])
    return out


def delannoy(p: int, q: int) -> int:
    return sum(math.comb(q, k) * math.comb(p + q - k, q) for k in range(min(p, q) + 1))


def interior_faces(path) -> list[tuple[int, tuple]]:
    """Faces of an interior path that are again interior: removal of a right-angle bend."""
    path = tuple(path)
    if not is_interior(path):
        raise ContractError(f"path {format_spath(path)} is not interior")
    st = steps(path)
    out = []
    for k in range(1, len(path) - 1):
        if {st[k - 1], st[k]} == {H, V_}:
            out.append((k, path[:k] + path[k + 1:]))
    return out


@dataclass(frozen=True)
class EZStatus:
    kind: str  # "D" (source), "R" (target) or "last"
    partner: tuple | None = None
    index: int | None = None  # face index relating the pair


def ez_classify(path) -> EZStatus:
    """Backward scan from the end: a diagonal step first makes a source whose
    target inserts the up-then-right corner; an up-then-right corner first
    makes a target whose source flattens it."""
    path = tuple(path)
    st = steps(path)
    for t in range(len(st) - 1, -1, -1):
        if st[t] == D_:
            a, b = path[t]
            return EZStatus("D", path[:t + 1] + ((a, b + 1),) + path[t + 1:], t + 1)
        if t < len(st) - 1 and st[t] == V_ and st[t + 1] == H:
            return EZStatus("R", path[:t + 1] + path[t + 2:], t + 1)
    return EZStatus("last")


def prism_lyapunov(path, p: int | None = None, q: int | None = None) -> int:
    """Number of lattice points of the prism strictly above the path."""
    path = tuple(path)
    if p is None:
        p, q = path[-1]
    top: dict = {}
    for a, b in path:
        top[a] = max(top.get(a, -1), b)
    return sum(q - top[a] for a in range(p + 1))


def _complete(seq, first_step):
    da, db = first_step
    return [((0, 0),) + tuple((a + da, b + db) for a, b in path) for path in seq]


@lru_cache(maxsize=None)
def _filling(p: int, q: int) -> tuple:
    if p == 0 or q == 0:
        return ()
    out = []
    out += _complete(_filling(p - 1, q - 1), D_)
    out += _complete(_filling(p, q - 1), V_)
    out += _complete([last_simplex(p - 1, q - 1)], D_)
    out += _complete([last_simplex(p, q - 1)], V_)
    out += _complete(_filling(p - 1, q), H)
    return tuple(out)


def filling_sequence(p: int, q: int) -> list[tuple]:
    """Ordered interior paths except the last simplex, in pairs (face, simplex)
    such that adding them pairwise fills the prism from its exterior and the
    last simplex."""
    if p < 0 or q < 0:
        raise ContractError("prism dimensions must be non-negative")
    return list(_filling(p, q))


@lru_cache(maxsize=None)
def filling_count(p: int, q: int) -> int:
    if p == 0 or q == 0:
        return 0
    return filling_count(p - 1, q - 1) + filling_count(p, q - 1) + 2 + filling_count(p - 1, q)


def check_filling_sequence(p: int, q: int, seq: Sequence | None = None) -> list[str]:
    """Problems with a filling sequence (empty list when valid)."""
    seq = filling_sequence(p, q) if seq is None else list(seq)
    problems = []
    interior = set(interior_paths(p, q))
    lam = last_simplex(p, q)
    if len(seq) % 2:
        problems.append("odd length")
    if set(seq) | {lam} != interior or len(set(seq)) != len(seq) or lam in seq:
        problems.append("does not list each non-last interior path exactly once")
    seen = set()
    for i in range(0, len(seq) - 1, 2):
        a, b = seq[i], seq[i + 1]
        fb = interior_faces(b)
        idx = [k for k, f in fb if f == a]
        if len(idx) != 1:
            problems.append(f"position {i + 1}: not a unique interior face of position {i + 2}")
        for path in (a, b):
            for k, f in interior_faces(path):
                if f == a and path == b:
                    continue
                if f not in seen:
                    problems.append(f"position {seq.index(path) + 1}: face {format_spath(f)} not yet present")
        seen.add(a)
        seen.add(b)
    return problems


# ---------------------------------------------------------------------------
# the vector field on product simplices

def product_path(cell_key) -> tuple[tuple, int, int]:
    x, y = cell_key
    p, q = x.base_dim, y.base_dim
    return spath_from_config((x.degs, y.degs), p, q), p, q


def _pair_from_path(path, x: Simplex, y: Simplex) -> tuple:
    dx, dy = config_from_spath(path)
    n = len(path) - 1
    return (Simplex(n, dx, x.base), Simplex(n, dy, y.base))


def ez_status(cell: Cell) -> Classification:
    x, y = cell.key
    path, p, q = product_path(cell.key)
    st = ez_classify(path)
    if st.kind == "last":
        return CRITICAL_CELL
    partner = _pair_from_path(st.partner, x, y)
    n = cell.degree + (1 if st.kind == "D" else -1)
    return Classification(SOURCE if st.kind == "D" else TARGET, Cell(n, partner))


def ez_lyapunov(cell: Cell):
    """Base dimension, then fiber dimension, then points above the path."""
    x, y = cell.key
    path, p, q = product_path(cell.key)
    return (q, p, prism_lyapunov(path, p, q))


def lambda_cell(sigma_dim: int, sigma, tau_dim: int, tau) -> tuple:
    """Key of the last simplex of the prism ``sigma x tau``."""
    p, q = sigma_dim, tau_dim
    n = p + q
    return (Simplex(n, tuple(range(n - 1, p - 1, -1)), sigma),
            Simplex(n, tuple(range(p - 1, -1, -1)), tau))


def ez_vector_field(X: SimplicialSet, Y: SimplicialSet, max_degree: int | None = None):
    """The Eilenberg-Zilber field on normalized chains of ``X x Y`` and its
    Lyapunov certificate."""
    crit = None
    if X.enumerable and Y.enumerable:
        def crit(m):
            out = []
            for p in range(m + 1):
                for s in X.nondegenerate(p):
                    for t in Y.nondegenerate(m - p):
                        out.append(lambda_cell(p, s, m - p, t))
            return out
    degs = None
    if max_degree is not None:
        degs = (0, max_degree)
    elif X.max_dim is not None and Y.max_dim is not None:
        degs = (0, X.max_dim + Y.max_dim)
    V = DiscreteVectorField(rule=ez_status, critical_basis=crit, critical_degrees=degs,
                            name="Eilenberg-Zilber")
    return V, Lyapunov(ez_lyapunov)


# ---------------------------------------------------------------------------
# tensor products

def tensor_complex(A: CellularComplex, B: CellularComplex, name: str = "") -> CellularComplex:
    """``A (x) B`` with keys ``(p, a, b)``, ``a`` of degree p, and the Koszul differential."""
    def bd(m, key):
        p, a, b = key
        acc = {}
        for a2, v in A.boundary_raw(p, a).items():
            acc[(p - 1, a2, b)] = v
        s = -1 if p % 2 else 1
        for b2, v in B.boundary_raw(m - p, b).items():
            k = (p, a, b2)
            acc[k] = acc.get(k, 0) + s * v
        return acc

    def contains(m, key):
        p, a, b = key
        return A.contains(p, a) and B.contains(m - p, b)

    name = name or f"{A.name}(x){B.name}"
    if A.enumerable and B.enumerable and A.degrees is not None and B.degrees is not None:
        lo = A.degrees[0] + B.degrees[0]
        hi = A.degrees[1] + B.degrees[1]

        def basis(m):
            out = []
            for p in range(A.degrees[0], A.degrees[1] + 1):
                for a in A.basis(p):
                    for b in B.basis(m - p):
                        out.append((p, a, b))
            return out
        return CellularComplex(bd, basis, contains, (lo, hi), name)
    return CellularComplex(bd, None, contains, None, name)


def _tensor_map(mA: ChainMorphism, mB: ChainMorphism, sign_by_degree: bool = False):
    """Evaluator of ``mA (x) mB`` with the Koszul sign ``(-1)^{|mB| |a|}``."""
    def ev(m, key):
        p, a, b = key
        ia = mA.image_raw(p, a)
        if not ia:
            return {}
        ib = mB.image_raw(m - p, b)
        s = -1 if (mB.shift % 2 and p % 2) else 1
        acc = {}
        pa = p + mA.shift
        for a2, u in ia.items():
            for b2, v in ib.items():
                acc[(pa, a2, b2)] = s * u * v
        return acc
    return ev


def tensor_of_reductions(rF: Reduction, rB: Reduction) -> Reduction:
    """``f = fF (x) fB``, ``g = gF (x) gB``, ``h = hF (x) id + gF fF (x) hB``."""
    big = tensor_complex(rF.big, rB.big)
    small = tensor_complex(rF.small, rB.small)
    f = ChainMorphism(big, small, 0, _tensor_map(rF.f, rB.f), "f")
    g = ChainMorphism(small, big, 0, _tensor_map(rF.g, rB.g), "g")
    idB = ChainMorphism(rB.big, rB.big, 0, lambda p, k: {k: 1}, "id")
    gf = ChainMorphism(rF.big, rF.big, 0, lambda p, k: rF.g(rF.f.on_cell(Cell(p, k))).raw(), "gf")
    t1 = _tensor_map(rF.h, idB)
    t2 = _tensor_map(gf, rB.h)

    def h_ev(m, key):
        return add_into(dict(t1(m, key)), t2(m, key))
    h = ChainMorphism(big, big, 1, h_ev, "h")
    return Reduction(big, small, f, g, h)


# ---------------------------------------------------------------------------
# Eilenberg-Zilber reductions

def _relabelled(rho: Reduction, P: Product, small: CellularComplex) -> Reduction:
    """Replace the critical cells (last simplices) by tensor keys ``(p, sigma, tau)``."""
    def to_tensor(key):
        x, y = key
        return (x.base_dim, x.base, y.base)

    C = rho.big

    def f_ev(m, key):
        return {to_tensor(k): v for k, v in rho.f.image_raw(m, key).items()}

    def g_ev(m, key):
        p, s, t = key
        return rho.g.image_raw(m, lambda_cell(p, s, m - p, t))

    f = ChainMorphism(C, small, 0, f_ev, "f")
    g = ChainMorphism(small, C, 0, g_ev, "g")
    return Reduction(C, small, f, g, rho.h)


def _critical_differential(rho: Reduction):
    def d_ev(m, key):
        p, s, t = key
        lam = lambda_cell(p, s, m - p, t)
        out = {}
        for k, v in rho.small.boundary_raw(m, lam).items():
            x, y = k
            out[(x.base_dim, x.base, y.base)] = v
        return out
    return d_ev


def _ez_core(P: Product, through_degree: int | None):
    big = nondegenerate_chain_complex(P, None if through_degree is None else through_degree + 1)
    V, cert = ez_vector_field(P.X, P.Y, None if through_degree is None else through_degree + 1)
    rho = build_reduction_gauss(big, V, cert)
    return big, V, cert, rho


def ez_reduction(X: SimplicialSet, Y: SimplicialSet, through_degree: int | None = None) -> Reduction:
    """``C(X x Y) => C(X) (x) C(Y)`` from the Eilenberg-Zilber vector field.

    The small differential produced by the vector field is compared with the
    Koszul differential on every generator (eagerly through ``through_degree``
    for enumerable inputs, otherwise whenever it is evaluated).
    """
    P = Product(X, Y)
    big, V, cert, rho = _ez_core(P, through_degree)
    top = None if through_degree is None else through_degree + 1
    A = nondegenerate_chain_complex(X, top)
    B = nondegenerate_chain_complex(Y, top)
    T = tensor_complex(A, B)
    crit_d = _critical_differential(rho)

    def checked(m, key):
        want = T.boundary_raw(m, key)
        got = crit_d(m, key)
        if dict(want) != got:
            raise InternalConsistencyError(f"critical differential differs from the tensor differential at {key!r}")
        return want

    small = CellularComplex(checked, (lambda m: T.basis(m)) if T.enumerable else None, T.contains,
                            T.degrees, T.name)
    red = _relabelled(rho, P, small)
    if small.enumerable and through_degree is not None:
        for m in range(0, through_degree + 1):
            for key in small.basis(m):
                small.boundary_raw(m, key)
    return red


def twisted_ez_reduction(F: SimplicialSet, B: SimplicialSet, G, action: Callable, tau,
                         through_degree: int | None = None) -> Reduction:
    """``C(F x_tau B) => C(F) (x)_t C(B)``: same vector field, the small
    differential is whatever the reduction produces (the twisted one)."""
    P = TwistedProduct(F, B, G, action, tau)
    big, V, cert, rho = _ez_core(P, through_degree)
    top = None if through_degree is None else through_degree + 1
    A = nondegenerate_chain_complex(F, top)
    Bc = nondegenerate_chain_complex(B, top)
    T = tensor_complex(A, Bc)
    small = CellularComplex(_critical_differential(rho), (lambda m: T.basis(m)) if T.enumerable else None,
                            T.contains, T.degrees, T.name + "-twisted")
    return _relabelled(rho, P, small)


# ---------------------------------------------------------------------------
# classical formulas

def shuffles(p: int, q: int):
    """``(alpha, beta, sign)`` for every (p,q)-shuffle of ``0..p+q-1``; alpha has p entries."""
    n = p + q
    for alpha in itertools.combinations(range(n), p):
        sa = set(alpha)
        beta = tuple(i for i in range(n) if i not in sa)
        inv = sum(1 for a in alpha for b in beta if a > b)
        yield alpha, beta, (-1 if inv % 2 else 1)


def _front(X: SimplicialSet, x: Simplex, i: int) -> Simplex:
    while x.dim > i:
        x = X.face(x.dim, x)
    return x


def _back(X: SimplicialSet, x: Simplex, j: int) -> Simplex:
    while x.dim > j:
        x = X.face(0, x)
    return x


def aw(X: SimplicialSet, Y: SimplicialSet, x: Simplex, y: Simplex) -> Chain:
    """Alexander-Whitney: ``sum_i front_i(x) (x) back_{n-i}(y)``, degenerate terms dropped."""
    if x.dim != y.dim:
        raise ContractError("aw needs simplices of equal dimension")
    n = x.dim
    acc = {}
    for i in range(n + 1):
        a = _front(X, x, i)
        b = _back(Y, y, n - i)
        if not a.degs and not b.degs:
            acc[(i, a.base, b.base)] = acc.get((i, a.base, b.base), 0) + 1
    return Chain(n, acc)


def eml(p: int, sigma, q: int, tau) -> Chain:
    """Eilenberg-MacLane shuffle map on the generator ``sigma (x) tau``."""
    acc = {}
    x = Simplex(p, (), sigma)
    y = Simplex(q, (), tau)
    for alpha, beta, sgn in shuffles(p, q):
        a = apply_degeneracies(sorted(beta, reverse=True), x)
        b = apply_degeneracies(sorted(alpha, reverse=True), y)
        z = canonical_pair(a, b)
        if not z.degs:
            acc[z.base] = acc.get(z.base, 0) + sgn
    return Chain(p + q, acc)


def shi(X: SimplicialSet, Y: SimplicialSet, x: Simplex, y: Simplex) -> Chain:
    """Shih's closed formula for the Eilenberg-Zilber homotopy, degenerate terms dropped."""
    if x.dim != y.dim:
        raise ContractError("shi needs simplices of equal dimension")
    n = x.dim
    acc = {}
    for r in range(n):
        for s in range(n - r):
            k = n - r - s
            xa = degeneracy(k - 1, _front(X, x, n - r))
            yb = y
            for i in range(n - r - 1, n - r - s - 1, -1):
                yb = Y.face(i, yb)
            for alpha, beta, sgn in shuffles(s + 1, r):
                a = apply_degeneracies([b + k for b in beta], xa)
                b = apply_degeneracies([a_ + k for a_ in alpha], yb)
                z = canonical_pair(a, b)
                if z.degs:
                    continue
                sign = sgn * (-1 if k % 2 else 1)
                acc[z.base] = acc.get(z.base, 0) + sign
    return Chain(n + 1, acc)


def compare_with_classical(X: SimplicialSet, Y: SimplicialSet, through_degree: int) -> dict:
    """Cell-wise comparison of the vector-field reduction with AW, EML and SHI.

    Returns mismatch lists under ``"f=AW"``, ``"g=EML"``, ``"h=SHI"`` plus the
    identity report under ``"identities"``.
    """
    from .reduction import verify_reduction
    rho = ez_reduction(X, Y, through_degree)
    big = rho.big
    out = {"f=AW": [], "g=EML": [], "h=SHI": []}
    cells = [c for c in big.cells() if c.degree <= through_degree]
    for c in cells:
        x, y = c.key
        if rho.f.on_cell(c) != aw(X, Y, x, y):
            out["f=AW"].append(c)
        if rho.h.on_cell(c) != shi(X, Y, x, y):
            out["h=SHI"].append(c)
    small_cells = [c for c in rho.small.cells() if c.degree <= through_degree]
    for a in small_cells:
        p, s, t = a.key
        if rho.g.on_cell(a) != eml(p, s, a.degree - p, t):
            out["g=EML"].append(a)
    out["identities"] = verify_reduction(rho, cells, small_cells)
    return out


# ---------------------------------------------------------------------------
# naturality

@dataclass
class NaturalityReport:
    """``pairing``: combinatorial compatibility of ``phi x psi`` with the two
    fields; ``chain``: commutation of ``phi x psi`` with f, g and h."""

    pairing: Report
    chain: Report

    @property
    def ok(self) -> bool:
        return self.chain.ok

    @property
    def pairs_preserved(self) -> bool:
        return self.pairing.ok


def naturality_check(phi: SimplicialMorphism, psi: SimplicialMorphism, samples: Iterable[Simplex],
                     chain_level: bool = True) -> NaturalityReport:
    """Compare the Eilenberg-Zilber reductions of ``X x Y`` and ``X' x Y'`` along ``phi x psi``.

    Pairing: for a sampled non-degenerate ``z`` with image ``z'``, a pair
    ``(z, V z)`` with both images non-degenerate must map onto a pair of the
    target field, and a paired ``z'`` must come from such a pair.  Pairs that
    collapse to degenerate simplices vanish in normalized chains.

    Chain level: ``F f = f' F``, ``F h = h' F`` on the samples and
    ``F g = g' F`` on generators met by ``f`` of the samples, where ``F`` is
    the induced map on normalized chains.
    """
    samples = list(samples)
    pairing = Report()
    for z in samples:
        pairing.checked += 1
        cell = Cell(z.dim, z.base)
        st = ez_status(cell)
        img = _image(phi, psi, z)
        pimg = None
        if st.partner is not None:
            pz = st.partner
            pimg = _image(phi, psi, Simplex(pz.degree, (), pz.key))
        if img.degs:
            continue
        ist = ez_status(Cell(img.dim, img.base))
        if pimg is not None and not pimg.degs:
            if ist.kind != st.kind:
                pairing.add("pair not mapped to a pair", cell, (st.kind, ist.kind))
            elif ist.partner != Cell(pimg.dim, pimg.base):
                pairing.add("partner not preserved", cell)
        elif ist.kind != "critical":
            pairing.add("image paired but source pair collapses", cell, ist.kind)
    chain = Report()
    if chain_level:
        rho = ez_reduction(phi.source, psi.source)
        rho2 = ez_reduction(phi.target, psi.target)

        def F(ch: Chain) -> Chain:
            acc: dict = {}
            for (x, y), v in ch.raw().items():
                w = canonical_pair(phi(x), psi(y))
                if not w.degs:
                    acc[w.base] = acc.get(w.base, 0) + v
            return Chain(ch.degree, acc)

        def FT(ch: Chain) -> Chain:
            acc: dict = {}
            for (p, a, b), v in ch.raw().items():
                x, y = phi(Simplex(p, (), a)), psi(Simplex(ch.degree - p, (), b))
                if not x.degs and not y.degs:
                    k = (p, x.base, y.base)
                    acc[k] = acc.get(k, 0) + v
            return Chain(ch.degree, acc)

        gens = set()
        for z in samples:
            chain.checked += 1
            c = Chain.of(Cell(z.dim, z.base))
            fc = rho.f(c)
            gens.update(fc.cells())
            if FT(fc) != rho2.f(F(c)):
                chain.add("Ff=f'F", Cell(z.dim, z.base))
            if F(rho.h(c)) != rho2.h(F(c)):
                chain.add("Fh=h'F", Cell(z.dim, z.base))
        for a in sorted(gens, key=repr):
            chain.checked += 1
            c = Chain.of(a)
            if F(rho.g(c)) != rho2.g(FT(c)):
                chain.add("Fg=g'F", a)
    return NaturalityReport(pairing, chain)


def _image(phi, psi, z: Simplex) -> Simplex:
    x, y = split_pair(z)
    return canonical_pair(phi(x), psi(y))


# ---------------------------------------------------------------------------
# lens spaces: K(Z,1) twisted over S^2

@dataclass
class LensPipeline:
    k: int
    twisted: Reduction
    fiber: Reduction
    tensor: Reduction
    perturbed: Reduction
    total: Reduction


def lens_space_pipeline(k: int) -> LensPipeline:
    """``K(Z,1) x_tau S^2`` with ``tau(s) = [k]`` reduced to four generators.

    Twisted EZ reduction, then the tensor product of the reduction of
    ``K(Z,1)`` onto its two critical cells with the identity of ``C(S^2)``,
    perturbed by the twist and composed with the first reduction.
    """
    K = KZ1()
    S2 = Sphere(2)
    tau = twisting_from_nondegenerate(K, lambda b: from_bar((k,)), f"tau_{k}")
    twisted = twisted_ez_reduction(K, S2, K, K.mul, tau)
    CK = nondegenerate_chain_complex(K)
    V, cert = kz1_vf()
    fiber = build_reduction_gauss(CK, V, cert)
    base = identity_reduction(nondegenerate_chain_complex(S2))
    tensor = tensor_of_reductions(fiber, base)
    tw_small = twisted.small
    untw = tensor.big

    def dhat(m, key):
        return add_into(dict(tw_small.boundary_raw(m, key)), untw.boundary_raw(m, key), -1)

    delta = ChainMorphism(untw, untw, -1, dhat, "twist")
    # the twist lowers the base degree (at most 2) and h keeps it
    pert = Perturbation(delta, lambda cell: 3)
    perturbed = perturb(tensor, pert, perturbed_big=tw_small)
    total = compose_reductions(twisted, perturbed)
    return LensPipeline(k, twisted, fiber, tensor, perturbed, total)
