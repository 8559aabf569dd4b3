"""Simplicial sets with simplices in canonical (Eilenberg triple) form.

A simplex is a non-degenerate base simplex together with the set of
degeneracy indices applied to it.  Internally every degeneracy word is
handled through its surjection sequence: the simplex ``eta_D x`` of
dimension ``n`` over a base of dimension ``q`` corresponds to the
non-decreasing surjection ``s: [0..n] -> [0..q]`` with ``s[j] == s[j+1]``
exactly for ``j`` in ``D``.  Faces delete an entry of ``s``; degeneracies
repeat one.  This single representation owns all face/degeneracy
commutation rules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, NamedTuple, Sequence

from .core_complex import Cell, CellularComplex, ContractError, Report
from .dvf import CRITICAL_CELL, SOURCE, TARGET, Classification, DiscreteVectorField, Lyapunov


class TwistingError(ValueError):
    """A twisting function violates one of its defining identities."""


class Simplex(NamedTuple):
    """``eta_{degs[0]} ... eta_{degs[-1]} base`` with ``degs`` strictly decreasing."""

    dim: int
    degs: tuple
    base: Any

    @property
    def base_dim(self) -> int:
        return self.dim - len(self.degs)

    @property
    def degenerate(self) -> bool:
        return bool(self.degs)

    def __repr__(self) -> str:
        return format_simplex(self)


def nd(dim: int, base) -> Simplex:
    return Simplex(dim, (), base)


def format_simplex(s: Simplex, base_fmt: Callable = repr) -> str:
    """``eta_3 eta_1 base``."""
    b = base_fmt(s.base)
    if not s.degs:
        return b
    return " ".join(f"eta_{i}" for i in s.degs) + " " + b


def format_bar(bar: Sequence[int]) -> str:
    return "[" + "|".join(str(a) for a in bar) + "]"


def surjection(degs: Iterable[int], dim: int) -> list[int]:
    """Surjection sequence ``[0..dim] -> [0..dim-|degs|]`` of a degeneracy set."""
    D = set(degs)
    s = [0]
    for j in range(dim):
        s.append(s[-1] if j in D else s[-1] + 1)
    return s


def degs_of(s: Sequence[int]) -> tuple:
    """Strictly decreasing degeneracy indices of a non-decreasing surjection sequence."""
    return tuple(j for j in range(len(s) - 2, -1, -1) if s[j] == s[j + 1])


def normalize_degeneracies(word: Sequence[int], dim_base: int) -> tuple:
    """Canonical form of an arbitrary word ``eta_{w0} eta_{w1} ...`` (outermost first)
    applied to a simplex of dimension ``dim_base``."""
    s = list(range(dim_base + 1))
    for i in reversed(word):
        if not 0 <= i < len(s):
            raise ContractError(f"degeneracy index {i} out of range in dimension {len(s) - 1}")
        s.insert(i + 1, s[i])
    return degs_of(s)


def degeneracy(i: int, x: Simplex) -> Simplex:
    """``eta_i x``."""
    if not 0 <= i <= x.dim:
        raise ContractError(f"degeneracy index {i} out of range for dimension {x.dim}")
    s = surjection(x.degs, x.dim)
    s.insert(i + 1, s[i])
    return Simplex(x.dim + 1, degs_of(s), x.base)


def apply_degeneracies(degs: Iterable[int], x: Simplex) -> Simplex:
    """Apply the canonical word ``degs`` (decreasing, outermost first) to ``x``."""
    for i in sorted(degs):
        x = degeneracy(i, x)
    return x


def _compose_surjections(outer: Sequence[int], inner: Sequence[int]) -> list[int]:
    return [inner[v] for v in outer]


class SimplicialSet:
    """Interface of a simplicial set presented by its non-degenerate simplices.

    Subclasses define ``nd_face(i, dim, base) -> Simplex`` and, when the
    set is enumerable, ``nondegenerate(dim)``; otherwise ``is_nondegenerate``.
    """

    name = "X"
    enumerable = True
    max_dim: int | None = None

    def nondegenerate(self, dim: int) -> list:
        raise ContractError(f"{self.name} has no enumerable basis")

    def is_nondegenerate(self, dim: int, base) -> bool:
        return base in set(self.nondegenerate(dim))

    def nd_face(self, i: int, dim: int, base) -> Simplex:
        raise NotImplementedError

    def face(self, i: int, x: Simplex) -> Simplex:
        return canonical_face(self, i, x)

    def simplices(self, dim: int) -> list[Simplex]:
        """All simplices of dimension ``dim``, degenerate ones included."""
        out = []
        top = dim if self.max_dim is None else min(dim, self.max_dim)
        for q in range(top + 1):
            bases = self.nondegenerate(q)
            if not bases:
                continue
            for D in itertools.combinations(range(dim), dim - q):
                degs = tuple(sorted(D, reverse=True))
                out.extend(Simplex(dim, degs, b) for b in bases)
        return sorted(out)

    def contains(self, x: Simplex) -> bool:
        return self.is_nondegenerate(x.base_dim, x.base)

    def __repr__(self) -> str:
        return f"<{self.name}>"


def canonical_face(X: SimplicialSet, i: int, x: Simplex) -> Simplex:
    """``d_i x`` in canonical form."""
    n = x.dim
    if n < 1 or not 0 <= i <= n:
        raise ContractError(f"face index {i} out of range for dimension {n}")
    s = surjection(x.degs, n)
    v = s[i]
    rest = s[:i] + s[i + 1:]
    if (i > 0 and s[i - 1] == v) or (i < n and s[i + 1] == v):
        return Simplex(n - 1, degs_of(rest), x.base)
    # value v disappears: the face hits the base simplex
    rest = [w - 1 if w > v else w for w in rest]
    y = X.nd_face(v, x.base_dim, x.base)
    t = surjection(y.degs, y.dim)
    return Simplex(n - 1, degs_of(_compose_surjections(rest, t)), y.base)


def face(X: SimplicialSet, i: int, x: Simplex) -> Simplex:
    return X.face(i, x)


# ---------------------------------------------------------------------------
# built-in models

class StandardSimplex(SimplicialSet):
    """``Delta^n``: non-degenerate simplices are increasing vertex tuples."""

    def __init__(self, n: int):
        self.n = n
        self.max_dim = n
        self.name = f"Delta^{n}"

    def nondegenerate(self, dim: int) -> list:
        if dim < 0 or dim > self.n:
            return []
        return list(itertools.combinations(range(self.n + 1), dim + 1))

    def is_nondegenerate(self, dim, base) -> bool:
        return (isinstance(base, tuple) and len(base) == dim + 1
                and all(0 <= a <= self.n for a in base)
                and all(base[j] < base[j + 1] for j in range(dim)))

    def nd_face(self, i, dim, base) -> Simplex:
        return Simplex(dim - 1, (), base[:i] + base[i + 1:])

    def vertex_simplex(self, seq: Sequence[int]) -> Simplex:
        """The simplex with (non-decreasing) vertex sequence ``seq``."""
        return vertex_simplex(seq)


def vertex_simplex(seq: Sequence[int]) -> Simplex:
    seq = tuple(seq)
    if any(seq[j] > seq[j + 1] for j in range(len(seq) - 1)):
        raise ContractError("vertex sequence must be non-decreasing")
    base = tuple(sorted(set(seq)))
    rank = {v: k for k, v in enumerate(base)}
    return Simplex(len(seq) - 1, degs_of([rank[v] for v in seq]), base)


def vertices_of(x: Simplex) -> tuple:
    """Vertex sequence of a simplex of a standard simplex (or its boundary)."""
    return tuple(x.base[v] for v in surjection(x.degs, x.dim))


class BoundarySimplex(StandardSimplex):
    """``boundary Delta^n``."""

    def __init__(self, n: int):
        super().__init__(n)
        self.max_dim = n - 1
        self.name = f"dDelta^{n}"

    def nondegenerate(self, dim):
        return [] if dim >= self.n else super().nondegenerate(dim)

    def is_nondegenerate(self, dim, base):
        return dim < self.n and super().is_nondegenerate(dim, base)


class Sphere(SimplicialSet):
    """Minimal model of ``S^n``: a base point ``'*'`` and one ``n``-simplex ``'s'``."""

    def __init__(self, n: int):
        if n < 1:
            raise ContractError("sphere dimension must be >= 1")
        self.n = n
        self.max_dim = n
        self.name = f"S^{n}"

    def nondegenerate(self, dim):
        if dim == 0:
            return ["*"]
        if dim == self.n:
            return ["s"]
        return []

    def is_nondegenerate(self, dim, base):
        return (dim == 0 and base == "*") or (dim == self.n and base == "s")

    def nd_face(self, i, dim, base):
        return base_point(dim - 1)

    def base_point_simplex(self, dim: int) -> Simplex:
        return base_point(dim)


def base_point(dim: int) -> Simplex:
    """Totally degenerate simplex over the vertex ``'*'``."""
    return Simplex(dim, tuple(range(dim - 1, -1, -1)), "*")


class ProjectivePlane(SimplicialSet):
    """Small model of the real projective plane: ``*``, an edge ``sigma`` and a
    triangle ``tau`` with faces ``(sigma, eta_0 *, sigma)``."""

    max_dim = 2
    name = "RP2"
    _cells = {0: ["*"], 1: ["sigma"], 2: ["tau"]}

    def nondegenerate(self, dim):
        return list(self._cells.get(dim, []))

    def nd_face(self, i, dim, base):
        if base == "sigma":
            return nd(0, "*")
        if i == 1:
            return base_point(1)
        return nd(1, "sigma")


class KZ1(SimplicialSet):
    """``K(Z,1)`` as a bar construction: ``n``-simplices are bars ``[a1|...|an]``.

    Non-degenerate bars have nonzero entries; a zero at position ``j`` (from 0)
    is the degeneracy ``eta_j``.  The set is a simplicial abelian group under
    entrywise addition.
    """

    enumerable = False
    max_dim = None
    name = "K(Z,1)"

    def is_nondegenerate(self, dim, base):
        return isinstance(base, tuple) and len(base) == dim and all(
            isinstance(a, int) and a != 0 for a in base)

    def nd_face(self, i, dim, base):
        return from_bar(bar_face(i, base))

    def identity(self, dim: int) -> Simplex:
        return Simplex(dim, tuple(range(dim - 1, -1, -1)), ())

    def mul(self, a: Simplex, b: Simplex) -> Simplex:
        if a.dim != b.dim:
            raise ContractError("group elements of different dimensions")
        return from_bar([x + y for x, y in zip(to_bar(a), to_bar(b))])

    def inv(self, a: Simplex) -> Simplex:
        return from_bar([-x for x in to_bar(a)])


def bar_face(i: int, bar: Sequence[int]) -> tuple:
    """Face operator on bars (entries may be zero)."""
    n = len(bar)
    if not 0 <= i <= n or n == 0:
        raise ContractError(f"face index {i} out of range for dimension {n}")
    if i == 0:
        return tuple(bar[1:])
    if i == n:
        return tuple(bar[:-1])
    return tuple(bar[:i - 1]) + (bar[i - 1] + bar[i],) + tuple(bar[i + 1:])


def bar_degeneracy(i: int, bar: Sequence[int]) -> tuple:
    return tuple(bar[:i]) + (0,) + tuple(bar[i:])


def from_bar(bar: Sequence[int]) -> Simplex:
    bar = tuple(bar)
    degs = tuple(j for j in range(len(bar) - 1, -1, -1) if bar[j] == 0)
    return Simplex(len(bar), degs, tuple(a for a in bar if a != 0))


def to_bar(x: Simplex) -> tuple:
    out, it = [], iter(x.base)
    D = set(x.degs)
    for j in range(x.dim):
        out.append(0 if j in D else next(it))
    return tuple(out)


# ---------------------------------------------------------------------------
# products

def canonical_pair(x: Simplex, y: Simplex) -> Simplex:
    """The product simplex ``(x, y)`` in canonical form over a non-degenerate pair."""
    if x.dim != y.dim:
        raise ContractError("product simplex components must have equal dimensions")
    common = set(x.degs) & set(y.degs)
    n = x.dim
    if not common:
        return Simplex(n, (), (x, y))
    sx, sy = surjection(x.degs, n), surjection(y.degs, n)
    keep = [j for j in range(n + 1) if j - 1 not in common]
    sx2 = [sx[j] for j in keep]
    sy2 = [sy[j] for j in keep]
    m = len(keep) - 1
    return Simplex(n, tuple(sorted(common, reverse=True)),
                   (Simplex(m, degs_of(sx2), x.base), Simplex(m, degs_of(sy2), y.base)))


def split_pair(z: Simplex) -> tuple[Simplex, Simplex]:
    """Components ``(x, y)`` of a product simplex in any canonical form."""
    x, y = z.base
    return apply_degeneracies(z.degs, x), apply_degeneracies(z.degs, y)


class Product(SimplicialSet):
    """Cartesian product; non-degenerate simplices are pairs ``(x, y)`` whose
    degeneracy sets are disjoint."""

    def __init__(self, X: SimplicialSet, Y: SimplicialSet):
        self.X, self.Y = X, Y
        self.enumerable = X.enumerable and Y.enumerable
        self.max_dim = None if X.max_dim is None or Y.max_dim is None else X.max_dim + Y.max_dim
        self.name = f"{X.name}x{Y.name}"

    def nondegenerate(self, dim):
        if not self.enumerable:
            raise ContractError(f"{self.name} has no enumerable basis")
        out = []
        for p in range(dim + 1):
            xs = self.X.nondegenerate(p)
            if not xs:
                continue
            for q in range(dim - p, dim + 1):
                ys = self.Y.nondegenerate(q)
                if not ys:
                    continue
                for Dx in itertools.combinations(range(dim), dim - p):
                    rest = [j for j in range(dim) if j not in Dx]
                    for Dy in itertools.combinations(rest, dim - q):
                        dx, dy = tuple(reversed(Dx)), tuple(reversed(Dy))
                        for a in xs:
                            for b in ys:
                                out.append((Simplex(dim, dx, a), Simplex(dim, dy, b)))
        return out

    def is_nondegenerate(self, dim, base):
        if not (isinstance(base, tuple) and len(base) == 2):
            return False
        x, y = base
        return (isinstance(x, Simplex) and isinstance(y, Simplex) and x.dim == y.dim == dim
                and not set(x.degs) & set(y.degs) and self.X.contains(x) and self.Y.contains(y))

    def nd_face(self, i, dim, base):
        x, y = base
        return canonical_pair(self.X.face(i, x), self.Y.face(i, y))


def product(X: SimplicialSet, Y: SimplicialSet) -> Product:
    return Product(X, Y)


@dataclass(frozen=True)
class TwistingFunction:
    """``evaluator(b)`` for a simplex ``b`` of the base of dimension ``p > 0``
    returns an element of the group in dimension ``p - 1``."""

    evaluator: Callable[[Simplex], Simplex]
    name: str = "tau"

    def __call__(self, b: Simplex) -> Simplex:
        return self.evaluator(b)


def twisting_from_nondegenerate(G, values: Callable[[Simplex], Simplex], name: str = "tau") -> TwistingFunction:
    """Extend values on non-degenerate simplices by ``tau(eta_0 b) = e`` and
    ``tau(eta_{i+1} b) = eta_i tau(b)``."""
    def ev(b: Simplex) -> Simplex:
        if b.dim < 1:
            raise ContractError("twisting functions are defined in positive dimensions")
        if 0 in b.degs:
            return G.identity(b.dim - 1)
        t = values(Simplex(b.base_dim, (), b.base))
        return apply_degeneracies([i - 1 for i in b.degs], t)
    return TwistingFunction(ev, name)


def trivial_twisting(G) -> TwistingFunction:
    return TwistingFunction(lambda b: G.identity(b.dim - 1), "trivial")


def verify_twisting(tau: TwistingFunction, B: SimplicialSet, G, samples: Iterable[Simplex]) -> Report:
    """Check the four twisting identities on each sampled base simplex."""
    rep = Report()
    for b in samples:
        p = b.dim
        if p < 1:
            continue
        rep.checked += 1
        cell = Cell(p, b)
        tb = tau(b)
        if tb.dim != p - 1:
            rep.add("dimension of tau(b)", cell, tb)
            continue
        if p >= 2:
            lhs = G.face(0, tb)
            rhs = G.mul(G.inv(tau(B.face(0, b))), tau(B.face(1, b)))
            if lhs != rhs:
                rep.add("d0 tau(b) = tau(d0 b)^-1 tau(d1 b)", cell, (lhs, rhs))
            for i in range(1, p):
                if G.face(i, tb) != tau(B.face(i + 1, b)):
                    rep.add(f"d{i} tau(b) = tau(d{i + 1} b)", cell)
        for i in range(p):
            if degeneracy(i, tb) != tau(degeneracy(i + 1, b)):
                rep.add(f"eta{i} tau(b) = tau(eta{i + 1} b)", cell)
        if tau(degeneracy(0, b)) != G.identity(p):
            rep.add("tau(eta0 b) = e", cell)
    return rep


class TwistedProduct(Product):
    """``F x_tau B``: as the product, except ``d_0 (f, b) = (tau(b) . d_0 f, d_0 b)``."""

    def __init__(self, F: SimplicialSet, B: SimplicialSet, G, action: Callable, tau: TwistingFunction):
        super().__init__(F, B)
        self.G, self.action, self.tau = G, action, tau
        self.name = f"{F.name}x_{tau.name}{B.name}"

    def nd_face(self, i, dim, base):
        f, b = base
        if i == 0:
            return canonical_pair(self.action(self.tau(b), self.X.face(0, f)), self.Y.face(0, b))
        return canonical_pair(self.X.face(i, f), self.Y.face(i, b))


def twisted_product(F, B, G, action, tau: TwistingFunction, samples: Iterable[Simplex] | None = None) -> TwistedProduct:
    if samples is not None:
        rep = verify_twisting(tau, B, G, samples)
        if not rep.ok:
            v = rep.violations[0]
            raise TwistingError(f"twisting identity '{v.check}' fails at {v.cell.key!r}")
    return TwistedProduct(F, B, G, action, tau)


# ---------------------------------------------------------------------------
# chain complexes

def nondegenerate_chain_complex(X: SimplicialSet, through_degree: int | None = None) -> CellularComplex:
    """Normalized chains: basis = non-degenerate simplices, degenerate faces dropped."""
    top = through_degree
    if X.max_dim is not None:
        top = X.max_dim if top is None else min(top, X.max_dim)

    def bd(p, base):
        acc: dict = {}
        if p == 0:
            return acc
        x = Simplex(p, (), base)
        for i in range(p + 1):
            y = X.face(i, x)
            if not y.degs:
                acc[y.base] = acc.get(y.base, 0) + (-1 if i % 2 else 1)
        return acc

    def contains(p, base):
        return p >= 0 and (top is None or p <= top) and X.is_nondegenerate(p, base)

    if X.enumerable and top is not None:
        return CellularComplex(bd, lambda p: X.nondegenerate(p) if 0 <= p <= top else [], contains,
                               (0, top), f"C({X.name})")
    return CellularComplex(bd, None, contains, None, f"C({X.name})")


def full_chain_complex(X: SimplicialSet, through_degree: int) -> CellularComplex:
    """Unnormalized chains: every simplex, degenerate or not, is a basis cell."""
    top = through_degree

    def bd(p, x):
        acc: dict = {}
        if p == 0:
            return acc
        for i in range(p + 1):
            y = X.face(i, x)
            acc[y] = acc.get(y, 0) + (-1 if i % 2 else 1)
        return acc

    def contains(p, x):
        return isinstance(x, Simplex) and x.dim == p and 0 <= p <= top and X.contains(x)

    basis = (lambda p: X.simplices(p) if 0 <= p <= top else []) if X.enumerable else None
    return CellularComplex(bd, basis, contains, (0, top) if X.enumerable else None, f"Cfull({X.name})")


def first_run(degs: Iterable[int]) -> tuple[int, int]:
    """``(start, length)`` of the first run of consecutive degeneracy indices."""
    D = sorted(degs)
    a = D[0]
    r = 1
    while r < len(D) and D[r] == a + r:
        r += 1
    return a, r


def genuine_dimension(x: Simplex) -> int:
    return x.base_dim


def normalization_partner(x: Simplex) -> Classification:
    """Pairing of the normalization field on a single simplex (no truncation)."""
    if not x.degs:
        return CRITICAL_CELL
    a, r = first_run(x.degs)
    D = sorted(x.degs)
    if r % 2 == 1:
        # first value repeated an even number of times: add one repetition
        new = list(range(a, a + r + 1)) + [d + 1 for d in D[r:]]
        return Classification(SOURCE, Cell(x.dim + 1, Simplex(x.dim + 1, tuple(sorted(new, reverse=True)), x.base)))
    new = list(range(a, a + r - 1)) + [d - 1 for d in D[r:]]
    return Classification(TARGET, Cell(x.dim - 1, Simplex(x.dim - 1, tuple(sorted(new, reverse=True)), x.base)))


def normalization_vf(X: SimplicialSet, through_degree: int | None = None):
    """Vector field on the unnormalized chains whose critical cells are the
    non-degenerate simplices.  Returns ``(field, Lyapunov certificate)``."""
    def rule(cell: Cell) -> Classification:
        c = normalization_partner(cell.key)
        if c.kind == SOURCE and through_degree is not None and c.partner.degree > through_degree:
            return CRITICAL_CELL
        return c

    V = DiscreteVectorField(rule=rule, name="normalization")
    return V, Lyapunov(lambda c: genuine_dimension(c.key))


def kz1_partner(bar: tuple) -> Classification:
    n = len(bar)
    if n == 0 or bar == (1,):
        return CRITICAL_CELL
    a = bar[0]
    if a == 1:
        b = bar[1]
        src = (b + 1,) + bar[2:] if b > 0 else bar[1:]
        return Classification(TARGET, Cell(n - 1, src))
    if a > 1:
        return Classification(SOURCE, Cell(n + 1, (1, a - 1) + bar[1:]))
    return Classification(SOURCE, Cell(n + 1, (1,) + bar))


def kz1_vf(through_degree: int | None = None):
    """Vector field on the normalized chains of K(Z,1) with critical cells
    ``[]`` and ``[1]``.  Returns ``(field, Lyapunov certificate)``."""
    def rule(cell: Cell) -> Classification:
        c = kz1_partner(cell.key)
        if c.kind == SOURCE and through_degree is not None and c.partner.degree > through_degree:
            return CRITICAL_CELL
        return c

    crit = {0: [()], 1: [(1,)]}
    V = DiscreteVectorField(rule=rule, critical_basis=lambda p: crit.get(p, []),
                            critical_degrees=(0, 1), name="K(Z,1)")
    return V, Lyapunov(lambda c: abs(c.key[0]) if c.key else 0)


@dataclass(frozen=True)
class SimplicialMorphism:
    """Map given on non-degenerate simplices; extended through degeneracies."""

    source: SimplicialSet
    target: SimplicialSet
    on_nondegenerate: Callable[[int, Any], Simplex]

    def __call__(self, x: Simplex) -> Simplex:
        y = self.on_nondegenerate(x.base_dim, x.base)
        return apply_degeneracies(x.degs, y)


def product_morphism(phi: SimplicialMorphism, psi: SimplicialMorphism) -> Callable[[Simplex], Simplex]:
    def ev(z: Simplex) -> Simplex:
        x, y = split_pair(z)
        return canonical_pair(phi(x), psi(y))
    return ev


def identity_map(X: SimplicialSet) -> SimplicialMorphism:
    return SimplicialMorphism(X, X, lambda d, b: Simplex(d, (), b))


def standard_map(n: int, m: int, vertex_map: Sequence[int]) -> SimplicialMorphism:
    """Map ``Delta^n -> Delta^m`` induced by a non-decreasing vertex map."""
    vm = tuple(vertex_map)

    def ev(d, base):
        return vertex_simplex([vm[v] for v in base])
    return SimplicialMorphism(StandardSimplex(n), StandardSimplex(m), ev)


MODELS: dict[str, Callable[..., SimplicialSet]] = {
    "simplex": StandardSimplex,
    "boundary": BoundarySimplex,
    "sphere": Sphere,
    "rp2": lambda: ProjectivePlane(),
    "kz1": lambda: KZ1(),
}


def register_model(name: str, factory: Callable[..., SimplicialSet]) -> None:
    MODELS[name] = factory
