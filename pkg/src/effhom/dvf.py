"""Discrete vector fields, V-paths, admissibility and the vector-field reduction.

A vector ``(sigma, tau)`` pairs a source cell with a target cell one degree
higher, sigma being a regular face of tau.  Unpaired cells are critical.  An
admissible field yields a reduction of the complex onto its critical cells,
built here either by block Gauss elimination or through the perturbation
lemma; both give the same morphisms.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, NamedTuple

from .core_complex import (Cell, CellularComplex, Chain, ChainMorphism, ContractError, add_into,
                           incidence, resolve_linear)
from .reduction import Perturbation, Reduction, perturb

SOURCE = "source"
TARGET = "target"
CRITICAL = "critical"


class Classification(NamedTuple):
    kind: str
    partner: Cell | None = None


CRITICAL_CELL = Classification(CRITICAL, None)


class RejectionError(ContractError):
    """A vector cannot be added to a field."""


class AdmissibilityError(RuntimeError):
    """The field is not admissible; ``witness`` carries the evidence."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class FiniteAcyclic:
    """Topological order on source cells (faces before the cells they hang off)
    plus the longest V-path length from each source."""

    order: tuple
    lengths: Mapping


@dataclass(frozen=True)
class Lyapunov:
    """Values that strictly decrease along every elementary V-step.

    ``function`` may return any totally ordered values (tuples compare
    lexicographically).  ``bound``, if given, maps a cell to an upper bound on
    V-path lengths from it.
    """

    function: Callable[[Cell], Any]
    bound: Callable[[Cell], int] | None = None


@dataclass(frozen=True)
class LoopWitness:
    """A closed V-path: sources ``cycle[i]`` with ``cycle[i+1]`` a face of ``V(cycle[i])``."""

    cycle: tuple
    targets: tuple = ()


@dataclass(frozen=True)
class LyapunovViolation:
    source: Cell
    face: Cell


class DiscreteVectorField:
    """Either an explicit finite set of vectors or a rule for lazily presented complexes.

    ``rule(cell)`` must return a :class:`Classification`.  ``critical_basis``,
    when given, enumerates the critical cells per degree so that the critical
    complex of a lazily presented complex can still be enumerable.
    """

    def __init__(self, pairs: Iterable[tuple[Cell, Cell]] = (), rule: Callable | None = None,
                 critical_basis: Callable[[int], Iterable] | None = None,
                 critical_degrees: tuple[int, int] | None = None, name: str = ""):
        self._v: dict[Cell, Cell] = {}
        self._vinv: dict[Cell, Cell] = {}
        for s, t in pairs:
            self._v[Cell(*s)] = Cell(*t)
            self._vinv[Cell(*t)] = Cell(*s)
        self.rule = rule
        self.critical_basis = critical_basis
        self.critical_degrees = critical_degrees
        self.name = name
        self._contexts: dict = {}

    @property
    def explicit(self) -> bool:
        return self.rule is None

    def classify(self, cell: Cell) -> Classification:
        if self.rule is not None:
            return self.rule(cell)
        t = self._v.get(cell)
        if t is not None:
            return Classification(SOURCE, t)
        s = self._vinv.get(cell)
        if s is not None:
            return Classification(TARGET, s)
        return CRITICAL_CELL

    def is_source(self, cell: Cell) -> bool:
        return self.classify(cell).kind == SOURCE

    def target_of(self, cell: Cell) -> Cell:
        c = self.classify(cell)
        if c.kind != SOURCE:
            raise ContractError(f"{cell!r} is not a source cell")
        return c.partner

    def pairs(self) -> list[tuple[Cell, Cell]]:
        if self.rule is not None:
            raise ContractError("a rule-based field has no finite list of vectors")
        return sorted(self._v.items())

    def __len__(self) -> int:
        return len(self._v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteVectorField):
            return NotImplemented
        if self.rule is not None or other.rule is not None:
            return self is other
        return self._v == other._v

    __hash__ = object.__hash__

    def __repr__(self) -> str:
        if self.rule is not None:
            return f"<DiscreteVectorField rule {self.name}>"
        return f"DiscreteVectorField({self.pairs()!r})"


def add_vector(V: DiscreteVectorField, sigma: Cell, tau: Cell, C: CellularComplex) -> DiscreteVectorField:
    """Return ``V`` extended by the vector ``(sigma, tau)`` after checking it is legal."""
    sigma, tau = Cell(*sigma), Cell(*tau)
    if not V.explicit:
        raise RejectionError("cannot add vectors to a rule-based field")
    if sigma.degree + 1 != tau.degree:
        raise RejectionError(f"degree condition: |{tau!r}| must be |{sigma!r}| + 1")
    for c in (sigma, tau):
        if not C.contains(c.degree, c.key):
            raise RejectionError(f"cell {c!r} is not in the complex")
    e = incidence(C, sigma, tau)
    if abs(e) != 1:
        raise RejectionError(f"regularity: incidence of {sigma!r} in {tau!r} is {e}, not +-1")
    for c in (sigma, tau):
        if c in V._v or c in V._vinv:
            raise RejectionError(f"uniqueness: cell {c!r} already occurs in the field")
    return DiscreteVectorField(list(V._v.items()) + [(sigma, tau)], name=V.name)


def _source_faces(C: CellularComplex, V: DiscreteVectorField, sigma: Cell, tau: Cell):
    """Source faces of tau other than sigma, with their incidences."""
    out = []
    p = sigma.degree
    for k, e in C.boundary_raw(tau.degree, tau.key).items():
        if k == sigma.key:
            continue
        c = Cell(p, k)
        if V.classify(c).kind == SOURCE:
            out.append((c, e))
    out.sort()
    return out


@dataclass
class VPaths:
    paths: list
    truncated: bool


def enumerate_v_paths(C: CellularComplex, V: DiscreteVectorField, sigma: Cell, max_len: int) -> VPaths:
    """All maximal V-paths from the source ``sigma``, each a list of vectors.

    Paths are cut at ``max_len`` vectors, in which case ``truncated`` is set.
    """
    sigma = Cell(*sigma)
    if V.classify(sigma).kind != SOURCE:
        raise ContractError(f"{sigma!r} is not a source cell")
    out, truncated = [], False
    stack = [[(sigma, V.target_of(sigma))]]
    while stack:
        path = stack.pop()
        s, t = path[-1]
        nxt = [c for c, _ in _source_faces(C, V, s, t)]
        if not nxt:
            out.append(path)
            continue
        if len(path) >= max_len:
            truncated = True
            out.append(path)
            continue
        for c in reversed(nxt):
            stack.append(path + [(c, V.target_of(c))])
    return VPaths(out, truncated)


def format_v_path(path, fmt: Callable = repr, halted: bool = True) -> str:
    """``s0 |-> t0 |-> s1 |-> ... |-> halt!``"""
    parts = []
    for s, t in path:
        parts += [fmt(s), fmt(t)]
    if halted:
        parts.append("halt!")
    return " ↦ ".join(parts)


def check_admissible(C: CellularComplex, V: DiscreteVectorField, lyapunov: Lyapunov | None = None,
                     sample: Iterable[Cell] | None = None):
    """Certify admissibility, or return a :class:`LoopWitness`.

    For an explicit field on an enumerable complex the graph of elementary
    V-steps is topologically sorted.  Otherwise the supplied Lyapunov function
    is checked on ``sample`` and the certificate is conditional on it.
    """
    if lyapunov is not None or not V.explicit:
        if lyapunov is None:
            raise ContractError("a Lyapunov function is required for rule-based fields")
        for s in (sample or ()):
            s = Cell(*s)
            cl = V.classify(s)
            if cl.kind != SOURCE:
                continue
            ls = lyapunov.function(s)
            for c, _ in _source_faces(C, V, s, cl.partner):
                if not lyapunov.function(c) < ls:
                    return LyapunovViolation(s, c)
        return lyapunov
    graph = {}
    for s, t in V.pairs():
        graph[s] = [c for c, _ in _source_faces(C, V, s, t)]
    ts = graphlib.TopologicalSorter({s: set(fs) for s, fs in graph.items()})
    try:
        order = tuple(ts.static_order())
    except graphlib.CycleError as exc:
        cyc = list(reversed(exc.args[1]))
        return LoopWitness(tuple(cyc), tuple(V.target_of(s) for s in cyc[:-1]))
    lengths = {}
    for s in order:
        lengths[s] = 1 + max((lengths[c] for c in graph[s]), default=0)
    return FiniteAcyclic(order, lengths)


def _certify(C, V, cert):
    if cert is None:
        cert = check_admissible(C, V)
    if isinstance(cert, (LoopWitness, LyapunovViolation)):
        raise AdmissibilityError(f"vector field is not admissible: {cert}", cert)
    return cert


class _Inverter:
    """Memoized inverse of the source/target block of the differential."""

    def __init__(self, C: CellularComplex, V: DiscreteVectorField, cert):
        self.C, self.V, self.cert = C, V, cert
        self.memo: dict = {}
        lyap = cert.function if isinstance(cert, Lyapunov) else None

        def step(s: Cell):
            t = V.target_of(s)
            e = C.boundary_raw(t.degree, t.key)[s.key]
            deps = []
            for c, e2 in _source_faces(C, V, s, t):
                if lyap is not None and not lyap(c) < lyap(s):
                    raise AdmissibilityError(f"Lyapunov value does not decrease from {s!r} to {c!r}",
                                             LyapunovViolation(s, c))
                deps.append((-e * e2, c))
            return {t.key: e}, deps

        self.step = step

    def __call__(self, s: Cell) -> dict:
        cert = self.cert

        def loop(path):
            raise AdmissibilityError(f"V-path loop {path[:6]}", LoopWitness(tuple(path)))

        limit = None
        if isinstance(cert, FiniteAcyclic):
            limit = cert.lengths.get(s, 1) + 1
        elif isinstance(cert, Lyapunov) and cert.bound is not None:
            limit = cert.bound(s) + 1

        def over(path):
            raise AdmissibilityError(f"V-path from {s!r} longer than its certified bound", tuple(path))
        return resolve_linear(s, self.step, self.memo, limit, loop, over)


def _inverter(C, V, cert) -> _Inverter:
    ctx = V._contexts.get(id(C))
    if ctx is None or ctx.C is not C or ctx.cert is not cert:
        ctx = _Inverter(C, V, cert)
        V._contexts[id(C)] = ctx
    return ctx


def invert_d21(C: CellularComplex, V: DiscreteVectorField, cert, sigma: Cell) -> Chain:
    """The unique chain of target cells whose source component of the boundary is ``sigma``."""
    sigma = Cell(*sigma)
    cert = _certify(C, V, cert)
    if V.classify(sigma).kind != SOURCE:
        raise ContractError(f"{sigma!r} is not a source cell")
    return Chain(sigma.degree + 1, _inverter(C, V, cert)(sigma))


def _critical_complex(C: CellularComplex, V: DiscreteVectorField, boundary: Callable, name: str):
    def is_crit(p, k):
        return C.contains(p, k) and V.classify(Cell(p, k)).kind == CRITICAL

    if V.critical_basis is not None:
        return CellularComplex(boundary, lambda p: list(V.critical_basis(p)), is_crit,
                               V.critical_degrees, name)
    if C.enumerable and C.degrees is not None:
        return CellularComplex(boundary, lambda p: [k for k in C.basis(p) if is_crit(p, k)],
                               None, C.degrees, name)
    return CellularComplex(boundary, None, is_crit, None, name)


def build_reduction_gauss(C: CellularComplex, V: DiscreteVectorField, cert=None) -> Reduction:
    """Reduce ``C`` onto its critical cells by Gauss elimination of the V-block.

    ``h`` is the inverse block on sources and zero elsewhere,
    ``f = crit o (id - d h)`` and ``g = (id - h d)`` on critical cells; the
    critical differential is ``crit o d o g``.
    """
    cert = _certify(C, V, cert)
    inv = _inverter(C, V, cert)

    def kind(p, k):
        return V.classify(Cell(p, k)).kind

    def h_ev(p, k):
        if kind(p, k) == SOURCE:
            return inv(Cell(p, k))
        return {}

    hm = ChainMorphism(C, C, 1, h_ev, "h")

    def g_ev(p, k):
        acc = {k: 1}
        add_into(acc, hm(Chain._wrap(p - 1, dict(C.boundary_raw(p, k)))).raw(), -1)
        return acc

    def crit(c: Chain) -> dict:
        return {k: v for k, v in c.raw().items() if kind(c.degree, k) == CRITICAL}

    def f_ev(p, k):
        x = Chain.of(Cell(p, k))
        return crit(x - C.d(hm(x)))

    small_holder = {}

    def d_ev(p, k):
        return crit(C.d(small_holder["g"].on_cell(Cell(p, k))))

    small = _critical_complex(C, V, d_ev, (C.name or "C") + "-critical")
    gm = ChainMorphism(small, C, 0, g_ev, "g")
    small_holder["g"] = gm
    fm = ChainMorphism(C, small, 0, f_ev, "f")
    return Reduction(C, small, fm, gm, hm)


def build_reduction_hpt(C: CellularComplex, V: DiscreteVectorField, cert=None) -> Reduction:
    """Same reduction obtained by perturbing a trivial one.

    Start from the differential keeping only the vector incidences, for which
    the field gives an obvious reduction onto the critical cells with zero
    differential, then perturb by the remaining part of ``d``.
    """
    cert = _certify(C, V, cert)

    def cls(p, k):
        return V.classify(Cell(p, k))

    def delta_ev(p, k):
        c = cls(p, k)
        if c.kind == TARGET:
            s = c.partner
            return {s.key: C.boundary_raw(p, k)[s.key]}
        return {}

    C0 = C.with_differential(delta_ev, (C.name or "C") + "-vector-part")

    def zero_d(p, k):
        return {}

    small0 = _critical_complex(C, V, zero_d, (C.name or "C") + "-critical")

    def h0_ev(p, k):
        c = cls(p, k)
        if c.kind == SOURCE:
            t = c.partner
            return {t.key: C.boundary_raw(t.degree, t.key)[k]}
        return {}

    def f0_ev(p, k):
        return {k: 1} if cls(p, k).kind == CRITICAL else {}

    rho0 = Reduction(C0, small0,
                     ChainMorphism(C0, small0, 0, f0_ev, "f0"),
                     ChainMorphism(small0, C0, 0, lambda p, k: {k: 1}, "g0"),
                     ChainMorphism(C0, C0, 1, h0_ev, "h0"))

    def dhat_ev(p, k):
        return add_into(dict(C.boundary_raw(p, k)), delta_ev(p, k), -1)

    dhat = ChainMorphism(C0, C0, -1, dhat_ev, "dhat")
    bound = None
    if isinstance(cert, FiniteAcyclic):
        per_degree: dict = {}
        for s, n in cert.lengths.items():
            per_degree[s.degree] = max(per_degree.get(s.degree, 0), n)
        top = max(per_degree.values(), default=0)

        def bound(cell):
            return max(per_degree.get(cell.degree - 1, 0), per_degree.get(cell.degree, 0), top) + 2
    return perturb(rho0, Perturbation(dhat, bound), perturbed_big=C)


@dataclass(frozen=True)
class Failure:
    """The reduction is not the reduction of any vector field."""

    reason: str
    cell: Cell | None = None


def recover_vector_field(rho: Reduction, cells: Iterable[Cell] | None = None):
    """Reconstruct the vector field a reduction comes from, or explain why none exists.

    A cell is a source iff ``h`` does not vanish on it; its target is the only
    cell of ``h(sigma)`` having sigma as a face.  For enumerable complexes the
    candidate field is then rebuilt into a reduction and compared with ``rho``.
    """
    C = rho.big
    cells = C.cells() if cells is None else [Cell(*c) for c in cells]
    V = DiscreteVectorField()
    for s in cells:
        hs = rho.h.on_cell(s)
        if not hs:
            continue
        cands = [Cell(s.degree + 1, k) for k in hs.keys() if C.boundary_raw(s.degree + 1, k).get(s.key, 0)]
        if len(cands) != 1:
            return Failure(f"{len(cands)} cells of h(sigma) have sigma as a face", s)
        t = cands[0]
        e = incidence(C, s, t)
        if abs(e) != 1:
            return Failure(f"incidence {e} is not a unit", s)
        if hs.coeff(t.key) != e:
            return Failure(f"coefficient {hs.coeff(t.key)} of the target in h(sigma) is not the incidence {e}", s)
        try:
            V = add_vector(V, s, t, C)
        except RejectionError as exc:
            return Failure(str(exc), s)
    small = rho.small
    crit_of = {}
    if small.enumerable:
        used = set()
        for a in small.cells():
            ga = rho.g.on_cell(a)
            outside = [c for c in ga.cells() if V.classify(c).kind == CRITICAL]
            if len(outside) != 1 or ga.coeff(outside[0].key) != 1:
                return Failure("g of a small generator does not contain exactly one critical cell", a)
            if outside[0] in used:
                return Failure("two small generators share a critical cell", a)
            used.add(outside[0])
            crit_of[a] = outside[0]
    if not C.enumerable or not small.enumerable:
        return V
    ncrit = sum(1 for c in cells if V.classify(c).kind == CRITICAL)
    if ncrit != len(crit_of):
        return Failure("critical cells and small generators are not in bijection")
    cert = check_admissible(C, V)
    if isinstance(cert, LoopWitness):
        return Failure("recovered field has a loop", cert.cycle[0])
    rebuilt = build_reduction_gauss(C, V, cert)
    back = {c.key: a.key for a, c in crit_of.items()}

    def relabel(ch: Chain) -> Chain:
        return Chain(ch.degree, {back[k]: v for k, v in ch.raw().items()})

    for c in cells:
        if rebuilt.h.on_cell(c) != rho.h.on_cell(c):
            return Failure("h differs from the vector-field reduction", c)
        if relabel(rebuilt.f.on_cell(c)) != rho.f.on_cell(c):
            return Failure("f differs from the vector-field reduction", c)
    for a, c in crit_of.items():
        if rebuilt.g.on_cell(c) != rho.g.on_cell(a):
            return Failure("g differs from the vector-field reduction", a)
    return V


def greedy_field(C: CellularComplex) -> DiscreteVectorField:
    """Pair cells along unit incidences of a finite complex, keeping the field admissible.

    Cells are scanned by degree then basis order; a candidate vector closing a
    loop is dropped.
    """
    V = DiscreteVectorField()
    used: set = set()
    for p in C.degree_range():
        for k in C.basis(p + 1) if p + 1 in C.degree_range() else ():
            t = Cell(p + 1, k)
            if t in used:
                continue
            for face, e in sorted(C.boundary_raw(p + 1, k).items(), key=lambda kv: repr(kv[0])):
                s = Cell(p, face)
                if abs(e) != 1 or s in used:
                    continue
                W = add_vector(V, s, t, C)
                if isinstance(check_admissible(C, W), LoopWitness):
                    continue
                V = W
                used.update((s, t))
                break
    return V
