import itertools
import os
import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given
from hypothesis import strategies as st

from randomcomplex import random_complex

from effhom import ContractError, InvalidComplexError, finite_complex
from effhom.cli.images import build_cubical, load_image
from effhom.matrix_reduce import (HomologyGroup, IntegerMatrix, MatrixLoop, MatrixOrder, MatrixVectorField,
                                  check_matrix_vf_admissible, homology_of_finite_complex,
                                  invariant_factors_by_reduction, order_by_height, order_graph,
                                  reduce_matrix, smith_normal_form, vf_by_predefined_order, vf_incremental)
from effhom.simplicial import ProjectivePlane, StandardSimplex, nondegenerate_chain_complex

EXAMPLE = IntegerMatrix.from_dense([[0, 0, -1, -1, 0],
                                  [0, -1, 0, 0, 1],
                                  [0, 0, 0, 1, 1],
                                  [0, -1, 1, 0, -1],
                                  [-1, 1, -1, 0, 0]])


# ---------------------------------------------------------------------------
# independent oracle: invariant factors from determinantal divisors

def det(m):
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    out = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if a[r][i]), None)
        if piv is None:
            return 0
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            out = -out
        out *= a[i][i]
        for r in range(i + 1, n):
            k = a[r][i] / a[i][i]
            for c in range(i, n):
                a[r][c] -= k * a[i][c]
    return int(out)


def factors_by_minors(dense):
    m = len(dense)
    n = len(dense[0]) if m else 0
    divisors = [1]
    for k in range(1, min(m, n) + 1):
        g = 0
        for rs in itertools.combinations(range(m), k):
            for cs in itertools.combinations(range(n), k):
                g = gcd(g, det([[dense[r][c] for c in cs] for r in rs]))
        if g == 0:
            break
        divisors.append(g)
    return tuple(divisors[i] // divisors[i - 1] for i in range(1, len(divisors)))


def rank(dense):
    a = [[Fraction(x) for x in row] for row in dense]
    r = 0
    cols = len(a[0]) if a else 0
    for c in range(cols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(len(a)):
            if i != r and a[i][c]:
                k = a[i][c] / a[r][c]
                a[i] = [x - k * y for x, y in zip(a[i], a[r])]
        r += 1
    return r


def random_dense(rng, m, n, density=0.35):
    return [[rng.choice((-2, -1, 1, 2)) if rng.random() < density else 0 for _ in range(n)] for _ in range(m)]


# ---------------------------------------------------------------------------

def test_predefined_order_field_on_five_by_five_example():
    V = vf_by_predefined_order(EXAMPLE)
    assert V.vectors == ((5, 1), (3, 4), (4, 5))


def test_predefined_order_trivial_cases():
    assert len(vf_by_predefined_order(IntegerMatrix.from_dense([[0, 0], [0, 0]]))) == 0
    ident = IntegerMatrix.from_dense([[1 if i == j else 0 for j in range(4)] for i in range(4)])
    assert len(vf_by_predefined_order(ident, [4, 2, 3, 1])) == 4
    with pytest.raises(ContractError):
        vf_by_predefined_order(ident, [1, 2])


def test_incremental_field_on_five_by_five_example():
    V, g = vf_incremental(EXAMPLE, with_graph=True)
    assert V.vectors == ((1, 3), (2, 2), (3, 4), (5, 1))
    assert 4 not in V.rows()
    assert g.greater_than(3, 1) and g.greater_than(1, 5) and g.greater_than(3, 5)
    assert g.greater_than(2, 5)


def test_incremental_on_signed_diagonal():
    D = IntegerMatrix.from_dense([[1, 0, 0], [0, -1, 0], [0, 0, 1]])
    assert len(vf_incremental(D)) == 3


def test_admissibility_of_matrix_fields():
    V = vf_incremental(EXAMPLE)
    assert isinstance(check_matrix_vf_admissible(EXAMPLE, V), MatrixOrder)
    loop = check_matrix_vf_admissible(EXAMPLE, MatrixVectorField(((4, 2), (2, 5))))
    assert isinstance(loop, MatrixLoop) and set(loop.rows) == {2, 4}
    assert check_matrix_vf_admissible(EXAMPLE, MatrixVectorField()) == MatrixOrder(())
    assert isinstance(order_by_height(EXAMPLE, MatrixVectorField(((4, 2), (2, 5)))), MatrixLoop)


def test_invalid_matrix_fields_are_refused():
    with pytest.raises(ContractError):
        check_matrix_vf_admissible(EXAMPLE, MatrixVectorField(((1, 1),)))  # zero entry
    with pytest.raises(ContractError):
        check_matrix_vf_admissible(EXAMPLE, MatrixVectorField(((1, 3), (1, 4))))  # row used twice


def test_reduce_five_by_five_example_both_fields():
    V = vf_by_predefined_order(EXAMPLE)
    red = reduce_matrix(EXAMPLE, V)
    assert red.residual.to_dense() == [[-1, 0], [-2, 1]]
    assert (red.residual.rows, red.residual.cols) == ((1, 2), (2, 3))
    V = vf_incremental(EXAMPLE)
    red = reduce_matrix(EXAMPLE, V, order_by_height(EXAMPLE, V))
    assert red.residual.to_dense() == [[-1]]
    assert (red.residual.rows, red.residual.cols) == ((4,), (5,))


def test_reduce_identity_leaves_empty_matrix():
    ident = IntegerMatrix.from_dense([[1, 0], [0, 1]])
    red = reduce_matrix(ident, vf_incremental(ident))
    assert red.residual.shape == (0, 0)


def test_reduce_refuses_a_loop():
    with pytest.raises(ContractError, match="loop"):
        reduce_matrix(EXAMPLE, MatrixVectorField(((4, 2), (2, 5))))


def test_smith_normal_form_examples():
    assert smith_normal_form([[2, 0], [0, 3]]) == (1, 6)
    assert smith_normal_form([[0, 0], [0, 0]]) == ()
    assert smith_normal_form([[-1]]) == (1,)
    assert smith_normal_form(EXAMPLE) == (1, 1, 1, 1, 1)
    assert factors_by_minors(EXAMPLE.to_dense()) == (1, 1, 1, 1, 1)


@given(st.integers(0, 10**6))
def test_smith_normal_form_against_minors(seed):
    rng = random.Random(seed)
    dense = random_dense(rng, rng.randint(1, 4), rng.randint(1, 4), 0.6)
    want = factors_by_minors(dense)
    assert smith_normal_form(dense) == want
    M = IntegerMatrix.from_dense(dense)
    assert invariant_factors_by_reduction(M) == want


@given(st.integers(0, 10**6))
def test_reduction_preserves_invariant_factors(seed):
    rng = random.Random(seed)
    dense = random_dense(rng, rng.randint(1, 30), rng.randint(1, 30))
    M = IntegerMatrix.from_dense(dense)
    snf = smith_normal_form(M)
    assert len(snf) == rank(dense)
    for V in (vf_incremental(M), vf_by_predefined_order(M)):
        cert = check_matrix_vf_admissible(M, V)
        assert isinstance(cert, MatrixOrder)
        red = reduce_matrix(M, V, cert)
        assert (1,) * len(V) + smith_normal_form(red.residual) == snf
    assert invariant_factors_by_reduction(M) == snf


def test_order_graph_edges_point_from_sources():
    V = vf_incremental(EXAMPLE)
    g = order_graph(EXAMPLE, V)
    assert all(a in g.sources for a, _ in g.edges)
    assert g.minimal == {4}


def test_homology_examples(data_dir):
    C = build_cubical(load_image(os.path.join(data_dir, "three_by_three.pbm")))
    H = homology_of_finite_complex(C)
    assert [str(H[p]) for p in range(3)] == ["Z", "Z", "0"]
    RP = nondegenerate_chain_complex(ProjectivePlane())
    H = homology_of_finite_complex(RP)
    assert (H[0], H[1], H[2]) == (HomologyGroup(1, []), HomologyGroup(0, [2]), HomologyGroup(0, []))
    H = homology_of_finite_complex(nondegenerate_chain_complex(StandardSimplex(3)))
    assert [str(H[p]) for p in range(4)] == ["Z", "0", "0", "0"]


def test_homology_with_and_without_reduction_agree():
    rng = random.Random(4)
    for _ in range(30):
        C = random_complex(rng, 40, 6)
        assert homology_of_finite_complex(C) == homology_of_finite_complex(C, reduce=False)


def test_homology_rejects_non_complex():
    bad = finite_complex({0: ["v", "w"], 1: ["e"], 2: ["q"]},
                         {(1, "e"): {"w": 1, "v": -1}, (2, "q"): {"e": 1}})
    with pytest.raises(InvalidComplexError):
        homology_of_finite_complex(bad)
