from surface_hochschild.exactla import ONE
from surface_hochschild.gca import (
    cohomology_of_sphere, free_gcda, module_over_self)
from surface_hochschild.hochschild import build_complex
from surface_hochschild.homology import (
    betti, completeness_bound, is_boundary, is_cycle,
    top_nondegenerate_level, total_degree_of)
from surface_hochschild.simplicial import sigma, standard_model


def lam():
    A = cohomology_of_sphere(1)          # exterior on one degree-3 class
    return A, module_over_self(A)


def test_top_nondegenerate_level():
    assert top_nondegenerate_level(standard_model("pt", 4)) == 0
    assert top_nondegenerate_level(standard_model("circle", 4)) == 1
    assert top_nondegenerate_level(standard_model("sphere2", 4)) == 2
    assert top_nondegenerate_level(sigma(2, 3)) == 2


def test_completeness_bound_values():
    A, _ = lam()
    C = standard_model("circle", 4)
    assert completeness_bound(C, A, 0) == 0
    assert completeness_bound(C, A, 8) == 4
    S = standard_model("sphere2", 4)
    assert completeness_bound(S, A, 5) == 10
    # algebra with a generator at the top simplex dimension: no bound
    B = free_gcda([("u", 1)], (0, 1))
    assert completeness_bound(C, B, 3) is None


def test_circle_betti_matches_free_model_monomial_count():
    # monomial count of S(x (+) x[1]) with |x| = 3: one generator in
    # degree 3 squaring to zero, one polynomial generator in degree 2
    A, M = lam()
    B = betti(standard_model("circle", 8), A, M, range(9))
    assert [B.values[n] for n in range(9)] == [1, 0, 1, 1, 1, 1, 1, 1, 1]
    assert all(B.certified.values())
    assert B.K == 4


def test_sphere_betti():
    A, M = lam()
    B = betti(standard_model("sphere2", 10), A, M, range(6))
    assert [B.values[n] for n in range(6)] == [1, 1, 0, 1, 1, 0]
    assert all(B.certified.values())


def test_surface_betti_genus_one():
    A, M = lam()
    B = betti(sigma(1, 8), A, M, range(5), K=8)
    assert [B.values[n] for n in range(5)] == [1, 1, 2, 3, 4]
    assert all(B.certified.values())


def test_torus_product_model_agrees_with_surface_model():
    A, M = lam()
    B = betti(standard_model("torus", 8), A, M, range(4), K=8)
    assert [B.values[n] for n in range(4)] == [1, 1, 2, 3]


def test_point_betti_is_module_homology():
    A, M = lam()
    B = betti(standard_model("pt", 2), A, M, range(4))
    assert [B.values[n] for n in range(4)] == [1, 0, 0, 1]


def test_uncertified_when_truncated_below_bound():
    A, M = lam()
    B = betti(standard_model("circle", 4), A, M, [4], K=1)
    assert not B.certified[4]


def test_cycle_and_boundary_predicates():
    A, M = lam()
    Y = standard_model("circle", 4)
    C = build_complex(Y, A, M, 4, (-1, 9), normalized=True, check=False)
    x = 1                                  # the degree-3 generator
    z = {(1, (0, x)): ONE}                 # total degree 2 cycle
    assert is_cycle(C, z)
    assert total_degree_of(C, z) == 2
    assert not is_boundary(C, z)           # the Betti-1 class in degree 2
    b = C.apply_D({(2, (0, x, A.unit)): ONE})
    if b:
        assert is_cycle(C, b)
        assert is_boundary(C, b)
