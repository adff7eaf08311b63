import pytest

from surface_hochschild.simplicial import (
    quotient,
    OrdinalMap, apply_ordinal, collapse_to_sphere, delta, diagonal_product,
    edgewise_subdivision, from_json, pinch0_maps, pinch_map, pushout,
    basepoint_map, sd2_of, sigma, sigma_op, simplicial_homology_betti,
    skeleton_inclusion,
    sphere2, standard_model, to_json, validate, validate_map, wedge,
    wedge_circles)


BASIC = ["pt", "interval", "circle", "square", "triangle", "torus",
         "sphere2", "wedge_circles(2)", "sigma(1)", "sigma(2)"]


@pytest.mark.parametrize("name", BASIC)
def test_standard_models_satisfy_simplicial_identities(name):
    X = standard_model(name, 3)
    assert validate(X) == []


def test_circle_face_tables_level_two():
    C = standard_model("circle", 3)
    assert C.faces[2][0] == [0, 0, 1]
    assert C.faces[2][1] == [0, 1, 1]
    assert C.faces[2][2] == [0, 1, 0]


def test_model_sizes():
    K = 3
    assert standard_model("pt", K).sizes == [1, 1, 1, 1]
    assert standard_model("interval", K).sizes == [2, 3, 4, 5]
    assert standard_model("circle", K).sizes == [1, 2, 3, 4]
    assert standard_model("square", K).sizes == [4, 9, 16, 25]
    assert standard_model("sphere2", K).sizes == [1, 2, 5, 10]
    assert standard_model("torus", K).sizes == [1, 4, 9, 16]
    assert standard_model("triangle", K).sizes == [
        (k + 2) ** 2 - (k + 2) + 1 for k in range(K + 1)]
    assert standard_model("wedge_circles(2)", K).sizes == [1, 3, 5, 7]
    assert standard_model("wedge_circles(3)", K).sizes == [1, 4, 7, 10]


def test_surface_model_sizes():
    # (2g^2-g)k^2 + (3g^2-g)k + 1 + (g-1)^2
    assert sigma(1, 3).sizes == [1, 4, 9, 16]
    assert sigma(1, 2).sizes[2] == 9
    assert sigma(2, 2).sizes == [2, 18, 46]
    assert sigma(3, 1).sizes[1] == 44


def test_surface_models_validate():
    for g, K in [(1, 4), (2, 3), (3, 2)]:
        assert validate(sigma(g, K)) == []


def test_rational_homology_of_models():
    assert simplicial_homology_betti(standard_model("circle", 3), 2) == \
        [1, 1, 0]
    assert simplicial_homology_betti(standard_model("sphere2", 4), 3) == \
        [1, 0, 1, 0]
    assert simplicial_homology_betti(standard_model("torus", 4), 3) == \
        [1, 2, 1, 0]
    assert simplicial_homology_betti(standard_model("wedge_circles(3)", 3),
                                     2) == [1, 3, 0]


@pytest.mark.parametrize("g", [1, 2, 3])
def test_rational_homology_of_surfaces(g):
    assert simplicial_homology_betti(sigma(g, 3), 2) == [1, 2 * g, 1]


def test_torus_and_sigma1_levelwise_sizes_agree():
    assert sigma(1, 4).sizes == standard_model("torus", 4).sizes


def test_diagonal_product_basepoint_and_labels():
    T = diagonal_product(standard_model("circle", 2),
                         standard_model("circle", 2))
    assert T.label(1, 0) == (0, 0)
    assert T.sizes == [1, 4, 9]
    assert validate(T) == []


def test_pushout_wedge_inclusions_are_simplicial():
    C = standard_model("circle", 3)
    W, i, j = wedge(C, standard_model("circle", 3))
    assert W.sizes == [1, 3, 5, 7]
    assert validate(W) == []
    assert validate_map(i) == []
    assert validate_map(j) == []
    # the two copies only share the basepoint
    for k in range(4):
        imgs = set(i.levels[k]) & set(j.levels[k])
        assert imgs == {0}


def test_apply_ordinal_identity_and_composition():
    X = standard_model("torus", 3)
    ident = OrdinalMap(2, 2, [0, 1, 2])
    assert apply_ordinal(X, ident) == list(range(X.sizes[2]))
    phi = delta(1, 3).compose(delta(0, 2))   # [1] -> [3]
    via = apply_ordinal(X, phi)
    step = [apply_ordinal(X, delta(0, 2))[apply_ordinal(X, delta(1, 3))[x]]
            for x in range(X.sizes[3])]
    assert via == step


def test_apply_ordinal_degeneracy():
    C = standard_model("circle", 3)
    assert apply_ordinal(C, sigma_op(0, 1)) == C.degeneracies[1][0]


def test_sd2_of_ordinal_map():
    phi = delta(1, 2)          # [1] -> [2] missing 1
    doubled = sd2_of(phi)      # [3] -> [5]
    assert doubled.values == (0, 2, 3, 5)


def test_edgewise_subdivision_of_circle():
    C = standard_model("circle", 7)
    sd = edgewise_subdivision(C)
    assert sd.max_level == 3
    assert sd.sizes == [2, 4, 6, 8]
    assert validate(sd) == []
    assert simplicial_homology_betti(sd, 2) == [1, 1, 0]


def test_edgewise_subdivision_of_surface():
    sd = edgewise_subdivision(sigma(1, 5))
    assert sd.max_level == 2
    assert sd.sizes == [4, 16, 36]
    assert validate(sd) == []
    assert simplicial_homology_betti(sd, 1)[:2] == [1, 2]


def test_pinch_map_is_simplicial():
    f = pinch_map(1, 1, 3)
    assert validate_map(f) == []
    assert f.source.sizes[1] == 18
    assert f.target.sizes[1] == 7


def test_pinch_map_mixed_genera():
    for g, h in [(1, 2), (2, 1)]:
        f = pinch_map(g, h, 2)
        assert validate_map(f) == []


def test_pinch_map_restricts_to_blocks():
    f = pinch_map(1, 1, 2)
    W, iG, iH = f.wedge_parts
    S = f.source
    SG = sigma(1, 2)
    for k in range(3):
        atlas = S.meta["atlas"][k]
        for p in range(k + 2):
            for q in range(1, k + 1):
                if 1 <= p <= k + 1:
                    src = atlas[((1, 1, "Q"), p, q)]
                    tgt = SG.meta["atlas"][k][((1, 1, "Q"), p, q)]
                    assert f.levels[k][src] == iG.levels[k][tgt]
                    src = atlas[((2, 2, "Q"), p, q)]
                    assert f.levels[k][src] == iH.levels[k][tgt]


def test_collapse_to_sphere_is_simplicial():
    for g in [1, 2]:
        f = collapse_to_sphere(g, 3)
        assert validate_map(f) == []
    # degree: interior of the top-left cell maps bijectively
    f = collapse_to_sphere(1, 3)
    S2 = f.target
    for k in range(4):
        hit = set(f.levels[k])
        assert hit == set(range(S2.sizes[k]))


def test_pinch0_maps_are_simplicial():
    P0g, Pg0 = pinch0_maps(1, 1)
    assert validate_map(P0g) == []
    assert validate_map(Pg0) == []
    assert P0g.source.sizes == [4, 16]
    assert P0g.target.sizes == [1, 5]


def test_json_roundtrip():
    C = standard_model("circle", 3)
    X = from_json(to_json(C))
    assert X.sizes == C.sizes
    assert X.faces == C.faces
    assert X.degeneracies == C.degeneracies
    assert validate(X) == []


def test_quotient_of_interval_by_endpoints_is_a_circle():
    # identify both endpoint vertices of the interval: the quotient has the
    # homology of a circle, and saturation handles all degenerate copies
    I = standard_model("interval", 3)
    pairs = [((0, 0), (0, 1))]
    W, proj = quotient(I, pairs)
    assert validate(W) == []
    assert validate_map(proj) == []
    assert W.sizes == [k + 1 for k in range(4)]
    assert simplicial_homology_betti(W, 2) == [1, 1, 0]


def test_pushout_against_point_is_identity_shaped():
    I = standard_model("interval", 3)
    P = standard_model("pt", 3)
    W, i, j = pushout(I, P, P, basepoint_map(P, I), basepoint_map(P, P))
    assert W.sizes == I.sizes
    assert validate_map(i) == []


def test_skeleton_inclusion_is_simplicial_and_injective_on_loops():
    for g in (1, 2):
        f = skeleton_inclusion(g, 3)
        assert validate_map(f) == []
        assert f.source.meta["m"] == 2 * g
        # the 2g loop elements at level 1 land on distinct boundary edges
        images = [f.apply(1, x) for x in range(1, 2 * g + 1)]
        assert len(set(images)) == 2 * g
        bp = f.target.meta["atlas"][1][("pt",)]
        assert f.apply(1, 0) == bp
        assert bp not in images
