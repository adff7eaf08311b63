import random

import pytest

from surface_hochschild.exactla import ONE, QQ
from surface_hochschild.gca import (cohomology_of_sphere, free_gcda,
                                    module_over_self)
from surface_hochschild.hochschild import (
    Cochain, build_complex, cochain_D, cup_genus0, cup_mixed, cup_positive,
    cup_tilde, dual_basis_cochain, enumerate_atuples, eval_pieces,
    ez_and_aw, is_degenerate_tuple, mccarthy_D2, normalize,
    pullback_cochain, pushforward_chain, pushforward_set_map,
    relevant_adegrees, shuffle_product, unit_chain)
from surface_hochschild.simplicial import (
    collapse_to_sphere, edgewise_subdivision, pinch_map, sigma, sphere2,
    standard_model)


def lam():
    A = cohomology_of_sphere(1)
    return A, module_over_self(A)


X = 1  # basis index of the degree-3 generator in cohomology_of_sphere(1)


def dga():
    B0 = free_gcda([("x", 3), ("y", 2)], (0, 8))
    B = free_gcda([("x", 3), ("y", 2)], (0, 8),
                  derivation={"x": {B0.index((0, 2)): ONE}})
    return B, module_over_self(B)


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

def test_circle_chain_dimensions():
    A, M = lam()
    C = build_complex(standard_model("circle", 4), A, M, 4, (0, 6))
    assert len(C.basis(2, 3)) == 3
    assert len(C.basis(0, 0)) == 1
    assert len(C.basis(1, 6)) == 1


def test_chain_d_squared_zero_on_models():
    A, M = lam()
    for name in ["pt", "circle", "wedge_circles(2)", "sphere2"]:
        build_complex(standard_model(name, 4), A, M, 4, (-2, 5))


def test_chain_d_squared_zero_on_surfaces():
    A, M = lam()
    build_complex(sigma(1, 4), A, M, 4, (-2, 4))
    build_complex(sigma(2, 3), A, M, 3, (-1, 4))


def test_chain_d_squared_zero_with_differential():
    B, MB = dga()
    build_complex(standard_model("circle", 3), B, MB, 3, (-2, 5))


def test_normalized_circle_basis_has_no_unit_slots():
    A, M = lam()
    N = build_complex(standard_model("circle", 3), A, M, 3, (-1, 5),
                      normalized=True, check=False)
    for k in range(1, 4):
        for m in (0, 3, 6, 9):
            for t in N.basis(k, m):
                assert A.unit not in t[1:]


def test_normalize_matches_direct_enumeration():
    A, M = lam()
    C = build_complex(standard_model("circle", 3), A, M, 3, (-1, 4),
                      check=False)
    N = normalize(C)
    D = build_complex(standard_model("circle", 3), A, M, 3, (-1, 4),
                      normalized=True, check=False)
    for k in range(4):
        for m in (0, 3, 6):
            assert N.basis(k, m) == D.basis(k, m)


def test_pushforward_of_chain_along_pinch_is_a_chain_map():
    A, M = lam()
    pin = pinch_map(1, 1, 3)
    S, W = pin.source, pin.target
    CS = build_complex(S, A, M, 3, (-3, 5), check=False)
    CW = build_complex(W, A, M, 3, (-3, 5), check=False)
    rng = random.Random(7)
    for _ in range(12):
        k = rng.randrange(1, 4)
        m = rng.choice([0, 3, 6])
        b = CS.basis(k, m)
        if not b:
            continue
        ch = {(k, rng.choice(b)): ONE}
        lhs = pushforward_chain(A, M, pin.levels, W.sizes, CS.apply_D(ch))
        rhs = CW.apply_D(pushforward_chain(A, M, pin.levels, W.sizes, ch))
        assert lhs == rhs


def test_pushforward_basepoint_fiber_acts_on_module():
    A, M = lam()
    # collapse both slots of a two-element level to the basepoint
    terms = pushforward_set_map(A, M, [0, 0], 1, (0, X))
    assert terms == [(ONE, (X,))]
    # odd-odd collapse kills the monomial: x . x = 0
    assert pushforward_set_map(A, M, [0, 0], 1, (X, X)) == []


# ---------------------------------------------------------------------------
# shuffle product and EZ / AW
# ---------------------------------------------------------------------------

def test_shuffle_unit_and_graded_commutativity():
    A, M = lam()
    C = build_complex(standard_model("circle", 4), A, M, 4, (-2, 8),
                      normalized=True, check=False)
    one = unit_chain(C)
    c1 = {(1, (A.unit, X)): ONE}
    assert shuffle_product(C, one, c1) == c1
    assert shuffle_product(C, c1, one) == c1
    # total degree of c1 is 2 (even): sh(u, v) = sh(v, u)
    c2 = {(2, (X, X, X)): ONE}
    assert shuffle_product(C, c1, c2) == shuffle_product(C, c2, c1)


def test_shuffle_leibniz():
    A, M = lam()
    C = build_complex(standard_model("circle", 5), A, M, 5, (-3, 10),
                      normalized=True, check=False)
    rng = random.Random(13)
    terms = []
    for k in range(3):
        for m in (0, 3, 6):
            terms.extend((k, t) for t in C.basis(k, m))
    for _ in range(25):
        ku, tu = rng.choice(terms)
        kv, tv = rng.choice(terms)
        u = {(ku, tu): ONE}
        v = {(kv, tv): ONE}
        mu = sum(C.M.degree(tu[0:1][0]) for _ in (0,)) + \
            sum(C.A.degree(a) for a in tu[1:])
        nu = mu - ku  # total degree of u
        lhs = C.apply_D(shuffle_product(C, u, v))
        rhs = shuffle_product(C, C.apply_D(u), v)
        sgn = QQ(-1) if nu % 2 else ONE
        for key, c in shuffle_product(C, u, C.apply_D(v)).items():
            cur = rhs.get(key, None)
            cur = sgn * c if cur is None else cur + sgn * c
            if cur == 0:
                rhs.pop(key, None)
            else:
                rhs[key] = cur
        assert lhs == rhs


def test_aw_ez_identity_and_chain_maps():
    A, M = lam()
    Y = standard_model("circle", 3)
    Z = standard_model("circle", 3)
    G = ez_and_aw(Y, Z, A, M, 3, normalized=True)
    C = build_complex(G.diag, A, M, 3, (-4, 6), normalized=True,
                      check=False)
    rng = random.Random(5)
    tested = 0
    while tested < 15:
        p = rng.randrange(0, 4)
        q = rng.randrange(0, 4 - p)
        size = Y.sizes[p] * Z.sizes[q]
        slots = [0] * size
        for _ in range(rng.randrange(0, 4)):
            if size > 1:
                slots[rng.randrange(1, size)] = 1
        t = (p, q, tuple(slots))
        if G.is_degenerate(*t):
            continue
        tested += 1
        assert G.aw(G.ez({t: ONE})) == {t: ONE}
        assert C.apply_D(G.ez({t: ONE})) == G.ez(G.apply_D({t: ONE}))
    # aw is a chain map out of the diagonal model
    for n in range(3):
        for m in (0, 3, 6):
            for t in C.basis(n, m)[:6]:
                ch = {(n, t): ONE}
                assert G.apply_D(G.aw(ch)) == G.aw(C.apply_D(ch))


# ---------------------------------------------------------------------------
# cochains
# ---------------------------------------------------------------------------

def _check_cochain_d2(Y, A, M, K, seed=3, samples=5):
    rng = random.Random(seed)
    for k in range(0, K - 1):
        tuples = enumerate_atuples(Y, A, k, set(range(0, 7)))
        rng.shuffle(tuples)
        for t in tuples[:samples]:
            for mu in range(M.dim()):
                f = dual_basis_cochain(Y, A, M, k, t, mu)
                dd = cochain_D(cochain_D([f]))
                for lev in sorted({p.level for p in dd}):
                    if lev > K:
                        continue
                    rel = set()
                    for dw in (0, 1, 2):
                        rel |= set(relevant_adegrees(M, f.fdeg + dw))
                    for a in enumerate_atuples(Y, A, lev, rel):
                        assert eval_pieces(dd, lev, a) == {}


def test_cochain_d_squared_zero():
    A, M = lam()
    _check_cochain_d2(standard_model("circle", 4), A, M, 4)
    _check_cochain_d2(sphere2(3), A, M, 3)


def test_cochain_d_squared_zero_with_differential():
    B, MB = dga()
    _check_cochain_d2(standard_model("circle", 3), B, MB, 3)


def test_cochain_complex_of_point_is_the_module():
    B, MB = dga()
    P = standard_model("pt", 2)
    for mu in range(MB.dim()):
        f = dual_basis_cochain(P, B, MB, 0, (), mu)
        pieces = cochain_D([f])
        # the face part vanishes (d_0^* = d_1^* on the point) and the
        # internal part is d_M composed with f
        for p in pieces:
            if p.level == 1:
                assert p.ev(()) == {}
            else:
                assert p.ev(()) == MB.differential.get(mu, {})


# ---------------------------------------------------------------------------
# cup products
# ---------------------------------------------------------------------------

def _leibniz(cup, f, h, Yt, A, M, level, degrees):
    nf = f.level + f.fdeg
    lhs = cochain_D([cup(f, h)])
    s = QQ(-1) if nf % 2 else ONE
    rhs = [cup(p, h) for p in cochain_D([f])] + \
          [cup(f, p).scaled(s) for p in cochain_D([h])]
    for a in enumerate_atuples(Yt, A, level, degrees):
        assert eval_pieces(lhs, level, a) == eval_pieces(rhs, level, a)


def test_cup_genus0_unit_and_associativity():
    A, M = lam()
    S2 = sphere2(4)
    one = Cochain(S2, A, M, 0, 0, table={(): {A.unit: ONE}})
    f = dual_basis_cochain(S2, A, M, 1, (X,), 0)
    h = dual_basis_cochain(S2, A, M, 1, (A.unit,), 1)
    g3 = dual_basis_cochain(S2, A, M, 1, (X,), 1)
    for a in enumerate_atuples(S2, A, 1, {0, 3}):
        assert cup_genus0(one, f).ev(a) == f.ev(a)
        assert cup_genus0(f, one).ev(a) == f.ev(a)
    lhs = cup_genus0(cup_genus0(f, h), g3)
    rhs = cup_genus0(f, cup_genus0(h, g3))
    for a in enumerate_atuples(S2, A, 3, {0, 3, 6, 9}):
        assert lhs.ev(a) == rhs.ev(a)


def test_cup_genus0_is_a_cochain_map():
    A, M = lam()
    S2 = sphere2(4)
    f = dual_basis_cochain(S2, A, M, 1, (X,), 0)
    h = dual_basis_cochain(S2, A, M, 1, (A.unit,), 1)
    _leibniz(cup_genus0, f, h, S2, A, M, 3, {0, 3, 6})


def test_cup_genus0_cochain_map_with_differential():
    B, MB = dga()
    S2 = sphere2(3)
    xB, yB = B.index((1, 0)), B.index((0, 1))
    f = dual_basis_cochain(S2, B, MB, 1, (yB,), B.unit)
    h = dual_basis_cochain(S2, B, MB, 1, (B.unit,), xB)
    _leibniz(cup_genus0, f, h, S2, B, MB, 3, set(range(0, 8)))


def test_cup_positive_is_a_cochain_map():
    A, M = lam()
    pin = pinch_map(1, 1, 3)
    S1 = sigma(1, 3)
    f = dual_basis_cochain(S1, A, M, 1, (X, A.unit, A.unit), 0)
    h = dual_basis_cochain(S1, A, M, 1, (A.unit, X, A.unit), 0)
    _leibniz(lambda a, b: cup_positive(a, b, pin), f, h, pin.source, A, M,
             3, {3})


def test_cup_mixed_is_a_cochain_map_both_sides():
    A, M = lam()
    S2 = sphere2(3)
    Sg = sigma(1, 3)
    f = dual_basis_cochain(S2, A, M, 1, (X,), 0)
    al = dual_basis_cochain(Sg, A, M, 1, (X, A.unit, A.unit), 0)
    _leibniz(lambda a, b: cup_mixed(a, b, "left"), f, al, Sg, A, M, 3,
             {3, 6})
    nal = al.level + al.fdeg
    lhs = cochain_D([cup_mixed(f, al, "right")])
    s = QQ(-1) if nal % 2 else ONE
    rhs = [cup_mixed(f, p, "right") for p in cochain_D([al])] + \
          [cup_mixed(p, al, "right").scaled(s) for p in cochain_D([f])]
    for a in enumerate_atuples(Sg, A, 3, {3, 6}):
        assert eval_pieces(lhs, 3, a) == eval_pieces(rhs, 3, a)


def test_cup_bimodule_relation():
    # last-face pullback on the sphere factor against d_0 pullback on the
    # surface factor, with the sign -1
    A, M = lam()
    S2 = sphere2(3)
    Sg = sigma(1, 3)
    f = dual_basis_cochain(S2, A, M, 1, (X,), 0)
    al = dual_basis_cochain(Sg, A, M, 1, (X, A.unit, A.unit), 0)
    dp1 = pullback_cochain(f, S2.faces[2][2], S2, 2)
    d0 = pullback_cochain(al, Sg.faces[2][0], Sg, 2)
    lhs = cup_mixed(dp1, al, "left")
    rhs = cup_mixed(f, d0, "left").scaled(QQ(-1))
    for a in enumerate_atuples(Sg, A, 3, {3, 6}):
        assert lhs.ev(a) == rhs.ev(a)


def test_cup_with_collapse_pullback():
    # pulling a sphere cochain back along the collapse map agrees with
    # cupping against the unit surface cochain
    A, M = lam()
    S2 = sphere2(3)
    Sg = sigma(1, 3)
    pi = collapse_to_sphere(1, 3)
    f = dual_basis_cochain(S2, A, M, 1, (X,), 0)
    one_g = Cochain(Sg, A, M, 0, 0, table={(): {A.unit: ONE}})
    lhs = pullback_cochain(f, pi.levels[1], Sg, 1)
    rhs = cup_mixed(f, one_g, "left")
    for a in enumerate_atuples(Sg, A, 1, {0, 3, 6}):
        assert lhs.ev(a) == rhs.ev(a)


def test_cup_mixed_is_not_commutative_at_cochain_level():
    A, M = lam()
    S2 = sphere2(3)
    Sg = sigma(1, 3)
    f = dual_basis_cochain(S2, A, M, 1, (X,), 0)
    al = dual_basis_cochain(Sg, A, M, 1, (X, A.unit, A.unit), 0)
    left = cup_mixed(f, al, "left")
    right = cup_mixed(f, al, "right")
    witness = False
    for a in enumerate_atuples(Sg, A, 2, {3, 6}):
        if left.ev(a) != right.ev(a):
            witness = True
            break
    assert witness


# ---------------------------------------------------------------------------
# doubling operator and the subdivided cup product
# ---------------------------------------------------------------------------

def test_doubling_level_one_formula():
    A, M = lam()
    C5 = standard_model("circle", 5)
    res = mccarthy_D2(C5, A, M, {(1, (0, X)): ONE})
    assert res == {(1, (0, 0, 0, X)): ONE, (1, (0, X, 0, 0)): ONE}


@pytest.mark.parametrize("name", ["circle", "sigma(1)"])
def test_doubling_is_a_chain_map(name):
    A, M = lam()
    Y = sigma(1, 5) if name == "sigma(1)" else standard_model("circle", 5)
    sd = edgewise_subdivision(Y)
    C = build_complex(Y, A, M, 2, (-3, 6), check=False)
    Csd = build_complex(sd, A, M, 2, (-3, 6), check=False)
    for n in (1, 2):
        for m in (0, 3, 6):
            for t in C.basis(n, m):
                ch = {(n, t): ONE}
                assert Csd.apply_D(mccarthy_D2(Y, A, M, ch)) == \
                    mccarthy_D2(Y, A, M, C.apply_D(ch))


def test_subdivided_cup_agrees_with_mixed_cup_on_normalized():
    A, M = lam()
    Ybig = sigma(1, 5)
    S2 = sphere2(3)
    f = dual_basis_cochain(S2, A, M, 1, (X,), 0)
    al = dual_basis_cochain(Ybig, A, M, 1, (X, 0, 0), 0)
    assert not is_degenerate_tuple(Ybig, 1, (X, 0, 0), A,
                                   module_slot=False)
    u1 = cup_tilde(f, al, 1)
    u2 = cup_mixed(f, al, "left")
    for a in enumerate_atuples(Ybig, A, 2, {3, 6},
                               nondegenerate_only=True):
        assert u1.ev(a) == u2.ev(a)
