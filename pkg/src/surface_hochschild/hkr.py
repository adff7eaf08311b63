"""Free-model side of the surface Hochschild package.

For a free graded-commutative coefficient algebra S(V) the chain complex
over a circle wedge, the sphere or a genus-g surface has a small free
model: the symmetric algebra on one copy of V for every homology class of
the space, with the copy attached to a class of homological degree r
shifted down by r.  This module builds those models with their
differentials, the comparison maps in both directions (`eps_map` into the
chain complex, `pi_wedge` out of it), the genus-graded product on the dual
modules (`hkr_cup`), and the closed-form answer algebras for odd spheres
and products of odd spheres.
"""

from functools import lru_cache
from itertools import combinations, product as iproduct
from math import factorial

from .exactla import ONE, QQ, SparseMatrix, solve
from .gca import free_gcda, sort_letters_sign
from .hochschild import (
    is_degenerate_tuple, pushforward_chain, pushforward_set_map,
    shuffle_product, unit_chain)
from .simplicial import collapse_to_sphere, surface_loops


# ---------------------------------------------------------------------------
# graded derivations on a free algebra
# ---------------------------------------------------------------------------

def extend_derivation(F, images, parity):
    """Matrix of the graded derivation extending generator images.

    Parameters
    ----------
    F : FiniteGCDA
        A free algebra built by `free_gcda` (monomial basis, labelled by
        exponent tuples).
    images : dict
        {generator position: sparse element over the basis of F}; missing
        generators map to zero.
    parity : int
        Parity of the operator: passing it over a letter of degree d costs
        (-1)^(parity * d).

    Returns
    -------
    dict
        {basis index: sparse element}, the derivation on the monomial
        basis.

    Raises
    ------
    ValueError
        When an image monomial escapes the degree window of F.
    """
    gens = F.generators
    gdegs = [d for _, d in gens]
    index = {lab: i for i, (lab, _) in enumerate(F.basis)}
    mat = {}
    for i, (exps, _) in enumerate(F.basis):
        out = {}
        for gi, e in enumerate(exps):
            if e == 0 or gi not in images:
                continue
            left_deg = sum(exps[gj] * gdegs[gj] for gj in range(gi))
            coeff = QQ(e) * (QQ(-1) if (parity * left_deg) % 2 else ONE)
            for t, ct in images[gi].items():
                et = F.basis[t][0]
                # the image letters replace one copy of gi in place; the
                # sign is the Koszul cost of sorting the resulting word
                word = []
                for gj in range(gi):
                    word.extend([gj] * exps[gj])
                for gj, c2 in enumerate(et):
                    word.extend([gj] * c2)
                word.extend([gi] * (e - 1))
                for gj in range(gi + 1, len(exps)):
                    word.extend([gj] * exps[gj])
                odd_counts = {}
                for gj in word:
                    if gdegs[gj] % 2:
                        odd_counts[gj] = odd_counts.get(gj, 0) + 1
                if any(c2 > 1 for c2 in odd_counts.values()):
                    continue
                _, ssign = sort_letters_sign(word,
                                             [gdegs[gj] for gj in word])
                new = list(exps)
                new[gi] -= 1
                for gj, c2 in enumerate(et):
                    new[gj] += c2
                k = index.get(tuple(new))
                if k is None:
                    raise ValueError(
                        "derivation image escapes the degree window")
                c = coeff * ct * (ONE if ssign > 0 else QQ(-1))
                w = out.get(k, None)
                w = c if w is None else w + c
                if w == 0:
                    out.pop(k, None)
                else:
                    out[k] = w
        if out:
            mat[i] = out
    return mat


def apply_matrix(mat, u):
    """Apply a sparse operator {i: {k: c}} to a sparse element."""
    out = {}
    for i, a in u.items():
        for k, c in mat.get(i, {}).items():
            w = out.get(k, None)
            w = a * c if w is None else w + a * c
            if w == 0:
                out.pop(k, None)
            else:
                out[k] = w
    return out


# ---------------------------------------------------------------------------
# the free models
# ---------------------------------------------------------------------------

def _parse_space(space):
    """Parse a space tag into (kind, parameter)."""
    if space == "sphere2":
        return ("sphere2", 0)
    if space.startswith("wedge(") and space.endswith(")"):
        m = int(space[6:-1])
        if m < 1:
            raise ValueError("need at least one circle")
        return ("wedge", m)
    if space.startswith("sigma(") and space.endswith(")"):
        g = int(space[6:-1])
        if g < 1:
            raise ValueError("genus must be positive; use sphere2 for "
                             "genus 0")
        return ("sigma", g)
    raise ValueError("unknown space tag %r" % space)


class FreeModelAlgebra:
    """Free model of the chain complex over a space with coefficients in a
    free algebra S(V).

    Attributes
    ----------
    space : str
        One of "wedge(m)", "sphere2", "sigma(g)".
    V : FiniteGCDA
        The coefficient algebra S(V) (built by `free_gcda`).
    algebra : FiniteGCDA
        The model: the free algebra on one copy of each V generator per
        homology class of the space, with the model differential.
    generators : list of ((homology key, V label), degree)
        Homology keys: ("1",) for the unit class, ("c", j) for the j-th
        circle, ("a", i) / ("b", i) for the surface loops, ("s",) for the
        top class.
    window : (int, int)
    """

    def __init__(self, space, V, algebra, hom_keys):
        self.space = space
        self.V = V
        self.algebra = algebra
        self.generators = algebra.generators
        self.window = algebra.degree_window
        self.hom_keys = hom_keys
        self.n_plain = len(V.generators)
        self._gen_index = {lab: gi
                           for gi, (lab, _) in enumerate(self.generators)}

    def generator_index(self, hom_key, vlabel):
        """Position of the generator attached to (homology class, V
        generator)."""
        return self._gen_index[(hom_key, vlabel)]

    def gen_element(self, hom_key, vlabel):
        """The generator as a sparse element of the model."""
        gi = self.generator_index(hom_key, vlabel)
        exps = [0] * len(self.generators)
        exps[gi] = 1
        return {self.algebra.index(tuple(exps)): ONE}

    def embed(self, u):
        """Embed a sparse element of S(V) along the unit-class copy."""
        n_ext = len(self.generators) - self.n_plain
        out = {}
        for i, c in u.items():
            exps = self.V.basis[i][0] + (0,) * n_ext
            try:
                out[self.algebra.index(exps)] = c
            except KeyError:
                raise ValueError("embedding escapes the degree window")
        return out

    def split_basis(self, i):
        """Split a model basis element into (S(V) exponents, external
        exponents)."""
        exps = self.algebra.basis[i][0]
        return exps[:self.n_plain], exps[self.n_plain:]

    def d(self, u):
        return self.algebra.d(u)

    def mul(self, u, v):
        return self.algebra.mul(u, v)

    def __repr__(self):
        return "FreeModelAlgebra(%s; %d generators)" % (
            self.space, len(self.generators))


def free_model(space, V, window):
    """Build the free model of the chain complex over a space.

    Parameters
    ----------
    space : str
        "wedge(m)", "sphere2" or "sigma(g)".
    V : FiniteGCDA
        The coefficient algebra S(V) built by `free_gcda`; its
        differential (given on monomials) induces the model differential.
    window : (int, int)
        Degree window of the model.

    Returns
    -------
    FreeModelAlgebra

    Raises
    ------
    ValueError
        On window violations, or when a shifted generator would land in
        degree 0 (the shifted copies must have nonzero degree).
    """
    kind, par = _parse_space(space)
    vgens = V.generators
    hom_keys = [("1",)]
    if kind == "wedge":
        hom_keys += [("c", j) for j in range(1, par + 1)]
    elif kind == "sigma":
        hom_keys += [("a", i) for i in range(1, par + 1)]
        hom_keys += [("b", i) for i in range(1, par + 1)]
        hom_keys.append(("s",))
    else:
        hom_keys.append(("s",))
    hom_deg = {("1",): 0, ("s",): 2}
    gens = []
    for key in hom_keys:
        r = hom_deg.get(key, 1)
        for lab, deg in vgens:
            if deg - r == 0:
                raise ValueError(
                    "shifted generator (%r, %r) has degree 0" % (key, lab))
            gens.append(((key, lab), deg - r))
    F0 = free_gcda(gens, window, name="model(%s)" % space)
    F0.generators = gens
    F0.degree_window = window
    model = FreeModelAlgebra(space, V, F0, hom_keys)
    # shift operators: send the unit-class copy of a V generator to the
    # copy attached to a degree-1 class (odd operators) or the top class
    # (even operator), and kill all shifted copies
    n_plain = len(vgens)

    def shift_images(key):
        return {gi: model.gen_element(key, vgens[gi][0])
                for gi in range(n_plain)}

    s_ops = {}
    for key in hom_keys[1:]:
        parity = 1 if hom_deg.get(key, 1) == 1 else 0
        s_ops[key] = extend_derivation(F0, shift_images(key), parity)
    # model differential on the generators
    deriv = {}
    for key in hom_keys:
        for gi, (lab, deg) in enumerate(vgens):
            dv = V.d({_v_gen_index(V, gi): ONE})
            if not dv:
                continue
            demb = model.embed(dv)
            if key == ("1",):
                img = demb
            elif key == ("s",):
                img = apply_matrix(s_ops[("s",)], demb)
                if kind == "sigma":
                    for i in range(1, par + 1):
                        img = _add(img, apply_matrix(
                            s_ops[("a", i)],
                            apply_matrix(s_ops[("b", i)], demb)))
            else:
                img = {k: -c
                       for k, c in apply_matrix(s_ops[key], demb).items()}
            if img:
                deriv[(key, lab)] = img
    if deriv:
        F = free_gcda(gens, window, derivation=deriv,
                      name="model(%s)" % space)
        F.generators = gens
        F.degree_window = window
        model = FreeModelAlgebra(space, V, F, hom_keys)
    model.shift_ops = s_ops
    return model


def _v_gen_index(V, gi):
    """Basis index in S(V) of the gi-th generator."""
    exps = [0] * len(V.generators)
    exps[gi] = 1
    return V.index(tuple(exps))


def _add(u, v):
    out = dict(u)
    for k, c in v.items():
        w = out.get(k, None)
        w = c if w is None else w + c
        if w == 0:
            out.pop(k, None)
        else:
            out[k] = w
    return out


def hkr_dimensions(F, degrees):
    """Monomial counts of the free model per degree.

    Parameters
    ----------
    F : FreeModelAlgebra
    degrees : iterable of int

    Returns
    -------
    dict
        {degree: number of basis monomials}.
    """
    counts = {n: 0 for n in degrees}
    for _, d in F.algebra.basis:
        if d in counts:
            counts[d] += 1
    return counts


# ---------------------------------------------------------------------------
# the comparison map into the chain complex
# ---------------------------------------------------------------------------

_FUNDAMENTAL_CACHE = {}


def surface_fundamental_coefficients(Y, A, M, C):
    """Coefficients of the level-2 single-letter cycle representing the
    top class of a surface model.

    The cycle places one letter v in a level-2 slot, summed over the
    nondegenerate level-2 elements with rational coefficients; the
    coefficients are fixed by requiring (a) the face differential
    vanishes in the normalized complex and (b) the pushforward along the
    collapse onto the sphere is the two-term sphere representative (+1 on
    the (1,2) interior slot, -1 on the (2,1) slot).  The coefficients do
    not depend on v because a single letter never crosses another one.

    Returns {element index: Scalar} over the level-2 elements.
    """
    key = id(Y)
    if key in _FUNDAMENTAL_CACHE:
        return _FUNDAMENTAL_CACHE[key][0]
    g = Y.meta["g"]
    collapse = collapse_to_sphere(g, Y.max_level)
    S2 = collapse.target
    letter = next(a for a in range(A.dim()) if a != A.unit)
    flags = Y.nondegenerate(2)
    unk = [e for e in range(1, Y.sizes[2]) if flags[e]]
    col = {e: c for c, e in enumerate(unk)}
    size2 = Y.sizes[2]
    # build the face-part rows: D restricted to level-1 output
    rows = {}
    rhs = {}
    row_index = {}

    def row_of(tag):
        r = row_index.get(tag)
        if r is None:
            r = len(row_index)
            row_index[tag] = r
        return r

    unit_m = A.unit  # module over itself: unit index matches
    for e in unk:
        tup = [unit_m] + [A.unit] * (size2 - 1)
        tup[e] = letter
        chain = {(2, tuple(tup)): ONE}
        for dkey, c in C.apply_D(chain).items():
            if dkey[0] != 1:
                continue
            r = row_of(("D", dkey))
            rows.setdefault(r, {})[col[e]] = c
    # collapse constraints on the nondegenerate sphere slots
    sflags = S2.nondegenerate(2)
    sphere_nondeg = {f for f in range(S2.sizes[2]) if sflags[f]}
    interior = S2.meta["interior"][2]
    plus, minus = interior[(1, 2)], interior[(2, 1)]
    for e in unk:
        f = collapse.levels[2][e]
        if f == 0 or f not in sphere_nondeg:
            continue
        r = row_of(("q", f))
        rows.setdefault(r, {})[col[e]] = ONE
        rhs[r] = ONE if f == plus else (-ONE if f == minus else QQ(0))
    mat = SparseMatrix(len(row_index), len(unk))
    for r, vals in rows.items():
        for c, v in vals.items():
            mat.add_to(r, c, v)
    b = {r: v for r, v in rhs.items() if v != 0}
    sol = solve(mat, b)
    if sol is None:
        raise AssertionError("no fundamental level-2 cycle exists")
    coeffs = {unk[c]: v for c, v in sol.items() if v != 0}
    _FUNDAMENTAL_CACHE[key] = (coeffs, Y)
    return coeffs


class EpsilonMap:
    """The multiplicative comparison map from a free model into the chain
    complex.

    Generators attached to degree-1 classes land in level 1 (one letter in
    the matching loop slot), the top-class generators land in level 2, and
    products are sent to shuffle products of the generator images.
    """

    def __init__(self, F, C):
        if C.A is not F.V:
            raise ValueError("complex coefficients differ from the model's")
        self.F, self.C = F, C
        kind, par = _parse_space(F.space)
        Y, A, M = C.Y, C.A, C.M
        if kind == "wedge":
            if Y.meta.get("space") != "wedge_circles" or \
                    Y.meta.get("m") != par:
                raise ValueError("model space does not match the complex")
        elif kind == "sigma":
            if Y.meta.get("space") != "sigma" or Y.meta.get("g") != par:
                raise ValueError("model space does not match the complex")
            if not C.normalized:
                raise ValueError("the surface comparison map needs the "
                                 "normalized complex")
        else:
            if Y.meta.get("space") != "sphere2":
                raise ValueError("model space does not match the complex")
        self._gen_chain = {}
        size0 = Y.sizes[0]
        size1 = Y.sizes[1] if Y.max_level >= 1 else None
        for gi, ((key, vlab), _) in enumerate(F.generators):
            vpos = next(p for p, (lab, _) in enumerate(F.V.generators)
                        if lab == vlab)
            ai = _v_gen_index(F.V, vpos)
            if key == ("1",):
                tup = (ai,) + (A.unit,) * (size0 - 1)
                chain = {(0, tup): ONE}
            elif key[0] == "c":
                j = key[1]
                tup = [A.unit] * size1
                tup[j] = ai
                chain = {(1, tuple([A.unit] + tup[1:])): ONE}
            elif key[0] in ("a", "b"):
                loops = surface_loops(par, Y.max_level)
                slot = loops[(key[0], key[1])][1][1]
                tup = [A.unit] * size1
                tup[slot] = ai
                chain = {(1, tuple([A.unit] + tup[1:])): ONE}
            else:  # top class
                if kind == "sphere2":
                    interior = Y.meta["interior"][2]
                    size2 = Y.sizes[2]
                    t1 = [A.unit] * size2
                    t1[interior[(1, 2)]] = ai
                    t2 = [A.unit] * size2
                    t2[interior[(2, 1)]] = ai
                    chain = {(2, tuple([A.unit] + t1[1:])): ONE,
                             (2, tuple([A.unit] + t2[1:])): -ONE}
                else:
                    coeffs = surface_fundamental_coefficients(Y, A, M, C)
                    size2 = Y.sizes[2]
                    chain = {}
                    for e, c in coeffs.items():
                        tup = [A.unit] * size2
                        tup[e] = ai
                        chain[(2, tuple([A.unit] + tup[1:]))] = c
            self._gen_chain[gi] = chain
        self._mono_cache = {}

    def of_generator(self, gi):
        """Chain image of the gi-th model generator."""
        return dict(self._gen_chain[gi])

    def of_basis(self, i):
        """Chain image of the i-th model basis monomial."""
        chain = self._mono_cache.get(i)
        if chain is None:
            exps = self.F.algebra.basis[i][0]
            chain = unit_chain(self.C)
            for gi, e in enumerate(exps):
                for _ in range(e):
                    chain = shuffle_product(self.C, chain,
                                            self._gen_chain[gi])
            self._mono_cache[i] = chain
        return dict(chain)

    def __call__(self, u):
        """Chain image of a sparse model element."""
        out = {}
        for i, c in u.items():
            for key, w in self.of_basis(i).items():
                v = out.get(key, None)
                v = c * w if v is None else v + c * w
                if v == 0:
                    out.pop(key, None)
                else:
                    out[key] = v
        return out


def eps_map(F, C):
    """The comparison map from the free model F into the chain complex C
    (see EpsilonMap)."""
    return EpsilonMap(F, C)


# ---------------------------------------------------------------------------
# the comparison map out of the chain complex (circle wedges)
# ---------------------------------------------------------------------------

def _compositions(n, m):
    """All m-tuples of nonnegative integers summing to n."""
    out = []
    for cuts in combinations(range(n + m - 1), m - 1):
        prev, comp = -1, []
        for c in cuts:
            comp.append(c - prev - 1)
            prev = c
        comp.append(n + m - 2 - prev)
        out.append(tuple(comp))
    return out


def pi_wedge(F, C, chain):
    """Project a chain over a circle wedge onto the free model.

    For a level-n monomial the result is the sum over all ways of cutting
    the positions 1..n into consecutive windows, one per circle: the
    letters of circle j inside its window are shifted to the circle-j copy
    and multiplied (divided by the window length factorial), all other
    letters multiply into the module slot.  Letters shifted from the unit
    slot vanish, so degenerate monomials map to zero.

    Parameters
    ----------
    F : FreeModelAlgebra
        A wedge model over the same S(V).
    C : HochschildComplex
        Complex over `wedge_circles(m, K)` with the algebra as its own
        module.
    chain : dict

    Returns
    -------
    dict
        Sparse element of the model.
    """
    Y, A, M = C.Y, C.A, C.M
    if C.A is not F.V:
        raise ValueError("complex coefficients differ from the model's")
    m = Y.meta["m"]
    kind, par = _parse_space(F.space)
    if kind != "wedge" or par != m:
        raise ValueError("model space does not match the complex")
    shift = [None] + [F.shift_ops[("c", j)] for j in range(1, m + 1)]
    out = {}
    for (n, slots), coeff in chain.items():
        if n == 0:
            _acc_sparse(out, _embed_module(F, slots[0]), coeff)
            continue
        # the n odd shift operators are applied slot by slot; collecting
        # them from their slots costs the reordering sign of n odd letters
        if (n * (n - 1) // 2) % 2:
            coeff = -coeff
        for comp in _compositions(n, m):
            N = [0]
            for p in comp:
                N.append(N[-1] + p)
            owner = [None] * (n + 1)
            for j in range(1, m + 1):
                for t in range(N[j - 1] + 1, N[j] + 1):
                    owner[t] = j
            fmap = [0] * Y.sizes[n]
            for j in range(1, m + 1):
                for t in range(1, n + 1):
                    if N[j - 1] < t <= N[j]:
                        fmap[(j - 1) * n + t] = t
            factor = ONE
            for p in comp:
                factor = factor / QQ(factorial(p))
            for w, tup in pushforward_set_map(A, M, fmap, n + 1, slots):
                if any(tup[t] == A.unit for t in range(1, n + 1)):
                    continue  # a shifted unit letter vanishes
                # the n odd operators also pass over the module factor
                if (n * M.degree(tup[0])) % 2:
                    w = -w
                elem = _embed_module(F, tup[0])
                for t in range(1, n + 1):
                    letter = F.embed({tup[t]: ONE})
                    elem = F.mul(elem, apply_matrix(shift[owner[t]],
                                                    letter))
                    if not elem:
                        break
                if elem:
                    _acc_sparse(out, elem, coeff * w * factor)
    return out


def _embed_module(F, mu):
    """Embed a module basis element (the algebra over itself) into the
    model."""
    return F.embed({mu: ONE})


def _acc_sparse(out, elem, c):
    for k, v in elem.items():
        w = out.get(k, None)
        w = c * v if w is None else w + c * v
        if w == 0:
            out.pop(k, None)
        else:
            out[k] = w
    return out


# ---------------------------------------------------------------------------
# genus-graded duals and their product
# ---------------------------------------------------------------------------

def dual_letters(genus, V):
    """Canonical letter list of the surface model of one genus: for every
    V generator one letter per loop class a_1..a_g, b_1..b_g and one for
    the top class.  Returns (letters, degrees); a letter is (kind, i,
    vpos) with kind 0 = a, 1 = b, 2 = top."""
    letters, degrees = [], []
    for i in range(1, genus + 1):
        for vpos, (_, d) in enumerate(V.generators):
            letters.append((0, i, vpos))
            degrees.append(d - 1)
    for i in range(1, genus + 1):
        for vpos, (_, d) in enumerate(V.generators):
            letters.append((1, i, vpos))
            degrees.append(d - 1)
    for vpos, (_, d) in enumerate(V.generators):
        letters.append((2, 0, vpos))
        degrees.append(d - 2)
    return letters, degrees


class DualElement:
    """An S(V)-linear functional on the genus-g free surface model,
    tabulated on monomials in the letters of positive homology degree.

    Parameters
    ----------
    V : FiniteGCDA
        The value algebra S(V).
    genus : int
    table : dict
        {exponent tuple over `dual_letters(genus, V)`: sparse S(V)
        element}; monomials outside the table evaluate to zero.
    """

    def __init__(self, V, genus, table, name=""):
        self.V = V
        self.genus = genus
        self.letters, self.letter_degrees = dual_letters(genus, V)
        self.table = {k: dict(v) for k, v in table.items() if v}
        self.name = name

    def degree(self):
        """Degree of the functional (value degree minus input degree);
        None for the zero functional, an error if inhomogeneous."""
        degs = set()
        for exps, val in self.table.items():
            mdeg = sum(e * d for e, d in zip(exps, self.letter_degrees))
            for i in val:
                degs.add(self.V.degree(i) - mdeg)
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("inhomogeneous functional")
        return degs.pop()

    def ev(self, exps):
        """Value on a letter monomial."""
        return dict(self.table.get(tuple(exps), {}))

    def pair(self, F, u):
        """Value on a sparse element of the matching FreeModelAlgebra.

        The S(V)-coefficient of a model monomial passes the functional
        with the usual Koszul sign before being multiplied in.
        """
        deg = self.degree()
        out = {}
        for i, c in u.items():
            plain, ext = F.split_basis(i)
            val = self.table.get(self._from_model(F, ext))
            if not val:
                continue
            pdeg = sum(e * F.V.generators[p][1]
                       for p, e in enumerate(plain))
            sgn = -ONE if (deg or 0) % 2 and pdeg % 2 else ONE
            coeff = {self.V.index(plain): sgn * c}
            for k, w in self.V.mul(coeff, val).items():
                v = out.get(k, None)
                v = w if v is None else v + w
                if v == 0:
                    out.pop(k, None)
                else:
                    out[k] = v
        return out

    def _from_model(self, F, ext):
        """Reorder external model exponents into the letter order."""
        pos = {}
        for gi, ((key, vlab), _) in enumerate(F.generators):
            if key[0] == "a":
                kind = (0, key[1])
            elif key[0] == "b":
                kind = (1, key[1])
            elif key[0] == "s":
                kind = (2, 0)
            else:
                continue
            vpos = next(p for p, (lab, _) in enumerate(F.V.generators)
                        if lab == vlab)
            pos[(kind[0], kind[1], vpos)] = gi - F.n_plain
        return tuple(ext[pos[let]] for let in self.letters)

    def __repr__(self):
        return "DualElement(genus=%d, %d monomials%s)" % (
            self.genus, len(self.table),
            ", %s" % self.name if self.name else "")


def dual_unit(V):
    """The unit functional: 1 on the empty monomial at genus 0."""
    n = len(dual_letters(0, V)[0])
    return DualElement(V, 0, {(0,) * n: {V.unit: ONE}}, name="1")


def _expand_word(exps):
    """Letter word (positions with multiplicity) of an exponent tuple."""
    word = []
    for p, e in enumerate(exps):
        word.extend([p] * e)
    return word


def hkr_cup(phi, psi):
    """Genus-graded product of two dual functionals.

    The product at genus g+h evaluates a monomial by splitting its
    letters: loop letters with index <= g go to the left factor, the
    others (re-indexed) to the right, and every top-class letter goes to
    either side; the values multiply in S(V) with the Koszul signs of the
    splitting.

    Returns a DualElement at genus phi.genus + psi.genus.
    """
    if phi.V is not psi.V:
        raise ValueError("value algebras differ")
    V = phi.V
    g, h = phi.genus, psi.genus
    G = g + h
    letters, degrees = dual_letters(G, V)
    letter_pos = {let: p for p, let in enumerate(letters)}
    lpos = {let: p for p, let in enumerate(phi.letters)}
    rpos = {let: p for p, let in enumerate(psi.letters)}
    # candidate support: merges of one monomial from each table
    cands = set()
    for mL in phi.table:
        for mR in psi.table:
            exps = [0] * len(letters)
            ok = True
            for p, e in enumerate(mL):
                if e:
                    kind, i, vpos = phi.letters[p]
                    exps[letter_pos[(kind, i, vpos)]] += e
            for p, e in enumerate(mR):
                if e:
                    kind, i, vpos = psi.letters[p]
                    ni = i + G - h if kind in (0, 1) else 0
                    q = letter_pos[(kind, ni, vpos)]
                    exps[q] += e
            for p, e in enumerate(exps):
                if e > 1 and degrees[p] % 2:
                    ok = False
            if ok:
                cands.add(tuple(exps))
    psi_deg = psi.degree() or 0
    table = {}
    for m in sorted(cands):
        val = _cup_value(phi, psi, V, g, letters, degrees, lpos, rpos,
                         psi_deg, m)
        if val:
            table[m] = val
    return DualElement(V, G, table,
                       name="(%s cup %s)" % (phi.name, psi.name))


def _cup_value(phi, psi, V, g, letters, degrees, lpos, rpos, psi_deg, m):
    word = _expand_word(m)
    # choices: fixed side for loop letters, both sides for top letters
    choice_sets = []
    for p in word:
        kind, i, _ = letters[p]
        if kind in (0, 1):
            choice_sets.append(("L",) if i <= g else ("R",))
        else:
            choice_sets.append(("L", "R"))
    out = {}
    for sides in iproduct(*choice_sets):
        sign = 1
        for x in range(len(word)):
            if sides[x] != "R":
                continue
            dx = degrees[word[x]]
            if dx % 2 == 0:
                continue
            for y in range(x + 1, len(word)):
                if sides[y] == "L" and degrees[word[y]] % 2:
                    sign = -sign
        expsL = [0] * len(lpos)
        expsR = [0] * len(rpos)
        ldeg = rdeg = 0
        ok = True
        for x, p in enumerate(word):
            kind, i, vpos = letters[p]
            if sides[x] == "L":
                q = lpos[(kind, i, vpos)]
                expsL[q] += 1
                ldeg += degrees[p]
                if expsL[q] > 1 and degrees[p] % 2:
                    ok = False
            else:
                ni = i - g if kind in (0, 1) else 0
                q = rpos[(kind, ni, vpos)]
                expsR[q] += 1
                rdeg += degrees[p]
                if expsR[q] > 1 and degrees[p] % 2:
                    ok = False
        if not ok:
            continue
        vL = phi.table.get(tuple(expsL))
        if not vL:
            continue
        vR = psi.table.get(tuple(expsR))
        if not vR:
            continue
        # the right value (of degree rdeg plus the functional degree)
        # passes the left input word
        c = sign * (1 if ((psi_deg + rdeg) * ldeg) % 2 == 0 else -1)
        for k, w in V.mul(vL, vR).items():
            v = out.get(k, None)
            v = (w if c > 0 else -w) if v is None else \
                v + (w if c > 0 else -w)
            if v == 0:
                out.pop(k, None)
            else:
                out[k] = v
    return out


# ---------------------------------------------------------------------------
# closed-form answer algebras
# ---------------------------------------------------------------------------

class ClosedSurfaceAlgebra:
    """Genus-graded algebra of the surface products for a product of odd
    spheres, in closed form.

    One exponent d per sphere factor S^(2d+1).  At genus g the generators
    are x_k (degree 2d_k+1), alpha_{k,i} and beta_{k,j} for i, j = 1..g
    (degree -2d_k) and omega_k (degree 1-2d_k).  Elements are sparse sums
    of (genus, exponent tuple) monomials; the product adds genera,
    re-indexes the right factor's alpha/beta subscripts by the left genus
    and multiplies freely (odd generators square to zero).
    """

    def __init__(self, exponents, g_max):
        if any(d < 1 for d in exponents):
            raise ValueError("sphere exponents must be >= 1")
        if g_max < 0:
            raise ValueError("negative genus bound")
        self.exponents = list(exponents)
        self.g_max = g_max

    def letters(self, genus):
        """Canonical letter list at one genus with degrees: x letters
        first, then the dual letters in the order of `dual_letters`."""
        out = []
        for k, d in enumerate(self.exponents):
            out.append((("x", k), 2 * d + 1))
        for i in range(1, genus + 1):
            for k, d in enumerate(self.exponents):
                out.append((("a", i, k), -2 * d))
        for i in range(1, genus + 1):
            for k, d in enumerate(self.exponents):
                out.append((("b", i, k), -2 * d))
        for k, d in enumerate(self.exponents):
            out.append((("w", k), 1 - 2 * d))
        return out

    def generator(self, name, genus, k=0, i=1):
        """The generator as an element: name in {"x", "a", "b", "w"}."""
        lets = self.letters(genus)
        if name in ("x", "w"):
            target = (name, k)
        else:
            target = (name, i, k)
        exps = [0] * len(lets)
        for p, (lab, _) in enumerate(lets):
            if lab == target:
                exps[p] = 1
                return {(genus, tuple(exps)): ONE}
        raise ValueError("no generator %r at genus %d" % (target, genus))

    def unit(self):
        return {(0, tuple([0] * len(self.letters(0)))): ONE}

    def degree(self, elem):
        """Degree of a homogeneous element (None when zero)."""
        degs = set()
        for (genus, exps), _ in elem.items():
            lets = self.letters(genus)
            degs.add(sum(e * d for e, (_, d) in zip(exps, lets)))
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("inhomogeneous element")
        return degs.pop()

    def cup(self, u, v):
        """Genus-graded product of two elements."""
        out = {}
        for (gl, el), cl in u.items():
            letsL = self.letters(gl)
            for (gr, er), cr in v.items():
                G = gl + gr
                if G > self.g_max:
                    raise ValueError("genus bound exceeded")
                letsR = self.letters(gr)
                lets = self.letters(G)
                pos = {lab: p for p, (lab, _) in enumerate(lets)}
                word = []
                degs = []
                for p, e in enumerate(el):
                    lab, d = letsL[p]
                    word.extend([pos[lab]] * e)
                    degs.extend([d] * e)
                for p, e in enumerate(er):
                    lab, d = letsR[p]
                    if lab[0] in ("a", "b"):
                        lab = (lab[0], lab[1] + gl, lab[2])
                    word.extend([pos[lab]] * e)
                    degs.extend([d] * e)
                exps = [0] * len(lets)
                ok = True
                for x, p in enumerate(word):
                    exps[p] += 1
                    if exps[p] > 1 and degs[x] % 2:
                        ok = False
                if not ok:
                    continue
                _, sgn = sort_letters_sign(word, degs)
                c = cl * cr * (ONE if sgn > 0 else QQ(-1))
                key = (G, tuple(exps))
                w = out.get(key, None)
                w = c if w is None else w + c
                if w == 0:
                    out.pop(key, None)
                else:
                    out[key] = w
        return out

    def value_algebra(self, window=None):
        """S(V) for the matching coefficient algebra: an exterior
        generator per sphere factor."""
        gens = [("x%d" % (k + 1), 2 * d + 1)
                for k, d in enumerate(self.exponents)]
        if window is None:
            window = (0, sum(2 * d + 1 for d in self.exponents))
        return free_gcda(gens, window, name="S(V)")

    def to_dual(self, elem, V=None):
        """The functional corresponding to a closed-form element.

        A monomial evaluates to its x-part on the matching letter
        monomial of the surface model (alpha_{k,i} pairs with the a_i
        copy of the k-th generator, and so on) and to zero elsewhere.
        """
        if V is None:
            V = self.value_algebra()
        out = None
        for (genus, exps), c in elem.items():
            lets = self.letters(genus)
            letters, _ = dual_letters(genus, V)
            pos = {let: p for p, let in enumerate(letters)}
            vexps = [0] * len(self.exponents)
            mexps = [0] * len(letters)
            for p, e in enumerate(exps):
                if not e:
                    continue
                lab = lets[p][0]
                if lab[0] == "x":
                    vexps[lab[1]] += e
                elif lab[0] == "a":
                    mexps[pos[(0, lab[1], lab[2])]] += e
                elif lab[0] == "b":
                    mexps[pos[(1, lab[1], lab[2])]] += e
                else:
                    mexps[pos[(2, 0, lab[1])]] += e
            try:
                vi = V.index(tuple(vexps))
            except KeyError:
                raise ValueError("value escapes the degree window")
            d = DualElement(V, genus, {tuple(mexps): {vi: c}})
            out = d if out is None else _dual_add(out, d)
        if out is None:
            out = DualElement(V, 0, {})
        return out

    def presentation(self):
        """JSON-serializable presentation: generators with degrees and
        the product rule."""
        gens = []
        for k, d in enumerate(self.exponents):
            gens.append({"name": "x%d" % (k + 1), "degree": 2 * d + 1,
                         "per_genus": False})
            gens.append({"name": "alpha%d" % (k + 1), "degree": -2 * d,
                         "per_genus": True})
            gens.append({"name": "beta%d" % (k + 1), "degree": -2 * d,
                         "per_genus": True})
            gens.append({"name": "omega%d" % (k + 1), "degree": 1 - 2 * d,
                         "per_genus": False})
        return {
            "exponents": self.exponents,
            "genus_max": self.g_max,
            "generators": gens,
            "product": "free graded-commutative; genera add and the "
                       "alpha/beta subscripts of the right factor shift "
                       "by the left genus",
        }


def _dual_add(a, b):
    if a.genus != b.genus:
        raise ValueError("genus mismatch")
    table = {k: dict(v) for k, v in a.table.items()}
    for k, v in b.table.items():
        cur = table.setdefault(k, {})
        for i, c in v.items():
            w = cur.get(i, None)
            w = c if w is None else w + c
            if w == 0:
                cur.pop(i, None)
            else:
                cur[i] = w
        if not cur:
            table.pop(k, None)
    return DualElement(a.V, a.genus, table)


def odd_sphere_algebra(n, g_max):
    """Closed-form genus-graded algebra for one odd sphere S^(2n+1)."""
    if n < 1:
        raise ValueError("n >= 1 required")
    return ClosedSurfaceAlgebra([n], g_max)


def lie_group_algebra(exponents, g_max):
    """Closed-form genus-graded algebra for a product of odd spheres
    S^(2d_1+1) x ... x S^(2d_e+1) (the rational model of a compact Lie
    group with those exponents)."""
    return ClosedSurfaceAlgebra(list(exponents), g_max)
