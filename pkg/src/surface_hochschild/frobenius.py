"""Graded Frobenius algebra structure and the coproduct side of the
surface products.

A finite-dimensional graded-commutative algebra with a trace on its top
degree gives a nondegenerate pairing, a duality isomorphism between the
algebra and its linear dual, a product on the dual (`frobenius_mu`) and a
coproduct on the algebra (`nabla`).  Applying the coproduct to the module
slot of a chain over a wedge of two surface models splits the chain into a
pair of chains over the factors (`nabla_tilde`); combined with the pinch
pushforward and the Alexander-Whitney splitting this yields the chain-level
coproduct `delta_gh` dual to the positive-genus cup product, and the
block-extraction coproduct `pinch0_star` for the genus-zero factor.
"""

from .exactla import ONE, QQ, SparseMatrix, solve
from .hochschild import (
    module_right_mul, pushforward_chain, pushforward_set_map)
from .simplicial import (
    OrdinalMap, TruncatedSimplicialSet, apply_ordinal, sphere2)


class FrobeniusData:
    """A finite-dimensional graded-commutative algebra with a trace whose
    induced pairing is nondegenerate in every complementary degree pair.

    Parameters
    ----------
    A : FiniteGCDA
    trace : dict
        {basis index: Scalar}, supported in a single top degree.

    Raises
    ------
    ValueError
        If the trace is inhomogeneous, does not vanish on exact elements,
        or the pairing is degenerate in some degree.
    """

    def __init__(self, A, trace):
        self.A = A
        self.trace = {i: c for i, c in trace.items() if c != 0}
        if not self.trace:
            raise ValueError("zero trace")
        tops = {A.degree(i) for i in self.trace}
        if len(tops) != 1:
            raise ValueError("trace is not homogeneous")
        self.dim = tops.pop()
        for i in range(A.dim()):
            if self.trace_of(A.d({i: ONE})) != 0:
                raise ValueError("trace does not vanish on exact elements")
        self._by_degree = {}
        for i in range(A.dim()):
            self._by_degree.setdefault(A.degree(i), []).append(i)
        self._pairing_inverse = {}
        for d, rows in self._by_degree.items():
            cols = self._by_degree.get(self.dim - d, [])
            if len(rows) != len(cols):
                raise ValueError("pairing is not square in degree %d" % d)
            mat = [[self.pair({r: ONE}, {c: ONE}) for c in cols]
                   for r in rows]
            inv = _invert(mat)
            if inv is None:
                raise ValueError("degenerate pairing in degree %d" % d)
            self._pairing_inverse[d] = (rows, cols, inv)

    def trace_of(self, u):
        """Trace of a sparse algebra element."""
        t = 0
        for i, c in u.items():
            w = self.trace.get(i)
            if w is not None:
                t += c * w
        return t

    def pair(self, u, v):
        """The pairing: trace of the product."""
        return self.trace_of(self.A.mul(u, v))

    def xi(self, u):
        """Duality isomorphism: the functional pairing u against the
        basis, as a sparse dict {basis index: value on that element}."""
        out = {}
        for j in range(self.A.dim()):
            c = self.pair(u, {j: ONE})
            if c != 0:
                out[j] = c
        return out

    def xi_inv(self, phi):
        """Inverse of the duality isomorphism on a sparse functional."""
        out = {}
        degs = {self.dim - self.A.degree(j) for j in phi}
        for d in degs:
            rows, cols, inv = self._pairing_inverse[d]
            vec = [phi.get(c, 0) for c in cols]
            for a, r in enumerate(rows):
                c = sum(inv[b][a] * vec[b] for b in range(len(vec)))
                if c != 0:
                    out[r] = out.get(r, 0) + c
        if self.xi(out) != {k: v for k, v in phi.items() if v != 0}:
            raise ValueError("functional is not in the image of the "
                             "pairing")
        return out

    def __repr__(self):
        return "FrobeniusData(dim=%d, %d basis elements)" % (
            self.dim, self.A.dim())


def _invert(mat):
    """Inverse of a small dense rational matrix, or None."""
    n = len(mat)
    aug = [[QQ(mat[r][c]) for c in range(n)] +
           [ONE if c == r else QQ(0) for c in range(n)] for r in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def frobenius_mu(FD, phi, psi):
    """Product on the dual induced by the algebra product through the
    duality isomorphism.

    Parameters
    ----------
    FD : FrobeniusData
    phi, psi : dict
        Sparse functionals {basis index: value}.

    Returns
    -------
    dict
        The functional of the product (degree raised by the top degree).
    """
    return FD.xi(FD.A.mul(FD.xi_inv(phi), FD.xi_inv(psi)))


def nabla(FD, u):
    """Coproduct on the algebra dual to the multiplication.

    The defining property is <nabla(u), b (x) c> = <u, b c> where the
    pairing on the tensor square carries the Koszul sign of the middle
    crossing.

    Returns {(i, j): Scalar} over basis pairs.
    """
    A = FD.A
    degs = sorted({A.degree(i) for i, c in u.items() if c != 0})
    if not degs:
        return {}
    if len(degs) > 1:
        out = {}
        for d in degs:
            part = {i: c for i, c in u.items() if A.degree(i) == d}
            for k, c in nabla(FD, part).items():
                out[k] = out.get(k, 0) + c
        return {k: c for k, c in out.items() if c != 0}
    total = degs[0] + FD.dim
    unknowns = [(i, j) for i in range(A.dim()) for j in range(A.dim())
                if A.degree(i) + A.degree(j) == total]
    col = {p: c for c, p in enumerate(unknowns)}
    rows = []
    rhs = {}
    for b in range(A.dim()):
        for c in range(A.dim()):
            r = len(rows)
            vals = {}
            for (i, j) in unknowns:
                s = FD.pair({i: ONE}, {b: ONE}) * \
                    FD.pair({j: ONE}, {c: ONE})
                if s != 0 and (A.degree(j) * A.degree(b)) % 2:
                    s = -s
                if s != 0:
                    vals[col[(i, j)]] = s
            if vals:
                rows.append(vals)
                t = FD.pair(u, A.mul({b: ONE}, {c: ONE}))
                if t != 0:
                    rhs[r] = t
            elif FD.pair(u, A.mul({b: ONE}, {c: ONE})) != 0:
                raise ValueError("degenerate tensor pairing")
    mat = SparseMatrix(len(rows), len(unknowns))
    for r, vals in enumerate(rows):
        for c, v in vals.items():
            mat.add_to(r, c, v)
    sol = solve(mat, rhs)
    if sol is None:
        raise ValueError("no coproduct solution; pairing degenerate")
    return {unknowns[c]: v for c, v in sol.items() if v != 0}


# ---------------------------------------------------------------------------
# the diagonal pair complex
# ---------------------------------------------------------------------------

def disjoint_union(Y, Z):
    """Side-by-side union of two models: the Y block keeps its indices
    (and its basepoint is the basepoint), the Z block is appended with its
    own basepoint as a regular element.

    A chain over the result with letters in both blocks is exactly an
    element of the levelwise tensor product of the two chain complexes
    with the diagonal simplicial structure: the Z-block basepoint slot
    holds the second module factor.
    """
    K = min(Y.max_level, Z.max_level)
    sizes = [Y.sizes[k] + Z.sizes[k] for k in range(K + 1)]
    faces = [[]]
    for k in range(1, K + 1):
        tabs = []
        for i in range(k + 1):
            tabs.append(list(Y.faces[k][i]) +
                        [Y.sizes[k - 1] + f for f in Z.faces[k][i]])
        faces.append(tabs)
    degeneracies = []
    for k in range(K):
        tabs = []
        for i in range(k + 1):
            tabs.append(list(Y.degeneracies[k][i]) +
                        [Y.sizes[k + 1] + f for f in Z.degeneracies[k][i]])
        degeneracies.append(tabs)
    U = TruncatedSimplicialSet(K, sizes, faces, degeneracies,
                               name="%s | %s" % (Y.name, Z.name))
    U.meta = {"space": "disjoint_union", "left_sizes": list(Y.sizes)}
    return U


def nabla_tilde(FD, W, inc_left, inc_right, chain):
    """Apply the coproduct to the module slot of a chain over a wedge,
    splitting it into the levelwise tensor product of the two factors.

    Parameters
    ----------
    FD : FrobeniusData
        Frobenius structure on the chain coefficients (M = A).
    W : TruncatedSimplicialSet
        The wedge model.
    inc_left, inc_right : SimplicialMap
        The two inclusions into W.
    chain : dict
        Chain over W with the algebra as its own module.

    Returns
    -------
    dict
        Chain over `disjoint_union(inc_left.source, inc_right.source)`:
        keys (k, slots) with the first module factor in slot 0 and the
        second in the appended block's basepoint slot.
    """
    A = FD.A
    Y, Z = inc_left.source, inc_right.source
    K = min(Y.max_level, Z.max_level)
    # per level: wedge slot -> slot of the union model
    pos = []
    for k in range(K + 1):
        table = {}
        for y in range(1, Y.sizes[k]):
            table[inc_left.levels[k][y]] = y
        for z in range(1, Z.sizes[k]):
            w = inc_right.levels[k][z]
            if w in table:
                raise ValueError("wedge inclusions overlap")
            table[w] = Y.sizes[k] + z
        pos.append(table)
    out = {}
    for (k, slots), c in chain.items():
        table = pos[k]
        usize = Y.sizes[k] + Z.sizes[k]
        letters = [(table[w], A.degree(slots[w]))
                   for w in range(1, len(slots)) if slots[w] != A.unit]
        for (m1, m2), cm in nabla(FD, {slots[0]: ONE}).items():
            # the second module factor moves right past the first-block
            # letters; then sort the letters into block order
            word = [(Y.sizes[k], A.degree(m2))] + letters
            sign = 1
            for x in range(len(word)):
                for y in range(x + 1, len(word)):
                    if word[x][0] > word[y][0] and \
                            word[x][1] % 2 and word[y][1] % 2:
                        sign = -sign
            tup = [A.unit] * usize
            tup[0] = m1
            tup[Y.sizes[k]] = m2
            for w in range(1, len(slots)):
                if slots[w] != A.unit:
                    tup[table[w]] = slots[w]
            key = (k, tuple(tup))
            v = c * cm * (ONE if sign > 0 else QQ(-1))
            cur = out.get(key, None)
            cur = v if cur is None else cur + v
            if cur == 0:
                out.pop(key, None)
            else:
                out[key] = cur
    return out


def pair_split(Y, Z, A, M, uchain):
    """Alexander-Whitney splitting of a chain over `disjoint_union(Y, Z)`
    into bi-level pairs: front faces on the Y block, iterated d_0 on the
    Z block.

    Each term carries the interchange twist (-1)^{q m} (right level times
    left internal degree) so that the result is a chain map into the
    tensor product of the two complexes with the standard Koszul
    differential (see `tensor_D`).

    Returns {((p, y_slots), (q, z_slots)): Scalar} with p + q = k.
    """
    out = {}
    for (k, slots), c in uchain.items():
        for p in range(k + 1):
            q = k - p
            fy = apply_ordinal(Y, OrdinalMap(p, k, list(range(p + 1))))
            fz = apply_ordinal(Z, OrdinalMap(q, k, list(range(p, k + 1))))
            syp = Y.sizes[p]
            fmap = [fy[y] for y in range(Y.sizes[k])] + \
                   [syp + f for f in fz]
            target = syp + Z.sizes[q]
            for w, tup in pushforward_set_map(A, M, fmap, target, slots):
                left = tup[:syp]
                my = M.degree(left[0]) + \
                    sum(A.degree(a) for a in left[1:])
                tw = QQ(-1) if (q * my) % 2 else ONE
                key = ((p, left), (q, tup[syp:]))
                v = out.get(key, None)
                v = c * w * tw if v is None else v + c * w * tw
                if v == 0:
                    out.pop(key, None)
                else:
                    out[key] = v
    return out


def tensor_D(CY, CZ, elem):
    """Differential of the (bi-level) tensor product of two chain
    complexes: D on the left factor plus the Koszul-signed D on the
    right."""
    out = {}

    def add(key, v):
        cur = out.get(key, None)
        cur = v if cur is None else cur + v
        if cur == 0:
            out.pop(key, None)
        else:
            out[key] = cur

    for (ku, kv), c in elem.items():
        for nk, w in CY.apply_D({ku: ONE}).items():
            add((nk, kv), c * w)
        p, slots = ku
        ndeg = sum(CY.A.degree(a) for a in slots[1:]) + \
            CY.M.degree(slots[0]) - p
        sgn = QQ(-1) if ndeg % 2 else ONE
        for nk, w in CZ.apply_D({kv: ONE}).items():
            add((ku, nk), c * w * sgn)
    return out


def collapse_pair(A, M, elem):
    """Canonical representative in the tensor over the algebra: multiply
    the right factor's module content onto the left factor's module.

    The sign is the Koszul sign of moving the content past the left
    letters, corrected by the interchange twist of `pair_split` (the
    left internal degree it multiplies changes by the content's degree).
    """
    out = {}
    for ((p, sY), (q, sZ)), c in elem.items():
        b = sZ[0]
        if b == A.unit:
            key = ((p, sY), (q, sZ))
            v = out.get(key, None)
            v = c if v is None else v + c
            if v == 0:
                out.pop(key, None)
            else:
                out[key] = v
            continue
        beta = A.degree(b)
        lets = sum(A.degree(a) for a in sY[1:])
        sgn = QQ(-1) if (beta * (lets + q)) % 2 else ONE
        for m2, w in module_right_mul(A, M, {sY[0]: ONE}, b).items():
            key = ((p, (m2,) + sY[1:]), (q, (A.unit,) + sZ[1:]))
            v = out.get(key, None)
            v = c * w * sgn if v is None else v + c * w * sgn
            if v == 0:
                out.pop(key, None)
            else:
                out[key] = v
    return out


def delta_gh(FD, pinch, chain):
    """Chain-level coproduct dual to the positive-genus cup product: push
    forward along the pinch map, apply the module coproduct, split by
    Alexander-Whitney.

    Parameters
    ----------
    FD : FrobeniusData
    pinch : SimplicialMap
        A pinch map with `wedge_parts` (from `pinch_map(g, h, K)`).
    chain : dict
        Chain over the glued surface with the algebra as its own module.

    Returns
    -------
    dict
        {((p, genus-g slots), (q, genus-h slots)): Scalar}.
    """
    A = FD.A
    from .gca import module_over_self
    M = module_over_self(A)
    W, iG, iH = pinch.wedge_parts
    pushed = pushforward_chain(A, M, pinch.levels, W.sizes, chain)
    split = nabla_tilde(FD, W, iG, iH, pushed)
    return pair_split(iG.source, iH.source, A, M, split)


# ---------------------------------------------------------------------------
# the genus-zero coproduct by block extraction
# ---------------------------------------------------------------------------

def pinch0_star(Sg, A, M, chain):
    """Split a chain over a surface model into a sphere factor carrying
    the top-left block and the remaining surface factor.

    For every monomial at level k and every cut 0 <= p <= k: the top-left
    block entries with both coordinates in 1..p become the interior of a
    level-p sphere monomial, the block's boundary strip entries with
    coordinate <= p multiply into the module, and the rest of the
    monomial is pushed to level k-p by iterated d_0.

    The result is the canonical representative in the tensor over the
    algebra (see `collapse_pair`): the surface factor's module slot is
    the unit, and it is a chain map for `collapse_pair` composed with
    `tensor_D`.

    Returns {((p, sphere slots), (k-p, surface slots)): Scalar}.
    """
    atlas = Sg.meta["atlas"]
    Ssph = sphere2(Sg.max_level)
    out = {}
    # per level: element -> ("int", i, j) / ("strip", index) / None
    coords = []
    for k in range(Sg.max_level + 1):
        table = {}
        for key, e in atlas[k].items():
            if len(key) != 3 or key[0] != (1, 1, "Q"):
                continue
            _, i, j = key
            if 1 <= i <= k and 1 <= j <= k:
                table[e] = ("int", i, j)
            elif (i == 0 and 1 <= j <= k) or (j == 0 and 1 <= i <= k):
                cur = table.get(e)
                if cur is None or cur[0] == "strip":
                    table[e] = ("strip", max(i, j))
        coords.append(table)
    for (k, slots), c in chain.items():
        table = coords[k]
        interior = Ssph.meta["interior"][k]
        for p in range(k + 1):
            q = k - p
            ssize = Ssph.sizes[k]
            # move the block letters into a sphere-model prefix; the
            # reordering sign comes from the combined pushforward below
            fy_front = apply_ordinal(Ssph, OrdinalMap(
                p, k, list(range(p + 1))))
            fz_back = apply_ordinal(Sg, OrdinalMap(
                q, k, list(range(p, k + 1))))
            ssize_p = Ssph.sizes[p]
            fmap = [0] * (ssize + Sg.sizes[k])
            pre = [0] * Sg.sizes[k]        # source slot -> staging slot
            for e in range(1, Sg.sizes[k]):
                if slots[e] == A.unit:
                    continue
                info = table.get(e)
                if info is not None and info[0] == "int" and \
                        info[1] <= p and info[2] <= p:
                    pre[e] = interior[(info[1], info[2])]
                elif info is not None and info[0] == "strip" and \
                        info[1] <= p:
                    pre[e] = 0                 # fold into the module
                else:
                    pre[e] = ssize + e
            # staging tuple over [sphere level k | surface level k],
            # then front faces on the sphere block and iterated d_0 on
            # the surface block
            stage_size = ssize + Sg.sizes[k]
            fmap2 = [fy_front[s] for s in range(ssize)] + \
                    [ssize_p + f for f in fz_back]
            target = ssize_p + Sg.sizes[q]
            for w0, tup0 in pushforward_set_map(
                    A, M, [pre[e] for e in range(Sg.sizes[k])],
                    stage_size, slots):
                for w, tup in pushforward_set_map(A, M, fmap2, target,
                                                  tup0):
                    left = tup[:ssize_p]
                    my = M.degree(left[0]) + \
                        sum(A.degree(a) for a in left[1:])
                    tw = QQ(-1) if (q * my) % 2 else ONE
                    key = ((p, left), (q, tup[ssize_p:]))
                    v = out.get(key, None)
                    v = c * w0 * w * tw if v is None \
                        else v + c * w0 * w * tw
                    if v == 0:
                        out.pop(key, None)
                    else:
                        out[key] = v
    return collapse_pair(A, M, out)


# ---------------------------------------------------------------------------
# the duality pairing
# ---------------------------------------------------------------------------

def theta_pairing(FD, f, chain):
    """Pair a cochain against a chain through the Frobenius trace: the
    trace of (module slot times the cochain value on the letters), summed
    over the monomials at the cochain's level."""
    total = 0
    for (k, slots), c in chain.items():
        if k != f.level:
            continue
        val = f.ev(slots[1:])
        if not val:
            continue
        total += c * FD.trace_of(FD.A.mul({slots[0]: ONE}, val))
    return total
