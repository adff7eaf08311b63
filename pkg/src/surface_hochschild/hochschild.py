"""Higher Hochschild chain and cochain complexes over a truncated
simplicial set, with normalization, shuffle/Eilenberg-Zilber structure and
the genus-graded cup products.

Chains
------
A monomial at simplicial level k is a tuple of basis indices over the
elements of Y_k in their canonical order; slot 0 (the basepoint) carries a
module basis element, every other slot an algebra basis element.  A chain
is a sparse dict {(k, slots): Scalar}.  Internal degree m is the sum of
the slot degrees and the total degree is n = m - k.

Every structural map is a composition of slot permutations and fiber
multiplications; all signs are produced by the Koszul sign engine of
`gca`, never hand-coded per map.
"""

from .exactla import ONE, QQ
from .gca import graded_sign
from .simplicial import OrdinalMap, apply_ordinal


# ---------------------------------------------------------------------------
# pushforward along pointed set maps (the one sign engine entry point)
# ---------------------------------------------------------------------------

def _letters_of(A, M, slots):
    """Degrees of the slot letters in canonical order (module slot first)."""
    degs = [M.degree(slots[0])]
    degs.extend(A.degree(s) for s in slots[1:])
    return degs


def module_right_mul(A, M, mvec, j):
    """Right action m . b_j computed from the left action by the Koszul
    flip m . a = (-1)^{|a||m|} a . m."""
    out = {}
    da = A.degree(j)
    for mm, c in mvec.items():
        sgn = QQ(-1) if (da % 2 and M.degree(mm) % 2) else ONE
        for k, w in M.act_basis(j, mm).items():
            v = out.get(k, None)
            v = sgn * c * w if v is None else v + sgn * c * w
            if v == 0:
                out.pop(k, None)
            else:
                out[k] = v
    return out


def pushforward_set_map(A, M, fmap, target_size, slots):
    """Pushforward of one monomial along a pointed set map.

    Parameters
    ----------
    A, M : FiniteGCDA, DGModule
    fmap : list
        ``fmap[i]`` is the target index of source slot i; ``fmap[0]`` must
        be 0.
    target_size : int
    slots : tuple
        Source monomial (module index, algebra indices...).

    Returns
    -------
    list of (Scalar, slots)
        The signed expansion: each target slot receives the product of its
        fiber in canonical source order (the unit for an empty fiber), the
        basepoint fiber multiplies the module slot on the right, and the
        sign is the Koszul sign of regrouping the slot letters.
    """
    if fmap[0] != 0:
        raise ValueError("set map is not pointed")
    unit = A.unit
    active = [i for i in range(1, len(slots)) if slots[i] != unit]
    # Koszul sign of the stable regrouping by target slot: unit letters
    # have degree 0 and the basepoint letter stays first, so only the odd
    # active letters that pass each other contribute
    odd = [i for i in active if A.degree(slots[i]) % 2]
    sign = ONE
    for p in range(len(odd)):
        for q in range(p + 1, len(odd)):
            if fmap[odd[p]] > fmap[odd[q]]:
                sign = -sign
    # fold fibers (canonical source order within each target slot)
    groups = {}
    for i in active:
        groups.setdefault(fmap[i], []).append(i)
    mvec = {slots[0]: sign}
    for i in groups.pop(0, ()):
        mvec = module_right_mul(A, M, mvec, slots[i])
        if not mvec:
            return []
    filled = []
    for j, fib in groups.items():
        vec = {slots[fib[0]]: ONE}
        for i in fib[1:]:
            vec = A.mul(vec, {slots[i]: ONE})
        if not vec:
            return []
        filled.append((j, vec))
    # distribute sparse slot contents into monomials
    terms = [(c, ((0, mm),)) for mm, c in mvec.items()]
    for j, vec in filled:
        new = []
        for c, asg in terms:
            for a, w in vec.items():
                new.append((c * w, asg + ((j, a),)))
        terms = new
    out = []
    for c, asg in terms:
        tup = [unit] * target_size
        for j, a in asg:
            tup[j] = a
        out.append((c, tuple(tup)))
    return out


def pushforward_chain(A, M, fmap_levels, target_sizes, chain):
    """Pushforward of a chain along a level-wise pointed set map (for
    example the levels of a SimplicialMap)."""
    out = {}
    for (k, slots), c in chain.items():
        for w, tup in pushforward_set_map(A, M, fmap_levels[k],
                                          target_sizes[k], slots):
            key = (k, tup)
            v = out.get(key, None)
            v = c * w if v is None else v + c * w
            if v == 0:
                out.pop(key, None)
            else:
                out[key] = v
    return out


# ---------------------------------------------------------------------------
# the chain complex
# ---------------------------------------------------------------------------

def degeneracy_index_sets(Y, k):
    """For each element y of level k, the set of i with y in the image of
    s_i (empty at level 0)."""
    sets = [set() for _ in range(Y.sizes[k])]
    if k >= 1:
        for i, tab in enumerate(Y.degeneracies[k - 1]):
            for y in tab:
                sets[y].add(i)
    return sets


def is_degenerate_tuple(Y, k, slots, A, module_slot=True):
    """A monomial is degenerate iff some single degeneracy index covers all
    its non-unit, non-basepoint slots."""
    if k == 0:
        return False
    sets = _degsets(Y, k)
    common = None
    start = 1 if module_slot else 0
    for i in range(start, len(slots)):
        if slots[i] != A.unit:
            s = sets[i + (0 if module_slot else 1)]
            common = set(s) if common is None else common & s
            if not common:
                return False
    if common is None:
        return True  # all slots are units
    return bool(common)


_DEGSETS = {}


def _degsets(Y, k):
    key = (id(Y), k)
    val = _DEGSETS.get(key)
    if val is None:
        val = degeneracy_index_sets(Y, k)
        _DEGSETS[key] = (val, Y)  # keep Y alive
        return val
    return val[0]


class HochschildComplex:
    """Materialized higher Hochschild chain complex in a total-degree
    window.

    Parameters
    ----------
    Y : TruncatedSimplicialSet
    A : FiniteGCDA
    M : DGModule
    K : int
        Highest simplicial level used.
    window : (int, int)
        Inclusive window of total degrees n = m - k.
    normalized : bool
        When True the basis consists of nondegenerate monomials only and
        the differential is followed by the projection killing degenerate
        monomials.
    """

    def __init__(self, Y, A, M, K, window, normalized=False, check=True):
        if Y.max_level < K:
            raise ValueError("Y truncated below K")
        self.Y, self.A, self.M, self.K = Y, A, M, K
        self.window = window
        self.normalized = normalized
        self._basis = {}
        self._index = {}
        if check:
            bad = self.d_squared_defects()
            if bad:
                raise AssertionError("D^2 != 0: %s" % bad[0])

    # -- bases ---------------------------------------------------------

    def basis(self, k, m):
        """Ordered monomial basis of simplicial level k, internal degree
        m."""
        key = (k, m)
        if key not in self._basis:
            self._basis[key] = self._enumerate(k, m)
            self._index[key] = {t: i
                                for i, t in enumerate(self._basis[key])}
        return self._basis[key]

    def index(self, k, m):
        self.basis(k, m)
        return self._index[(k, m)]

    def _enumerate(self, k, m):
        Y, A, M = self.Y, self.A, self.M
        nslots = Y.sizes[k] - 1
        nonunit = [i for i in range(A.dim()) if i != A.unit]
        degs = sorted({A.degree(i) for i in nonunit})
        if not degs:
            lo_d = hi_d = 0
        else:
            lo_d, hi_d = min(degs + [0]), max(degs + [0])
        pos_min = min((d for d in degs if d > 0), default=None)
        covers = None
        if self.normalized and k >= 1:
            sets = _degsets(Y, k)
            full = frozenset(range(k))
            covers = [full - frozenset(sets[i + 1]) for i in range(nslots)]
            # suffix tables: what the slots from position j onward can
            # still cover, and the largest single-slot cover among them
            suffix_reach = [frozenset()] * (nslots + 1)
            suffix_cmax = [0] * (nslots + 1)
            for j in range(nslots - 1, -1, -1):
                suffix_reach[j] = suffix_reach[j + 1] | covers[j]
                suffix_cmax[j] = max(suffix_cmax[j + 1], len(covers[j]))
        # degree bounds achievable by a given number of remaining slots
        lo_arr = [min(0, left * lo_d) for left in range(nslots + 1)]
        hi_arr = [max(0, left * hi_d) for left in range(nslots + 1)]
        letters = [(a, A.degree(a)) for a in nonunit]
        out = []
        for mu in range(M.dim()):
            rem0 = m - M.degree(mu)
            tup = [A.unit] * nslots

            def rec(pos, rem, uncovered):
                # slots before pos are fixed, the rest currently unit
                if rem == 0 and (covers is None or not uncovered):
                    out.append((mu,) + tuple(tup))
                # place the next non-unit letter at some position j >= pos
                for j in range(pos, nslots):
                    left = nslots - j
                    # feasibility is monotone in j, so stop once broken
                    if not (lo_arr[left] <= rem <= hi_arr[left]):
                        return
                    if covers is not None and uncovered:
                        if not uncovered <= suffix_reach[j]:
                            return
                        if pos_min is not None and rem > 0:
                            budget = min(rem // pos_min, left)
                        else:
                            budget = left
                        if suffix_cmax[j] * budget < len(uncovered):
                            return
                    for a, da in letters:
                        r2 = rem - da
                        if not (lo_arr[left - 1] <= r2 <= hi_arr[left - 1]):
                            continue
                        tup[j] = a
                        if covers is None:
                            rec(j + 1, r2, uncovered)
                        else:
                            rec(j + 1, r2, uncovered - covers[j])
                    tup[j] = A.unit

            rec(0, rem0, frozenset(range(k)) if covers is not None
                else frozenset())
        out.sort()
        return out

    # -- differential --------------------------------------------------

    def apply_D(self, chain):
        """Total differential: internal part (m -> m+1) plus the
        alternating face pushforwards (k -> k-1)."""
        Y, A, M = self.Y, self.A, self.M
        out = {}

        def add(key, v):
            cur = out.get(key, None)
            cur = v if cur is None else cur + v
            if cur == 0:
                out.pop(key, None)
            else:
                out[key] = cur

        has_internal = bool(A.differential) or bool(M.differential)
        for (k, slots), c in chain.items():
            # internal differential with sign (-1)^{k + eps_i}
            if has_internal:
                degs = _letters_of(A, M, slots)
                eps = 0
                for i in range(len(slots)):
                    if i == 0:
                        dvec = M.differential.get(slots[0], {})
                    else:
                        dvec = A.differential.get(slots[i], {})
                    if dvec:
                        sgn = QQ(-1) if (k + eps) % 2 else ONE
                        for b, w in dvec.items():
                            ns = slots[:i] + (b,) + slots[i + 1:]
                            add((k, ns), c * sgn * w)
                    eps += degs[i]
            # face part
            if k >= 1:
                for i in range(k + 1):
                    sgn = QQ(-1) if i % 2 else ONE
                    for w, tup in pushforward_set_map(
                            A, M, Y.faces[k][i], Y.sizes[k - 1], slots):
                        if self.normalized and is_degenerate_tuple(
                                Y, k - 1, tup, A):
                            continue
                        add((k - 1, tup), c * sgn * w)
        if self.normalized:
            out = {key: v for key, v in out.items()
                   if not is_degenerate_tuple(self.Y, key[0], key[1],
                                              self.A)}
        return out

    def d_squared_defects(self, max_terms=1):
        """Monomials whose double differential is nonzero (should be
        none)."""
        bad = []
        n_lo, n_hi = self.window
        for k in range(self.K + 1):
            for n in range(n_lo, n_hi + 1):
                for t in self.basis(k, n + k):
                    dd = self.apply_D(self.apply_D({(k, t): ONE}))
                    dd = {key: v for key, v in dd.items()
                          if self._in_window(key)}
                    if dd:
                        bad.append(((k, t), sorted(dd)[0]))
                        if len(bad) >= max_terms:
                            return bad
        return bad

    def _in_window(self, key):
        k, slots = key
        if k > self.K:
            return False
        m = sum(_letters_of(self.A, self.M, slots))
        n_lo, n_hi = self.window
        return n_lo <= m - k <= n_hi

    # -- total-degree linear algebra ------------------------------------

    def total_basis(self, n):
        """Ordered basis of total degree n: all (k, slots) with m-k = n,
        k = 0..K."""
        out = []
        for k in range(self.K + 1):
            for t in self.basis(k, n + k):
                out.append((k, t))
        return out

    def differential_matrix(self, n):
        """SparseMatrix of D: C_n -> C_{n+1} over the total bases."""
        from .exactla import SparseMatrix
        src = self.total_basis(n)
        dst = self.total_basis(n + 1)
        dst_index = {t: i for i, t in enumerate(dst)}
        mat = SparseMatrix(len(dst), len(src))
        for c, key in enumerate(src):
            for dkey, v in self.apply_D({key: ONE}).items():
                r = dst_index.get(dkey)
                if r is not None:
                    mat.add_to(r, c, v)
        return mat


def build_complex(Y, A, M, K, window, normalized=False, check=True):
    """Construct a HochschildComplex (see class docstring)."""
    return HochschildComplex(Y, A, M, K, window, normalized=normalized,
                             check=check)


def normalize(C):
    """Quotient of C by the span of the degeneracy images.

    Each degeneracy pushforward of a monomial is (a sign times) a single
    monomial, so the span is monomial and the quotient basis consists of
    the nondegenerate monomials; this is verified per bidegree against the
    image of the degeneracy maps before returning the quotient complex.
    """
    Y, A, M = C.Y, C.A, C.M
    n_lo, n_hi = C.window
    for k in range(1, C.K + 1):
        for n in range(n_lo, n_hi + 1):
            m = n + k
            degset = {t for t in C.basis(k, m)
                      if is_degenerate_tuple(Y, k, t, A)}
            hit = set()
            for i, tab in enumerate(Y.degeneracies[k - 1]):
                for t in C.basis(k - 1, m):
                    terms = pushforward_set_map(A, M, tab, Y.sizes[k], t)
                    if len(terms) > 1:
                        raise AssertionError(
                            "degeneracy image is not monomial")
                    for _, tup in terms:
                        hit.add(tup)
            if hit != degset:
                raise AssertionError(
                    "degenerate span mismatch at (k=%d, m=%d)" % (k, m))
    return HochschildComplex(Y, A, M, C.K, C.window, normalized=True,
                             check=False)


# ---------------------------------------------------------------------------
# shuffle product and Eilenberg-Zilber / Alexander-Whitney structure
# ---------------------------------------------------------------------------

def _shuffles(p, q):
    """(p,q)-shuffles as (mu, nu, sign): mu and nu partition {0..p+q-1},
    both increasing; sign is the permutation parity."""
    out = []
    from itertools import combinations
    full = list(range(p + q))
    for mu in combinations(full, p):
        nu = tuple(i for i in full if i not in mu)
        inv = sum(1 for a in mu for b in nu if a > b)
        out.append((mu, nu, 1 if inv % 2 == 0 else -1))
    return out


def _apply_degeneracies(A, M, Y, k, slots, indices):
    """Pushforward along s_{i_r} ... s_{i_1} (apply indices left to
    right), returning (coeff, slots, new_level)."""
    coeff, cur, lev = ONE, slots, k
    for i in indices:
        terms = pushforward_set_map(A, M, Y.degeneracies[lev][i],
                                    Y.sizes[lev + 1], cur)
        if not terms:
            return None
        if len(terms) != 1:
            raise AssertionError("degeneracy pushforward not monomial")
        w, cur = terms[0]
        coeff *= w
        lev += 1
    return coeff, cur, lev


def _slotwise_multiply(A, M, slots1, slots2):
    """Slotwise product of two monomials at the same level (M = A
    required): interleave the letters slot by slot with Koszul signs."""
    n = len(slots1)
    letters = []
    degs = []
    for s in slots1:
        degs.append(A.degree(s))
    for s in slots2:
        degs.append(A.degree(s))
    # permutation placing (slot j of 1, slot j of 2) consecutively
    perm = []
    for j in range(n):
        perm.append(j)
        perm.append(n + j)
    sign = graded_sign(degs, perm)
    terms = [(ONE if sign > 0 else QQ(-1), ())]
    for j in range(n):
        prod = A.mul_basis(slots1[j], slots2[j])
        new = []
        for c, tup in terms:
            for a, w in prod.items():
                new.append((c * w, tup + (a,)))
        terms = new
        if not terms:
            return []
    return terms


def shuffle_product(C, u, v):
    """Shuffle product of chains in CH^Y(A, A).

    For monomials at levels p and q the result is the signed sum over
    (p,q)-shuffles of the slotwise product of the two degeneracy
    pushforwards at level p+q, twisted by the decalage sign
    (-1)^{deg(u) * q} that makes the product graded-commutative and
    Leibniz for the total degree.
    """
    Y, A, M = C.Y, C.A, C.M
    out = {}
    for (p, s1), c1 in u.items():
        m1 = sum(_letters_of(A, M, s1))
        for (q, s2), c2 in v.items():
            if p + q > C.K:
                raise ValueError("level overflow beyond truncation")
            tw = QQ(-1) if (m1 * q) % 2 else ONE
            for mu, nu, sgn in _shuffles(p, q):
                r1 = _apply_degeneracies(A, M, Y, p, s1, nu)
                if r1 is None:
                    continue
                r2 = _apply_degeneracies(A, M, Y, q, s2, mu)
                if r2 is None:
                    continue
                w1, t1, _ = r1
                w2, t2, _ = r2
                base = tw * c1 * c2 * w1 * w2 * \
                    (ONE if sgn > 0 else QQ(-1))
                for w, tup in _slotwise_multiply(A, M, t1, t2):
                    key = (p + q, tup)
                    cur = out.get(key, None)
                    cur = base * w if cur is None else cur + base * w
                    if cur == 0:
                        out.pop(key, None)
                    else:
                        out[key] = cur
    if C.normalized:
        out = {key: v for key, v in out.items()
               if not is_degenerate_tuple(Y, key[0], key[1], A)}
    return out


def unit_chain(C):
    """The unit 1 in level 0 (requires M = A as a module over itself)."""
    slots = (C.A.unit,) * C.Y.sizes[0]
    return {(0, slots): ONE}


# -- grid (iterated) complexes and EZ / AW ---------------------------------

def _grid_map(fy, fz, ny_src, nz_src, ny_dst, nz_dst):
    """Set map on lexicographic grid indices from maps on the factors."""
    out = []
    for y in range(ny_src):
        for z in range(nz_src):
            out.append(fy[y] * nz_dst + fz[z])
    return out


class GridComplex:
    """The iterated complex CH^{Y}(CH^{Z}(A)) in bidegrees (p, q): a
    monomial is an A-assignment on the grid Y_p x Z_q (lexicographic).

    The differential is D^Y (faces of Y acting on rows) plus (-1)^p D^Z
    (faces of Z acting on columns); the algebra is its own module.  With
    normalized=True all outputs are projected to the quotient by the
    degenerate monomials (in either grid direction, and diagonally for the
    images of ez).
    """

    def __init__(self, Y, Z, A, M, K, normalized=False):
        self.Y, self.Z, self.A, self.M, self.K = Y, Z, A, M, K
        self.normalized = normalized
        from .simplicial import diagonal_product
        self.diag = diagonal_product(Y, Z)

    def sizes(self, p, q):
        return self.Y.sizes[p] * self.Z.sizes[q]

    def is_degenerate(self, p, q, slots):
        """Degenerate in the Y-direction or the Z-direction: some single
        degeneracy index of that factor covers the coordinates of every
        non-unit slot."""
        A = self.A
        for level, coord in ((p, 0), (q, 1)):
            if level == 0:
                continue
            model = self.Y if coord == 0 else self.Z
            sets = _degsets(model, level)
            nz = self.Z.sizes[q]
            common = None
            for i in range(1, len(slots)):
                if slots[i] != A.unit:
                    y, z = divmod(i, nz)
                    c = y if coord == 0 else z
                    s = sets[c]
                    common = set(s) if common is None else common & s
                    if not common:
                        break
            if common is None or common:
                return True
        return False

    def _project(self, chain):
        if not self.normalized:
            return chain
        return {key: v for key, v in chain.items()
                if not self.is_degenerate(key[0], key[1], key[2])}

    def apply_D(self, chain):
        Y, Z, A, M = self.Y, self.Z, self.A, self.M
        out = {}

        def add(key, v):
            cur = out.get(key, None)
            cur = v if cur is None else cur + v
            if cur == 0:
                out.pop(key, None)
            else:
                out[key] = cur

        for (p, q, slots), c in chain.items():
            ny, nz = Y.sizes[p], Z.sizes[q]
            if p >= 1:
                for i in range(p + 1):
                    fmap = _grid_map(Y.faces[p][i], list(range(nz)),
                                     ny, nz, Y.sizes[p - 1], nz)
                    sgn = QQ(-1) if i % 2 else ONE
                    for w, tup in pushforward_set_map(
                            A, M, fmap, Y.sizes[p - 1] * nz, slots):
                        add((p - 1, q, tup), c * sgn * w)
            if q >= 1:
                for i in range(q + 1):
                    fmap = _grid_map(list(range(ny)), Z.faces[q][i],
                                     ny, nz, ny, Z.sizes[q - 1])
                    sgn = QQ(-1) if (p + i) % 2 else ONE
                    for w, tup in pushforward_set_map(
                            A, M, fmap, ny * Z.sizes[q - 1], slots):
                        add((p, q - 1, tup), c * sgn * w)
        return self._project(out)

    def ez(self, chain):
        """Eilenberg-Zilber map to the diagonal model: the signed shuffle
        sum of degeneracies applied in the two grid directions."""
        Y, Z, A, M = self.Y, self.Z, self.A, self.M
        out = {}
        for (p, q, slots), c in chain.items():
            n = p + q
            if n > self.K:
                raise ValueError("level overflow")
            for mu, nu, sgn in _shuffles(p, q):
                # raise Y-level along nu, Z-level along mu
                coeff, cur = c * (ONE if sgn > 0 else QQ(-1)), slots
                ylev, zlev = p, q
                ok = True
                for i in nu:
                    nz = Z.sizes[zlev]
                    fmap = _grid_map(Y.degeneracies[ylev][i],
                                     list(range(nz)), Y.sizes[ylev], nz,
                                     Y.sizes[ylev + 1], nz)
                    terms = pushforward_set_map(
                        A, M, fmap, Y.sizes[ylev + 1] * nz, cur)
                    if not terms:
                        ok = False
                        break
                    (w, cur), = terms
                    coeff *= w
                    ylev += 1
                if not ok:
                    continue
                for i in mu:
                    ny = Y.sizes[ylev]
                    fmap = _grid_map(list(range(ny)),
                                     Z.degeneracies[zlev][i], ny,
                                     Z.sizes[zlev], ny, Z.sizes[zlev + 1])
                    terms = pushforward_set_map(
                        A, M, fmap, ny * Z.sizes[zlev + 1], cur)
                    if not terms:
                        ok = False
                        break
                    (w, cur), = terms
                    coeff *= w
                    zlev += 1
                if not ok:
                    continue
                key = (n, cur)
                v = out.get(key, None)
                v = coeff if v is None else v + coeff
                if v == 0:
                    out.pop(key, None)
                else:
                    out[key] = v
        if self.normalized:
            out = {key: v for key, v in out.items()
                   if not is_degenerate_tuple(self.diag, key[0], key[1],
                                              self.A)}
        return out

    def aw(self, chain):
        """Alexander-Whitney map from the diagonal model: front faces in
        the Y-direction tensor (d_0)-iterates in the Z-direction."""
        Y, Z, A, M = self.Y, self.Z, self.A, self.M
        out = {}
        for (n, slots), c in chain.items():
            for p in range(n + 1):
                q = n - p
                fy = apply_ordinal(Y, OrdinalMap(p, n, list(range(p + 1))))
                fz = apply_ordinal(Z, OrdinalMap(q, n,
                                                 list(range(p, n + 1))))
                fmap = _grid_map(fy, fz, Y.sizes[n], Z.sizes[n],
                                 Y.sizes[p], Z.sizes[q])
                for w, tup in pushforward_set_map(
                        A, M, fmap, Y.sizes[p] * Z.sizes[q], slots):
                    key = (p, q, tup)
                    v = out.get(key, None)
                    v = c * w if v is None else v + c * w
                    if v == 0:
                        out.pop(key, None)
                    else:
                        out[key] = v
        return self._project(out)


def ez_and_aw(Y, Z, A, M, K, normalized=False):
    """The grid complex with its EZ and AW maps (see GridComplex)."""
    return GridComplex(Y, Z, A, M, K, normalized=normalized)


# ---------------------------------------------------------------------------
# cochains
# ---------------------------------------------------------------------------

def enumerate_atuples(Y, A, k, degrees, nondegenerate_only=False):
    """All algebra tuples over the non-basepoint slots of Y_k whose total
    degree lies in the given collection."""
    nslots = Y.sizes[k] - 1
    nonunit = [i for i in range(A.dim()) if i != A.unit]
    degrees = set(degrees)
    out = []
    tup = [A.unit] * nslots
    degs = sorted({A.degree(i) for i in nonunit})
    lo_d = min(degs + [0]) if degs else 0
    hi_d = max(degs + [0]) if degs else 0

    def rec(pos, acc):
        if pos == nslots:
            if acc in degrees:
                t = tuple(tup)
                if not nondegenerate_only or not is_degenerate_tuple(
                        Y, k, t, A, module_slot=False):
                    out.append(t)
            return
        left = nslots - pos
        if all(acc + d < min(degrees) or acc + d > max(degrees)
               for d in range(min(0, left * lo_d),
                              max(0, left * hi_d) + 1)):
            return
        rec(pos + 1, acc)
        for a in nonunit:
            tup[pos] = a
            rec(pos + 1, acc + A.degree(a))
        tup[pos] = A.unit

    if degrees:
        rec(0, 0)
    return out


class Cochain:
    """A homogeneous cochain: a function on algebra tuples at one
    simplicial level with values in the module.

    Parameters
    ----------
    Y : TruncatedSimplicialSet
    A, M : FiniteGCDA, DGModule
    level : int
    fdeg : int
        Functional degree: deg(f(a)) - deg(a).
    table : dict, optional
        Finite support {atuple: {mu: Scalar}}.
    evaluator : callable, optional
        atuple -> {mu: Scalar}; results are memoized.
    """

    def __init__(self, Y, A, M, level, fdeg, table=None, evaluator=None,
                 name=""):
        self.Y, self.A, self.M = Y, A, M
        self.level, self.fdeg, self.name = level, fdeg, name
        self._table = table
        self._evaluator = evaluator
        self._cache = {}

    def ev(self, atuple):
        if self._table is not None:
            return dict(self._table.get(atuple, {}))
        val = self._cache.get(atuple)
        if val is None:
            val = self._evaluator(atuple)
            self._cache[atuple] = val
        return dict(val)

    def scaled(self, c):
        return Cochain(self.Y, self.A, self.M, self.level, self.fdeg,
                       evaluator=lambda a, f=self, c=c: _scale(f.ev(a), c))


def _scale(vec, c):
    return {k: c * v for k, v in vec.items()} if c != 0 else {}


def _acc(out, vec, c=ONE):
    for k, v in vec.items():
        cur = out.get(k, None)
        cur = c * v if cur is None else cur + c * v
        if cur == 0:
            out.pop(k, None)
        else:
            out[k] = cur
    return out


def dual_basis_cochain(Y, A, M, level, atuple, mu):
    """The cochain dual to the monomial with the given algebra tuple and
    module basis element."""
    fdeg = M.degree(mu) - sum(A.degree(a) for a in atuple)
    return Cochain(Y, A, M, level, fdeg, table={tuple(atuple): {mu: ONE}})


def pullback_cochain(f, fmap, src_Y, src_level):
    """Pullback of a cochain along a pointed set map from the slots of
    src_Y at src_level to the slots of f's model at f.level.

    The basepoint fiber multiplies the output on the left; the sign is the
    Koszul sign of regrouping [f | letters] into [basepoint-fiber letters
    | f | letters grouped by target slot].
    """
    A, M = f.A, f.M
    if fmap[0] != 0:
        raise ValueError("set map is not pointed")
    tgt_size = f.Y.sizes[f.level]

    def evaluator(atuple):
        degs = [f.fdeg] + [A.degree(a) for a in atuple]
        keys = [(1, 0)]
        for i, a in enumerate(atuple):
            j = fmap[i + 1]
            keys.append((0, i) if j == 0 else (2, j, i))
        order = sorted(range(len(keys)), key=lambda p: keys[p])
        sign = graded_sign(degs, order)
        b0 = {A.unit: ONE}
        groups = {}
        for i, a in enumerate(atuple):
            j = fmap[i + 1]
            if j == 0:
                if a != A.unit:
                    b0 = A.mul(b0, {a: ONE})
                    if not b0:
                        return {}
            else:
                groups.setdefault(j, []).append(a)
        slot_vecs = []
        for j in range(1, tgt_size):
            vec = {A.unit: ONE}
            for a in groups.get(j, ()):
                if a != A.unit:
                    vec = A.mul(vec, {a: ONE})
                    if not vec:
                        return {}
            slot_vecs.append(vec)
        terms = [(ONE if sign > 0 else QQ(-1), ())]
        for vec in slot_vecs:
            terms = [(c * w, tup + (a,)) for c, tup in terms
                     for a, w in vec.items()]
        out = {}
        for c, tup in terms:
            val = f.ev(tup)
            if val:
                _acc(out, M.act(b0, val), c)
        return out

    return Cochain(src_Y, A, M, src_level, f.fdeg, evaluator=evaluator,
                   name="pullback(%s)" % f.name)


def cochain_differential(f):
    """Total differential of a homogeneous cochain, returned as a list of
    homogeneous pieces: (-1)^level times the internal Hom differential
    (same level, fdeg+1) plus the alternating face pullbacks (level+1,
    same fdeg)."""
    Y, A, M = f.Y, f.A, f.M
    k, w = f.level, f.fdeg
    pieces = []

    def internal(atuple):
        out = {}
        for mu, c in f.ev(atuple).items():
            dv = M.differential.get(mu, {})
            if dv:
                _acc(out, dv, c)
        eps = 0
        sgn_f = QQ(-1) if w % 2 else ONE
        for j, a in enumerate(atuple):
            dv = A.differential.get(a, {})
            if dv:
                s = sgn_f if eps % 2 == 0 else -sgn_f
                for b, cb in dv.items():
                    na = atuple[:j] + (b,) + atuple[j + 1:]
                    _acc(out, f.ev(na), -s * cb)
            eps += A.degree(a)
        if k % 2:
            out = {key: -v for key, v in out.items()}
        return out

    if M.differential or A.differential:
        pieces.append(Cochain(Y, A, M, k, w + 1, evaluator=internal,
                              name="d_hom(%s)" % f.name))
    if k + 1 <= Y.max_level:
        faces = [pullback_cochain(f, Y.faces[k + 1][i], Y, k + 1)
                 for i in range(k + 2)]

        def face_part(atuple):
            out = {}
            for i, g in enumerate(faces):
                _acc(out, g.ev(atuple), QQ(-1) if i % 2 else ONE)
            return out

        pieces.append(Cochain(Y, A, M, k + 1, w, evaluator=face_part,
                              name="b(%s)" % f.name))
    return pieces


def cochain_D(pieces):
    """Total differential of a list of homogeneous cochain pieces."""
    out = []
    for f in pieces:
        out.extend(cochain_differential(f))
    return out


def eval_pieces(pieces, level, atuple):
    """Sum the evaluations of all pieces living at the given level."""
    out = {}
    for f in pieces:
        if f.level == level:
            _acc(out, f.ev(atuple))
    return out


def relevant_adegrees(M, fdeg):
    """Input degrees on which a cochain of the given functional degree can
    be nonzero: deg(mu) - fdeg over the module basis."""
    return sorted({M.degree(mu) - fdeg for mu in range(M.dim())})


def wedge_cochain(f, h, W, inc_f, inc_h, level):
    """(f v h) on a wedge model: split the slots along the two inclusions,
    evaluate each factor and multiply in the algebra (M = A required)."""
    A, M = f.A, f.M
    if M.dim() != A.dim():
        raise ValueError("wedge cochain needs M = A")
    nf, nh = f.Y.sizes[level], h.Y.sizes[level]
    origin = {}
    for y in range(1, nf):
        origin[inc_f.levels[level][y]] = (1, y)
    for z in range(1, nh):
        w = inc_h.levels[level][z]
        if w in origin:
            raise ValueError("wedge inclusions overlap")
        origin[w] = (3, z)

    def evaluator(atuple):
        degs = [f.fdeg, h.fdeg] + [A.degree(a) for a in atuple]
        keys = [(1, 0), (2, 0)]
        a_f = [A.unit] * (nf - 1)
        a_h = [A.unit] * (nh - 1)
        for i, a in enumerate(atuple):
            side, y = origin[i + 1]
            keys.append((side, y))
            if side == 1:
                a_f[y - 1] = a
            else:
                a_h[y - 1] = a
        order = sorted(range(len(keys)), key=lambda p: keys[p])
        sign = graded_sign(degs, order)
        fv = f.ev(tuple(a_f))
        if not fv:
            return {}
        hv = h.ev(tuple(a_h))
        if not hv:
            return {}
        out = A.mul(fv, hv)
        return out if sign > 0 else {k: -v for k, v in out.items()}

    return Cochain(W, A, M, level, f.fdeg + h.fdeg, evaluator=evaluator,
                   name="(%s v %s)" % (f.name, h.name))


def _aw_first(X, i, n):
    """Set map X_n -> X_i induced by the front inclusion [i] -> [n]."""
    return apply_ordinal(X, OrdinalMap(i, n, list(range(i + 1))))


def _aw_second(X, j, n):
    """Set map X_n -> X_j induced by the back inclusion [j] -> [n]."""
    return apply_ordinal(X, OrdinalMap(j, n, list(range(n - j, n + 1))))


def _cup_twist(first, second):
    """Decalage sign making the cup products satisfy the graded Leibniz
    rule for the total degree level + fdeg."""
    return QQ(-1) if (first.fdeg * second.level) % 2 else ONE


def cup_positive(f, h, pinch):
    """Cup product of cochains over two positive-genus surface models
    along the pinch map: pullback through the front/back inclusions, wedge
    and pull back along the pinch."""
    W, iG, iH = pinch.wedge_parts
    n = f.level + h.level
    F = pullback_cochain(f, _aw_first(f.Y, f.level, n), f.Y, n)
    H = pullback_cochain(h, _aw_second(h.Y, h.level, n), h.Y, n)
    V = wedge_cochain(F, H, W, iG, iH, n)
    out = pullback_cochain(V, pinch.levels[n], pinch.source, n)
    return out.scaled(_cup_twist(f, h))


def _sphere_blocks(S2, n, lo, hi, shift):
    """Slots of the sphere model at level n with both coordinates in
    [lo, hi], paired with their class index at level hi - lo + 1 after the
    coordinate shift.  Returns {slot_index: block_class}."""
    interior = S2.meta["interior"]
    out = {}
    for (i, j), cls in interior[n].items():
        if lo <= i <= hi and lo <= j <= hi:
            out[cls] = interior[hi - lo + 1][(i - shift, j - shift)]
    return out


def cup_genus0(f, h):
    """Cup product of two sphere cochains on the standard model: evaluate
    the factors on the two diagonal blocks and multiply by the
    off-diagonal entries."""
    A, M = f.A, f.M
    if M.dim() != A.dim():
        raise ValueError("sphere cup needs M = A")
    p, q = f.level, h.level
    n = p + q
    S2 = f.Y
    if S2.sizes[n] != n * n + 1:
        raise ValueError("model is not the standard sphere")
    interior = S2.meta["interior"]
    coords = {cls: ij for ij, cls in interior[n].items()}
    blk_f = _sphere_blocks(S2, n, 1, p, 0)
    blk_h = _sphere_blocks(S2, n, p + 1, n, p)

    def evaluator(atuple):
        degs = [f.fdeg, h.fdeg] + [A.degree(a) for a in atuple]
        keys = [(1, ()), (3, ())]
        a_f = [A.unit] * (S2.sizes[p] - 1)
        a_h = [A.unit] * (S2.sizes[q] - 1)
        cletters = []
        for i, a in enumerate(atuple):
            cls = i + 1
            if cls in blk_f:
                keys.append((2, coords[cls]))
                a_f[blk_f[cls] - 1] = a
            elif cls in blk_h:
                keys.append((4, coords[cls]))
                a_h[blk_h[cls] - 1] = a
            else:
                keys.append((5, coords[cls]))
                if a != A.unit:
                    cletters.append(a)
        order = sorted(range(len(keys)), key=lambda r: keys[r])
        sign = graded_sign(degs, order)
        fv = f.ev(tuple(a_f))
        if not fv:
            return {}
        hv = h.ev(tuple(a_h))
        if not hv:
            return {}
        out = A.mul(fv, hv)
        for a in cletters:
            out = A.mul(out, {a: ONE})
            if not out:
                return {}
        return out if sign > 0 else {k: -v for k, v in out.items()}

    out = Cochain(S2, A, M, n, f.fdeg + h.fdeg, evaluator=evaluator,
                  name="(%s cup0 %s)" % (f.name, h.name))
    return out.scaled(_cup_twist(f, h))


def _surface_block(Sg, n, cell, lo, hi):
    """Slots of a surface model at level n lying in the interior of the
    given square cell with both coordinates in [lo, hi]; returns
    {slot: (i - lo + 1, j - lo + 1)}."""
    atlas = Sg.meta["atlas"][n]
    out = {}
    for (i, j) in [(i, j) for i in range(lo, hi + 1)
                   for j in range(lo, hi + 1)]:
        cls = atlas.get((cell, i, j))
        if cls is None or cls == 0:
            raise ValueError("block coordinate missing")
        if cls in out:
            raise ValueError("block coordinate not interior")
        out[cls] = (i - lo + 1, j - lo + 1)
    return out


def cup_mixed(f, al, side="left"):
    """Cup product of a sphere cochain f with a surface cochain al.

    The surface slots are pushed down along the back (side="left") or
    front (side="right") inclusion; the square block that collapses to the
    basepoint is fed to the sphere cochain instead of being multiplied
    out.
    """
    A, M = f.A, f.M
    if M.dim() != A.dim():
        raise ValueError("mixed cup needs M = A")
    p, l = f.level, al.level
    n = p + l
    Sg = al.Y
    g = Sg.meta["g"]
    if side == "left":
        gam = _aw_second(Sg, l, n)
        block = _surface_block(Sg, n, (1, 1, "Q"), 1, p)
    else:
        gam = _aw_first(Sg, l, n)
        block = _surface_block(Sg, n, (g, g, "Q"), l + 1, n)
    for cls in block:
        if gam[cls] != 0:
            raise AssertionError("block does not collapse under the "
                                 "induced set map")
    interior_p = f.Y.meta["interior"][p]
    tgt_size = Sg.sizes[l]

    def evaluator(atuple):
        degs = [f.fdeg, al.fdeg] + [A.degree(a) for a in atuple]
        if side == "left":
            key_f, key_al, key_b, key_c = 1, 3, 4, 6
        else:
            key_f, key_al, key_b, key_c = 4, 1, 2, 6
        keys = [(key_f, ()), (key_al, ())]
        a_f = [A.unit] * (f.Y.sizes[p] - 1)
        groups = {}
        cletters = []
        for i, a in enumerate(atuple):
            cls = i + 1
            if cls in block:
                keys.append((key_f + 1, block[cls]))
                a_f[interior_p[block[cls]] - 1] = a
            elif gam[cls] == 0:
                keys.append((key_c, i))
                if a != A.unit:
                    cletters.append(a)
            else:
                keys.append((key_b, gam[cls], i))
                groups.setdefault(gam[cls], []).append(a)
        order = sorted(range(len(keys)), key=lambda r: keys[r])
        sign = graded_sign(degs, order)
        slot_vecs = []
        for j in range(1, tgt_size):
            vec = {A.unit: ONE}
            for a in groups.get(j, ()):
                if a != A.unit:
                    vec = A.mul(vec, {a: ONE})
                    if not vec:
                        return {}
            slot_vecs.append(vec)
        fv = f.ev(tuple(a_f))
        if not fv:
            return {}
        terms = [(ONE if sign > 0 else QQ(-1), ())]
        for vec in slot_vecs:
            terms = [(c * w, tup + (a,)) for c, tup in terms
                     for a, w in vec.items()]
        out = {}
        for c, tup in terms:
            av = al.ev(tup)
            if not av:
                continue
            if side == "left":
                val = A.mul(fv, av)
            else:
                val = A.mul(av, fv)
            for a in cletters:
                val = A.mul(val, {a: ONE})
                if not val:
                    break
            if val:
                _acc(out, val, c)
        return out

    out = Cochain(Sg, A, M, n, f.fdeg + al.fdeg, evaluator=evaluator,
                  name="(%s cupmix %s)" % (f.name, al.name))
    if side == "left":
        return out.scaled(_cup_twist(f, al))
    return out.scaled(_cup_twist(al, f))


# ---------------------------------------------------------------------------
# the doubling operator and the subdivided cup product
# ---------------------------------------------------------------------------

def _doubling_terms(n):
    """Terms of the level-n doubling operator: (parity sign, ordinal map
    [2n+1] -> [n]) over permutations with at most one descent and the
    matching step function."""
    from itertools import combinations
    out = []
    for t in range(n + 1):
        eta = [0 if i < t else 1 for i in range(n)]
        for S in combinations(range(1, n + 1), t):
            rest = [v for v in range(1, n + 1) if v not in S]
            sig = [0] + list(S) + rest + [n + 1]
            # descents of the inner word may only sit at position t
            ok = all(sig[i] <= sig[i + 1] or i == t
                     for i in range(n + 1))
            if not ok:
                continue
            inv = sum(1 for x in range(1, n + 1) for y in range(x + 1, n + 1)
                      if sig[x] > sig[y])
            values = [None] * (2 * n + 2)
            for j in range(n + 1):
                eta_lo = 0 if j == 0 else eta[j - 1]
                eta_hi = 1 if j == n else eta[j]
                lo = eta_lo * (n + 1) + sig[j]
                hi = eta_hi * (n + 1) + sig[j + 1] - 1
                for r in range(lo, hi + 1):
                    values[r] = j
            if any(v is None for v in values):
                raise AssertionError("fibers do not cover")
            out.append((1 if inv % 2 == 0 else -1,
                        OrdinalMap(2 * n + 1, n, values)))
    return out


def mccarthy_D2(Y, A, M, chain):
    """The chain-level doubling operator into the edgewise-subdivided
    model: the signed sum of pushforwards along the interleaving set maps.
    Requires Y truncated at level >= 2n+1 for every level n in the chain."""
    out = {}
    for (n, slots), c in chain.items():
        if 2 * n + 1 > Y.max_level:
            raise ValueError("model truncated below 2n+1")
        tgt = Y.sizes[2 * n + 1]
        for sgn, phi in _doubling_terms(n):
            fmap = apply_ordinal(Y, phi)
            base = c if sgn > 0 else -c
            for w, tup in pushforward_set_map(A, M, fmap, tgt, slots):
                key = (n, tup)
                v = out.get(key, None)
                v = base * w if v is None else v + base * w
                if v == 0:
                    out.pop(key, None)
                else:
                    out[key] = v
    return out


def cup_tilde(f, al, g):
    """The subdivided cup product of a sphere cochain with a surface
    cochain: wedge of the front/back pullbacks, pulled back along the
    subdivided pinch and then along the doubling operator."""
    from .simplicial import pinch0_maps, sigma
    p, l = f.level, al.level
    n = p + l
    P0g, _ = pinch0_maps(g, n)
    W, i_s, i_g = P0g.wedge_parts
    F = pullback_cochain(f, _aw_first(f.Y, p, n), f.Y, n)
    H = pullback_cochain(al, _aw_second(al.Y, l, n), al.Y, n)
    V = wedge_cochain(F, H, W, i_s, i_g, n)
    u = pullback_cochain(V, P0g.levels[n], P0g.source, n)
    Ybig = sigma(g, 2 * n + 1)
    terms = [(sgn, apply_ordinal(Ybig, phi))
             for sgn, phi in _doubling_terms(n)]
    A, M = f.A, f.M

    def evaluator(atuple):
        out = {}
        for sgn, fmap in terms:
            piece = pullback_cochain(u, fmap, Ybig, n)
            _acc(out, piece.ev(atuple), ONE if sgn > 0 else QQ(-1))
        return out

    out = Cochain(Ybig, A, M, n, f.fdeg + al.fdeg, evaluator=evaluator,
                  name="(%s cup~ %s)" % (f.name, al.name))
    return out.scaled(_cup_twist(f, al))
