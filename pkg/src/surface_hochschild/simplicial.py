"""Finite pointed simplicial sets truncated at a level K.

Provides the standard finite models (point, interval, circle, square,
triangle, torus, 2-sphere, genus-g surfaces, wedges of circles), the basic
constructions (diagonal product, pushout/quotient, edgewise subdivision) and
the structural simplicial maps between surface models (pinch maps, the
subdivided pinch maps to and from the sphere, collapse onto the sphere).

Conventions
-----------
Elements of each level are integers 0..size-1; index 0 is the basepoint at
every level.  Face maps ``d_i`` go from level k to k-1 (0 <= i <= k) and
degeneracies ``s_i`` from level k to k+1 (0 <= i <= k, stored for k < K).
Canonical element orderings are lexicographic in the constructor's
coordinates and documented per model.
"""

import json
import re
from functools import lru_cache

from .exactla import QQ, SparseMatrix, rank


class TruncatedSimplicialSet:
    """Finite pointed simplicial set stored up to level ``max_level``.

    Parameters
    ----------
    max_level : int
        Truncation level K.
    sizes : list of int
        ``sizes[k]`` is the number of elements of level k.
    faces : list
        ``faces[k][i]`` is the table of d_i : level k -> level k-1, for
        1 <= k <= K and 0 <= i <= k.  ``faces[0]`` is the empty list.
    degeneracies : list
        ``degeneracies[k][i]`` is the table of s_i : level k -> level k+1,
        for 0 <= k < K and 0 <= i <= k.
    labels : list or None
        Optional per-level lists of hashable element labels.
    """

    def __init__(self, max_level, sizes, faces, degeneracies, labels=None,
                 name=""):
        self.max_level = max_level
        self.sizes = list(sizes)
        self.faces = faces
        self.degeneracies = degeneracies
        self.labels = labels
        self.name = name
        self.meta = {}
        self._nondegenerate = None

    def size(self, k):
        return self.sizes[k]

    def face(self, k, i, x):
        return self.faces[k][i][x]

    def deg(self, k, i, x):
        return self.degeneracies[k][i][x]

    def nondegenerate(self, k):
        """Boolean flags: element is not in the image of any degeneracy."""
        if self._nondegenerate is None:
            flags = [[True] * n for n in self.sizes]
            for lv in range(self.max_level):
                for tab in self.degeneracies[lv]:
                    for y in tab:
                        flags[lv + 1][y] = False
            self._nondegenerate = flags
        return self._nondegenerate[k]

    def label(self, k, x):
        return self.labels[k][x] if self.labels is not None else x

    def index_of(self, k, label):
        if self.labels is None:
            return label
        try:
            return self.labels[k].index(label)
        except ValueError:
            raise KeyError(label)

    def __repr__(self):
        return "TruncatedSimplicialSet(%r, K=%d, sizes=%r)" % (
            self.name, self.max_level, self.sizes)


class SimplicialMap:
    """Level-wise map between truncated simplicial sets.

    ``levels[k][x]`` is the image of element x of level k.
    """

    def __init__(self, source, target, levels, name=""):
        self.source = source
        self.target = target
        self.levels = levels
        self.name = name

    def apply(self, k, x):
        return self.levels[k][x]

    def compose(self, other):
        """self after other (other first)."""
        K = min(len(self.levels), len(other.levels))
        levels = [[self.levels[k][other.levels[k][x]]
                   for x in range(len(other.levels[k]))] for k in range(K)]
        return SimplicialMap(other.source, self.target, levels,
                             name=self.name + "." + other.name)

    def __repr__(self):
        return "SimplicialMap(%r: %r -> %r)" % (
            self.name, self.source.name, self.target.name)


def validate(X):
    """Check all simplicial identities and basepoint fixing on stored levels.

    Returns a list of violation strings; empty means valid.
    """
    bad = []
    K = X.max_level
    for k in range(1, K + 1):
        if len(X.faces[k]) != k + 1:
            bad.append("level %d: expected %d face maps" % (k, k + 1))
        for i, tab in enumerate(X.faces[k]):
            if len(tab) != X.sizes[k]:
                bad.append("d_%d at level %d: wrong table size" % (i, k))
            if tab[0] != 0:
                bad.append("d_%d at level %d moves basepoint" % (i, k))
    for k in range(K):
        if len(X.degeneracies[k]) != k + 1:
            bad.append("level %d: expected %d degeneracies" % (k, k + 1))
        for i, tab in enumerate(X.degeneracies[k]):
            if len(tab) != X.sizes[k]:
                bad.append("s_%d at level %d: wrong table size" % (i, k))
            if tab[0] != 0:
                bad.append("s_%d at level %d moves basepoint" % (i, k))
    # d_i d_j = d_{j-1} d_i  (i < j)
    for k in range(2, K + 1):
        for j in range(1, k + 1):
            for i in range(j):
                for x in range(X.sizes[k]):
                    lhs = X.face(k - 1, i, X.face(k, j, x))
                    rhs = X.face(k - 1, j - 1, X.face(k, i, x))
                    if lhs != rhs:
                        bad.append(
                            "d_%d d_%d != d_%d d_%d at level %d on %d"
                            % (i, j, j - 1, i, k, x))
    # s_i s_j = s_{j+1} s_i  (i <= j)
    for k in range(K - 1):
        for j in range(k + 1):
            for i in range(j + 1):
                for x in range(X.sizes[k]):
                    lhs = X.deg(k + 1, i, X.deg(k, j, x))
                    rhs = X.deg(k + 1, j + 1, X.deg(k, i, x))
                    if lhs != rhs:
                        bad.append(
                            "s_%d s_%d != s_%d s_%d at level %d on %d"
                            % (i, j, j + 1, i, k, x))
    # mixed identities d_i s_j
    for k in range(K):
        for j in range(k + 1):
            for i in range(k + 2):
                for x in range(X.sizes[k]):
                    got = X.face(k + 1, i, X.deg(k, j, x))
                    if i < j:
                        want = X.deg(k - 1, j - 1, X.face(k, i, x)) \
                            if k >= 1 else None
                    elif i in (j, j + 1):
                        want = x
                    else:
                        want = X.deg(k - 1, j, X.face(k, i - 1, x)) \
                            if k >= 1 else None
                    if want is not None and got != want:
                        bad.append("d_%d s_%d identity fails at level %d on %d"
                                   % (i, j, k, x))
    return bad


def validate_map(f):
    """Check naturality (commutation with d_i, s_i) and pointedness of f."""
    bad = []
    X, Y = f.source, f.target
    K = min(len(f.levels) - 1, X.max_level, Y.max_level)
    for k in range(K + 1):
        if f.levels[k][0] != 0:
            bad.append("level %d: basepoint not preserved" % k)
    for k in range(1, K + 1):
        for i in range(k + 1):
            for x in range(X.sizes[k]):
                if f.levels[k - 1][X.face(k, i, x)] != \
                        Y.face(k, i, f.levels[k][x]):
                    bad.append("d_%d naturality fails at level %d on %d"
                               % (i, k, x))
    for k in range(K):
        for i in range(k + 1):
            for x in range(X.sizes[k]):
                if f.levels[k + 1][X.deg(k, i, x)] != \
                        Y.deg(k, i, f.levels[k][x]):
                    bad.append("s_%d naturality fails at level %d on %d"
                               % (i, k, x))
    return bad


# ---------------------------------------------------------------------------
# ordinal maps and generic contravariant action
# ---------------------------------------------------------------------------

class OrdinalMap:
    """Monotone map [k] -> [l] between finite ordinals."""

    def __init__(self, domain, codomain, values):
        self.domain = domain
        self.codomain = codomain
        self.values = tuple(values)
        if len(self.values) != domain + 1:
            raise ValueError("wrong arity")
        if any(v < 0 or v > codomain for v in self.values):
            raise ValueError("value out of range")
        if any(self.values[i] > self.values[i + 1] for i in range(domain)):
            raise ValueError("not monotone")

    def compose(self, other):
        """self after other."""
        if other.codomain != self.domain:
            raise ValueError("not composable")
        return OrdinalMap(other.domain, self.codomain,
                          [self.values[v] for v in other.values])

    def __repr__(self):
        return "OrdinalMap(%d->%d, %r)" % (self.domain, self.codomain,
                                           self.values)


def delta(i, n):
    """Coface [n-1] -> [n] missing i."""
    return OrdinalMap(n - 1, n, [v if v < i else v + 1 for v in range(n)])


def sigma_op(j, n):
    """Codegeneracy [n+1] -> [n] repeating j."""
    return OrdinalMap(n + 1, n, [v if v <= j else v - 1 for v in range(n + 2)])


def sd2_of(phi):
    """Edgewise doubling: [2k+1] -> [2l+1], i + (k+1) j  |->  phi(i) + (l+1) j."""
    k, l = phi.domain, phi.codomain
    values = [phi.values[i] for i in range(k + 1)] + \
             [phi.values[i] + l + 1 for i in range(k + 1)]
    return OrdinalMap(2 * k + 1, 2 * l + 1, values)


def apply_ordinal(X, phi):
    """Contravariant action: the set map X_{codomain} -> X_{domain} of phi.

    Computed by the epi-mono factorization of phi into cofaces and
    codegeneracies, using only the stored d_i / s_i tables.
    """
    a, b = phi.domain, phi.codomain
    vals = phi.values
    # identity
    if a == b and vals == tuple(range(a + 1)):
        return list(range(X.sizes[b]))
    hit = set(vals)
    for i in range(b + 1):
        if i not in hit:
            # phi = delta_i . phi'
            inner = OrdinalMap(a, b - 1,
                               [v if v < i else v - 1 for v in vals])
            prev = apply_ordinal(X, inner)
            di = X.faces[b][i]
            # X(phi) = X(phi') . d_i acting on X_b
            return [prev[di[x]] for x in range(X.sizes[b])]
    for j in range(a):
        if vals[j] == vals[j + 1]:
            # phi = phi' . sigma_j
            inner = OrdinalMap(a - 1, b,
                               [vals[x] if x <= j else vals[x + 1]
                                for x in range(a)])
            prev = apply_ordinal(X, inner)
            sj = X.degeneracies[a - 1][j]
            # X(phi) = s_j . X(phi')
            return [sj[prev[x]] for x in range(X.sizes[b])]
    raise AssertionError("unreachable: phi neither misses nor repeats")


# ---------------------------------------------------------------------------
# standard models
# ---------------------------------------------------------------------------

def _pt(K):
    X = TruncatedSimplicialSet(
        K, [1] * (K + 1),
        [[]] + [[[0] for _ in range(k + 1)] for k in range(1, K + 1)],
        [[[0] for _ in range(k + 1)] for k in range(K)],
        labels=[[("pt",)] for _ in range(K + 1)], name="pt")
    X.meta = {"space": "pt"}
    return X


def _interval(K):
    """I_k = {0, ..., k+1};  d_i(j) = j if j <= i else j-1;
    s_i(j) = j if j <= i else j+1.  Basepoint 0."""
    sizes = [k + 2 for k in range(K + 1)]
    faces = [[]]
    for k in range(1, K + 1):
        faces.append([[j if j <= i else j - 1 for j in range(k + 2)]
                      for i in range(k + 1)])
    degs = []
    for k in range(K):
        degs.append([[j if j <= i else j + 1 for j in range(k + 2)]
                     for i in range(k + 1)])
    labels = [[j for j in range(k + 2)] for k in range(K + 1)]
    X = TruncatedSimplicialSet(K, sizes, faces, degs, labels, name="interval")
    X.meta = {"space": "interval"}
    return X


def _circle(K):
    """S^1_k = {0, ..., k};  interval faces except d_k wraps k to 0."""
    sizes = [k + 1 for k in range(K + 1)]
    faces = [[]]
    for k in range(1, K + 1):
        level = []
        for i in range(k + 1):
            if i < k:
                level.append([j if j <= i else j - 1 for j in range(k + 1)])
            else:
                level.append([j if j < k else 0 for j in range(k + 1)])
        faces.append(level)
    degs = []
    for k in range(K):
        degs.append([[j if j <= i else j + 1 for j in range(k + 1)]
                     for i in range(k + 1)])
    labels = [[j for j in range(k + 1)] for k in range(K + 1)]
    X = TruncatedSimplicialSet(K, sizes, faces, degs, labels, name="circle")
    X.meta = {"space": "circle"}
    return X


def diagonal_product(X, Y):
    """Level-wise product with diagonal structure maps.

    Elements ordered lexicographically: index = x * #Y_k + y; basepoint
    (0, 0) is index 0.
    """
    if X.max_level != Y.max_level:
        raise ValueError("level mismatch")
    K = X.max_level
    sizes = [X.sizes[k] * Y.sizes[k] for k in range(K + 1)]
    faces = [[]]
    for k in range(1, K + 1):
        level = []
        for i in range(k + 1):
            fx, fy = X.faces[k][i], Y.faces[k][i]
            ny = Y.sizes[k - 1]
            level.append([fx[x] * ny + fy[y]
                          for x in range(X.sizes[k])
                          for y in range(Y.sizes[k])])
        faces.append(level)
    degs = []
    for k in range(K):
        level = []
        for i in range(k + 1):
            sx, sy = X.degeneracies[k][i], Y.degeneracies[k][i]
            ny = Y.sizes[k + 1]
            level.append([sx[x] * ny + sy[y]
                          for x in range(X.sizes[k])
                          for y in range(Y.sizes[k])])
        degs.append(level)
    labels = [[(X.label(k, x), Y.label(k, y))
               for x in range(X.sizes[k]) for y in range(Y.sizes[k])]
              for k in range(K + 1)]
    W = TruncatedSimplicialSet(K, sizes, faces, degs, labels,
                               name="(%s x %s)" % (X.name, Y.name))
    W.meta = {"space": "product", "factors": (X, Y)}
    return W


# ---------------------------------------------------------------------------
# disjoint unions and quotients
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent
        root = x
        while p.get(root, root) != root:
            root = p[root]
        while p.get(x, x) != x:
            p[x], x = root, p[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True


def disjoint_union_many(pieces):
    """Unpointed level-wise disjoint union of simplicial sets.

    Returns (X, offsets) where offsets[p][k] is the index offset of piece p
    at level k.  The result is not a valid pointed set by itself (several
    basepoint candidates); it is always fed into `quotient`.
    """
    K = pieces[0].max_level
    if any(p.max_level != K for p in pieces):
        raise ValueError("level mismatch")
    offsets = []
    sizes = [0] * (K + 1)
    for p in pieces:
        offsets.append([sizes[k] for k in range(K + 1)])
        for k in range(K + 1):
            sizes[k] += p.sizes[k]
    faces = [[]]
    for k in range(1, K + 1):
        level = []
        for i in range(k + 1):
            tab = []
            for pi, p in enumerate(pieces):
                off = offsets[pi][k - 1]
                tab.extend(off + v for v in p.faces[k][i])
            level.append(tab)
        faces.append(level)
    degs = []
    for k in range(K):
        level = []
        for i in range(k + 1):
            tab = []
            for pi, p in enumerate(pieces):
                off = offsets[pi][k + 1]
                tab.extend(off + v for v in p.degeneracies[k][i])
            level.append(tab)
        degs.append(level)
    labels = []
    for k in range(K + 1):
        lab = []
        for pi, p in enumerate(pieces):
            for x in range(p.sizes[k]):
                lab.append((pi, p.label(k, x)))
        labels.append(lab)
    X = TruncatedSimplicialSet(K, sizes, faces, degs, labels, name="disjoint")
    return X, offsets


def quotient(X, pairs, name=""):
    """Quotient of X by the simplicially saturated relation generated by
    ``pairs`` (iterable of ((k, x), (k, y))).

    The generated equivalence is saturated on the fly: merging x ~ y also
    merges d_i x ~ d_i y and s_i x ~ s_i y.  Induced face/degeneracy maps
    are verified to be well defined on classes.

    Returns (W, proj) with proj the projection SimplicialMap.  Classes are
    ordered by their minimal member; the class of element 0 (the basepoint
    of X) is guaranteed to come first because element keys sort by index.
    """
    K = X.max_level
    uf = _UnionFind()
    work = []
    for (a, b) in pairs:
        if uf.union(a, b):
            work.append((a, b))
    while work:
        (ka, xa), (kb, xb) = work.pop()
        if ka != kb:
            raise ValueError("cannot identify elements of different levels")
        k = ka
        if k >= 1:
            for i in range(k + 1):
                a = (k - 1, X.face(k, i, xa))
                b = (k - 1, X.face(k, i, xb))
                if uf.union(a, b):
                    work.append((a, b))
        if k < K:
            for i in range(k + 1):
                a = (k + 1, X.deg(k, i, xa))
                b = (k + 1, X.deg(k, i, xb))
                if uf.union(a, b):
                    work.append((a, b))
    # classes per level, ordered by minimal member index
    class_index = []
    members = []
    proj_levels = []
    for k in range(K + 1):
        mem = {}
        for x in range(X.sizes[k]):
            r = uf.find((k, x))
            mem.setdefault(r, []).append(x)
        order = sorted(mem, key=lambda r: mem[r][0])
        idx = {r: i for i, r in enumerate(order)}
        class_index.append(idx)
        members.append([mem[r] for r in order])
        proj_levels.append([idx[uf.find((k, x))] for x in range(X.sizes[k])])
    sizes = [len(members[k]) for k in range(K + 1)]
    faces = [[]]
    for k in range(1, K + 1):
        level = []
        for i in range(k + 1):
            tab = [None] * sizes[k]
            for c, ms in enumerate(members[k]):
                imgs = {proj_levels[k - 1][X.face(k, i, x)] for x in ms}
                if len(imgs) != 1:
                    raise ValueError(
                        "induced d_%d ill-defined on class %d at level %d "
                        "(members %r)" % (i, c, k, ms[:4]))
                tab[c] = imgs.pop()
            level.append(tab)
        faces.append(level)
    degs = []
    for k in range(K):
        level = []
        for i in range(k + 1):
            tab = [None] * sizes[k]
            for c, ms in enumerate(members[k]):
                imgs = {proj_levels[k + 1][X.deg(k, i, x)] for x in ms}
                if len(imgs) != 1:
                    raise ValueError(
                        "induced s_%d ill-defined on class %d at level %d"
                        % (i, c, k))
                tab[c] = imgs.pop()
            level.append(tab)
        degs.append(level)
    labels = [[X.label(k, ms[0]) for ms in members[k]] for k in range(K + 1)]
    W = TruncatedSimplicialSet(K, sizes, faces, degs, labels, name=name)
    W.meta = {"space": "quotient", "members": members}
    proj = SimplicialMap(X, W, proj_levels, name="proj")
    return W, proj


def pushout(X, Z, Y, f, g, name=""):
    """Pushout W = X cup_Z Y of pointed simplicial maps f: Z->X, g: Z->Y.

    Returns (W, i, j) with the two inclusion maps.  The basepoint of W is
    the class of the basepoint of X.
    """
    U, offsets = disjoint_union_many([X, Y])
    offX, offY = offsets
    K = X.max_level
    pairs = []
    for k in range(K + 1):
        for z in range(Z.sizes[k]):
            pairs.append(((k, offX[k] + f.levels[k][z]),
                          (k, offY[k] + g.levels[k][z])))
    W, proj = quotient(U, pairs, name=name or
                       "(%s cup_%s %s)" % (X.name, Z.name, Y.name))
    i = SimplicialMap(X, W, [[proj.levels[k][offX[k] + x]
                              for x in range(X.sizes[k])]
                             for k in range(K + 1)], name="inl")
    j = SimplicialMap(Y, W, [[proj.levels[k][offY[k] + y]
                              for y in range(Y.sizes[k])]
                             for k in range(K + 1)], name="inr")
    return W, i, j


def basepoint_map(P, X):
    """The unique pointed map pt -> X."""
    return SimplicialMap(P, X, [[0] for _ in range(X.max_level + 1)],
                         name="bp")


def wedge(X, Y, name=""):
    """Wedge at the basepoints; returns (W, i, j)."""
    P = _pt(X.max_level)
    return pushout(X, P, Y, basepoint_map(P, X), basepoint_map(P, Y),
                   name=name or "(%s v %s)" % (X.name, Y.name))


# ---------------------------------------------------------------------------
# the surface models Sigma^g
# ---------------------------------------------------------------------------

def _square_piece(K, tag):
    """A standard square I x I with labels tag + (p, q)."""
    sq = diagonal_product(_interval(K), _interval(K))
    labels = [[tag + lab for lab in sq.labels[k]] for k in range(K + 1)]
    sq.labels = labels
    return sq


def _sigma_pairs(g, K, offsets, index_of):
    """Identification pairs for the genus-g surface grid.

    ``index_of(piece_index, k, p, q)`` resolves a local square coordinate to
    a disjoint-union index.  Piece numbering: 0 = pt; then cells in row-major
    order, diagonal cells one square each, off-diagonal cells U then L.
    """
    pairs = []

    def add(k, a, b):
        pairs.append(((k, a), (k, b)))

    # piece lookup table: cell (r, c) -> (piece kind, square indices)
    cells = {}
    pi = 1
    for r in range(1, g + 1):
        for c in range(1, g + 1):
            if r == c:
                cells[(r, c)] = ("Q", pi)
                pi += 1
            else:
                cells[(r, c)] = ("UL", pi, pi + 1)
                pi += 2

    def side(r, c, which, k, s):
        """Disjoint-union index of the side element with parameter s.

        which in {left, right, top, bottom}; s runs 0..k+1 (v for
        left/right, u for top/bottom)."""
        kind = cells[(r, c)]
        top = k + 1
        if kind[0] == "Q":
            q = kind[1]
            if which == "left":
                return index_of(q, k, 0, s)
            if which == "right":
                return index_of(q, k, top, s)
            if which == "top":
                return index_of(q, k, s, 0)
            if which == "bottom":
                return index_of(q, k, s, top)
        else:
            u, l = kind[1], kind[2]
            if which == "left":      # U side p=0, v = q-coordinate = s
                return index_of(u, k, 0, s)
            if which == "top":       # U side p=top, u = s
                return index_of(u, k, top, s)
            if which == "bottom":    # L side p=0, u = s
                return index_of(l, k, 0, s)
            if which == "right":     # L side p=top, v = s
                return index_of(l, k, top, s)
        raise AssertionError(which)

    for k in range(K + 1):
        top = k + 1
        # collapse the U / L squares into triangles and glue hypotenuses
        for (r, c), kind in cells.items():
            if kind[0] == "UL":
                u, l = kind[1], kind[2]
                for p in range(top + 1):
                    add(k, index_of(u, k, p, 0), index_of(u, k, 0, 0))
                    add(k, index_of(l, k, p, top), index_of(l, k, 0, top))
                    add(k, index_of(u, k, p, top), index_of(l, k, p, 0))
        # glue neighbouring cells
        for r in range(1, g + 1):
            for c in range(1, g):
                for s in range(top + 1):
                    add(k, side(r, c, "right", k, s),
                        side(r, c + 1, "left", k, s))
        for r in range(1, g):
            for c in range(1, g + 1):
                for s in range(top + 1):
                    add(k, side(r, c, "bottom", k, s),
                        side(r + 1, c, "top", k, s))
        # boundary word  a_1 b_1 ... a_g b_g a_g^- b_g^- ... a_1^- b_1^-
        # positions 1..g: left edges top->bottom, s = v
        # positions g+1..2g: bottom edges left->right, s = u
        # positions 2g+1..3g: right edges bottom->top, s = top - v
        # positions 3g+1..4g: top edges right->left, s = top - u
        def edge_elem(pos, s):
            if 1 <= pos <= g:
                return side(pos, 1, "left", k, s)
            if g + 1 <= pos <= 2 * g:
                return side(g, pos - g, "bottom", k, s)
            if 2 * g + 1 <= pos <= 3 * g:
                return side(3 * g + 1 - pos, g, "right", k, top - s)
            return side(1, 4 * g + 1 - pos, "top", k, top - s)

        letters = {}
        word = []
        for i in range(1, g + 1):
            word.append(("a", i, 1))
            word.append(("b", i, 1))
        for i in range(g, 0, -1):
            word.append(("a", i, -1))
            word.append(("b", i, -1))
        for pos, (ltr, i, sign) in enumerate(word, start=1):
            letters.setdefault((ltr, i), {})[sign] = pos
        for (ltr, i), occ in letters.items():
            p_plain, p_inv = occ[1], occ[-1]
            for s in range(top + 1):
                add(k, edge_elem(p_plain, s), edge_elem(p_inv, top - s))
    # outer rim vertices to the basepoint (pt piece has index 0 per level);
    # saturation spreads the identification to all degeneracies
    def edge_elem0(pos, s):
        if 1 <= pos <= g:
            return side(pos, 1, "left", 0, s)
        if g + 1 <= pos <= 2 * g:
            return side(g, pos - g, "bottom", 0, s)
        if 2 * g + 1 <= pos <= 3 * g:
            return side(3 * g + 1 - pos, g, "right", 0, 1 - s)
        return side(1, 4 * g + 1 - pos, "top", 0, 1 - s)

    for pos in range(1, 4 * g + 1):
        for s in (0, 1):
            pairs.append(((0, 0), (0, edge_elem0(pos, s))))
    return pairs, cells


@lru_cache(maxsize=None)
def sigma(g, K):
    """Genus-g surface model: a g x g grid of cells with the boundary word
    identification; diagonal cells are squares, off-diagonal cells are two
    triangles glued along the anti-diagonal.

    Element labels record a representative cell coordinate
    (piece, (p, q)) where piece is ('pt',), or (r, c, 'Q'|'U'|'L').
    Meta carries the full atlas: for every cell-local coordinate the class
    index, and per class the list of member coordinates.
    """
    if g == 0:
        return sphere2(K)
    pieces = [_pt(K)]
    tags = [None]
    for r in range(1, g + 1):
        for c in range(1, g + 1):
            if r == c:
                pieces.append(_square_piece(K, (r, c, "Q")))
                tags.append((r, c, "Q"))
            else:
                pieces.append(_square_piece(K, (r, c, "U")))
                tags.append((r, c, "U"))
                pieces.append(_square_piece(K, (r, c, "L")))
                tags.append((r, c, "L"))
    U, offsets = disjoint_union_many(pieces)

    def index_of(piece, k, p, q):
        # square piece at level k has elements (p, q), p, q in 0..k+1, lex
        return offsets[piece][k] + p * (k + 2) + q

    pairs, cells = _sigma_pairs(g, K, offsets, index_of)
    W, proj = quotient(U, pairs, name="sigma(%d)" % g)
    # atlas: (tag, p, q) -> class index, and members per class
    atlas = []
    members = []
    for k in range(K + 1):
        amap = {("pt",): proj.levels[k][0]}
        mem = [[] for _ in range(W.sizes[k])]
        mem[proj.levels[k][0]].append(("pt",))
        for piece in range(1, len(pieces)):
            tag = tags[piece]
            for p in range(k + 2):
                for q in range(k + 2):
                    c = proj.levels[k][index_of(piece, k, p, q)]
                    amap[(tag, p, q)] = c
                    mem[c].append((tag, p, q))
        atlas.append(amap)
        members.append(mem)
    W.meta = {"space": "sigma", "g": g, "atlas": atlas, "members": members,
              "cells": cells}
    # self-check: element counts of the model (eq-count invariant)
    for k in range(K + 1):
        want = (2 * g * g - g) * k * k + (3 * g * g - g) * k + 1 + \
            (g - 1) * (g - 1)
        if W.sizes[k] != want:
            raise AssertionError(
                "sigma(%d) level %d has %d elements, expected %d"
                % (g, k, W.sizes[k], want))
    return W


@lru_cache(maxsize=None)
def sphere2(K):
    """S^2 = square / boundary; level k is {bp} u {1..k}^2."""
    sq = diagonal_product(_interval(K), _interval(K))
    pairs = []
    for k in range(K + 1):
        top = k + 1
        n = k + 2

        def idx(p, q):
            return p * n + q

        for p in range(n):
            for q in range(n):
                if p in (0, top) or q in (0, top):
                    pairs.append(((k, idx(0, 0)), (k, idx(p, q))))
    W, proj = quotient(sq, pairs, name="sphere2")
    interior = []
    for k in range(K + 1):
        n = k + 2
        interior.append({(p, q): proj.levels[k][p * n + q]
                         for p in range(1, k + 1) for q in range(1, k + 1)})
    W.meta = {"space": "sphere2", "interior": interior, "proj": proj,
              "square": sq}
    for k in range(K + 1):
        if W.sizes[k] != k * k + 1:
            raise AssertionError("sphere2 level %d size %d != %d"
                                 % (k, W.sizes[k], k * k + 1))
    return W


@lru_cache(maxsize=None)
def _triangle(K):
    """T = square with the side q=0 collapsed to a point."""
    sq = diagonal_product(_interval(K), _interval(K))
    pairs = []
    for k in range(K + 1):
        n = k + 2
        for p in range(n):
            pairs.append(((k, 0 * n + 0), (k, p * n + 0)))
    W, _ = quotient(sq, pairs, name="triangle")
    W.meta = {"space": "triangle"}
    return W


@lru_cache(maxsize=None)
def wedge_circles(m, K):
    """Wedge of m circles; level k is {0} u m copies of {1..k}.

    Labels are (circle index, j).  Built by iterated basepoint pushout, so
    circle 1's elements come first, then circle 2's, etc.
    """
    if m < 1:
        raise ValueError("need at least one circle")
    W = _circle(K)
    W = _relabel(W, lambda k, lab: (1, lab))
    for i in range(2, m + 1):
        C = _relabel(_circle(K), lambda k, lab, i=i: (i, lab))
        W, _, _ = wedge(W, C, name="wedge(%d circles)" % i)
    W.name = "wedge_circles(%d)" % m
    W.meta = {"space": "wedge_circles", "m": m}
    return W


def _relabel(X, fn):
    X.labels = [[fn(k, lab) for lab in X.labels[k]]
                for k in range(X.max_level + 1)]
    return X


@lru_cache(maxsize=None)
def standard_model(name, K):
    """Build a standard model by name.

    Names: pt, interval, circle, square, triangle, torus, sphere2,
    sigma(g), wedge_circles(m).
    """
    if name == "pt":
        return _pt(K)
    if name == "interval":
        return _interval(K)
    if name == "circle":
        return _circle(K)
    if name == "square":
        sq = diagonal_product(_interval(K), _interval(K))
        sq.name = "square"
        return sq
    if name == "triangle":
        return _triangle(K)
    if name == "torus":
        t = diagonal_product(_circle(K), _circle(K))
        t.name = "torus"
        t.meta = {"space": "torus"}
        return t
    if name == "sphere2":
        return sphere2(K)
    m = re.fullmatch(r"sigma\((\d+)\)", name)
    if m:
        return sigma(int(m.group(1)), K)
    m = re.fullmatch(r"wedge_circles\((\d+)\)", name)
    if m:
        return wedge_circles(int(m.group(1)), K)
    raise ValueError("unknown standard model %r" % name)


# ---------------------------------------------------------------------------
# edgewise subdivision
# ---------------------------------------------------------------------------

def edgewise_subdivision(X):
    """sd_2(X)_n = X_{2n+1} with structure maps X(sd_2(delta_i)),
    X(sd_2(sigma_i)).  X must be truncated at >= 2K+1 to produce output
    truncated at K."""
    if X.max_level < 1:
        raise ValueError("insufficient truncation")
    K = (X.max_level - 1) // 2
    sizes = [X.sizes[2 * n + 1] for n in range(K + 1)]
    faces = [[]]
    for n in range(1, K + 1):
        faces.append([apply_ordinal(X, sd2_of(delta(i, n)))
                      for i in range(n + 1)])
    degs = []
    for n in range(K):
        degs.append([apply_ordinal(X, sd2_of(sigma_op(i, n)))
                     for i in range(n + 1)])
    labels = None
    if X.labels is not None:
        labels = [X.labels[2 * n + 1] for n in range(K + 1)]
    W = TruncatedSimplicialSet(K, sizes, faces, degs, labels,
                               name="sd2(%s)" % X.name)
    W.meta = {"space": "sd2", "inner": X}
    return W


# ---------------------------------------------------------------------------
# structural maps between surface models
# ---------------------------------------------------------------------------

def _cell_block(tag, g, h):
    """Which wedge summand a cell of the (g+h) grid belongs to:
    'G' (rows and cols <= g), 'H' (rows and cols > g), or None (off-block).
    """
    r, c = tag[0], tag[1]
    if r <= g and c <= g:
        return "G"
    if r > g and c > g:
        return "H"
    return None


@lru_cache(maxsize=None)
def pinch_map(g, h, K):
    """The pinch map sigma(g+h) -> sigma(g) v sigma(h).

    Block cells map across unchanged; off-block cells are collapsed along
    the anti-diagonals (each triangle onto a leg), resolved by a search
    through class membership and collapse moves, with the uniqueness of the
    landing class asserted.
    """
    S = sigma(g + h, K)
    SG, SH = sigma(g, K), sigma(h, K)
    W, iG, iH = wedge(SG, SH, name="(sigma(%d) v sigma(%d))" % (g, h))

    def target_of(tag, p, q, k):
        """Target class of a block-cell coordinate; None if off-block."""
        if tag == ("pt",):
            return 0
        blk = _cell_block(tag, g, h)
        if blk is None:
            return None
        r, c, piece = tag
        if blk == "G":
            cls = SG.meta["atlas"][k][((r, c, piece), p, q)]
            return iG.levels[k][cls]
        cls = SH.meta["atlas"][k][((r - g, c - g, piece), p, q)]
        return iH.levels[k][cls]

    def moves(tag, p, q, k):
        """Anti-diagonal collapse moves inside an off-block cell."""
        if tag == ("pt",) or _cell_block(tag, g, h) is not None:
            return ()
        top = k + 1
        return ((tag, 0, q), (tag, top, q))

    levels = []
    for k in range(K + 1):
        atlas = S.meta["atlas"][k]
        members = S.meta["members"][k]
        tab = []
        for cls in range(S.sizes[k]):
            seen = {cls}
            queue = [cls]
            targets = set()
            while queue:
                c0 = queue.pop()
                for coord in members[c0]:
                    if coord == ("pt",):
                        targets.add(0)
                        continue
                    tag, p, q = coord
                    t = target_of(tag, p, q, k)
                    if t is not None:
                        targets.add(t)
                        continue
                    for mv in moves(tag, p, q, k):
                        c1 = atlas[mv]
                        if c1 not in seen:
                            seen.add(c1)
                            queue.append(c1)
            if len(targets) != 1:
                raise AssertionError(
                    "pinch(%d,%d) level %d class %d: ambiguous image %r"
                    % (g, h, k, cls, sorted(targets)))
            tab.append(targets.pop())
        levels.append(tab)
    f = SimplicialMap(S, W, levels, name="pinch(%d,%d)" % (g, h))
    f.wedge_parts = (W, iG, iH)
    return f


@lru_cache(maxsize=None)
def collapse_to_sphere(g, K):
    """pi^g: sigma(g) -> sphere2, collapsing everything outside the interior
    of the top-left square cell."""
    S = sigma(g, K)
    S2 = sphere2(K)
    levels = []
    for k in range(K + 1):
        interior = S2.meta["interior"][k]
        tab = []
        for cls in range(S.sizes[k]):
            img = 0
            for coord in S.meta["members"][k][cls]:
                if coord == ("pt",):
                    continue
                tag, p, q = coord
                if tag == (1, 1, "Q") and 1 <= p <= k and 1 <= q <= k:
                    img = interior[(p, q)]
            tab.append(img)
        levels.append(tab)
    return SimplicialMap(S, S2, levels, name="collapse_to_sphere(%d)" % g)


@lru_cache(maxsize=None)
def surface_loops(g, K):
    """Level-wise classes of the fundamental loops of sigma(g).

    Returns {("a", i) or ("b", i): levels} where levels[k][s] is the class
    of the parameter-s element (s in 0..k+1) along the plain occurrence of
    the loop in the boundary word of the cell grid.
    """
    S = sigma(g, K)
    atlas = S.meta["atlas"]

    def side_coord(r, c, which, k, s):
        top = k + 1
        if r == c:
            tag = (r, c, "Q")
            return {"left": (tag, 0, s), "right": (tag, top, s),
                    "top": (tag, s, 0), "bottom": (tag, s, top)}[which]
        if which == "left":
            return ((r, c, "U"), 0, s)
        if which == "top":
            return ((r, c, "U"), top, s)
        if which == "bottom":
            return ((r, c, "L"), 0, s)
        return ((r, c, "L"), top, s)

    def edge_coord(pos, k, s):
        top = k + 1
        if 1 <= pos <= g:
            return side_coord(pos, 1, "left", k, s)
        if g + 1 <= pos <= 2 * g:
            return side_coord(g, pos - g, "bottom", k, s)
        if 2 * g + 1 <= pos <= 3 * g:
            return side_coord(3 * g + 1 - pos, g, "right", k, top - s)
        return side_coord(1, 4 * g + 1 - pos, "top", k, top - s)

    loops = {}
    for i in range(1, g + 1):
        for letter, pos in ((("a", i), 2 * i - 1), (("b", i), 2 * i)):
            levels = []
            for k in range(K + 1):
                levels.append([atlas[k][edge_coord(pos, k, s)]
                               for s in range(k + 2)])
            loops[letter] = levels
    return loops


@lru_cache(maxsize=None)
def skeleton_inclusion(g, K):
    """The inclusion of the wedge of the 2g fundamental circles into
    sigma(g); circle 2i-1 carries a_i and circle 2i carries b_i."""
    W = wedge_circles(2 * g, K)
    S = sigma(g, K)
    loops = surface_loops(g, K)
    levels = []
    for k in range(K + 1):
        tab = [S.meta["atlas"][k][("pt",)]]
        for j in range(1, 2 * g + 1):
            letter = ("a", (j + 1) // 2) if j % 2 else ("b", j // 2)
            tab.extend(loops[letter][k][s] for s in range(1, k + 1))
        levels.append(tab)
    return SimplicialMap(W, S, levels, name="skeleton(%d)" % g)


@lru_cache(maxsize=None)
def pinch0_maps(g, K):
    """The subdivided pinch maps
    P_{0,g}: sd2(sigma(g)) -> sphere2 v sigma(g)   and
    P_{g,0}: sd2(sigma(g)) -> sigma(g) v sphere2.

    An element of sd2(sigma(g)) at level n is a class of sigma(g) at level
    2n+1.  Writing h = n+1 and top = 2n+2, P_{0,g} keeps the top-left
    h x h corner of the top-left square cell as the sphere (interior test
    1 <= p, q <= n) and shifts every cell by the monus p -> max(p-h, 0);
    P_{g,0} clamps by p -> min(p, h) and sends the bottom-right corner of
    the bottom-right cell to the sphere.
    """
    S = sigma(g, 2 * K + 1)
    sd = edgewise_subdivision(S)
    SG = sigma(g, K)
    S2 = sphere2(K)
    W0, i0_s, i0_g = wedge(S2, SG, name="(sphere2 v sigma(%d))" % g)
    Wg, ig_g, ig_s = wedge(SG, S2, name="(sigma(%d) v sphere2)" % g)

    def image_0g(coord, n):
        """P_{0,g} image (as a class of W0) of one source coordinate."""
        h = n + 1
        if coord == ("pt",):
            return 0
        tag, p, q = coord
        if tag == (1, 1, "Q") and p <= h and q <= h:
            if 1 <= p <= n and 1 <= q <= n:
                return i0_s.levels[n][S2.meta["interior"][n][(p, q)]]
            return 0
        pp, qq = max(p - h, 0), max(q - h, 0)
        cls = SG.meta["atlas"][n][(tag, pp, qq)]
        return i0_g.levels[n][cls]

    def image_g0(coord, n):
        h = n + 1
        if coord == ("pt",):
            return 0
        tag, p, q = coord
        if tag == (g, g, "Q") and p >= h and q >= h:
            pp, qq = p - h, q - h
            if 1 <= pp <= n and 1 <= qq <= n:
                return ig_s.levels[n][S2.meta["interior"][n][(pp, qq)]]
            return 0
        pp, qq = min(p, h), min(q, h)
        cls = SG.meta["atlas"][n][(tag, pp, qq)]
        return ig_g.levels[n][cls]

    def build(image, W, name):
        levels = []
        for n in range(K + 1):
            members = S.meta["members"][2 * n + 1]
            tab = []
            for cls in range(sd.sizes[n]):
                imgs = {image(coord, n) for coord in members[cls]}
                if len(imgs) != 1:
                    raise AssertionError(
                        "%s level %d class %d: ambiguous image %r"
                        % (name, n, cls, sorted(imgs)))
                tab.append(imgs.pop())
            levels.append(tab)
        f = SimplicialMap(sd, W, levels, name=name)
        return f

    P0g = build(image_0g, W0, "P_{0,%d}" % g)
    P0g.wedge_parts = (W0, i0_s, i0_g)
    Pg0 = build(image_g0, Wg, "P_{%d,0}" % g)
    Pg0.wedge_parts = (Wg, ig_g, ig_s)
    return P0g, Pg0


@lru_cache(maxsize=None)
def circle_pinch(K):
    """sd2(circle) -> wedge of two circles: the two half-circles of the
    subdivision become the two wedge summands, their shared endpoints the
    basepoint."""
    sd = edgewise_subdivision(_circle(2 * K + 1))
    W = wedge_circles(2, K)
    levels = []
    for n in range(K + 1):
        tab = []
        for e in range(2 * n + 2):
            a, i = divmod(e, n + 1)
            tab.append(a * n + i if 1 <= i <= n else 0)
        levels.append(tab)
    return SimplicialMap(sd, W, levels, name="circle_pinch")


@lru_cache(maxsize=None)
def wedge_pinch(K):
    """sd2(two circles) -> three circles: the first circle is pinched into
    the summands 1 and 2 along its subdivision; the second circle slides
    onto summand 3 by collapsing its first half."""
    sd = edgewise_subdivision(wedge_circles(2, 2 * K + 1))
    W = wedge_circles(3, K)
    levels = []
    for n in range(K + 1):
        tab = [0]
        for t in range(1, 2 * n + 2):          # first source circle
            a, i = divmod(t, n + 1)
            tab.append(a * n + i if 1 <= i <= n else 0)
        for t in range(1, 2 * n + 2):          # second source circle
            u = max(t - (n + 1), 0)
            tab.append(2 * n + u if u >= 1 else 0)
        levels.append(tab)
    return SimplicialMap(sd, W, levels, name="wedge_pinch")


@lru_cache(maxsize=None)
def sphere_pinch(K):
    """sd2(sphere2) -> sphere2 v sphere2: the top-left n x n corner of the
    subdivided square becomes the left sphere, the shifted bottom-right
    corner the right sphere, everything else the basepoint."""
    S = sphere2(2 * K + 1)
    sd = edgewise_subdivision(S)
    S2 = sphere2(K)
    W, iL, iR = wedge(S2, S2, name="(sphere2 v sphere2)")
    levels = []
    for n in range(K + 1):
        interior = S.meta["interior"][2 * n + 1]
        tgt = S2.meta["interior"][n]
        h = n + 1
        tab = [0] * sd.sizes[n]
        for (p, q), cls in interior.items():
            if 1 <= p <= n and 1 <= q <= n:
                tab[cls] = iL.levels[n][tgt[(p, q)]]
            elif p > h and q > h:
                tab[cls] = iR.levels[n][tgt[(p - h, q - h)]]
        levels.append(tab)
    f = SimplicialMap(sd, W, levels, name="sphere_pinch")
    f.wedge_parts = (W, iL, iR)
    return f


# ---------------------------------------------------------------------------
# JSON serialization and homology of the realization
# ---------------------------------------------------------------------------

def to_json(X):
    levels = []
    for k in range(X.max_level + 1):
        levels.append({
            "size": X.sizes[k],
            "basepoint": 0,
            "faces": X.faces[k] if k >= 1 else [],
            "degeneracies": X.degeneracies[k] if k < X.max_level else [],
        })
    return json.dumps({"levels": levels}, sort_keys=True)


def from_json(text):
    doc = json.loads(text)
    levels = doc["levels"]
    K = len(levels) - 1
    sizes = [lv["size"] for lv in levels]
    faces = [[]] + [levels[k]["faces"] for k in range(1, K + 1)]
    degs = [levels[k]["degeneracies"] for k in range(K)]
    return TruncatedSimplicialSet(K, sizes, faces, degs)


def simplicial_homology_betti(X, top_dim):
    """Rational Betti numbers of |X| in degrees 0..top_dim via the
    normalized simplicial chain complex (nondegenerate elements; faces
    landing on degenerate elements are dropped)."""
    if top_dim + 1 > X.max_level:
        raise ValueError("need one level above top_dim")
    bases = []
    for k in range(top_dim + 2):
        nd = X.nondegenerate(k)
        bases.append([x for x in range(X.sizes[k]) if nd[x]])
    index = [{x: i for i, x in enumerate(b)} for b in bases]
    mats = [SparseMatrix(0, len(bases[0]))]
    for k in range(1, top_dim + 2):
        m = SparseMatrix(len(bases[k - 1]), len(bases[k]))
        for c, x in enumerate(bases[k]):
            for i in range(k + 1):
                y = X.face(k, i, x)
                r = index[k - 1].get(y)
                if r is not None:
                    m.add_to(r, c, QQ(-1) if i % 2 else QQ(1))
        mats.append(m)
    betti = []
    for k in range(top_dim + 1):
        ker = len(bases[k]) - rank(mats[k])
        betti.append(ker - rank(mats[k + 1]))
    return betti
