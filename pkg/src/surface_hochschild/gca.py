"""Finite-basis graded-commutative differential graded algebras over the
rationals, their modules, and the Koszul sign engine.

All structural signs in the package come from one place:
`graded_sign` computes the sign of a degree-weighted permutation of letters,
and every product of basis words goes through `multiply_word`.
"""

import json
from itertools import product as iproduct

from .exactla import ONE, QQ


def graded_sign(degrees, perm):
    """Koszul sign of reordering graded letters.

    ``perm[p]`` is the original index of the letter placed at position p.
    Each transposition of adjacent letters of degrees a, b contributes
    (-1)^(a*b); the result is the product over all inversions.
    """
    odd = [i for i in perm if degrees[i] % 2]
    sign = 1
    n = len(odd)
    for p in range(n):
        for q in range(p + 1, n):
            if odd[p] > odd[q]:
                sign = -sign
    return sign


def sort_letters_sign(letters, degrees):
    """Stable-sort letters into increasing order, returning (sorted, sign).

    ``letters`` is a list of sortable keys; ``degrees[i]`` is the degree of
    letters[i].  The sign is the Koszul sign of the sorting permutation.
    """
    order = sorted(range(len(letters)), key=lambda i: (letters[i], i))
    sign = graded_sign(degrees, order)
    return [letters[i] for i in order], sign


class KoszulWord:
    """A word of algebra basis letters with an accumulated sign.

    The invariant tying the sign to the permutation history is maintained by
    using `swap` for all reorderings.
    """

    def __init__(self, algebra, indices, sign=1):
        self.algebra = algebra
        self.indices = list(indices)
        self.sign = sign

    def swap(self, p):
        """Transpose positions p and p+1, updating the Koszul sign."""
        a, b = self.indices[p], self.indices[p + 1]
        if self.algebra.degree(a) % 2 and self.algebra.degree(b) % 2:
            self.sign = -self.sign
        self.indices[p], self.indices[p + 1] = b, a
        return self


class FiniteGCDA:
    """Graded-commutative DG algebra with a finite ordered basis.

    Parameters
    ----------
    basis : list of (label, degree)
    unit : int
        Index of the unit element 1.
    table : dict
        Sparse structure constants {(i, j): {k: Scalar}}; missing keys mean
        the product of basis elements i, j is zero.
    differential : dict
        Sparse degree +1 map {i: {k: Scalar}}.
    truncation_hit : bool
        True when some product escaped a degree window during construction
        and was zeroed.
    """

    def __init__(self, basis, unit, table, differential=None,
                 truncation_hit=False, name="", check=True):
        self.basis = list(basis)
        self.unit = unit
        self.table = table
        self.differential = differential or {}
        self.truncation_hit = truncation_hit
        self.name = name
        self._index = {lab: i for i, (lab, _) in enumerate(self.basis)}
        if check:
            self._check()

    def dim(self):
        return len(self.basis)

    def degree(self, i):
        return self.basis[i][1]

    def label(self, i):
        return self.basis[i][0]

    def index(self, label):
        return self._index[label]

    def mul_basis(self, i, j):
        """Sparse product b_i * b_j as {k: Scalar}."""
        return self.table.get((i, j), {})

    def mul(self, u, v):
        """Bilinear product of sparse elements {i: Scalar}."""
        out = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.mul_basis(i, j).items():
                    w = out.get(k)
                    w = a * b * c if w is None else w + a * b * c
                    if w == 0:
                        out.pop(k, None)
                    else:
                        out[k] = w
        return out

    def d(self, u):
        """Differential of a sparse element."""
        out = {}
        for i, a in u.items():
            for k, c in self.differential.get(i, {}).items():
                w = out.get(k, None)
                w = a * c if w is None else w + a * c
                if w == 0:
                    out.pop(k, None)
                else:
                    out[k] = w
        return out

    def _check(self):
        if self.mul_basis(self.unit, self.unit) != {self.unit: ONE}:
            raise ValueError("unit is not idempotent")
        n = self.dim()
        for i in range(n):
            if self.mul_basis(self.unit, i) != {i: ONE} or \
                    self.mul_basis(i, self.unit) != {i: ONE}:
                raise ValueError("unit law fails on basis %d" % i)
        for (i, j), val in self.table.items():
            di, dj = self.degree(i), self.degree(j)
            for k, c in val.items():
                if self.degree(k) != di + dj:
                    raise ValueError("product not graded at (%d,%d)" % (i, j))
            flip = self.mul_basis(j, i)
            sgn = QQ(-1) if (di % 2 and dj % 2) else ONE
            if {k: sgn * c for k, c in flip.items()} != val:
                raise ValueError("not graded-commutative at (%d,%d)" % (i, j))
        if self.truncation_hit:
            # associativity can only be checked away from the truncation
            # boundary; the flag is propagated to downstream results instead
            pass
        else:
            for i in range(n):
                for j in range(n):
                    ij = self.mul_basis(i, j)
                    for k in range(n):
                        left = self.mul(ij, {k: ONE})
                        right = self.mul({i: ONE}, self.mul_basis(j, k))
                        if left != right:
                            raise ValueError(
                                "associativity fails on (%d,%d,%d)"
                                % (i, j, k))
        # d(1) = 0, d^2 = 0, degree +1, Leibniz
        if self.differential.get(self.unit):
            raise ValueError("d(1) != 0")
        for i, row in self.differential.items():
            for k, c in row.items():
                if self.degree(k) != self.degree(i) + 1:
                    raise ValueError("d not of degree +1 on %d" % i)
            if self.d(row):
                raise ValueError("d^2 != 0 on basis %d" % i)
        if not self.truncation_hit:
            for i in range(n):
                for j in range(n):
                    lhs = self.d(self.mul_basis(i, j))
                    rhs = self.mul(self.differential.get(i, {}), {j: ONE})
                    sgn = QQ(-1) if self.degree(i) % 2 else ONE
                    for k, c in self.mul({i: ONE},
                                         self.differential.get(j, {})).items():
                        w = rhs.get(k, None)
                        w = sgn * c if w is None else w + sgn * c
                        if w == 0:
                            rhs.pop(k, None)
                        else:
                            rhs[k] = w
                    if lhs != rhs:
                        raise ValueError("Leibniz fails on (%d,%d)" % (i, j))


def multiply_word(algebra, word):
    """Product of a word of basis indices with its accumulated sign.

    Parameters
    ----------
    algebra : FiniteGCDA
    word : KoszulWord or iterable of basis indices

    Returns
    -------
    dict
        Sparse element {k: Scalar}; the empty dict is zero.
    """
    if isinstance(word, KoszulWord):
        indices, sign = word.indices, word.sign
    else:
        indices, sign = list(word), 1
    out = {algebra.unit: ONE if sign > 0 else QQ(-1)}
    for i in indices:
        out = algebra.mul(out, {i: ONE})
    return out


def _monomial_degree(exps, gens):
    return sum(e * g[1] for e, g in zip(exps, gens))


def free_gcda(generators, degree_window, derivation=None, name=""):
    """Free graded-commutative algebra on ``generators`` truncated to a
    degree window.

    Parameters
    ----------
    generators : list of (label, degree)
        Odd-degree generators are exterior (square zero); even-degree
        generators are polynomial.  An even generator of degree 0 is
        rejected (infinite basis inside any window).
    degree_window : (int, int)
        Inclusive degree interval; must contain 0 (for the unit).  Products
        landing outside the window are truncated to zero and the
        ``truncation_hit`` flag is set.
    derivation : dict, optional
        {generator label: sparse element over the resulting monomial basis}
        defining the differential as a degree +1 derivation.

    Basis monomials are ordered by (degree, exponent vector); labels are
    exponent tuples.
    """
    lo, hi = degree_window
    if not lo <= 0 <= hi:
        raise ValueError("degree window must contain 0")
    for lab, deg in generators:
        if deg == 0:
            raise ValueError("even generator of degree 0: %r" % lab)
    # enumerate exponent vectors with degree inside the window
    ranges = []
    for lab, deg in generators:
        if deg % 2:
            ranges.append(range(2))
        else:
            span = (hi if deg > 0 else -lo) // abs(deg) if deg else 0
            ranges.append(range(span + 1))
    monos = []
    for exps in iproduct(*ranges):
        d = _monomial_degree(exps, generators)
        if lo <= d <= hi:
            monos.append((d, exps))
    monos.sort()
    basis = [(exps, d) for d, exps in monos]
    index = {exps: i for i, (exps, _) in enumerate(basis)}
    unit = index[tuple(0 for _ in generators)]
    gen_degs = [deg for _, deg in generators]
    truncation_hit = False
    table = {}
    for i, (ei, di) in enumerate(basis):
        for j, (ej, dj) in enumerate(basis):
            if any(a + b > 1 for a, b, d in zip(ei, ej, gen_degs) if d % 2):
                continue  # odd square is zero
            dtot = di + dj
            if not lo <= dtot <= hi:
                truncation_hit = True
                continue
            k = index.get(tuple(a + b for a, b in zip(ei, ej)))
            if k is None:
                truncation_hit = True
                continue
            # Koszul sign: letters of j pass over the later letters of i
            sign = 1
            for gi in range(len(generators)):
                if ej[gi] and gen_degs[gi] % 2:
                    crossings = sum(ei[gj] for gj in range(gi + 1,
                                                           len(generators))
                                    if gen_degs[gj] % 2)
                    if crossings % 2:
                        sign = -sign
            table[(i, j)] = {k: ONE if sign > 0 else QQ(-1)}
    algebra = FiniteGCDA(basis, unit, table, truncation_hit=truncation_hit,
                         name=name or "free_gcda", check=False)
    if derivation:
        gen_index = {lab: gi for gi, (lab, _) in enumerate(generators)}
        diff = {}
        for i, (exps, deg) in enumerate(basis):
            out = {}
            # Leibniz: differentiate each generator in place; the sign is
            # the Koszul cost of passing d over the letters to its left
            for gi, e in enumerate(exps):
                if e == 0:
                    continue
                dgen = derivation.get(generators[gi][0])
                if not dgen:
                    continue
                left_deg = sum(exps[gj] * gen_degs[gj] for gj in range(gi))
                sgn = QQ(-1) if left_deg % 2 else ONE
                coeff = sgn * QQ(e)
                for t, ct in dgen.items():
                    et = basis[t][0]
                    # word: letters j<gi, then the letters of the d-term,
                    # then the remaining copies of gi, then letters j>gi;
                    # signs come from sorting it into canonical order
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
                        if gen_degs[gj] % 2:
                            odd_counts[gj] = odd_counts.get(gj, 0) + 1
                    if any(c2 > 1 for c2 in odd_counts.values()):
                        continue  # odd square is zero
                    letter_degs = [gen_degs[gj] for gj in word]
                    _, sort_sign = sort_letters_sign(word, letter_degs)
                    new = list(exps)
                    new[gi] -= 1
                    for gj, c2 in enumerate(et):
                        new[gj] += c2
                    k = index.get(tuple(new))
                    if k is None:
                        algebra.truncation_hit = True
                        continue
                    c = coeff * ct * (ONE if sort_sign > 0 else QQ(-1))
                    w = out.get(k, None)
                    w = c if w is None else w + c
                    if w == 0:
                        out.pop(k, None)
                    else:
                        out[k] = w
            if out:
                diff[i] = out
        algebra.differential = diff
    algebra._check()
    algebra.generators = list(generators)
    algebra.degree_window = (lo, hi)
    return algebra


def cohomology_of_sphere(n):
    """The cohomology algebra of an odd sphere: Lambda(x), |x| = 2n+1, d=0."""
    if n < 1:
        raise ValueError("n >= 1 required")
    return free_gcda([("x", 2 * n + 1)], (0, 2 * n + 1),
                     name="H(S^%d)" % (2 * n + 1))


class DGModule:
    """DG module over a FiniteGCDA with a symmetric bimodule action.

    ``action[(i, m)]`` is the sparse left action b_i . e_m of an algebra
    basis element on a module basis element; the right action is defined by
    the Koszul rule e_m . b_i = (-1)^{|b_i||e_m|} b_i . e_m.
    """

    def __init__(self, algebra, basis, action, differential=None, name="",
                 check=True):
        self.algebra = algebra
        self.basis = list(basis)
        self.action = action
        self.differential = differential or {}
        self.name = name
        if check:
            self._check()

    def dim(self):
        return len(self.basis)

    def degree(self, m):
        return self.basis[m][1]

    def act_basis(self, i, m):
        return self.action.get((i, m), {})

    def act(self, u, v):
        """Left action of a sparse algebra element on a sparse module
        element."""
        out = {}
        for i, a in u.items():
            for m, b in v.items():
                for k, c in self.act_basis(i, m).items():
                    w = out.get(k, None)
                    w = a * b * c if w is None else w + a * b * c
                    if w == 0:
                        out.pop(k, None)
                    else:
                        out[k] = w
        return out

    def d(self, v):
        out = {}
        for m, b in v.items():
            for k, c in self.differential.get(m, {}).items():
                w = out.get(k, None)
                w = b * c if w is None else w + b * c
                if w == 0:
                    out.pop(k, None)
                else:
                    out[k] = w
        return out

    def _check(self):
        A = self.algebra
        for m in range(self.dim()):
            if self.act_basis(A.unit, m) != {m: ONE}:
                raise ValueError("unit does not act as identity on %d" % m)
        for (i, m), val in self.action.items():
            for k, c in val.items():
                if self.degree(k) != A.degree(i) + self.degree(m):
                    raise ValueError("action not graded at (%d,%d)" % (i, m))
        if not A.truncation_hit:
            for i in range(A.dim()):
                for j in range(A.dim()):
                    for m in range(self.dim()):
                        via_prod = self.act(A.mul_basis(i, j), {m: ONE})
                        stepwise = self.act({i: ONE},
                                            self.act_basis(j, m))
                        if via_prod != stepwise:
                            raise ValueError(
                                "action not associative on (%d,%d,%d)"
                                % (i, j, m))
        for m, row in self.differential.items():
            for k, c in row.items():
                if self.degree(k) != self.degree(m) + 1:
                    raise ValueError("d_M not of degree +1 on %d" % m)
            if self.d(row):
                raise ValueError("d_M^2 != 0 on %d" % m)
        if not A.truncation_hit:
            for i in range(A.dim()):
                for m in range(self.dim()):
                    lhs = self.d(self.act_basis(i, m))
                    rhs = self.act(A.differential.get(i, {}), {m: ONE})
                    sgn = QQ(-1) if A.degree(i) % 2 else ONE
                    for k, c in self.act({i: ONE},
                                         self.differential.get(m, {})).items():
                        w = rhs.get(k, None)
                        w = sgn * c if w is None else w + sgn * c
                        if w == 0:
                            rhs.pop(k, None)
                        else:
                            rhs[k] = w
                    if lhs != rhs:
                        raise ValueError("module Leibniz fails on (%d,%d)"
                                         % (i, m))


def module_over_self(algebra):
    """The algebra as a DG module over itself."""
    action = {}
    for (i, j), val in algebra.table.items():
        action[(i, j)] = dict(val)
    return DGModule(algebra, list(algebra.basis), action,
                    differential={m: dict(r)
                                  for m, r in algebra.differential.items()},
                    name=algebra.name, check=False)


def algebra_to_json(algebra):
    """JSON descriptor of a free algebra (generators and window)."""
    gens = [{"label": str(lab), "degree": deg}
            for lab, deg in algebra.generators]
    lo, hi = algebra.degree_window
    return json.dumps({"generators": gens, "window": [lo, hi]},
                      sort_keys=True)


def algebra_from_json(text):
    doc = json.loads(text)
    gens = [(g["label"], g["degree"]) for g in doc["generators"]]
    lo, hi = doc["window"]
    return free_gcda(gens, (lo, hi))
