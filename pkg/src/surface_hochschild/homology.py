"""Betti numbers of higher Hochschild complexes with certified level
truncation.

The chain complexes are infinite in the simplicial direction; over an
algebra whose non-unit basis degrees all exceed the top nondegenerate
simplex dimension dmax, a nondegenerate monomial of total degree n can
only live at levels k <= n * dmax / (mu - dmax) (mu = minimal non-unit
degree): each non-unit slot contributes at least mu to the internal
degree and covers at most dmax degeneracy indices.  Truncating at K at or
above that bound therefore loses nothing, and the computed Betti number
is certified complete; otherwise it is flagged as truncated.
"""

from .exactla import ONE, kernel_and_quotient, solve
from .hochschild import build_complex


def top_nondegenerate_level(Y):
    """Largest level carrying a nondegenerate element (searching up to the
    truncation level of Y)."""
    top = 0
    for k in range(Y.max_level, 0, -1):
        if any(Y.nondegenerate(k)):
            return k
    return top


def completeness_bound(Y, A, n):
    """Smallest safe truncation level for total degree n, or None when the
    algebra has a non-unit basis element of degree <= dmax (no bound
    applies)."""
    dmax = top_nondegenerate_level(Y)
    degs = [A.degree(i) for i in range(A.dim()) if i != A.unit]
    if not degs:
        return 0
    mu = min(degs)
    if mu <= dmax:
        return None
    if n <= 0:
        return 0
    return (n * dmax) // (mu - dmax)


class BettiTable:
    """Betti numbers of CH^{Y}(A, M) by total degree.

    Attributes
    ----------
    values : dict {n: int}
    certified : dict {n: bool}
        True when the truncation level provably captures every
        contributing monomial in degrees n-1 and n.
    K : int
        Truncation level used.
    dimensions : dict {n: int}
        Dimension of the (normalized) degree-n chain space at level K.
    """

    def __init__(self, space, values, certified, K, dimensions):
        self.space = space
        self.values = values
        self.certified = certified
        self.K = K
        self.dimensions = dimensions

    def as_rows(self):
        return [(n, self.values[n], self.certified[n])
                for n in sorted(self.values)]

    def __repr__(self):
        cells = ", ".join(
            "%d: %d%s" % (n, v, "" if self.certified[n] else "?")
            for n, v in sorted(self.values.items()))
        return "BettiTable(%s; K=%d; {%s})" % (self.space, self.K, cells)


def betti(Y, A, M, degrees, K=None, normalized=True):
    """Betti numbers of the higher Hochschild complex in the given total
    degrees.

    Parameters
    ----------
    Y, A, M : model, algebra, module
    degrees : iterable of int
    K : int, optional
        Truncation level; defaults to the certified bound for the top
        requested degree (capped by the truncation of Y).
    normalized : bool
        Compute in the normalized complex (required for certification).
    """
    degrees = sorted(set(degrees))
    need = max(degrees)
    bound_top = completeness_bound(Y, A, need)
    if K is None:
        if bound_top is None:
            raise ValueError("no completeness bound; pass K explicitly")
        K = min(bound_top, Y.max_level)
    lo, hi = min(degrees) - 1, max(degrees) + 1
    C = build_complex(Y, A, M, K, (lo, hi), normalized=normalized,
                      check=False)
    values, certified, dims = {}, {}, {}
    mats = {}

    def mat(n):
        if n not in mats:
            mats[n] = C.differential_matrix(n)
        return mats[n]

    for n in degrees:
        d_in, d_out = mat(n - 1), mat(n)
        _, _, b = kernel_and_quotient(d_in, d_out)
        values[n] = b
        bnd = completeness_bound(Y, A, n)
        certified[n] = (normalized and bnd is not None and K >= bnd)
        dims[n] = d_out.cols
    return BettiTable(Y.name or "model", values, certified, K, dims)


def is_cycle(C, chain):
    """Whether D(chain) vanishes in the complex C."""
    return C.apply_D(chain) == {}


def total_degree_of(C, chain):
    """Common total degree of the monomials of a chain (None when
    empty)."""
    degs = set()
    for (k, slots), _ in chain.items():
        m = C.M.degree(slots[0]) + sum(C.A.degree(a) for a in slots[1:])
        degs.add(m - k)
    if len(degs) > 1:
        raise ValueError("chain is not homogeneous")
    return degs.pop() if degs else None


def is_boundary(C, chain):
    """Whether the chain is D of something in the complex C (within its
    truncation window)."""
    if not chain:
        return True
    n = total_degree_of(C, chain)
    mat = C.differential_matrix(n - 1)
    basis = C.total_basis(n)
    index = {t: i for i, t in enumerate(basis)}
    vec = {}
    for key, c in chain.items():
        if key not in index:
            raise ValueError("chain outside the materialized basis")
        vec[index[key]] = c
    return solve(mat, vec) is not None
