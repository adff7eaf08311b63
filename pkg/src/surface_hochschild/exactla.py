"""Exact rational scalars and sparse matrices.

Everything downstream (differentials, homology ranks, product tables) is
computed over the rational field with exact arithmetic; no floating point
appears anywhere.  Scalars are reduced fractions (gmpy2.mpq when available,
fractions.Fraction otherwise), matrices are dict-backed sparse maps acting on
column vectors.
"""

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _ratio
except ImportError:  # pragma: no cover
    from fractions import Fraction as _ratio


def QQ(num=0, den=1):
    """Exact rational scalar (always reduced, positive denominator)."""
    return _ratio(num, den)


ZERO = QQ(0)
ONE = QQ(1)


class SparseMatrix:
    """Sparse matrix over the rationals.

    Parameters
    ----------
    rows, cols : int
        Shape of the matrix.
    entries : dict or iterable, optional
        Either a dict {(r, c): value} or an iterable of (r, c, value)
        triples.  Zero values are dropped; duplicate positions are an error.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.data = {}
        if entries is None:
            return
        items = entries.items() if isinstance(entries, dict) else (
            ((r, c), v) for (r, c, v) in entries)
        for (r, c), v in items:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError("entry (%d,%d) out of range" % (r, c))
            if (r, c) in self.data:
                raise ValueError("duplicate entry at (%d,%d)" % (r, c))
            if v != 0:
                self.data[(r, c)] = QQ(v)

    @classmethod
    def identity(cls, n):
        m = cls(n, n)
        for i in range(n):
            m.data[(i, i)] = ONE
        return m

    def nnz(self):
        return len(self.data)

    def add_to(self, r, c, v):
        """Accumulate v into position (r, c), dropping exact zeros."""
        key = (r, c)
        cur = self.data.get(key)
        if cur is None:
            if v != 0:
                self.data[key] = v
        else:
            cur = cur + v
            if cur == 0:
                del self.data[key]
            else:
                self.data[key] = cur

    def transpose(self):
        t = SparseMatrix(self.cols, self.rows)
        for (r, c), v in self.data.items():
            t.data[(c, r)] = v
        return t

    def matmul(self, other):
        """Matrix product self @ other."""
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_col = {}
        for (r, c), v in other.data.items():
            by_col.setdefault(c, []).append((r, v))
        by_row = {}
        for (r, c), v in self.data.items():
            by_row.setdefault(r, {})[c] = v
        out = SparseMatrix(self.rows, other.cols)
        # out[:, c] = sum_k other[k, c] * self[:, k]
        self_by_col = {}
        for (r, k), v in self.data.items():
            self_by_col.setdefault(k, []).append((r, v))
        for c, col in by_col.items():
            acc = {}
            for k, w in col:
                for r, v in self_by_col.get(k, ()):
                    acc[r] = acc.get(r, ZERO) + v * w
            for r, v in acc.items():
                if v != 0:
                    out.data[(r, c)] = v
        return out

    def apply(self, vec):
        """Apply to a sparse column vector given as {index: value}."""
        out = {}
        for (r, c), v in self.data.items():
            w = vec.get(c)
            if w is not None:
                out[r] = out.get(r, ZERO) + v * w
        return {r: v for r, v in out.items() if v != 0}

    def column(self, c):
        return {r: v for (r, cc), v in self.data.items() if cc == c}

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __repr__(self):
        return "SparseMatrix(%d, %d, nnz=%d)" % (self.rows, self.cols,
                                                 self.nnz())


def rank(m):
    """Exact rank over the rationals via sparse Gaussian elimination.

    Pivots are chosen with a cheap Markowitz-style heuristic (sparsest
    available column, sparsest row within it) to limit fill-in.  The result
    never depends on the pivot order.
    """
    import heapq
    cols = {}
    rows_nz = {}
    for (r, c), v in m.data.items():
        cols.setdefault(c, {})[r] = v
        rows_nz.setdefault(r, set()).add(c)
    heap = [(len(d), c) for c, d in cols.items()]
    heapq.heapify(heap)
    rk = 0
    while heap:
        n, pc = heapq.heappop(heap)
        col = cols.get(pc)
        if col is None:
            continue
        if len(col) != n:  # stale heap entry
            heapq.heappush(heap, (len(col), pc))
            continue
        # sparsest row in this column
        pr = min(col, key=lambda r: (len(rows_nz[r]), r))
        pv = col[pr]
        rk += 1
        pivot_row = {c: cols[c][pr] for c in rows_nz[pr]}
        # remove pivot row from all columns it touches
        for c in list(rows_nz[pr]):
            d = cols[c]
            del d[pr]
            if not d:
                del cols[c]
            elif c != pc:
                heapq.heappush(heap, (len(d), c))
        del rows_nz[pr]
        # eliminate pivot column from remaining rows
        victims = list(cols[pc].items()) if pc in cols else []
        for r, v in victims:
            factor = v / pv
            for c, pval in pivot_row.items():
                if c == pc:
                    continue
                d = cols.setdefault(c, {})
                cur = d.get(r)
                nv = (cur if cur is not None else ZERO) - factor * pval
                if nv == 0:
                    if cur is not None:
                        del d[r]
                        rows_nz[r].discard(c)
                        if not d:
                            del cols[c]
                else:
                    if cur is None:
                        rows_nz[r].add(c)
                    d[r] = nv
                if c in cols:
                    heapq.heappush(heap, (len(cols[c]), c))
            rows_nz[r].discard(pc)
            if not rows_nz[r]:
                del rows_nz[r]
        cols.pop(pc, None)
    return rk


def rref(m):
    """Reduced row echelon form.

    Returns (pivot_cols, rows) where rows is a list of sparse row dicts in
    echelon order, each normalized to a leading 1.  Intended for the
    small-to-medium systems behind kernel bases and boundary certificates;
    `rank` is the fast path when only the rank is needed.
    """
    rows = []
    for (r, c), v in sorted(m.data.items()):
        while len(rows) <= r:
            rows.append({})
        rows[r][c] = v
    while len(rows) < m.rows:
        rows.append({})
    pivot_cols = []
    echelon = []
    work = [dict(row) for row in rows if row]
    for col in range(m.cols):
        pivot = None
        best = None
        for i, row in enumerate(work):
            v = row.get(col)
            if v is not None and (best is None or len(row) < best):
                pivot, best = i, len(row)
        if pivot is None:
            continue
        prow = work.pop(pivot)
        pv = prow[col]
        prow = {c: v / pv for c, v in prow.items()}
        for row in work:
            v = row.get(col)
            if v is not None:
                for c, pval in prow.items():
                    cur = row.get(c, ZERO) - v * pval
                    if cur == 0:
                        row.pop(c, None)
                    else:
                        row[c] = cur
        for erow in echelon:
            v = erow.get(col)
            if v is not None:
                for c, pval in prow.items():
                    cur = erow.get(c, ZERO) - v * pval
                    if cur == 0:
                        erow.pop(c, None)
                    else:
                        erow[c] = cur
        pivot_cols.append(col)
        echelon.append(prow)
        work = [row for row in work if row]
    return pivot_cols, echelon


def kernel_basis(m):
    """Basis of {x : m x = 0} as a list of sparse column dicts."""
    pivot_cols, echelon = rref(m)
    pivot_set = set(pivot_cols)
    free = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free:
        vec = {f: ONE}
        for pc, row in zip(pivot_cols, echelon):
            v = row.get(f)
            if v is not None:
                vec[pc] = -v
        basis.append(vec)
    return basis


def solve(m, b):
    """Solve m x = b for a sparse rhs vector {index: value}.

    Returns a sparse solution dict, or None when the system is
    inconsistent.  Used for boundary certificates.
    """
    aug = SparseMatrix(m.rows, m.cols + 1)
    aug.data.update(m.data)
    for r, v in b.items():
        if v != 0:
            aug.data[(r, m.cols)] = v
    pivot_cols, echelon = rref(aug)
    if m.cols in pivot_cols:
        return None
    x = {}
    for pc, row in zip(pivot_cols, echelon):
        v = row.get(m.cols)
        if v is not None and v != 0:
            x[pc] = v
    # back-check is unnecessary: rref of the augmented system is exact
    return x


def kernel_and_quotient(d_in, d_out):
    """Homology data of a two-step complex  C' --d_in--> C --d_out--> C''.

    Returns (kernel rank of d_out, image rank of d_in, betti) with
    betti = dim ker(d_out) - rank(d_in).  Raises ValueError (naming a
    violating column) when d_out . d_in != 0.
    """
    if d_in.rows != d_out.cols:
        raise ValueError("middle dimensions disagree: %d vs %d"
                         % (d_in.rows, d_out.cols))
    comp = d_out.matmul(d_in)
    if comp.data:
        (r, c), v = next(iter(comp.data.items()))
        raise ValueError(
            "d_out . d_in != 0: column %d has entry %s in row %d" % (c, v, r))
    rk_out = rank(d_out)
    rk_in = rank(d_in)
    ker = d_out.cols - rk_out
    betti = ker - rk_in
    if betti < 0:
        raise AssertionError("negative betti; ranks inconsistent")
    return ker, rk_in, betti
