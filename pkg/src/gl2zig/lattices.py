"""Finitely generated O-lattices inside E^n and linear algebra on them.

A lattice is stored as a pivoted echelon basis: sparse rows (dicts, column ->
field element) sorted by pivot column, the pivot of each row being its
leftmost nonzero entry, of exactly known valuation a_i.  Entries of pivot
rows at other pivot columns are reduced modulo pi^(a_j) when the arithmetic
allows it, but equality of lattices is always decided by mutual membership
of bases, never by comparing canonical forms.

Pivot rows are normalized so the pivot entry is exactly pi^(a_i): the row is
divided by its pivot's unit part, which is an exact operation (entries may
become exact unit-denominator fractions) and does not change the O-span.
Eliminations against normalized pivots then subtract pi^(-a) * r[c] times
the pivot row, an exact monomial multiple, so no precision is consumed and
coefficient growth stays linear in the reduction depth.
Intersections go through duality: L1 cap L2 = dual(dual L1 + dual L2).
"""

from __future__ import annotations

from .errors import ContainmentError, PrecisionError
from .localfield import BOUND, ZERO


def _strip_zeros(row):
    return {c: x for c, x in row.items() if x.kind != ZERO}


class _Echelon:
    """Mutable pivoted echelon accumulator; frozen into a Lattice."""

    def __init__(self, field, n):
        self.field = field
        self.n = n
        self.pivots = {}      # col -> row dict, pivot entry exactly pi^a
        self.pivot_val = {}   # col -> int

    # -- elimination of column c from row r against pivot row P ------------

    def _eliminate(self, r, c, prow, a):
        x = r.pop(c)
        piv = prow[c]
        if piv.is_exact():
            # normalized pivots are exactly pi^a, so the quotient is an
            # exact monomial shift
            q = x.shift(-a)
        else:
            q = x / piv
        out = {}
        for j, val in r.items():
            pj = prow.get(j)
            t = val if pj is None else val - q * pj
            if t.kind != ZERO:
                out[j] = t
        for j, pj in prow.items():
            if j == c or j in r:
                continue
            t = q * pj
            if t.kind != ZERO:
                out[j] = t.neg()
        return out

    def _entry_val(self, x, col, need):
        """Exact valuation, or the bound for BOUND entries.

        Raises PrecisionError when a BOUND entry cannot be classified
        against the needed pivot valuation.
        """
        if x.kind == BOUND:
            if need is not None and x.data >= need:
                return x.data
            raise PrecisionError(
                f"entry at column {col} only known to be O(pi^{x.data})",
                trail=("echelon",))
        return x.valuation()

    def insert(self, row):
        """Add one generator; returns True when the lattice grew."""
        queue = [_strip_zeros(dict(row))]
        changed = False
        while queue:
            r = queue.pop()
            while r:
                c = min(r)
                x = r[c]
                prow = self.pivots.get(c)
                if prow is None:
                    if x.kind == BOUND:
                        raise PrecisionError(
                            f"pivot candidate at column {c} is imprecise",
                            trail=("echelon",))
                    self._install(c, r)
                    changed = True
                    r = None
                    break
                a = self.pivot_val[c]
                vx = self._entry_val(x, c, a)
                if vx >= a:
                    r = self._eliminate(r, c, prow, a)
                    continue
                # displace: r becomes the new, smaller pivot at column c
                del self.pivots[c]
                del self.pivot_val[c]
                self._install(c, r)
                changed = True
                queue.append(prow)
                r = None
                break
        return changed

    def _install(self, c, r):
        x = r[c]
        a = int(x.valuation())
        if x.is_exact():
            # normalize the row by the pivot's unit part (an exact division;
            # unit scaling of a generator preserves the O-span), so the pivot
            # entry becomes exactly pi^a
            unit = x.shift(-a)
            if not _is_one(unit):
                inv = self.field.one / unit
                r = {cc: (inv * val if cc != c else self.field.monomial(0, a))
                     for cc, val in r.items()}
        self.pivots[c] = r
        self.pivot_val[c] = a

    def reduce_above(self):
        """Reduce exact entries of pivot rows at other pivot columns."""
        cols = sorted(self.pivots)
        for ci in cols:
            row = self.pivots[ci]
            for cj in cols:
                if cj <= ci or cj not in row:
                    continue
                x = row[cj]
                a = self.pivot_val[cj]
                prow = self.pivots[cj]
                if x.kind == BOUND:
                    continue
                if x.valuation() >= a:
                    row = self._eliminate(dict(row), cj, prow, a)
                    self.pivots[ci] = row
                    continue
                if not x.is_exact() or not prow[cj].is_exact():
                    continue
                q, _ = (x / prow[cj]).split_at_zero()
                if q.kind == ZERO:
                    continue
                new = dict(row)
                for j, pj in prow.items():
                    t = new.get(j, self.field.zero) - q * pj
                    if t.kind == ZERO:
                        new.pop(j, None)
                    else:
                        new[j] = t
                row = new
                self.pivots[ci] = row

    def to_lattice(self):
        self.reduce_above()
        cols = sorted(self.pivots)
        rows = [self.pivots[c] for c in cols]
        vals = [self.pivot_val[c] for c in cols]
        return Lattice(self.field, self.n, cols, vals, rows)


def _is_one(x):
    return x.kind != ZERO and x.is_exact() and (x - x.field.one).kind == ZERO


class Lattice:
    """Immutable O-lattice in E^n, held as a pivoted echelon basis."""

    __slots__ = ("field", "n", "pivot_cols", "pivot_vals", "rows")

    def __init__(self, field, n, pivot_cols, pivot_vals, rows):
        self.field = field
        self.n = n
        self.pivot_cols = tuple(pivot_cols)
        self.pivot_vals = tuple(pivot_vals)
        self.rows = tuple(dict(r) for r in rows)

    # ------------------------------------------------------------- builders

    @classmethod
    def from_generators(cls, field, n, vectors):
        ech = _Echelon(field, n)
        for v in vectors:
            ech.insert(v)
        return ech.to_lattice()

    @classmethod
    def standard(cls, field, n, exponents=None):
        """Diagonal lattice with pivot pi^exponents[i] at column i."""
        if exponents is None:
            exponents = [0] * n
        rows = [{i: field.monomial(0, a)} for i, a in enumerate(exponents)]
        return cls(field, n, range(n), [int(a) for a in exponents], rows)

    # -------------------------------------------------------------- queries

    @property
    def rank(self):
        return len(self.rows)

    def is_full_rank(self):
        return len(self.rows) == self.n

    def pivot_profile(self):
        """Tuple of (column, valuation) pairs; cheap stabilization filter."""
        return tuple(zip(self.pivot_cols, self.pivot_vals))

    def basis_rows(self):
        return [dict(r) for r in self.rows]

    def member(self, vector):
        """Does the vector lie in the lattice?  Exact for exact input."""
        r = _strip_zeros(dict(vector))
        ech = _Echelon(self.field, self.n)
        ech.pivots = {c: self.rows[i] for i, c in enumerate(self.pivot_cols)}
        ech.pivot_val = dict(zip(self.pivot_cols, self.pivot_vals))
        while r:
            c = min(r)
            x = r[c]
            prow = ech.pivots.get(c)
            if prow is None:
                if x.kind == BOUND:
                    raise PrecisionError(
                        f"membership undecidable at column {c}",
                        trail=("member",))
                return False
            a = ech.pivot_val[c]
            if x.kind == BOUND:
                if x.data >= a:
                    r = ech._eliminate(r, c, prow, a)
                    continue
                raise PrecisionError(
                    f"membership undecidable at column {c}", trail=("member",))
            if x.valuation() < a:
                return False
            r = ech._eliminate(r, c, prow, a)
        return True

    def __eq__(self, other):
        if not isinstance(other, Lattice):
            return NotImplemented
        return self.equal(other)

    def __hash__(self):
        return hash((self.n, self.pivot_profile()))

    def equal(self, other):
        """Mutual membership of bases (canonical forms are not trusted)."""
        if self.n != other.n or self.pivot_profile() != other.pivot_profile():
            return False
        return (all(other.member(r) for r in self.rows)
                and all(self.member(r) for r in other.rows))

    def contains(self, other):
        """other subseteq self."""
        return all(self.member(r) for r in other.rows)

    def index_valuation(self, sub):
        """v of the index [self : sub] for sub subseteq self (checked)."""
        if not self.contains(sub):
            raise ContainmentError("index of a non-contained lattice")
        if self.rank != sub.rank:
            raise ContainmentError("index of lattices of different rank")
        return sum(sub.pivot_vals) - sum(self.pivot_vals)

    # ----------------------------------------------------------- operations

    def add(self, other):
        assert self.n == other.n
        ech = self._thaw()
        for r in other.rows:
            ech.insert(r)
        return ech.to_lattice()

    __or__ = add

    def scale(self, k):
        """Multiply by pi^k."""
        rows = [{c: x.shift(k) for c, x in r.items()} for r in self.rows]
        return Lattice(self.field, self.n, self.pivot_cols,
                       [a + k for a in self.pivot_vals], rows)

    def apply(self, matrix):
        """Image under the linear map sending e_i to the row matrix[i]."""
        out = []
        for r in self.rows:
            img = {}
            for c, x in r.items():
                for j, m in matrix.get(c, {}).items():
                    t = img.get(j)
                    val = x * m
                    img[j] = val if t is None else t + val
            out.append(_strip_zeros(img))
        return Lattice.from_generators(self.field, self.n, out)

    def solve_row(self, vector):
        """Coefficients x with x . basis = vector (forward substitution).

        The vector must lie in the E-span of the basis; entries of the
        result are exact FRACs when the inputs are exact.
        """
        coeffs = [self.field.zero] * self.rank
        r = dict(vector)
        r = _strip_zeros(r)
        order = {c: i for i, c in enumerate(self.pivot_cols)}
        while r:
            c = min(r)
            if c not in order:
                raise ContainmentError(
                    f"vector not in the span of the lattice (column {c})")
            i = order[c]
            q = r.pop(c) / self.rows[i][c]
            coeffs[i] = q
            for j, pj in self.rows[i].items():
                if j == c:
                    continue
                t = r.get(j, self.field.zero) - q * pj
                if t.kind == ZERO:
                    r.pop(j, None)
                else:
                    r[j] = t
        return coeffs

    def dual(self):
        """{x : <x, L> subseteq O} for a full-rank lattice."""
        assert self.is_full_rank(), "duality needs a full-rank lattice"
        f = self.field
        n = self.n
        inv_rows = []
        for i in range(n):
            inv_rows.append(self.solve_row({i: f.one}))
        # dual basis rows are the columns of the inverse matrix
        gens = []
        for i in range(n):
            row = {}
            for k in range(n):
                x = inv_rows[k][i]
                if x.kind != ZERO:
                    row[k] = x
            gens.append(row)
        return Lattice.from_generators(f, n, gens)

    def intersect(self, other):
        """L1 cap L2 via duality: dual(dual L1 + dual L2)."""
        assert self.n == other.n
        return self.dual().add(other.dual()).dual()

    def meet_subspace(self, subspace):
        """{c in E^k : sum_i c_i * U_i in L}, as a lattice in U-coordinates."""
        assert subspace.n == self.n
        assert self.is_full_rank(), "meet_subspace needs a full-rank lattice"
        k = subspace.rank
        arows = [self.solve_row(u) for u in subspace.rows]
        gens = []
        for j in range(self.n):
            col = {}
            for i in range(k):
                x = arows[i][j]
                if x.kind != ZERO:
                    col[i] = x
            if col:
                gens.append(col)
        return Lattice.from_generators(self.field, k, gens).dual()

    # ------------------------------------------------------------- plumbing

    def _thaw(self):
        ech = _Echelon(self.field, self.n)
        ech.pivots = {c: dict(self.rows[i])
                      for i, c in enumerate(self.pivot_cols)}
        ech.pivot_val = dict(zip(self.pivot_cols, self.pivot_vals))
        return ech

    def dump(self):
        """Deterministic serialization: pivots plus reduced digit strings."""
        return {
            "ambient": self.n,
            "pivots": [[c, a] for c, a in self.pivot_profile()],
            "rows": [
                {str(c): x.dump() for c, x in sorted(r.items())}
                for r in self.rows
            ],
        }

    def __repr__(self):
        return f"Lattice(n={self.n}, pivots={list(self.pivot_profile())})"


class Subspace:
    """An E-subspace of E^n given by independent sparse basis rows."""

    __slots__ = ("field", "n", "rows", "_pivot_cols", "_order", "_tri")

    def __init__(self, field, n, rows):
        self.field = field
        self.n = n
        self.rows = tuple(dict(r) for r in rows)
        self._prepare()

    def _prepare(self):
        """Field-echelon of the rows for coordinate solves.

        Keeps the triangular transform so coordinates come back against the
        original basis rows: tri is a list of (reduced_row, combo) where
        combo expresses the reduced row over the originals.
        """
        f = self.field
        tri = []  # (pivot_col, reduced_row, combo dict over original rows)
        for idx, row in enumerate(self.rows):
            r = dict(row)
            combo = {idx: f.one}
            while True:
                r = _strip_zeros(r)
                if not r:
                    raise ValueError("subspace rows are dependent")
                c = min(r)
                hit = next((t for t in tri if t[0] == c), None)
                if hit is None:
                    tri.append((c, r, combo))
                    break
                _, prow, pcombo = hit
                q = r[c] / prow[c]
                for j, pj in prow.items():
                    t = r.get(j, f.zero) - q * pj
                    if t.kind == ZERO:
                        r.pop(j, None)
                    else:
                        r[j] = t
                r.pop(c, None)
                for j, pj in pcombo.items():
                    t = combo.get(j, f.zero) - q * pj
                    combo[j] = t
        self._tri = tri
        self._pivot_cols = tuple(sorted(t[0] for t in tri))

    @property
    def rank(self):
        return len(self.rows)

    def coordinates(self, vector):
        """Coefficients over the original rows, or None if not in the span."""
        f = self.field
        r = _strip_zeros(dict(vector))
        coeffs = {}
        tri = sorted(self._tri, key=lambda t: t[0])
        for c, prow, pcombo in tri:
            x = r.get(c)
            if x is None or x.kind == ZERO:
                continue
            q = x / prow[c]
            for j, pj in prow.items():
                t = r.get(j, f.zero) - q * pj
                if t.kind == ZERO:
                    r.pop(j, None)
                else:
                    r[j] = t
            for j, pj in pcombo.items():
                t = coeffs.get(j, f.zero) + q * pj
                coeffs[j] = t
        if any(x.kind != ZERO for x in r.values()):
            return None
        return [coeffs.get(i, f.zero) for i in range(self.rank)]

    def embed_row(self, coeff_row):
        """Row in E^n from a sparse coefficient row over the subspace basis."""
        out = {}
        for i, x in coeff_row.items():
            for c, u in self.rows[i].items():
                t = out.get(c)
                val = x * u
                out[c] = val if t is None else t + val
        return _strip_zeros(out)

    def embed_lattice(self, lat):
        """Push a lattice in subspace coordinates into E^n generators."""
        return [self.embed_row(r) for r in lat.rows]

    def __repr__(self):
        return f"Subspace(n={self.n}, rank={self.rank})"
