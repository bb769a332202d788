"""Arithmetic in a finite extension E of Q_p with exact valuations.

E is presented as the unramified extension of degree u followed by the pure
Eisenstein extension pi^e = c*p with c in {+1,-1}.  Valuations are normalized
by v(pi) = 1, so v(p) = e and all lattice exponents stay integral.

Element kinds
-------------
* ZERO   -- exactly zero (valuation +infinity).
* SUM    -- an exact element of Z[zeta][1/p] . pi^Z, stored per pi-slot as
            p^s * (integer vector over the zeta-power basis mod Phi_M) where
            zeta is the Teichmueller generator of mu_M, M = p^u - 1.  Ring
            operations on SUMs are exact, zero is canonical, and valuations
            are resolved exactly by embedding into digit rings (terminates
            for every canonically nonzero element).
* FRAC   -- quotient of a SUM by a unit SUM; transient carrier for solves.
* APPROX -- capped relative precision digit vector: the unit part is known
            modulo pi^prec.  The reported valuation is exact.
* BOUND  -- "O(pi^B)": only a lower bound B on the valuation is known.  Any
            question whose answer depends on digits below B raises
            PrecisionError; callers escalate and retry from exact inputs.

Teichmueller lifts, roots of unity, powers of pi and rational integers are
SUMs, hence exact, and products/powers of exact elements stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, PrecisionError
from .residue import CyclotomicRing, ResidueField, is_prime

_VAL_RESOLUTION_CAP = 1 << 16  # p-digit ceiling for resolving SUM valuations

ZERO, SUM, FRAC, APPROX, BOUND = "zero", "sum", "frac", "approx", "bound"


@dataclass(frozen=True)
class LocalFieldSpec:
    """Parameters of E: residue degree u, ramification e, pi^e = eis_const * p."""

    p: int
    u: int = 1
    e: int = 1
    eis_const: int = 1
    default_precision: int = 48  # relative pi-adic digits

    def validate(self):
        if not is_prime(self.p):
            raise ConfigurationError(f"p = {self.p} is not prime")
        if self.p == 2:
            raise ConfigurationError(
                "p = 2 is not supported: the exact unit arithmetic needs "
                "-1 inside the Teichmueller group")
        if self.u < 1 or self.e < 1:
            raise ConfigurationError("u and e must be positive")
        if self.eis_const not in (1, -1):
            raise ConfigurationError("eis_const must be +1 or -1")
        if self.default_precision < 1:
            raise ConfigurationError("default_precision must be >= 1")


class _GaloisRing:
    """(Z/p^N)[y]/(h) for a fixed integer lift h of the residue polynomial.

    Elements are tuples of u integers in [0, p^N).  The Teichmueller lift of
    the residue generator is computed once per precision by iterating the
    q-power map to its fixed point.
    """

    def __init__(self, p, u, hpoly, N):
        self.p = p
        self.u = u
        self.N = N
        self.mod = p**N
        self.h = hpoly  # tuple of length u+1, monic
        self._teich = {}

    def add(self, a, b):
        return tuple((x + y) % self.mod for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.mod for x, y in zip(a, b))

    def scalar(self, a, n):
        return tuple((x * n) % self.mod for x in a)

    def mul(self, a, b):
        u, mod, h = self.u, self.mod, self.h
        if u == 1:
            return ((a[0] * b[0]) % mod,)
        out = [0] * (2 * u - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] = (out[i + j] + x * y) % mod
        for k in range(2 * u - 2, u - 1, -1):
            c = out[k]
            if c:
                out[k] = 0
                for j in range(u):
                    out[k - u + j] = (out[k - u + j] - c * h[j]) % mod
        return tuple(out[:u])

    def pow(self, a, n):
        result = self.one()
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def one(self):
        return tuple([1] + [0] * (self.u - 1))

    def vp(self, a):
        """min p-valuation over coordinates, capped at N."""
        best = self.N
        for x in a:
            x %= self.mod
            if x:
                v = 0
                while x % self.p == 0:
                    x //= self.p
                    v += 1
                if v < best:
                    best = v
        return best

    def divexact_p(self, a, k):
        pk = self.p**k
        assert all(x % pk == 0 for x in a), "inexact p-division in digits"
        return tuple((x // pk) % self.mod for x in a)

    def teichmuller_generator(self):
        if 1 in self._teich:
            return self._teich[1]
        z = tuple([0, 1] + [0] * (self.u - 2)) if self.u > 1 else (
            (self.p - self.h[0]) % self.mod,)
        q = self.p**self.u
        for _ in range(2 * self.N + 4):
            nz = self.pow(z, q)
            if nz == z:
                self._teich[1] = z
                return z
            z = nz
        raise AssertionError("Teichmueller iteration failed to converge")

    def teich_pow(self, j):
        if j not in self._teich:
            self._teich[j] = self.pow(self.teichmuller_generator(), j)
        return self._teich[j]

    def eval_zeta_poly(self, vec):
        """Sum of vec[t] * zeta^t over the stored zeta-power basis."""
        acc = tuple([0] * self.u)
        for t, c in enumerate(vec):
            if c:
                acc = self.add(acc, self.scalar(self.teich_pow(t), c))
        return acc


class LocalField:
    """Immutable handle for E; carries caches and the working precision."""

    def __init__(self, spec: LocalFieldSpec):
        spec.validate()
        self.spec = spec
        self.p = spec.p
        self.u = spec.u
        self.e = spec.e
        self.c = spec.eis_const
        self.precision = spec.default_precision
        self.M = spec.p**spec.u - 1
        self.residue = ResidueField(spec.p, spec.u)
        self.cyclo = CyclotomicRing(self.M)
        self._hpoly = tuple(int(x) for x in self.residue.poly)
        self._rings = {}
        # recognize +-zeta^j coefficient vectors (for exact unit division)
        self._mono_lookup = {vec: j for j, vec in enumerate(self.cyclo._zeta)}
        self.zero = FE(self, ZERO, None)
        self.one = self.monomial(0, 0)
        self.pi = self.monomial(0, 1)
        self.p_elem = FE(self, SUM, ((0, 1, self.cyclo._zeta[0]),))

    def core_key(self):
        return (self.p, self.u, self.e, self.c)

    def at_precision(self, precision):
        """Same field, different working precision; digit caches are shared."""
        if precision == self.precision:
            return self
        other = LocalField(LocalFieldSpec(
            self.p, self.u, self.e, self.c, precision))
        other._rings = self._rings
        return other

    def ring(self, N):
        if N not in self._rings:
            self._rings[N] = _GaloisRing(self.p, self.u, self._hpoly, N)
        return self._rings[N]

    # ----------------------------------------------------------------- ctors

    def monomial(self, zeta_exp, pi_exp, p_shift=0):
        """Exact p^p_shift * zeta^zeta_exp * pi^pi_exp."""
        j = zeta_exp % self.M
        t, k = divmod(pi_exp, self.e)
        s = p_shift + t
        if self.c == -1 and t % 2:
            j = (j + self.M // 2) % self.M  # pi^e = -p
        return FE(self, SUM, ((k, s, self.cyclo._zeta[j]),))

    def teichmuller(self, lam):
        """Teichmueller lift of a residue element (of E or of a subfield)."""
        if lam.field is not self.residue:
            lam = lam.embed(self.residue)
        if lam.is_zero():
            return self.zero
        return self.monomial(lam.log, 0)

    def from_int(self, n):
        if n == 0:
            return self.zero
        s = 0
        while n % self.p == 0:
            n //= self.p
            s += 1
        return FE(self, SUM, ((0, s, tuple(self.cyclo._reduce([n]))),))

    def sqrt_q(self, f):
        """Exact square root of q = p^f, when representable in E."""
        v = self.e * f
        if v % 2:
            raise ConfigurationError(
                f"sqrt(q) needs e*f even, got e={self.e}, f={f}")
        if self.c == -1 and f % 2:
            if self.M % 4:
                raise ConfigurationError("sqrt(-p) needs 4 | p^u - 1")
            return self.monomial(self.M // 4, v // 2)
        return self.monomial(0, v // 2)

    def root_of_pi_F(self, denominator):
        """Exact pi_F^(1/denominator) with pi_F = p, when representable."""
        if self.e % denominator:
            raise ConfigurationError(
                f"pi_F^(1/{denominator}) needs {denominator} | e = {self.e}")
        if self.c == -1:
            if self.M % (2 * denominator):
                raise ConfigurationError(
                    "root of -p not available in the Teichmueller group")
            return self.monomial(self.M // (2 * denominator),
                                 self.e // denominator)
        return self.monomial(0, self.e // denominator)

    # ------------------------------------------------------- SUM internals
    # raw slot data: sorted tuple of (k, s, vec), k in [0, e), vec nonzero
    # and p-content-free.  () encodes zero.

    def _slot_norm(self, s, vec):
        if all(x == 0 for x in vec):
            return None
        while all(x % self.p == 0 for x in vec):
            vec = tuple(x // self.p for x in vec)
            s += 1
        return (s, tuple(vec))

    def _raw_make(self, slots):
        return tuple((k,) + slots[k] for k in sorted(slots))

    def _raw_add(self, a, b):
        slots = {k: (s, vec) for k, s, vec in a}
        for k, s2, v2 in b:
            if k not in slots:
                slots[k] = (s2, v2)
                continue
            s1, v1 = slots[k]
            s = min(s1, s2)
            m1 = self.p**(s1 - s)
            m2 = self.p**(s2 - s)
            nw = self._slot_norm(s, tuple(x * m1 + y * m2
                                          for x, y in zip(v1, v2)))
            if nw is None:
                del slots[k]
            else:
                slots[k] = nw
        return self._raw_make(slots)

    def _raw_neg(self, a):
        return tuple((k, s, tuple(-x for x in vec)) for k, s, vec in a)

    def _raw_mul(self, a, b):
        slots = {}
        red = self.cyclo._reduce
        deg = self.cyclo.degree
        for k1, s1, v1 in a:
            for k2, s2, v2 in b:
                k = k1 + k2
                s = s1 + s2
                neg = False
                if k >= self.e:
                    k -= self.e
                    s += 1
                    neg = self.c == -1
                prod = [0] * (2 * deg - 1) if deg > 1 else [0]
                for i, x in enumerate(v1):
                    if x:
                        for j, y in enumerate(v2):
                            prod[i + j] += x * y
                vec = red(prod)
                if neg:
                    vec = [-x for x in vec]
                if k in slots:
                    s0, v0 = slots[k]
                    smin = min(s0, s)
                    m0 = self.p**(s0 - smin)
                    m1 = self.p**(s - smin)
                    slots[k] = (smin, tuple(x * m0 + y * m1
                                            for x, y in zip(v0, vec)))
                else:
                    slots[k] = (s, tuple(vec))
        out = {}
        for k, (s, vec) in slots.items():
            nw = self._slot_norm(s, vec)
            if nw is not None:
                out[k] = nw
        return self._raw_make(out)

    def _raw_shift(self, a, pi_exp):
        """Multiply raw slots by pi^pi_exp (exact monomial product)."""
        return self._raw_mul(a, self.monomial(0, pi_exp).data)

    def _raw_conj_pi(self, raw, t):
        """Image under the tower automorphism pi |-> zeta^(t M/e) pi.

        Defined whenever e | M; slot k picks up zeta^(t k M/e), a unit, so
        slot-wise valuations are preserved.
        """
        step = (self.M // self.e) * t
        out = []
        for k, s, vec in raw:
            z = self.cyclo._zeta[(step * k) % self.M]
            prod = [0] * (2 * self.cyclo.degree - 1) if self.cyclo.degree > 1 else [0]
            for i, x in enumerate(vec):
                if x:
                    for j, y in enumerate(z):
                        prod[i + j] += x * y
            out.append((k, s, tuple(self.cyclo._reduce(prod))))
        return tuple(out)

    def _raw_conj_zeta(self, raw, t):
        """Image under zeta |-> zeta^t for t coprime to M."""
        out = []
        for k, s, vec in raw:
            acc = [0] * self.cyclo.degree
            for i, c in enumerate(vec):
                if c:
                    for j, y in enumerate(self.cyclo._zeta[(i * t) % self.M]):
                        acc[j] += c * y
            out.append((k, s, tuple(acc)))
        return tuple(out)

    def _rationalize_den(self, num, den):
        """Multiply num/den by conjugates of den until den is integral.

        Returns (num', den') with den' = ((0, 0, (n, 0, ...)),), n > 0
        coprime to p, or the inputs unchanged when the tower automorphism is
        unavailable (e does not divide M) and den mixes pi-slots.
        """
        if self.e > 1 and len(den) > 1:
            if self.M % self.e:
                return num, den  # no tower automorphism available
            for t in range(1, self.e):
                cj = self._raw_conj_pi(den, t)
                num = self._raw_mul(num, cj)
                den = self._raw_mul(den, cj)
            assert len(den) == 1 and den[0][0] == 0, "tower norm not rational"
        # den is now a single slot (0, s, vec); rationalize the zeta-part
        k0, s0, vec0 = den[0]
        if k0 != 0:
            return num, den  # pure pi-slot off zero: cannot normalize
        if any(vec0[1:]):
            for t in range(2, self.M):
                if _gcd(t, self.M) == 1:
                    cj = self._raw_conj_zeta(den, t)
                    num = self._raw_mul(num, cj)
                    den = self._raw_mul(den, cj)
            k0, s0, vec0 = den[0]
            assert not any(vec0[1:]), "zeta norm not rational"
        n = vec0[0]
        if n < 0:
            n = -n
            num = self._raw_neg(num)
        # fold the p-shift of the denominator into the numerator
        if s0:
            num = tuple((k, s - s0, vec) for k, s, vec in num)
        # gcd-reduce against the numerator content
        g = n
        for _, _, vec in num:
            for c in vec:
                g = _gcd(g, abs(c))
                if g == 1:
                    break
            if g == 1:
                break
        if g > 1:
            num = tuple((k, s, tuple(c // g for c in vec))
                        for k, s, vec in num)
            n //= g
        den = ((0, 0, tuple([n] + [0] * (self.cyclo.degree - 1))),)
        return num, den

    def _vec_vp(self, vec):
        """Exact p-adic valuation of a p-content-free zeta-vector (>= 0)."""
        N = 8
        while N <= _VAL_RESOLUTION_CAP:
            ring = self.ring(N)
            v = ring.vp(ring.eval_zeta_poly(vec))
            if v < N:
                return v
            N *= 2
        raise PrecisionError("valuation resolution exceeded the hard cap",
                             trail=("_vec_vp",))

    def _raw_val(self, slots):
        return min(self.e * (s + self._vec_vp(vec)) + k for k, s, vec in slots)

    def sum_from_raw(self, raw):
        if not raw:
            return self.zero
        return FE(self, SUM, raw)

    # --------------------------------------------------- digit (APPROX) ops

    def _digits_nd(self, prec, k):
        """Valid p-digit count of slot k at relative precision prec."""
        return max(0, -(-(prec - k) // self.e))

    def _truncate_digits(self, digits, prec):
        out = []
        for k, a in enumerate(digits):
            mod = self.p**self._digits_nd(prec, k)
            out.append(tuple(x % mod for x in a))
        return tuple(out)

    def _digits_shift(self, digits, delta):
        """Multiply a digit slot-vector by pi^delta (delta >= 0), exactly."""
        e, p = self.e, self.p
        out = [tuple([0] * self.u) for _ in range(e)]
        for k, a in enumerate(digits):
            t, k2 = divmod(k + delta, e)
            scale = p**t if (self.c == 1 or t % 2 == 0) else -(p**t)
            out[k2] = tuple(x + y * scale for x, y in zip(out[k2], a))
        return tuple(out)

    def _digits_unshift(self, digits, delta):
        """Divide by pi^delta (delta >= 0); digits must be divisible."""
        e, p = self.e, self.p
        out = [tuple([0] * self.u) for _ in range(e)]
        for k, a in enumerate(digits):
            kk = k - delta
            t = 0 if kk >= 0 else (e - 1 - kk) // e
            k2 = kk + t * e
            pt = p**t
            assert all(x % pt == 0 for x in a), "inexact pi-division"
            sign = 1 if (self.c == 1 or t % 2 == 0) else -1
            b = tuple((x // pt) * sign for x in a)
            out[k2] = tuple(x + y for x, y in zip(out[k2], b))
        return tuple(out)

    def _digits_val_offset(self, digits, prec):
        """Least valid pi-exponent offset with a nonzero digit, else None."""
        best = None
        for k, a in enumerate(digits):
            nd = self._digits_nd(prec, k)
            if nd == 0:
                continue
            ring = self.ring(nd)
            v = ring.vp(a)
            if v < nd:
                cand = self.e * v + k
                if cand < prec and (best is None or cand < best):
                    best = cand
        return best

    def _approx_make(self, v, digits, prec):
        """Normalize raw digits at pi^v, valid relatively down to prec."""
        if prec <= 0:
            return FE(self, BOUND, v + prec)
        off = self._digits_val_offset(digits, prec)
        if off is None:
            return FE(self, BOUND, v + prec)
        if off:
            digits = self._digits_unshift(digits, off)
            v += off
            prec -= off
        return FE(self, APPROX, (v, self._truncate_digits(digits, prec), prec))

    def materialize(self, x, prec=None):
        """APPROX image of x at relative precision prec (exact x re-expands)."""
        if prec is None:
            prec = self.precision
        if x.kind in (ZERO, BOUND):
            return x
        if x.kind == APPROX:
            v, digits, xprec = x.data
            npr = min(prec, xprec)
            return FE(self, APPROX, (v, self._truncate_digits(digits, npr), npr))
        if x.kind == FRAC:
            num, den = x.data
            a = self.materialize(self.sum_from_raw(num), prec)
            b = self.materialize(self.sum_from_raw(den), prec)
            return self._approx_div(a, b)
        v = x.valuation()
        unit = self._raw_shift(x.data, -v)
        Nd = -(-prec // self.e) + 1
        ring = self.ring(Nd)
        digits = [tuple([0] * self.u) for _ in range(self.e)]
        for k, s, vec in unit:
            if s >= 0:
                img = ring.scalar(ring.eval_zeta_poly(vec), self.p**s)
            else:
                ring2 = self.ring(Nd - s)
                img = ring2.eval_zeta_poly(vec)
                img = ring2.divexact_p(img, -s)
                img = tuple(y % ring.mod for y in img)
            digits[k] = ring.add(digits[k], img)
        return self._approx_make(v, tuple(digits), prec)

    def _approx_add(self, x, y):
        vx, dx, px = x.data
        vy, dy, py = y.data
        if vx > vy:
            vx, dx, px, vy, dy, py = vy, dy, py, vx, dx, px
        floor = min(vx + px, vy + py)
        dy2 = self._digits_shift(dy, vy - vx)
        digits = tuple(tuple(a + b for a, b in zip(s1, s2))
                       for s1, s2 in zip(dx, dy2))
        return self._approx_make(vx, digits, floor - vx)

    def _approx_mul(self, x, y):
        vx, dx, px = x.data
        vy, dy, py = y.data
        prec = min(px, py)
        ring = self.ring(-(-prec // self.e) + 1)
        out = [tuple([0] * self.u) for _ in range(self.e)]
        for k1, a in enumerate(dx):
            if all(v == 0 for v in a):
                continue
            a = tuple(v % ring.mod for v in a)
            for k2, b in enumerate(dy):
                if all(v == 0 for v in b):
                    continue
                prod = ring.mul(a, tuple(v % ring.mod for v in b))
                k = k1 + k2
                if k >= self.e:
                    k -= self.e
                    prod = ring.scalar(prod, self.c * self.p)
                out[k] = ring.add(out[k], prod)
        return self._approx_make(vx + vy, tuple(out), prec)

    def _residue_inverse_digits(self, a0):
        """Inverse of the unit residue of a0, as a base-p coefficient tuple."""
        f = self.residue
        packed = 0
        for c in reversed([x % self.p for x in a0]):
            packed = packed * self.p + c
        inv = f.from_packed(packed).inverse()
        v = f._exp[inv.log]
        out = []
        for _ in range(self.u):
            out.append(v % self.p)
            v //= self.p
        return tuple(out)

    def _vec_unit_inverse(self, digits, prec):
        """APPROX inverse of a unit digit vector at relative precision prec."""
        Nd = -(-prec // self.e) + 1
        ring = self.ring(Nd)
        a0 = tuple(x % ring.mod for x in digits[0])
        w = self._residue_inverse_digits(a0)
        k = 1
        while k < Nd:
            k = min(2 * k, Nd)
            rk = self.ring(k)
            w = tuple(x % rk.mod for x in w)
            aw = rk.mul(tuple(x % rk.mod for x in a0), w)
            w = rk.mul(w, rk.sub(rk.scalar(rk.one(), 2), aw))
        base = [tuple([0] * self.u) for _ in range(self.e)]
        base[0] = tuple(x % ring.mod for x in w)
        cur = FE(self, APPROX, (0, tuple(base), prec))
        x = FE(self, APPROX, (0, self._truncate_digits(digits, prec), prec))
        two = self.materialize(self.from_int(2), prec)
        for _ in range(prec.bit_length() + 2):
            t = self._approx_mul(x, cur)
            cur = self._approx_mul(cur, self._approx_add(two, t.neg()))
        return cur

    def _approx_div(self, x, y):
        vy, dy, py = y.data
        inv = self._vec_unit_inverse(dy, py)
        q = self._approx_mul(x, inv) if x.kind == APPROX else None
        if q is None:
            raise AssertionError("approx division expects approx numerator")
        if q.kind == APPROX:
            vq, dq, pq = q.data
            return FE(self, APPROX, (vq - vy, dq, pq))
        if q.kind == BOUND:
            return FE(self, BOUND, q.data - vy)
        return q

    def with_precision(self, x, n):
        """x truncated/materialized at relative precision n."""
        if n < 1:
            raise ConfigurationError("precision must be >= 1")
        return self.materialize(x, n)


def make_field(spec: LocalFieldSpec) -> LocalField:
    """Spec-validated field handle with constants 0, 1, pi and p."""
    return LocalField(spec)


def raise_precision_and_retry(computation, field, ceiling=4096):
    """computation(field), doubling the working precision on PrecisionError.

    The computation must rebuild everything it needs from exact inputs with
    the handle it receives; partial results from failed attempts must not be
    reused.
    """
    f = field
    trail = []
    while True:
        try:
            return computation(f)
        except PrecisionError as err:
            trail.extend(err.trail)
            nxt = f.precision * 2
            if nxt > ceiling:
                raise PrecisionError(
                    f"precision ceiling {ceiling} exceeded", trail=trail)
            f = f.at_precision(nxt)


class FE:
    """A scalar of E.  Immutable; arithmetic never underreports valuations."""

    __slots__ = ("field", "kind", "data", "_val")

    def __init__(self, field, kind, data):
        self.field = field
        self.kind = kind
        self.data = data
        self._val = None

    # ------------------------------------------------------------- queries

    def is_zero(self):
        if self.kind == ZERO:
            return True
        if self.kind == BOUND:
            raise PrecisionError("zero test on an imprecise element",
                                 trail=("is_zero",))
        return False

    def is_exact(self):
        return self.kind in (ZERO, SUM, FRAC)

    def valuation(self):
        """Exact normalized valuation (v(pi) = 1); +inf at zero."""
        if self.kind == ZERO:
            return math.inf
        if self._val is None:
            f = self.field
            if self.kind == SUM:
                self._val = f._raw_val(self.data)
            elif self.kind == FRAC:
                num, den = self.data
                self._val = f._raw_val(num) - f._raw_val(den)
            elif self.kind == APPROX:
                self._val = self.data[0]
            else:
                raise PrecisionError(
                    f"valuation of an element only known to be O(pi^{self.data})",
                    trail=("valuation",))
        return self._val

    def precision(self):
        """Relative precision in pi-digits; +inf for exact elements."""
        if self.kind in (ZERO, SUM, FRAC):
            return math.inf
        if self.kind == APPROX:
            return self.data[2]
        return 0

    def bound(self):
        """A certified lower bound for the valuation."""
        if self.kind == BOUND:
            return self.data
        v = self.valuation()
        return v

    def abs_floor(self):
        """Absolute pi-exponent below which nothing is known."""
        if self.kind in (ZERO, SUM, FRAC):
            return math.inf
        if self.kind == APPROX:
            return self.data[0] + self.data[2]
        return self.data

    # ---------------------------------------------------------- arithmetic

    def __add__(self, other):
        f = self.field
        a, b = self, other
        if a.kind == ZERO:
            return b
        if b.kind == ZERO:
            return a
        if a is b:
            return a * f.from_int(2)
        if a.kind == SUM and b.kind == SUM:
            return f.sum_from_raw(f._raw_add(a.data, b.data))
        if a.is_exact() and b.is_exact():
            n1, d1 = a._as_frac()
            n2, d2 = b._as_frac()
            num = f._raw_add(f._raw_mul(n1, d2), f._raw_mul(n2, d1))
            return _frac_make(f, num, f._raw_mul(d1, d2))
        if BOUND in (a.kind, b.kind):
            if a.kind != BOUND:
                a, b = b, a
            if b.kind == BOUND:
                return FE(f, BOUND, min(a.data, b.data))
            B = a.data
            floor = min(B, b.abs_floor())
            vb = b.valuation()
            if vb >= floor:
                return FE(f, BOUND, floor)
            m = f.materialize(b, floor - vb)
            if m.kind != APPROX:
                return FE(f, BOUND, floor)
            v, d, pr = m.data
            return FE(f, APPROX, (v, f._truncate_digits(d, floor - v),
                                  floor - v))
        # at least one APPROX, none BOUND
        if a.kind != APPROX:
            a, b = b, a
        if b.kind != APPROX:
            floor = a.abs_floor()
            vb = b.valuation()
            if vb >= floor:
                return a
            b = f.materialize(b, floor - vb)
            if b.kind != APPROX:
                return a
        return f._approx_add(a, b)

    def __sub__(self, other):
        if self is other:
            return self.field.zero
        return self + other.neg()

    def neg(self):
        f = self.field
        if self.kind == ZERO:
            return self
        if self.kind == SUM:
            return FE(f, SUM, f._raw_neg(self.data))
        if self.kind == FRAC:
            num, den = self.data
            return FE(f, FRAC, (f._raw_neg(num), den))
        if self.kind == APPROX:
            v, d, pr = self.data
            return f._approx_make(
                v, tuple(tuple(-x for x in slot) for slot in d), pr)
        return self

    def __neg__(self):
        return self.neg()

    def __mul__(self, other):
        f = self.field
        a, b = self, other
        if a.kind == ZERO or b.kind == ZERO:
            return f.zero
        if a.kind == SUM and b.kind == SUM:
            return f.sum_from_raw(f._raw_mul(a.data, b.data))
        if a.is_exact() and b.is_exact():
            n1, d1 = a._as_frac()
            n2, d2 = b._as_frac()
            return _frac_make(f, f._raw_mul(n1, n2), f._raw_mul(d1, d2))
        if BOUND in (a.kind, b.kind):
            if a.kind != BOUND:
                a, b = b, a
            if b.kind == BOUND:
                return FE(f, BOUND, a.data + b.data)
            return FE(f, BOUND, a.data + b.valuation())
        if a.kind != APPROX:
            a, b = b, a
        if b.kind != APPROX:
            b = f.materialize(b, a.data[2])
            if b.kind != APPROX:
                return b  # zero
        return f._approx_mul(a, b)

    def __truediv__(self, other):
        f = self.field
        a, b = self, other
        if b.kind == ZERO:
            raise ZeroDivisionError("division by exact zero in E")
        if b.kind == BOUND:
            raise PrecisionError("division by an element of unknown valuation",
                                 trail=("div",))
        if a.kind == ZERO:
            return a
        if a.is_exact() and b.is_exact():
            n1, d1 = a._as_frac()
            n2, d2 = b._as_frac()
            vb = f._raw_val(n2) - f._raw_val(d2)
            shift = self.field.monomial(0, -vb).data
            num = f._raw_mul(n1, f._raw_mul(d2, shift))
            den = f._raw_mul(d1, f._raw_mul(n2, shift))  # unit denominator
            return _frac_make(f, num, den)
        if a.kind == BOUND:
            return FE(f, BOUND, a.data - b.valuation())
        if b.kind != APPROX:
            b = f.materialize(b, a.data[2])
        if a.kind != APPROX:
            a = f.materialize(a, b.data[2])
        return f._approx_div(a, b)

    def __pow__(self, n):
        f = self.field
        if n == 0:
            return f.one
        if n < 0:
            return f.one / (self ** (-n))
        result = f.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, k):
        """Multiply by pi^k (exact)."""
        if self.kind == ZERO:
            return self
        if self.kind == SUM:
            return self.field.sum_from_raw(self.field._raw_shift(self.data, k))
        return self * self.field.monomial(0, k)

    # ------------------------------------------------------ exact helpers

    def _as_frac(self):
        if self.kind == SUM:
            return (self.data, self.field.one.data)
        if self.kind == FRAC:
            return self.data
        raise AssertionError("not an exact nonzero element")

    def residue_unit(self):
        """Residue of self * pi^(-v) in the residue field of E (exact)."""
        f = self.field
        if self.kind == ZERO:
            return f.residue.zero
        m = f.materialize(self, 1)
        if m.kind != APPROX:
            raise PrecisionError("no leading digit available",
                                 trail=("residue_unit",))
        a0 = m.data[1][0]
        packed = 0
        for c in reversed([x % f.p for x in a0]):
            packed = packed * f.p + c
        return f.residue.from_packed(packed)

    def leading_term(self):
        """Exact Teichmueller leading term [res] * pi^v (nonzero input)."""
        v = self.valuation()
        lam = self.residue_unit()
        return self.field.teichmuller(lam).shift(int(v))

    def split_at_zero(self):
        """(integral part, fractional part) of an exact element, both exact.

        The fractional part is the finite tail of Teichmueller digits at
        negative pi-exponents; the loop shortens it by one digit per step.
        """
        assert self.is_exact()
        f = self.field
        frac = f.zero
        rem = self
        while rem.kind != ZERO and rem.valuation() < 0:
            d = rem.leading_term()
            frac = frac + d
            rem = rem - d
        return rem, frac

    # ------------------------------------------------------------ equality

    def __eq__(self, other):
        if not isinstance(other, FE):
            return NotImplemented
        if self.is_exact() and other.is_exact():
            return (self - other).kind == ZERO
        raise PrecisionError("equality comparison on imprecise elements",
                             trail=("eq",))

    def __hash__(self):
        if self.kind == SUM:
            return hash((SUM, self.data))
        if self.kind == ZERO:
            return hash(ZERO)
        raise PrecisionError("hash of a non-canonical element",
                             trail=("hash",))

    # --------------------------------------------------------------- dumps

    def dump(self):
        """Stable, human-readable serialization for golden files."""
        if self.kind == ZERO:
            return "0"
        if self.kind == SUM:
            return " + ".join(f"pi^{k}*p^{s}*{list(vec)}"
                              for k, s, vec in self.data)
        if self.kind == FRAC:
            num, den = self.data
            f = self.field
            return (f"({f.sum_from_raw(num).dump()})/"
                    f"({f.sum_from_raw(den).dump()})")
        if self.kind == APPROX:
            v, d, pr = self.data
            return f"pi^{v}*{[list(x) for x in d]} + O(pi^{v + pr})"
        return f"O(pi^{self.data})"

    def __repr__(self):
        return f"FE<{self.dump()}>"


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _frac_make(field, num_raw, den_raw):
    """FE from raw numerator/denominator slots; canonicalizes the fraction.

    Invariant: den_raw always represents a UNIT (valuation 0); every call
    site divides out the pi-power of the denominator first.  Denominators
    are rationalized to positive integers coprime to p whenever the field
    admits the tower automorphism, which keeps fraction growth linear.
    """
    if not num_raw:
        return field.zero
    if den_raw == field.one.data:
        return FE(field, SUM, num_raw)
    if len(den_raw) == 1:
        k, s, vec = den_raw[0]
        j = field._mono_lookup.get(vec)
        if j is not None:
            inv = field.monomial(-j, -k, -s)
            return FE(field, SUM, field._raw_mul(num_raw, inv.data))
    if not _is_int_den(field, den_raw):
        num_raw, den_raw = field._rationalize_den(num_raw, den_raw)
        if not num_raw:
            return field.zero
        if den_raw == field.one.data:
            return FE(field, SUM, num_raw)
        if _is_int_den(field, den_raw) and den_raw[0][2][0] == 1:
            return FE(field, SUM, num_raw)
    return FE(field, FRAC, (num_raw, den_raw))


def _is_int_den(field, den_raw):
    if len(den_raw) != 1:
        return False
    k, s, vec = den_raw[0]
    return k == 0 and s == 0 and not any(vec[1:])


def valuation(x):
    """Exact normalized valuation of a field element; +inf at zero."""
    return x.valuation()
