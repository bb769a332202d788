"""Finite fields F_{p^m}, multiplicative characters, and exact cyclotomic arithmetic.

Residue fields are realized with Zech-logarithm tables over a canonically
chosen primitive polynomial, so every nonzero element is a power of a fixed
generator gamma.  Characters are stored as exponents against gamma.

The Fourier toolkit works in the exact ring Z[x]/Phi_M(x) with
M = p*(q - 1) for a field of order q: it contains a primitive p-th root of
unity (for the additive character eta) and a primitive (q-1)-th root (for the
multiplicative characters), and equality is decidable, so the transform
identities are verified exactly rather than numerically.
"""

from __future__ import annotations

import itertools

from .errors import ConfigurationError


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# integer polynomial helpers (coefficient lists, low degree first)

def _poly_trim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_trim(out)


def _poly_divexact(num, den):
    """Exact division of integer polynomials (monic-ish denominator)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1]
        assert c % den[-1] == 0
        q = c // den[-1]
        out[k] = q
        if q:
            for j, dj in enumerate(den):
                num[k + j] -= q * dj
    assert all(v == 0 for v in num)
    return out


def cyclotomic_polynomial(m):
    """Coefficients of Phi_m(x), low degree first."""
    if m == 1:
        return [-1, 1]
    poly = [-1] + [0] * (m - 1) + [1]           # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_divexact(poly, cyclotomic_polynomial_cached(d))
    return poly


_CYCLO_CACHE = {}


def cyclotomic_polynomial_cached(m):
    if m not in _CYCLO_CACHE:
        _CYCLO_CACHE[m] = cyclotomic_polynomial(m)
    return _CYCLO_CACHE[m]


# ---------------------------------------------------------------------------
# residue fields

def _fp_poly_mulmod(a, b, poly, p):
    """Multiply packed-coefficient-tuple polynomials modulo (poly, p)."""
    m = len(poly) - 1
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    # reduce degree >= m using x^m = -(poly[:-1])
    for k in range(len(out) - 1, m - 1, -1):
        c = out[k]
        if c:
            out[k] = 0
            for j in range(m):
                out[k - m + j] = (out[k - m + j] - c * poly[j]) % p
    out = out[:m] + [0] * (m - len(out))
    return tuple(out[:m])


def _search_primitive_polynomial(p, m):
    """Least monic degree-m polynomial over F_p whose class of x is primitive.

    Primitivity of x (order exactly p^m - 1) forces irreducibility, so a
    single order computation is enough.
    """
    if m == 1:
        for g in range(2, p):
            # g primitive root mod p
            n, seen = g, 1
            while n != 1:
                n = (n * g) % p
                seen += 1
            if seen == p - 1:
                return (p - g, 1)  # x - g, stored monic as coefficients
        raise ConfigurationError(f"no primitive root mod {p}")
    order = p**m - 1
    for tail in itertools.product(range(p), repeat=m):
        if tail[0] == 0:
            continue  # x would divide the polynomial
        poly = list(tail) + [1]
        x = tuple([0, 1] + [0] * (m - 2))
        acc = x
        k = 1
        ok = True
        one = tuple([1] + [0] * (m - 1))
        while acc != one:
            acc = _fp_poly_mulmod(acc, x, poly, p)
            k += 1
            if k > order:
                ok = False
                break
        if ok and k == order:
            return tuple(poly)
    raise ConfigurationError(f"no primitive polynomial found for p={p}, m={m}")


_FIELD_CACHE = {}


class ResidueField:
    """F_{p^m} with Zech-log arithmetic against a fixed generator.

    Elements are `FFElem` instances holding either None (zero) or the
    discrete log against the generator gamma (= class of x of the defining
    primitive polynomial).
    """

    def __new__(cls, p, m):
        key = (p, m)
        if key in _FIELD_CACHE:
            return _FIELD_CACHE[key]
        self = super().__new__(cls)
        self._init(p, m)
        _FIELD_CACHE[key] = self
        return self

    def _init(self, p, m):
        if not is_prime(p):
            raise ConfigurationError(f"p = {p} is not prime")
        if m < 1:
            raise ConfigurationError("field degree must be positive")
        self.p = p
        self.m = m
        self.order = p**m
        self.poly = _search_primitive_polynomial(p, m)
        # exp table: gamma^k as packed base-p integer
        exp = []
        cur = tuple([1] + [0] * (m - 1))
        x = tuple([0, 1] + [0] * (m - 2)) if m > 1 else ((p - self.poly[0]) % p,)
        for _ in range(self.order - 1):
            exp.append(self._pack(cur))
            cur = _fp_poly_mulmod(cur, x, self.poly, p) if m > 1 else (
                (cur[0] * x[0]) % p,)
        self._exp = exp
        self._log = {v: k for k, v in enumerate(exp)}
        # zech[k] = log(gamma^k + 1), None when gamma^k = -1
        one = exp[0]
        zech = []
        for k in range(self.order - 1):
            s = self._packed_add(self._exp[k], one)
            zech.append(self._log.get(s))
        self._zech = zech
        self.zero = FFElem(self, None)
        self.one = FFElem(self, 0)

    def _pack(self, coeffs):
        v = 0
        for c in reversed(coeffs):
            v = v * self.p + c
        return v

    def _packed_add(self, a, b):
        v, mul = 0, 1
        for _ in range(self.m):
            v += ((a + b) % self.p) * mul
            a //= self.p
            b //= self.p
            mul *= self.p
        return v

    def gen(self):
        return FFElem(self, 1 % (self.order - 1))

    def from_log(self, k):
        return FFElem(self, None if k is None else k % (self.order - 1))

    def from_packed(self, v):
        if v == 0:
            return self.zero
        return FFElem(self, self._log[v])

    def from_int(self, n):
        """Image of the rational integer n under Z -> F_{p^m}."""
        return self.from_packed(n % self.p)

    def elements(self):
        """All field elements: zero followed by the powers of gamma."""
        return [self.zero] + [FFElem(self, k) for k in range(self.order - 1)]

    def units(self):
        return [FFElem(self, k) for k in range(self.order - 1)]

    def embedding_exponent(self, big):
        """Least i such that gamma |-> Gamma^(scale*i) embeds self into big.

        Picks the canonical root of self's defining polynomial among the
        subfield generators of `big`, so the map preserves addition.
        """
        if big.p != self.p or big.m % self.m != 0:
            raise ConfigurationError(
                f"F_{self.p}^{self.m} does not embed into F_{big.p}^{big.m}")
        if big is self:
            return 1
        scale = (big.order - 1) // (self.order - 1)
        for i in range(1, self.order):
            cand = FFElem(big, (scale * i) % (big.order - 1))
            acc = big.zero
            power = big.one
            for c in self.poly:
                acc = acc + power * c
                power = power * cand
            if acc.is_zero():
                return i
        raise ConfigurationError("no embedding root found")  # unreachable

    def __repr__(self):
        return f"ResidueField({self.p}^{self.m})"


class FFElem:
    """Element of a ResidueField in discrete-log form."""

    __slots__ = ("field", "log")

    def __init__(self, field, log):
        self.field = field
        self.log = log

    def is_zero(self):
        return self.log is None

    def __bool__(self):
        return self.log is not None

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.from_int(other)
        return self.field is other.field and self.log == other.log

    def __hash__(self):
        return hash((id(self.field), self.log))

    def __mul__(self, other):
        if isinstance(other, int):
            other = self.field.from_int(other)
        if self.log is None or other.log is None:
            return self.field.zero
        return FFElem(self.field, (self.log + other.log) % (self.field.order - 1))

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, int):
            other = self.field.from_int(other)
        if self.log is None:
            return other
        if other.log is None:
            return self
        f = self.field
        # gamma^i + gamma^j = gamma^j (gamma^(i-j) + 1)
        d = (self.log - other.log) % (f.order - 1)
        z = f._zech[d]
        if z is None:
            return f.zero
        return FFElem(f, (other.log + z) % (f.order - 1))

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        if self.log is None:
            return self
        if f.p == 2:
            return self
        half = (f.order - 1) // 2
        return FFElem(f, (self.log + half) % (f.order - 1))

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.field.from_int(other)
        return self + (-other)

    def inverse(self):
        if self.log is None:
            raise ZeroDivisionError("inverse of zero residue element")
        return FFElem(self.field, (-self.log) % (self.field.order - 1))

    def __truediv__(self, other):
        if isinstance(other, int):
            other = self.field.from_int(other)
        return self * other.inverse()

    def __pow__(self, n):
        if self.log is None:
            if n == 0:
                return self.field.one
            return self
        return FFElem(self.field, (self.log * n) % (self.field.order - 1))

    def frobenius(self, i=1):
        """x |-> x^(p^i)."""
        return self ** (self.field.p**i)

    def trace_to_prime(self):
        """Trace to F_p, returned as an int in [0, p)."""
        f = self.field
        acc = f.zero
        cur = self
        for _ in range(f.m):
            acc = acc + cur
            cur = cur.frobenius()
        if acc.is_zero():
            return 0
        packed = f._exp[acc.log]
        assert packed < f.p, "trace left the prime field"
        return packed

    def norm_to_prime(self):
        """Norm to F_p, returned as FFElem of the same field."""
        f = self.field
        if self.log is None:
            return f.zero
        e = sum(f.p**i for i in range(f.m))
        return self ** e

    def embed(self, big, exponent=None):
        """Image in the bigger field under the canonical embedding."""
        if big is self.field:
            return self
        if exponent is None:
            exponent = self.field.embedding_exponent(big)
        if self.log is None:
            return big.zero
        scale = (big.order - 1) // (self.field.order - 1)
        return FFElem(big, (scale * exponent * self.log) % (big.order - 1))

    def __repr__(self):
        if self.log is None:
            return "FF(0)"
        return f"FF(g^{self.log})"


# ---------------------------------------------------------------------------
# multiplicative characters

class MultChar:
    """Character of F_{p^m}^x determined by an exponent k: gamma^j |-> zeta^(k j).

    The abstract value group is the cyclic group of order p^m - 1; consumers
    map exponents either to Teichmueller units in a local field or to
    cyclotomic integers in the Fourier toolkit.
    """

    __slots__ = ("field", "k")

    def __init__(self, field, k):
        self.field = field
        self.k = k % (field.order - 1)

    def __eq__(self, other):
        return self.field is other.field and self.k == other.k

    def __hash__(self):
        return hash((id(self.field), self.k))

    def is_trivial(self):
        return self.k == 0

    def frobenius_twist(self, i, q=None):
        """Theta |-> Theta^(q^i); q defaults to the prime p."""
        if q is None:
            q = self.field.p
        return MultChar(self.field, (self.k * pow(q, i, self.field.order - 1))
                        % (self.field.order - 1))

    def __mul__(self, other):
        assert self.field is other.field
        return MultChar(self.field, self.k + other.k)

    def inverse(self):
        return MultChar(self.field, -self.k)

    def exponent_at(self, x):
        """Exponent j with value zeta^j, or None at zero."""
        if x.is_zero():
            return None
        return (self.k * x.log) % (self.field.order - 1)

    def __repr__(self):
        return f"MultChar(F_{self.field.p}^{self.field.m}, k={self.k})"


# ---------------------------------------------------------------------------
# exact cyclotomic ring Z[x]/Phi_M(x)

class CyclotomicRing:
    """The ring Z[zeta_M] with exact integer-vector arithmetic."""

    def __new__(cls, M):
        key = ("ring", M)
        if key in _FIELD_CACHE:
            return _FIELD_CACHE[key]
        self = super().__new__(cls)
        self._init(M)
        _FIELD_CACHE[key] = self
        return self

    def _init(self, M):
        self.M = M
        phi = cyclotomic_polynomial_cached(M)
        self.degree = len(phi) - 1
        self._xn = tuple(-c for c in phi[:-1])  # x^degree mod Phi
        # zeta^j for j in [0, M)
        pows = []
        cur = [1] + [0] * (self.degree - 1)
        for j in range(M):
            pows.append(tuple(cur))
            cur = self._reduce([0] + cur)
        self._zeta = pows
        self.zero = CycInt(self, (0,) * self.degree)
        self.one = CycInt(self, tuple([1] + [0] * (self.degree - 1)))

    def _reduce(self, coeffs):
        coeffs = list(coeffs) + [0] * max(0, self.degree - len(coeffs))
        for t in range(len(coeffs) - 1, self.degree - 1, -1):
            c = coeffs[t]
            if c:
                coeffs[t] = 0
                for i, ri in enumerate(self._xn):
                    coeffs[t - self.degree + i] += c * ri
        return coeffs[:self.degree]

    def zeta_pow(self, j):
        """zeta_M^j as a ring element (exact)."""
        return CycInt(self, self._zeta[j % self.M])

    def from_int(self, n):
        return CycInt(self, tuple([n] + [0] * (self.degree - 1)))

    def __repr__(self):
        return f"CyclotomicRing(M={self.M})"


class CycInt:
    """Element of Z[zeta_M], stored as a coefficient tuple mod Phi_M."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs):
        self.ring = ring
        self.coeffs = tuple(coeffs)

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return self.ring is other.ring and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.ring), self.coeffs))

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return CycInt(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return CycInt(self.ring, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return CycInt(self.ring, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            return CycInt(self.ring, tuple(a * other for a in self.coeffs))
        prod = [0] * (2 * self.ring.degree - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        return CycInt(self.ring, tuple(self.ring._reduce(prod)))

    __rmul__ = __mul__

    def divexact_int(self, n):
        assert all(c % n == 0 for c in self.coeffs)
        return CycInt(self.ring, tuple(c // n for c in self.coeffs))

    def __repr__(self):
        return f"CycInt{self.coeffs}"


# ---------------------------------------------------------------------------
# exact Fourier toolkit on F_{p^m}
#
# Functions on the field are dicts elem -> CycInt, total on all elements.

def fourier_ring(field):
    """Z[zeta_M] with M = p*(order-1): holds eta- and character values."""
    return CyclotomicRing(field.p * (field.order - 1))


def additive_character(field, ring):
    """eta(x) = zeta_p^(Tr(x)) as a dict elem -> CycInt."""
    q1 = field.order - 1
    return {x: ring.zeta_pow(q1 * x.trace_to_prime()) for x in field.elements()}


def char_function(chi, ring):
    """chi extended by 0 at 0, valued in mu_(q-1) inside the ring."""
    p = chi.field.p
    out = {chi.field.zero: ring.zero}
    for x in chi.field.units():
        out[x] = ring.zeta_pow(p * chi.exponent_at(x))
    return out


def delta_at_zero(field, ring):
    out = {x: ring.zero for x in field.elements()}
    out[field.zero] = ring.one
    return out


def const_one(field, ring):
    return {x: ring.one for x in field.elements()}


def fourier(f, field, ring):
    """fhat(x) = sum_y eta(x*y) f(y), computed exactly."""
    eta = additive_character(field, ring)
    out = {}
    for x in field.elements():
        acc = ring.zero
        for y, fy in f.items():
            if not fy.is_zero():
                acc = acc + eta[x * y] * fy
        out[x] = acc
    return out


def convolve(f, g, field):
    """(f*g)(x) = sum_(y+z=x) f(y) g(z)."""
    some = next(iter(f.values()))
    ring = some.ring
    out = {x: ring.zero for x in field.elements()}
    for y, fy in f.items():
        if fy.is_zero():
            continue
        for z, gz in g.items():
            if gz.is_zero():
                continue
            x = y + z
            out[x] = out[x] + fy * gz
    return out


def pointwise_mul(f, g, field):
    return {x: f[x] * g[x] for x in field.elements()}


def func_scale(f, c, field):
    return {x: f[x] * c for x in field.elements()}


def func_sub(f, g, field):
    return {x: f[x] - g[x] for x in field.elements()}


def func_equal(f, g, field):
    return all((f[x] - g[x]).is_zero() for x in field.elements())
