"""Finite diagram data for tame representations of GL2 over a division algebra.

A diagram model carries the spaces V0 (invariants under the deeper principal
congruence level) and V1 (invariants under the deeper Iwahori level) of a
representation, as concrete matrices: named generator actions on V0, the
V1 subspace inside V0, and the matrix of the edge-reversing element t on V1.

Matrix convention: vectors are sparse rows, a linear map M sends v to v.M
where row M[i] is the image of the i-th basis vector.  The group acts by
(g.f)(x) = f(xg); with the row convention this makes matrices compose in
*application order*, so the matrix of a product element g1*g2 is
M(g2) . M(g1) (see word_matrix).

The residue group is GL2(F_(q^d)); all generator matrices have exact
entries: Teichmueller units, powers of pi_F = p, and the ramified twist
pi^(-v(det)/4) for the 4-dimensional algebraic factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .errors import ConfigurationError, ModelError
from .lattices import Lattice, Subspace
from .localfield import FE, ZERO
from .residue import MultChar, ResidueField


# ---------------------------------------------------------------------------
# sparse matrix helpers (dict of rows)

def mat_identity(field, n):
    return {i: {i: field.one} for i in range(n)}


def mat_mul(field, A, B):
    """Matrix of 'apply A, then B'."""
    out = {}
    for i, row in A.items():
        acc = {}
        for j, x in row.items():
            if x.kind == ZERO:
                continue
            for k, y in B.get(j, {}).items():
                t = acc.get(k)
                v = x * y
                acc[k] = v if t is None else t + v
        out[i] = {k: v for k, v in acc.items() if v.kind != ZERO}
    return out


def word_matrix(field, mats):
    """Matrix of the product element mats[0] * mats[1] * ... (group order).

    Because (g.f)(x) = f(xg), the product element acts by applying the last
    letter first; with the row convention this is the plain left-to-right
    matrix product of the reversed list.
    """
    acc = None
    for m in reversed(mats):
        acc = m if acc is None else mat_mul(field, acc, m)
    return acc


def mat_scale(field, A, scalar):
    return {i: {j: scalar * x for j, x in row.items()}
            for i, row in A.items()}


def mat_kron(field, A, na, B, nb):
    """Kronecker product on index (i, a) -> i*nb + a."""
    out = {}
    for i, rowa in A.items():
        for a, rowb in B.items():
            row = {}
            for j, x in rowa.items():
                for b, y in rowb.items():
                    row[j * nb + b] = x * y
            out[i * nb + a] = row
    return out


def mat_equal(A, B, n):
    for i in range(n):
        ra, rb = A.get(i, {}), B.get(i, {})
        cols = set(ra) | set(rb)
        for c in cols:
            x = ra.get(c)
            y = rb.get(c)
            if x is None:
                x = y.field.zero
            if y is None:
                y = x.field.zero
            if (x - y).kind != ZERO:
                return False
    return True


def mat_det(field, A, n):
    """Exact determinant by cofactor expansion (small n only)."""
    def minor(rows, cols):
        if len(rows) == 1:
            return A.get(rows[0], {}).get(cols[0], field.zero)
        acc = field.zero
        r = rows[0]
        for idx, c in enumerate(cols):
            x = A.get(r, {}).get(c, field.zero)
            if x.kind == ZERO:
                continue
            sub = minor(rows[1:], cols[:idx] + cols[idx + 1:])
            term = x * sub
            acc = acc + (term if idx % 2 == 0 else term.neg())
        return acc
    return minor(list(range(n)), list(range(n)))


# ---------------------------------------------------------------------------
# residue GL2 helpers

def rmat_mul(a, b):
    return ((a[0][0] * b[0][0] + a[0][1] * b[1][0],
             a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0],
             a[1][0] * b[0][1] + a[1][1] * b[1][1]))


def rmat_inv(m):
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    di = det.inverse()
    return ((m[1][1] * di, (-m[0][1]) * di),
            ((-m[1][0]) * di, m[0][0] * di))


def rmat_det(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def residue_u(Fqd, lam):
    one, zero = Fqd.one, Fqd.zero
    return ((one, lam), (zero, one))


def residue_s(Fqd, s_sign):
    one, zero = Fqd.one, Fqd.zero
    low = one if s_sign == 1 else -one
    return ((zero, one), (low, zero))


def residue_diag(Fqd, a, b):
    zero = Fqd.zero
    return ((a, zero), (zero, b))


def bruhat_factor(Fqd, m, s_sign):
    """Write m = b . r with b upper triangular and r in {1} u {s u_lam}.

    Returns (b, None) for the identity coset and (b, lam) for s u_lam.
    """
    if m[1][0].is_zero():
        return m, None
    lam = m[1][1] / m[1][0]
    s = residue_s(Fqd, s_sign)
    s_inv = rmat_inv(s)
    b = rmat_mul(rmat_mul(m, residue_u(Fqd, -lam)), s_inv)
    assert b[1][0].is_zero(), "Bruhat factorization failed"
    return b, lam


# ---------------------------------------------------------------------------
# tame irreducible representations of the unit group of D

@dataclass(frozen=True)
class TameCharacterData:
    """Parameters of a tame irreducible of D^x of dimension d_prime.

    theta is the residue character on F_(q^d)^x; unif_value is the exact
    scalar by which the d_prime-th power of the uniformizer action is
    multiplication (so the central character at pi_F is
    unif_value^(d/d_prime)).
    """

    d: int
    d_prime: int
    theta: MultChar
    unif_value: FE
    f: int = 1

    def validate(self):
        if self.d % self.d_prime:
            raise ModelError("d_prime must divide d")
        q = self.f and self.theta.field.p**self.f
        if self.theta.field.order != q**self.d:
            raise ModelError(
                f"residue character lives on F_{self.theta.field.order}, "
                f"expected F_{q**self.d}")
        seen = set()
        for i in range(self.d_prime):
            tw = self.theta.frobenius_twist(i, q)
            if tw.k in seen:
                raise ModelError(
                    "Galois conjugates of the residue character collide "
                    f"below d_prime = {self.d_prime}")
            seen.add(tw.k)
        if self.theta.frobenius_twist(self.d_prime, q) != self.theta:
            raise ModelError(
                "residue character is not fixed by the d_prime-th Frobenius "
                "power, so the induced model is not well defined")

    @property
    def q(self):
        return self.theta.field.p**self.f

    @property
    def segment_length(self):
        return self.d // self.d_prime

    def omega_at_pi_F(self):
        """Central character value at pi_F (= unif_value^(d/d_prime))."""
        return self.unif_value ** (self.d // self.d_prime)

    def twist_unramified(self, scalar):
        """Twist by the unramified character sending the uniformizer action
        to scalar times itself (used for |.|^(1/2)-normalizations)."""
        return TameCharacterData(self.d, self.d_prime, self.theta,
                                 self.unif_value * scalar, self.f)


def char_value(field, theta, lam):
    """Character value at a unit residue element, as an exact Teichmueller
    unit of E (zero at the zero element)."""
    if lam.is_zero():
        return field.zero
    exp = theta.exponent_at(lam)
    return field.teichmuller(theta.field.from_log(exp))


class TameIrrep:
    """Generator matrices of a tame irreducible of dimension d_prime."""

    def __init__(self, field, data: TameCharacterData):
        data.validate()
        self.field = field
        self.data = data
        self.dim = data.d_prime
        dp = self.dim
        # uniformizer action: cyclic shift with unif_value at the wrap
        self.mat_unif = {}
        for i in range(dp - 1):
            self.mat_unif[i] = {i + 1: field.one}
        self.mat_unif[dp - 1] = {0: data.unif_value}

    def mat_teich(self, lam):
        """tau([lam]): diagonal with entries theta^(q^i)(lam)."""
        q = self.data.q
        out = {}
        for i in range(self.dim):
            tw = self.data.theta.frobenius_twist(i, q)
            out[i] = {i: char_value(self.field, tw, lam)}
        return out


def build_tame_irrep(field, data: TameCharacterData) -> TameIrrep:
    return TameIrrep(field, data)


# ---------------------------------------------------------------------------
# diagram models

@dataclass
class DiagramModel:
    """V1 -> V0 with named V0 generator actions and the t-action on V1."""

    field: object
    kind: str
    dim_v0: int
    dim_v1: int
    v0_gens: dict
    iwahori_names: tuple
    v1_space: Subspace
    t_matrix: dict
    center_value: FE
    seed_rows: list
    labels_v0: list
    labels_v1: list
    meta: dict = dc_field(default_factory=dict)

    def v1_restriction(self, name):
        """Matrix of a V0 generator restricted to V1 (None if not stable)."""
        rows = {}
        for i, row in enumerate(self.v1_space.rows):
            img = {}
            mat = self.v0_gens[name]
            for c, x in row.items():
                for j, m in mat.get(c, {}).items():
                    t = img.get(j)
                    v = x * m
                    img[j] = v if t is None else t + v
            co = self.v1_space.coordinates(img)
            if co is None:
                return None
            rows[i] = {j: x for j, x in enumerate(co) if x.kind != ZERO}
        return rows


def torus_stable_weights(field, tau1, tau2):
    """Exponent grid of a T0-stable lattice in W1 (x) W2.

    The diagonal uniformizer permutes the basis cyclically along both
    factors, picking up unif_value scalars at the wraps; weights follow each
    orbit so the action maps the lattice onto itself exactly.  The orbit sums
    vanish precisely because the product central character is a unit.
    """
    d1, d2 = tau1.d_prime, tau2.d_prime
    v1 = int(tau1.unif_value.valuation())
    v2 = int(tau2.unif_value.valuation())

    def step(i, j):
        return (v1 if i == d1 - 1 else 0) + (v2 if j == d2 - 1 else 0)

    weights = {}
    for i0 in range(d1):
        for j0 in range(d2):
            if (i0, j0) in weights:
                continue
            i, j, w = i0, j0, 0
            while (i, j) not in weights:
                weights[(i, j)] = w
                w += step(i, j)
                i, j = (i + 1) % d1, (j + 1) % d2
            if (i, j) == (i0, j0) and w != 0:
                raise ModelError(
                    "no torus-stable lattice: orbit scalar is not a unit "
                    "(central character must be a unit)")
    return weights


def build_principal_series_diagram(field, tau1_data, tau2_data, s_sign=1):
    """Fixed-point diagram of the (unnormalized) parabolic induction.

    V0 is the induced module of the residue group on cosets
    {1} u {s u_lam}, tensored with W1 (x) W2; V1 is spanned by the functions
    supported on the two Iwahori-level cosets.
    """
    tau1 = TameIrrep(field, tau1_data)
    tau2 = TameIrrep(field, tau2_data)
    if tau1_data.d != tau2_data.d or tau1_data.f != tau2_data.f:
        raise ModelError("tame parameters live over different groups")
    d, f = tau1_data.d, tau1_data.f
    Fqd = tau1_data.theta.field
    q = tau1_data.q
    qd = Fqd.order
    w1, w2 = tau1.dim, tau2.dim
    w = w1 * w2

    omega = tau1_data.omega_at_pi_F() * tau2_data.omega_at_pi_F()
    if omega.valuation() != 0:
        raise ModelError(
            "central character at pi_F is not a unit; twist the inducing "
            "data first (integral central character is assumed)")

    # cosets: index 0 is the identity coset, then s*u_lam by field order
    lams = Fqd.elements()
    coset_index = {None: 0}
    for idx, lam in enumerate(lams):
        coset_index[lam] = 1 + idx
    n_cos = 1 + qd
    dim_v0 = n_cos * w

    def rep_matrix(key):
        if key is None:
            return residue_diag(Fqd, Fqd.one, Fqd.one)
        return rmat_mul(residue_s(Fqd, s_sign), residue_u(Fqd, key))

    def chi_block(b):
        """chi(b^(-1)) as a w x w matrix over E."""
        alpha, delta = b[0][0], b[1][1]
        m1 = tau1.mat_teich(alpha.inverse())
        m2 = tau2.mat_teich(delta.inverse())
        return mat_kron(field, m1, w1, m2, w2)

    def induced_matrix(g):
        ginv = rmat_inv(g)
        out = {}
        for key, ri in coset_index.items():
            b, key2 = bruhat_factor(Fqd, rmat_mul(rep_matrix(key), ginv),
                                    s_sign)
            blk = chi_block(b)
            r2 = coset_index[key2]
            for a in range(w):
                row = {}
                for a2, x in blk.get(a, {}).items():
                    row[r2 * w + a2] = x
                out[ri * w + a] = row
        return out

    gamma = Fqd.gen()
    gens = {}
    gens["torus_1"] = induced_matrix(residue_diag(Fqd, gamma, Fqd.one))
    gens["torus_2"] = induced_matrix(residue_diag(Fqd, Fqd.one, gamma))
    for idx, lam in enumerate(lams):
        gens[f"unip_{idx}"] = induced_matrix(residue_u(Fqd, lam))
    gens["weyl"] = induced_matrix(residue_s(Fqd, s_sign))

    # phi = diagonal uniformizer: Frobenius permutation of the lam-indices
    # together with the uniformizer action on both tensor factors
    blk_unif = mat_kron(field, tau1.mat_unif, w1, tau2.mat_unif, w2)
    phi = {}
    for key, ri in coset_index.items():
        key2 = key if key is None else key.frobenius(f)
        r2 = coset_index[key2]
        for a in range(w):
            phi[ri * w + a] = {r2 * w + a2: x
                               for a2, x in blk_unif.get(a, {}).items()}
    gens["phi"] = phi

    # V1: f^1 block at the identity coset, f^s = sum over the s-cosets
    v1_rows = []
    labels_v1 = []
    for a in range(w):
        v1_rows.append({a: field.one})
        labels_v1.append(f"f1[{a}]")
    for a in range(w):
        row = {(1 + idx) * w + a: field.one for idx in range(qd)}
        v1_rows.append(row)
        labels_v1.append(f"fs[{a}]")
    v1_space = Subspace(field, dim_v0, v1_rows)

    # t-action on V1 coordinates
    A = tau1.mat_unif  # tau1(varpi_D)
    B = tau2.mat_unif
    AI = mat_kron(field, A, w1, mat_identity(field, w2), w2)
    IB = mat_kron(field, mat_identity(field, w1), w1, B, w2)
    t_matrix = {}
    for a in range(w):
        t_matrix[a] = {w + a2: x for a2, x in AI.get(a, {}).items()}
        t_matrix[w + a] = {a2: x for a2, x in IB.get(a, {}).items()}

    # canonical seed: L0 = induced lattice of the torus-stable weights,
    # L1 = (L0 cap V1) + t (L0 cap V1)
    weights = torus_stable_weights(field, tau1_data, tau2_data)
    wlist = [weights[(i, j)] for i in range(w1) for j in range(w2)]
    l0_exponents = []
    for ci in range(n_cos):
        l0_exponents.extend(wlist)
    L0 = Lattice.standard(field, dim_v0, l0_exponents)
    D = L0.meet_subspace(v1_space)
    seed = D.add(D.apply(t_matrix))

    labels_v0 = []
    for key, ri in sorted(coset_index.items(), key=lambda kv: kv[1]):
        tag = "1" if key is None else f"su[{key.log if key else '0'}]"
        for a in range(w):
            labels_v0.append(f"g^{tag}[{a}]")

    model = DiagramModel(
        field=field,
        kind="principal_series",
        dim_v0=dim_v0,
        dim_v1=2 * w,
        v0_gens=gens,
        iwahori_names=tuple(["torus_1", "torus_2"]
                            + [f"unip_{i}" for i in range(qd)]),
        v1_space=v1_space,
        t_matrix=t_matrix,
        center_value=omega,
        seed_rows=seed.basis_rows(),
        labels_v0=labels_v0,
        labels_v1=labels_v1,
        meta={"d": d, "f": f, "q": q, "w": w,
              "omega1_val": int(tau1_data.omega_at_pi_F().valuation()),
              "omega2_val": int(tau2_data.omega_at_pi_F().valuation())},
    )
    return model


def build_speh_diagram(field, theta_data: TameCharacterData, nu=None,
                       epsilon=None, center_value=None, s_sign=-1):
    """Fixed-point diagram of the quaternionic Speh representation.

    V0 = (theta o det) + (theta^q o det) + Ind_I^K(theta (x) theta^q), with
    basis e1, e2, the coset functions of the induced block, and e0 last.
    The diagonal-uniformizer action phi satisfies phi(e1) = e2,
    phi(e2) = center * e1, phi(e0) = epsilon * pi^nu * f0, extended
    Frobenius-equivariantly over the coset block.
    """
    theta_data.validate()
    if theta_data.d != 2 or theta_data.d_prime != 2:
        raise ModelError("the Speh diagram needs d = 2 and d_prime = 2")
    if theta_data.omega_at_pi_F().valuation() != 0:
        raise ModelError("Speh model needs a unit central value; twist theta")
    f = theta_data.f
    nu_expected = -field.e * f  # v(q) = e*f and the t^2-scalar forces nu = -v(q)
    if nu is None:
        nu = nu_expected
    if nu != nu_expected:
        raise ModelError(
            f"inconsistent nu: the induced block forces nu = -v(q) = "
            f"{nu_expected}, got {nu}")
    if center_value is None:
        center_value = field.one
    if center_value.valuation() != 0:
        raise ModelError("center_value must be a unit")
    # phi^2 = center_value on the induced block forces eps^2 = center_value
    # (the unit part of q^2 = c^(2f) p^(2f) is 1)
    if epsilon is None:
        if (center_value - field.one).kind == ZERO:
            epsilon = field.one
        else:
            raise ModelError(
                "provide epsilon explicitly for a non-trivial center_value")
    if ((epsilon * epsilon) - center_value).kind != ZERO:
        raise ModelError(
            "epsilon^2 must equal center_value for phi^2 to act correctly "
            "on the induced block")

    Fqd = theta_data.theta.field
    q = theta_data.q
    qd = Fqd.order  # q^2
    theta = theta_data.theta
    theta_q = theta.frobenius_twist(1, q)

    lams = Fqd.elements()
    n_cos = qd + 1
    dim_v0 = 2 + n_cos
    # basis order: e1, e2, coset functions b_(s u_lam) (lam in field order),
    # then e0 = b_1 last
    _blk = {lam: 2 + i for i, lam in enumerate(lams)}

    def blk_index(key):
        if key is None:
            return dim_v0 - 1
        return _blk[key]

    def rep_matrix(key):
        if key is None:
            return residue_diag(Fqd, Fqd.one, Fqd.one)
        return rmat_mul(residue_s(Fqd, s_sign), residue_u(Fqd, key))

    def chi_scalar(b):
        """(theta (x) theta^q)(b^(-1)) for upper triangular b."""
        alpha, delta = b[0][0], b[1][1]
        return (char_value(field, theta, alpha.inverse())
                * char_value(field, theta_q, delta.inverse()))

    def induced_matrix(g):
        """Action on the coset block alone, as a dict over block indices."""
        ginv = rmat_inv(g)
        out = {}
        keys = [None] + list(lams)
        for key in keys:
            b, key2 = bruhat_factor(Fqd, rmat_mul(rep_matrix(key), ginv),
                                    s_sign)
            out[blk_index(key)] = {blk_index(key2): chi_scalar(b)}
        return out

    def full_matrix(g):
        """V0 action of a residue-group element g."""
        det = rmat_det(g)
        out = {0: {0: char_value(field, theta, det)},
               1: {1: char_value(field, theta_q, det)}}
        out.update(induced_matrix(g))
        return out

    gamma = Fqd.gen()
    gens = {}
    gens["torus_1"] = full_matrix(residue_diag(Fqd, gamma, Fqd.one))
    gens["torus_2"] = full_matrix(residue_diag(Fqd, Fqd.one, gamma))
    for idx, lam in enumerate(lams):
        gens[f"unip_{idx}"] = full_matrix(residue_u(Fqd, lam))
    gens["weyl"] = full_matrix(residue_s(Fqd, s_sign))

    # phi: e1 -> e2 -> center*e1; phi(e0) = eps pi^nu f0, extended by
    # phi(b_(s u_lam)) = rho(u_((-lam)^q) s) phi(e0)
    eps_pi_nu = epsilon * field.monomial(0, nu)
    f0_row = {blk_index(lam): field.one for lam in lams}
    phi = {0: {1: field.one}, 1: {0: center_value}}
    phi[blk_index(None)] = {j: eps_pi_nu * x for j, x in f0_row.items()}
    for lam in lams:
        x = -lam
        gmat = rmat_mul(residue_u(Fqd, x.frobenius(f)), residue_s(Fqd, s_sign))
        act = induced_matrix(gmat)
        img = {}
        for j, coeff in f0_row.items():
            for k, y in act.get(j, {}).items():
                t = img.get(k)
                v = coeff * y
                img[k] = v if t is None else t + v
        phi[blk_index(lam)] = {k: eps_pi_nu * v for k, v in img.items()
                               if v.kind != ZERO}
    gens["phi"] = phi

    # V1 = span(e1, e2, e0, f0)
    v1_rows = [{0: field.one}, {1: field.one},
               {blk_index(None): field.one}, dict(f0_row)]
    labels_v1 = ["e1", "e2", "e0", "f0"]
    v1_space = Subspace(field, dim_v0, v1_rows)

    # t on V1: e1 -> e0, e0 -> e2, e2 -> eps pi^nu f0,
    # f0 -> eps^(-1) pi^(-nu) center e1
    t_matrix = {
        0: {2: field.one},
        2: {1: field.one},
        1: {3: eps_pi_nu},
        3: {0: (field.one / epsilon) * field.monomial(0, -nu) * center_value},
    }

    seed_rows = [{0: field.one}, {1: field.one}, {2: field.one},
                 {3: field.monomial(0, nu)}]

    labels_v0 = ["e1", "e2"] + [f"uxs.e0[{lam.log}]" for lam in lams] + ["e0"]

    return DiagramModel(
        field=field,
        kind="speh",
        dim_v0=dim_v0,
        dim_v1=4,
        v0_gens=gens,
        iwahori_names=tuple(["torus_1", "torus_2"]
                            + [f"unip_{i}" for i in range(qd)]),
        v1_space=v1_space,
        t_matrix=t_matrix,
        center_value=center_value,
        seed_rows=seed_rows,
        labels_v0=labels_v0,
        labels_v1=labels_v1,
        meta={"d": 2, "f": f, "q": q, "nu": nu,
              "omega_val": int(theta_data.omega_at_pi_F().valuation())},
    )


# ---------------------------------------------------------------------------
# the 4-dimensional algebraic factor (quaternionic case)

def build_sym1_algebraic(field, theta_field, f):
    """Matrices of Sym^1 E^4 twisted by det^(-1/4) on all model generators.

    The embedding of the quaternion algebra sends alpha + beta*varpi_D to
    the 2x2 matrix ((alpha, beta*pi_F), (sigma(beta), sigma(alpha))) over the
    quadratic unramified extension; GL2(D) lands in GL4.  The determinant
    twist is realized as pi^(-v(det)/4) with unit part 1, which changes
    nothing at the level of lattices.

    Returns (matrices, k1_names): matrices maps every smooth generator name
    plus "t" and the K(1) topological generator names to a 4x4 matrix.
    """
    if field.e % 4:
        raise ConfigurationError(
            "the det^(-1/4) twist needs 4 | e; enlarge the field")
    Fq2 = theta_field
    q = Fq2.p**f
    if Fq2.order != q * q:
        raise ConfigurationError("algebraic factor expects F_(q^2)")
    one, zero = field.one, field.zero
    pi_F = field.p_elem

    def tei(lam):
        return field.teichmuller(lam)

    def iota_pair(alpha, beta):
        """2x2 block of alpha + beta*varpi_D (alpha, beta residue elements)."""
        return [[tei(alpha), tei(beta) * pi_F],
                [tei(beta.frobenius(f)), tei(alpha.frobenius(f))]]

    def from_blocks(b11, b12, b21, b22):
        """Row-convention matrix of the column-acting block matrix.

        The embedding produces matrices that act on column vectors; the row
        convention used everywhere else is the transpose, under which group
        words anti-compose exactly like the smooth action matrices.
        """
        blocks = [[b11, b12], [b21, b22]]
        out = {i: {} for i in range(4)}
        for bi in range(2):
            for i in range(2):
                for bj in range(2):
                    blk = blocks[bi][bj]
                    for j in range(2):
                        x = blk[i][j]
                        if x.kind != ZERO:
                            out[2 * bj + j][2 * bi + i] = x
        return out

    def twisted(mat):
        det = mat_det(field, mat, 4)
        v = det.valuation()
        assert v % 4 == 0, "determinant valuation not divisible by 4"
        if v == 0:
            return mat
        return mat_scale(field, mat, field.monomial(0, -v // 4))

    gamma = Fq2.gen()
    I2 = [[one, zero], [zero, one]]
    negI2 = [[one.neg(), zero], [zero, one.neg()]]
    Z2 = [[zero, zero], [zero, zero]]
    iota_pi_D = [[zero, pi_F], [one, zero]]

    mats = {}
    mats["torus_1"] = twisted(from_blocks(iota_pair(gamma, Fq2.zero), Z2,
                                          Z2, I2))
    mats["torus_2"] = twisted(from_blocks(I2, Z2, Z2,
                                          iota_pair(gamma, Fq2.zero)))
    lams = Fq2.elements()
    for idx, lam in enumerate(lams):
        mats[f"unip_{idx}"] = twisted(from_blocks(
            I2, iota_pair(lam, Fq2.zero), Z2, I2))
    mats["weyl"] = twisted(from_blocks(Z2, I2, negI2, Z2))
    mats["phi"] = twisted(from_blocks(iota_pi_D, Z2, Z2, iota_pi_D))
    mats["t"] = twisted(from_blocks(Z2, I2, iota_pi_D, Z2))

    # K(1) topological generators: 1 + varpi_D [x] E_(ij) for x over an
    # F_p-basis of the residue field of D (elementary and diagonal ones)
    k1_names = []
    basis = [gamma**k for k in range(Fq2.m)]
    positions = {"12": (0, 1), "21": (1, 0), "11": (0, 0), "22": (1, 1)}
    for pos, (bi, bj) in positions.items():
        for k, x in enumerate(basis):
            # varpi_D [x] = [x^q] varpi_D, i.e. the pair (alpha, beta) = (0, x^q)
            blk = iota_pair(Fq2.zero, x.frobenius(f))
            blocks = [[[[one, zero], [zero, one]], [[zero, zero], [zero, zero]]],
                      [[[zero, zero], [zero, zero]], [[one, zero], [zero, one]]]]
            tgt = blocks[bi][bj]
            for i in range(2):
                for j in range(2):
                    tgt[i][j] = tgt[i][j] + blk[i][j]
            name = f"k1_{pos}_{k}"
            mats[name] = twisted(from_blocks(blocks[0][0], blocks[0][1],
                                             blocks[1][0], blocks[1][1]))
            k1_names.append(name)
    return mats, k1_names


def trivial_algebraic(field, smooth_model):
    """Rank-1 algebraic factor: every generator and t act by 1."""
    mats = {name: mat_identity(field, 1) for name in smooth_model.v0_gens}
    mats["t"] = mat_identity(field, 1)
    return mats, []


def tensor_diagram(smooth: DiagramModel, alg_mats, k1_names, dim_alg,
                   alg_labels=None):
    """Tensor a smooth diagram with an algebraic factor.

    Smooth generators become Kronecker products; K(1) generators act as
    identity on the smooth factor.  V1 is (smooth V1) (x) (full algebraic
    space) and t is the Kronecker product of the two t-actions.
    """
    field = smooth.field
    n0 = smooth.dim_v0
    gens = {}
    for name, m in smooth.v0_gens.items():
        if name not in alg_mats:
            raise ModelError(f"algebraic factor misses generator {name}")
        gens[name] = mat_kron(field, m, n0, alg_mats[name], dim_alg)
    ident = mat_identity(field, n0)
    for name in k1_names:
        gens[name] = mat_kron(field, ident, n0, alg_mats[name], dim_alg)

    v1_rows = []
    labels_v1 = []
    if alg_labels is None:
        alg_labels = [f"w{a}" for a in range(dim_alg)]
    for i, row in enumerate(smooth.v1_space.rows):
        for a in range(dim_alg):
            v1_rows.append({c * dim_alg + a: x for c, x in row.items()})
            labels_v1.append(f"{smooth.labels_v1[i]}*{alg_labels[a]}")
    v1_space = Subspace(field, n0 * dim_alg, v1_rows)

    t_matrix = mat_kron(field, smooth.t_matrix, smooth.dim_v1,
                        alg_mats["t"], dim_alg)

    # seed: smooth seed (x) M1 with M1 = (M0 + t M0) + t^2 (M0 + t M0)
    t_alg = alg_mats["t"]
    M0 = Lattice.standard(field, dim_alg)
    S = M0.add(M0.apply(t_alg))
    t2 = mat_mul(field, t_alg, t_alg)
    M1 = S.add(S.apply(t2))
    seed_rows = []
    for srow in smooth.seed_rows:
        for arow in M1.basis_rows():
            row = {}
            for c, x in srow.items():
                for a, y in arow.items():
                    row[c * dim_alg + a] = x * y
            seed_rows.append(row)

    labels_v0 = [f"{l0}*{al}" for l0 in smooth.labels_v0
                 for al in alg_labels]

    meta = dict(smooth.meta)
    meta["algebraic_dim"] = dim_alg
    meta["m1_pivot_vals"] = list(M1.pivot_vals)

    return DiagramModel(
        field=field,
        kind=smooth.kind + "_tensor",
        dim_v0=n0 * dim_alg,
        dim_v1=smooth.dim_v1 * dim_alg,
        v0_gens=gens,
        iwahori_names=tuple(list(smooth.iwahori_names) + list(k1_names)),
        v1_space=v1_space,
        t_matrix=t_matrix,
        center_value=smooth.center_value,
        seed_rows=seed_rows,
        labels_v0=labels_v0,
        labels_v1=labels_v1,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# dimension formulas

def dimension_report(kind, d, d_prime, q):
    """(dim of Iwahori-level invariants, dim of congruence-level invariants).

    kind is "St" or "Sp"; q is the residue field size of the base and the
    division algebra has index d, so the residue field of D has q^d
    elements.
    """
    if d % d_prime:
        raise ModelError("d_prime must divide d")
    qd = q**d
    dim_i1 = d_prime * d_prime
    pairs = (d_prime * d_prime - d_prime) * (qd + 1) // 2
    if kind == "St":
        dim_k1 = pairs + d_prime * qd
    elif kind == "Sp":
        dim_k1 = pairs + d_prime
    else:
        raise ModelError(f"unknown kind {kind!r}")
    return dim_i1, dim_k1
