"""The integrality decision engine: zig-zag iteration of stable lattices.

Starting from a t- and Iwahori-stable lattice L in V1, iterate

    L  |->  (closure(L) meet V1)  +  t (closure(L) meet V1)

where closure(L) is the smallest lattice of V0 containing L and stable under
every V0 generator.  The sequence is increasing; the run reports

* Stabilized(i)        -- L^(i) = L^(i-1): the representation carries an
                          invariant lattice (the sequence is then constant,
                          which the engine re-checks for two extra steps);
* DivergedPeriodic     -- L^(i) = pi^j L^(i0) with j < 0: the increasing
                          sequence revisits a homothety class, hence is
                          unbounded and no invariant lattice exists;
* Inconclusive         -- neither certificate appeared within max_iter.

The verdict is compared against the closed-form exponent predicate by the
callers (truth-table experiments).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

from .errors import ClosureError, ModelError, PredicateError
from .lattices import Lattice, _Echelon
from .localfield import ZERO


# ---------------------------------------------------------------------------
# verdicts and traces

@dataclass(frozen=True)
class Stabilized:
    at_iteration: int

    def as_dict(self):
        return {"verdict": "stabilized", "at_iteration": self.at_iteration}


@dataclass(frozen=True)
class DivergedPeriodic:
    recurrence_from: int
    recurrence_at: int
    shift: int  # j < 0 with L^(at) = pi^j L^(from)

    def as_dict(self):
        return {"verdict": "diverged_periodic",
                "recurrence_from": self.recurrence_from,
                "recurrence_at": self.recurrence_at,
                "shift": self.shift}


@dataclass(frozen=True)
class Inconclusive:
    max_iterations: int

    def as_dict(self):
        return {"verdict": "inconclusive",
                "max_iterations": self.max_iterations}


@dataclass
class IterationRecord:
    index: int
    pivot_vals: tuple
    index_from_seed: int
    wall_ms: float

    def as_dict(self):
        return {"iteration": self.index,
                "pivot_valuations": list(self.pivot_vals),
                "index_from_seed": self.index_from_seed,
                "wall_ms": round(self.wall_ms, 3)}


@dataclass
class ZigZagTrace:
    records: list
    verdict: object
    closure_growth: int = 0
    final_dump: dict = dc_field(default_factory=dict)

    def as_dict(self):
        return {"iterations": [r.as_dict() for r in self.records],
                "closure_growth_events": self.closure_growth,
                **self.verdict.as_dict()}

    def is_stabilized(self):
        return isinstance(self.verdict, Stabilized)


# ---------------------------------------------------------------------------
# seed construction and validation

def _apply_row(row, mat, field):
    img = {}
    for c, x in row.items():
        for j, m in mat.get(c, {}).items():
            t = img.get(j)
            v = x * m
            img[j] = v if t is None else t + v
    return {j: v for j, v in img.items() if v.kind != ZERO}


def _v1_restrictions(model):
    cache = model.meta.get("_v1_restrictions")
    if cache is None:
        cache = {}
        for name in model.iwahori_names:
            r = model.v1_restriction(name)
            if r is None:
                raise ModelError(
                    f"V1 is not stable under generator {name}")
            cache[name] = r
        model.meta["_v1_restrictions"] = cache
    return cache


def seed_lattice(model, scale=0, extra_rows=()):
    """The model's canonical stable lattice of V1, validated.

    The seed must be stable under t and under the Iwahori-level generators;
    both properties are asserted here (a non-stable seed is a model error).
    scale shifts the whole seed by pi^scale; extra_rows join the generators
    (both are used by the invariance experiments).
    """
    field = model.field
    rows = [dict(r) for r in model.seed_rows]
    rows.extend(extra_rows)
    L = Lattice.from_generators(field, model.dim_v1, rows)
    if scale:
        L = L.scale(scale)
    if not L.is_full_rank():
        raise ModelError("seed lattice does not span V1")
    if not L.add(L.apply(model.t_matrix)).equal(L):
        raise ModelError("seed lattice is not t-stable")
    for name, restr in _v1_restrictions(model).items():
        if not L.add(L.apply(restr)).equal(L):
            raise ModelError(f"seed lattice is not stable under {name}")
    return L


# ---------------------------------------------------------------------------
# closure and the zig-zag step

def k0_closure(model, start_rows, growth_cap=1024, verify=False):
    """Least lattice of V0 containing the rows and stable under all
    generators (worklist saturation; terminates because the orbit of a
    lattice under the compact group with unit central action is bounded)."""
    field = model.field
    ech = _Echelon(field, model.dim_v0)
    queue = []
    growth = 0
    for r in start_rows:
        if ech.insert(dict(r)):
            queue.append(dict(r))
    mats = list(model.v0_gens.values())
    while queue:
        v = queue.pop()
        for mat in mats:
            img = _apply_row(v, mat, field)
            if not img:
                continue
            if ech.insert(dict(img)):
                growth += 1
                if growth > growth_cap:
                    raise ClosureError(
                        f"closure exceeded {growth_cap} growth events "
                        "(non-unit center or inconsistent model?)")
                queue.append(img)
    lat = ech.to_lattice()
    if verify:
        for mat in mats:
            for row in lat.rows:
                if not lat.member(_apply_row(row, mat, field)):
                    raise ClosureError("closure verification failed")
    return lat, growth


def zigzag_step(model, L1, growth_cap=1024):
    """One step: L |-> (K0-closure(L) meet V1) + t(K0-closure(L) meet V1)."""
    v0_rows = [model.v1_space.embed_row(r) for r in L1.basis_rows()]
    C, growth = k0_closure(model, v0_rows, growth_cap)
    if not C.is_full_rank():
        raise ModelError(
            "closure lattice does not span V0; the diagram is not generated "
            "by its Iwahori-level invariants")
    D = C.meet_subspace(model.v1_space)
    return D.add(D.apply(model.t_matrix)), growth


# ---------------------------------------------------------------------------
# the run loop

def _homothety_scan(history, current):
    """(i0, j) with current = pi^j * history[i0], j < 0; None otherwise."""
    vals = current.pivot_vals
    for i0, old in enumerate(history):
        ov = old.pivot_vals
        if len(ov) != len(vals) or old.pivot_cols != current.pivot_cols:
            continue
        j = vals[0] - ov[0]
        if j >= 0:
            continue
        if all(v - o == j for v, o in zip(vals, ov)):
            if current.equal(old.scale(j)):
                return i0, j
    return None


def run(model, seed=None, max_iter=64, growth_cap=1024,
        confirm_steps=2):
    """Iterate the zig-zag from the seed and classify the outcome.

    After stabilization, confirm_steps further steps re-assert the fixed
    point.  Divergence is only reported with a homothety-recurrence
    certificate (pivot-profile filter first, then scaled double-membership).
    """
    if max_iter < 1:
        raise ModelError("max_iter must be >= 1")
    if seed is None:
        seed = seed_lattice(model)
    t0 = time.monotonic()
    records = [IterationRecord(0, tuple(seed.pivot_vals), 0,
                               1000 * (time.monotonic() - t0))]
    history = [seed]
    L = seed
    total_growth = 0
    verdict = None
    for i in range(1, max_iter + 1):
        t0 = time.monotonic()
        nxt, growth = zigzag_step(model, L, growth_cap)
        total_growth += growth
        if not nxt.contains(L):
            raise ModelError("zig-zag step lost monotonicity")
        records.append(IterationRecord(
            i, tuple(nxt.pivot_vals), nxt.index_valuation(seed),
            1000 * (time.monotonic() - t0)))
        if nxt.equal(L):
            for _ in range(confirm_steps):
                again, growth = zigzag_step(model, nxt, growth_cap)
                total_growth += growth
                if not again.equal(nxt):
                    raise ModelError(
                        "fixed point failed to persist after stabilization")
            verdict = Stabilized(i)
            L = nxt
            break
        hit = _homothety_scan(history, nxt)
        if hit is not None:
            verdict = DivergedPeriodic(hit[0], i, hit[1])
            L = nxt
            break
        history.append(nxt)
        L = nxt
    if verdict is None:
        verdict = Inconclusive(max_iter)
    return ZigZagTrace(records, verdict, total_growth, L.dump())


# ---------------------------------------------------------------------------
# exponent predicates

@dataclass(frozen=True)
class EmertonPredicateInput:
    """Valuations of the two central-character values plus group data."""

    v_omega1: int
    v_omega2: int
    d: int
    e: int
    f: int

    def validate(self):
        if self.v_omega1 + self.v_omega2 != 0:
            raise PredicateError(
                "central character is not a unit: "
                f"v(omega1) + v(omega2) = {self.v_omega1 + self.v_omega2}")


def emerton_predicate(inp: EmertonPredicateInput) -> bool:
    """Integrality of omega2 and of q^(d^2) omega1 at pi_F.

    In the v(pi) = 1 normalization, v(q^(d^2)) = d^2 * e * f.
    """
    inp.validate()
    return (inp.v_omega2 >= 0
            and inp.v_omega1 + inp.d * inp.d * inp.e * inp.f >= 0)


def normalized_predicate(inp: EmertonPredicateInput) -> bool:
    """Symmetric criterion for the normalized induction: both
    omega_i(pi_F) q^(d^2/2) integral."""
    inp.validate()
    half = inp.d * inp.d * inp.e * inp.f
    if half % 2:
        raise PredicateError(
            "normalized criterion needs d^2*e*f even (sqrt(q) in E)")
    half //= 2
    return inp.v_omega1 + half >= 0 and inp.v_omega2 + half >= 0
