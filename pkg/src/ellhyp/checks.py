"""Registry of identity checks, admissible parameter sampling and the suite runner.

Every check has a stable id ``module.name``, a tolerance, a sampler that
draws a candidate scenario from a seeded generator, an optional admissibility
predicate, and a runner returning the residual. Scenario seeds are derived
from (suite seed, check id), so results do not depend on execution order.
"""
from __future__ import annotations

import cmath
import fnmatch
import json
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations

import numpy as np

from . import biortho as B
from . import heun as H
from . import identities as ID
from . import integrals as I
from . import sklyanin as S
from .errors import EllHypError, SamplingFailureError, UsageError
from .gamma import BasePair, OmegaTriple
from .quadrature import QuadratureSpec, circle_mean, pole_margin_check
from .theta import theta1

MAX_REJECTIONS = 10_000
DEFAULT_BOX = (0.4, 0.8)
TAU = 0.5j


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Context:
    bases: BasePair = field(default_factory=BasePair)
    quadrature: dict = field(default_factory=dict)
    nodes: int | None = None

    def spec(self, default: QuadratureSpec) -> QuadratureSpec:
        kw = {k: v for k, v in self.quadrature.items() if k in ("n0", "n_max", "rtol", "delta_margin")}
        out = replace(default, **kw) if kw else default
        if self.nodes:
            out = replace(out, n0=self.nodes, n_max=self.nodes)
        return out


@dataclass(frozen=True)
class Scenario:
    check_id: str
    parameters: dict
    seed: int
    overrides: dict = field(default_factory=dict)


@dataclass
class ResidualReport:
    check_id: str
    parameters: dict
    residual: float
    tolerance: float
    passed: bool
    nodes_used: int
    runtime_ms: int
    notes: str

    def to_json(self) -> str:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        order = ("check_id", "parameters", "residual", "tolerance", "pass", "nodes_used", "runtime_ms", "notes")
        return json.dumps({k: d[k] for k in order}, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> ResidualReport:
        d = json.loads(line)
        d["passed"] = d.pop("pass")
        return cls(**d)


@dataclass(frozen=True)
class Check:
    id: str
    tolerance: float
    draw: object
    run: object
    predicate: object = None
    expensive: bool = False
    notes: str = ""


REGISTRY: dict[str, Check] = {}


def register(id, tolerance, draw, predicate=None, expensive=False, notes=""):
    def deco(fn):
        if id in REGISTRY:
            raise ValueError(f"duplicate check id {id}")
        REGISTRY[id] = Check(id, tolerance, draw, fn, predicate, expensive, notes)
        return fn
    return deco


# --------------------------------------------------------------------------
# serialization and sampling helpers


def encode_params(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            out[k] = int(v)
        else:
            c = complex(v)
            out[k] = [c.real, c.imag]
    return out


def decode_params(data: dict) -> dict:
    return {k: (complex(v[0], v[1]) if isinstance(v, (list, tuple)) else v) for k, v in data.items()}


def vec(params, prefix):
    keys = sorted((k for k in params if k.startswith(prefix) and k[len(prefix):].isdigit()),
                  key=lambda k: int(k[len(prefix):]))
    return np.array([params[k] for k in keys], dtype=np.complex128)


def named(prefix, values):
    return {f"{prefix}{i + 1}": complex(v) for i, v in enumerate(values)}


def polar(rng, lo, hi, n=None):
    r = rng.uniform(lo, hi, n)
    ph = rng.uniform(-np.pi, np.pi, n)
    return r * np.exp(1j * ph)


def cell_point(rng, n=None, tau=TAU):
    """Points of the fundamental parallelogram, kept off its edges."""
    return rng.uniform(0.05, 0.95, n) + rng.uniform(0.05, 0.95, n) * tau


def balanced(rng, n, target, box, prefix="t"):
    head = polar(rng, *box, n - 1)
    return named(prefix, np.append(head, target / np.prod(head)))


def last_in(lo, hi, prefix="t"):
    def pred(params, ctx):
        t = vec(params, prefix)
        return None if lo <= abs(t[-1]) <= hi else f"balancing parameter |{prefix}{len(t)}| outside [{lo}, {hi}]"
    return pred


def all_pred(*preds):
    def pred(params, ctx):
        for p in preds:
            r = p(params, ctx)
            if r:
                return r
        return None
    return pred


def derive_seed(seed: int, check_id: str) -> int:
    return (int(seed) * 1_000_003 + zlib.crc32(check_id.encode())) % (2 ** 63)


def sample_admissible(check_id: str, seed: int = 0, ctx: Context | None = None) -> Scenario:
    """Rejection sampling of a scenario that satisfies the check's predicate."""
    check = _lookup(check_id)
    ctx = ctx or Context()
    s = derive_seed(seed, check_id)
    rng = np.random.default_rng(s)
    reason = None
    for _ in range(MAX_REJECTIONS):
        params = check.draw(rng, ctx)
        reason = check.predicate(params, ctx) if check.predicate else None
        if reason is None:
            return Scenario(check_id, params, s)
    raise SamplingFailureError(f"{check_id}: no admissible scenario after {MAX_REJECTIONS} draws; last violation: {reason}")


def margin_predicate(delta: float, prefix: str = "t"):
    """The spec-level predicate: all parameters at least delta inside the unit circle."""
    def pred(params, ctx):
        return None if pole_margin_check(vec(params, prefix), delta) else f"pole margin {delta} violated"
    return pred


def _lookup(check_id) -> Check:
    try:
        return REGISTRY[check_id]
    except KeyError:
        raise UsageError(f"unknown check id {check_id!r}") from None


def _fixed(**kw):
    return lambda rng, ctx: dict(kw)


def _worst(*vals):
    """Max residual; nodes and convergence folded from Residual instances."""
    nodes = max((getattr(v, "nodes_used", 0) for v in vals), default=0)
    conv = all(getattr(v, "converged", True) for v in vals)
    return I.Residual(max(float(v) for v in vals), nodes, conv)


# --------------------------------------------------------------------------
# theta


def _draw_cell(n):
    return lambda rng, ctx: named("u", cell_point(rng, n))


@register("theta.triple_product", 1e-12, _draw_cell(50))
def _(P, ctx):
    return _worst(*[ID.triple_product_residual(u, TAU) for u in vec(P, "u")])


@register("theta.quasi_periodicity", 1e-12, _draw_cell(50))
def _(P, ctx):
    return _worst(*[ID.quasi_periodicity_residual(u, TAU) for u in vec(P, "u")])


@register("theta.duplication", 1e-12, _draw_cell(50))
def _(P, ctx):
    return _worst(*[ID.theta_duplication_residual(u, TAU) for u in vec(P, "u")])


@register("theta.listed_relations", 1e-12, _draw_cell(50))
def _(P, ctx):
    return _worst(*[ID.theta_relations_residual(u, TAU) for u in vec(P, "u")])


@register("theta.add_add", 1e-12, _draw_cell(200))
def _(P, ctx):
    u = vec(P, "u").reshape(50, 4)
    return _worst(*[ID.add_add_residual(*row, TAU) for row in u])


@register("theta.add_mult", 1e-12, lambda rng, ctx: named("z", polar(rng, *DEFAULT_BOX, 200)))
def _(P, ctx):
    z = vec(P, "z").reshape(50, 4)
    return _worst(*[ID.add_mult_residual(*row, ctx.bases.p) for row in z])


@register("theta.jacobi_identity", 1e-12, _draw_cell(200))
def _(P, ctx):
    u = vec(P, "u").reshape(50, 4)
    return _worst(*[ID.jacobi_identity_residual(row, TAU) for row in u])


# --------------------------------------------------------------------------
# elliptic gamma


def _draw_z(n=50):
    return lambda rng, ctx: named("z", polar(rng, *DEFAULT_BOX, n))


@register("gamma.reflection", 1e-11, _draw_z())
def _(P, ctx):
    return _worst(*[ID.gamma_reflection_residual(z, ctx.bases) for z in vec(P, "z")])


@register("gamma.shift", 1e-12, _draw_z())
def _(P, ctx):
    return _worst(*[ID.gamma_shift_residual(z, ctx.bases) for z in vec(P, "z")])


@register("gamma.duplication", 1e-11, _draw_z())
def _(P, ctx):
    return _worst(*[ID.gamma_duplication_residual(z, ctx.bases) for z in vec(P, "z")])


@register("gamma.p0_limit", 1e-6, _draw_z(20))
def _(P, ctx):
    return _worst(*[ID.gamma_p0_limit_residual(z, ctx.bases.q, 1e-8) for z in vec(P, "z")])


OMEGA_GENERIC = (1.0, 1.3 - 0.4j, 0.2 + 1.1j)
OMEGA_UNIT_Q = (1.0, 2 ** 0.5, 1j)
OMEGA_BOTH = (1.0, 2 + 0.5j, 1j)


def _draw_u(n=10):
    return lambda rng, ctx: named("u", rng.uniform(-0.3, 0.3, n) + 1j * rng.uniform(-0.1, 0.1, n))


def _om(P, key):
    return OmegaTriple(*(P[f"{key}{k}"] for k in (1, 2, 3)))


def _draw_u_om(omega, n=10):
    def draw(rng, ctx):
        d = _draw_u(n)(rng, ctx)
        d.update(named("w", omega))
        return d
    return draw


for _cid, _omega in (("gamma.modified_equations", OMEGA_GENERIC), ("gamma.modified_equations_unit_q", OMEGA_UNIT_Q)):
    @register(_cid, 1e-10, _draw_u_om(_omega))
    def _(P, ctx):
        om = _om(P, "w")
        return _worst(*[ID.modified_gamma_equations_residual(u, om) for u in vec(P, "u")])


@register("gamma.modified_representations", 1e-10, _draw_u_om(OMEGA_BOTH))
def _(P, ctx):
    om = _om(P, "w")
    return _worst(*[ID.modified_gamma_representations_residual(0.4 + u, om) for u in vec(P, "u")])


@register("gamma.modified_normalization", 1e-10, _fixed(w1=1.0, w2=2 ** 0.5, w3=1j))
def _(P, ctx):
    return _worst(ID.modified_gamma_normalization_residual(_om(P, "w")),
                  ID.modified_gamma_normalization_residual(OmegaTriple(*OMEGA_GENERIC)))


@register("gamma.modified_reflection", 1e-10, _draw_u_om(OMEGA_BOTH))
def _(P, ctx):
    om = _om(P, "w")
    return _worst(*[ID.modified_gamma_reflection_residual(0.3 + u, om) for u in vec(P, "u")])


@register("gamma.modified_symmetry", 1e-10, _draw_u_om(OMEGA_GENERIC))
def _(P, ctx):
    om = _om(P, "w")
    return _worst(*[ID.modified_gamma_symmetry_residual(u, om) for u in vec(P, "u")])


# --------------------------------------------------------------------------
# quadrature


@register("quadrature.laurent_exact", 1e-14, _fixed(n0=64))
def _(P, ctx):
    n = int(P["n0"])
    spec = QuadratureSpec(n0=n, n_max=n, rtol=1e-2)
    worst = 0.0
    for k in range(-(n - 1), n):
        v = circle_mean(lambda z, k=k: z ** k, spec).value
        worst = max(worst, abs(v - (1 if k == 0 else 0)))
    return worst


def _beta_canonical():
    t = [0.5 * cmath.exp(0.3j), 0.45 * cmath.exp(-1j), 0.6 * cmath.exp(2j), 0.55 * cmath.exp(-2.2j),
         0.5 * cmath.exp(1.1j)]
    return t + [BasePair().pq / np.prod(t)]


@register("quadrature.error_shrink", 0.1, _fixed(**named("t", _beta_canonical())),
          notes="residual = worst ratio of consecutive error estimates above the 1e-14 floor")
def _(P, ctx):
    errs = ID.trapezoid_error_sequence(vec(P, "t"), ctx.bases)
    worst = 0.0
    for a, b in zip(errs, errs[1:]):
        if a <= 1e-14 or b <= 1e-14:
            break
        worst = max(worst, b / a)
    return worst


# --------------------------------------------------------------------------
# hypergeometric integrals


def _beta_draw(rng, ctx):
    return balanced(rng, 6, ctx.bases.pq, DEFAULT_BOX)


@register("integrals.beta", 1e-9, _beta_draw, all_pred(last_in(*DEFAULT_BOX), margin_predicate(0.05)))
def _(P, ctx):
    t = vec(P, "t")
    r = I.ihm_integral(I.BalancedParams(0, tuple(t), ctx.bases), ctx.spec(I.DEFAULT_SPEC))
    exact = I.elliptic_beta_closed(t, ctx.bases)
    return I.Residual(abs(r.value - exact) / abs(exact), r.nodes_used, r.converged)


def _beta_cont_draw(rng, ctx):
    t = [polar(rng, 1.1, 1.5)] + list(polar(rng, 0.4, 0.6, 4))
    return named("t", t + [ctx.bases.pq / np.prod(t)])


@register("integrals.beta_continued", 1e-9, _beta_cont_draw, last_in(0.3, 0.8),
          notes="one parameter outside the unit circle; residues of crossed poles added")
def _(P, ctx):
    t = vec(P, "t")
    r = I.ihm_continued(t, ctx.bases, ctx.spec(I.V_SPEC))
    exact = I.elliptic_beta_closed(t, ctx.bases)
    return I.Residual(abs(r.value - exact) / abs(exact), r.nodes_used, r.converged)


V_BOX = (0.25, 0.6)


def _v_draw(rng, ctx):
    return balanced(rng, 8, ctx.bases.pq ** 2, V_BOX)


def _e7_pred(kinds):
    def pred(params, ctx):
        t = vec(params, "t")
        if not pole_margin_check(t, 0.05):
            return "pole margin 0.05 violated"
        for k in kinds:
            try:
                I.e7_transforms(t, k, ctx.bases, ctx.spec(I.V_SPEC))
            except EllHypError as exc:
                return f"{k} image: {exc}"
        return None
    return pred


V_PRED = all_pred(last_in(0.2, 0.8), _e7_pred(()))


@register("integrals.v_permutation", 1e-11, _v_draw, V_PRED)
def _(P, ctx):
    t = vec(P, "t")
    rng = np.random.default_rng(0)
    rows = [t]
    for _ in range(10):
        i, j = rng.choice(8, 2, replace=False)
        s = rows[-1].copy()
        s[[i, j]] = s[[j, i]]
        rows.append(s)
    vals, st = I.ihm_batch(np.array(rows), ctx.bases, ctx.spec(I.V_SPEC))
    return I.Residual(float(np.max(np.abs(vals - vals[0])) / abs(vals[0])), st.nodes_used, st.converged)


def _vred_draw(rng, ctx):
    t1 = polar(rng, 0.3, 0.6)
    rest = list(polar(rng, *V_BOX, 5))
    t = [t1] + rest[:3] + [ctx.bases.pq / t1] + rest[3:]
    t.append(ctx.bases.pq ** 2 / np.prod(t))
    return named("t", t)


@register("integrals.v_reduction", 1e-9, _vred_draw, all_pred(last_in(0.2, 0.8), margin_predicate(0.05)),
          notes="t1 t5 = pq reduces V to the product formula of the remaining six")
def _(P, ctx):
    t = vec(P, "t")
    r = I.v_quadrature(t, ctx.bases, ctx.spec(I.V_SPEC))
    exact = I.elliptic_beta_closed(np.delete(t, [0, 4]), ctx.bases)
    return I.Residual(abs(r.value - exact) / abs(exact), r.nodes_used, r.converged)


for _kind in I.E7_KINDS:
    @register(f"integrals.e7_{_kind}", 1e-8, _v_draw, all_pred(last_in(0.2, 0.8), _e7_pred((_kind,))))
    def _(P, ctx, _kind=_kind):
        return I.e7_residual(vec(P, "t"), _kind, ctx.bases, ctx.spec(I.V_SPEC))


def _bailey_pred(params, ctx):
    t = vec(params, "t")
    bp = I.BalancedParams(1, tuple(t), ctx.bases)
    e = bp.epsilon
    ok = pole_margin_check(t, 0.05) and pole_margin_check(t[4:] / e, 0.05) and pole_margin_check(t[:4] * e, 0.05)
    return None if ok else "t, t_k/epsilon or epsilon t_k outside the pole margin"


@register("integrals.bailey", 1e-8, _v_draw, all_pred(last_in(0.2, 0.8), _bailey_pred))
def _(P, ctx):
    return I.bailey_step_residual(vec(P, "t"), ctx.bases, ctx.spec(I.V_SPEC))


def _bailey_m1_draw(rng, ctx):
    a = list(polar(rng, 0.3, 0.6, 5))
    c = list(polar(rng, 0.25, 0.4, 4))
    return named("t", a + [ctx.bases.pq ** 3 / (np.prod(a) * np.prod(c))] + c)


def _bailey_m1_pred(params, ctx):
    t = vec(params, "t")
    e = I.BalancedParams(2, tuple(t), ctx.bases).epsilon
    ok = np.all(np.abs(t) < 0.9) and np.all(np.abs(t[6:] / e) < 0.9) and np.all(np.abs(t[:6] * e) < 0.9)
    return None if ok else "t, t_k/epsilon or epsilon t_k outside 0.9"


@register("integrals.bailey_m1", 1e-8, _bailey_m1_draw, _bailey_m1_pred, expensive=True)
def _(P, ctx):
    return I.bailey_step_m1_residual(vec(P, "t"), ctx.bases)


def _sets_pred(make_sets, balance_lo=0.1, balance_hi=0.85):
    def pred(params, ctx):
        t = vec(params, "t")
        if not balance_lo <= abs(t[-1]) <= balance_hi:
            return "balancing parameter outside its range"
        for s in make_sets(t, ctx.bases.q):
            if not pole_margin_check(s, 0.05):
                return "a shifted parameter set leaves the pole margin"
        return None
    return pred


def _sh(t, **kw):
    t = t.copy()
    for k, v in kw.items():
        t[int(k[1:]) - 1] *= v
    return t


@register("integrals.c1", 1e-7, lambda rng, ctx: balanced(rng, 8, ctx.bases.p ** 2 * ctx.bases.q, (0.3, 0.7)),
          _sets_pred(lambda t, q: [_sh(t, t6=q), _sh(t, t7=q), _sh(t, t8=q)]))
def _(P, ctx):
    return I.contiguous_c1_residual(vec(P, "t"), ctx.bases, ctx.spec(I.V_SPEC))


@register("integrals.eq2", 1e-7, lambda rng, ctx: balanced(rng, 8, ctx.bases.p ** 2, (0.3, 0.7)),
          _sets_pred(lambda t, q: [_sh(t, t7=q, t8=q), _sh(t, t6=q, t8=q), _sh(t, t6=q, t7=q)]))
def _(P, ctx):
    return I.eq2_residual(vec(P, "t"), ctx.bases, ctx.spec(I.V_SPEC))


def _kc_draw(rng, ctx):
    t = polar(rng, 0.35, 0.7, 8)
    t[4], t[6] = polar(rng, 0.1, 0.2, 2)
    t[7] = 1.0
    t[7] = ctx.bases.pq ** 2 / np.prod(t)
    return named("t", t)


@register("integrals.key_cont", 1e-7, _kc_draw,
          _sets_pred(lambda t, q: [t, _sh(t, t7=1 / q, t8=q), _sh(t, t5=1 / q, t6=q)]))
def _(P, ctx):
    return I.key_cont_residual(vec(P, "t"), ctx.bases, ctx.spec(I.V_SPEC))


def _eh_draw(rng, ctx):
    t = polar(rng, 0.35, 0.7, 8)
    t[6], t[7] = polar(rng, 0.1, 0.2, 2)
    t[5] = 1.0
    t[5] = ctx.bases.pq ** 2 / np.prod(t)
    return named("t", t)


def _eh_pred(params, ctx):
    t = vec(params, "t")
    q = ctx.bases.q
    if not 0.1 <= abs(t[5]) <= 0.85:
        return "balancing parameter t6 outside [0.1, 0.85]"
    for s in (t, _sh(t, t7=1 / q, t8=q), _sh(t, t7=q, t8=1 / q)):
        if not pole_margin_check(s, 0.05):
            return "a shifted parameter set leaves the pole margin"
    return None


@register("integrals.eh", 1e-7, _eh_draw, _eh_pred)
def _(P, ctx):
    return I.eh_residual(vec(P, "t"), ctx.bases, ctx.spec(I.V_SPEC))


def _eheq_draw(rng, ctx):
    """t7 t8 = c^2 with t7 = c/x, t8 = c x; two auxiliary (t3, t4) replacements."""
    pq = ctx.bases.pq
    c = 0.14 * cmath.exp(1j * rng.uniform(0, 2 * np.pi))
    x = 1.05 * cmath.exp(1j * rng.uniform(0, 2 * np.pi))
    t5 = 0.15 * cmath.exp(1j * rng.uniform(0, 2 * np.pi))
    rest = list(polar(rng, 0.55, 0.85, 4))
    t6 = pq ** 2 / (np.prod(rest) * t5 * c * c)
    t = rest + [t5, t6, c / x, c * x]
    d = named("t", t)
    d.update(c=c, x=x, t3p=0.5 * cmath.exp(1j * rng.uniform(-np.pi, np.pi)),
             t3pp=0.6 * cmath.exp(1j * rng.uniform(-np.pi, np.pi)))
    return d


def _eheq_pred(params, ctx):
    t = vec(params, "t")
    aux = [t[2] * t[3] / params[k] for k in ("t3p", "t3pp")]
    ok = np.all(np.abs(t) < 0.85) and abs(t[5] * ctx.bases.q) < 0.85 and max(map(abs, aux)) < 0.85
    return None if ok else "parameters, q t6 or the auxiliary t4 outside 0.85"


def _aux(P):
    t = vec(P, "t")
    return t, P["t3p"], t[2] * t[3] / P["t3p"], P["t3pp"], t[2] * t[3] / P["t3pp"]


@register("integrals.eheq", 1e-7, _eheq_draw, _eheq_pred)
def _(P, ctx):
    t = vec(P, "t")
    return I.eheq_residual(t[:6], P["c"], P["x"], ctx.bases, ctx.spec(I.V_SPEC))


@register("integrals.eheq_forms", 1e-12, _eheq_draw, _eheq_pred,
          notes="the operator of the equation in its two parametrizations")
def _(P, ctx):
    t = vec(P, "t")
    return I.eh_forms_consistency(t[:6], P["c"], P["x"], ctx.bases)


@register("integrals.op_ident", 1e-12, _eheq_draw, _eheq_pred)
def _(P, ctx):
    return I.op_ident_residual(*_aux(P), ctx.bases)


@register("integrals.key_eheq", 1e-7, _eheq_draw, _eheq_pred)
def _(P, ctx):
    t, a3, a4, b3, b4 = _aux(P)
    spec = ctx.spec(I.V_SPEC)
    return _worst(I.key_eheq_residual(t, a3, a4, ctx.bases, spec), I.key_eheq_residual(t, b3, b4, ctx.bases, spec))


@register("integrals.key_eheq_aux_independence", 1e-7, _eheq_draw, _eheq_pred)
def _(P, ctx):
    t, a3, a4, b3, b4 = _aux(P)
    spec = ctx.spec(I.V_SPEC)
    r1 = I.key_eheq_ratio(t, a3, a4, ctx.bases, spec)
    r2 = I.key_eheq_ratio(t, b3, b4, ctx.bases, spec)
    return I.Residual(ID.rel(r1.value, r2.value), max(r1.nodes_used, r2.nodes_used), r1.converged and r2.converged)


@register("integrals.eps_roundtrip", 1e-13, _eheq_draw, _eheq_pred)
def _(P, ctx):
    t = vec(P, "t")
    ep = I.epsilon_from_t(t[:6], P["c"], ctx.bases)
    tt, cc = I.t_from_epsilon(ep, P["c"])
    return float(np.max(np.abs(tt - t[:6]) / np.abs(t[:6])))


@register("integrals.dx_annihilates_u", 1e-10, _eheq_draw, _eheq_pred,
          notes="D_x applied to U(t_1..t_6, c/x, c x) relative to the nu U term")
def _(P, ctx):
    t, c, x = vec(P, "t"), P["c"], P["x"]
    ep = I.epsilon_from_t(t[:6], c, ctx.bases)
    spec = ctx.spec(I.V_SPEC)

    def U(y):
        row = np.append(t[:6], [c / y, c * y])
        return I.v_function(row, ctx.bases, spec) / I._u_factor(row, ctx.bases)

    return abs(I.dx_operator_apply(ep, U, x)) / abs(ep.nu * U(x))


def _dx_adj_draw(rng, ctx):
    return balanced(rng, 8, ctx.bases.pq ** 2, (0.3, 0.7), prefix="e")


@register("integrals.dx_adjoint", 1e-10, _dx_adj_draw, last_in(0.15, 0.8, prefix="e"),
          notes="entire test functions; <chi, D psi> = <D* chi, psi>")
def _(P, ctx):
    ep = I.EpsilonParams(tuple(vec(P, "e")), ctx.bases)
    chi = lambda y: np.exp(0.3 * y + 0.2 / y)
    psi = lambda y: np.cos(0.5 * y) + 1 / (y * y)
    return I.dx_adjoint_residual(ep, chi, psi, ctx.spec(I.V_SPEC))


@register("integrals.eheq_bio", 1e-6, _eheq_draw, _eheq_pred,
          notes="beta = 1 pairing of two solutions; expected to fail: the partner has poles in every admissible annulus")
def _(P, ctx):
    t = vec(P, "t")
    return I.eheq_bio_residual(t[:6], P["c"], P["t3p"], ctx.bases)


# --------------------------------------------------------------------------
# biorthogonality


def _abcd_draw(rng, ctx):
    d = named("a", polar(rng, *DEFAULT_BOX, 4))
    d.update(w=polar(rng, 0.8, 1.2), z=polar(rng, 0.9, 1.1), cp=polar(rng, *DEFAULT_BOX),
             e=polar(rng, *DEFAULT_BOX), h=polar(rng, *DEFAULT_BOX))
    return d


def _D(P, ctx, swap=False):
    a = vec(P, "a")
    return B.DOpParams(*a, ctx.bases, swap=swap)


@register("biortho.weight_positivity", 0.0, _fixed(p=0.11, q=0.23),
          notes="residual = max(0, -min weight) on 100 nodes, for real bases and for p = conj(q)")
def _(P, ctx):
    m1 = B.weight_positivity(BasePair(P["p"].real, P["q"].real))
    m2 = B.weight_positivity(BasePair(0.3 + 0.2j, 0.3 - 0.2j))
    return max(0.0, -m1, -m2)


@register("biortho.double_star", 1e-14, _abcd_draw)
def _(P, ctx):
    return B.double_star_error(B.DRParams(*vec(P, "a"), ctx.bases))


@register("biortho.f_eq", 1e-11, _abcd_draw)
def _(P, ctx):
    a, b, c, d = vec(P, "a")
    return B.f_eq_residual(P["z"], P["w"], a, b, a * b * c * d, c * d, ctx.bases)


@register("biortho.gevp2", 1e-11, _abcd_draw)
def _(P, ctx):
    return B.gevp2_residual(P["z"], P["w"], _D(P, ctx))


def _dp(P):
    a, b, c, d = vec(P, "a")
    return P["cp"], c * d / P["cp"]


@register("biortho.gevp", 1e-11, _abcd_draw)
def _(P, ctx):
    return B.gevp_residual(P["z"], P["w"], _D(P, ctx), *_dp(P))


@register("biortho.gevp_perm", 1e-11, _abcd_draw)
def _(P, ctx):
    D = _D(P, ctx, swap=True)
    return _worst(B.gevp_residual(P["z"], P["w"], D, *_dp(P)), B.gevp2_residual(P["z"], P["w"], D),
                  B.gevp2_residual(P["z"], P["w"], _D(P, ctx)))


@register("biortho.lambda_ratio", 1e-12, _abcd_draw)
def _(P, ctx):
    return B.lambda_ratio_error(P["w"], _D(P, ctx), *_dp(P))


@register("biortho.ccr", 1e-10, _abcd_draw)
def _(P, ctx):
    D = _D(P, ctx)
    return _worst(B.ccr_residual(D, *_dp(P), P["z"], w=P["w"]),
                  B.ccr_residual(D, *_dp(P), P["z"], testfn=lambda y: 1 + 0 * y))


@register("biortho.dis_bas", 1e-10, _abcd_draw)
def _(P, ctx):
    a, b = vec(P, "a")[:2]
    return _worst(*[B.dis_bas_residual(P["z"], a, b, N, k, ctx.bases) for N in (1, 2, 3) for k in range(N + 1)])


def _lemma_draw(rng, ctx):
    A = polar(rng, 0.5, 0.7, 3)
    Bv = polar(rng, 0.6, 0.8, 4)
    d = named("A", A)
    d.update(named("B", np.append(Bv, 1 / (np.prod(A) * np.prod(Bv)))))
    d["z"] = polar(rng, 0.9, 1.2)
    return d


@register("biortho.theta_lemma", 1e-12, _lemma_draw)
def _(P, ctx):
    return B.theta_lemma_residual(vec(P, "A"), vec(P, "B"), P["z"], ctx.bases.p)


@register("biortho.gen_act", 1e-10, _abcd_draw)
def _(P, ctx):
    return B.gen_act_residual(_D(P, ctx), P["e"], P["h"], P["z"], P["w"])


@register("biortho.gen_act_symmetry", 1e-10, _abcd_draw)
def _(P, ctx):
    return B.gen_act_residual(_D(P, ctx), P["e"], P["h"], P["z"], P["w"], swap_eh=True)


def _adj_fixed(rng, ctx):
    return {"a1": 0.3 * cmath.exp(0.3j), "a2": 0.25 * cmath.exp(-0.5j), "a3": 0.4 * cmath.exp(1.1j),
            "a4": 0.3 * cmath.exp(0.4j), "c3": 1.3 * cmath.exp(1.1j), "d3": 1.2 * cmath.exp(0.4j),
            "v": cmath.exp(0.7j), "w": cmath.exp(-0.4j)}


@register("biortho.adjoint", 1e-10, _adj_fixed, notes="<D* chi, psi> = <chi, D psi> for (1,1), (g,1), (1,f)")
def _(P, ctx):
    a, b, c, d = vec(P, "a")
    one = lambda y: 1 + 0 * y
    spec = ctx.spec(I.V_SPEC)
    D = B.DOpParams(a, b, c, d, ctx.bases)
    r1 = B.adjoint_residual(D, one, one, spec)
    r2 = B.adjoint_residual(D, lambda y: B.g_dual(y, P["v"], a, b, a * b * c * d, ctx.bases), one, spec)
    c3, d3 = P["c3"], P["d3"]
    D3 = B.DOpParams(a, b, c3, d3, ctx.bases)
    sq = cmath.sqrt(ctx.bases.q)
    r3 = B.adjoint_residual(D3, one, lambda y: B.f_basis(y, P["w"], sq * a, sq * b, a * b * c3 * d3, ctx.bases), spec)
    return _worst(r1, r2, r3)


@register("biortho.gevp_dual", 1e-8, _adj_fixed,
          notes="the conjugation box is empty for the pairing; evaluated without it, expected to fail")
def _(P, ctx):
    return B.gevp_dual_residual(B.DOpParams(*vec(P, "a"), ctx.bases), P["v"], P["w"], ctx.spec(I.V_SPEC),
                                enforce_box=False)


def _rforms_fixed(rng, ctx):
    return {"a": 0.14 * cmath.exp(0.2j), "b": 0.14 * cmath.exp(-0.3j), "c": 0.7 * cmath.exp(0.5j),
            "d": 0.75 * cmath.exp(-0.2j), "rho": 0.3 * cmath.exp(0.1j), "x": cmath.exp(0.4j), "w": cmath.exp(1.1j)}


def _s(P, ctx):
    return cmath.sqrt(ctx.bases.pq / P["rho"])


@register("biortho.r_forms", 1e-8, _rforms_fixed)
def _(P, ctx):
    return B.r_forms_residual(P["c"], P["d"], P["a"], P["b"], P["x"], P["w"], _s(P, ctx), ctx.bases)


def _keyrel_fixed(rng, ctx):
    return {"a": 0.5 * cmath.exp(0.2j), "b": 0.45 * cmath.exp(-0.3j), "a_alt": 0.55 * cmath.exp(-0.4j),
            "b_alt": 0.5 * cmath.exp(0.9j), "c": 0.7 * cmath.exp(0.5j), "d": 0.75 * cmath.exp(-0.2j),
            "rho": 0.4 * cmath.exp(0.1j), "x": cmath.exp(0.4j), "xi": cmath.exp(0.7j)}


@register("biortho.key_relation", 1e-6, _keyrel_fixed,
          notes="evaluated at two (a, b) pairs; both reconstruct the same phi(x; c, d)")
def _(P, ctx):
    s = _s(P, ctx)
    r1 = B.key_relation_residual(P["c"], P["d"], P["a"], P["b"], P["x"], P["xi"], s, ctx.bases)
    r2 = B.key_relation_residual(P["c"], P["d"], P["a_alt"], P["b_alt"], P["x"], P["xi"], s, ctx.bases)
    return _worst(r1, r2)


@register("biortho.key_relation_compact", 1e-6, _keyrel_fixed)
def _(P, ctx):
    sq = cmath.sqrt
    s, a, b, c, d = _s(P, ctx), P["a"], P["b"], P["c"], P["d"]
    pq = ctx.bases.pq
    al = s * sq(c * d)
    ga = s * sq(a * b)
    return B.compact_key_relation_residual(al, s * sq(pq) / al, ga, s * sq(pq) / ga, sq(c / d), P["x"], sq(a / b),
                                           P["xi"], ctx.bases)


@register("biortho.reproducing", 1e-5, _fixed(a=0.7, b=0.7, c=0.4 * cmath.exp(0.3j), d=0.4 * cmath.exp(-0.5j),
                                              e=0.14 * cmath.exp(0.2j), f=0.14 * cmath.exp(-0.1j),
                                              rho=0.3 * cmath.exp(0.05j), x=cmath.exp(0.4j), z=cmath.exp(-0.9j)),
          expensive=True)
def _(P, ctx):
    return B.reproducing_residual(P["a"], P["b"], P["c"], P["d"], P["e"], P["f"], P["x"], P["z"], _s(P, ctx),
                                  ctx.bases)


@register("biortho.overlap_v", 1e-7, _fixed(a=0.5 * cmath.exp(0.2j), b=0.45 * cmath.exp(-0.3j),
                                            c=0.1 * cmath.exp(0.5j), d=0.12 * cmath.exp(-0.2j),
                                            e=0.05 * cmath.exp(0.3j), v=cmath.exp(0.3j), w=cmath.exp(-0.6j)))
def _(P, ctx):
    return B.overlap_v_residual(P["a"], P["b"], P["c"], P["d"], P["e"], P["v"], P["w"], ctx.bases,
                                ctx.spec(I.V_SPEC))


@register("biortho.overlap_phi", 1e-7, _fixed(c=0.5 * cmath.exp(0.5j), d=0.55 * cmath.exp(-0.2j),
                                              e=0.13 * cmath.exp(0.3j), f=0.13, x=cmath.exp(0.4j),
                                              z=cmath.exp(-0.2j), rho=0.4 * cmath.exp(0.1j)))
def _(P, ctx):
    return B.overlap_phi_residual(P["c"], P["d"], P["e"], P["f"], P["x"], P["z"], _s(P, ctx), ctx.bases,
                                  ctx.spec(I.V_SPEC))


def _feqadd_draw(omega):
    def draw(rng, ctx):
        v = rng.uniform(-0.3, 0.3, 5) + 1j * rng.uniform(-0.06, 0.06, 5)
        d = dict(zip(("u", "v", "alpha", "beta", "sigma"), (complex(x) for x in v)))
        d.update(named("w", omega))
        return d
    return draw


for _cid, _omega in (("biortho.f_eq_add", OMEGA_GENERIC), ("biortho.f_eq_add_unit_q", OMEGA_UNIT_Q)):
    @register(_cid, 1e-8, _feqadd_draw(_omega))
    def _(P, ctx):
        return B.f_eq_add_residual(P["u"], P["v"], P["alpha"], P["beta"], P["sigma"], _om(P, "w"))


# --------------------------------------------------------------------------
# Sklyanin algebra


SK = dict(eta=0.07 + 0.21j, tau=0.5j, g=0.17)


def _sk(P):
    return S.SklyaninParams(P["eta"], P["tau"], P["g"].real)


def _th1(u):
    return complex(theta1(u, SK["tau"]))


SK_TESTFNS = (lambda u: _th1(u - 0.3) * _th1(-u - 0.3), lambda u: 1.0 + 0 * u)
CASIMIR_TESTFNS = (lambda u: _th1(u + 0.3) * _th1(u - 0.3), lambda u: 1.0 + 0 * u)


def _sk_draw(rng, ctx):
    d = dict(SK)
    d["u"] = complex(rng.uniform(0.05, 0.45), rng.uniform(0.02, 0.2))
    a = list(rng.uniform(-0.3, 0.3, 3) + 1j * rng.uniform(-0.1, 0.1, 3))
    a.append(-4 * SK["g"] - sum(a))
    d.update(named("a", a))
    return d


@register("sklyanin.structure_constants", 1e-12, _sk_draw)
def _(P, ctx):
    return S.structure_constant_error(_sk(P))


@register("sklyanin.relations", 1e-10, _sk_draw)
def _(P, ctx):
    return max(S.sklyanin_relations_residual(_sk(P), f, P["u"]) for f in SK_TESTFNS)


@register("sklyanin.casimirs", 1e-9, _sk_draw)
def _(P, ctx):
    return max(max(S.casimir_residuals(_sk(P), f, P["u"])) for f in CASIMIR_TESTFNS)


@register("sklyanin.jac_id_specializations", 1e-12, _sk_draw)
def _(P, ctx):
    eta, g, u = P["eta"], SK["g"], P["u"]
    choices = ((eta, eta, 2 * u - 2 * g, 2 * u - 2 * g + 2 * eta), (eta, eta, 2 * u - 2 * g, -2 * u - 2 * g - 2 * eta),
               (0, 2 * eta, 2 * u - 2 * g, -2 * u + 2 * g - 2 * eta), (0, 2 * eta, 2 * u - 2 * g, -2 * u - 2 * g - 2 * eta))
    return max(ID.jacobi_identity_residual(b, P["tau"]) for b in choices)


@register("sklyanin.delta_equivalence", 1e-10, _sk_draw)
def _(P, ctx):
    return max(S.delta_equivalence_residual(vec(P, "a"), _sk(P), f, P["u"]) for f in SK_TESTFNS)


@register("sklyanin.s_as_delta", 1e-10, _sk_draw)
def _(P, ctx):
    return max(S.s_as_delta_residual(k, _sk(P), f, P["u"]) for k in range(4) for f in SK_TESTFNS)


@register("sklyanin.delta_bridge", 1e-10, _sk_draw)
def _(P, ctx):
    return max(S.delta_bridge_residual(vec(P, "a"), _sk(P), f, P["u"]) for f in SK_TESTFNS)


for _double in S.DOUBLES:
    @register(f"sklyanin.cross_{_double}", 1e-9, _sk_draw)
    def _(P, ctx, _double=_double):
        prm = _sk(P)
        return max(S.cross_commutation_residual(a, b, prm, _double, f, P["u"])
                   for a in range(4) for b in range(4) for f in SK_TESTFNS)


UQ_TESTFNS = (lambda u: np.exp(2j * np.pi * u) + 1, lambda u: np.exp(0.7j * u * u + 0.3 * u) + np.cos(1.3 * u))


@register("sklyanin.uq_relations", 1e-10, _sk_draw,
          notes="U_q(sl2), tilde copy, anticommutation and K = k^2 relations")
def _(P, ctx):
    return max(max(S.uq_relations_residual(_sk(P), f, P["u"]).values()) for f in UQ_TESTFNS)


# --------------------------------------------------------------------------
# Bethe ansatz and Heun limit


BETHE = dict(eta=0.07 + 0.105j, tau=0.5j)
BETHE_A = (0.11 + 0.05j, 0.23 - 0.07j, -0.17 + 0.12j)


def _bethe_cfg(P, N):
    a = list(vec(P, "a")[:3])
    a.append(-2 * N * P["eta"] - sum(a))
    return a


def _bethe_draw(rng, ctx):
    d = dict(BETHE)
    d.update(named("a", BETHE_A))
    d.update(named("u", cell_point(rng, 10, BETHE["tau"])))
    return d


def _cell_pred(params, ctx):
    tau = params["tau"]
    for u in vec(params, "u"):
        if abs(complex(theta1(2 * u, tau))) < 1e-6:
            return "sample point next to a half period"
    return None


def _solved(P, N):
    if N == 0:
        return H.BetheConfig(0, _bethe_cfg(P, 0), P["eta"], P["tau"])
    return H.bethe_solve(N, _bethe_cfg(P, N), P["eta"], P["tau"])


for _N in (0, 1, 2):
    @register(f"heun.bethe_n{_N}_devp", 1e-10 if _N == 0 else 1e-8, _bethe_draw, _cell_pred)
    def _(P, ctx, _N=_N):
        cfg = _solved(P, _N)
        return max(H.devp_residual(u, cfg) for u in vec(P, "u"))

    @register(f"heun.bethe_n{_N}_energy", 1e-10 if _N == 0 else 1e-8, _bethe_draw)
    def _(P, ctx, _N=_N):
        cfg = _solved(P, _N)
        E = [H.bethe_energy(cfg, l) for l in (1, 2, 3, 4)]
        return max(abs(x - y) for x, y in combinations(E, 2)) / max(abs(x) for x in E)


@register("heun.bethe_system", 1e-10, _bethe_draw)
def _(P, ctx):
    return max(float(H.bethe_system_residual(_solved(P, N)).max()) for N in (1, 2))


@register("heun.bethe_sensitivity", 1.0, _bethe_draw,
          notes="residual = 1e-4 / (system residual after a 1e-3 root perturbation)")
def _(P, ctx):
    cfg = _solved(P, 1)
    pert = cfg.with_roots([cfg.roots[0] + 1e-3])
    return 1e-4 / float(H.bethe_system_residual(pert).max())


@register("heun.half_period_zeros", 1e-12, _fixed(tau=0.5j))
def _(P, ctx):
    return H.half_period_zero_check(P["tau"])


def _logth_fd(u, tau, h=1e-3):
    L = lambda x: cmath.log(complex(theta1(x, tau)))
    return -(-L(u + 2 * h) + 16 * L(u + h) - 30 * L(u) + 16 * L(u - h) - L(u - 2 * h)) / (12 * h * h)


@register("heun.weierstrass_fd", 1e-8, lambda rng, ctx: {"tau": 0.5j, "u0": 0.3,
                                                         **named("u", cell_point(rng, 5) * 0.8 + 0.05)})
def _(P, ctx):
    us = [P["u0"], *vec(P, "u")]
    return max(ID.rel(H.weierstrass_p(u, P["tau"]), _logth_fd(u, P["tau"])) for u in us)


HEUN_ALPHAS = (0.3, 0.4, 0.2, 0.65)


def _heun_testfns(tau):
    f1 = H.theta_pair_testfn(0.3, tau)
    f2 = (lambda u: cmath.exp(2j * np.pi * u), lambda u: -4 * np.pi ** 2 * cmath.exp(2j * np.pi * u))
    f3 = (lambda u: cmath.cos(2 * u) + u * u, lambda u: -4 * cmath.cos(2 * u) + 2)
    return (f1, f2, f3)


@register("heun.limit_order", 0.3, _fixed(tau=0.5j, u=0.21 + 0.07j, **named("al", HEUN_ALPHAS)),
          notes="residual = max |order - 3| over three test functions")
def _(P, ctx):
    al = [x.real for x in vec(P, "al")]
    return max(abs(H.heun_limit_order(f, d2, P["u"], al, P["tau"]).order - 3) for f, d2 in _heun_testfns(P["tau"]))


@register("heun.limit_control", 0.3, _fixed(tau=0.5j, u=0.21 + 0.07j, **named("al", HEUN_ALPHAS)),
          notes="without the potential the order drops to 2; residual = max |order - 2|")
def _(P, ctx):
    al = [x.real for x in vec(P, "al")]
    return max(abs(H.heun_limit_order(f, d2, P["u"], al, P["tau"], with_potential=False).order - 2)
               for f, d2 in _heun_testfns(P["tau"]))


def _vd_draw(rng, ctx):
    e = polar(rng, 0.4, 0.7, 3)
    d = named("e", e)
    d.update(named("x", polar(rng, 0.85, 1.15, 3)))
    return d


@register("heun.vd_reduction", 1e-10, _vd_draw)
def _(P, ctx):
    e6, e7, e8 = vec(P, "e")
    cfg = H.VanDiejenConfig.reduced(1 / (e6 * e7 * e8), e6, e7, e8, ctx.bases)
    fs = (lambda x: x + 1 / x, lambda x: 1 + 0 * x, lambda x: x ** 2 + x ** -2 + 0.3)
    return max(H.vd_reduction_residual(cfg, f, x) for f in fs for x in vec(P, "x"))


def _zm_draw(rng, ctx):
    return {"c": 0.6 * cmath.exp(0.2j), "t6": 0.5 * cmath.exp(-0.4j),
            "x": cmath.exp(1j * rng.uniform(0.2, 2.9))}


def _zp(P, ctx):
    return H.ZeroModeParams.from_t6(P["t6"], P["c"], ctx.bases)


@register("heun.psi2", 1e-9, _zm_draw, notes="also at 1/x")
def _(P, ctx):
    zp = _zp(P, ctx)
    return max(H.zero_mode_residual("psi2", x, zp) for x in (P["x"], 1 / P["x"]))


@register("heun.psi1", 1e-6, _zm_draw)
def _(P, ctx):
    return H.zero_mode_residual("psi1", P["x"], _zp(P, ctx), ctx.spec(I.V_SPEC))


@register("heun.ellipticity", 1e-6, _zm_draw)
def _(P, ctx):
    zp = _zp(P, ctx)
    spec = ctx.spec(I.V_SPEC)
    return max(H.ellipticity_residual(P["x"], zp, spec), H.ellipticity_residual(P["x"] / ctx.bases.q, zp, spec))


# --------------------------------------------------------------------------
# suite runner


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _context(cfg: dict, nodes=None) -> Context:
    b = cfg.get("bases", {})
    try:
        p = decode_params({"p": b.get("p", 0.11)})["p"] if isinstance(b.get("p", 0.11), list) else b.get("p", 0.11)
        q = decode_params({"q": b.get("q", 0.23)})["q"] if isinstance(b.get("q", 0.23), list) else b.get("q", 0.23)
        bases = BasePair(p, q)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad bases in config: {exc}") from None
    return Context(bases, dict(cfg.get("quadrature", {})), nodes)


def _run_one(job):
    check_id, params, ov_params, seed, ctx, tol, timing = job
    check = REGISTRY[check_id]
    tolerance = float(tol if tol is not None else check.tolerance)
    t0 = time.perf_counter()
    notes = check.notes
    try:
        if params is None:
            sc = sample_admissible(check_id, seed, ctx)
            params = sc.parameters
        if ov_params:
            params = {**params, **decode_params(ov_params)}
            reason = check.predicate(params, ctx) if check.predicate else None
            if reason:
                raise SamplingFailureError(f"override rejected: {reason}")
        with np.errstate(all="ignore"):
            r = check.run(params, ctx)
        residual = float(r)
        nodes = int(getattr(r, "nodes_used", 0))
        conv = bool(getattr(r, "converged", True))
        if not conv:
            notes = (notes + "; " if notes else "") + "quadrature did not converge"
        ok = bool(np.isfinite(residual) and residual <= tolerance and conv)
    except EllHypError as exc:
        residual, nodes, ok = float("inf"), 0, False
        notes = f"{type(exc).__name__}: {exc}"
        params = params or {}
    ms = int(round((time.perf_counter() - t0) * 1000)) if timing else 0
    return ResidualReport(check_id, encode_params(params), residual, tolerance, ok, nodes, ms, notes)


def select(filter_glob="*", cfg=None, expensive=False) -> list:
    cfg = cfg or {}
    entries = cfg.get("checks")
    if entries:
        ids = []
        for e in entries:
            cid = e["id"] if isinstance(e, dict) else e
            _lookup(cid)
            ids.append(cid)
    else:
        ids = [c for c in REGISTRY if expensive or not REGISTRY[c].expensive]
    patterns = filter_glob.split(",") if filter_glob else ["*"]
    ids = [c for c in ids if any(fnmatch.fnmatchcase(c, pat) for pat in patterns)]
    if not ids:
        raise UsageError(f"filter {filter_glob!r} matches no check")
    return ids


def worker_count() -> int:
    try:
        n = int(os.environ.get("ELLHYP_THREADS", "0"))
    except ValueError:
        raise UsageError("ELLHYP_THREADS must be an integer") from None
    return n if n > 0 else (os.cpu_count() or 1)


def run_suite(config_path=None, filter="*", seed: int = 0, *, expensive: bool = False, tol=None, nodes=None,
              timing: bool = True, workers: int | None = None) -> list[ResidualReport]:
    """Run the selected checks; reports come back in registry (or config) order."""
    cfg = load_config(config_path)
    ctx = _context(cfg, nodes)
    ids = select(filter, cfg, expensive)
    overrides = {}
    for e in cfg.get("checks", []) or []:
        if isinstance(e, dict):
            overrides[e["id"]] = e.get("overrides", {})
    jobs = []
    for cid in ids:
        ov = overrides.get(cid, {})
        jobs.append((cid, None, ov.get("parameters"), seed, ctx, ov.get("tolerance", tol), timing))
    n = min(workers or worker_count(), len(jobs))
    if n <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(_run_one, jobs))


def run_check(check_id: str, seed: int = 0, ctx: Context | None = None, params: dict | None = None,
              tol=None) -> ResidualReport:
    """One check in-process."""
    _lookup(check_id)
    return _run_one((check_id, params, None, seed, ctx or Context(), tol, True))
