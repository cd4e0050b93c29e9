"""Command line entry point: ``ellhyp suite | eval | bethe | heun-limit``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys

import numpy as np

from . import checks
from .errors import EllHypError, UsageError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _c(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        # let "-0.4j" and "-1e-3+2j" through as values
        self._negative_number_matcher = re.compile(r"^-[\d.][\d.eE+\-jJi]*$")

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ellhyp", description="Residual checks for elliptic hypergeometric identities.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("suite", help="run the registered identity checks")
    s.add_argument("--config", help="JSON config with bases, quadrature and checks")
    s.add_argument("--filter", default="*", help="glob over check ids (comma separated)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, help="override every tolerance")
    s.add_argument("--nodes", type=int, help="fixed quadrature node count")
    s.add_argument("--json", dest="json_path", help="also write the JSON lines to this file")
    s.add_argument("--expensive", action="store_true", help="include nested-quadrature checks")
    s.add_argument("--no-timing", action="store_true", help="report runtime_ms = 0 (byte-stable output)")
    s.add_argument("--list", action="store_true", help="print the selected check ids and exit")

    e = sub.add_parser("eval", help="evaluate one function")
    e.add_argument("kind", choices=("theta", "gamma", "gamma-mod", "beta", "v", "r-kernel"))
    e.add_argument("args", nargs="+", type=_c, help="complex arguments, e.g. 0.3+0.1j")
    e.add_argument("--k", type=int, default=1, help="Jacobi theta index")
    e.add_argument("--p", type=_c, default=0.11)
    e.add_argument("--q", type=_c, default=0.23)
    e.add_argument("--nodes", type=int)
    e.add_argument("--tol", type=float)

    b = sub.add_parser("bethe", help="solve the Bethe equations")
    b.add_argument("--N", type=int, default=1, choices=(0, 1, 2))
    b.add_argument("--a", type=_c, nargs=3, default=list(checks.BETHE_A), help="a1 a2 a3; a4 follows from the sum rule")
    b.add_argument("--eta", type=_c, default=checks.BETHE["eta"])
    b.add_argument("--tau", type=_c, default=checks.BETHE["tau"])
    b.add_argument("--seed", type=int, default=0)

    h = sub.add_parser("heun-limit", help="order of the continuum limit for the standard test functions")
    h.add_argument("--alphas", type=float, nargs=4, default=list(checks.HEUN_ALPHAS))
    h.add_argument("--u", type=_c, default=0.21 + 0.07j)
    h.add_argument("--tau", type=_c, default=0.5j)
    h.add_argument("--etas", type=float, nargs="+", default=[0.02, 0.01, 0.005])
    h.add_argument("--no-potential", action="store_true")
    return ap


def _emit(obj):
    print(json.dumps(obj))


def cmd_suite(ns) -> int:
    if ns.list:
        cfg = checks.load_config(ns.config)
        for cid in checks.select(ns.filter, cfg, ns.expensive):
            print(cid)
        return EXIT_OK
    reports = checks.run_suite(ns.config, ns.filter, ns.seed, expensive=ns.expensive, tol=ns.tol, nodes=ns.nodes,
                               timing=not ns.no_timing)
    lines = [r.to_json() for r in reports]
    for line in lines:
        print(line)
    if ns.json_path:
        try:
            with open(ns.json_path, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise UsageError(f"cannot write {ns.json_path}: {exc}") from None
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _need(args, n, kind, names):
    if len(args) not in n:
        raise UsageError(f"eval {kind} takes {' or '.join(map(str, n))} arguments: {names}")


def cmd_eval(ns) -> int:
    from .biortho import r_kernel
    from .gamma import BasePair, OmegaTriple, gamma_pq, modified_gamma_g
    from .integrals import V_SPEC, elliptic_beta_closed, ihm_integral, BalancedParams, v_quadrature
    from .quadrature import DEFAULT_SPEC
    from .theta import jacobi_theta

    bases = BasePair(ns.p, ns.q)
    a = ns.args

    def spec(default):
        kw = {}
        if ns.nodes:
            kw.update(n0=ns.nodes, n_max=ns.nodes)
        if ns.tol:
            kw.update(rtol=ns.tol)
        return dataclasses.replace(default, **kw) if kw else default

    out = {"kind": ns.kind}
    if ns.kind == "theta":
        _need(a, (2,), "theta", "u tau")
        out.update(k=ns.k, value=_pair(jacobi_theta(ns.k, a[0], a[1])))
    elif ns.kind == "gamma":
        _need(a, (1,), "gamma", "z")
        out["value"] = _pair(gamma_pq(a[0], bases))
    elif ns.kind == "gamma-mod":
        _need(a, (4,), "gamma-mod", "u w1 w2 w3")
        out["value"] = _pair(modified_gamma_g(a[0], OmegaTriple(a[1], a[2], a[3])))
    elif ns.kind == "beta":
        _need(a, (5, 6), "beta", "t1..t5 [t6]")
        t = np.array(a if len(a) == 6 else a + [bases.pq / np.prod(a)])
        r = ihm_integral(BalancedParams(0, tuple(t), bases), spec(DEFAULT_SPEC))
        out.update(t=[_pair(x) for x in t], value=_pair(r.value), closed_form=_pair(elliptic_beta_closed(t, bases)),
                   nodes_used=r.nodes_used, converged=r.converged)
    elif ns.kind == "v":
        _need(a, (7, 8), "v", "t1..t7 [t8]")
        t = np.array(a if len(a) == 8 else a + [bases.pq ** 2 / np.prod(a)])
        r = v_quadrature(t, bases, spec(V_SPEC))
        out.update(t=[_pair(x) for x in t], value=_pair(r.value), nodes_used=r.nodes_used, converged=r.converged)
    elif ns.kind == "r-kernel":
        _need(a, (7,), "r-kernel", "c d a b x w s")
        out["value"] = _pair(r_kernel(*a, bases=bases, spec=spec(V_SPEC)))
    _emit(out)
    return EXIT_OK


def cmd_bethe(ns) -> int:
    from . import heun as H
    a = list(ns.a) + [-2 * ns.N * ns.eta - sum(ns.a)]
    if ns.N == 0:
        cfg = H.BetheConfig(0, a, ns.eta, ns.tau)
        res = []
    else:
        cfg = H.bethe_solve(ns.N, a, ns.eta, ns.tau, seed=ns.seed)
        res = [float(x) for x in H.bethe_system_residual(cfg)]
    E = [H.bethe_energy(cfg, l) for l in (1, 2, 3, 4)]
    _emit({"N": ns.N, "a": [_pair(x) for x in a], "roots": [_pair(r) for r in cfg.roots],
           "system_residual": res, "energy": [_pair(x) for x in E]})
    return EXIT_OK


def cmd_heun_limit(ns) -> int:
    from . import heun as H
    names = ("theta_pair", "exp", "cos_plus_square")
    for name, (f, d2) in zip(names, checks._heun_testfns(ns.tau)):
        est = H.heun_limit_order(f, d2, ns.u, ns.alphas, ns.tau, tuple(ns.etas), not ns.no_potential)
        _emit({"testfn": name, "etas": ns.etas, "residuals": list(est.residuals), "orders": list(est.orders),
               "order": est.order, "precision_floor": est.precision_floor})
    return EXIT_OK


COMMANDS = {"suite": cmd_suite, "eval": cmd_eval, "bethe": cmd_bethe, "heun-limit": cmd_heun_limit}


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[ns.command](ns)
    except UsageError as exc:
        print(f"ellhyp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EllHypError as exc:
        print(f"ellhyp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
