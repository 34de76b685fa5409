"""Command-line front end.

Every subcommand writes a JSON report (``--report``, default stdout) and
returns 0 when all checks pass, 1 when some residual exceeds its tolerance
and 2 on invalid input or a domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import replace
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .config import Tolerances
from .darboux import (
    build_natural_connection,
    lame_residual_values,
    natural_connection,
    dual_connection,
    v_matrix,
)
from .errors import BiflatError, DriftError
from .geometry import ProductField, riemann_curvature
from .hierarchy import (
    GridState,
    VectorFieldSample,
    commutator_study,
    epsilon_connection,
    euler_vector_field,
    recursion_field,
    recursion_step,
    symmetry_residual,
    unit_vector_field,
)
from .models import (
    EpsilonModel,
    N2Model,
    epsilon_fields,
    n2_biflat,
    n2_dual_lame,
    n2_natural_lame_field,
)
from .painleve import (
    CSV_HEADER,
    FState,
    integrate_span,
    invariants,
    painleve_parameters,
    round_trip,
    sigma_data_from_F,
    sigma_residual_data,
    trajectory_rows,
)
from .suites import ALL_CHECKS, random_points, verify_biflat

EXIT_OK, EXIT_RESIDUAL, EXIT_INVALID = 0, 1, 2


class InputError(BiflatError, ValueError):
    """Invalid command-line or manifest input."""


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and ``os.replace``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([x if isinstance(x, str) else repr(float(x)) for x in row])
    return buf.getvalue()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        if obj.imag == 0:
            return float(obj.real)
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def check_entry(name: str, value: float, tolerance: float, **extra: Any) -> dict:
    value = float(value)
    entry = {"name": name, "value": value, "tolerance": float(tolerance),
             "pass": bool(value <= tolerance)}
    entry.update(extra)
    return entry


def emit(args: argparse.Namespace, command: str, provenance: str, checks: list[dict],
         data: dict | None = None) -> int:
    """Write the report and return the exit code implied by ``checks``."""
    ok = all(c["pass"] for c in checks)
    report = {
        "tool": "biflat",
        "version": __version__,
        "command": command,
        "provenance": provenance,
        "seed": getattr(args, "seed", None),
        "tolerances": args.tolerances.as_dict(),
        "pass": ok,
        "checks": checks,
        "data": data or {},
    }
    text = json.dumps(_jsonable(report), indent=2, sort_keys=False) + "\n"
    if args.report:
        write_atomic(args.report, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_RESIDUAL


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _points(args: argparse.Namespace, n: int, nonzero: bool = True) -> np.ndarray:
    if getattr(args, "point", None):
        p = np.asarray(args.point, dtype=float)
        if p.size != n:
            raise InputError(f"--point needs {n} coordinates")
        return p[None, :]
    if args.seed is None:
        raise InputError("random sampling needs --seed")
    return random_points(n, args.points, args.seed, args.tolerances.delta_sep, nonzero)


def _eps_model(args: argparse.Namespace) -> EpsilonModel:
    if args.n is None or args.eps is None:
        raise InputError("the epsilon model needs --n and --eps")
    return EpsilonModel(args.n, args.eps)


def _n2_model(args: argparse.Namespace) -> N2Model:
    if args.C1 is None or args.C2 is None:
        raise InputError("the n=2 model needs --C1 and --C2")
    return N2Model(args.C1, args.C2, a=args.a, b=args.b, complex_mode=args.complex)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_models_epsilon(args: argparse.Namespace) -> int:
    model = _eps_model(args)
    beta, H = epsilon_fields(model)
    pts = _points(args, model.n)
    res = verify_biflat(beta, H, pts, args.tolerances,
                        checks=("ED1", "ED2", "ED3", "L1", "L2", "L3"))
    data = {"n": model.n, "eps": model.eps, "degree": model.degree, "points": len(pts)}
    return emit(args, "models epsilon", beta.provenance, res.summary(), data)


def cmd_models_n2(args: argparse.Namespace) -> int:
    model = _n2_model(args)
    p = np.asarray(args.point if args.point else [3.0, 1.0], dtype=float)
    tol = args.tolerances
    beta = model.rotation_field()
    checks: list[dict] = []
    data: dict[str, Any] = {"point": p.tolist()}
    if model.C1 * model.C2 >= 0 or model.complex_mode:
        nat_h = n2_natural_lame_field(model)
        for k, v in lame_residual_values(beta, nat_h, p, checks=("L1", "L2")).items():
            checks.append(check_entry(f"natural_{k}", v, tol.fd))
        data["natural_H"] = nat_h(p)
    else:
        data["natural_H"] = "skipped: C1*C2 < 0 needs --complex"
    if model.C1 == 1 and model.C2 == -4:
        d = args.d if args.d is not None else 1.0
        dual_h = n2_dual_lame(model, d)
        dual_h = replace(dual_h, degree_sign=args.degree_sign)
        for k, v in lame_residual_values(beta, dual_h, p, checks=("L1", "L3")).items():
            checks.append(check_entry(f"dual_{k}", v, tol.fd))
        data["dual_H"] = dual_h(p)
        data["dual_degree"] = d
    if -model.C1 * model.C2 >= 0 or model.complex_mode:
        bf = n2_biflat(model)
        built = build_natural_connection(bf.beta, bf.lame, p)
        g_const = bf.gamma_from_constants(p)
        g_stated = bf.gamma_stated(p)
        checks.append(check_entry("biflat_gamma_112", abs(built[0, 0, 1] - g_const[0]),
                                  tol.algebraic))
        for name, conn in (("natural", natural_connection(bf.beta, bf.lame)),
                           ("dual", dual_connection(bf.beta, bf.lame))):
            checks.append(check_entry(f"biflat_riemann_{name}",
                                      np.max(np.abs(riemann_curvature(conn, p))), tol.fd))
        data["biflat"] = {
            "d": bf.d, "D1": bf.D1, "D2": bf.D2,
            "gamma_112": built[0, 0, 1], "gamma_221": built[1, 1, 0],
            "gamma_112_closed_form_minus_d_over_u2_minus_u1": g_stated[0],
            "gamma_221_closed_form_d_over_u2_minus_u1": g_stated[1],
        }
    return emit(args, "models n2", model.provenance, checks, data)


def cmd_verify(args: argparse.Namespace) -> int:
    checks = tuple(args.checks) if args.checks else ALL_CHECKS
    if args.model == "epsilon":
        model = _eps_model(args)
        beta, H = epsilon_fields(model)
        pts = _points(args, model.n)
    else:
        model = _n2_model(args)
        bf = n2_biflat(model)
        beta, H = bf.beta, bf.lame
        pts = _points(args, 2)
        # real powers of u^1 - u^2 need u^1 > u^2
        pts = -np.sort(-pts, axis=1)
    res = verify_biflat(beta, H, pts, args.tolerances, checks=checks)
    return emit(args, "verify", beta.provenance, res.summary(),
                {"points": len(pts), "model": args.model})


def cmd_ode3_integrate(args: argparse.Namespace, sigma: bool = False) -> int:
    if len(args.F0) != 6:
        raise InputError("--F0 needs six comma-separated values")
    lo, hi = min(args.z0, args.z1), max(args.z0, args.z1)
    s0 = FState(args.z0, tuple(args.F0))
    command = "painleve sigma" if sigma else "ode3 integrate"
    try:
        traj = integrate_span(s0, (lo, hi), args.rtol, args.atol, args.max_drift,
                              args.pole_guard, args.dz)
    except DriftError as exc:
        checks = [check_entry("invariant_drift", max(exc.drift if isinstance(exc.drift, tuple)
                                                     else (exc.drift,)), args.max_drift,
                              z=exc.z)]
        return emit(args, command, "six-ODE system", checks, {"error": str(exc)})
    rows = trajectory_rows(traj)
    if args.csv:
        write_atomic(args.csv, csv_text(CSV_HEADER, rows))
    dr, dd = traj.drift()
    checks = [check_entry("drift_minusR2", dr, args.max_drift),
              check_entry("drift_D", dd, args.max_drift)]
    data: dict[str, Any] = {"meta": traj.meta, "F_end": traj.F[-1] if args.z1 >= args.z0
                            else traj.F[0], "samples": traj.z.size}
    if sigma:
        sd = sigma_data_from_F(traj)
        checks.append(check_entry("sigma_residual", np.max(sigma_residual_data(sd)),
                                  args.tolerances.fd))
        checks.append(check_entry("position23_consistency", sd.consistency, args.max_drift * 10))
        pp = sd.parameters
        data["R2"], data["D"] = sd.R2, sd.D
        data["v_squared"] = pp.roots
    return emit(args, command, "six-ODE system", checks, data)


def cmd_ode3_invariants(args: argparse.Namespace) -> int:
    if len(args.F0) != 6:
        raise InputError("--F0 needs six comma-separated values")
    m, d = invariants(args.F0)
    return emit(args, "ode3 invariants", "six-ODE system", [],
                {"minusR2": m, "D": d, "F": args.F0})


def cmd_painleve_reconstruct(args: argparse.Namespace) -> int:
    if len(args.F0) != 6:
        raise InputError("--F0 needs six comma-separated values")
    s0 = FState(args.z0, tuple(args.F0))
    traj = integrate_span(s0, (args.z0 - args.half_width, args.z0 + args.half_width),
                          args.rtol, args.atol, args.max_drift, args.pole_guard, args.dz)
    mode = {"auto": None, "on": True, "off": False}[args.complex_mode]
    rec, resid = round_trip(traj, complex_mode=mode)
    checks = [check_entry("round_trip_sup", resid["sup_error"], args.tolerances.fd)]
    for k in ("F12", "F13", "F23", "F32"):
        checks.append(check_entry(f"z0_consistency_{k}", resid[k], args.tolerances.fd))
    if args.csv:
        write_atomic(args.csv, csv_text(CSV_HEADER, trajectory_rows(rec)))
    return emit(args, "painleve reconstruct", "sigma-form inverse map", checks,
                {"max_imag": rec.meta["max_imag"], "complex_mode": rec.meta["complex_mode"]})


def cmd_painleve_params(args: argparse.Namespace) -> int:
    pp = painleve_parameters(args.R2, args.D)
    tol = args.tolerances.algebraic
    scale = max(1.0, abs(args.R2) ** 3, args.D**2)
    checks = [check_entry(f"vieta_{k}", v, tol * scale) for k, v in
              zip(("sum", "pairs", "product"), pp.vieta)]
    checks.append(check_entry("back_substitution", pp.back_substitution, tol * scale))
    return emit(args, "painleve params", "parameter cubic", checks,
                {"R2": args.R2, "D": args.D, "roots": pp.roots})


def cmd_lame_eigen(args: argparse.Namespace) -> int:
    if args.n == 2 and args.C1 is not None:
        model = _n2_model(args)
        beta = model.rotation_field()
        p = np.asarray(args.point if args.point else [3.0, 1.0], dtype=float)
        prov = model.provenance
    else:
        model = _eps_model(args)
        beta, _ = epsilon_fields(model)
        p = np.asarray(args.point if args.point else 2.0 ** np.arange(model.n), dtype=float)
        prov = beta.provenance
    vm = v_matrix(beta, p)
    tol = args.tolerances.algebraic
    rel = max(np.max(np.abs(vm.matrix @ vm.eigenvectors[:, k]
                            - vm.eigenvalues[k] * vm.eigenvectors[:, k]))
              for k in range(len(vm.eigenvalues)))
    checks = [check_entry("eigen_relation", rel, tol),
              check_entry("zero_diagonal", np.max(np.abs(np.diag(vm.matrix))), 0.0)]
    return emit(args, "lame eigen", prov, checks,
                {"point": p, "V": vm.matrix, "eigenvalues": vm.eigenvalues,
                 "eigenvectors": vm.eigenvectors})


def _velocity_field(model: EpsilonModel) -> VectorFieldSample:
    return VectorFieldSample(model.velocity, ("eps-velocity",), model.velocity_jacobian)


def cmd_hierarchy_symmetry(args: argparse.Namespace) -> int:
    model = _eps_model(args)
    conn = epsilon_connection(model)
    c = ProductField.canonical(model.n)
    X = _velocity_field(model)
    pts = _points(args, model.n, nonzero=False)
    vals = [symmetry_residual(conn, c, X, p) for p in pts]
    tol = args.tol if args.tol is not None else args.tolerances.fd
    k = int(np.argmax(vals))
    return emit(args, "hierarchy symmetry", f"epsilon(n={model.n}, eps={model.eps:g})",
                [check_entry("symmetry_residual", vals[k], tol, point=pts[k])],
                {"points": len(pts)})


def cmd_hierarchy_recurse(args: argparse.Namespace) -> int:
    model = _eps_model(args)
    n = model.n
    beta, H = epsilon_fields(model)
    nat = natural_connection(beta, H)
    dual = dual_connection(beta, H)
    c = ProductField.canonical(n)
    base = np.asarray(args.base if args.base else 2.0 ** np.arange(n), dtype=float)
    target = np.asarray(args.target if args.target else base + 0.2 * np.sin(np.arange(1, n + 1)),
                        dtype=float)
    X_base = np.asarray(args.x_base if args.x_base else np.zeros(n), dtype=float)
    prev = unit_vector_field(n) if args.prev == "e" else _velocity_field(model)
    E = euler_vector_field(n)
    conn2 = dual if args.scheme == "dual" else None
    rng = np.random.default_rng(args.seed)
    ref = recursion_step(args.scheme, nat, conn2, c, E, prev, base, X_base, target,
                         steps=args.steps)
    spread = 0.0
    for _ in range(args.paths):
        way = [base + rng.uniform(-0.2, 0.2, n) * (1 + np.abs(target - base))]
        val = recursion_step(args.scheme, nat, conn2, c, E, prev, base, X_base, target,
                             waypoints=way, steps=args.steps)
        spread = max(spread, float(np.max(np.abs(val - ref))))
    field = recursion_field(args.scheme, nat, conn2, c, E, prev, base, X_base,
                            steps=args.steps)
    sym = symmetry_residual(nat, c, field, target)
    checks = [check_entry("path_independence", spread, args.path_tol),
              check_entry("symmetry_residual", sym, args.tolerances.fd)]
    return emit(args, "hierarchy recurse", beta.provenance, checks,
                {"scheme": args.scheme, "value": ref, "base": base, "target": target})


def cmd_hierarchy_commute(args: argparse.Namespace) -> int:
    model = _eps_model(args)
    n = model.n
    c = ProductField.canonical(n)
    base = np.asarray(args.base if args.base else 0.5 * 2.0 ** np.arange(n), dtype=float)
    state = GridState.smooth(base, args.amplitude, args.m)
    if args.Y == "e":
        Y: Callable = lambda u: np.ones(n)  # noqa: E731
    else:
        Y = lambda u: 0.25 * np.asarray(u) ** 2  # noqa: E731
    study = commutator_study(c, model.velocity, Y, state, args.dts, args.horizon, args.scheme)
    if args.csv:
        write_atomic(args.csv, csv_text(("dt", "commutator"), list(zip(study.dts, study.norms))))
    min_ratio = min(study.ratios)
    checks = [{"name": "commutator_ratio", "value": min_ratio, "tolerance": args.min_ratio,
               "pass": bool(min_ratio >= args.min_ratio), "comparison": ">="}]
    return emit(args, "hierarchy commute", f"epsilon(n={n}, eps={model.eps:g})", checks,
                {"dts": study.dts, "norms": study.norms, "ratios": study.ratios,
                 "order": study.order, "Y": args.Y, "scheme": args.scheme})


# --------------------------------------------------------------------------
# argument parser
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--report", help="JSON report path (default: stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol-fd", type=float, default=None)
    p.add_argument("--tol-algebraic", type=float, default=None)
    p.add_argument("--delta-sep", type=float, default=None)


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--C1", type=float, default=None)
    p.add_argument("--C2", type=float, default=None)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--complex", action="store_true")
    p.add_argument("--point", type=float_list, default=None)
    p.add_argument("--points", type=int, default=20)


def _ode_args(p: argparse.ArgumentParser, z1: bool = True) -> None:
    p.add_argument("--z0", type=float, required=True)
    if z1:
        p.add_argument("--z1", type=float, required=True)
    p.add_argument("--F0", type=float_list, required=True)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--max-drift", type=float, default=1e-9)
    p.add_argument("--pole-guard", type=float, default=1e-3)
    p.add_argument("--dz", type=float, default=1e-3)
    p.add_argument("--csv", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biflat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"biflat {__version__}")
    parser.add_argument("--manifest", help="run the command described by a JSON manifest")
    sub = parser.add_subparsers(dest="group")

    models = sub.add_parser("models", help="build a closed-form model and check it")
    msub = models.add_subparsers(dest="action", required=True)
    p = msub.add_parser("epsilon")
    _common(p)
    _model_args(p)
    p.set_defaults(func=cmd_models_epsilon)
    p = msub.add_parser("n2")
    _common(p)
    _model_args(p)
    p.add_argument("--d", type=float, default=None, help="degree of the dual Lamé solution")
    p.add_argument("--degree-sign", type=int, choices=(-1, 1), default=1,
                   help="Euler convention E(H) = sign*d*H for the dual Lamé check")
    p.set_defaults(func=cmd_models_n2)

    p = sub.add_parser("verify", help="full bi-flat suite at sampled points")
    _common(p)
    _model_args(p)
    p.add_argument("--model", choices=("epsilon", "n2"), default="epsilon")
    p.add_argument("--checks", type=lambda s: [x for x in s.split(",") if x], default=None)
    p.set_defaults(func=cmd_verify)

    ode3 = sub.add_parser("ode3", help="the n=3 six-ODE system")
    osub = ode3.add_subparsers(dest="action", required=True)
    p = osub.add_parser("integrate")
    _common(p)
    _ode_args(p)
    p.set_defaults(func=cmd_ode3_integrate)
    p = osub.add_parser("invariants")
    _common(p)
    p.add_argument("--F0", type=float_list, required=True)
    p.set_defaults(func=cmd_ode3_invariants)

    pain = sub.add_parser("painleve", help="sigma form maps and parameters")
    psub = pain.add_subparsers(dest="action", required=True)
    p = psub.add_parser("sigma")
    _common(p)
    _ode_args(p)
    p.set_defaults(func=lambda a: cmd_ode3_integrate(a, sigma=True))
    p = psub.add_parser("reconstruct")
    _common(p)
    _ode_args(p, z1=False)
    p.add_argument("--half-width", type=float, default=0.1)
    p.add_argument("--complex-mode", choices=("auto", "on", "off"), default="auto")
    p.set_defaults(func=cmd_painleve_reconstruct)
    p = psub.add_parser("params")
    _common(p)
    p.add_argument("--R2", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.set_defaults(func=cmd_painleve_params)

    lame = sub.add_parser("lame", help="Lamé data")
    lsub = lame.add_subparsers(dest="action", required=True)
    p = lsub.add_parser("eigen")
    _common(p)
    _model_args(p)
    p.set_defaults(func=cmd_lame_eigen)

    hier = sub.add_parser("hierarchy", help="symmetries, recursion and flows")
    hsub = hier.add_subparsers(dest="action", required=True)
    p = hsub.add_parser("symmetry")
    _common(p)
    _model_args(p)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_hierarchy_symmetry)
    p = hsub.add_parser("recurse")
    _common(p)
    _model_args(p)
    p.add_argument("--scheme", choices=("principal", "equivalent", "dual"), default="principal")
    p.add_argument("--prev", choices=("e", "velocity"), default="e")
    p.add_argument("--base", type=float_list, default=None)
    p.add_argument("--target", type=float_list, default=None)
    p.add_argument("--x-base", type=float_list, default=None)
    p.add_argument("--paths", type=int, default=5)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--path-tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_hierarchy_recurse)
    p = hsub.add_parser("commute")
    _common(p)
    _model_args(p)
    p.add_argument("--Y", choices=("e", "nonsym"), default="e")
    p.add_argument("--m", type=int, default=128)
    p.add_argument("--base", type=float_list, default=None)
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--dts", type=float_list, default=[0.02, 0.01, 0.005])
    p.add_argument("--horizon", type=float, default=0.5)
    p.add_argument("--scheme", choices=("spectral", "fd4"), default="spectral")
    p.add_argument("--min-ratio", type=float, default=6.0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_hierarchy_commute)
    return parser


# --------------------------------------------------------------------------
# manifests
# --------------------------------------------------------------------------

_NUM = {"type": "number"}
_NUMS = {"type": "array", "items": {"type": "number"}}

MANIFEST_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "seed"],
    "properties": {
        "command": {"type": "string", "enum": [
            "models epsilon", "models n2", "verify", "ode3 integrate", "ode3 invariants",
            "painleve sigma", "painleve reconstruct", "painleve params", "lame eigen",
            "hierarchy symmetry", "hierarchy recurse", "hierarchy commute"]},
        "seed": {"type": "integer"},
        "model": {"type": "string", "enum": ["epsilon", "n2"]},
        "n": {"type": "integer", "minimum": 2},
        "eps": _NUM, "C1": _NUM, "C2": _NUM, "a": _NUM, "b": _NUM, "d": _NUM,
        "complex": {"type": "boolean"},
        "degree_sign": {"type": "integer", "enum": [-1, 1]},
        "point": _NUMS,
        "points": {"type": "integer", "minimum": 1},
        "checks": {"type": "array", "items": {"type": "string", "enum": list(ALL_CHECKS)}},
        "tolerances": {
            "type": "object", "additionalProperties": False,
            "properties": {"fd": _NUM, "algebraic": _NUM, "delta_sep": _NUM},
        },
        "z0": _NUM, "z1": _NUM,
        "F0": {"type": "array", "items": {"type": "number"}, "minItems": 6, "maxItems": 6},
        "rtol": _NUM, "atol": _NUM, "tol": _NUM, "max_drift": _NUM, "pole_guard": _NUM,
        "dz": _NUM, "half_width": _NUM,
        "complex_mode": {"type": "string", "enum": ["auto", "on", "off"]},
        "R2": _NUM, "D": _NUM,
        "scheme": {"type": "string"},
        "prev": {"type": "string", "enum": ["e", "velocity"]},
        "base": _NUMS, "target": _NUMS, "x_base": _NUMS,
        "paths": {"type": "integer", "minimum": 1},
        "steps": {"type": "integer", "minimum": 1},
        "path_tol": _NUM,
        "Y": {"type": "string", "enum": ["e", "nonsym"]},
        "m": {"type": "integer", "minimum": 16},
        "amplitude": _NUM, "dts": _NUMS, "horizon": _NUM, "min_ratio": _NUM,
        "outputs": {
            "type": "object", "additionalProperties": False,
            "properties": {"report": {"type": "string"}, "csv": {"type": "string"}},
        },
    },
}


def manifest_to_argv(manifest: dict) -> list[str]:
    """Validate a manifest against :data:`MANIFEST_SCHEMA` and translate it to flags."""
    import jsonschema

    try:
        jsonschema.validate(manifest, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid manifest: {exc.message}") from exc
    argv = manifest["command"].split()
    for key, value in manifest.items():
        if key == "command":
            continue
        if key == "tolerances":
            for tk, tv in value.items():
                argv += [f"--{'tol-' if tk != 'delta_sep' else ''}{tk.replace('_', '-')}",
                         repr(float(tv))]
            continue
        if key == "outputs":
            for ok_, ov in value.items():
                argv += [f"--{ok_}", ov]
            continue
        flag = "--" + (key if key[0].isupper() else key.replace("_", "-"))
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, list):
            argv += [flag, ",".join(str(v) for v in value)]
        else:
            argv += [flag, str(value)]
    return argv


def _tolerances(args: argparse.Namespace) -> Tolerances:
    tol = Tolerances.from_env()
    if getattr(args, "tol_fd", None) is not None:
        tol = replace(tol, fd=args.tol_fd)
    if getattr(args, "tol_algebraic", None) is not None:
        tol = replace(tol, algebraic=args.tol_algebraic)
    if getattr(args, "delta_sep", None) is not None:
        tol = replace(tol, delta_sep=args.delta_sep)
    return tol


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.manifest:
            with open(args.manifest) as fh:
                manifest = json.load(fh)
            args = parser.parse_args(manifest_to_argv(manifest))
        if not hasattr(args, "func"):
            parser.print_help(sys.stderr)
            return EXIT_INVALID
        args.tolerances = _tolerances(args)
        return int(args.func(args))
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_INVALID
        return EXIT_OK if code == 0 else EXIT_INVALID
    except (BiflatError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"biflat: error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
