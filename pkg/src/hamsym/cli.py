"""Command-line interface: ``hamsym classify | verify | integrate``.

Exit codes: 0 pass, 1 an asserted identity failed, 2 bad input,
3 runtime or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from dataclasses import field as dc_field
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import HamsymError, ParseError, UnsupportedGeometryError
from .flow import FLOW_TIMES, canonoid_flow_check, flow_map, integrate, monitor, probe_points, pullback_residual
from .geometry import Chart, Geometry, OneForm, flat, parse_field, parse_one_form
from .sampling import DEFAULT_BOUNDS, DEFAULT_DELTA, DEFAULT_SAMPLES, SampleDomain, default_seed
from .symmetry import (
    HamiltonianSystem,
    PredicateResult,
    Tolerances,
    _all,
    check_scaling_primitive,
    classify,
    is_canonoid_generator,
    is_constant_of_motion,
    is_dissipated_quantity,
    is_infinitesimal_symmetry,
    noether_check,
    scaling_degree,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3
THEOREMS = ("noether", "dissipation", "scaling-commutator", "canonoid", "primitive", "quotient", "flow-hamiltonian")
LEMMA_TOL = 1e-8
BOX_WIDENING = 100.0


class InputError(Exception):
    pass


@dataclass
class JobSpec:
    geometry: str | None = None
    n: int | None = None
    hamiltonian: str | None = None
    field: str | None = None
    functions: list[str] = dc_field(default_factory=list)
    samples: int = DEFAULT_SAMPLES
    seed: int | None = None
    tol: float = 1e-9
    tol_flow: float = 1e-5
    domain: list[str] = dc_field(default_factory=list)
    format: str | None = None
    verify: str | None = None
    s: float | None = None
    h: float | None = None
    x0: str | None = None
    monitor: list[str] = dc_field(default_factory=list)
    mode: str | None = None
    form: str | None = None
    degree: float | None = None

    @classmethod
    def load(cls, path: str) -> "JobSpec":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read job file {path}: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "JobSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known - {"description"}
        if unknown:
            raise InputError(f"unknown job keys: {', '.join(sorted(unknown))}")
        data = {k: v for k, v in data.items() if k in known}
        for key in ("functions", "domain", "monitor"):
            if isinstance(data.get(key), str):
                data[key] = [data[key]]
        return cls(**data)

    def merged(self, args: argparse.Namespace) -> "JobSpec":
        """Command-line flags override values from a job file."""
        out = JobSpec(**{f.name: getattr(self, f.name) for f in fields(self)})
        for f in fields(self):
            value = getattr(args, f.name, None)
            if value is None or value == []:
                continue
            setattr(out, f.name, value)
        return out

    # -- construction of library objects

    def chart(self) -> Chart:
        if self.geometry is None or self.n is None:
            raise InputError("--geometry and --n are required")
        try:
            return Chart(Geometry(self.geometry), int(self.n))
        except ValueError as exc:
            raise InputError(str(exc)) from exc

    def sample_domain(self, chart: Chart) -> SampleDomain:
        bounds = [DEFAULT_BOUNDS] * chart.dim
        if self.domain:
            parsed = []
            for text in self.domain:
                try:
                    lo, hi = (float(v) for v in text.split(","))
                except ValueError as exc:
                    raise InputError(f"--domain expects 'lo,hi', got {text!r}") from exc
                parsed.append((lo, hi))
            if len(parsed) == 1:
                parsed *= chart.dim
            if len(parsed) != chart.dim:
                raise InputError(f"--domain given {len(parsed)} times; the chart has {chart.dim} coordinates")
            bounds = parsed
        seed = default_seed() if self.seed is None else int(self.seed)
        return SampleDomain(tuple(bounds), int(self.samples), DEFAULT_DELTA, seed)

    def tolerances(self) -> Tolerances:
        return Tolerances(exact=float(self.tol), flow=float(self.tol_flow))

    def system(self) -> HamiltonianSystem:
        chart = self.chart()
        if self.hamiltonian is None:
            raise InputError("--hamiltonian is required")
        return HamiltonianSystem(chart, chart.parse(self.hamiltonian), self.sample_domain(chart), self.tolerances())


# -- output --------------------------------------------------------------------------------


def _emit(payload: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    rows = _rows(payload.get("predicates", []))
    if fmt == "csv":
        out.write("name,verdict,max_residual\n")
        for depth, p in rows:
            out.write(f"{'/' * depth}{p['name']},{str(p['verdict']).lower()},{p['max_residual']:.17g}\n")
        return
    for key, value in payload.items():
        if key != "predicates" and not isinstance(value, (dict, list)):
            out.write(f"{key}: {value}\n")
    for depth, p in rows:
        mark = "PASS" if p["verdict"] else "FAIL"
        line = f"{'  ' * depth}[{mark}] {p['name']}  residual={p['max_residual']:.3g}"
        if p.get("witness"):
            line += f"  witness={tuple(p['witness'])}"
        out.write(line + "\n")


def _rows(preds, depth=0):
    for p in preds:
        yield depth, p
        yield from _rows(p.get("parts", []), depth + 1)


def _summary(job: JobSpec, sys: HamiltonianSystem, theorem: str, predicates: list[PredicateResult], **extra) -> dict:
    payload = {
        "theorem": theorem,
        "geometry": sys.kind.value,
        "n": sys.chart.n,
        "hamiltonian": sys.chart.format(sys.H),
        "verdict": all(p.verdict for p in predicates),
    }
    payload.update(extra)
    payload["predicates"] = [p.to_dict() for p in predicates]
    return payload


# -- commands --------------------------------------------------------------------------------


def cmd_classify(job: JobSpec, out) -> int:
    sys_ = job.system()
    if not job.field:
        raise InputError("classify needs exactly one --field")
    X = parse_field(sys_.chart, job.field)
    report = classify(sys_, X)
    payload = report.to_dict()
    _emit(payload, job.format, out)
    return EXIT_PASS


def _need(job: JobSpec, theorem: str, **required) -> None:
    missing = [name for name, ok in required.items() if not ok]
    if missing:
        raise InputError(f"verify {theorem} needs: {', '.join(missing)}")


def _verify_noether(job, sys_):
    _need(job, "noether", **{"--function": job.functions})
    preds, agree = [], []
    for text in job.functions:
        result = noether_check(sys_, sys_.parse(text))
        agree.append(result.agree)
        preds.append(
            PredicateResult(
                f"noether[{text}]",
                result.forward.verdict and result.reverse.verdict,
                max(result.forward.max_residual, result.reverse.max_residual),
                result.forward.witness or result.reverse.witness,
                (result.forward, result.reverse),
            )
        )
    return preds, {"biconditional_agrees": all(agree)}


def _verify_dissipation(job, sys_):
    _need(job, "dissipation", **{"--function": job.functions})
    preds = []
    for text in job.functions:
        r = is_dissipated_quantity(sys_, sys_.parse(text))
        preds.append(PredicateResult(f"dissipated[{text}]", r.verdict, r.max_residual, r.witness))
    extra = {"good": sys_.good}
    return preds, extra


def _verify_scaling(job, sys_):
    _need(job, "scaling-commutator", **{"--field": job.field})
    from .geometry import lie_bracket

    X = sys_.field(job.field)
    scaling = scaling_degree(sys_, X)
    preds = [scaling.as_predicate()]
    if scaling.degree is not None:
        lam = scaling.degree
        cmp = sys_.compare(lie_bracket(X, sys_.XH), sys_.XH * (lam - 1.0), LEMMA_TOL)
        preds.append(PredicateResult("[X, X_H] = (Lambda - 1) X_H", cmp.verdict, cmp.max_residual, cmp.witness))
        for i, R in enumerate(sys_.reeb):
            want = -1.0 if sys_.chart.has_z and i == 0 else 0.0
            cmp = sys_.compare(lie_bracket(X, R), R * want, LEMMA_TOL)
            preds.append(PredicateResult(f"[X, R{i}] = {want:g} R{i}", cmp.verdict, cmp.max_residual, cmp.witness))
    return preds, {"scaling_degree": scaling.degree}


def _verify_canonoid(job, sys_):
    _need(job, "canonoid", **{"--field": job.field})
    result = is_canonoid_generator(sys_, sys_.field(job.field))
    preds = [result.as_predicate()]
    if result.formula_check is not None:
        preds.append(result.formula_check)
    if result.K_invariance is not None:
        preds.append(result.K_invariance)
    return preds, {"canonoid": result.to_dict(sys_.chart)}


def _verify_primitive(job, sys_):
    if sys_.kind is not Geometry.COSYMPLECTIC:
        raise InputError("verify primitive applies to cosymplectic systems only")
    _need(job, "primitive", **{"--form or --field": job.form or job.field})
    if job.form:
        lam = parse_one_form(sys_.chart, job.form)
    else:
        lam = flat(sys_.field(job.field))
    degree = job.degree
    if degree is None:
        if not job.field:
            raise InputError("verify primitive needs --degree when only --form is given")
        degree = scaling_degree(sys_, sys_.field(job.field)).degree
        if degree is None:
            return [PredicateResult("field is a scaling symmetry", False, float("inf"))], {}
    result = check_scaling_primitive(sys_, lam, float(degree))
    preds = [result.check]
    extra = {"primitive": " ; ".join(sys_.chart.format(c) for c in lam.components), "degree": float(degree)}
    if result.reconstructed is not None:
        extra["reconstructed_field"] = result.reconstructed.text()
        if job.field:
            cmp = sys_.compare(result.reconstructed, sys_.field(job.field))
            preds.append(PredicateResult("reconstructed X = field", cmp.verdict, cmp.max_residual, cmp.witness))
    return preds, extra


def _verify_quotient(job, sys_):
    if not sys_.chart.has_z:
        raise InputError("verify quotient applies to contact and cocontact systems only")
    if len(job.functions) != 2:
        raise InputError("verify quotient needs exactly two --function values (numerator, denominator)")
    f, g = (sys_.parse(t) for t in job.functions)
    preds = [is_dissipated_quantity(sys_, f), is_dissipated_quantity(sys_, g)]
    q = ex.div(f, g)
    preds.append(is_constant_of_motion(sys_, q))
    x0 = _point(job, sys_.chart) if job.x0 else np.ones(sys_.chart.dim)
    s = 1.0 if job.s is None else float(job.s)
    traj = integrate(sys_.chart, sys_.dynamics, x0, s, job.h)
    if traj.truncated:
        raise HamsymError(traj.error)
    drift = monitor(traj, q, "conserved").drift
    preds.append(PredicateResult("f/g conserved along trajectory", drift <= 1e-6, drift))
    return preds, {}


def _verify_flow(job, sys_):
    _need(job, "flow-hamiltonian", **{"--field": job.field})
    X = sys_.field(job.field)
    times = FLOW_TIMES if job.s is None else (float(job.s),)
    tol = float(job.tol_flow)
    preds = []
    symmetric = is_infinitesimal_symmetry(sys_, X)
    probes = probe_points(sys_.chart, X.components + sys_.XH.components + (sys_.H,), domain=sys_.domain.with_(samples=20))
    H0, _ = ex.evaluate_many((sys_.H,), probes)
    for s in times:
        if symmetric.verdict:
            phi = flow_map(sys_.chart, X, s, job.h)
            jac, moved = phi.jacobian(probes), phi.apply_many(probes)
            parts = []
            for name, form in sys_.structure.forms().items():
                r = pullback_residual(phi, form, probes=probes, jac=jac, moved=moved)
                parts.append(PredicateResult(f"phi^* {name} = {name}", r <= tol, r))
            Hs, _ = ex.evaluate_many((sys_.H,), moved)
            dH = float(np.max(np.abs(Hs - H0)))
            parts.append(PredicateResult("H o phi = H", dH <= 1e-6, dH))
            preds.append(_all(f"canonical(s={s:g})", parts))
        result = canonoid_flow_check(sys_, X, s, probes, job.h)
        preds.append(result.as_predicate(tol))
    return preds, {"infinitesimal_symmetry": symmetric.verdict}


_VERIFIERS = {
    "noether": _verify_noether,
    "dissipation": _verify_dissipation,
    "scaling-commutator": _verify_scaling,
    "canonoid": _verify_canonoid,
    "primitive": _verify_primitive,
    "quotient": _verify_quotient,
    "flow-hamiltonian": _verify_flow,
}


def cmd_verify(job: JobSpec, theorem: str | None, out) -> int:
    theorem = theorem or job.verify
    if theorem not in _VERIFIERS:
        raise InputError(f"unknown theorem {theorem!r}; choose from {', '.join(THEOREMS)}")
    sys_ = job.system()
    try:
        preds, extra = _VERIFIERS[theorem](job, sys_)
    except UnsupportedGeometryError as exc:
        raise InputError(str(exc)) from exc
    payload = _summary(job, sys_, theorem, preds, **extra)
    _emit(payload, job.format, out)
    return EXIT_PASS if payload["verdict"] else EXIT_FAIL


def _point(job: JobSpec, chart: Chart) -> np.ndarray:
    try:
        values = [float(v) for v in job.x0.split(",")]
    except (AttributeError, ValueError) as exc:
        raise InputError(f"--x0 expects comma-separated numbers, got {job.x0!r}") from exc
    if len(values) != chart.dim:
        raise InputError(f"--x0 needs {chart.dim} values ({', '.join(chart.names)}), got {len(values)}")
    return np.array(values)


def cmd_integrate(job: JobSpec, out) -> int:
    sys_ = job.system()
    chart = sys_.chart
    _need(job, "integrate", **{"--x0": job.x0})
    x0 = _point(job, chart)
    X = parse_field(chart, job.field) if job.field else sys_.dynamics
    s = 1.0 if job.s is None else float(job.s)
    if job.h is not None and not job.h > 0:
        raise InputError("--h must be positive")
    job.mode = job.mode or "conserved"
    if job.mode not in ("conserved", "dissipated"):
        raise InputError("--mode must be 'conserved' or 'dissipated'")
    if job.mode == "dissipated" and job.monitor and not chart.has_z:
        raise InputError("dissipated monitoring needs a contact or cocontact system")
    box = [(lo - BOX_WIDENING * (hi - lo), hi + BOX_WIDENING * (hi - lo)) for lo, hi in sys_.domain.bounds]
    box = [(min(lo, v), max(hi, v)) for (lo, hi), v in zip(box, x0)]
    traj = integrate(chart, X, x0, s, job.h, box, rate=sys_.RH)
    monitors = []
    drifts = {}
    for text in job.monitor:
        f = chart.parse(text)
        m = monitor(traj, f, job.mode)
        monitors.append((text, m.series))
        drifts[text] = m.drift
    closure = float(np.max(np.abs(traj.endpoint - x0)))
    if job.format == "json":
        payload = {
            "geometry": chart.kind.value,
            "n": chart.n,
            "s": traj.s.tolist(),
            "points": traj.points.tolist(),
            "truncated": traj.truncated,
            "error": traj.error,
            "closure": closure,
            "drift": drifts,
            "mode": job.mode,
        }
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        parts = [f"closure={closure:.17g}"] + [f"drift[{k}]={v:.17g} ({job.mode})" for k, v in drifts.items()]
        out.write(traj.to_csv(monitors, "summary: " + " ".join(parts)))
    return EXIT_RUNTIME if traj.truncated else EXIT_PASS


# -- argument parsing ------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--job", help="JobSpec JSON file; flags override its values")
    p.add_argument("--geometry", choices=[g.value for g in Geometry])
    p.add_argument("--n", type=int)
    p.add_argument("--hamiltonian")
    p.add_argument("--field", help="vector field components separated by ';' in chart order")
    p.add_argument("--function", dest="functions", action="append", default=[])
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--tol-flow", dest="tol_flow", type=float)
    p.add_argument("--domain", action="append", default=[], help="'lo,hi', once for all coordinates or once per coordinate")
    p.add_argument("--format", choices=["json", "csv", "human"])
    p.add_argument("--s", type=float)
    p.add_argument("--h", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamsym", description="Symmetries of Hamiltonian systems on symplectic, cosymplectic, contact and cocontact charts.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", help="run every symmetry predicate on one vector field")
    _common(p)
    p = sub.add_parser("verify", help="check one theorem on the given inputs")
    p.add_argument("theorem", nargs="?", choices=THEOREMS)
    _common(p)
    p.add_argument("--x0")
    p.add_argument("--form", help="1-form components separated by ';' (primitive check)")
    p.add_argument("--degree", type=float, help="scaling degree for the primitive check")
    p = sub.add_parser("integrate", help="integrate the dynamics (or --field) and print a CSV trajectory")
    _common(p)
    p.add_argument("--x0")
    p.add_argument("--monitor", action="append", default=[])
    p.add_argument("--mode", choices=["conserved", "dissipated"])
    return parser


EXPRESSION_OPTIONS = ("--hamiltonian", "--field", "--function", "--monitor", "--form", "--x0", "--domain")


def _attach_values(argv: Sequence[str]) -> list[str]:
    """Glue ``--function -z`` into ``--function=-z`` so argparse keeps leading minus signs."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in EXPRESSION_OPTIONS:
            value = next(it, None)
            out.append(tok if value is None else f"{tok}={value}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    argv = _attach_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        job = JobSpec.load(args.job) if args.job else JobSpec()
        job = job.merged(args)
        job.format = job.format or ("csv" if args.command == "integrate" else "json")
        if args.command == "classify":
            return cmd_classify(job, out)
        if args.command == "verify":
            return cmd_verify(job, args.theorem, out)
        return cmd_integrate(job, out)
    except (InputError, ParseError, UnsupportedGeometryError, ValueError, TypeError) as exc:
        print(f"hamsym: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HamsymError, ArithmeticError) as exc:
        print(f"hamsym: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
