"""Command-line front end: ``reglab {dilog,kronecker,check,heckeL,stark}``.

Reports are JSON. Exit codes: 0 when every requested assertion passes, 1 when a
check fails, 2 for usage errors, 3 for a library error (the JSON error object
names the failing stage).
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import replace
from fractions import Fraction
from importlib import resources

from . import __version__
from .checks import SUITES, run_suite, standard_lattices
from .errors import ConfigError, ReglabError
from .heckefield import (ImagQuadField, PartialLSpec, hecke_characters, partial_L_deriv0,
                         partial_L_direct, partial_L_kronecker)
from .kronecker import (DEFAULT_SETTINGS, EvalSettings, J, Jq, Route, Rq, bloch_wigner, dilog,
                        elliptic_dilog_Dq, k21_crosscheck, kronecker_continued)
from .lattice import TorsionCoord, complex_to_json, make_lattice
from .stark import (DEFAULT_MAX_DEN, _jsonable, config_hash, pipeline_plan, recognize_quadratic,
                    run_stark_pipeline, validate_config)

log = logging.getLogger("reglab")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3
BUNDLED = {"qi_mod3": "qi_mod3.json"}

# assertion thresholds for ``stark``
STARK_LIMITS = {"dedekind_dual_route": 1e-8, "twist_plus": 1e-7, "twist_minus": 1e-7,
                "minkowski_conjugation": 1e-10}


def parse_complex(text: str) -> complex:
    """Accept Python-style or i-suffixed complex literals ("0.5", "1+0i", "-2.5j")."""
    t = text.strip().replace(" ", "")
    if not re.fullmatch(r"[0-9eE.+\-ij()]+", t or "x"):
        raise argparse.ArgumentTypeError(f"malformed complex literal {text!r}")
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed complex literal {text!r}") from None


def parse_torsion(text: str) -> TorsionCoord:
    try:
        a, b = text.split(",")
        return TorsionCoord(Fraction(a), Fraction(b))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b' with rational a, b; got {text!r}") from None


def settings_from_args(args) -> EvalSettings:
    overrides = {}
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.shells is not None:
        overrides["shell_radius"] = args.shells
    if args.max_q_terms is not None:
        overrides["max_q_terms"] = args.max_q_terms
    if getattr(args, "route", None):
        overrides["route"] = Route(args.route)
    try:
        return replace(DEFAULT_SETTINGS, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def envelope(command: str, args, settings: EvalSettings, result: dict, config: dict | None = None) -> dict:
    cfg = config if config is not None else {k: v for k, v in sorted(vars(args).items())
                                             if k not in ("func", "out", "log_level")}
    cfg = json.loads(json.dumps(cfg, default=_jsonable))
    return {
        "tool": "reglab",
        "version": __version__,
        "command": command,
        "config_hash": config_hash(cfg),
        "seed": args.seed,
        "config": cfg,
        "settings": settings.to_json(),
        "result": result,
    }


def emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_dilog(args) -> int:
    settings = settings_from_args(args)
    rows = []
    for z in args.z:
        row = {"z": complex_to_json(z), "Li2": complex_to_json(dilog(z)),
               "D": repr(bloch_wigner(z)), "J": repr(J(z))}
        if args.q is not None and z != 0:
            row["Dq"] = repr(elliptic_dilog_Dq(z, args.q, settings))
            row["Jq"] = repr(Jq(z, args.q, settings))
            row["Rq"] = complex_to_json(Rq(z, args.q, settings))
        rows.append(row)
    emit(envelope("dilog", args, settings, {"values": rows}), args.out)
    return EXIT_OK


def _lattice_from_args(args):
    if args.tau is not None:
        return make_lattice(1, args.tau)
    return standard_lattices()[args.lattice]


def cmd_kronecker(args) -> int:
    settings = settings_from_args(args)
    lat = _lattice_from_args(args)
    result = {"lattice": {"tau": complex_to_json(lat.tau)}, "points": []}
    for pt in args.point:
        u = pt.value(lat)
        entry = {"point": pt.to_json(), "u": complex_to_json(u)}
        if args.s is not None:
            x0 = args.x0 if args.x0 is not None else 0j
            entry["K"] = {"a": args.a, "s": complex_to_json(args.s), "x0": complex_to_json(x0),
                          "value": complex_to_json(kronecker_continued(args.a, u, x0, args.s, lat, settings))}
        else:
            entry["k21"] = k21_crosscheck(u, lat, settings).to_json()
        result["points"].append(entry)
    emit(envelope("kronecker", args, settings, result), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    settings = settings_from_args(args)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = [run_suite(n, args.seed, settings) for n in names]
    summary = {r.suite: "pass" if r.passed else "fail" for r in results}
    emit(envelope("check", args, settings, {"summary": summary,
                                              "suites": [r.to_json() for r in results]}), args.out)
    for r in results:
        w = r.worst
        log.info("%s: %s (%d checks, worst %s = %.3g)", r.suite, summary[r.suite], len(r.checks),
                 w.name, w.residual)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def cmd_heckeL(args) -> int:
    settings = settings_from_args(args)
    K = ImagQuadField(args.D)
    chars = hecke_characters(K, args.modulus)
    if not chars:
        raise ConfigError(f"no Hecke character of the required type modulo {args.modulus}")
    if not 0 <= args.phi_index < len(chars):
        raise ConfigError(f"phi index {args.phi_index} out of range ({len(chars)} characters)")
    hecke = chars[args.phi_index]
    rows, worst = [], 0.0
    for cls in hecke.rc.quotient.elements:
        spec = PartialLSpec(hecke, cls)
        kron = partial_L_kronecker(spec, args.s, 1.0, settings)
        row = {"class": list(cls), "kronecker": complex_to_json(kron),
               "deriv0": complex_to_json(partial_L_deriv0(spec, 1.0, settings))}
        if not args.dry_run:
            direct = partial_L_direct(spec, args.s, args.norm_bound)
            rel = abs(direct - kron) / max(abs(kron), 1e-300)
            worst = max(worst, rel)
            row.update(direct=complex_to_json(direct), relative_error=rel)
        rows.append(row)
    result = {"hecke": hecke.to_json(), "s": complex_to_json(args.s), "norm_bound": args.norm_bound,
              "classes": rows, "worst_relative_error": worst}
    emit(envelope("heckeL", args, settings, result), args.out)
    return EXIT_OK if worst < args.assert_rel else EXIT_FAILED


def load_config(path: str | None) -> dict:
    if path is None or path in BUNDLED:
        name = BUNDLED[path or "qi_mod3"]
        text = resources.files("reglab").joinpath("configs", name).read_text(encoding="utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def cmd_stark(args) -> int:
    config = load_config(args.config)
    if args.max_den is not None:
        config["max_den"] = args.max_den
    cfg = validate_config(config)
    overrides = dict(cfg.get("settings", {}))
    try:
        base = replace(DEFAULT_SETTINGS, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"settings overrides: {exc}") from exc
    args_settings = settings_from_args(args)
    settings = replace(base, **{k: getattr(args_settings, k) for k in ("tol", "shell_radius", "max_q_terms")
                                if getattr(args_settings, k) != getattr(DEFAULT_SETTINGS, k)})
    if args.dry_run:
        emit(envelope("stark", args, settings, {"plan": pipeline_plan(cfg)}, cfg), args.out)
        return EXIT_OK
    report = run_stark_pipeline(cfg, settings, seed=args.seed).to_json()
    failures = [k for k, lim in STARK_LIMITS.items() if not report["residuals"][k] < lim]
    report["assertions"] = {"limits": STARK_LIMITS, "failed": failures}
    emit(envelope("stark", args, settings, report, cfg), args.out)
    return EXIT_OK if not failures else EXIT_FAILED


def cmd_recognize(args) -> int:
    settings = settings_from_args(args)
    rec = recognize_quadratic(args.x, args.D, args.max_den or DEFAULT_MAX_DEN)
    emit(envelope("recognize", args, settings, rec.to_json()), args.out)
    return EXIT_OK if rec.kind != "none" else EXIT_FAILED


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="series truncation tolerance")
    common.add_argument("--shells", type=float, help="direct-sum shell radius")
    common.add_argument("--max-q-terms", type=int, help="q-series term cap")
    common.add_argument("--norm-bound", type=float, default=1e6, help="ideal norm bound for direct sums")
    common.add_argument("--max-den", type=int, help="denominator bound for rational recognition")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--dry-run", action="store_true", help="resolve inputs and print the plan only")
    common.add_argument("--log-level", default="WARNING")

    p = argparse.ArgumentParser(prog="reglab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"reglab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dilog", parents=[common], help="Li2, Bloch-Wigner D, J and the q-versions")
    d.add_argument("--z", type=parse_complex, action="append", required=True)
    d.add_argument("--q", type=parse_complex, help="nome for D_q, J_q and R_q")
    d.set_defaults(func=cmd_dilog)

    k = sub.add_parser("kronecker", parents=[common], help="K_{2,1} by every route, or K_a at s")
    k.add_argument("--lattice", choices=sorted(standard_lattices()), default="gaussian")
    k.add_argument("--tau", type=parse_complex)
    k.add_argument("--point", type=parse_torsion, action="append", required=True,
                   help="torsion point as 'a,b' in the lattice basis, e.g. 1/7,3/7")
    k.add_argument("--route", choices=[r.value for r in Route])
    k.add_argument("--s", type=parse_complex, help="evaluate K_a(x, x0, s) by the continued route")
    k.add_argument("--a", type=int, choices=(0, 1), default=1)
    k.add_argument("--x0", type=parse_complex)
    k.set_defaults(func=cmd_kronecker)

    c = sub.add_parser("check", parents=[common], help="run a named invariant suite")
    c.add_argument("suite", choices=sorted(SUITES) + ["all"])
    c.set_defaults(func=cmd_check)

    h = sub.add_parser("heckeL", parents=[common], help="partial Hecke L-values: direct vs Kronecker")
    h.add_argument("--D", type=int, default=-4)
    h.add_argument("--modulus", default="3")
    h.add_argument("--phi-index", type=int, default=0)
    h.add_argument("--s", type=parse_complex, default=2.0)
    h.add_argument("--assert-rel", type=float, default=1e-3)
    h.set_defaults(func=cmd_heckeL)

    s = sub.add_parser("stark", parents=[common], help="full Stark pipeline from a JSON config")
    s.add_argument("config", nargs="?", help=f"config path or bundled name ({', '.join(BUNDLED)})")
    s.set_defaults(func=cmd_stark)

    r = sub.add_parser("recognize", parents=[common], help="recognize x in Q or Q*sqrt(D)")
    r.add_argument("x", type=parse_complex)
    r.add_argument("--D", type=int, default=-4)
    r.set_defaults(func=cmd_recognize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ReglabError as exc:
        error = {"tool": "reglab", "version": __version__, "command": args.command,
                 "error": {"type": type(exc).__name__, "message": str(exc),
                           "stage": args.command if exc.stage == "library" else exc.stage}}
        emit(error, args.out)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
