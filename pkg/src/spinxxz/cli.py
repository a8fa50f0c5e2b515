"""Command-line front end.

Subcommands ``verify``, ``spectrum``, ``bethe``, ``reproduce`` and ``check``.
Parameters come from a flat ``key = value`` file (``--config``) and
``--param key=value`` overrides; complex numbers are written ``a+bi``.
Results are emitted as a JSON bundle or as CSV.

Exit codes: 0 success, 2 validation error, 3 a numerical check failed,
4 the solver did not converge.
"""
import argparse
import csv
import io
import json
import os
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .checks import DEFAULT_TOLERANCES, SUITES, run_checks, skipped_suites
from .errors import ConvergenceError, PoleError, RootCollisionError, SpinXXZError, ValidationError
from .params import BOUNDARY_FIELDS, BoundaryCase, ModelParams
from .spin1 import diagonalize, energies_from_derivative, energy_from_bethe
from .tables import REFERENCE, compare_rows
from .tq import SolverSettings, solve_bethe, transfer_branches
from .transfer import rescaled_fundamental

__all__ = [
    "RunConfig", "parse_complex", "format_complex", "parse_config", "build_config",
    "run_verify", "run_spectrum", "run_bethe", "run_reproduce", "run_check", "main",
    "EXIT_OK", "EXIT_VALIDATION", "EXIT_CHECK", "EXIT_NONCONVERGENCE", "OUTPUT_DIR_ENV",
]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CHECK = 3
EXIT_NONCONVERGENCE = 4

OUTPUT_DIR_ENV = "SPINXXZ_OUTPUT_DIR"

SOLVER_TOLERANCES = {"bae": 1e-10, "fit": 1e-7, "tq": 1e-7, "energy": 1e-6,
                     "table_energy": 5e-4, "table_roots": 1e-4}

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^(?:(?P<re>{_NUMBER})(?P<im>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?[ij]|"
                         rf"(?P<re2>{_NUMBER})|(?P<im2>[+-]|{_NUMBER})?[ij])$")


def parse_complex(text, name="value"):
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi`` (``j`` is accepted for ``i``)."""
    t = str(text).strip().replace(" ", "")
    m = _COMPLEX_RE.match(t)
    if not m:
        raise ValidationError(f"cannot parse {text!r} as a complex number", name)
    if m.group("re2") is not None:
        return complex(float(m.group("re2")), 0.0)
    if m.group("re") is not None and m.group("im") is not None:
        return complex(float(m.group("re")), float(m.group("im")))
    if m.group("re") is not None:
        return complex(0.0, float(m.group("re")))
    im = m.group("im2")
    if im in (None, "", "+"):
        return 1j
    if im == "-":
        return -1j
    return complex(0.0, float(im))


def format_complex(z):
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


@dataclass
class RunConfig:
    params: ModelParams
    case: BoundaryCase | None = None
    command: str = "verify"
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None
    output_format: str = "json"
    samples: int = 20
    u: complex = 0.3 + 0.1j

    def tol(self, name):
        return self.tolerances.get(name, DEFAULT_TOLERANCES.get(name, SOLVER_TOLERANCES.get(name)))

    def echo(self):
        p = self.params
        out = {"command": self.command, "s": str(p.s), "N": p.N, "p": p.p}
        out.update({k: format_complex(v) for k, v in p.boundary().items()})
        out.update({
            "case": self.case.value if self.case else None,
            "seed": self.seed, "samples": self.samples, "u": format_complex(self.u),
            "tolerances": {k: self.tolerances[k] for k in sorted(self.tolerances)},
            "output_format": self.output_format,
        })
        return out


def parse_config(text):
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {n}: expected key = value", "config")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key] = value
    return out


_KNOWN = {"s", "N", "p", "case", "seed", "samples", "u", "output_path", "output_format", *BOUNDARY_FIELDS}
_TOL_NAMES = set(DEFAULT_TOLERANCES) | set(SOLVER_TOLERANCES)


def _positive_float(text, name):
    try:
        v = float(text)
    except ValueError:
        raise ValidationError(f"not a number: {text!r}", name) from None
    if not v > 0:
        raise ValidationError("tolerances must be positive", name)
    return v


def _integer(text, name):
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"not an integer: {text!r}", name) from None


def build_config(command, values, tolerances=None, output_path=None, output_format=None):
    """Validate raw string settings into a :class:`RunConfig`."""
    tols = {}
    for key in list(values):
        if key.startswith("tol."):
            name = key[4:]
            if name not in _TOL_NAMES:
                raise ValidationError(f"unknown tolerance {name!r}", key)
            tols[name] = _positive_float(values[key], key)
        elif key not in _KNOWN:
            raise ValidationError("unknown setting", key)
    for name, value in (tolerances or {}).items():
        if name not in _TOL_NAMES:
            raise ValidationError(f"unknown tolerance {name!r}", "tol")
        tols[name] = _positive_float(value, name)
    try:
        s = Fraction(values.get("s", "1/2"))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a spin: {values['s']!r}", "s") from None
    if (2 * s).denominator != 1:
        raise ValidationError("spin must be a positive half-integer", "s")
    kwargs = {name: parse_complex(values[name], name) for name in BOUNDARY_FIELDS if name in values}
    params = ModelParams(s=s, N=_integer(values.get("N", "2"), "N"), p=_integer(values.get("p", "3"), "p"), **kwargs)
    case = BoundaryCase.parse(values["case"]) if values.get("case") else None
    fmt = output_format or values.get("output_format", "json")
    if fmt not in ("json", "csv"):
        raise ValidationError("must be csv or json", "output_format")
    cfg = RunConfig(
        params=params, case=case, command=command, tolerances=tols,
        seed=_integer(values.get("seed", "0"), "seed"),
        output_path=output_path or values.get("output_path"), output_format=fmt,
        samples=_integer(values.get("samples", "20"), "samples"),
        u=parse_complex(values.get("u", "0.3+0.1i"), "u"),
    )
    if cfg.samples < 1:
        raise ValidationError("must be positive", "samples")
    if command == "bethe":
        if cfg.case is None:
            raise ValidationError("bethe needs a boundary case (I or II)", "case")
        params.check_bethe()
        params.check_case(cfg.case)
    return cfg


def _bundle(cfg):
    return {"version": __version__, "config": cfg.echo(), "checks": [], "spectra": [],
            "bethe": [], "timings": {}}


def run_verify(cfg):
    """Identity suites for ``cfg.params``; returns ``(bundle, exit_code)``."""
    bundle = _bundle(cfg)
    tols = {k: cfg.tol(k) for k in SUITES}
    t0 = time.perf_counter()
    results = run_checks(cfg.params, n=cfg.samples, seed=cfg.seed, tolerances=tols)
    bundle["timings"]["verify"] = time.perf_counter() - t0
    bundle["checks"] = [r.as_dict() for r in results]
    bundle["skipped"] = list(skipped_suites(cfg.params))
    return bundle, EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def run_spectrum(cfg):
    """Hamiltonian energies for ``s = 1``, otherwise transfer-matrix eigenvalues at ``cfg.u``."""
    bundle = _bundle(cfg)
    t0 = time.perf_counter()
    params = cfg.params
    if params.s == 1:
        for rec in diagonalize(params):
            bundle["spectra"].append({"level": rec.level_index, "kind": "energy", "value": rec.E,
                                      "residual_imag": rec.residual_imag, "source": rec.source})
    else:
        vals = np.linalg.eigvals(rescaled_fundamental(cfg.u, params))
        vals = vals[np.lexsort((vals.imag, vals.real))]
        for i, v in enumerate(vals):
            bundle["spectra"].append({"level": i, "kind": "transfer_eigenvalue", "value": format_complex(v),
                                      "u": format_complex(cfg.u), "source": "diagonalization"})
    bundle["timings"]["spectrum"] = time.perf_counter() - t0
    return bundle, EXIT_OK


def _solution_record(sol, level, energies):
    return {
        "level": level, "branch": sol.level_index, "case": sol.case.value,
        "roots1": [[z.real, z.imag] for z in sol.roots1],
        "roots2": [[z.real, z.imag] for z in sol.roots2],
        "bae_residual": {"value": sol.bae_residual, "source": "bethe"},
        "tq_residual": {"value": sol.tq_residual, "source": "tq"},
        "fit_residual": sol.fit_residual, "flagged": sol.flagged, "notes": sol.notes,
        "energies": energies,
    }


def _solve(cfg, bundle):
    params, case = cfg.params, cfg.case
    settings = SolverSettings(tol=cfg.tol("bae"), fit_tol=cfg.tol("fit"))
    t0 = time.perf_counter()
    branches = transfer_branches(params, settings)
    bundle["timings"]["branches"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    sols = solve_bethe(case, params, settings, branches)
    bundle["timings"]["solve"] = time.perf_counter() - t0
    return sols, branches


def _energy_table(cfg, sols, branches, bundle):
    """Per-solution energy records from the three sources, ordered by energy."""
    params = cfg.params
    t0 = time.perf_counter()
    deriv = energies_from_derivative(branches, params)
    diag = diagonalize(params)
    order = np.argsort([r.E for r in deriv], kind="stable")
    rows = []
    for level, i in enumerate(order):
        sol = sols[i]
        recs = [
            {"source": "diagonalization", "E": diag[level].E, "residual_imag": diag[level].residual_imag},
            {"source": "derivative", "E": deriv[i].E, "residual_imag": deriv[i].residual_imag},
        ]
        try:
            b = energy_from_bethe(sol, params)
            recs.append({"source": "bethe", "E": b.E, "residual_imag": b.residual_imag})
        except (PoleError, ConvergenceError) as exc:
            recs.append({"source": "bethe", "E": None, "residual_imag": None, "error": str(exc)})
        rows.append((level, sol, recs))
    bundle["timings"]["energies"] = time.perf_counter() - t0
    return rows


def _energy_agreement(recs):
    es = [r["E"] for r in recs if r["E"] is not None]
    if len(es) < len(recs):
        return float("inf")
    scale = max(1.0, max(abs(e) for e in es))
    return max(abs(a - b) for a in es for b in es) / scale


def run_bethe(cfg):
    """Bethe roots for every branch, with the three-way energy comparison when ``s = 1``."""
    bundle = _bundle(cfg)
    sols, branches = _solve(cfg, bundle)
    if cfg.params.s == 1:
        rows = _energy_table(cfg, sols, branches, bundle)
    else:
        rows = [(i, sol, []) for i, sol in enumerate(sols)]
    worst_energy = 0.0
    for level, sol, recs in rows:
        bundle["bethe"].append(_solution_record(sol, level, recs))
        if recs:
            worst_energy = max(worst_energy, _energy_agreement(recs))
    if cfg.params.s == 1:
        bundle["checks"].append({"name": "energy_agreement", "residual": worst_energy,
                                 "tolerance": cfg.tol("energy"), "pass": worst_energy <= cfg.tol("energy")})
    worst_tq = max((s.tq_residual for s in sols), default=0.0)
    bundle["checks"].append({"name": "tq_agreement", "residual": worst_tq, "tolerance": cfg.tol("tq"),
                             "pass": bool(worst_tq <= cfg.tol("tq"))})
    worst_bae = max((s.bae_residual for s in sols), default=0.0)
    bundle["checks"].append({"name": "bae", "residual": worst_bae, "tolerance": cfg.tol("bae"),
                             "pass": bool(worst_bae <= cfg.tol("bae"))})
    if any(s.flagged for s in sols):
        return bundle, EXIT_NONCONVERGENCE
    return bundle, EXIT_OK if all(c["pass"] for c in bundle["checks"]) else EXIT_CHECK


def run_reproduce(table, cfg=None):
    """Solve a reference parameter set and compare with the stored table."""
    if table not in REFERENCE:
        raise ValidationError(f"unknown table {table!r}", "table")
    ref = REFERENCE[table]
    base = RunConfig(params=ref["params"](), case=BoundaryCase.parse(ref["case"]), command="reproduce")
    if cfg is not None:
        base.tolerances = dict(cfg.tolerances)
        base.output_path, base.output_format = cfg.output_path, cfg.output_format
    cfg = base
    bundle = _bundle(cfg)
    bundle["config"]["table"] = table
    sols, branches = _solve(cfg, bundle)
    rows = _energy_table(cfg, sols, branches, bundle)
    energies, roots = [], []
    for level, sol, recs in rows:
        bundle["bethe"].append(_solution_record(sol, level, recs))
        energies.append(next(r["E"] for r in recs if r["source"] == "diagonalization"))
        roots.append(sol.roots1)
    diffs = compare_rows(table, energies, roots, cfg.tol("table_energy"), cfg.tol("table_roots"))
    bundle["comparison"] = diffs
    for d in diffs:
        bundle["checks"].append({"name": f"row_{d['row']}_energy", "residual": d["dE"],
                                 "tolerance": cfg.tol("table_energy"),
                                 "pass": d["dE"] is not None and d["dE"] <= cfg.tol("table_energy")})
        bundle["checks"].append({"name": f"row_{d['row']}_roots", "residual": d["droots"],
                                 "tolerance": cfg.tol("table_roots"),
                                 "pass": d["droots"] is not None and d["droots"] <= cfg.tol("table_roots")})
    worst_energy = max(_energy_agreement(recs) for _, _, recs in rows)
    bundle["checks"].append({"name": "energy_agreement", "residual": worst_energy,
                             "tolerance": cfg.tol("energy"), "pass": worst_energy <= cfg.tol("energy")})
    ok = all(d["pass"] for d in diffs) and len(diffs) == len(ref["rows"])
    return bundle, EXIT_OK if ok else EXIT_CHECK


def run_check(bundle, tolerances=None):
    """Re-derive pass/fail from a stored bundle without re-solving.

    A check passes when its stored residual is within its stored tolerance,
    or within an override from ``tolerances``.
    """
    tolerances = tolerances or {}
    if not isinstance(bundle, dict) or "checks" not in bundle:
        raise ValidationError("not a result bundle", "bundle")
    report = []
    for c in bundle["checks"]:
        name = c.get("name")
        tol = float(tolerances.get(name, c.get("tolerance", np.inf)))
        res = c.get("residual")
        ok = res is not None and float(res) <= tol
        report.append({"name": name, "residual": res, "tolerance": tol, "pass": ok})
    for sol in bundle.get("bethe", []):
        if sol.get("flagged"):
            report.append({"name": f"solution_{sol['level']}", "residual": sol["bae_residual"]["value"],
                           "tolerance": None, "pass": False})
    return report, EXIT_OK if all(r["pass"] for r in report) else EXIT_CHECK


def _roots_csv(bundle):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "root_index", "re", "im", "which_Q"])
    for sol in bundle["bethe"]:
        for which in ("roots1", "roots2"):
            for k, (re_, im_) in enumerate(sol[which]):
                w.writerow([sol["level"], k, repr(re_), repr(im_), "Q1" if which == "roots1" else "Q2"])
    return buf.getvalue()


def _flat_csv(rows, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def render(bundle, fmt):
    if fmt == "json":
        return json.dumps(bundle, indent=2, sort_keys=False, default=_json_default) + "\n"
    if bundle.get("bethe"):
        return _roots_csv(bundle)
    if bundle.get("spectra"):
        return _flat_csv(bundle["spectra"], ["level", "kind", "value", "source"])
    return _flat_csv(bundle["checks"], ["name", "residual", "tolerance", "pass"])


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return format_complex(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _resolve_output(path, command, fmt):
    base = os.environ.get(OUTPUT_DIR_ENV)
    if path is None:
        if base is None:
            return None
        path = f"{command}.{fmt}"
    if base is not None and not os.path.isabs(path):
        path = os.path.join(base, path)
    return path


def _emit(bundle, cfg_path, command, fmt):
    text = render(bundle, fmt)
    path = _resolve_output(cfg_path, command, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


def _pairs(items, flag):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"expected name=value, got {item!r}", flag)
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value parameter file")
    common.add_argument("--param", action="append", metavar="K=V", help="override one setting (repeatable)")
    common.add_argument("--out", help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV} if set)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance (repeatable)")
    parser = argparse.ArgumentParser(prog="spinxxz", description="Open spin-s XXZ chain at roots of unity.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the identity suites")
    sub.add_parser("spectrum", parents=[common], help="Hamiltonian or transfer-matrix spectrum")
    sub.add_parser("bethe", parents=[common], help="Bethe roots for every eigenvalue branch")
    rp = sub.add_parser("reproduce", parents=[common], help="reproduce a reference table")
    rp.add_argument("table", choices=sorted(REFERENCE))
    cp = sub.add_parser("check", parents=[common], help="re-check a stored JSON bundle")
    cp.add_argument("bundle")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        values = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    values.update(parse_config(fh.read()))
            except OSError as exc:
                raise ValidationError(str(exc), "config") from None
        values.update(_pairs(args.param, "--param"))
        tols = _pairs(args.tol, "--tol")
        if args.command == "check":
            try:
                with open(args.bundle) as fh:
                    bundle = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ValidationError(str(exc), "bundle") from None
            report, code = run_check(bundle, {k: _positive_float(v, k) for k, v in tols.items()})
            out = {"version": __version__, "checks": report}
            _emit(out, args.out, "check", args.format or "json")
            return code
        cfg = build_config(args.command, values, tols, args.out, args.format)
        if args.command == "verify":
            bundle, code = run_verify(cfg)
        elif args.command == "spectrum":
            bundle, code = run_spectrum(cfg)
        elif args.command == "bethe":
            bundle, code = run_bethe(cfg)
        else:
            bundle, code = run_reproduce(args.table, cfg)
            for d in bundle["comparison"]:
                if not d["pass"]:
                    print(f"row {d['row']}: E={d['E']} printed={d['E_printed']} dE={d['dE']} "
                          f"droots={d['droots']}", file=sys.stderr)
        _emit(bundle, cfg.output_path, args.command, cfg.output_format)
        for c in bundle["checks"]:
            if not c["pass"]:
                print(f"FAIL {c['name']}: residual {c['residual']} > {c['tolerance']}", file=sys.stderr)
        return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, RootCollisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except PoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SpinXXZError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
