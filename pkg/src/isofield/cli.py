"""``isofield`` command line.

Exit codes: 0 success, 2 validation error, 3 numeric-certificate failure,
4 I/O error. Every output file carries the config hash and the seed, and
repeated runs with the same inputs write byte-identical files.
"""
import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import ConsistencyError, DomainError, StructuralError
from .experiments import (
    DEFAULT_CONFIG_NAMES,
    PILOT_GRID,
    PILOT_TARGET,
    default_config,
    pilot,
    rejection_rate,
    run_many,
)
from .field_model import evaluate_torus, field_energy, sample_coefficients, sample_torus_coefficients
from .repr_core import search_witness, zero_set_probe
from .sphere_grid import build_grid, parseval_energy, synthesize
from .stat_tests import binomial_band

EXIT_OK, EXIT_VALIDATION, EXIT_CERTIFICATE, EXIT_IO = 0, 2, 3, 4
OUTPUT_ENV = "ISOFIELD_OUTPUT_DIR"
DEFAULT_OUTPUT = "isofield_output"
HELP_WIDTH = 88


class CertificateFailure(Exception):
    pass


# -- output helpers ----------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def csv_text(header, columns, rows):
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def output_dir(arg, config=None):
    d = arg or (config.output if config is not None else None) or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    return Path(d)


def write_outputs(directory, stem, files):
    """Write ``{suffix: text}`` as ``directory/stem.suffix``; returns the paths."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for suffix, text in files.items():
        p = directory / f"{stem}.{suffix}"
        p.write_text(text, encoding="utf-8")
        paths.append(str(p))
    return paths


def load_config(args, command):
    if args.config and args.preset:
        raise DomainError("give either --config or --preset, not both")
    if args.preset:
        cfg = default_config(args.preset, command=command)
    elif args.config:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise DomainError("config must be a JSON object")
        doc.setdefault("command", command)
        cfg = ExperimentConfig.from_dict(doc)
    else:
        cfg = ExperimentConfig(command=command)
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "n_runs", None) is not None:
        over["n_runs"] = args.n_runs
    if getattr(args, "search_rotation", False):
        over["rotation"] = "search"
    return replace(cfg, **over) if over else cfg


# -- simulate --------------------------------------------------------------------------

def cmd_simulate(args):
    cfg = load_config(args, "simulate")
    header = {"config_hash": cfg.config_hash(), "seed": cfg.seed}
    spec = cfg.spectrum_obj()
    law = cfg.law_obj()
    if cfg.space == "sphere":
        coeffs = sample_coefficients(spec, law, cfg.lmax, cfg.seed, include_monopole=cfg.include_monopole)
        grid = build_grid(cfg.lmax)
        values = synthesize(coeffs, grid, method="separable")
        e_coef = parseval_energy(coeffs)
        e_field = field_energy(values)
        coeff_doc = coeffs.to_json_dict()
        csv_out = values.to_csv(header)
    else:
        coeffs = sample_torus_coefficients(spec, law, cfg.k_max, cfg.seed)
        n_pts = 2 * cfg.k_max + 1
        theta = 2.0 * np.pi * np.arange(n_pts) / n_pts
        vals = evaluate_torus(coeffs, theta)
        e_coef = float(coeffs.data[0].real ** 2 + 2.0 * np.sum(np.abs(coeffs.data[1:]) ** 2))
        e_field = float(np.mean(vals ** 2))
        coeff_doc = {"k_max": cfg.k_max, "coefficients": [[float(z.real), float(z.imag)] for z in coeffs.data]}
        csv_out = csv_text(header, ["theta", "value"], zip(theta, vals))
    parseval = {"coefficient_energy": e_coef, "field_energy": e_field,
                "abs_difference": abs(e_coef - e_field)}
    doc = dict(header, command="simulate", config=cfg.to_dict(), coefficients=coeff_doc, parseval=parseval)
    stem = f"simulate_{cfg.config_hash()}_s{cfg.seed}"
    paths = write_outputs(output_dir(args.output_dir, cfg), stem,
                          {"coefficients.json": dumps(doc), "field.csv": csv_out})
    print(dumps({"outputs": paths, "parseval": parseval}), end="")
    if parseval["abs_difference"] > 1e-10 * max(1.0, e_coef):
        raise CertificateFailure("Parseval check failed")
    return EXIT_OK


# -- test ----------------------------------------------------------------------------------

def _run_config(cfg, n_runs, jobs):
    reports = run_many(cfg, n_runs, jobs)
    rate = rejection_rate(reports)
    lo, hi = binomial_band(n_runs, cfg.alpha)
    return reports, {"rejection_rate": rate, "n_runs": n_runs, "alpha": cfg.alpha,
                     "null_band_99": [lo, hi]}


def _suite_docs(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return doc if isinstance(doc, dict) and "suite" in doc else None


def cmd_test(args):
    suite = _suite_docs(args.config) if args.config and not args.preset else None
    if suite is not None:
        return _cmd_test_suite(args, suite)
    cfg = load_config(args, "test")
    n_runs = cfg.n_runs
    reports, summary = _run_config(cfg, n_runs, args.jobs)
    header = {"config_hash": cfg.config_hash(), "seed": cfg.seed}
    doc = dict(header, command="test", config=cfg.to_dict(), summary=summary,
               reports=[r.to_dict() for r in reports])
    rows = [(r.seed, r.test_name, r.statistic, r.p_value, int(r.reject)) for r in reports]
    stem = f"test_{cfg.experiment}_{cfg.config_hash()}_s{cfg.seed}"
    paths = write_outputs(output_dir(args.output_dir, cfg), stem, {
        "report.json": dumps(doc),
        "summary.csv": csv_text(header, ["seed", "test_name", "statistic", "p_value", "reject"], rows),
    })
    out = {"outputs": paths, "summary": summary}
    if len(reports) == 1:
        out["report"] = reports[0].to_dict()
    print(dumps(out), end="")
    return EXIT_OK


def _cmd_test_suite(args, suite):
    n_runs = args.n_runs if args.n_runs is not None else int(suite.get("n_runs", 1))
    rows, entries = [], {}
    for name in sorted(suite["suite"]):
        body = dict(suite["suite"][name])
        body.setdefault("command", "test")
        cfg = ExperimentConfig.from_dict(body)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.search_rotation:
            cfg = replace(cfg, rotation="search")
        _, summary = _run_config(cfg, n_runs, args.jobs)
        entries[name] = dict(summary, config_hash=cfg.config_hash(), seed=cfg.seed)
        rows.append((name, cfg.experiment, cfg.space, cfg.law, cfg.n, cfg.alpha, n_runs,
                     summary["rejection_rate"], cfg.config_hash(), cfg.seed))
    suite_hash = ExperimentConfig.suite_hash(suite)
    header = {"config_hash": suite_hash, "seed": "per-entry"}
    doc = dict(header, command="test-suite", n_runs=n_runs, results=entries)
    paths = write_outputs(output_dir(args.output_dir), f"suite_{suite_hash}", {
        "report.json": dumps(doc),
        "table.csv": csv_text(header, ["name", "experiment", "space", "law", "n", "alpha", "n_runs",
                                       "rejection_rate", "config_hash", "seed"], rows),
    })
    print(dumps({"outputs": paths, "results": entries}), end="")
    return EXIT_OK


# -- check-assumption ---------------------------------------------------------------------

def cmd_check_assumption(args):
    if args.degree < 1:
        raise DomainError("--degree must be >= 1")
    if args.samples < 1:
        raise DomainError("--samples must be >= 1")
    per_degree = []
    rows = []
    for l in range(1, args.degree + 1):
        rep = search_witness(l, args.seed, max_draws=args.max_draws)
        frac = zero_set_probe(l, args.samples, args.seed)
        d = rep.to_dict()
        d["zero_set_fraction"] = frac
        d["small_entry_fraction"] = zero_set_probe(l, args.samples, args.seed, reduced=False)
        per_degree.append(d)
        w = rep.witness.as_tuple() if rep.witness is not None else (None,) * 3
        rows.append((l, rep.witness is not None, rep.orders[0], rep.orders[1], rep.min_gap,
                     rep.samples_tried, *w, frac, d["small_entry_fraction"]))
    header = {"config_hash": _args_hash(args, ("degree", "samples", "max_draws")), "seed": args.seed}
    doc = dict(header, command="check-assumption", degree=args.degree, samples=args.samples,
               max_draws=args.max_draws, results=per_degree)
    stem = f"check_assumption_{header['config_hash']}_s{args.seed}"
    paths = write_outputs(output_dir(args.output_dir), stem, {
        "report.json": dumps(doc),
        "gaps.csv": csv_text(header, ["degree", "witness_found", "m1", "m2", "min_gap", "draws",
                                      "alpha", "beta", "gamma", "zero_set_fraction",
                                      "small_entry_fraction"], rows),
    })
    for l, r in zip(range(1, args.degree + 1), per_degree):
        status = "witness" if r["witness"] is not None else "no witness"
        print(f"l={l}: {status}, orders={tuple(r['orders'])}, min_gap={r['min_gap']:.3e}, "
              f"draws={r['samples_tried']}, zero-set fraction={r['zero_set_fraction']:.4f}")
        if r["witness"] is not None:
            print(f"      g = ({', '.join(f'{v:.6f}' for v in r['witness'])})")
    print("outputs: " + ", ".join(paths))
    return EXIT_OK


def _args_hash(args, names):
    import hashlib
    doc = {n: getattr(args, n) for n in names}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


# -- conj-basis-demo ---------------------------------------------------------------------

def cmd_conj_basis_demo(args):
    from .conj_basis import (
        degree1_harmonics_on_group,
        isotropic_vector,
        spin1_column_mix,
        split_invariant_subspace,
        su2_fundamental_h1,
    )
    cases = {
        "su2_fundamental": su2_fundamental_h1(),
        "spin1_column_mix": spin1_column_mix(),
        "degree1_harmonics": degree1_harmonics_on_group(),
    }
    results = {}
    ok = True
    for name, H in cases.items():
        _, rep = split_invariant_subspace(H, seed=args.seed)
        results[name] = rep.to_dict()
        ok &= rep.certified
    v = isotropic_vector(np.eye(2))
    identity_case = {"vector": [[float(z.real), float(z.imag)] for z in v],
                     "residual": float(abs(v @ v)),
                     "ratio_second_over_first": [float((v[1] / v[0]).real), float((v[1] / v[0]).imag)]}
    ok &= identity_case["residual"] < 1e-12
    header = {"config_hash": _args_hash(args, ()), "seed": args.seed}
    doc = dict(header, command="conj-basis-demo", cases=results, identity_form=identity_case,
               certified=bool(ok))
    rows = [(n, r["case"], r["certified"], r["orthogonality"], r["isotropy_residual"],
             r["invariance_residual"], r["reconstruction_residual"], r["dim_K"], r["dim_V"])
            for n, r in results.items()]
    paths = write_outputs(output_dir(args.output_dir), f"conj_basis_demo_s{args.seed}", {
        "report.json": dumps(doc),
        "certificates.csv": csv_text(header, ["case", "kind", "certified", "orthogonality",
                                              "isotropy_residual", "invariance_residual",
                                              "reconstruction_residual", "dim_K", "dim_V"],
                                     [tuple("" if x is None else x for x in row) for row in rows]),
    })
    for n, r in results.items():
        if r["case"] == "self-conjugate":
            print(f"{n}: H self-conjugate, no split needed")
        else:
            print(f"{n}: max|<k_i, conj k_j>| = {r['orthogonality']:.2e}, "
                  f"|v^T B v| = {r['isotropy_residual']:.2e}, invariance = {r['invariance_residual']:.2e}, "
                  f"certified = {r['certified']}")
    print(f"B = I: v = ({v[0]:.6f}, {v[1]:.6f}), |v^T v| = {identity_case['residual']:.2e}")
    print("outputs: " + ", ".join(paths))
    if not ok:
        raise CertificateFailure("conjugation-basis certificates failed")
    return EXIT_OK


# -- pilot --------------------------------------------------------------------------------

def cmd_pilot(args):
    cfg = load_config(args, "test")
    grid = tuple(args.grid) if args.grid else PILOT_GRID
    res = pilot(cfg, grid, n_runs=args.n_runs_pilot, target=args.target, jobs=args.jobs)
    header = {"config_hash": cfg.config_hash(), "seed": cfg.seed}
    doc = dict(header, command="pilot", config=cfg.to_dict(), **res)
    stem = f"pilot_{cfg.config_hash()}_s{cfg.seed}"
    paths = write_outputs(output_dir(args.output_dir, cfg), stem, {
        "report.json": dumps(doc),
        "pilot.csv": csv_text(header, ["n", "rejection_rate"], [(r["n"], r["rejection_rate"]) for r in res["rows"]]),
    })
    print(dumps({"outputs": paths, "calibrated_n": res["calibrated_n"], "rows": res["rows"]}), end="")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------------

def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH, max_help_position=32)


def _add_config_args(p):
    p.add_argument("--config", metavar="PATH", help="experiment config (JSON)")
    p.add_argument("--preset", choices=DEFAULT_CONFIG_NAMES, metavar="NAME",
                   help="named built-in config: " + ", ".join(DEFAULT_CONFIG_NAMES))
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--output-dir", metavar="DIR",
                   help=f"output directory (default: config 'output', ${OUTPUT_ENV}, or ./{DEFAULT_OUTPUT})")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="isofield", formatter_class=_formatter,
        description="Simulate random fields on the sphere and torus and test whether "
                    "independent coefficients force Gaussianity.",
        epilog="exit codes: 0 success, 2 validation error, 3 certificate failure, 4 I/O error")
    parser.add_argument("--version", action="version", version=f"isofield {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("simulate", formatter_class=_formatter,
                       help="sample coefficients and write the field on a grid",
                       description="Sample one field; write coefficients JSON and grid values CSV.")
    _add_config_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", formatter_class=_formatter, help="run a statistical experiment",
                       description="Run an independence, invariance or gaussianity experiment over "
                                   "seeds seed..seed+n_runs-1. A config with a 'suite' object runs "
                                   "every entry and writes a rejection-rate table.")
    _add_config_args(p)
    p.add_argument("--n-runs", type=int, help="number of seeded runs (overrides config)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes across runs (default: 1)")
    p.add_argument("--search-rotation", action="store_true",
                   help="search for an assumption witness instead of the configured rotation")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("check-assumption", formatter_class=_formatter,
                       help="search witnesses of the modulus-gap assumption",
                       description="For degrees 1..DEGREE search Haar-random rotations for a witness "
                                   "and estimate the fraction of rotations hitting a zero entry.")
    p.add_argument("--degree", type=int, default=8, help="largest degree (default: 8)")
    p.add_argument("--samples", type=int, default=1000, help="zero-set probe samples (default: 1000)")
    p.add_argument("--max-draws", type=int, default=10, help="rotations tried per degree (default: 10)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--output-dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_check_assumption)

    p = sub.add_parser("conj-basis-demo", formatter_class=_formatter,
                       help="split H + conj(H) on SU(2) and print certificates",
                       description="Construct K with K orthogonal to conj(K) for the SU(2) "
                                   "fundamental, a spin-1 example and a self-conjugate example.")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled group elements (default: 0)")
    p.add_argument("--output-dir", metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_conj_basis_demo)

    p = sub.add_parser("pilot", formatter_class=_formatter, help="calibrate the sample size N",
                       description="Rejection rate per N on a grid; stops at the first N whose "
                                   "rate reaches the target.")
    _add_config_args(p)
    p.add_argument("--grid", type=int, nargs="+", metavar="N", help=f"sample sizes (default: {list(PILOT_GRID)})")
    p.add_argument("--n-runs", dest="n_runs_pilot", type=int, default=50, help="runs per N (default: 50)")
    p.add_argument("--target", type=float, default=PILOT_TARGET, help=f"target rate (default: {PILOT_TARGET})")
    p.add_argument("--jobs", type=int, default=1, help="worker processes across runs (default: 1)")
    p.set_defaults(func=cmd_pilot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, json.JSONDecodeError) as exc:
        print(f"isofield: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CertificateFailure, ConsistencyError, StructuralError) as exc:
        print(f"isofield: certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except OSError as exc:
        print(f"isofield: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
