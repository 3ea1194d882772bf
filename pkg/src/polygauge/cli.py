"""Command-line harness.

    polygauge certify    --in F --out F [--tol T]
    polygauge solve      --in F --out F --method {closed-form,qp,lp0} [--lambda L]
    polygauge experiment --kind K [--config F] --seed S --out-dir D

Exit status: 0 on success, 2 when some instance failed a precondition,
1 on hard errors (unreadable input, solver failure).
"""

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from .certify import (
    CERTIFIED,
    INCONCLUSIVE,
    POSITIVE,
    closed_form_solution,
    constants,
    ic,
    lambda_range,
    noiseless_certificate,
)
from .errors import InputError, PolygaugeError, PreconditionError, UndefinedSupportError
from .experiments import COLUMNS, KINDS, run_experiment
from .gauge import SUPPORT_TOL, h_support
from .instances import PRNG_NAME, SCHEMA_VERSION, config_hash, load_instances, to_jsonable
from .numlin import restricted_injectivity, support_geometry
from .qp_solver import solve_p0, solve_p_lambda

log = logging.getLogger("polygauge")

EXIT_OK, EXIT_ERROR, EXIT_PRECONDITION = 0, 1, 2
METHODS = ("closed-form", "qp", "lp0")


def _record_header(index, inst):
    return {
        "index": index,
        "name": inst.name,
        "seed": inst.seed,
        "config_hash": config_hash(inst.to_dict()),
    }


def certify_record(inst, tol=SUPPORT_TOL, rec=None):
    """Full certification pipeline for one instance.

    Fields are written into ``rec`` as they are computed, so a record that
    stops on a precondition failure still shows how far it got.
    """
    rec = {} if rec is None else rec
    if inst.x0 is None:
        raise PreconditionError("certification needs x0")
    H = inst.gauge
    phi = inst.phi
    sup = h_support(H, inst.x0, tol)
    rec["support"] = list(sup.indices)
    rec["restricted_injectivity"] = restricted_injectivity(phi, H.sub(sup.indices))
    if not rec["restricted_injectivity"]:
        raise PreconditionError(f"restricted injectivity fails on support {list(sup.indices)}")
    geom = support_geometry(phi, H, sup)
    cert = ic(phi, H, sup, geom)
    rec.update(ic=cert.ic_value, ic_error=cert.ic_error, verdict=cert.verdict,
               z_star=cert.z_star)
    cert.constants = constants(phi, H, inst.x0, sup, geom)
    rec["constants"] = cert.constants.as_dict()
    if cert.verdict == POSITIVE:
        interval = lambda_range(phi, H, inst.x0, inst.noise, geom, cert)
        rec["lambda_interval"] = interval.as_list()
        dual = noiseless_certificate(phi, H, inst.x0, geom, cert)
        rec["noiseless_certificate"] = {
            "eta": dual.eta, "v": dual.v, "residual": dual.residual,
            "certified": dual.certified,
        }
    else:
        rec["lambda_interval"] = None
        rec["noiseless_certificate"] = None
    return rec


def solve_record(inst, method, lam=None, tol=SUPPORT_TOL, rec=None):
    H = inst.gauge
    y = inst.observation
    lam = inst.lam if lam is None else lam
    rec = {} if rec is None else rec
    rec["method"] = method
    if method in ("closed-form", "qp") and lam is None:
        raise PreconditionError(f"method {method} needs lambda")
    if method == "closed-form":
        if inst.x0 is None:
            raise PreconditionError("closed form needs x0 to select the face")
        sup = h_support(H, inst.x0, tol)
        geom = support_geometry(inst.phi, H, sup)
        cf = closed_form_solution(inst.phi, H, y, lam, sup, geom)
        rec.update(**{"lambda": lam}, x=cf.x_hat, mu=cf.mu, support=list(sup.indices),
                   face_check=cf.verdict, violated=cf.violated, margin=cf.margin,
                   v=cf.v_tilde)
        cert = ic(inst.phi, H, sup, geom)
        rec["ic"] = cert.ic_value
        rec["lambda_interval"] = None
        rec["in_lambda_range"] = False
        if cert.verdict == POSITIVE:
            cert.constants = constants(inst.phi, H, inst.x0, sup, geom)
            interval = lambda_range(inst.phi, H, inst.x0, inst.noise, geom, cert)
            rec["lambda_interval"] = interval.as_list()
            rec["in_lambda_range"] = lam in interval
        # the guarantee needs both the a-posteriori face check and a lambda inside the range
        certified = rec["in_lambda_range"] and cf.verdict == CERTIFIED
        rec["verdict"] = CERTIFIED if certified else INCONCLUSIVE
        x = cf.x_hat
    elif method == "qp":
        res = solve_p_lambda(inst.phi, H, y, lam)
        rec.update(**{"lambda": lam}, x=res.x, objective=res.objective,
                   kkt_residual=res.kkt_residual, iterations=res.iterations,
                   support=None if res.support is None else list(res.support.indices))
        x = res.x
    elif method == "lp0":
        res = solve_p0(inst.phi, H, y)
        rec.update(status_lp=res.status, x=res.x, objective=res.objective,
                   kkt_residual=res.kkt_residual, iterations=res.iterations,
                   support=None if res.support is None else list(res.support.indices))
        x = res.x
    else:
        raise InputError(f"unknown method {method!r}")
    if inst.x0 is not None and x is not None:
        rec["error"] = float(np.linalg.norm(x - inst.x0))
    return rec


def _run_records(instances, fn, timings):
    records, code = [], EXIT_OK
    for i, inst in enumerate(instances):
        rec = _record_header(i, inst)
        start = time.perf_counter()
        try:
            fn(inst, rec)
            rec["status"] = "ok"
        except (PreconditionError, UndefinedSupportError) as exc:
            rec.update(status="precondition-failure", message=str(exc))
            code = max(code, EXIT_PRECONDITION) if code != EXIT_ERROR else code
        except PolygaugeError as exc:
            rec.update(status="error", message=f"{type(exc).__name__}: {exc}")
            code = EXIT_ERROR
        if timings:
            rec["seconds"] = time.perf_counter() - start
        records.append(rec)
    return records, code


def _write_json(path, obj):
    text = json.dumps(to_jsonable(obj), indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def cmd_certify(args):
    instances = load_instances(args.infile)
    records, code = _run_records(instances, lambda inst, rec: certify_record(inst, args.tol, rec),
                                 args.timings)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "certify",
        "flags": {"tol": args.tol},
        "prng": PRNG_NAME,
        "config_hash": config_hash([inst.to_dict() for inst in instances] + [args.tol]),
        "records": records,
    }
    _write_json(args.out, report)
    return code


def cmd_solve(args):
    instances = load_instances(args.infile)
    records, code = _run_records(
        instances, lambda inst, rec: solve_record(inst, args.method, args.lam, args.tol, rec), args.timings
    )
    flags = {"method": args.method, "lambda": args.lam, "tol": args.tol}
    report = {
        "schema": SCHEMA_VERSION,
        "command": "solve",
        "flags": flags,
        "prng": PRNG_NAME,
        "config_hash": config_hash([inst.to_dict() for inst in instances] + [flags]),
        "records": records,
    }
    _write_json(args.out, report)
    return code


def _csv_value(v):
    v = to_jsonable(v)
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def cmd_experiment(args):
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    rows, summary = run_experiment(args.kind, config, args.seed)
    summary["prng"] = PRNG_NAME
    summary["config_hash"] = config_hash(summary["config"])
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.join(args.out_dir, args.kind)
    header = COLUMNS[args.kind]
    with open(stem + ".csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_value(row[k]) for k in header])
    _write_json(stem + ".json", summary)
    log.info("wrote %d rows to %s.csv", len(rows), stem)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="polygauge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="criterion, constants and certificates per instance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--tol", type=float, default=SUPPORT_TOL, help="support detection tolerance")
    p.add_argument("--timings", action="store_true", help="add wall-clock seconds per record")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("solve", help="solve instances with one method")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--tol", type=float, default=SUPPORT_TOL)
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="seeded experiment family, CSV + JSON summary")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--config", default=None, help="JSON config overriding the defaults")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "lam", None) is not None and not args.lam > 0:
        log.error("--lambda must be positive")
        return EXIT_ERROR
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, InputError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
