"""Command line driver: ``ncdr <command> ...``.

Every command writes one JSON report with the same top level layout::

    {"command": ..., "config": {...}, "result": {...}, "status": ..., "exit_code": n}

Reports contain no timings or addresses, so identical config and seed give
byte-identical output.  Exit codes: 0 success (inapplicable verdicts and
unstable windows included), 1 a checked identity failed, 2 bad input,
3 an internal invariant broke.
"""

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

SUITES = ("identities", "harmonic", "deform-dg", "rep", "gm")


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# report plumbing


def _plain(x):
    """Recursively turn a result into JSON-safe data with a fixed key order."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, float):
        return x
    if x is None or isinstance(x, str):
        return x
    # cochains and other heavy objects: record only the type
    return f"<{type(x).__name__}>"


def render(report):
    return json.dumps(_plain(report), indent=2, sort_keys=True) + "\n"


def _read_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno} "
                         f"(position {exc.pos}): {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: spec must be a JSON object")
    return data


def _algebra(path, cap=None):
    from .algebra import load_algebra
    data = _read_json(path)
    try:
        return load_algebra(data, cap)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _window(text):
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise InputError(f"window must look like a..b, got {text!r}") from None
    if hi < lo:
        raise InputError(f"empty window {text!r}")
    return lo, hi


def _positive(name, value):
    if value is not None and value <= 0:
        raise InputError(f"--{name} must be positive")
    return value


# ---------------------------------------------------------------------------
# commands; each returns (result, exit code)


def cmd_hh(args):
    from .homology import FormBlocks, hh_kernel_iota, hochschild
    A = _algebra(args.spec)
    fb = FormBlocks(A)
    hh = hochschild(A, args.n_max, fb)
    ker = [hh_kernel_iota(A, n, fb)["dim"] for n in range(args.n_max + 1)]
    res = {"algebra": A.name, "dims": hh["dims"], "bar_dims": hh["bar_dims"],
           "kernel_iota_dims": ker, "truncated": hh["truncated"],
           "weights": hh["weights"],
           "agree": hh["agree"] and ker == hh["dims"]}
    return res, EXIT_OK if res["agree"] else EXIT_FAIL


def cmd_hp(args):
    from .homology import periodic_homology
    A = _algebra(args.spec)
    ph = periodic_homology(A, _window(args.window), args.cap)
    res = {"algebra": A.name, "window": args.window, "D": args.cap,
           "Bb": ph["Bb"]["dims"], "Bb_next": ph["Bb"]["dims_next"],
           "heart": ph["heart"]["dims"], "heart_next": ph["heart"]["dims_next"],
           "variants_agree": ph["agree"], "stable": ph["stable"],
           "intertwiner": ph["intertwiner"], "truncated": bool(A.truncated)}
    bad = not (ph["intertwiner"] and (ph["agree"] or not ph["stable"]))
    return res, EXIT_FAIL if bad else EXIT_OK


def cmd_hc(args):
    from .homology import cyclic_and_negative
    A = _algebra(args.spec)
    cn = cyclic_and_negative(A, _window(args.window), args.cap)
    res = {"algebra": A.name, "window": args.window, "D": args.cap, **cn}
    bad = any(v["stable"] and not (v["P_matches"] and v["Pperp_zero"]) for v in cn.values())
    return res, EXIT_FAIL if bad else EXIT_OK


def _counts(rows):
    out = {}
    for row in rows:
        for name, ok in row["checks"].items():
            c = out.setdefault(name, {"pass": 0, "fail": 0})
            c["pass" if ok else "fail"] += 1
    return out


def cmd_verify(args):
    suite = args.suite
    if suite == "identities":
        from .suites import verify_identities
        r = verify_identities(_algebra(args.spec), args.n_max)
        res = {"algebra": r["algebra"], "counts": _counts(r["rows"]), "witnesses": r["failures"]}
    elif suite == "harmonic":
        from .suites import verify_harmonic
        r = verify_harmonic(_algebra(args.spec), args.n_max)
        res = {"algebra": r["algebra"], "counts": _counts(r["rows"]),
               "acyclicity_blocks": r["acyclicity"]["checked"], "witnesses": r["failures"]}
    elif suite == "deform-dg":
        from .deformation import verify_dg_suite
        r = verify_dg_suite(_algebra(args.spec), trials=args.trials, seed=args.seed)
        res = {"algebra": r["algebra"], "trials": r["trials"], "failures": r["failures"],
               "witnesses": r["witnesses"],
               "cup_nullity": {k: v for k, v in r["cup_nullity"].items() if k != "rows"}}
    elif suite == "rep":
        from .rep import verify_rep_thm
        data = _read_json(args.spec)
        names = [g if isinstance(g, str) else g.get("name") for g in data.get("generators", [])]
        if not names or not all(isinstance(n, str) for n in names):
            raise InputError(f"{args.spec}: rep suite needs a list of generators")
        if data.get("relations"):
            raise InputError(f"{args.spec}: rep suite expects a free algebra (no relations)")
        dim = args.dim or 2
        r = verify_rep_thm(names, dims=tuple(range(1, dim + 1)),
                           max_even=args.max_even, cap=int(data.get("degree_cap", 3)))
        res = {"grid": r["grid"], "diagram_commutes": r["diagram_ok"],
               "failures": r["failures"], "kernel_classes": r["kernel_classes"]}
    elif suite == "gm":
        from .gaussmanin import FamilyError, RelativeFamily, RelativeForms, gm_flatness
        try:
            fam = RelativeFamily.from_spec(_read_json(args.spec))
        except FamilyError as exc:
            raise InputError(f"{args.spec}: {exc}") from None
        cert = RelativeForms(fam).certify()
        flat = gm_flatness(fam, seed=args.seed)
        r = {"ok": cert["ok"] and flat["ok"]}
        res = {"family": fam.name, "bijective": cert["ok"], "certificate_failures": cert["failures"],
               **{k: flat[k] for k in ("classes", "samples", "lift_independent",
                                       "representative_independent", "leibniz_b",
                                       "leibniz_beta", "curvature")}}
    else:
        raise InputError(f"unknown suite {suite!r}")
    res["ok"] = r["ok"]
    return res, EXIT_OK if r["ok"] else EXIT_FAIL


def _datum(path, order):
    from .deformation import DeformationDatum
    data = _read_json(path)
    if order is not None:
        data["t_order"] = order
        data.setdefault("degree_cap", 2 * order + 1)
    try:
        return DeformationDatum.from_spec(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_deform(args):
    from .deformation import build_A_phi, flatness_check, mc_check
    if args.action != "mc":
        raise InputError(f"unknown deform action {args.action!r}")
    datum = _datum(args.spec, args.order)
    ap = build_A_phi(datum)
    betas = ap.t_cochains()
    mc = mc_check(betas, max_input_weight=datum.cap, solve_obstruction=False)
    fl = flatness_check(ap)
    res = {"order": datum.t_order, "cap": datum.cap, "mc_pass": mc["pass"],
           "failing_order": mc["failing_order"], "flat": fl["flat"],
           "beta_nnz": [b.nnz for b in betas], "A_phi_dim": ap.algebra.N,
           "A_dim": ap.base.N,
           "gr_mismatch": [r for r in fl["table"] if r["gr_dim"] != r["expected"]]}
    # a non-flat datum is data, not a failure; a broken MC equation is
    return res, EXIT_OK if mc["pass"] else EXIT_FAIL


def cmd_gm(args):
    from .gaussmanin import FamilyError, GaussManin, RelativeFamily, RelativeForms
    import random
    try:
        fam = RelativeFamily.from_spec(_read_json(args.spec))
    except FamilyError as exc:
        raise InputError(f"{args.spec}: {exc}") from None
    if args.cap is not None:
        _positive("cap", args.cap)
    cert = RelativeForms(fam).certify()
    gm = GaussManin(fam)
    rng = random.Random(args.seed)
    W = fam.cap if args.cap is None else min(args.cap, fam.cap)
    rows = [gm.check_class(w, p, z, rng) for w, p, z in gm.sample_classes(W)]
    res = {"family": fam.name, "bijective": cert["ok"],
           "homology": {f"{w}/{p}": gm.homology_dim(w, p) for w in range(W + 1) for p in (0, 1)},
           "classes": rows}
    ok = cert["ok"] and all(r["ok"] for r in rows)
    res["ok"] = ok
    return res, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"hh": cmd_hh, "hp": cmd_hp, "hc": cmd_hc, "verify": cmd_verify,
            "deform": cmd_deform, "gm": cmd_gm}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    p = argparse.ArgumentParser(prog="ncdr", description="noncommutative de Rham toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--format", choices=["json"], default="json")
        q.add_argument("--out", default=None, help="write the report here instead of stdout")

    q = sub.add_parser("hh", help="Hochschild homology, two ways")
    q.add_argument("spec")
    q.add_argument("--n-max", type=int, default=3)
    common(q)
    for name in ("hp", "hc"):
        q = sub.add_parser(name, help="periodic window" if name == "hp" else "cyclic and negative")
        q.add_argument("spec")
        q.add_argument("--window", default="-2..4")
        q.add_argument("--cap", type=int, default=6, help="weight cap D")
        common(q)
    q = sub.add_parser("verify", help="run an identity suite")
    q.add_argument("suite", choices=SUITES)
    q.add_argument("spec")
    q.add_argument("--n-max", type=int, default=4)
    q.add_argument("--dim", type=int, default=None)
    q.add_argument("--trials", type=int, default=50)
    q.add_argument("--max-even", type=int, default=1)
    common(q)
    q = sub.add_parser("deform", help="deformation computations")
    q.add_argument("action", choices=["mc"])
    q.add_argument("spec")
    q.add_argument("--order", type=int, default=None)
    common(q)
    q = sub.add_parser("gm", help="Gauss-Manin connection on a family")
    q.add_argument("spec")
    q.add_argument("--cap", type=int, default=None)
    common(q)
    return p


def _glue_window(argv):
    """Allow ``--window -2..4``: argparse would read -2..4 as an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--window" and i + 1 < len(argv):
            out.append("--window=" + argv[i + 1])
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("out",)}
    return cfg


def run(argv=None):
    """Parse, run, and return (report text, exit code)."""
    from .algebra import SizeLimitError, size_limit
    from .gaussmanin import InvariantError
    from .homology import InvariantViolation
    parser = build_parser()
    args = parser.parse_args(_glue_window(list(sys.argv[1:] if argv is None else argv)))
    config = _config(args)
    config["size_limit"] = size_limit()
    try:
        for name in ("n_max", "dim", "order", "trials"):
            if getattr(args, name, None) is not None:
                _positive(name.replace("_", "-"), getattr(args, name))
        if getattr(args, "cap", None) is not None:
            _positive("cap", args.cap)
        result, code = COMMANDS[args.command](args)
        status = {EXIT_OK: "ok", EXIT_FAIL: "failed"}[code]
    except (InputError, SizeLimitError) as exc:
        result, code, status = {"error": str(exc)}, EXIT_INPUT, "input error"
    except (InvariantViolation, InvariantError) as exc:
        result, code, status = {"error": str(exc)}, EXIT_INTERNAL, "invariant violation"
    report = {"command": args.command, "config": config, "result": result,
              "status": status, "exit_code": code, "version": __version__}
    return render(report), code, args


def main(argv=None):
    text, code, args = run(argv)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_INPUT:
        sys.stderr.write("ncdr: " + json.loads(text)["result"]["error"] + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
