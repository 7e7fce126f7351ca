"""Command-line interface: build systems, run operators, checks, estimates.

Exit codes: 0 success, 2 usage error, 3 format error, 4 domain/precondition
error, 5 resource cap exceeded.  Every failure prints one machine-readable
JSON line on stderr.  Every subcommand accepts ``--dry-run`` (validate and
print the resolved parameter map without computing) and ``--threads``
(worker cap; outputs never depend on it).  The environment variable
``WEYL_LAB_SEED`` overrides the default seed wherever no explicit seed is
given.
"""

import argparse
import json
import os
import sys

import numpy as np

from .dyadic import MAX_LEVEL, SampledFunction, make_grid
from .errors import (DomainError, FormatError, NumericError, ResourceError,
                     WeylLabError)
from .extremal import (SearchConfig, estimate_A_sweep, fit_growth,
                       theorem1_pipeline)
from .lemmas import (check_block_domination, check_convolution_inequality,
                     check_cz_kernel, check_good_lambda,
                     check_indicator_decay, check_interaction_coarse_by_fine,
                     check_interaction_fine_by_coarse, check_kernel_block,
                     check_littlewood_paley, check_vector_maximal,
                     ConstantEstimate, pooled_good_lambda)
from .operators import (DEFAULT_SEED, IndexChain, block_majorant,
                        chain_maximal, coefficients, dyadic_maximal,
                        haar_block, haar_square, hl_maximal, phi_block,
                        project, random_haar_polynomial,
                        random_step_function)
from .reports import (dump_json, format_float, read_estimates_csv, write_csv,
                      write_estimates_csv, write_json)
from .systems import build_franklin, build_haar, load_system, save_system, \
    verify_wavelet_type

LEMMA_TOKENS = ("y3", "L21", "L31", "L32", "L33", "LP", "conv", "FS", "CWW",
                "CZ")
OP_TOKENS = ("project", "phi-block", "haar-block", "mq", "md", "square",
             "majorant")


class UsageError(Exception):
    """Bad flag combination detected after argparse (exit code 2)."""


def _env_seed() -> int:
    raw = os.environ.get("WEYL_LAB_SEED", "")
    if not raw:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise FormatError(f"WEYL_LAB_SEED must be an integer, got {raw!r}") \
            from exc


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, "
                                         f"got {value}")
    return value


def _int_list(text: str):
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}")


# ---------------------------------------------------------------------------
# FUNC mini-language: how --f describes a sampled function


def parse_func(spec: str, grid) -> SampledFunction:
    """Build a sampled function from a compact text spec.

    Forms: ``indicator:a,b`` (1 on [a,b)), ``haarpoly:seed,levels`` (random
    sign polynomial over the first levels), ``step:seed[,pieces]`` (random
    step function), ``file:PATH`` (one value per line, or the cell,value CSV
    written by ``op``).
    """
    kind, sep, arg = spec.partition(":")
    if not sep:
        raise FormatError(f"function spec needs kind:args, got {spec!r}")
    if kind == "indicator":
        parts = arg.split(",")
        if len(parts) != 2:
            raise FormatError(f"indicator needs a,b, got {arg!r}")
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise FormatError(f"indicator bounds must be numbers: {arg!r}") \
                from exc
        if not (0.0 <= a < b <= 1.0):
            raise DomainError(f"indicator needs 0 <= a < b <= 1, got {arg}")
        mid = (np.arange(grid.cells) + 0.5) / grid.cells
        return SampledFunction(grid, ((mid >= a) & (mid < b)).astype(float))
    if kind == "haarpoly":
        parts = arg.split(",")
        if len(parts) != 2:
            raise FormatError(f"haarpoly needs seed,levels, got {arg!r}")
        try:
            seed, levels = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError(f"haarpoly args must be integers: {arg!r}") \
                from exc
        return random_haar_polynomial(grid, levels=levels, seed=seed)
    if kind == "step":
        parts = arg.split(",")
        if len(parts) not in (1, 2):
            raise FormatError(f"step needs seed[,pieces], got {arg!r}")
        try:
            seed = int(parts[0])
            pieces = int(parts[1]) if len(parts) == 2 else 8
        except ValueError as exc:
            raise FormatError(f"step args must be integers: {arg!r}") from exc
        return random_step_function(grid, pieces=pieces, seed=seed)
    if kind == "file":
        try:
            with open(arg, "r") as fh:
                lines = [ln for ln in fh.read().splitlines() if ln]
        except OSError as exc:
            raise FormatError(f"cannot read function file {arg}: {exc}") \
                from exc
        if lines and lines[0].replace(" ", "") == "cell,value":
            lines = lines[1:]
        vals = []
        for ln in lines:
            tok = ln.split(",")[-1]
            try:
                vals.append(float(tok))
            except ValueError as exc:
                raise FormatError(f"{arg}: bad value line {ln!r}") from exc
        if len(vals) != grid.cells:
            raise FormatError(f"{arg}: expected {grid.cells} values, "
                              f"got {len(vals)}")
        return SampledFunction(grid, np.asarray(vals))
    raise FormatError(f"unknown function kind {kind!r} "
                      "(use indicator/haarpoly/step/file)")


def parse_gspec(spec: str):
    """Indices ``2,3,5`` give a projection set; ``@file.json`` holding an
    array of arrays gives a nested chain."""
    if spec.startswith("@"):
        try:
            with open(spec[1:], "r") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise FormatError(f"cannot read chain file {spec[1:]}: {exc}") \
                from exc
        except json.JSONDecodeError as exc:
            raise FormatError(f"{spec[1:]}: invalid JSON: {exc}") from exc
        if (not isinstance(data, list) or not data
                or not all(isinstance(row, list) for row in data)):
            raise FormatError(f"{spec[1:]}: expected a JSON array of arrays")
        return IndexChain.from_sets([set(int(k) for k in row)
                                     for row in data])
    try:
        indices = [int(tok) for tok in spec.split(",") if tok != ""]
    except ValueError as exc:
        raise FormatError(f"bad index list {spec!r}") from exc
    if not indices:
        raise FormatError("empty index list")
    return sorted(set(indices))


# ---------------------------------------------------------------------------
# error reporting


def _fail(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message},
                                sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommand implementations


def _dry_run_payload(args, params: dict, inputs, outputs) -> str:
    return dump_json({
        "dry_run": True,
        "subcommand": args.subcommand,
        "threads": args.threads,
        "params": params,
        "inputs": list(inputs),
        "outputs": list(outputs),
    })


def _require_readable(paths):
    for path in paths:
        if not os.path.exists(path):
            raise DomainError(f"input file does not exist: {path}")


def _cmd_build(args) -> int:
    params = {"system": args.system, "n": args.n, "levels": args.levels,
              "delta": args.delta, "alpha": args.alpha, "out": args.out}
    if args.levels > MAX_LEVEL:
        raise ResourceError(f"levels {args.levels} exceeds cap {MAX_LEVEL}")
    if args.dry_run:
        print(_dry_run_payload(args, params, [], [args.out]))
        return 0
    grid = make_grid(args.levels)
    builder = build_haar if args.system == "haar" else build_franklin
    system = builder(args.n, grid, delta=args.delta, alpha=args.alpha)
    save_system(system, args.out)
    return 0


def _cmd_verify(args) -> int:
    params = {"in": args.infile, "delta": args.delta, "alpha": args.alpha,
              "report": args.report}
    if args.dry_run:
        _require_readable([args.infile])
        print(_dry_run_payload(args, params, [args.infile], [args.report]))
        return 0
    _require_readable([args.infile])
    system = load_system(args.infile)
    rep = verify_wavelet_type(system, args.delta, args.alpha)
    payload = {
        "system": rep.name,
        "size": rep.size,
        "level": rep.level,
        "delta": rep.delta,
        "alpha": rep.alpha,
        "mean_zero_max": rep.mean_zero_max,
        "decay_constant": rep.decay_constant,
        "decay_witness": rep.decay_witness,
        "holder_constant": rep.holder_constant,
        "holder_witness": rep.holder_witness,
        "local_mass_radius": rep.local_mass_radius,
        "local_mass_witness": rep.local_mass_witness,
        "passes": {
            "mean_zero": rep.mean_zero_pass,
            "decay": rep.decay_pass,
            "holder": rep.holder_pass,
            "local_mass": rep.local_mass_pass,
        },
        "pass": bool(rep.mean_zero_pass and rep.decay_pass
                     and rep.holder_pass and rep.local_mass_pass),
    }
    write_json(args.report, payload)
    return 0


def _cmd_op(args) -> int:
    params = {"in": args.infile, "f": args.f, "op": args.op, "g": args.g,
              "q": args.q, "m": args.m, "out": args.out}
    if args.op == "project" and args.g is None:
        raise UsageError("op project requires --g")
    if args.dry_run:
        _require_readable([args.infile])
        print(_dry_run_payload(args, params, [args.infile], [args.out]))
        return 0
    _require_readable([args.infile])
    system = load_system(args.infile)
    f = parse_func(args.f, system.grid)
    if args.op == "project":
        gspec = parse_gspec(args.g)
        if isinstance(gspec, IndexChain):
            result = chain_maximal(f, system, gspec)
        else:
            result = project(f, system, gspec)
    elif args.op == "phi-block":
        result = phi_block(f, system, args.m)
    elif args.op == "haar-block":
        result = haar_block(f, args.m)
    elif args.op == "mq":
        result = hl_maximal(f, q=args.q if args.q is not None else 1.0)
    elif args.op == "md":
        result = dyadic_maximal(f)
    elif args.op == "square":
        result = haar_square(f)
    else:  # majorant
        coeffs = coefficients(f, system)
        result = block_majorant(coeffs, system, q=args.q)
    write_csv(args.out, ("cell", "value"),
              [(i, v) for i, v in enumerate(result.values)])
    return 0


# --- check: named inequality audits ---------------------------------------

_CHECK_DEFAULTS = {
    "y3": {"m": 2, "delta": None, "points": 512},
    "L21": {"p": 2.0, "q": 1.0, "count": 8, "levels": 5, "seed": None,
            "mode": "auto"},
    "L31": {"m": 2, "interval": [0.25, 0.5], "delta": None},
    "L32": {"m": 2, "n": 5, "seed": None, "alpha": None, "mode": "auto"},
    "L33": {"m": 5, "n": 2, "seed": None, "q": None, "delta": None,
            "mode": "auto"},
    "LP": {"p": 2.0, "sign_samples": 64, "seed": None, "levels": 5},
    "conv": {"trials": 1000, "seed": None},
    "FS": {"m": 2, "seed": None, "mode": "auto"},
    "CWW": {"count": 30, "levels": 8, "seed": None, "quantiles": 20},
    "CZ": {"lam": None, "beta": None, "delta": None, "alpha": None,
           "points": 512, "seed": None},
}
_SYSTEM_FREE_LEMMAS = ("conv",)


def _resolve_check_params(lemma: str, raw: str | None, seed: int) -> dict:
    params = dict(_CHECK_DEFAULTS[lemma])
    if raw:
        text = raw
        if raw.startswith("@"):
            try:
                with open(raw[1:], "r") as fh:
                    text = fh.read()
            except OSError as exc:
                raise FormatError(f"cannot read params file {raw[1:]}: {exc}") \
                    from exc
        try:
            given = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"--params is not valid JSON: {exc}") from exc
        if not isinstance(given, dict):
            raise FormatError("--params must be a JSON object")
        for key, value in given.items():
            if key not in params:
                raise DomainError(
                    f"unknown parameter {key!r} for check {lemma} "
                    f"(valid: {', '.join(sorted(params))})")
            params[key] = value
    if "seed" in params and params["seed"] is None:
        params["seed"] = seed
    return params


def _sign_vector(size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.choice(np.array([-1.0, 1.0]), size=size)


def _estimate_payload(est: ConstantEstimate) -> dict:
    return {"name": est.name, "ratio_sup": est.ratio_sup,
            "witness": est.witness, "samples": est.samples,
            "level": est.level}


def _run_check(lemma: str, system, params: dict) -> dict:
    """One named check; returns {ratio_sup, witness, samples, J}."""
    if lemma == "y3":
        est = check_kernel_block(system, params["m"], delta=params["delta"],
                                 points=params["points"])
        return {"ratio_sup": est.ratio_sup, "witness": est.witness,
                "samples": est.samples, "J": system.grid.level}
    if lemma == "L21":
        family = [random_haar_polynomial(system.grid, params["levels"],
                                         seed=params["seed"] + i)
                  for i in range(params["count"])]
        est = check_vector_maximal(family, params["p"], q=params["q"],
                                   mode=params["mode"])
        return {"ratio_sup": est.ratio_sup, "witness": est.witness,
                "samples": est.samples, "J": system.grid.level}
    if lemma == "L31":
        pair = check_indicator_decay(system, params["m"],
                                     tuple(params["interval"]),
                                     delta=params["delta"])
        subs = {k: _estimate_payload(v) for k, v in pair.items()}
        ratios = [v.ratio_sup for v in pair.values()]
        return {"ratio_sup": max(ratios), "witness": subs,
                "samples": max(v.samples for v in pair.values()),
                "J": system.grid.level}
    if lemma in ("L32", "L33"):
        coeffs = _sign_vector(system.size, params["seed"])
        if lemma == "L32":
            est = check_interaction_fine_by_coarse(
                system, coeffs, params["m"], params["n"],
                alpha=params["alpha"], mode=params["mode"])
        else:
            est = check_interaction_coarse_by_fine(
                system, coeffs, params["m"], params["n"], q=params["q"],
                delta=params["delta"], mode=params["mode"])
        return {"ratio_sup": est.ratio_sup, "witness": est.witness,
                "samples": est.samples, "J": system.grid.level}
    if lemma == "LP":
        f = random_haar_polynomial(system.grid, params["levels"],
                                   seed=params["seed"])
        result = check_littlewood_paley(system, f, params["p"],
                                        sign_samples=params["sign_samples"],
                                        seed=params["seed"])
        subs = {k: _estimate_payload(v) for k, v in result.items()}
        ratios = [v.ratio_sup for v in result.values()]
        return {"ratio_sup": max(ratios), "witness": subs,
                "samples": max(v.samples for v in result.values()),
                "J": system.grid.level}
    if lemma == "conv":
        rng = np.random.default_rng(params["seed"])
        best = check_convolution_inequality(np.array([1.0, 1.0]),
                                            np.array([1.0]))
        worst = best
        for _ in range(params["trials"]):
            la = int(rng.integers(1, 9))
            lb = int(rng.integers(1, 9))
            est = check_convolution_inequality(rng.standard_normal(la),
                                               rng.standard_normal(lb))
            if est.ratio_sup > worst.ratio_sup:
                worst = est
        return {"ratio_sup": worst.ratio_sup, "witness": worst.witness,
                "samples": params["trials"] + 1, "J": 0}
    if lemma == "FS":
        coeffs = _sign_vector(system.size, params["seed"])
        result = check_block_domination(system, coeffs, params["m"],
                                        mode=params["mode"])
        subs = {k: _estimate_payload(v) for k, v in result.items()}
        ratios = [v.ratio_sup for v in result.values()]
        return {"ratio_sup": max(ratios), "witness": subs,
                "samples": max(v.samples for v in result.values()),
                "J": system.grid.level}
    if lemma == "CWW":
        if params["levels"] > system.grid.level:
            raise DomainError(
                f"CWW levels={params['levels']} exceeds grid level "
                f"{system.grid.level}")
        reports = [check_good_lambda(
            random_haar_polynomial(system.grid, params["levels"],
                                   seed=params["seed"] + i),
            quantiles=params["quantiles"])
            for i in range(params["count"])]
        c, r2, table = pooled_good_lambda(reports)
        return {"ratio_sup": c,
                "witness": {"r2": r2,
                            "pooled": [list(map(float, row))
                                       for row in table]},
                "samples": params["count"], "J": system.grid.level}
    if lemma == "CZ":
        result = check_cz_kernel(system, lam=params["lam"],
                                 beta=params["beta"], delta=params["delta"],
                                 alpha=params["alpha"],
                                 points=params["points"],
                                 seed=params["seed"])
        subs = {k: _estimate_payload(v) for k, v in result.items()}
        ratios = [v.ratio_sup for v in result.values()]
        return {"ratio_sup": max(ratios), "witness": subs,
                "samples": max(v.samples for v in result.values()),
                "J": system.grid.level}
    raise DomainError(f"unknown lemma token {lemma!r}")


def _coarser_system(system):
    """Rebuild the named system one level lower for the stability ratio;
    None when the construction does not fit the coarser grid."""
    if system.name not in ("haar", "franklin"):
        return None
    if system.grid.level < 1:
        return None
    builder = build_haar if system.name == "haar" else build_franklin
    try:
        return builder(system.size, make_grid(system.grid.level - 1),
                       delta=system.delta, alpha=system.alpha)
    except (DomainError, ResourceError):
        return None


def _cmd_check(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    params = _resolve_check_params(args.lemma, args.params, seed)
    needs_system = args.lemma not in _SYSTEM_FREE_LEMMAS
    if needs_system and not args.system:
        raise UsageError(f"check {args.lemma} requires --system")
    if args.dry_run:
        if needs_system:
            _require_readable([args.system])
        print(_dry_run_payload(args, {"lemma": args.lemma, "params": params},
                               [args.system] if needs_system else [],
                               [args.report] if args.report else []))
        return 0
    system = None
    if needs_system:
        _require_readable([args.system])
        system = load_system(args.system)
    result = _run_check(args.lemma, system, params)
    stability = {"J_prev_ratio": None}
    if needs_system:
        coarser = _coarser_system(system)
        if coarser is not None:
            try:
                prev = _run_check(args.lemma, coarser, params)
            except (DomainError, ResourceError):
                prev = None
            if prev and prev["ratio_sup"] and np.isfinite(prev["ratio_sup"]) \
                    and np.isfinite(result["ratio_sup"]):
                stability["J_prev_ratio"] = (result["ratio_sup"]
                                             / prev["ratio_sup"])
    payload = {
        "lemma": args.lemma,
        "params": params,
        "ratio_sup": result["ratio_sup"],
        "witness": result["witness"],
        "samples": result["samples"],
        "J": result["J"],
        "stability": stability,
    }
    if args.report:
        write_json(args.report, payload)
    else:
        print(dump_json(payload))
    return 0


def _cmd_estimate(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    cfg_fields = {
        "variant": args.variant,
        "p": args.p,
        "n": max(args.n) if args.n else 1,
        "restarts": args.restarts,
        "iterations": args.iterations,
        "seed": seed,
        "ensemble": args.ensemble,
        "active": tuple(args.active) if args.active else (),
    }
    params = dict(cfg_fields)
    params.update({"system": args.system, "n_list": args.n,
                   "report": args.report})
    if args.dry_run:
        _require_readable([args.system])
        SearchConfig(**cfg_fields)  # validate ranges
        print(_dry_run_payload(args, params, [args.system], [args.report]))
        return 0
    _require_readable([args.system])
    if not args.n:
        raise UsageError("estimate requires a nonempty --n list")
    system = load_system(args.system)
    cfg = SearchConfig(**cfg_fields)
    records = estimate_A_sweep(system, args.n, cfg, threads=args.threads)
    write_estimates_csv(args.report, records)
    return 0


def _cmd_fit(args) -> int:
    params = {"in": args.infile, "report": args.report}
    if args.dry_run:
        _require_readable([args.infile])
        print(_dry_run_payload(args, params, [args.infile],
                               [args.report] if args.report else []))
        return 0
    _require_readable([args.infile])
    rows = read_estimates_csv(args.infile)
    if not rows:
        raise DomainError("estimate table has no rows to fit")
    groups = {}
    for row in rows:
        groups.setdefault((row["variant"], row["p"]), []).append(row)

    class _Rec:
        def __init__(self, row):
            self.n = row["n"]
            self.best_value = row["best_value"]

    fits = []
    for (variant, p) in sorted(groups):
        fit = fit_growth([_Rec(r) for r in groups[(variant, p)]])
        fit_out = {"variant": variant, "p": p}
        fit_out.update(fit)
        fits.append(fit_out)
    payload = {"fits": fits}
    if args.report:
        write_json(args.report, payload)
    else:
        print(dump_json(payload))
    return 0


# ---------------------------------------------------------------------------
# parser assembly and dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weyl-lab",
        description="Laboratory for wavelet-type orthonormal systems: "
                    "build/verify systems, apply operators, audit "
                    "inequalities, estimate growth sequences.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--dry-run", action="store_true",
                       help="validate configuration and print the resolved "
                            "parameter map without computing")
        p.add_argument("--threads", type=_positive_int, default=1,
                       help="worker cap (outputs are independent of it)")

    p = sub.add_parser("build", help="construct a system and write it")
    p.add_argument("--system", required=True, choices=("haar", "franklin"))
    p.add_argument("--n", required=True, type=_positive_int,
                   help="number of functions")
    p.add_argument("--levels", required=True, type=_positive_int,
                   help="dyadic resolution level J (2**J cells)")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("verify", help="audit wavelet-type conditions")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--delta", required=True, type=float)
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--report", required=True)
    common(p)

    p = sub.add_parser("op", help="apply one operator to a function")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--f", required=True,
                   help="indicator:a,b | haarpoly:seed,levels | "
                        "step:seed[,pieces] | file:PATH")
    p.add_argument("--op", required=True, choices=OP_TOKENS)
    p.add_argument("--g", default=None,
                   help="comma-separated indices, or @chain.json with an "
                        "array of index arrays (runs the running maximum "
                        "over the nested projections)")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--m", type=_positive_int, default=1,
                   help="block index for phi-block/haar-block")
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("check", help="run one named inequality audit")
    p.add_argument("--lemma", required=True, choices=LEMMA_TOKENS)
    p.add_argument("--system", default=None)
    p.add_argument("--params", default=None,
                   help="JSON object or @file.json")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report", default=None,
                   help="output path (stdout when omitted)")
    common(p)

    p = sub.add_parser("estimate",
                       help="search growth-sequence lower estimates")
    p.add_argument("--system", required=True)
    p.add_argument("--variant", required=True, choices=("sng", "mon", "full"))
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n", required=True, type=_int_list,
                   help="comma-separated chain lengths")
    p.add_argument("--restarts", type=_positive_int, default=8)
    p.add_argument("--iterations", type=int, default=40)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ensemble", choices=("auto", "random"), default="auto")
    p.add_argument("--active", type=_int_list, default=None,
                   help="restrict the index pool")
    p.add_argument("--report", required=True, help="output CSV path")
    common(p)

    p = sub.add_parser("fit", help="fit growth of an estimate table")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--report", default=None,
                   help="output path (stdout when omitted)")
    common(p)

    return parser


_DISPATCH = {
    "build": _cmd_build,
    "verify": _cmd_verify,
    "op": _cmd_op,
    "check": _cmd_check,
    "estimate": _cmd_estimate,
    "fit": _cmd_fit,
}


def run(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return _DISPATCH[args.subcommand](args)


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        return run(argv)
    except SystemExit as exc:  # argparse usage failure
        code = exc.code if isinstance(exc.code, int) else 2
        return code
    except UsageError as exc:
        _fail("UsageError", str(exc))
        return 2
    except FormatError as exc:
        _fail("FormatError", str(exc))
        return 3
    except ResourceError as exc:
        _fail("ResourceError", str(exc))
        return 5
    except NumericError as exc:
        _fail("NumericError", str(exc))
        return 4
    except DomainError as exc:
        _fail(type(exc).__name__, str(exc))
        return 4
    except WeylLabError as exc:
        _fail(type(exc).__name__, str(exc))
        return 4


if __name__ == "__main__":
    sys.exit(main())
