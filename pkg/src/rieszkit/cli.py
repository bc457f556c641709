"""Command-line entry point.

Every run is reproducible from its own output: JSON reports embed the
exact argument vector that produced them, and the report subcommand
replays such a vector.  Output files are written to a temporary path
and renamed into place, so a crashed run never leaves a half-written
report.  Exit codes: 0 success, 1 input or usage error, 2 an invariant
check failed on otherwise valid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .covering import (
    BesicovitchOverlapError,
    OpenSetOracle,
    OracleInconsistencyError,
    verify_whitney,
    whitney_decompose,
)
from .generators import GeneratorSpec
from .goodlambda import (
    GoodLambdaScanConfig,
    verify_conditional,
    verify_norm_inequality,
    verify_two_term,
    verify_weak_type,
    verify_weighted,
)
from .measure import (
    CenterPolicy,
    MeasureFormatError,
    OperatorParams,
    ScaleRange,
    doubling_constant_scan,
    growth_constant_scan,
    load_measure,
    load_points,
    save_measure,
)
from .potentials import (
    PotentialOptions,
    TreeEvaluator,
    maximal_functions_many,
    riesz_potential_direct_many,
)
from .weights import ainfty_fit, ap_constant, atom_centered_cube_family

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit(2)
        raise _UsageError(message)


def _write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, obj) -> None:
    _write_atomic(path, json.dumps(obj, indent=1) + "\n")


def _render_atomic(path: str, render) -> None:
    """Run a path-taking writer against a temp file, then rename."""
    tmp = f"{path}.tmp{os.getpid()}"
    render(tmp)
    os.replace(tmp, path)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise _UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _box_pairs(text: str):
    vals = _floats(text)
    if len(vals) % 2 != 0 or not vals:
        raise _UsageError(f"--box needs lo,hi pairs, got {text!r}")
    return tuple((vals[i], vals[i + 1]) for i in range(0, len(vals), 2))


def _parse_balls(text: str):
    centers, radii = [], []
    for part in text.split(";"):
        vals = _floats(part)
        if len(vals) < 2:
            raise _UsageError(f"each ball needs center coordinates and a radius: {part!r}")
        centers.append(vals[:-1])
        radii.append(vals[-1])
    if len({len(c) for c in centers}) != 1:
        raise _UsageError("all ball centers must share one dimension")
    return np.array(centers), np.array(radii)


def _chunked(fn, rows: np.ndarray, threads: int) -> np.ndarray:
    """Evaluate fn over row chunks in a pool; order-stable concatenation."""
    if threads <= 1 or rows.shape[0] <= threads:
        return fn(rows)
    splits = np.array_split(rows, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, splits))
    return np.concatenate(parts)


def _opts(args) -> PotentialOptions:
    return PotentialOptions(
        exclude_diagonal=not args.include_diagonal,
        method=args.method,
        tree_theta=args.theta,
        tree_tol=args.tol,
        tree_leaf_size=args.leaf_size,
    )


def _load_measure_for(args):
    mu, f, w = load_measure(args.measure)
    if f is None:
        f = np.full(mu.natoms, args.f_const)
    return mu, f, w


def _add_operator_flags(p, need_alpha=True):
    p.add_argument("--measure", required=True, help="measure file path")
    p.add_argument("--N", dest="growth_exp", type=float, required=True,
                   help="growth exponent of the measure")
    if need_alpha:
        p.add_argument("--alpha", type=float, required=True, help="potential order")
    p.add_argument("--f-const", type=float, default=1.0,
                   help="density value used when the file has no f column")
    p.add_argument("--method", choices=("direct", "tree"), default="direct")
    p.add_argument("--theta", type=float, default=0.3, help="tree opening parameter")
    p.add_argument("--tol", type=float, default=1e-3, help="tree relative error budget")
    p.add_argument("--leaf-size", type=int, default=48)
    p.add_argument("--include-diagonal", action="store_true",
                   help="keep the infinite self-term at atoms")
    p.add_argument("--threads", type=int, default=1)


def _potential_values(mu, f, params, opts, queries, threads):
    if opts.method == "tree":
        ev = TreeEvaluator(mu, f, params, opts)
        return _chunked(lambda q: ev.evaluate(q), queries, threads)
    return _chunked(
        lambda q: riesz_potential_direct_many(mu, f, params, q, opts), queries, threads
    )


def _maximal_values(mu, f, params, queries, threads):
    def both(q):
        frac, hl = maximal_functions_many(mu, f, params, q)
        return np.column_stack([frac, hl])

    out = _chunked(both, queries, threads)
    return out[:, 0], out[:, 1]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_gen(args, argv) -> int:
    params: dict = {}
    if args.kind in ("lebesgue_grid", "power_density", "random_atoms"):
        if args.box is None:
            raise _UsageError(f"--box is required for {args.kind}")
        params["bounds"] = _box_pairs(args.box)
    if args.kind in ("lebesgue_grid", "power_density"):
        if args.h is None:
            raise _UsageError(f"--h is required for {args.kind}")
        params["h"] = args.h
    if args.kind == "power_density":
        if args.gamma is None:
            raise _UsageError("--gamma is required for power_density")
        params["gamma"] = args.gamma
        if args.center is not None:
            params["center"] = _floats(args.center)
    if args.kind == "segment_in_plane":
        params["length"] = args.length
        params["h"] = args.h if args.h is not None else 2.0**-7
        params["bed_spacing"] = args.bed_spacing
        params["include_bed"] = not args.no_bed
        if args.box is not None:
            params["plane_box"] = _box_pairs(args.box)
    if args.kind == "cantor_like":
        params["levels"] = args.levels
        params["ratio"] = args.rho
        params["theta"] = args.theta_share
    if args.kind == "random_atoms":
        params["count"] = args.count
        if args.mass_dist:
            name, _, rest = args.mass_dist.partition(":")
            params["mass_dist"] = (name, *_floats(rest))
    mu = GeneratorSpec(args.kind, params, args.seed).build()

    f = w = None
    if args.f_indicator is not None:
        lo, hi = _floats(args.f_indicator)
        inside = np.all((mu.points >= lo) & (mu.points <= hi), axis=1)
        f = inside.astype(float)
    elif args.f_const is not None:
        f = np.full(mu.natoms, args.f_const)
    if args.w_one_plus_abs:
        w = 1.0 + np.sqrt(np.sum(mu.points**2, axis=1))
    elif args.w_const is not None:
        w = np.full(mu.natoms, args.w_const)
    if w is not None and f is None:
        f = np.ones(mu.natoms)
    _render_atomic(args.out, lambda p: save_measure(p, mu, f, w))
    print(f"wrote {mu.natoms} atoms to {args.out}")
    return 0


def _cmd_potential(args, argv) -> int:
    mu, f, _ = _load_measure_for(args)
    params = _params_with_dim(args, mu)
    opts = _opts(args)
    queries = load_points(args.queries)
    if queries.shape[1] != mu.ambient_dim:
        raise ValueError(
            f"query dimension {queries.shape[1]} does not match measure dimension "
            f"{mu.ambient_dim}"
        )
    values = _potential_values(mu, f, params, opts, queries, args.threads)
    frac, hl = _maximal_values(mu, f, params, queries, args.threads)
    cols = [f"x_{a+1}" for a in range(mu.ambient_dim)] + ["I_alpha", "M_alpha", "M_HL"]
    lines = [",".join(cols)]
    for i in range(queries.shape[0]):
        row = [repr(float(v)) for v in queries[i]]
        row += [repr(float(values[i])), repr(float(frac[i])), repr(float(hl[i]))]
        lines.append(",".join(row))
    _write_atomic(args.out, "\n".join(lines) + "\n")
    if args.report:
        _write_json(args.report, {
            "argv": argv,
            "version": __version__,
            "n_queries": int(queries.shape[0]),
            "options": {
                "method": opts.method, "theta": opts.tree_theta,
                "tol": opts.tree_tol, "exclude_diagonal": opts.exclude_diagonal,
            },
        })
    print(f"evaluated {queries.shape[0]} queries to {args.out}")
    return 0


def _cmd_maximal(args, argv) -> int:
    mu, f, _ = _load_measure_for(args)
    params = _params_with_dim(args, mu)
    queries = load_points(args.queries)
    frac, hl = _maximal_values(mu, f, params, queries, args.threads)
    cols = [f"x_{a+1}" for a in range(mu.ambient_dim)] + ["M_alpha", "M_HL"]
    lines = [",".join(cols)]
    for i in range(queries.shape[0]):
        row = [repr(float(v)) for v in queries[i]]
        row += [repr(float(frac[i])), repr(float(hl[i]))]
        lines.append(",".join(row))
    _write_atomic(args.out, "\n".join(lines) + "\n")
    print(f"evaluated {queries.shape[0]} queries to {args.out}")
    return 0


def _cmd_whitney(args, argv) -> int:
    centers, radii = _parse_balls(args.balls)
    oracle = OpenSetOracle.from_balls(centers, radii, resolution_floor=args.floor)
    decomp = whitney_decompose(oracle, dilation_delta=args.delta)
    check = verify_whitney(decomp, oracle=oracle, seed=args.seed)
    if args.format in ("csv", "both"):
        _render_atomic(args.out, decomp.to_csv)
    if args.format in ("json", "both"):
        report_path = args.report or (args.out + ".json")
        _write_json(report_path, {
            "argv": argv,
            "version": __version__,
            "n_cubes": len(decomp),
            "uncovered_mass_bound": decomp.uncovered_mass_bound,
            "cloud_size": decomp.cloud_size,
            "note": decomp.note,
            "check": {
                "passed": check.passed,
                "max_side_ratio": check.max_side_ratio,
                "max_neighbors": check.max_neighbors,
                "max_overlap": check.max_overlap,
                "failures": check.failures,
            },
        })
    print(
        f"{len(decomp)} cubes, uncovered volume bound {decomp.uncovered_mass_bound:.3g}, "
        f"checks {'passed' if check.passed else 'FAILED'}"
    )
    if not check.passed:
        for msg in check.failures:
            print(f"  {msg}", file=sys.stderr)
        return 2
    return 0


def _cmd_doubling(args, argv) -> int:
    mu, _, _ = load_measure(args.measure)
    if args.rmin is not None and args.rmax is not None:
        scales = ScaleRange(args.rmin, args.rmax, args.samples)
    else:
        scales = ScaleRange.for_measure(mu, num_samples=args.samples)
    if args.centers == "atoms+grid":
        if args.grid_spacing is None:
            raise _UsageError("--grid-spacing is required with --centers atoms+grid")
        policy = CenterPolicy.atoms_plus_grid(args.grid_spacing)
    else:
        policy = CenterPolicy.atoms()
    N = args.growth_exp if args.growth_exp is not None else float(mu.ambient_dim)
    alpha = args.alpha if args.alpha is not None else N / 2.0
    params = OperatorParams(mu.ambient_dim, N, alpha)
    growth = growth_constant_scan(mu, params, scales, policy)
    doubling = doubling_constant_scan(mu, scales, policy)
    _write_json(args.out, {
        "argv": argv,
        "version": __version__,
        "growth": growth.to_dict(),
        "doubling": doubling.to_dict(),
    })
    print(
        f"growth constant {growth.constant:.6g}, "
        f"doubling constant {doubling.constant:.6g}"
    )
    return 0


def _cmd_goodlambda(args, argv) -> int:
    mu, f, w = _load_measure_for(args)
    params = _params_with_dim(args, mu)
    opts = _opts(args)
    cfg = GoodLambdaScanConfig(
        k=args.k,
        lambda_count=args.lambda_count,
        lambda_min=args.lambda_min,
        lambda_max=args.lambda_max,
        eps_grid=tuple(_floats(args.eps)) if args.eps else tuple(2.0 ** -np.arange(9.0)),
        strict_maximal_cap=args.strict_maximal,
    )
    iaf = _potential_values(mu, f, params, opts, mu.points, args.threads)
    maf = _chunked(
        lambda q: maximal_functions_many(mu, f, params, q)[0], mu.points, args.threads
    )
    if args.mode == "conditional":
        report = verify_conditional(mu, f, params, cfg, opts, iaf=iaf, maf=maf)
    elif args.mode == "two_term":
        report = verify_two_term(mu, f, params, cfg, opts, iaf=iaf, maf=maf)
    else:
        if w is None:
            raise ValueError("weighted mode needs a w column in the measure file")
        report = verify_weighted(
            mu, f, w, params, cfg, etas=tuple(_floats(args.eta)), opts=opts,
            iaf=iaf, maf=maf,
        )
    header = report.header()
    header["argv"] = argv
    header["version"] = __version__
    if args.format in ("json", "both"):
        _write_json(args.out + ".json", {"header": header, "rows": list(report.rows())})
    if args.format in ("csv", "both"):
        _render_atomic(args.out + ".csv", report.to_csv)
    if args.mode == "weighted":
        for eta, eps, idx in report.eta_results:
            state = "not achieved on the grid" if eps is None else f"eps = {eps}"
            print(f"eta = {eta}: {state}")
    else:
        print(f"C_emp = {report.C_emp:.6g}, exponent fit = {report.exponent_fit}")
        if report.violations:
            print(f"{report.violations} violation rows", file=sys.stderr)
            return 2
    return 0


def _cmd_normineq(args, argv) -> int:
    mu, f, w = _load_measure_for(args)
    if args.weighted and w is None:
        raise ValueError("--weighted needs a w column in the measure file")
    params = _params_with_dim(args, mu)
    opts = _opts(args)
    iaf = _potential_values(mu, f, params, opts, mu.points, args.threads)
    maf = _chunked(
        lambda q: maximal_functions_many(mu, f, params, q)[0], mu.points, args.threads
    )
    report = verify_norm_inequality(
        mu, f, params, args.p, w=w if args.weighted else None, opts=opts,
        iaf=iaf, maf=maf,
    )
    out = report.to_dict()
    out["argv"] = argv
    out["version"] = __version__
    _write_json(args.out, out)
    print(f"norm ratio = {report.ratio}")
    if report.zero_denominator_flag:
        print("maximal norm vanished while the potential norm did not", file=sys.stderr)
        return 2
    return 0


def _cmd_weaktype(args, argv) -> int:
    mu, f, _ = _load_measure_for(args)
    params = _params_with_dim(args, mu)
    opts = _opts(args)
    iaf = _potential_values(mu, f, params, opts, mu.points, args.threads)
    report = verify_weak_type(
        mu, f, params, args.p, exponent_source=args.exponent_source, opts=opts, iaf=iaf
    )
    out = report.to_dict()
    out["argv"] = argv
    out["version"] = __version__
    _write_json(args.out, out)
    print(f"q = {report.q:.6g}, C_emp = {report.c_emp}")
    return 0


def _cmd_weights(args, argv) -> int:
    mu, f, w = load_measure(args.measure)
    if w is None:
        raise ValueError("weights subcommand needs a w column in the measure file")
    if args.rmin is not None and args.rmax is not None:
        scales = ScaleRange(args.rmin, args.rmax, args.samples)
    else:
        scales = ScaleRange.for_measure(mu, num_samples=args.samples)
    family = atom_centered_cube_family(mu, scales)
    ap = ap_constant(mu, w, args.p, family, dilation=args.dilation,
                     family_note=f"atom-centered, {scales.num_samples} sides + support")
    fit = ainfty_fit(mu, w, [mu.support_cube()], subset_sampler=args.sampler,
                     num_samples=args.num_samples, seed=args.seed)
    _write_json(args.out, {
        "argv": argv,
        "version": __version__,
        "ap": ap.to_dict(),
        "ainfty": fit.to_dict(),
    })
    print(f"A_p constant = {ap.value:.6g}, comparison fit c0 = {fit.c0:.6g} "
          f"at delta = {fit.delta}")
    return 0


def _cmd_report(args, argv) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    stored = data.get("argv") or data.get("header", {}).get("argv")
    if not stored:
        raise ValueError(f"{args.config} embeds no argument vector")
    if stored[0] == "report":
        raise ValueError("refusing to replay a report of a report")
    return _dispatch([str(t) for t in stored])


def _params_with_dim(args, mu) -> OperatorParams:
    return OperatorParams(mu.ambient_dim, args.growth_exp, args.alpha)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    top = _Parser(prog="rieszkit", description=__doc__)
    top.add_argument("--version", action="version", version=f"rieszkit {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated measure file")
    p.add_argument("--kind", required=True, choices=(
        "lebesgue_grid", "power_density", "segment_in_plane", "cantor_like",
        "random_atoms"))
    p.add_argument("--out", required=True)
    p.add_argument("--h", type=float)
    p.add_argument("--box", help="lo,hi per axis, flattened")
    p.add_argument("--gamma", type=float)
    p.add_argument("--center")
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--bed-spacing", type=float, default=0.125)
    p.add_argument("--no-bed", action="store_true")
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--rho", type=float, default=1.0 / 3.0)
    p.add_argument("--theta-share", type=float, default=0.5)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--mass-dist", default="uniform:0.5,1.5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--f-indicator", help="lo,hi box; f = 1 inside, 0 outside")
    p.add_argument("--f-const", type=float, default=None)
    p.add_argument("--w-one-plus-abs", action="store_true",
                   help="attach the weight 1 + |x|")
    p.add_argument("--w-const", type=float, default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("potential", help="evaluate the potential and maximal functions")
    _add_operator_flags(p)
    p.add_argument("--queries", required=True, help="query point file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--report", help="optional JSON run summary")
    p.set_defaults(func=_cmd_potential)

    p = sub.add_parser("maximal", help="evaluate the maximal functions only")
    _add_operator_flags(p)
    p.add_argument("--queries", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_maximal)

    p = sub.add_parser("whitney", help="decompose a union of balls")
    p.add_argument("--balls", required=True,
                   help="semicolon-separated balls, each 'c_1,...,c_n,r'")
    p.add_argument("--floor", type=float, default=None,
                   help="smallest cube side (default: box side / 512)")
    p.add_argument("--delta", type=float, default=0.125)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="cube CSV path")
    p.add_argument("--report", help="JSON summary path")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.set_defaults(func=_cmd_whitney)

    p = sub.add_parser("doubling", help="growth and doubling constant scans")
    p.add_argument("--measure", required=True)
    p.add_argument("--N", dest="growth_exp", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--rmin", type=float)
    p.add_argument("--rmax", type=float)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--centers", choices=("atoms", "atoms+grid"), default="atoms")
    p.add_argument("--grid-spacing", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_doubling)

    p = sub.add_parser("goodlambda", help="distribution inequality scans")
    _add_operator_flags(p)
    p.add_argument("--mode", choices=("conditional", "two_term", "weighted"),
                   required=True)
    p.add_argument("--k", type=float, default=2.0)
    p.add_argument("--eps", help="comma-separated eps grid")
    p.add_argument("--lambda-count", type=int, default=64)
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--strict-maximal", action="store_true")
    p.add_argument("--eta", default="0.5,0.1")
    p.add_argument("--out", required=True, help="output base path")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.set_defaults(func=_cmd_goodlambda)

    p = sub.add_parser("normineq", help="norm comparison of potential vs maximal")
    _add_operator_flags(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_normineq)

    p = sub.add_parser("weaktype", help="weak-type ratio of the potential")
    _add_operator_flags(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--exponent-source", choices=("growth", "ambient"),
                   default="growth")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_weaktype)

    p = sub.add_parser("weights", help="Muckenhoupt constant and comparison fit")
    p.add_argument("--measure", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--dilation", type=float, default=1.0)
    p.add_argument("--sampler", choices=("bernoulli", "exhaustive"),
                   default="bernoulli")
    p.add_argument("--num-samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rmin", type=float)
    p.add_argument("--rmax", type=float)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("report", help="replay the argv embedded in a JSON report")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_report)

    return top


def _strip_threads(argv: list[str]) -> list[str]:
    """Drop --threads from an argv before embedding it in a report.

    Thread count never changes any output value, and keeping it would
    make otherwise identical reports differ byte-for-byte.
    """
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--threads":
            skip = True
            continue
        if tok.startswith("--threads="):
            continue
        out.append(tok)
    return out


def _dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args, _strip_threads(argv))


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        return _dispatch(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MeasureFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (BesicovitchOverlapError, OracleInconsistencyError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
