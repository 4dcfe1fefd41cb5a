"""Command-line front end.

Subcommands build graphs and export spectra, overlap sweeps, critical
couplings, success-probability grids, scaling fits, bound reports, and
closed-form cross-checks as plain files (CSV/JSON/edge lists) for
external plotting.  All commands are non-interactive and deterministic:
identical invocations produce byte-identical files, regardless of the
thread count used for grid sweeps.

Exit codes: 0 success; 2 configuration error; 3 numerical failure
(including failed bound checks and failed oracle checks); 4 dense-size
guard exceeded.  Failures emit a one-line JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import ScalingModel, exponent_prediction, fit_scaling
from .engine import (
    SearchProblem,
    critical_gamma,
    oscillation_period,
    overlap_sweep,
    overlap_sweep_csv,
    propagate_krylov,
    success_grid,
    success_probability,
    verify_bounds,
)
from .errors import (
    DEFAULT_DENSE_GUARD,
    DENSE_GUARD_ENV,
    ConfigError,
    CtqwError,
    DenseGuardError,
    NumericalError,
)
from .graphs import Family, Graph, GraphSpec, build, default_target
from .oracles import (
    complete_success,
    decimation_identity_residuals,
    dsg_exact_spectrum,
    dsg_zeta_closed,
    dsg_zeta_direct,
)
from .spectra import fit_alpha, laplacian_decomposition, spectral_sums, spectrum_csv

__all__ = ["main"]

_ORACLE_CHECKS = (
    "complete-vs-engine",
    "dsg-spectrum",
    "dsg-zeta",
    "decimation",
    "krylov-vs-spectral",
)


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _write_atomic(path: Path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def _parse_int_range(text: str, name: str) -> list[int]:
    """Parse "3..6" into [3, 4, 5, 6] and "4" into [4]."""
    text = text.strip()
    try:
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise ConfigError(
            f"{name} must be an integer or a range like 3..6, got {text!r}"
        ) from None


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"{name} must be comma-separated numbers, "
                          f"got {text!r}") from None
    if not vals:
        raise ConfigError(f"{name} is empty")
    return vals


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        vals = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"{name} must be comma-separated integers, "
                          f"got {text!r}") from None
    if not vals:
        raise ConfigError(f"{name} is empty")
    return vals


def _dense_guard(args: argparse.Namespace) -> int | None:
    """Flag beats environment beats built-in default; <= 0 disables."""
    value = getattr(args, "dense_guard", None)
    if value is None:
        env = os.environ.get(DENSE_GUARD_ENV)
        if env is None or not env.strip():
            return DEFAULT_DENSE_GUARD
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(
                f"{DENSE_GUARD_ENV} must be an integer, got {env!r}"
            ) from None
    return None if value <= 0 else int(value)


def _spec_from_args(args: argparse.Namespace) -> GraphSpec:
    inline = getattr(args, "spec", None)
    from_file = getattr(args, "spec_file", None)
    if inline is not None and from_file is not None:
        raise ConfigError("give either --spec or --spec-file, not both")
    if inline is not None:
        return GraphSpec.from_json(inline)
    if from_file is not None:
        try:
            text = Path(from_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read spec file {from_file}: {exc}")
        return GraphSpec.from_json(text)
    if args.family is None:
        raise ConfigError("no graph given: use --family plus size flags, "
                          "or --spec/--spec-file")
    kwargs: dict = {}
    for key in ("n", "g", "L", "d"):
        val = getattr(args, key, None)
        if val is not None:
            kwargs[key] = val
    if getattr(args, "open_boundary", False):
        kwargs["periodic"] = False
    return GraphSpec(family=Family(args.family), **kwargs)


def _resolve_target(spec: GraphSpec, graph: Graph,
                    args: argparse.Namespace) -> int:
    override = getattr(args, "target", None)
    if override is None:
        return default_target(spec)
    if not 0 <= override < graph.n:
        raise ConfigError(f"target {override} out of range for "
                          f"{graph.n} nodes")
    return int(override)


def _default_gamma_window(spec: GraphSpec, target: int,
                          guard: int | None) -> tuple[float, float]:
    """Log window around the inverse-spectral-sum coupling scale."""
    dec = laplacian_decomposition(spec.build(), dense_guard=guard)
    xi1 = spectral_sums(dec, target).xi1
    return xi1 / 8.0, xi1 * 8.0


def _gamma_grid(args: argparse.Namespace, spec: GraphSpec, target: int,
                guard: int | None) -> np.ndarray:
    single = getattr(args, "gamma", None)
    lo, hi = getattr(args, "gamma_min", None), getattr(args, "gamma_max", None)
    if single is not None:
        if lo is not None or hi is not None:
            raise ConfigError("give either --gamma or a --gamma-min/"
                              "--gamma-max window, not both")
        if single <= 0:
            raise ConfigError("--gamma must be positive")
        return np.array([float(single)])
    if (lo is None) != (hi is None):
        raise ConfigError("--gamma-min and --gamma-max go together")
    if lo is None:
        lo, hi = _default_gamma_window(spec, target, guard)
    if not (0 < lo < hi):
        raise ConfigError(f"need 0 < gamma-min < gamma-max, got "
                          f"[{lo}, {hi}]")
    count = args.gamma_count
    if count < 1:
        raise ConfigError("--gamma-count must be >= 1")
    if args.gamma_scale == "log":
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _time_grid(args: argparse.Namespace, n: int) -> np.ndarray:
    tmax = getattr(args, "tmax", None)
    if tmax is None:
        tmax = 4.0 * math.pi * math.sqrt(n)
    tmin = args.tmin
    if not (math.isfinite(tmin) and math.isfinite(tmax)) or tmax <= tmin:
        raise ConfigError(f"bad time window [{tmin}, {tmax}]")
    if args.t_count < 2:
        raise ConfigError("--t-count must be >= 2")
    return np.linspace(tmin, tmax, args.t_count)


def _sweep_specs(args: argparse.Namespace) -> tuple[list[GraphSpec],
                                                    list[float]]:
    """Family sweep for critgamma/fit: one spec per generation or size.

    Returns the specs plus the generation/size abscissa used by the
    linear-in-generation model.
    """
    if args.family is None:
        raise ConfigError("--family is required")
    family = Family(args.family)
    g_range = getattr(args, "g", None)
    sizes = getattr(args, "sizes", None)
    if family in (Family.DSG, Family.TFRACTAL, Family.CAYLEY_TREE):
        if g_range is None:
            raise ConfigError(f"--g (e.g. 3..6) is required for "
                              f"{family.value}")
        gens = _parse_int_range(g_range, "--g")
        return [GraphSpec(family, g=g) for g in gens], [float(g) for g in gens]
    if sizes is None:
        raise ConfigError(f"--sizes (comma list) is required for "
                          f"{family.value}")
    values = _parse_int_list(sizes, "--sizes")
    if family is Family.COMPLETE:
        return [GraphSpec(family, n=v) for v in values], [float(v) for v in values]
    if family is Family.TORUS:
        if args.d is None:
            raise ConfigError("--d is required for torus sweeps")
        return ([GraphSpec(family, L=v, d=args.d) for v in values],
                [float(v) for v in values])
    if family is Family.CHAIN:
        periodic = not getattr(args, "open_boundary", False)
        return ([GraphSpec(family, L=v, periodic=periodic) for v in values],
                [float(v) for v in values])
    raise ConfigError(f"sweeps over {family.value} are not supported")


def _critical_rows(specs: Sequence[GraphSpec], guard: int | None,
                   floor: float | None = None,
                   ceiling: float | None = None) -> list[dict]:
    window: dict[str, float] = {}
    if floor is not None:
        window["gamma_floor"] = floor
    if ceiling is not None:
        window["gamma_ceiling"] = ceiling
    rows = []
    for spec in specs:
        graph = build(spec)
        target = default_target(spec)
        res = critical_gamma(graph, target, dense_guard=guard, **window)
        rows.append({
            "label": spec.label,
            "n": graph.n,
            "gamma_crit": res.gamma,
            "xi1": res.xi1,
            "residual": res.residual,
            "evaluations": res.evaluations,
        })
    return rows


# ---------------------------------------------------------------- commands


def cmd_generate(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    guard = _dense_guard(args)
    if guard is not None and spec.node_count > guard:
        raise DenseGuardError(f"{spec.label} has {spec.node_count} nodes, "
                              f"above the guard {guard}")
    graph = build(spec)
    path = _write_atomic(Path(args.out) / f"edges_{spec.label}.txt",
                         graph.to_edge_list())
    print(f"wrote {path}")
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    guard = _dense_guard(args)
    dec = laplacian_decomposition(build(spec), dense_guard=guard)
    text = spectrum_csv(dec.eigenvalues, dec.group_index)
    path = _write_atomic(Path(args.out) / f"spectrum_{spec.label}.csv", text)
    print(f"wrote {path}")
    return 0


def cmd_overlaps(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    guard = _dense_guard(args)
    graph = build(spec)
    target = _resolve_target(spec, graph, args)
    gammas = _gamma_grid(args, spec, target, guard)
    records = overlap_sweep(graph, target, gammas, dense_guard=guard)
    path = _write_atomic(Path(args.out) / f"overlaps_{spec.label}.csv",
                         overlap_sweep_csv(records))
    print(f"wrote {path}")
    return 0


def cmd_critgamma(args: argparse.Namespace) -> int:
    guard = _dense_guard(args)
    specs, _ = _sweep_specs(args)
    rows = _critical_rows(specs, guard, floor=args.gamma_floor,
                          ceiling=args.gamma_ceiling)
    header = "label,N,gamma_crit,xi1,residual,evaluations"
    lines = [header]
    for row in rows:
        lines.append(",".join((
            row["label"], str(row["n"]), _f17(row["gamma_crit"]),
            _f17(row["xi1"]), _f17(row["residual"]),
            str(row["evaluations"]),
        )))
    family = Family(args.family).value
    path = _write_atomic(Path(args.out) / f"critgamma_{family}.csv",
                         "\n".join(lines) + "\n")
    for row in rows:
        print(f"{row['label']}: N={row['n']} "
              f"gamma_crit={row['gamma_crit']:.8g}")
    print(f"wrote {path}")
    return 0


def cmd_success(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    guard = _dense_guard(args)
    graph = build(spec)
    target = _resolve_target(spec, graph, args)
    gammas = _gamma_grid(args, spec, target, guard)
    times = _time_grid(args, graph.n)
    grid = success_grid(graph, target, gammas, times,
                        threads=args.threads, dense_guard=guard)
    base = Path(args.out)
    p1 = _write_atomic(base / f"success_{spec.label}_matrix.csv",
                       grid.to_matrix_csv())
    p2 = _write_atomic(base / f"success_{spec.label}_long.csv",
                       grid.to_long_csv())
    k = int(np.argmax(grid.pi_star))
    print(f"peak pi={grid.pi_star[k]:.8g} at gamma={grid.gammas[k]:.8g} "
          f"t={grid.t_star[k]:.8g}")
    if gammas.size == 1:
        period = oscillation_period(grid.times, grid.probabilities[0])
        if period is not None:
            print(f"oscillation period ~ {period:.8g}")
    print(f"wrote {p1}")
    print(f"wrote {p2}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    guard = _dense_guard(args)
    specs, gens = _sweep_specs(args)
    family = Family(args.family)
    model = ScalingModel(args.model) if args.model else (
        ScalingModel.LOG if family is Family.CAYLEY_TREE else ScalingModel.POWER)
    rows = _critical_rows(specs, guard)
    gamma_crit = [row["gamma_crit"] for row in rows]
    if model is ScalingModel.POWER:
        points = [(row["n"], gc) for row, gc in zip(rows, gamma_crit)]
    else:
        points = list(zip(gens, gamma_crit))
    prediction = None
    alpha_used = None
    if model is ScalingModel.POWER and specs[0].spectral_dimension is not None:
        alpha_used = args.alpha
        if alpha_used is None:
            alpha_used = fit_alpha(specs).alpha
        prediction = exponent_prediction(specs[0], alpha_used)
    fit = fit_scaling(points, model, label=family.value,
                      prediction=prediction, alpha_used=alpha_used)
    path = _write_atomic(
        Path(args.out) / f"fit_{family.value}_{model.value}.json",
        fit.to_json() + "\n")
    names = ("c", "beta") if model is ScalingModel.POWER else ("a", "b")
    shown = " ".join(f"{k}={fit.params[k]:.8g}" for k in names)
    print(f"{family.value} {model.value} fit: {shown} "
          f"residual={fit.residual:.3g}"
          + (f" predicted_exponent={prediction:.8g}"
             if prediction is not None else ""))
    print(f"wrote {path}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    guard = _dense_guard(args)
    graph = build(spec)
    target = _resolve_target(spec, graph, args)
    gammas = None
    if args.gammas is not None:
        gammas = _parse_float_list(args.gammas, "--gammas")
    report = verify_bounds(graph, target, gammas=gammas, dense_guard=guard)
    path = _write_atomic(Path(args.out) / f"bounds_{spec.label}.json",
                         json.dumps(report.to_dict(), indent=2) + "\n")
    for check in report.checks:
        status = ("skipped" if check.satisfied is None
                  else "ok" if check.satisfied else "FAIL")
        print(f"{check.name} @ gamma={check.gamma:.8g}: {status}")
    print(f"wrote {path}")
    if not report.all_satisfied:
        raise NumericalError(
            f"{len(report.failures)} bound checks failed; see {path}")
    return 0


def _oracle_complete(args: argparse.Namespace) -> tuple[float, float, dict]:
    n = args.n if args.n is not None else 124
    guard = _dense_guard(args)
    spec = GraphSpec(Family.COMPLETE, n=n)
    graph = build(spec)
    times = np.linspace(0.0, 4.0 * math.pi * math.sqrt(n), 64)
    worst = 0.0
    for scale in (0.5, 1.0, 1.7, 2.0):
        gamma = scale / n
        probs = success_probability(SearchProblem(graph, 0, gamma), times,
                                    dense_guard=guard)
        exact = complete_success(n, gamma, times)
        worst = max(worst, float(np.max(np.abs(probs - exact))))
    return worst, 1e-10, {"n": n}


def _oracle_dsg_spectrum(args: argparse.Namespace) -> tuple[float, float, dict]:
    g = args.g if args.g is not None else 4
    guard = _dense_guard(args)
    spec = GraphSpec(Family.DSG, g=g)
    dec = laplacian_decomposition(build(spec), dense_guard=guard)
    exact = dsg_exact_spectrum(g).expand()
    worst = float(np.max(np.abs(dec.eigenvalues - exact)))
    return worst, 1e-9, {"g": g}


def _oracle_dsg_zeta(args: argparse.Namespace) -> tuple[float, float, dict]:
    g = args.g if args.g is not None else 4
    closed = dsg_zeta_closed(g)
    direct = dsg_zeta_direct(g)
    worst = max(abs(c - d) / abs(c) for c, d in zip(closed, direct))
    return worst, 1e-10, {"g": g}


def _oracle_decimation(args: argparse.Namespace) -> tuple[float, float, dict]:
    g = args.g if args.g is not None else 5
    worst = max(decimation_identity_residuals(g))
    return worst, 1e-9, {"g": g}


def _oracle_krylov(args: argparse.Namespace) -> tuple[float, float, dict]:
    g = args.g if args.g is not None else 3
    guard = _dense_guard(args)
    spec = GraphSpec(Family.DSG, g=g)
    graph = build(spec)
    target = default_target(spec)
    gamma = 1.0
    times = np.linspace(0.0, 20.0, 9)
    kry = propagate_krylov(graph, target, gamma, times)
    ref = success_probability(SearchProblem(graph, target, gamma), times,
                              dense_guard=guard)
    worst = float(np.max(np.abs(kry - ref)))
    return worst, 1e-8, {"g": g, "gamma": gamma}


def cmd_oracle(args: argparse.Namespace) -> int:
    runners = {
        "complete-vs-engine": _oracle_complete,
        "dsg-spectrum": _oracle_dsg_spectrum,
        "dsg-zeta": _oracle_dsg_zeta,
        "decimation": _oracle_decimation,
        "krylov-vs-spectral": _oracle_krylov,
    }
    worst, tol, details = runners[args.check](args)
    passed = worst <= tol
    report = {"check": args.check, "passed": passed,
              "max_error": worst, "tolerance": tol, "details": details}
    print(json.dumps(report))
    if not passed:
        raise NumericalError(f"oracle check {args.check} failed: "
                             f"max error {worst:.3g} > {tol:.3g}")
    return 0


# ------------------------------------------------------------------ parser


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=[f.value for f in Family],
                        help="graph family")
    parser.add_argument("--n", type=int, help="node count (complete)")
    parser.add_argument("--g", type=int, help="generation (dsg/tfractal/"
                        "cayleytree)")
    parser.add_argument("--L", type=int, help="linear size (chain/torus)")
    parser.add_argument("--d", type=int, help="dimension (torus)")
    parser.add_argument("--open", dest="open_boundary", action="store_true",
                        help="open boundary conditions (chain/torus)")
    parser.add_argument("--spec", help="inline graph spec JSON")
    parser.add_argument("--spec-file", help="path to graph spec JSON")
    parser.add_argument("--target", type=int,
                        help="target node (default: family convention)")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=".",
                        help="output directory (default: current)")
    parser.add_argument("--dense-guard", type=int, default=None,
                        help="dense-size limit; 0 disables (default: "
                        f"{DEFAULT_DENSE_GUARD}, or {DENSE_GUARD_ENV})")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for grid sweeps "
                        "(default: available cores)")
    parser.add_argument("--config", default=None,
                        help="JSON file with default flag values "
                        "(explicit flags win)")


def _add_gamma_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma", type=float, default=None,
                        help="single coupling value")
    parser.add_argument("--gamma-min", type=float, default=None)
    parser.add_argument("--gamma-max", type=float, default=None)
    parser.add_argument("--gamma-count", type=int, default=64)
    parser.add_argument("--gamma-scale", choices=("lin", "log"),
                        default="log")


def _add_time_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tmin", type=float, default=0.0)
    parser.add_argument("--tmax", type=float, default=None,
                        help="default: four Grover periods")
    parser.add_argument("--t-count", type=int, default=512)


def _add_sweep_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=[f.value for f in Family],
                        help="graph family")
    parser.add_argument("--g", default=None,
                        help="generation range, e.g. 3..6")
    parser.add_argument("--sizes", default=None,
                        help="comma list of sizes (complete: n; "
                        "chain/torus: L)")
    parser.add_argument("--d", type=int, default=None,
                        help="dimension (torus sweeps)")
    parser.add_argument("--open", dest="open_boundary", action="store_true",
                        help="open boundary conditions (chain sweeps)")


class _Parser(argparse.ArgumentParser):
    """Argparse errors become ConfigError so failures emit JSON."""

    def error(self, message: str):  # noqa: A002 - argparse API
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ctqwlab",
        description="Continuous-time quantum-walk search on finite graphs: "
                    "spectra, overlap sweeps, critical couplings, and "
                    "success-probability grids, exported as plain files.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    submap: dict[str, argparse.ArgumentParser] = {}
    parser.subcommand_parsers = submap  # type: ignore[attr-defined]
    _orig_add = sub.add_parser

    def add_parser(name: str, **kwargs):
        child = _orig_add(name, **kwargs)
        submap[name] = child
        return child

    sub.add_parser = add_parser  # type: ignore[method-assign]

    p = sub.add_parser("generate", help="write an edge-list file")
    _add_spec_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("spectrum", help="write the Laplacian spectrum CSV")
    _add_spec_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("overlaps",
                       help="sweep the coupling; write ground/first-excited "
                            "overlap CSV")
    _add_spec_flags(p)
    _add_common_flags(p)
    _add_gamma_flags(p)
    p.set_defaults(func=cmd_overlaps)

    p = sub.add_parser("critgamma",
                       help="locate the overlap-crossing coupling over a "
                            "family sweep")
    _add_sweep_flags(p)
    _add_common_flags(p)
    p.add_argument("--gamma-floor", type=float, default=None,
                   help="lower edge of the crossing search window")
    p.add_argument("--gamma-ceiling", type=float, default=None,
                   help="upper edge of the crossing search window")
    p.set_defaults(func=cmd_critgamma)

    p = sub.add_parser("success",
                       help="success-probability grid over coupling and time")
    _add_spec_flags(p)
    _add_common_flags(p)
    _add_gamma_flags(p)
    _add_time_flags(p)
    p.set_defaults(func=cmd_success)

    p = sub.add_parser("fit",
                       help="fit critical-coupling scaling over a family "
                            "sweep")
    _add_sweep_flags(p)
    _add_common_flags(p)
    p.add_argument("--model", choices=[m.value for m in ScalingModel],
                   default=None,
                   help="default: log for cayleytree, power otherwise")
    p.add_argument("--alpha", type=float, default=None,
                   help="amplitude-decay exponent for the predicted "
                        "power-law exponent (default: fitted)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify",
                       help="check spectral bounds and resolvent identities")
    _add_spec_flags(p)
    _add_common_flags(p)
    p.add_argument("--gammas", default=None,
                   help="comma list of couplings (default: multiples of "
                        "the crossing scale)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="run a closed-form cross-check")
    p.add_argument("--check", choices=_ORACLE_CHECKS, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--g", type=int, default=None)
    _add_common_flags(p)
    p.set_defaults(func=cmd_oracle)

    return parser


def _apply_config(parser: argparse.ArgumentParser,
                  argv: list[str], args: argparse.Namespace
                  ) -> argparse.Namespace:
    path = args.config
    try:
        conf = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(conf, dict):
        raise ConfigError("config must be a JSON object of flag defaults")
    known = set(vars(args)) - {"command", "func", "config"}
    unknown = sorted(set(conf) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    fresh = build_parser()
    # Defaults must land on the chosen subcommand's parser: subparsers
    # parse into their own namespace, so top-level defaults are ignored.
    fresh.subcommand_parsers[args.command].set_defaults(**conf)
    return fresh.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args = _apply_config(parser, list(argv), args)
        return args.func(args)
    except ConfigError as exc:
        return _fail(exc, 2)
    except DenseGuardError as exc:
        return _fail(exc, 4)
    except NumericalError as exc:
        return _fail(exc, 3)
    except CtqwError as exc:  # pragma: no cover - future subclasses
        return _fail(exc, 3)


def _fail(exc: CtqwError, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc),
               "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
