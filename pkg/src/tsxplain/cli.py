"""Command-line interface: explain, perturb, fidelity, grid, ablation,
serve, analyze, synth.

Exit codes: 0 success, 1 flag/validation problem, 2 runtime failure. The
environment variable TSFL_SEED supplies the seed when --seed is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ExplainError, SpecValidationError
from .evaluation import distance_ablation, evaluate_fidelity, mann_whitney_u, run_grid
from .features import feature_family, parse_feature_specs
from .forecasters import build_forecaster
from .perturbation import PerturbationConfig, generate_samples
from .series import Series, fit_minmax, last_window, load_csv, resample_monthly
from .surrogate import KernelConfig, explain_window
from .synthetic import QuadraticSeasonalForecaster, synthetic_series

PROG = "tsxplain"


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, per the CLI contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _env_seed() -> int:
    raw = os.environ.get("TSFL_SEED", "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"TSFL_SEED must be an integer, got {raw!r}") from exc


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="CSV file (headered, ISO dates); omit for the synthetic benchmark")
    p.add_argument("--time-column", default="date")
    p.add_argument("--value-column", default="value")
    p.add_argument("--monthly", action="store_true", help="resample to monthly means first")
    p.add_argument("--window", type=int, default=12, help="queried window length q")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="ar:3", help="ar:p | hw:a,b,g,season | ext:<command>")
    p.add_argument("--features", default=None, help="e.g. lag:1,lag:2,rw:1:3,ew:5 (default: lag family)")


def _add_perturbation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--block-length", type=int, default=5)
    p.add_argument("--block-swap", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--ma-window", type=int, default=3)
    p.add_argument("--seed", type=int, default=None, help="defaults to $TSFL_SEED or 0")


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=["exponential", "none"], default="exponential")
    p.add_argument("--bandwidth", type=float, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description=__doc__)
    parser.add_argument("--config", help="JSON file whose keys override flag defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("explain", help="explain the forecast for the most recent window")
    _add_data_flags(p)
    _add_model_flags(p)
    _add_perturbation_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--output", help="write Explanation JSON here (default stdout)")
    p.add_argument("--svg", help="also write a coefficient bar chart as SVG")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("perturb", help="emit bootstrap samples for the most recent window")
    _add_data_flags(p)
    _add_perturbation_flags(p)
    p.add_argument("--output", help="CSV of samples, one per line (default stdout)")
    p.set_defaults(func=cmd_perturb)

    for name, help_text in (
        ("fidelity", "surrogate fidelity over held-out windows"),
        ("grid", "block-length x block-swap x feature-family sweep"),
        ("ablation", "uniform vs proximity weighting, paired samples"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_data_flags(p)
        _add_model_flags(p)
        _add_perturbation_flags(p)
        _add_kernel_flags(p)
        p.add_argument("--queries", type=int, default=10, help="held-out windows to explain")
        p.add_argument("--iterations", type=int, default=5)
        p.add_argument("--dataset", default="dataset", help="label used in report rows")
        p.add_argument("--output", help="default stdout")
        if name == "grid":
            p.add_argument("--json", dest="as_json", action="store_true",
                           help="emit JSON with best-cell markers instead of CSV")
        p.set_defaults(func={"fidelity": cmd_fidelity, "grid": cmd_grid,
                             "ablation": cmd_ablation}[name])

    p = sub.add_parser("serve", help="start the study HTTP service")
    _add_data_flags(p)
    _add_model_flags(p)
    _add_perturbation_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", help="append-only session log (JSON lines)")
    p.add_argument("--static", default="frontend/dist", help="static UI directory to mount")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("analyze", help="Mann-Whitney U on an exported study CSV")
    p.add_argument("--input", required=True, help="CSV from /api/export")
    p.add_argument("--output", help="default stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="write the synthetic benchmark series as CSV")
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", help="default stdout")
    p.set_defaults(func=cmd_synth)

    return parser


def _resolve_seed(args) -> int:
    return args.seed if getattr(args, "seed", None) is not None else _env_seed()


def _load_series(args) -> Series:
    if args.input:
        series = load_csv(args.input, args.time_column, args.value_column)
        if args.monthly:
            series = resample_monthly(series)
        return series
    return synthetic_series(seed=_resolve_seed(args))


def _pcfg(args, seed: int) -> PerturbationConfig:
    return PerturbationConfig(
        block_length=args.block_length,
        block_swap=args.block_swap,
        sample_count=args.samples,
        ma_window=args.ma_window,
        rng_seed=seed,
    )


def _kcfg(args) -> KernelConfig:
    return KernelConfig(kind=args.kernel, bandwidth=args.bandwidth)


def _split_normalized(series: Series, q: int, n_queries: int = 1):
    """Scale on the training split, return (train values, query windows).

    The last (q + n_queries - 1) points supply n_queries sliding windows;
    everything before them is the training split.
    """
    n = len(series)
    tail = q + n_queries - 1
    if n - tail < q + 2:
        raise ConfigurationError(
            f"series of {n} too short for window {q} and {n_queries} queries"
        )
    scaler = fit_minmax(series.values[: n - tail])
    scaled = scaler.transform(series.values)
    queries = [scaled[n - tail + i : n - tail + i + q] for i in range(n_queries)]
    return scaler, scaled[: n - tail], queries


def _specs_for(args, q: int):
    if args.features:
        return parse_feature_specs(args.features)
    return feature_family("lag", q)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def coefficient_svg(labels, coefficients, width: int = 640, bar_height: int = 22) -> str:
    """Static horizontal bar chart of signed coefficients."""
    coefficients = list(coefficients)
    labels = list(labels)
    top = max((abs(c) for c in coefficients), default=1.0) or 1.0
    label_w = 110
    plot_w = width - label_w - 70
    mid = label_w + plot_w / 2
    height = bar_height * len(coefficients) + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<line x1="{mid:.1f}" y1="10" x2="{mid:.1f}" y2="{height - 10}" stroke="#999"/>',
    ]
    for i, (label, coef) in enumerate(zip(labels, coefficients)):
        y = 12 + i * bar_height
        w = abs(coef) / top * (plot_w / 2)
        x = mid if coef >= 0 else mid - w
        color = "#2a7" if coef >= 0 else "#c55"
        parts.append(
            f'<rect x="{x:.1f}" y="{y}" width="{w:.1f}" height="{bar_height - 6}" fill="{color}"/>'
        )
        parts.append(f'<text x="4" y="{y + bar_height - 10}">{label}</text>')
        tx = mid + w + 4 if coef >= 0 else mid - w - 4
        anchor = "start" if coef >= 0 else "end"
        parts.append(
            f'<text x="{tx:.1f}" y="{y + bar_height - 10}" text-anchor="{anchor}">{coef:.4g}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def cmd_explain(args) -> int:
    seed = _resolve_seed(args)
    series = _load_series(args)
    q = args.window
    _, train, queries = _split_normalized(series, q, 1)
    window = queries[0]
    forecaster = build_forecaster(args.model, train)
    specs = _specs_for(args, q)
    _, explanation = explain_window(
        window, forecaster, specs, _pcfg(args, seed), _kcfg(args)
    )
    _emit(explanation.to_json(), args.output)
    if args.svg:
        Path(args.svg).write_text(
            coefficient_svg(explanation.feature_labels, explanation.coefficients.tolist()),
            encoding="utf-8",
        )
    return 0


def cmd_perturb(args) -> int:
    seed = _resolve_seed(args)
    series = _load_series(args)
    q = args.window
    _, _, queries = _split_normalized(series, q, 1)
    samples = generate_samples(queries[0], _pcfg(args, seed))
    lines = [",".join(repr(v) for v in row.tolist()) for row in samples.samples]
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _queries_and_model(args, seed: int):
    series = _load_series(args)
    q = args.window
    _, train, queries = _split_normalized(series, q, args.queries)
    forecaster = build_forecaster(args.model, train)
    return forecaster, queries, q


def cmd_fidelity(args) -> int:
    seed = _resolve_seed(args)
    forecaster, queries, q = _queries_and_model(args, seed)
    report = evaluate_fidelity(
        forecaster,
        queries,
        _specs_for(args, q),
        _pcfg(args, seed),
        _kcfg(args),
        iterations=args.iterations,
    )
    _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True), args.output)
    return 0


def cmd_grid(args) -> int:
    seed = _resolve_seed(args)
    forecaster, queries, q = _queries_and_model(args, seed)
    result = run_grid(
        forecaster,
        queries,
        _pcfg(args, seed),
        _kcfg(args),
        iterations=args.iterations,
        dataset=args.dataset,
    )
    _emit(result.to_json() if args.as_json else result.to_csv(), args.output)
    return 0


def cmd_ablation(args) -> int:
    seed = _resolve_seed(args)
    forecaster, queries, q = _queries_and_model(args, seed)
    specs_families = ("lag", "rw", "ew")
    rows = ["dataset,family,kernel,MAE,RMSE,MAPE"]
    for family in specs_families:
        none_rep, exp_rep = distance_ablation(
            forecaster,
            queries,
            feature_family(family, q),
            _pcfg(args, seed),
            iterations=args.iterations,
            bandwidth=args.bandwidth,
        )
        for kernel, rep in (("none", none_rep), ("exponential", exp_rep)):
            mape = "" if rep.mape is None else repr(rep.mape)
            rows.append(
                f"{args.dataset},{family},{kernel},{rep.mae!r},{rep.rmse!r},{mape}"
            )
    _emit("\n".join(rows) + "\n", args.output)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_default_engine, create_app

    seed = _resolve_seed(args)
    series = _load_series(args) if args.input else None
    engine = build_default_engine(
        series=series,
        model_spec=args.model,
        store_path=Path(args.store) if args.store else None,
        pcfg=_pcfg(args, seed),
        kcfg=_kcfg(args),
        seed=seed,
    )
    static = Path(args.static) if args.static else None
    app = create_app(engine, static_dir=static if static and static.is_dir() else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _scores_by(rows, group: str, background: str | None = None) -> list[float]:
    return [
        float(r["score"])
        for r in rows
        if r["group"] == group
        and (background is None or r["background"] == background)
    ]


def cmd_analyze(args) -> int:
    import csv as _csv

    with open(args.input, newline="", encoding="utf-8") as fh:
        rows = list(_csv.DictReader(fh))
    for required in ("group", "background", "score"):
        if rows and required not in rows[0]:
            raise ConfigurationError(f"export CSV misses column {required!r}")

    def compare(background: str | None):
        control = _scores_by(rows, "control", background)
        treatment = _scores_by(rows, "treatment", background)
        if not control or not treatment:
            return {"n1": len(control), "n2": len(treatment), "error": "empty group"}
        try:
            u, p = mann_whitney_u(control, treatment)
        except ExplainError as exc:
            return {"n1": len(control), "n2": len(treatment), "error": str(exc)}
        return {"U": u, "p_value": p, "n1": len(control), "n2": len(treatment)}

    payload = {
        "overall": compare(None),
        "by_background": {bg: compare(bg) for bg in ("CS", "NonCS")},
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True), args.output)
    return 0


def cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    series = synthetic_series(n=args.n, seed=seed)
    lines = ["date,value"]
    for stamp, value in zip(series.timestamps, series.values.tolist()):
        lines.append(f"{stamp.isoformat()},{value!r}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _apply_config(parser: _Parser, argv: list[str]) -> list[str]:
    """Fold --config file values in as new defaults; explicit flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ConfigurationError("--config needs a file path")
    path = argv[idx + 1]
    try:
        overrides = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(overrides, dict):
        raise ConfigurationError("config file must hold a JSON object")
    known = {
        action.dest
        for sp in parser._subparsers._group_actions[0].choices.values()  # type: ignore[union-attr]
        for action in sp._actions
    }
    for key in overrides:
        if key not in known:
            raise ConfigurationError(f"unknown config key {key!r}")
    for sp in parser._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
        sp.set_defaults(**{k: v for k, v in overrides.items()
                           if k in {a.dest for a in sp._actions}})
    return [a for i, a in enumerate(argv) if i not in (idx, idx + 1)]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        return args.func(args)
    except (ConfigurationError, SpecValidationError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except ExplainError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
