"""Command-line front end: one thin subcommand per pipeline stage plus the
full dual-pipeline runner.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure. Every run is deterministic in --seed; --threads is accepted for
interface stability but execution is single-threaded (per-task seed streams
make that the reference schedule).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .classify import load_model, save_model
from .cluster import kmeans_fit, select_k
from .errors import ConfigError, DataError, NumericalError, ToolkitError
from .explain import shap_summary
from .modelsel import (
    auc as rank_auc,
    default_grid,
    evaluate_predictions,
    fit_model,
    grid_search,
    predict_model,
    score_model,
)
from .pca import fit_pca, loading_table, scree_data, transform
from .pipeline import (
    RunConfig,
    _parse_scalar,
    config_from_dict,
    parse_config_text,
    report_json,
    run_pipeline,
    write_artifacts,
)
from .preprocess import iqr_cap, one_hot, standardize_fit
from .rng import Stream, derive_seed
from .synth import GradSynthSpec, SocialSynthSpec, gen_grad, gen_social
from .tabular import (
    CategoricalColumn,
    NumericColumn,
    Table,
    audit,
    describe,
    load_csv,
    write_csv,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise ConfigError(message)


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows(path, header, rows) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_xy(path, label: str):
    """Numeric design matrix plus binary labels from an already-encoded CSV."""
    t = load_csv(path)
    col = t.column(label)
    if isinstance(col, CategoricalColumn):
        if len(col.levels) != 2 or np.any(col.codes < 0):
            raise DataError(f"label column {label!r} must be binary with no missing values")
        y = col.codes.astype(np.int64)
    else:
        values = col.values
        if np.any(np.isnan(values)) or not np.all(np.isin(values, (0.0, 1.0))):
            raise DataError(f"numeric label column {label!r} must contain only 0 and 1")
        y = values.astype(np.int64)
    stray = [c.name for c in t.categorical_columns() if c.name != label]
    if stray:
        raise DataError(
            f"categorical feature columns {stray} present; run `preprocess` first"
        )
    names = [c.name for c in t.numeric_columns() if c.name != label]
    if not names:
        raise DataError("no feature columns found")
    return t.matrix(names), y, names


def cmd_synth(args) -> int:
    if args.kind == "social":
        table = gen_social(SocialSynthSpec(n=args.n, seed=args.seed))
    else:
        table = gen_grad(GradSynthSpec(n=args.n, seed=args.seed))
    write_csv(table, args.out)
    print(f"wrote {table.n_rows} rows to {args.out}")
    return 0


def cmd_describe(args) -> int:
    table = load_csv(args.input)
    rows = [
        [s.name, s.count, s.mean, s.std, s.min, s.q1, s.median, s.q3, s.max, s.skewness]
        for s in describe(table)
    ]
    header = ["name", "count", "mean", "std", "min", "q1", "median", "q3", "max", "skewness"]
    if args.out:
        _write_rows(args.out, header, rows)
    report = audit(table)
    print(f"{table.n_rows} rows, duplicates={report.duplicate_row_count}")
    for row in rows:
        print(
            f"{row[0]:>24s} count={row[1]:<6d} mean={row[2]:<10.4g} std={row[3]:<10.4g}"
            f" min={row[4]:<8g} q1={row[5]:<8g} median={row[6]:<8g} q3={row[7]:<8g}"
            f" max={row[8]:<8g} skew={row[9]:+.3f}"
        )
    return 0


def cmd_preprocess(args) -> int:
    table = load_csv(args.input)
    out = _out_dir(args)
    _write_json(out / "audit.json", {
        "missing_per_column": audit(table).missing_per_column,
        "duplicate_row_count": audit(table).duplicate_row_count,
    })
    cap_columns = [c for c in (args.cap_columns or "").split(",") if c]
    for name in cap_columns:
        col = table.column(name)
        if not isinstance(col, NumericColumn):
            raise DataError(f"cap column {name!r} is not numeric")
        capped = iqr_cap(col.values, args.cap_k)
        cols = [NumericColumn(name, capped) if c.name == name else c for c in table.columns]
        table = Table(table.name, tuple(cols))
    encodings = []
    for col in list(table.categorical_columns()):
        if col.name == args.label:
            continue
        table, em = one_hot(table, col.name, drop_first=args.drop_first)
        encodings.append({
            "source": em.source,
            "levels": list(em.levels),
            "columns": em.output_columns,
            "drop_first": em.drop_first,
        })
    scaler = None
    if args.standardize:
        names = [c.name for c in table.numeric_columns()]
        x = table.matrix(names)
        z, params = standardize_fit(x)
        cols = list(table.columns)
        for j, name in enumerate(names):
            idx = table.column_names.index(name)
            cols[idx] = NumericColumn(name, z[:, j])
        table = Table(table.name, tuple(cols))
        scaler = {
            "columns": names,
            "means": [float(v) for v in params.means],
            "stds": [float(v) for v in params.stds],
            "zero_variance_columns": list(params.zero_variance_columns),
        }
    write_csv(table, out / "processed.csv")
    _write_json(out / "encodings.json", encodings)
    if scaler is not None:
        _write_json(out / "scaler.json", scaler)
    print(f"wrote {out / 'processed.csv'}")
    return 0


def cmd_pca(args) -> int:
    table = load_csv(args.input)
    names = [c.name for c in table.numeric_columns()]
    x = table.matrix(names)
    model = fit_pca(x, k=args.k, variance_target=args.variance_target)
    rows = scree_data(model)
    out = _out_dir(args)
    _write_rows(out / "scree.csv", ["component", "eigenvalue", "ratio", "cumulative"], rows)
    lt = loading_table(model, names)
    _write_rows(
        out / "loadings.csv",
        ["feature"] + [f"PC{i+1}" for i in range(model.k_retained)],
        [[n] + [float(v) for v in lt.values[i]] for i, n in enumerate(names)],
    )
    scores = transform(model, x)
    _write_rows(
        out / "scores.csv",
        [f"PC{i+1}" for i in range(model.k_retained)],
        [[float(v) for v in row] for row in scores],
    )
    payload = {
        "k_retained": model.k_retained,
        "eigenvalues": [r[1] for r in rows],
        "explained_variance_ratio": [r[2] for r in rows],
        "cumulative_variance": rows[model.k_retained - 1][3],
    }
    _write_json(out / "pca.json", payload)
    print(f"cumulative_variance={payload['cumulative_variance']:.4f} at k={model.k_retained}")
    return 0


def cmd_cluster(args) -> int:
    table = load_csv(args.input)
    x = table.matrix()
    model = kmeans_fit(x, args.k, seed=args.seed)
    out = _out_dir(args)
    _write_rows(out / "labels.csv", ["row", "cluster"], list(enumerate(model.labels.tolist())))
    _write_json(out / "kmeans.json", {
        "k": args.k,
        "seed": args.seed,
        "inertia": model.inertia,
        "n_iter": model.n_iter,
        "sizes": np.bincount(model.labels, minlength=args.k).tolist(),
        "centroids": model.centroids.tolist(),
    })
    print(f"k={args.k} inertia={model.inertia:.4f}")
    return 0


def cmd_selectk(args) -> int:
    table = load_csv(args.input)
    x = table.matrix()
    report = select_k(x, (args.kmin, args.kmax), seed=args.seed)
    out = _out_dir(args)
    _write_rows(
        out / "selection.csv",
        ["k", "inertia", "silhouette"],
        list(map(list, zip(report.ks, report.inertias, report.silhouettes))),
    )
    _write_json(out / "selection.json", {
        "chosen_k": report.chosen_k,
        "ks": list(report.ks),
        "inertias": list(report.inertias),
        "silhouettes": list(report.silhouettes),
    })
    print(f"chosen_k={report.chosen_k}")
    return 0


def _grid_with_overrides(kind: str, sets: list[str]) -> dict:
    grid = default_grid(kind)
    for item in sets or []:
        if "=" not in item:
            raise ConfigError(f"--set expects param=v1,v2 (got {item!r})")
        param, _, values = item.partition("=")
        param = param.strip()
        if param not in grid:
            raise ConfigError(f"unknown grid parameter {param!r} for {kind!r}")
        grid[param] = [_parse_scalar(tok) for tok in values.split(",")]
    return grid


def cmd_gridsearch(args) -> int:
    x, y, _ = _load_xy(args.input, args.label)
    grid = _grid_with_overrides(args.model, args.set)
    outcome = grid_search(args.model, grid, x, y, k=args.folds, seed=args.seed)
    out = _out_dir(args)
    _write_rows(
        out / "cv_results.csv",
        ["config_index", "params", "mean_score", "std_score", "failed"],
        [
            [i, json.dumps(e.params, sort_keys=True), e.mean_score, e.std_score, e.failed]
            for i, e in enumerate(outcome.cv.entries)
        ],
    )
    _write_json(out / "best.json", {
        "model": args.model,
        "best_params": outcome.best_params,
        "best_mean_score": outcome.best_mean_score,
        "best_index": outcome.best_index,
        "configurations": len(outcome.cv.entries),
    })
    save_model(outcome.best_model, out / "model.json")
    print(
        f"evaluated {len(outcome.cv.entries)} configurations; "
        f"best {outcome.best_params} (score {outcome.best_mean_score:.4f})"
    )
    return 0


def cmd_train(args) -> int:
    x, y, _ = _load_xy(args.input, args.label)
    params = json.loads(args.params) if args.params else {}
    model = fit_model(args.model, x, y, params)
    save_model(model, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    out = _out_dir(args)
    if args.predictions:
        table = load_csv(args.predictions)
        y_true = table.column("y_true").values.astype(np.int64)
        y_pred = table.column("y_pred").values.astype(np.int64)
        scores = table.column("score").values if table.has_column("score") else None
        report = evaluate_predictions(y_true, y_pred, scores)
    else:
        if not (args.model and args.input and args.label):
            raise ConfigError("evaluate needs --predictions or (--model, --input, --label)")
        x, y, _ = _load_xy(args.input, args.label)
        model = load_model(args.model)
        kind = _model_kind_of(model)
        report = evaluate_predictions(
            y, predict_model(kind, model, x), score_model(kind, model, x)
        )
    from .pipeline import _eval_jsonable

    payload = _eval_jsonable(report)
    _write_json(out / "evaluation.json", payload)
    cm = report.confusion
    _write_rows(out / "confusion.csv", ["tn", "fp", "fn", "tp"], [[cm.tn, cm.fp, cm.fn, cm.tp]])
    print(f"accuracy={report.accuracy:.4f} binary_f1={report.binary_f1:.4f}")
    return 0


def _model_kind_of(model) -> str:
    from .classify import ForestModel, KnnModel, LogRegModel, SvmModel, TreeModel

    for kind, cls in (
        ("logreg", LogRegModel),
        ("tree", TreeModel),
        ("forest", ForestModel),
        ("knn", KnnModel),
        ("svm", SvmModel),
    ):
        if isinstance(model, cls):
            return kind
    raise DataError(f"unrecognized model type {type(model).__name__}")


def cmd_explain(args) -> int:
    x, _, names = _load_xy(args.train, args.label)
    instances_x, _, _ = _load_xy(args.instances, args.label)
    model = load_model(args.model)
    kind = _model_kind_of(model)
    if kind == "logreg":
        from .classify import logreg_decision

        predict_fn = lambda mat: logreg_decision(model, mat)  # noqa: E731
        scale = "log-odds"
    else:
        predict_fn = lambda mat: score_model(kind, model, mat)  # noqa: E731
        scale = "decision-value" if kind == "svm" else "positive-fraction"
    bg_count = min(args.background, len(x))
    bg_idx = Stream(derive_seed(args.seed, "background")).sample_without_replacement(
        len(x), bg_count
    )
    summary = shap_summary(
        predict_fn,
        x[bg_idx],
        instances_x[: args.instances_limit],
        n_permutations=args.permutations,
        seed=args.seed,
        feature_names=names,
    )
    out = _out_dir(args)
    _write_rows(
        out / "shap_summary.csv",
        ["feature", "mean_abs_shap"],
        list(map(list, zip(summary.feature_names, summary.mean_abs_values))),
    )
    _write_json(out / "shap.json", {
        "scale": scale,
        "model": kind,
        "features": list(summary.feature_names),
        "feature_indices": list(summary.feature_indices),
        "mean_abs": list(summary.mean_abs_values),
    })
    print(f"top feature: {summary.feature_names[0]}")
    return 0


def cmd_pipeline(args) -> int:
    values: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        values.update(parse_config_text(text))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value (got {item!r})")
        key, _, value = item.partition("=")
        parsed = parse_config_text(f"{key.strip()} = {value.strip()}")
        for k, v in parsed.items():
            if k == "grid_overrides":
                for kind, params in v.items():
                    values.setdefault("grid_overrides", {}).setdefault(kind, {}).update(params)
            else:
                values[k] = v
    # flags win over config-file values
    if args.input is not None:
        values["input"] = args.input
    if args.synth is not None:
        values["synth"] = args.synth
    if args.synth_n is not None:
        values["synth_n"] = str(args.synth_n)
    if args.pipeline is not None:
        values["pipeline"] = args.pipeline
    if args.seed is not None:
        values["seed"] = str(args.seed)
    if args.svg:
        values["svg"] = "true"
    cfg = config_from_dict(values)
    report, timings = run_pipeline(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(report), encoding="utf-8")
    _write_json(out / "timings.json", {k: round(v, 6) for k, v in timings.items()})
    written = write_artifacts(report, out, svg=cfg.svg)
    print(f"wrote report.json, timings.json, {', '.join(written)} to {out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="tabmlkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=("social", "grad"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("describe", help="audit + descriptive statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--out", help="optional CSV for the summary table")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("preprocess", help="cap, encode, standardize a CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--label", help="column excluded from encoding")
    p.add_argument("--cap-columns", dest="cap_columns", help="comma list to IQR-cap")
    p.add_argument("--cap-k", dest="cap_k", type=float, default=1.5)
    p.add_argument("--drop-first", dest="drop_first", action="store_true")
    p.add_argument("--no-standardize", dest="standardize", action="store_false")
    p.set_defaults(func=cmd_preprocess, standardize=True)

    p = sub.add_parser("pca", help="fit PCA on the numeric columns")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--variance-target", dest="variance_target", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("cluster", help="K-Means at a fixed k")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("selectk", help="silhouette/elbow K selection")
    p.add_argument("--input", required=True)
    p.add_argument("--kmin", type=int, default=2)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_selectk)

    p = sub.add_parser("gridsearch", help="exhaustive CV over a model grid")
    p.add_argument("--input", required=True, help="encoded CSV (see preprocess)")
    p.add_argument("--label", required=True)
    p.add_argument("--model", choices=("logreg", "tree", "knn", "forest", "svm"), required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--set", action="append", help="grid override param=v1,v2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("train", help="fit one model with explicit parameters")
    p.add_argument("--input", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--model", choices=("logreg", "tree", "knn", "forest", "svm"), required=True)
    p.add_argument("--params", help="JSON object of parameters")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="metric panel from a model or predictions file")
    p.add_argument("--predictions", help="CSV with y_true,y_pred[,score]")
    p.add_argument("--model", help="model JSON path")
    p.add_argument("--input")
    p.add_argument("--label")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="Shapley summary for a stored model")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True, help="encoded training CSV (background sample)")
    p.add_argument("--instances", required=True, help="encoded CSV of rows to explain")
    p.add_argument("--label", required=True)
    p.add_argument("--permutations", type=int, default=20)
    p.add_argument("--background", type=int, default=100)
    p.add_argument("--instances-limit", dest="instances_limit", type=int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("pipeline", help="run the full dual pipeline")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--input")
    p.add_argument("--synth", choices=("social", "grad"))
    p.add_argument("--synth-n", dest="synth_n", type=int)
    p.add_argument("--pipeline", choices=("segmentation", "prediction", "both"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for interface stability; execution is single-threaded")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--set", action="append", help="config override key=value")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ToolkitError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
