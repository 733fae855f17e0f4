"""Run configuration and the dual-pipeline orchestrator.

The segmentation branch runs audit -> cap -> encode -> standardize -> PCA ->
K selection -> K-Means -> cluster characterization; the prediction branch
runs audit -> encode -> split -> cap (train fences) -> standardize (train
parameters) -> grid search per model kind -> validation/test evaluation ->
Shapley summary of the best model.

The canonical report (report.json) embeds the analysis configuration and
seed and is byte-identical across reruns; wall-clock timings go to a
timings.json sidecar so they cannot break that contract. Execution-only
knobs (output directory, thread count) never enter the report.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .cluster import characterize, kmeans_fit, select_k
from .errors import ConfigError, DataError
from .explain import shap_summary
from .modelsel import (
    MODEL_KINDS,
    default_grid,
    enumerate_grid,
    evaluate_predictions,
    grid_search,
    grid_size,
    predict_model,
    score_model,
    tuning_curves,
)
from .pca import fit_pca, loading_table, scree_data, transform
from .preprocess import (
    cap_to_fences,
    iqr_fences,
    one_hot,
    standardize_apply,
    standardize_fit,
    stratified_split,
)
from .rng import Stream, derive_seed
from .synth import GradSynthSpec, SocialSynthSpec, gen_grad, gen_social
from .tabular import (
    CategoricalColumn,
    NumericColumn,
    Table,
    audit,
    describe,
    load_csv,
)

from .classify import logreg_decision


@dataclass
class RunConfig:
    input: str | None = None
    synth: str | None = None  # "social" | "grad" generates the input table
    synth_n: int = 1000
    pipeline: str = "both"  # segmentation | prediction | both
    label: str = "Entrepreneurship"
    cap_columns: tuple[str, ...] = ()
    cap_k: float = 1.5
    cap_order: str = "cap_then_standardize"  # or standardize_then_cap
    drop_first: bool = False  # prediction encoding
    segmentation_drop_first: bool = True
    standardize_dummies: bool = False
    split_ratios: tuple[float, float, float] = (0.7, 0.1, 0.2)
    split_counts: tuple[int, int, int] | None = None
    pca_k: int | None = 4
    pca_variance_target: float | None = None
    k_range: tuple[int, int] = (2, 8)
    cluster_k: int | None = None  # fixed k overrides selection
    models: tuple[str, ...] = MODEL_KINDS
    grid_overrides: dict = field(default_factory=dict)  # kind -> {param: [values]}
    cv_folds: int = 5
    scoring: str = "f1_binary"
    shap_permutations: int = 20
    shap_background: int = 100
    shap_instances: int = 50
    seed: int = 42
    svg: bool = False
    strict: bool = True

    def validate(self) -> None:
        if self.pipeline not in ("segmentation", "prediction", "both"):
            raise ConfigError(f"unknown pipeline {self.pipeline!r}")
        if self.input is None and self.synth is None:
            raise ConfigError("either input or synth must be set")
        if self.synth not in (None, "social", "grad"):
            raise ConfigError(f"unknown synth kind {self.synth!r}")
        if self.cap_order not in ("cap_then_standardize", "standardize_then_cap"):
            raise ConfigError(f"unknown cap_order {self.cap_order!r}")
        if (self.pca_k is None) == (self.pca_variance_target is None):
            raise ConfigError("set exactly one of pca_k / pca_variance_target")
        for kind in self.models:
            if kind not in MODEL_KINDS:
                raise ConfigError(f"unknown model kind {kind!r}")
        for kind in self.grid_overrides:
            if kind not in MODEL_KINDS:
                raise ConfigError(f"grid override for unknown model {kind!r}")
        if self.k_range[0] < 2 or self.k_range[1] < self.k_range[0]:
            raise ConfigError(f"invalid k_range {self.k_range}")


_BOOL_KEYS = {"drop_first", "segmentation_drop_first", "standardize_dummies", "svg", "strict"}
_INT_KEYS = {"synth_n", "pca_k", "cluster_k", "cv_folds", "shap_permutations",
             "shap_background", "shap_instances", "seed"}
_FLOAT_KEYS = {"cap_k", "pca_variance_target"}
_LIST_KEYS = {"cap_columns", "models"}


def _parse_scalar(token: str):
    low = token.strip()
    if low.lower() in ("none", "null"):
        return None
    if low.lower() == "true":
        return True
    if low.lower() == "false":
        return False
    try:
        return int(low)
    except ValueError:
        pass
    try:
        return float(low)
    except ValueError:
        pass
    return low


def parse_config_text(text: str) -> dict:
    """Flat key = value lines; '#' starts a comment; grid.<model>.<param>
    keys collect into grid_overrides."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key.startswith("grid."):
            parts = key.split(".")
            if len(parts) != 3:
                raise ConfigError(f"config line {lineno}: grid keys are grid.<model>.<param>")
            _, kind, param = parts
            values.setdefault("grid_overrides", {}).setdefault(kind, {})[param] = [
                _parse_scalar(tok) for tok in value.split(",")
            ]
            continue
        values[key] = value
    return values


def config_from_dict(values: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    cfg_kwargs: dict = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "grid_overrides":
            cfg_kwargs[key] = value
            continue
        if isinstance(value, str):
            if key in _BOOL_KEYS:
                if value.lower() not in ("true", "false"):
                    raise ConfigError(f"{key} must be true or false")
                value = value.lower() == "true"
            elif key in _INT_KEYS:
                value = int(value)
            elif key in _FLOAT_KEYS:
                value = float(value)
            elif key in _LIST_KEYS:
                value = tuple(tok.strip() for tok in value.split(",") if tok.strip())
            elif key in ("split_ratios",):
                value = tuple(float(tok) for tok in value.split(","))
            elif key in ("split_counts", "k_range"):
                value = tuple(int(tok) for tok in value.split(","))
        cfg_kwargs[key] = value
    cfg = RunConfig(**cfg_kwargs)
    cfg.validate()
    return cfg


def config_to_jsonable(cfg: RunConfig) -> dict:
    out = {}
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and obj == float("-inf"):
        return "-inf"
    return obj


def load_input_table(cfg: RunConfig) -> Table:
    if cfg.synth == "social":
        return gen_social(SocialSynthSpec(n=cfg.synth_n, seed=cfg.seed))
    if cfg.synth == "grad":
        return gen_grad(GradSynthSpec(n=cfg.synth_n, seed=cfg.seed))
    return load_csv(cfg.input)


def _summaries_jsonable(table: Table) -> list[dict]:
    out = []
    for s in describe(table):
        out.append(
            {
                "name": s.name, "count": s.count, "mean": s.mean, "std": s.std,
                "min": s.min, "q1": s.q1, "median": s.median, "q3": s.q3,
                "max": s.max, "skewness": s.skewness,
            }
        )
    return out


def _audit_jsonable(table: Table) -> dict:
    report = audit(table)
    return {
        "missing_per_column": dict(sorted(report.missing_per_column.items())),
        "duplicate_row_count": report.duplicate_row_count,
    }


def _encode_all(table: Table, label: str | None, drop_first: bool):
    """One-hot every categorical column except the label; returns the encoded
    table, the ordered feature names, and which came from dummies."""
    encoded = table
    dummy_names: list[str] = []
    for col in table.categorical_columns():
        if label is not None and col.name == label:
            continue
        encoded, em = one_hot(encoded, col.name, drop_first=drop_first)
        dummy_names.extend(em.output_columns)
    feature_names = [
        c.name for c in encoded.numeric_columns()
    ]
    return encoded, feature_names, set(dummy_names)


def _cap_columns(cfg: RunConfig, table: Table, fence_rows: np.ndarray | None = None):
    """IQR-cap the configured numeric columns in place (fences from
    fence_rows when given, classically the training indices)."""
    if not cfg.cap_columns:
        return table, {}
    cols = list(table.columns)
    fences = {}
    for i, col in enumerate(cols):
        if col.name not in cfg.cap_columns:
            continue
        if not isinstance(col, NumericColumn):
            raise DataError(f"cap column {col.name!r} is not numeric")
        basis = col.values if fence_rows is None else col.values[fence_rows]
        lo, hi = iqr_fences(basis, cfg.cap_k)
        fences[col.name] = (lo, hi)
        cols[i] = NumericColumn(col.name, cap_to_fences(col.values, lo, hi))
    return Table(table.name, tuple(cols)), fences


def run_segmentation(cfg: RunConfig, table: Table, timings: dict) -> dict:
    t0 = time.perf_counter()
    section: dict = {"audit": _audit_jsonable(table), "summaries": _summaries_jsonable(table)}
    capped, fences = _cap_columns(cfg, table)
    section["cap_fences"] = {k: list(v) for k, v in sorted(fences.items())}
    numeric_names = [c.name for c in capped.numeric_columns()]
    encoded, feature_names, dummy_names = _encode_all(
        capped, None, cfg.segmentation_drop_first
    )
    x = encoded.matrix(feature_names)
    if cfg.standardize_dummies:
        z, _ = standardize_fit(x)
    else:
        to_scale = [j for j, n in enumerate(feature_names) if n not in dummy_names]
        z = x.copy()
        if to_scale:
            scaled, _ = standardize_fit(x[:, to_scale])
            z[:, to_scale] = scaled
    model = fit_pca(z, k=cfg.pca_k, variance_target=cfg.pca_variance_target)
    rows = scree_data(model)
    lt = loading_table(model, feature_names)
    section["pca"] = {
        "feature_names": feature_names,
        "k_retained": model.k_retained,
        "eigenvalues": [r[1] for r in rows],
        "explained_variance_ratio": [r[2] for r in rows],
        "cumulative_variance": [r[3] for r in rows],
        "cumulative_at_k": rows[model.k_retained - 1][3],
        "loadings": {
            name: [float(v) for v in lt.values[i]]
            for i, name in enumerate(feature_names)
        },
    }
    scores = transform(model, z)
    seed = derive_seed(cfg.seed, "stage:cluster")
    report = select_k(scores, cfg.k_range, seed=seed)
    section["k_selection"] = {
        "ks": list(report.ks),
        "inertias": list(report.inertias),
        "silhouettes": list(report.silhouettes),
        "chosen_k": report.chosen_k,
    }
    k = cfg.cluster_k or report.chosen_k
    km = kmeans_fit(scores, k, seed=seed)
    profile = characterize(km, table)
    section["kmeans"] = {
        "k": k,
        "inertia": km.inertia,
        "n_iter": km.n_iter,
        "sizes": [int(v) for v in np.bincount(km.labels, minlength=k)],
        "centroids": [[float(v) for v in row] for row in km.centroids],
    }
    section["cluster_means"] = {
        "columns": profile.column_names,
        "rows": [
            [float(profile.column(name).values[j]) for name in profile.column_names]
            for j in range(profile.n_rows)
        ],
    }
    timings["segmentation"] = time.perf_counter() - t0
    return section


def _model_grid(cfg: RunConfig, kind: str) -> dict:
    grid = default_grid(kind)
    for param, values in cfg.grid_overrides.get(kind, {}).items():
        if param not in grid and kind == "svm" and param == "max_passes":
            grid[param] = values
        elif param not in grid:
            raise ConfigError(f"unknown grid parameter {param!r} for model {kind!r}")
        else:
            grid[param] = list(values)
    return grid


def _eval_jsonable(report) -> dict:
    cm = report.confusion
    return {
        "confusion": {"tn": cm.tn, "fp": cm.fp, "fn": cm.fn, "tp": cm.tp},
        "accuracy": report.accuracy,
        "per_class": [
            {
                "precision": c.precision, "recall": c.recall,
                "f1": c.f1, "support": c.support,
            }
            for c in report.per_class
        ],
        "macro": {
            "precision": report.macro_precision,
            "recall": report.macro_recall,
            "f1": report.macro_f1,
        },
        "weighted": {
            "precision": report.weighted_precision,
            "recall": report.weighted_recall,
            "f1": report.weighted_f1,
        },
        "binary": {
            "precision": report.binary_precision,
            "recall": report.binary_recall,
            "f1": report.binary_f1,
        },
        "auc": report.auc,
    }


def run_prediction(cfg: RunConfig, table: Table, timings: dict) -> dict:
    t0 = time.perf_counter()
    section: dict = {"audit": _audit_jsonable(table), "summaries": _summaries_jsonable(table)}
    label_col = table.column(cfg.label)
    if not isinstance(label_col, CategoricalColumn):
        raise DataError(f"label column {cfg.label!r} must be categorical")
    y = label_col.codes.astype(np.int64)
    if np.any(y < 0) or len(np.unique(y)) != 2:
        raise DataError(f"label column {cfg.label!r} must be binary with no missing values")

    encoded, feature_names, dummy_names = _encode_all(table, cfg.label, cfg.drop_first)
    section["feature_names"] = feature_names
    split_seed = derive_seed(cfg.seed, "stage:split")
    split = stratified_split(
        table, cfg.label, cfg.split_ratios, seed=split_seed, counts_override=cfg.split_counts
    )
    section["split"] = {
        "train": len(split.train),
        "validation": len(split.validation),
        "test": len(split.test),
    }

    x = encoded.matrix(feature_names)
    if cfg.cap_columns:
        capped_cols = {}
        for name in cfg.cap_columns:
            j = feature_names.index(name)
            lo, hi = iqr_fences(x[split.train, j], cfg.cap_k)
            capped_cols[name] = (lo, hi)
            x[:, j] = cap_to_fences(x[:, j], lo, hi)
        section["cap_fences"] = {k: list(v) for k, v in sorted(capped_cols.items())}
    to_scale = [
        j for j, n in enumerate(feature_names)
        if cfg.standardize_dummies or n not in dummy_names
    ]
    z = x.copy()
    if to_scale:
        _, params = standardize_fit(x[np.ix_(split.train, to_scale)])
        z[:, to_scale] = standardize_apply(params, x[:, to_scale])
    x_tr, y_tr = z[split.train], y[split.train]
    x_va, y_va = z[split.validation], y[split.validation]
    x_te, y_te = z[split.test], y[split.test]

    cv_seed = derive_seed(cfg.seed, "stage:cv")
    models_section: dict = {}
    curves_rows: list[dict] = []
    best = None
    fitted: dict = {}
    for kind in cfg.models:
        grid = _model_grid(cfg, kind)
        outcome = grid_search(
            kind, grid, x_tr, y_tr, scoring=cfg.scoring, k=cfg.cv_folds, seed=cv_seed
        )
        fitted[kind] = outcome.best_model
        val_report = evaluate_predictions(
            y_va,
            predict_model(kind, outcome.best_model, x_va),
            score_model(kind, outcome.best_model, x_va),
        )
        test_report = evaluate_predictions(
            y_te,
            predict_model(kind, outcome.best_model, x_te),
            score_model(kind, outcome.best_model, x_te),
        )
        for point in tuning_curves(outcome.cv):
            curves_rows.append(
                {
                    "model": kind,
                    "config_index": point.index,
                    "train_score": point.train_score,
                    "val_score": point.val_score,
                    "train_loss": point.train_loss,
                    "val_loss": point.val_loss,
                }
            )
        models_section[kind] = {
            "grid_size": grid_size(grid),
            "best_params": _jsonable(outcome.best_params),
            "best_cv_score": outcome.best_mean_score,
            "cv": [
                {
                    "params": _jsonable(e.params),
                    "mean_score": _jsonable(e.mean_score),
                    "std_score": e.std_score,
                    "fold_scores": list(e.fold_scores),
                    "train_mean": _jsonable(e.train_mean),
                    "failed": e.failed,
                    "diagnostics": list(e.diagnostics),
                }
                for e in outcome.cv.entries
            ],
            "validation": _eval_jsonable(val_report),
            "test": _eval_jsonable(test_report),
        }
        key = val_report.binary_f1
        if best is None or key > best[0]:
            best = (key, kind)
    section["models"] = models_section
    section["tuning_curves"] = curves_rows
    best_kind = best[1]
    section["best_model"] = {
        "kind": best_kind,
        "validation_binary_f1": best[0],
        "test_accuracy": models_section[best_kind]["test"]["accuracy"],
    }

    # Shapley summary of the best model on the test set.
    model = fitted[best_kind]
    if best_kind == "logreg":
        predict_fn = lambda mat: logreg_decision(model, mat)  # noqa: E731
        scale = "log-odds"
    elif best_kind == "svm":
        predict_fn = lambda mat: score_model("svm", model, mat)  # noqa: E731
        scale = "decision-value"
    else:
        predict_fn = lambda mat: score_model(best_kind, model, mat)  # noqa: E731
        scale = "positive-fraction"
    shap_seed = derive_seed(cfg.seed, "stage:shap")
    bg_count = min(cfg.shap_background, len(x_tr))
    bg_idx = Stream(derive_seed(shap_seed, "background")).sample_without_replacement(
        len(x_tr), bg_count
    )
    instances = x_te[: min(cfg.shap_instances, len(x_te))]
    summary = shap_summary(
        predict_fn,
        x_tr[bg_idx],
        instances,
        n_permutations=cfg.shap_permutations,
        seed=shap_seed,
        feature_names=feature_names,
    )
    section["shap_summary"] = {
        "scale": scale,
        "model": best_kind,
        "features": list(summary.feature_names),
        "feature_indices": list(summary.feature_indices),
        "mean_abs": list(summary.mean_abs_values),
    }
    timings["prediction"] = time.perf_counter() - t0
    return section


def run_pipeline(cfg: RunConfig) -> tuple[dict, dict]:
    """Execute the configured branches; returns (report, timings)."""
    cfg.validate()
    timings: dict = {}
    t0 = time.perf_counter()
    table = load_input_table(cfg)
    timings["load"] = time.perf_counter() - t0
    report: dict = {
        "environment": {"toolkit": "tabmlkit", "version": __version__, "seed": cfg.seed},
        "config": config_to_jsonable(cfg),
        "pipeline": cfg.pipeline,
        "input": {"name": table.name, "n_rows": table.n_rows, "columns": table.column_names},
    }
    if cfg.pipeline in ("segmentation", "both"):
        report["segmentation"] = run_segmentation(cfg, table, timings)
    if cfg.pipeline in ("prediction", "both"):
        report["prediction"] = run_prediction(cfg, table, timings)
    return _jsonable(report), timings


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _write_csv_rows(path, header: list[str], rows: list[list]) -> None:
    import csv as _csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_artifacts(report: dict, out_dir, svg: bool = False) -> list[str]:
    """Emit the plot-data CSVs (and optional SVGs) from the report dict, so
    every number in them also appears in the report."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def emit(name, header, rows):
        _write_csv_rows(out / name, header, rows)
        written.append(name)

    seg = report.get("segmentation")
    if seg:
        pca = seg["pca"]
        emit(
            "scree.csv",
            ["component", "eigenvalue", "ratio", "cumulative"],
            [
                [i + 1, pca["eigenvalues"][i], pca["explained_variance_ratio"][i],
                 pca["cumulative_variance"][i]]
                for i in range(len(pca["eigenvalues"]))
            ],
        )
        names = pca["feature_names"]
        k = pca["k_retained"]
        emit(
            "loadings.csv",
            ["feature"] + [f"PC{i+1}" for i in range(k)],
            [[n] + pca["loadings"][n] for n in names],
        )
        sel = seg["k_selection"]
        emit("elbow.csv", ["k", "inertia"], list(map(list, zip(sel["ks"], sel["inertias"]))))
        emit(
            "silhouette.csv",
            ["k", "silhouette"],
            list(map(list, zip(sel["ks"], sel["silhouettes"]))),
        )
        cm = seg["cluster_means"]
        emit("cluster_means.csv", cm["columns"], cm["rows"])
        if svg:
            from .svg import line_chart

            line_chart(out / "scree.svg", range(1, len(pca["eigenvalues"]) + 1),
                       pca["eigenvalues"], "Eigenvalue spectrum", "component", "eigenvalue")
            line_chart(out / "silhouette.svg", sel["ks"], sel["silhouettes"],
                       "Silhouette by k", "k", "mean silhouette")
            line_chart(out / "elbow.svg", sel["ks"], sel["inertias"],
                       "Inertia by k", "k", "inertia")
            written += ["scree.svg", "silhouette.svg", "elbow.svg"]

    pred = report.get("prediction")
    if pred:
        emit(
            "tuning_curves.csv",
            ["model", "config_index", "train_score", "val_score", "train_loss", "val_loss"],
            [
                [r["model"], r["config_index"], r["train_score"], r["val_score"],
                 "" if r["train_loss"] is None else r["train_loss"],
                 "" if r["val_loss"] is None else r["val_loss"]]
                for r in pred["tuning_curves"]
            ],
        )
        best_kind = pred["best_model"]["kind"]
        for split_name in ("validation", "test"):
            cm = pred["models"][best_kind][split_name]["confusion"]
            emit(
                f"confusion_{'val' if split_name == 'validation' else 'test'}.csv",
                ["tn", "fp", "fn", "tp"],
                [[cm["tn"], cm["fp"], cm["fn"], cm["tp"]]],
            )
        shap = pred["shap_summary"]
        emit(
            "shap_summary.csv",
            ["feature", "mean_abs_shap"],
            list(map(list, zip(shap["features"], shap["mean_abs"]))),
        )
        if svg:
            from .svg import bar_chart

            top = min(10, len(shap["features"]))
            bar_chart(out / "shap_summary.svg", shap["features"][:top], shap["mean_abs"][:top],
                      f"Mean |attribution| ({shap['model']})", "feature", "mean |value|")
            written.append("shap_summary.svg")
    return written
