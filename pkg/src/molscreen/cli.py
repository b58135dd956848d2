"""Command-line surface for the screening pipeline.

Subcommands: ``ingest``, ``train``, ``active-learn``, ``transfer``,
``predict``, ``screen``, ``eval``, ``export-embeddings``, ``synth-gen``.

Configuration precedence is flags > JSON config file > defaults (the
defaults being :class:`molscreen.train.TrainConfig`).  Every subcommand
that consumes or stores randomness prints the effective seed.  Failures
exit nonzero with a single JSON error line on stderr; the exit code
identifies the failure class (2 bad configuration, 3 input/output,
4 feature-schema mismatch, 5 training failure).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .active import ACQUISITIONS, ALConfig, al_run, log_to_csv
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .data import HIT_DIRECTIONS, DatasetError, TaskDataset, subsample_task_labels
from .dataset_io import IngestError, ingest_csv, read_smiles_csv, write_dataset_csv
from .featurize import DEFAULT_SCHEMA
from .metrics import (
    MetricError,
    ScreenResult,
    concordance_index,
    export_embeddings,
    mse,
    pearson,
    rank_best_first,
    recall_at,
)
from .model import GraphBatch, ModelParams, predict
from .synth import SynthMeta, synth_dataset, task_oracle
from .train import TrainConfig, TrainingDiverged, summarize_log, train
from .transfer import TransferError, transfer_train

EXIT_BAD_CONFIG = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_TRAINING = 5


class CliError(Exception):
    """Base for failures that map to a documented exit code."""

    exit_code = 1
    category = "error"


class ConfigError(CliError):
    exit_code = EXIT_BAD_CONFIG
    category = "bad-config"


class InputError(CliError):
    exit_code = EXIT_IO
    category = "io-failure"


class SchemaMismatchError(CliError):
    exit_code = EXIT_SCHEMA
    category = "schema-mismatch"


class TrainingError(CliError):
    exit_code = EXIT_TRAINING
    category = "training-failure"


# ----------------------------------------------------------------------
# configuration resolution
# ----------------------------------------------------------------------
_CONFIG_TYPES: dict[str, type] = {
    "lr": float,
    "batch_size": int,
    "dropout": float,
    "embed_dim": int,
    "n_layers": int,
    "head_hidden": int,
    "val_fraction": float,
    "min_epochs": int,
    "patience": int,
    "max_epochs": int,
    "seed": int,
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group(
        "training configuration", "flags override --config entries, which override defaults"
    )
    group.add_argument("--config", metavar="JSON", help="JSON file of configuration keys")
    for name, typ in _CONFIG_TYPES.items():
        group.add_argument(
            "--" + name.replace("_", "-"),
            type=typ,
            default=None,
            help=f"override {name} (default {getattr(TrainConfig(), name)})",
        )


def _read_json(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return raw


def resolve_train_config(args) -> tuple[TrainConfig, set[str]]:
    """Merge defaults, config-file entries, and explicit flags.

    Returns the resolved config plus the set of keys the user pinned
    explicitly (file or flag), so callers can tell overrides from defaults.
    """
    merged = dataclasses.asdict(TrainConfig())
    explicit: set[str] = set()
    if getattr(args, "config", None):
        raw = _read_json(args.config)
        unknown = sorted(set(raw) - set(merged))
        if unknown:
            raise ConfigError(
                f"unknown configuration keys {unknown}; valid keys: {sorted(merged)}"
            )
        for key, value in raw.items():
            try:
                merged[key] = _CONFIG_TYPES[key](value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"configuration key {key!r}: {exc}") from exc
            explicit.add(key)
    for name in _CONFIG_TYPES:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
            explicit.add(name)
    try:
        return TrainConfig(**merged), explicit
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ----------------------------------------------------------------------
# shared I/O helpers
# ----------------------------------------------------------------------
def _load_dataset(path) -> TaskDataset:
    try:
        ds, report = ingest_csv(path)
    except (OSError, IngestError) as exc:
        raise InputError(str(exc)) from exc
    except DatasetError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if report.n_rejected:
        _print_report(path, report)
    return ds


def _load_smiles(path, *, strict: bool) -> list[str]:
    """The smiles column of a CSV; with ``strict`` any bad row is fatal."""
    try:
        smiles, report = read_smiles_csv(path)
    except (OSError, IngestError) as exc:
        raise InputError(str(exc)) from exc
    if report.n_rejected:
        if strict:
            worst = "; ".join(f"row {r}: {m}" for r, m in report.rejected[:5])
            raise InputError(
                f"{path}: {report.n_rejected} unusable rows ({worst})"
            )
        _print_report(path, report)
    if not smiles:
        raise InputError(f"{path}: no usable compounds")
    return smiles


def _print_report(path, report) -> None:
    print(
        json.dumps(
            {
                "file": str(path),
                "rows": report.n_rows,
                "accepted": report.n_accepted,
                "rejected": [
                    {"row": row, "error": message} for row, message in report.rejected
                ],
            }
        )
    )


def _load_ckpt(path) -> Checkpoint:
    try:
        ck = load_checkpoint(path)
    except (OSError, CheckpointError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    return ck


def _require_current_schema(ck: Checkpoint, path) -> None:
    if ck.schema_hash != DEFAULT_SCHEMA.schema_hash():
        raise SchemaMismatchError(
            f"{path}: checkpoint feature schema {ck.schema_hash[:12]}… does not "
            f"match this build's schema {DEFAULT_SCHEMA.schema_hash()[:12]}…"
        )


def _task_indices(ck: Checkpoint, names: list[str]) -> list[int]:
    indices = []
    for name in names:
        if name not in ck.params.task_names:
            raise ConfigError(
                f"task {name!r} not in checkpoint tasks {ck.params.task_names}"
            )
        indices.append(ck.params.task_names.index(name))
    return indices


def _featurize_strict(smiles: list[str]) -> list:
    from .featurize import featurize_smiles

    return [featurize_smiles(s) for s in smiles]


def _predict_matrix(
    params: ModelParams, graphs: list, task_indices: list[int], batch_size: int = 256
) -> np.ndarray:
    chunks = []
    for start in range(0, len(graphs), batch_size):
        batch = GraphBatch.from_graphs(graphs[start : start + batch_size])
        chunks.append(predict(batch, params, task_indices))
    return np.concatenate(chunks, axis=0)


def _write_csv_text(path, lines: list[str]) -> None:
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _print_seed(seed: int) -> None:
    print(f"seed={seed}")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def cmd_ingest(args) -> None:
    try:
        ds, report = ingest_csv(args.input)
    except (OSError, IngestError) as exc:
        raise InputError(str(exc)) from exc
    except DatasetError as exc:
        raise InputError(f"{args.input}: {exc}") from exc
    try:
        write_dataset_csv(args.out, ds)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from exc
    _print_report(args.input, report)
    print(
        json.dumps(
            {
                "out": str(args.out),
                "compounds": ds.n_compounds,
                "tasks": ds.task_names,
                "hit_directions": ds.hit_directions,
            }
        )
    )


def _apply_train_mode(ds: TaskDataset, args, seed: int) -> TaskDataset:
    """Select task columns and apply label caps.

    Caps are drawn per ORIGINAL task column (stream ``(seed, 4, column)``),
    so single-task and multi-task runs on the same file keep the identical
    label subset for the target — the two modes differ only in the
    auxiliary columns.
    """

    def resolve(name: str) -> int:
        if name not in ds.task_names:
            raise ConfigError(f"task {name!r} not in dataset tasks {ds.task_names}")
        return ds.task_names.index(name)

    limits: dict[int, int] = {}
    if args.mode == "single":
        target = args.target or args.new_target
        if target is None:
            if ds.n_tasks != 1:
                raise ConfigError(
                    "--mode single needs --target when the dataset has several tasks"
                )
            target_index = 0
        else:
            target_index = resolve(target)
        if args.new_size is not None:
            limits[target_index] = args.new_size
        keep = [target_index]
    else:  # mtl: all task columns
        keep = list(range(ds.n_tasks))
        if args.aux_size is not None or args.new_size is not None:
            if args.new_target is None:
                raise ConfigError("--aux-size/--new-size require --new-target")
            new_index = resolve(args.new_target)
            if args.new_size is not None:
                limits[new_index] = args.new_size
            if args.aux_size is not None:
                for t in range(ds.n_tasks):
                    if t != new_index:
                        limits[t] = args.aux_size
    if limits:
        try:
            ds = subsample_task_labels(ds, limits, seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if keep != list(range(ds.n_tasks)):
        ds = ds.restrict_to_tasks(keep)
    return ds


def cmd_train(args) -> None:
    config, _ = resolve_train_config(args)
    _print_seed(config.seed)
    ds = _load_dataset(args.data)
    ds = _apply_train_mode(ds, args, config.seed)
    try:
        params, log = train(ds, config)
    except TrainingDiverged as exc:
        raise TrainingError(str(exc)) from exc
    except (DatasetError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    save_checkpoint(args.out, params, ds.hit_directions, config.seed, summarize_log(log))
    print(json.dumps({"checkpoint": str(args.out), "tasks": ds.task_names, **summarize_log(log)}))


def cmd_predict(args) -> None:
    ck = _load_ckpt(args.checkpoint)
    _require_current_schema(ck, args.checkpoint)
    _print_seed(ck.seed)
    names = (
        [s.strip() for s in args.tasks.split(",")]
        if args.tasks
        else list(ck.params.task_names)
    )
    indices = _task_indices(ck, names)
    smiles = _load_smiles(args.input, strict=True)
    preds = _predict_matrix(ck.params, _featurize_strict(smiles), indices)
    lines = ["smiles," + ",".join(names)]
    for i, s in enumerate(smiles):
        lines.append(s + "," + ",".join(repr(float(v)) for v in preds[i]))
    _write_csv_text(args.out, lines)
    print(json.dumps({"out": str(args.out), "compounds": len(smiles), "tasks": names}))


def cmd_screen(args) -> None:
    ck = _load_ckpt(args.checkpoint)
    _require_current_schema(ck, args.checkpoint)
    _print_seed(ck.seed)
    if not 0.0 < args.top_frac < 1.0:
        raise ConfigError("--top-frac must be in (0, 1)")
    name = args.task or ck.params.task_names[0]
    index = _task_indices(ck, [name])[0]
    direction = ck.hit_directions[index]
    smiles = _load_smiles(args.library, strict=True)
    scores = _predict_matrix(ck.params, _featurize_strict(smiles), [index])[:, 0]
    order = rank_best_first(scores, direction)
    n_hits = math.ceil(args.top_frac * len(smiles))
    lines = ["smiles,predicted_score,rank,is_predicted_hit"]
    for rank, i in enumerate(order, start=1):
        flag = "true" if rank <= n_hits else "false"
        lines.append(f"{smiles[i]},{repr(float(scores[i]))},{rank},{flag}")
    _write_csv_text(args.out, lines)
    print(
        json.dumps(
            {
                "out": str(args.out),
                "task": name,
                "hit_direction": direction,
                "compounds": len(smiles),
                "predicted_hits": n_hits,
            }
        )
    )


def cmd_eval(args) -> None:
    ck = _load_ckpt(args.checkpoint)
    _require_current_schema(ck, args.checkpoint)
    _print_seed(ck.seed)
    ks = args.k or []
    fracs = args.top_frac or []
    if bool(ks) != bool(fracs):
        raise ConfigError("recall grid needs at least one --k and one --top-frac")
    ds = _load_dataset(args.data)
    shared = [name for name in ds.task_names if name in ck.params.task_names]
    if not shared:
        raise ConfigError(
            f"no dataset task {ds.task_names} matches a checkpoint task "
            f"{ck.params.task_names}"
        )
    lines = ["metric,task,value"]
    for name in shared:
        column = ds.task_names.index(name)
        index = ck.params.task_names.index(name)
        rows = np.flatnonzero(ds.label_mask[:, column])
        truth = ds.labels[rows, column]
        graphs = [ds.graphs[i] for i in rows]
        preds = _predict_matrix(ck.params, graphs, [index])[:, 0]
        direction = ck.hit_directions[index]
        try:
            lines.append(f"mse,{name},{repr(mse(truth, preds))}")
            lines.append(f"pearson,{name},{repr(pearson(truth, preds))}")
            lines.append(f"concordance_index,{name},{repr(concordance_index(truth, preds))}")
            for k in ks:
                for frac in fracs:
                    value = recall_at(
                        ScreenResult(
                            true_scores=truth,
                            predicted_scores=preds,
                            hit_direction=direction,
                            k=k,
                            cutoff_fraction=frac,
                        )
                    )
                    lines.append(f"recall@k={k};p={frac},{name},{repr(value)}")
        except MetricError as exc:
            raise ConfigError(f"task {name!r}: {exc}") from exc
    _write_csv_text(args.out, lines)
    print(json.dumps({"out": str(args.out), "tasks": shared}))


def cmd_export_embeddings(args) -> None:
    ck = _load_ckpt(args.checkpoint)
    _require_current_schema(ck, args.checkpoint)
    _print_seed(ck.seed)
    smiles = _load_smiles(args.input, strict=True)
    ds = TaskDataset(
        smiles=smiles,
        graphs=_featurize_strict(smiles),
        labels=np.zeros((len(smiles), len(ck.params.task_names))),
        task_names=list(ck.params.task_names),
        hit_directions=list(ck.hit_directions),
        schema=ck.params.schema,
    )
    matrix, ordered = export_embeddings(ck.params, ds)
    lines = ["smiles," + ",".join(f"e{j}" for j in range(matrix.shape[1]))]
    for i, s in enumerate(ordered):
        lines.append(s + "," + ",".join(repr(float(v)) for v in matrix[i]))
    _write_csv_text(args.out, lines)
    print(json.dumps({"out": str(args.out), "compounds": len(ordered), "dim": matrix.shape[1]}))


def cmd_transfer(args) -> None:
    ck = _load_ckpt(args.pretrained)
    _require_current_schema(ck, args.pretrained)
    config, explicit = resolve_train_config(args)
    # Encoder dimensions are fixed by the pretrained model; adopt them unless
    # the user pinned conflicting values (which transfer_train rejects).
    updates = {}
    if "embed_dim" not in explicit:
        updates["embed_dim"] = ck.params.embed_dim
    if "n_layers" not in explicit:
        updates["n_layers"] = ck.params.n_layers
    if "head_hidden" not in explicit:
        updates["head_hidden"] = ck.params.head_hidden
    if updates:
        config = dataclasses.replace(config, **updates)
    _print_seed(config.seed)
    ds = _load_dataset(args.data)
    if ds.n_tasks > 1:
        if args.target is None:
            raise ConfigError("--target is required when the dataset has several tasks")
        if args.target not in ds.task_names:
            raise ConfigError(f"task {args.target!r} not in dataset tasks {ds.task_names}")
        ds = ds.restrict_to_tasks([ds.task_names.index(args.target)])
    try:
        result = transfer_train(ck.params, ds, config, head_epochs=args.head_epochs)
    except TransferError as exc:
        raise ConfigError(str(exc)) from exc
    except TrainingDiverged as exc:
        raise TrainingError(str(exc)) from exc
    except (DatasetError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    save_checkpoint(
        args.out, result.params, ds.hit_directions, config.seed,
        summarize_log(result.phase2_log),
    )
    print(
        json.dumps(
            {
                "checkpoint": str(args.out),
                "task": ds.task_names[0],
                "warmup": summarize_log(result.phase1_log) if result.phase1_log.epochs else None,
                "finetune": summarize_log(result.phase2_log),
            }
        )
    )


def cmd_active_learn(args) -> None:
    config, _ = resolve_train_config(args)
    _print_seed(config.seed)
    try:
        al_config = ALConfig(
            total_budget=args.budget,
            ensemble_size=args.ensemble_size,
            n_rounds=args.rounds,
            init_fraction=args.init_fraction,
            acquisition=args.acquisition,
            ucb_beta=args.ucb_beta,
            seed=config.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        meta = SynthMeta.from_json(Path(args.meta).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {args.meta}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.meta}: not a benchmark metadata file ({exc})") from exc
    if not 0 <= args.oracle_task < meta.n_tasks:
        raise ConfigError(
            f"--oracle-task {args.oracle_task} out of range for {meta.n_tasks} tasks"
        )
    oracle = task_oracle(meta, args.oracle_task)
    pool = _load_smiles(args.pool, strict=False)
    try:
        result = al_run(
            pool,
            oracle,
            al_config,
            config,
            hit_direction=args.hit_direction,
            task_name=args.task_name,
        )
    except TrainingDiverged as exc:
        raise TrainingError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        Path(args.log_out).write_text(log_to_csv(result.log))
    except OSError as exc:
        raise InputError(f"cannot write {args.log_out}: {exc}") from exc
    if args.acquired_out:
        write_dataset_csv(args.acquired_out, result.labeled_dataset)
    if args.out:
        save_checkpoint(
            args.out, result.members[0], [args.hit_direction], config.seed, None
        )
    print(
        json.dumps(
            {
                "log": str(args.log_out),
                "labeled": len(result.labeled_indices),
                "rounds": len(result.log) - 1,
                "acquisition": al_config.acquisition,
            }
        )
    )


def cmd_synth_gen(args) -> None:
    _print_seed(args.seed)
    try:
        ds, meta = synth_dataset(
            n_tasks=args.n_tasks,
            n_per_task=args.n_per_task,
            seed=args.seed,
            noise_sigma=args.noise_sigma,
            min_atoms=args.min_atoms,
            max_atoms=args.max_atoms,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        write_dataset_csv(args.out, ds)
        Path(args.meta_out).write_text(meta.to_json())
    except OSError as exc:
        raise InputError(f"cannot write output: {exc}") from exc
    print(
        json.dumps(
            {
                "out": str(args.out),
                "meta": str(args.meta_out),
                "compounds": ds.n_compounds,
                "tasks": ds.task_names,
            }
        )
    )


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molscreen",
        description="Train and apply graph-network surrogates for compound screening.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a raw CSV and write the cleaned dataset")
    p.add_argument("--input", required=True, help="raw dataset CSV")
    p.add_argument("--out", required=True, help="cleaned dataset CSV")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a surrogate on a labeled dataset")
    p.add_argument("--data", required=True, help="labeled dataset CSV")
    p.add_argument("--out", required=True, help="checkpoint file to write")
    p.add_argument("--mode", choices=["single", "mtl"], default="single")
    p.add_argument("--target", help="task column for --mode single")
    p.add_argument("--new-target", help="task of interest for --mode mtl")
    p.add_argument("--new-size", type=int, help="cap on labels for --new-target")
    p.add_argument("--aux-size", type=int, help="cap on labels per auxiliary task")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("active-learn", help="ensemble acquisition loop on a compound pool")
    p.add_argument("--pool", required=True, help="pool CSV with a smiles column")
    p.add_argument("--meta", required=True, help="benchmark metadata JSON (the labeler)")
    p.add_argument("--oracle-task", type=int, default=0, help="metadata task used as labeler")
    p.add_argument("--budget", type=int, required=True, help="total labels to spend")
    p.add_argument("--rounds", type=int, default=4)
    p.add_argument("--ensemble-size", type=int, default=5)
    p.add_argument("--init-fraction", type=float, default=0.5)
    p.add_argument("--acquisition", choices=list(ACQUISITIONS), default="greedy_mean")
    p.add_argument("--ucb-beta", type=float, default=1.0)
    p.add_argument("--hit-direction", choices=list(HIT_DIRECTIONS), default="lower_is_better")
    p.add_argument("--task-name", default="T0", help="task name for outputs")
    p.add_argument("--log-out", required=True, help="per-round log CSV")
    p.add_argument("--acquired-out", help="labeled-set CSV (acquisition order)")
    p.add_argument("--out", help="checkpoint of the first final-ensemble member")
    _add_config_flags(p)
    p.set_defaults(func=cmd_active_learn)

    p = sub.add_parser("transfer", help="warm-start a new target from a pretrained encoder")
    p.add_argument("--pretrained", required=True, help="checkpoint to start from")
    p.add_argument("--data", required=True, help="new-target dataset CSV")
    p.add_argument("--target", help="task column when the dataset has several")
    p.add_argument("--head-epochs", type=int, default=20, help="frozen-encoder warmup epochs")
    p.add_argument("--out", required=True, help="checkpoint file to write")
    _add_config_flags(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("predict", help="predict scores for a list of compounds")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="CSV with a smiles column")
    p.add_argument("--tasks", help="comma-separated task names (default: all)")
    p.add_argument("--out", required=True, help="predictions CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("screen", help="rank a compound library by predicted score")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--library", required=True, help="CSV with a smiles column")
    p.add_argument("--task", help="task to screen on (default: first in checkpoint)")
    p.add_argument("--top-frac", type=float, default=0.02, help="fraction flagged as hits")
    p.add_argument("--out", required=True, help="ranked CSV")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("eval", help="metrics of a checkpoint against labeled data")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="labeled dataset CSV")
    p.add_argument("--k", type=int, action="append", help="true-hit count (repeatable)")
    p.add_argument(
        "--top-frac", type=float, action="append", help="predicted-hit fraction (repeatable)"
    )
    p.add_argument("--out", required=True, help="metrics CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-embeddings", help="write encoder embeddings for compounds")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="CSV with a smiles column")
    p.add_argument("--out", required=True, help="embeddings CSV")
    p.set_defaults(func=cmd_export_embeddings)

    p = sub.add_parser("synth-gen", help="generate a synthetic benchmark dataset")
    p.add_argument("--n-tasks", type=int, required=True)
    p.add_argument("--n-per-task", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.1)
    p.add_argument("--min-atoms", type=int, default=4)
    p.add_argument("--max-atoms", type=int, default=14)
    p.add_argument("--out", required=True, help="dataset CSV")
    p.add_argument("--meta-out", required=True, help="ground-truth metadata JSON")
    p.set_defaults(func=cmd_synth_gen)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(
            json.dumps(
                {"error": exc.category, "exit_code": exc.exit_code, "message": str(exc)}
            ),
            file=sys.stderr,
        )
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
