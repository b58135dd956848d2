#!/usr/bin/env python3
"""Regenerate the golden prediction fixture under tests/data/golden/.

The fixture pins the end-to-end numeric behavior of `molscreen predict`:
the test suite re-runs prediction against the committed checkpoint and
requires byte-identical output (64-bit floats rendered with repr).  Run
this script only when the model, featurization, or checkpoint format
changes intentionally, and commit the three files together:

    model.ckpt                the trained multi-task checkpoint
    input.csv                 the compounds to predict
    expected_predictions.csv  the pinned predict output
"""

import csv
import sys
import tempfile
from pathlib import Path

from molscreen.cli import main

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "data" / "golden"

TRAIN_FLAGS = [
    "--mode", "mtl",
    "--embed-dim", "8",
    "--n-layers", "2",
    "--head-hidden", "8",
    "--batch-size", "8",
    "--min-epochs", "2",
    "--patience", "1",
    "--max-epochs", "4",
    "--seed", "20",
]


def run(argv: list[str]) -> None:
    code = main(argv)
    if code != 0:
        raise SystemExit(f"command failed ({code}): {' '.join(argv)}")


def generate() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        data = Path(tmp) / "data.csv"
        meta = Path(tmp) / "meta.json"
        run([
            "synth-gen", "--n-tasks", "2", "--n-per-task", "30", "--seed", "20",
            "--out", str(data), "--meta-out", str(meta),
        ])
        ckpt = GOLDEN / "model.ckpt"
        run(["train", "--data", str(data), "--out", str(ckpt), *TRAIN_FLAGS])
        with open(data, newline="") as handle:
            pool = [row["smiles"] for row in csv.DictReader(handle)]
    compounds = pool[:10] + ["CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O"]
    input_csv = GOLDEN / "input.csv"
    input_csv.write_text("smiles\n" + "\n".join(compounds) + "\n")
    run([
        "predict", "--checkpoint", str(ckpt), "--input", str(input_csv),
        "--out", str(GOLDEN / "expected_predictions.csv"),
    ])
    print(f"fixture written to {GOLDEN}")


if __name__ == "__main__":
    sys.exit(generate())
