"""Fine-tuning script: plan output, defaults, and a one-epoch smoke."""

import json

import pytest

import finetune


@pytest.fixture()
def pairs_path(tmp_path):
    path = tmp_path / "pairs.jsonl"
    records = [
        {"input": "mer lune hiver soleil", "output": "La mer berce la lune"},
        {"input": "La mer berce la lune", "output": "Et l'hiver dort au loin"},
        {"input": "Et l'hiver dort au loin", "output": "Le soleil attend son heure"},
    ]
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records),
        encoding="utf-8",
    )
    return path


def test_dry_run_prints_default_plan_and_writes_nothing(
    pairs_path, tiny_model_dir, tmp_path, capsys
):
    out_dir = tmp_path / "finetuned"
    rc = finetune.main(
        [
            "--pairs", str(pairs_path),
            "--model", str(tiny_model_dir),
            "--out", str(out_dir),
            "--dry-run",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "pairs: 3" in out
    assert "epochs: 10" in out
    assert "learning rate: 5e-05" in out
    assert "dry run: nothing written" in out
    assert not out_dir.exists()


def test_empty_pairs_file_is_an_error(tiny_model_dir, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(SystemExit, match="no training pairs"):
        finetune.main(
            [
                "--pairs", str(empty),
                "--model", str(tiny_model_dir),
                "--out", str(tmp_path / "out"),
            ]
        )


def test_one_epoch_smoke_writes_a_loadable_checkpoint(
    pairs_path, tiny_model_dir, tmp_path, capsys
):
    out_dir = tmp_path / "finetuned"
    rc = finetune.main(
        [
            "--pairs", str(pairs_path),
            "--model", str(tiny_model_dir),
            "--out", str(out_dir),
            "--epochs", "1",
            "--batch-size", "2",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "epoch 1/1: loss" in out
    assert (out_dir / "config.json").exists()

    from verse_bridge.model import WordBackend

    backend = WordBackend(out_dir)
    candidates = backend.top_k(["mer", "lune", "<sep>"], 5)
    assert 0 < len(candidates) <= 5
