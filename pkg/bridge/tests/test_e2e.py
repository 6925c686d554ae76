"""The generator toolkit driving this server as its backend."""

import json
import shlex
import sys

from rimegen import cli


def test_generate_through_bridge(tiny_model_dir, repo_root, tmp_path, capsys):
    bridge_cmd = (
        f"{shlex.quote(sys.executable)} -m verse_bridge.server "
        f"--model {shlex.quote(str(tiny_model_dir))}"
    )
    trace_path = tmp_path / "trace.jsonl"
    rc = cli.main(
        [
            "generate",
            "--bridge", bridge_cmd,
            "--lexicon", str(repo_root / "data" / "lexicon_fr.tsv"),
            "--keywords", "mer,lune,hiver,soleil",
            "--verses", "4",
            "--out", str(tmp_path / "manifest.json"),
            "--trace", str(trace_path),
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0

    lines = [line for line in out.splitlines() if line]
    assert lines[0] == "=== poem 1 ==="
    assert lines[1] == "keywords: mer lune hiver soleil"
    assert len(lines) == 6  # header + keywords + 4 verses

    records = [
        json.loads(line)
        for line in trace_path.read_text(encoding="utf-8").splitlines()
    ]
    steps = {}
    for record in records:
        steps.setdefault(record["verse"], []).append(record)
    assert set(steps) == {1, 2, 3, 4}
    for verse_steps in steps.values():
        emitted = sum(1 for s in verse_steps if s["chosen"] != "<eos>")
        assert 4 <= emitted <= 20

    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["inputs"]["backend"]["kind"] == "bridge"
    assert manifest["inputs"]["backend"]["name"] == "verse-bridge"
