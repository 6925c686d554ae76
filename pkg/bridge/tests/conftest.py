import sys
from pathlib import Path

import pytest

BRIDGE_ROOT = Path(__file__).resolve().parents[1]
REPO_ROOT = BRIDGE_ROOT.parent

sys.path.insert(0, str(BRIDGE_ROOT / "scripts"))

import make_tiny_model  # noqa: E402


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny") / "model"
    rc = make_tiny_model.main(["--out", str(out), "--seed", "0"])
    assert rc == 0
    return out


@pytest.fixture(scope="session")
def repo_root():
    return REPO_ROOT
