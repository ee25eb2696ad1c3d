import os
import subprocess
from pathlib import Path

import pytest

TINY_SPEC = """name = tiny
K = 4
mod1.d = 16
mod2.d = 16
m = 4
sigma0 = 0.01
n = 150
T = 60
eta = 0.5
fresh_test_n = 300
threshold.min_sweep_seeds = 2
"""


def _modcomp() -> str:
    exe = os.environ.get("MODCOMP_BIN")
    if exe and Path(exe).is_file():
        return exe
    default = Path(__file__).resolve().parents[2] / "build" / "tools" / "modcomp"
    if default.is_file():
        return str(default)
    pytest.skip("modcomp binary not found; set MODCOMP_BIN")


@pytest.fixture(scope="session")
def sweep_dir(tmp_path_factory) -> Path:
    """Outputs of a two-seed sweep on a toy configuration."""
    root = tmp_path_factory.mktemp("sweep")
    spec = root / "tiny.spec"
    spec.write_text(TINY_SPEC)
    subprocess.run([_modcomp(), "sweep", "--config", str(spec), "--seeds", "2", "--out", str(root)],
                   check=True, capture_output=True)
    return root / "tiny"
