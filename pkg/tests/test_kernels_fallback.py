"""The pure-numpy kernel path must agree with the jitted default."""

import os
import subprocess
import sys

import numpy as np

SNIPPET = """
import numpy as np
from fracfem.mesh import build_uniform_mesh
from fracfem.weight import make_weight
from fracfem.basis import make_space
from fracfem.assembly import assemble_stiffness
from fracfem import _kernels

mesh = build_uniform_mesh(-1.0, 1.0, 8)
sp = make_space(mesh, make_weight("poly4", -1.0, 1.0), 0.4)
A = assemble_stiffness(sp)
np.save(r"{out}", A.entries)
print("PURE_NUMPY", _kernels.PURE_NUMPY)
"""


def _run(tmp_path, tag, pure):
    out = tmp_path / f"A_{tag}.npy"
    env = dict(os.environ)
    env["FRACFEM_PURE_NUMPY"] = "1" if pure else "0"
    proc = subprocess.run(
        [sys.executable, "-c", SNIPPET.format(out=out)],
        capture_output=True,
        text=True,
        env=env,
        timeout=600,
    )
    assert proc.returncode == 0, proc.stderr
    assert f"PURE_NUMPY {pure}" in proc.stdout
    return np.load(out)


def test_pure_numpy_path_matches_jitted(tmp_path):
    A_jit = _run(tmp_path, "jit", False)
    A_pure = _run(tmp_path, "pure", True)
    scale = np.max(np.abs(A_jit))
    assert np.max(np.abs(A_jit - A_pure)) <= 1e-14 * scale
