"""File formats: samples CSV and system/report JSON.

Samples (UTF-8 CSV): first line `# p=<p> m=<m>`; every following line is

    re_z,im_z,<2*p*m reals: re,im interleaved, row-major over the value>

Floats are written with repr(), which round-trips bit-exactly. System
files are JSON objects with keys n, m, p, A, B, C, D; complex entries are
[re, im] pairs in row-major nested arrays. All writes are atomic
(temp file + rename).
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .core import SampleSet, StateSpaceSystem

__all__ = [
    "write_samples",
    "read_samples",
    "write_system",
    "read_system",
    "write_json",
    "atomic_write_text",
]


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_samples(path: str, samples: SampleSet) -> None:
    lines = [f"# p={samples.p} m={samples.m}"]
    for z, val in zip(samples.points, samples.values):
        nums = [z.real, z.imag]
        for entry in val.ravel():  # row-major
            nums.extend((entry.real, entry.imag))
        lines.append(",".join(repr(float(x)) for x in nums))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_samples(path: str) -> SampleSet:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# p=<p> m=<m>' header")
    header = dict(tok.split("=") for tok in lines[0][1:].split())
    p, m = int(header["p"]), int(header["m"])
    points, values = [], []
    for ln in lines[1:]:
        nums = [float(tok) for tok in ln.split(",")]
        if len(nums) != 2 + 2 * p * m:
            raise ValueError(f"{path}: expected {2 + 2 * p * m} fields, got {len(nums)}")
        points.append(complex(nums[0], nums[1]))
        flat = np.array(nums[2::2]) + 1j * np.array(nums[3::2])
        values.append(flat.reshape(p, m))
    return SampleSet(np.array(points), np.array(values))


def _matrix_to_json(mat: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.atleast_2d(mat)]


def _matrix_from_json(data, rows, cols):
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        for j, (re, im) in enumerate(row):
            out[i, j] = complex(re, im)
    return out


def write_system(path: str, sys: StateSpaceSystem) -> None:
    obj = {
        "n": sys.n,
        "m": sys.m,
        "p": sys.p,
        "A": _matrix_to_json(sys.A),
        "B": _matrix_to_json(sys.B),
        "C": _matrix_to_json(sys.C),
        "D": _matrix_to_json(sys.D),
    }
    atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=1) + "\n")


def read_system(path: str) -> StateSpaceSystem:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    n, m, p = int(obj["n"]), int(obj["m"]), int(obj["p"])
    return StateSpaceSystem(
        _matrix_from_json(obj["A"], n, n),
        _matrix_from_json(obj["B"], n, m),
        _matrix_from_json(obj["C"], p, n),
        _matrix_from_json(obj["D"], p, m),
    )


def write_json(path: str, obj: dict) -> None:
    atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=1) + "\n")
