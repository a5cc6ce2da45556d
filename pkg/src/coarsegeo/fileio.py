"""File formats: group-spec JSON, path JSONL, and report emission.

Path files are JSONL with one record per sample:
{"s": <param>, "x": {"<root_idx>": [..]}, "t": [..]}.
Reports embed the sha256 of their canonical config and the toolkit version,
and identical (config, seed) reruns produce byte-identical output.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from . import __version__
from .errors import ValidationError
from .groups import RootSystem
from .paths import Path


def read_path_jsonl(rs: RootSystem, path, kappa=1.0, c_add=0.0, is_geodesic=False,
                    validate=True) -> Path:
    params, base, fibers = [], [], [[] for _ in range(rs.n_roots)]
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{line_no}: bad JSON ({exc})")
            params.append(float(rec["s"]))
            base.append([float(v) for v in rec["t"]])
            for i in range(rs.n_roots):
                fibers[i].append([float(v) for v in rec["x"][str(i)]])
    if len(params) < 2:
        raise ValidationError(f"{path}: a path needs at least 2 samples")
    return Path(
        rs,
        np.array(base),
        [np.array(f) for f in fibers],
        params=np.array(params),
        kappa=kappa,
        c_add=c_add,
        is_geodesic=is_geodesic,
        validate=validate,
    )


def write_path_jsonl(path_obj: Path, out):
    with open(out, "w") as fh:
        for k in range(path_obj.n_samples):
            rec = {
                "s": float(path_obj.params[k]),
                "x": {
                    str(i): [float(v) for v in path_obj.fibers[i][k]]
                    for i in range(len(path_obj.fibers))
                },
                "t": [float(v) for v in path_obj.base[k]],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def config_hash(config) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and (np.isnan(obj) or np.isinf(obj)):
        return str(obj)
    return obj


def emit_report(report: dict, config: dict, out=None) -> str:
    body = dict(_jsonable(report))
    body["config_sha256"] = config_hash(_jsonable(config))
    body["version"] = __version__
    text = json.dumps(body, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def write_csv(rows, header, out):
    with open(out, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(_jsonable(v)) for v in row) + "\n")
