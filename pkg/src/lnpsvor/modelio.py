"""Plain-text model files.

Grammar (UTF-8, one ``key value...`` pair per header line)::

    lnpsvor-model 1
    solver <npsvor-dcd1|npsvor-dcd2|svc|svr|redsvm>
    p <number of ranks>
    m <weight length, bias column included>
    bias <value|none>
    labels <original label of rank 1> ... <rank p>
    predictor <old|new|none>
    thresholds <theta_1> ... <theta_{p-1}>      (redsvm only)
    weights <r>
    <r lines of m space-separated values>

``r`` is ``p`` for NPSVOR and SVC and 1 for SVR and RedSVM. Reals are
printed with 17 significant digits so a save/load round trip is exact.
"""
from __future__ import annotations

import numpy as np

from .baselines import OvaModel, RedSvmModel, SvrModel
from .npsvor import OrdinalModel

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _fmt(values) -> str:
    return " ".join(f"{v:.17g}" for v in np.asarray(values, dtype=float).ravel())


def save_model(model, path):
    weights = np.atleast_2d(model.weights)
    lines = [
        f"lnpsvor-model {FORMAT_VERSION}",
        f"solver {model.solver}",
        f"p {model.p}",
        f"m {model.m}",
        f"bias {'none' if model.bias is None else format(model.bias, '.17g')}",
        "labels " + " ".join(str(v) for v in np.asarray(model.labels).tolist()),
        f"predictor {getattr(model, 'predictor', 'none')}",
    ]
    if isinstance(model, RedSvmModel):
        lines.append("thresholds " + _fmt(model.thresholds))
    lines.append(f"weights {weights.shape[0]}")
    lines.extend(_fmt(row) for row in weights)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_label(tok):
    v = float(tok)
    return int(v) if v == int(v) else v


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header, i = {}, 0
    while i < len(lines):
        key, _, rest = lines[i].partition(" ")
        header[key] = rest
        i += 1
        if key == "weights":
            break
    if header.get("lnpsvor-model") != str(FORMAT_VERSION):
        raise ModelFormatError(f"{path}: not a version-{FORMAT_VERSION} model file")
    try:
        solver = header["solver"]
        p, m = int(header["p"]), int(header["m"])
        bias = None if header["bias"] == "none" else float(header["bias"])
        labels = np.array([_parse_label(t) for t in header["labels"].split()])
        r = int(header["weights"])
        weights = np.array([[float(t) for t in lines[i + j].split()] for j in range(r)])
    except (KeyError, ValueError, IndexError) as exc:
        raise ModelFormatError(f"{path}: {exc}") from None
    if weights.shape != (r, m) or labels.shape[0] != p:
        raise ModelFormatError(f"{path}: inconsistent dimensions")
    if solver.startswith("npsvor"):
        return OrdinalModel(weights, labels, bias, predictor=header.get("predictor", "new"), solver=solver)
    if solver == "svc":
        return OvaModel(weights, labels, bias)
    if solver == "svr":
        return SvrModel(weights[0], labels, bias)
    if solver == "redsvm":
        theta = np.array([float(t) for t in header.get("thresholds", "").split()])
        if theta.shape[0] != p - 1:
            raise ModelFormatError(f"{path}: expected {p - 1} thresholds")
        return RedSvmModel(weights[0], theta, labels, bias)
    raise ModelFormatError(f"{path}: unknown solver {solver!r}")
