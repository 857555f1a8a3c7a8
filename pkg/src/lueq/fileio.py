"""JSON file formats: state matrices, certificates and representation reports.

A matrix file is a UTF-8 JSON object ``{"m": m, "n": n, "re": [...], "im": [...]}``
where ``re`` and ``im`` are row-major mn x mn arrays.  Row and column
index ``i * n + j`` (0-based; ``(i - 1) * n + j`` counting from 1) is the
product vector |i> (x) |j>.  Numbers are written with 17 significant
digits, so a write/read cycle reproduces every float bit for bit.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import LUEqError
from .representation import (
    GaugeDescriptor,
    Representation,
    RepresentationItem,
    gauge_descriptor,
    reconstruct,
)
from .schmidt import SchmidtDecomposition
from .states import BipartiteDims, DensityMatrix, LocalUnitary


class FileFormatError(LUEqError):
    """The file is missing, unreadable or not in the expected layout."""


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise FileFormatError(f"cannot serialize non-finite value {x!r}")
    if x == 0.0:
        return "0.0"
    return f"{x:.17g}"


def _dump(obj, indent=0) -> str:
    """json.dumps with fixed float formatting; numeric rows stay on one line."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = [f'{pad}  {json.dumps(str(k))}: {_dump(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(inner) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        if not obj:
            return "[]"
        inner = [f"{pad}  {_dump(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(inner) + f"\n{pad}]"
    return _scalar(obj)


def _scalar(v) -> str:
    if isinstance(v, (bool, np.bool_)) or v is None:
        return json.dumps(None if v is None else bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return json.dumps(v)


def dumps(obj) -> str:
    return _dump(obj) + "\n"


def complex_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def complex_from_json(obj, shape=None) -> np.ndarray:
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"bad complex array: {exc}") from exc
    if re.shape != im.shape or (shape is not None and re.shape != tuple(shape)):
        raise FileFormatError(f"re/im shapes {re.shape}, {im.shape} do not match expected {shape}")
    return re + 1j * im


def matrix_to_json(rho: DensityMatrix) -> dict:
    return {"m": rho.dims.m, "n": rho.dims.n, **complex_to_json(rho.mat)}


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(obj, dict):
        raise FileFormatError(f"{path}: top level must be a JSON object")
    return obj


def read_matrix(path) -> tuple[BipartiteDims, np.ndarray]:
    """Parse a matrix file; shape problems are format errors, physics is not checked."""
    obj = _read_json(path)
    try:
        m, n = obj["m"], obj["n"]
    except KeyError as exc:
        raise FileFormatError(f"{path}: missing field {exc}") from exc
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in (m, n)) or m < 2 or n < 2:
        raise FileFormatError(f"{path}: m and n must be integers >= 2")
    size = m * n
    return BipartiteDims(m, n), complex_from_json(obj, (size, size))


def write_text(text: str, path=None) -> None:
    if path is None:
        print(text, end="")
    else:
        Path(path).write_text(text, encoding="utf-8")


def write_matrix(rho: DensityMatrix, path=None) -> None:
    write_text(dumps(matrix_to_json(rho)), path)


def certificate_to_json(lu: LocalUnitary, residual: float | None = None) -> dict:
    out = {"m": lu.dims.m, "n": lu.dims.n, "u": complex_to_json(lu.u), "v": complex_to_json(lu.v)}
    if residual is not None:
        out["residual"] = float(residual)
    return out


def read_certificate(path) -> LocalUnitary:
    obj = _read_json(path)
    try:
        m, n = obj["m"], obj["n"]
        return LocalUnitary(complex_from_json(obj["u"], (m, m)), complex_from_json(obj["v"], (n, n)))
    except KeyError as exc:
        raise FileFormatError(f"{path}: missing field {exc}") from exc


# -- representation reports --------------------------------------------------


def _descriptor_to_json(g: GaugeDescriptor) -> dict:
    return {
        "left_a_phases": g.left_a_phases,
        "left_b_phases": g.left_b_phases,
        "left_a_blocks": list(g.left_a_blocks),
        "left_b_blocks": list(g.left_b_blocks),
        "anchor_blocks": list(g.anchor_blocks),
        "per_item_phase": g.per_item_phase,
        "schmidt_blocks": [{"phase_pairs": s.phase_pairs, "blocks": list(s.blocks)} for s in g.schmidt_blocks],
        "eigen_blocks": list(g.eigen_blocks),
        "constraint_count": g.constraint_count,
        "free_parameter_count": g.free_parameter_count,
    }


def representation_to_json(rep: Representation, tol=None) -> dict:
    items = []
    for it in rep.items:
        items.append(
            {
                "eigenvalue": it.eigenvalue,
                "schmidt_rank": it.schmidt.rank,
                "schmidt_coefficients": it.coefficients.tolist(),
                "schmidt_blocks": [list(b) for b in it.schmidt.degeneracy_blocks],
                "x": complex_to_json(it.x),
                "y": complex_to_json(it.y),
            }
        )
    descriptor = gauge_descriptor(rep, tol)
    return {
        "m": rep.dims.m,
        "n": rep.dims.n,
        "rank": rep.rank,
        "eigenvalues": rep.eigenvalues.tolist(),
        "eigenvalue_blocks": [list(b) for b in rep.eigenvalue_blocks],
        "degenerate_anchor": rep.degenerate_anchor,
        "gauge_fixed": rep.gauge_fixed,
        "items": items,
        "basis_a": complex_to_json(rep.basis_a),
        "basis_b": complex_to_json(rep.basis_b),
        "gauge_descriptor": _descriptor_to_json(descriptor),
        "free_parameter_count": descriptor.free_parameter_count,
    }


def representation_from_json(obj: dict) -> Representation:
    """Rebuild a representation from report data (inverse of :func:`representation_to_json`)."""
    try:
        dims = BipartiteDims(obj["m"], obj["n"])
        basis_a = complex_from_json(obj["basis_a"], (dims.m, dims.m))
        basis_b = complex_from_json(obj["basis_b"], (dims.n, dims.n))
        items = []
        for it in obj["items"]:
            k = it["schmidt_rank"]
            x = complex_from_json(it["x"], (dims.m, k))
            y = complex_from_json(it["y"], (dims.n, k))
            mu = np.array(it["schmidt_coefficients"], dtype=float)
            s = SchmidtDecomposition(mu, basis_a @ x, basis_b @ y, tuple(tuple(b) for b in it["schmidt_blocks"]))
            items.append(RepresentationItem(float(it["eigenvalue"]), s, x, y))
        blocks = tuple(tuple(b) for b in obj["eigenvalue_blocks"])
        return Representation(
            dims, tuple(items), basis_a, basis_b, blocks, bool(obj["degenerate_anchor"]), bool(obj["gauge_fixed"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"bad representation report: {exc}") from exc


def report_reconstruction_error(report: dict, rho: DensityMatrix) -> float:
    """Frobenius distance between rho and the state rebuilt from a report."""
    rebuilt = reconstruct(representation_from_json(json.loads(dumps(report))))
    return float(np.linalg.norm(rebuilt.mat - rho.mat))
