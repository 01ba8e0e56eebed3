"""Model file parsing and serialization.

Models are JSON documents with named parameters substituted into matrix
entries.  An entry is a real number, an arithmetic expression string
over the parameters, or a [re, im] pair of either.  Example::

    {
      "name": "qubit-weak",
      "dim": 2,
      "parameters": {"omega": 1.0, "gamma_z": 1.0},
      "hamiltonian": [["omega", 0], [0, "-omega"]],
      "jumps": [{"name": "Jz", "matrix": [["sqrt(gamma_z)", 0], [0, "-sqrt(gamma_z)"]]}],
      "symmetries": [{"name": "parity", "matrix": [[1, 0], [0, -1]]}],
      "sjeds": [[0], [1]],
      "expect": {"parity": {"condition_I": true, "condition_II": true,
                            "condition_III": true}}
    }
"""

from __future__ import annotations

import ast
import json
import math
import operator

import numpy as np

from .lindblad import Representation
from .models import Model


class ParseError(ValueError):
    pass


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {
    "sqrt": math.sqrt,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "atan2": math.atan2,
    "deg2rad": math.radians,
    "abs": abs,
}
_CONSTS = {"pi": math.pi, "e": math.e}


def eval_scalar(expr, parameters: dict) -> float:
    """Evaluate a real scalar: a number or a parameter expression string."""
    if isinstance(expr, (int, float)):
        return float(expr)
    if not isinstance(expr, str):
        raise ParseError(f"scalar entry must be number or string, got {expr!r}")

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, float)):
                return float(node.value)
            raise ParseError(f"invalid constant {node.value!r}")
        if isinstance(node, ast.Name):
            if node.id in parameters:
                return float(parameters[node.id])
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ParseError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ParseError(f"operator not allowed in {expr!r}")
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ParseError(f"operator not allowed in {expr!r}")
            return _UNARY[type(node.op)](walk(node.operand))
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ParseError(f"function not allowed in {expr!r}")
            return _FUNCS[node.func.id](*[walk(a) for a in node.args])
        raise ParseError(f"unsupported syntax in {expr!r}")

    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad expression {expr!r}: {exc}") from exc
    return walk(tree)


def eval_entry(entry, parameters: dict) -> complex:
    """Evaluate one matrix entry: scalar or [re, im] pair."""
    if isinstance(entry, list):
        if len(entry) != 2:
            raise ParseError(f"complex entry must be [re, im], got {entry!r}")
        return complex(eval_scalar(entry[0], parameters),
                       eval_scalar(entry[1], parameters))
    return complex(eval_scalar(entry, parameters), 0.0)


def eval_matrix(rows, parameters: dict, dim: int, what: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim:
        raise ParseError(f"{what}: expected {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ParseError(f"{what}: row {i} must have {dim} entries")
        for j, entry in enumerate(row):
            out[i, j] = eval_entry(entry, parameters)
    return out


def parse_model(doc) -> Model:
    """Build a Model from a parsed JSON document."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    try:
        dim = int(doc["dim"])
    except KeyError:
        raise ParseError("missing field 'dim'")
    parameters = dict(doc.get("parameters", {}))
    for k, v in parameters.items():
        if not isinstance(v, (int, float)):
            raise ParseError(f"parameter {k!r} must be a real number")
    if "hamiltonian" not in doc:
        raise ParseError("missing field 'hamiltonian'")
    h = eval_matrix(doc["hamiltonian"], parameters, dim, "hamiltonian")
    jumps = []
    labels = []
    for k, item in enumerate(doc.get("jumps", [])):
        if not isinstance(item, dict) or "matrix" not in item:
            raise ParseError(f"jump {k} must be an object with a 'matrix'")
        labels.append(str(item.get("name", f"J{k + 1}")))
        jumps.append(eval_matrix(item["matrix"], parameters, dim, f"jump {labels[-1]}"))
    symmetries = {}
    for k, item in enumerate(doc.get("symmetries", [])):
        if not isinstance(item, dict) or "matrix" not in item:
            raise ParseError(f"symmetry {k} must be an object with a 'matrix'")
        name = str(item.get("name", f"U{k + 1}"))
        symmetries[name] = eval_matrix(item["matrix"], parameters, dim,
                                       f"symmetry {name}")
    groups = None
    if "sjeds" in doc and doc["sjeds"] is not None:
        groups = tuple(tuple(int(i) for i in g) for g in doc["sjeds"])
    expect = {}
    for name, verdicts in doc.get("expect", {}).items():
        expect[name] = (bool(verdicts.get("condition_I")),
                        bool(verdicts.get("condition_II")),
                        bool(verdicts.get("condition_III")))
    try:
        rep = Representation(h, tuple(jumps), tuple(labels))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return Model(str(doc.get("name", "model")), rep, symmetries,
                 sjed_groups=groups, expect=expect,
                 description=str(doc.get("description", "")),
                 parameters=parameters)


def load_model(path) -> Model:
    with open(path) as fh:
        text = fh.read()
    return parse_model(text)


def _matrix_doc(m: np.ndarray):
    out = []
    for row in np.asarray(m, dtype=complex):
        out.append([[float(c.real), float(c.imag)] for c in row])
    return out


def model_to_doc(model: Model) -> dict:
    """Serialize a Model to a JSON-ready document (numeric entries)."""
    doc = {
        "name": model.name,
        "description": model.description,
        "dim": model.rep.dim,
        "parameters": {k: v for k, v in model.parameters.items()
                       if isinstance(v, (int, float)) and not isinstance(v, bool)},
        "hamiltonian": _matrix_doc(model.rep.hamiltonian),
        "jumps": [{"name": lbl, "matrix": _matrix_doc(j)}
                  for lbl, j in zip(model.rep.labels, model.rep.jumps)],
        "symmetries": [{"name": n, "matrix": _matrix_doc(u)}
                       for n, u in model.symmetries.items()],
    }
    if model.sjed_groups is not None:
        doc["sjeds"] = [list(g) for g in model.sjed_groups]
    if model.expect:
        doc["expect"] = {
            name: {"condition_I": v[0], "condition_II": v[1],
                   "condition_III": v[2]}
            for name, v in model.expect.items()
        }
    return doc


def dump_model(model: Model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_doc(model), fh, indent=2)
        fh.write("\n")


__all__ = ["ParseError", "dump_model", "eval_scalar", "load_model",
           "model_to_doc", "parse_model"]
