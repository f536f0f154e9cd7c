"""Parsing of angles, gate expressions and named states used in scenarios.

Angles accept arithmetic over numbers and ``pi`` (``"pi/4"``,
``"-3*pi/8"``, ``"0.25"``). A gate expression is a name (``I X Y Z H S T``),
``RZ(angle)`` / ``RX(angle)``, a matrix literal of ``[re, im]`` pairs, or an
ordered list of these multiplied in written order. Strings may also join
factors with ``*``.
"""

from __future__ import annotations

import ast
import json
import math
import operator
import re

import numpy as np

from . import qmath


class ExpressionError(ValueError):
    pass


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval(node) -> float:
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id.lower() == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval(node.operand))
    raise ExpressionError(f"unsupported angle syntax: {ast.dump(node)}")


def parse_angle(value) -> float:
    if isinstance(value, bool):
        raise ExpressionError("angle cannot be a boolean")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        text = value.strip().replace("π", "pi")
        # "2pi/3" -> "2*pi/3"
        text = re.sub(r"(\d)\s*(pi)", r"\1*\2", text, flags=re.IGNORECASE)
        try:
            out = _eval(ast.parse(text, mode="eval"))
        except (SyntaxError, ZeroDivisionError) as exc:
            raise ExpressionError(f"cannot parse angle {value!r}") from exc
    else:
        raise ExpressionError(f"cannot parse angle {value!r}")
    if not math.isfinite(out):
        raise ExpressionError(f"angle {value!r} is not finite")
    return out


def parse_angles(value) -> tuple[float, ...]:
    """A list of angles, or a comma-separated string (empty string for none)."""
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
        return tuple(parse_angle(p) for p in parts)
    if isinstance(value, (list, tuple)):
        return tuple(parse_angle(v) for v in value)
    raise ExpressionError(f"cannot parse angle list {value!r}")


_NAMED_GATES = {
    "I": qmath.I2,
    "X": qmath.X,
    "Y": qmath.Y,
    "Z": qmath.Z,
    "H": qmath.H,
    "S": qmath.S,
    "T": qmath.T,
}
_ROTATION = re.compile(r"^(RZ|RX)\s*\((.*)\)$", re.IGNORECASE)


def _split_product(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "*·" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _is_number_like(v) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, (int, float)):
        return True
    return isinstance(v, list) and len(v) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in v
    )


def _is_matrix_literal(v) -> bool:
    return (
        isinstance(v, list)
        and len(v) > 0
        and all(isinstance(row, list) and row and all(_is_number_like(e) for e in row) for row in v)
    )


def _single_gate(text: str) -> np.ndarray:
    name = text.strip()
    if name.upper() in _NAMED_GATES:
        return _NAMED_GATES[name.upper()].copy()
    m = _ROTATION.match(name)
    if m:
        theta = parse_angle(m.group(2))
        return qmath.rz(theta) if m.group(1).upper() == "RZ" else qmath.rx(theta)
    raise ExpressionError(f"unknown gate {text!r}")


def _maybe_json(value):
    if isinstance(value, str) and value.lstrip().startswith("["):
        try:
            return json.loads(value)
        except json.JSONDecodeError as exc:
            raise ExpressionError(f"bad JSON literal {value!r}") from exc
    return value


def parse_gate(value) -> np.ndarray:
    """Evaluate a gate expression to a matrix (not checked for unitarity)."""
    value = _maybe_json(value)
    if _is_matrix_literal(value):
        try:
            return qmath.matrix_from_json(value)
        except ValueError as exc:
            raise ExpressionError(str(exc)) from exc
    if isinstance(value, str):
        factors = _split_product(value)
        if any(not f for f in factors):
            raise ExpressionError(f"empty factor in gate expression {value!r}")
        mats = [_single_gate(f) for f in factors]
    elif isinstance(value, list) and value:
        mats = [parse_gate(v) for v in value]
    else:
        raise ExpressionError(f"cannot parse gate expression {value!r}")
    out = mats[0]
    for m in mats[1:]:
        if m.shape != out.shape:
            raise ExpressionError("gate factors have mismatched dimensions")
        out = out @ m
    return out


def parse_unitary(value) -> np.ndarray:
    u = parse_gate(value)
    if not qmath.is_unitary(u):
        raise ExpressionError(f"gate expression {value!r} is not unitary")
    return u


_NAMED_KETS = {
    "0": qmath.KET_0,
    "1": qmath.KET_1,
    "+": qmath.KET_PLUS,
    "-": qmath.KET_MINUS,
    "+i": np.array([1, 1j], dtype=np.complex128) / np.sqrt(2),
    "-i": np.array([1, -1j], dtype=np.complex128) / np.sqrt(2),
}
_KET_FORM = re.compile(r"^\|([^<>|]+)>(?:<\1\|)?$")


def parse_state(value) -> np.ndarray:
    """Density matrix from a name (``"+"``, ``"|0>"``, ``"|0><0|"``) or matrix literal."""
    value = _maybe_json(value)
    if isinstance(value, str):
        key = value.strip()
        m = _KET_FORM.match(key)
        if m:
            key = m.group(1).strip()
        if key not in _NAMED_KETS:
            raise ExpressionError(f"unknown state {value!r}")
        return qmath.projector(_NAMED_KETS[key])
    if _is_matrix_literal(value):
        rho = qmath.matrix_from_json(value)
        if not qmath.is_density(rho):
            raise ExpressionError("state literal is not a density matrix")
        return rho
    raise ExpressionError(f"cannot parse state {value!r}")


def format_angle(theta: float) -> str:
    """Render an angle as a multiple of pi when it is a simple fraction."""
    for den in (1, 2, 3, 4, 6, 8, 12, 16):
        num = theta * den / math.pi
        if abs(num - round(num)) < 1e-12:
            k = int(round(num))
            if k == 0:
                return "0"
            head = "pi" if abs(k) == 1 else f"{abs(k)}*pi"
            sign = "-" if k < 0 else ""
            return f"{sign}{head}" if den == 1 else f"{sign}{head}/{den}"
    return repr(theta)
