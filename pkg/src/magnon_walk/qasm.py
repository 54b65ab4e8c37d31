"""OpenQASM 2.0 emission and a parser for the subset we emit.

Only u1, ry, rz and cx are written. Angles use 12 significant digits
unless they are a simple rational multiple of pi, which is written
symbolically so it survives the round trip exactly.
"""
from __future__ import annotations

import ast
import math
import operator
import re
from fractions import Fraction

from .circuit import Circuit, Gate
from .errors import UnsupportedGateError, ValidationError

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def format_angle(theta: float) -> str:
    frac = Fraction(theta / math.pi).limit_denominator(64)
    if frac != 0 and abs(float(frac) * math.pi - theta) < 1e-15 * max(1.0, abs(theta)):
        num, den = frac.numerator, frac.denominator
        head = "pi" if num == 1 else "-pi" if num == -1 else f"{num}*pi"
        return head if den == 1 else f"{head}/{den}"
    return format(theta, ".12g")


def export_qasm(circuit: Circuit, measure: bool = True) -> str:
    """OpenQASM 2.0 text for ``circuit``.

    Measurements of every qubit are appended when ``measure`` is set and
    the circuit has at least one gate.
    """
    L = circuit.n_qubits
    lines = [HEADER.rstrip("\n"), f"qreg q[{L}];", f"creg c[{L}];"]
    for g in circuit.gates:
        if g.kind in ("u1", "ry", "rz"):
            lines.append(f"{g.kind}({format_angle(g.theta)}) q[{g.qubits[0]}];")
        elif g.kind == "cx":
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        else:
            raise UnsupportedGateError(f"gate kind {g.kind!r} has no OpenQASM 2.0 form here")
    if measure and circuit.gates:
        lines.extend(f"measure q[{i}] -> c[{i}];" for i in range(L))
    return "\n".join(lines) + "\n"


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_angle(expr: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValidationError(f"unsupported angle expression {expr!r}")

    try:
        return ev(ast.parse(expr.strip(), mode="eval"))
    except SyntaxError as exc:
        raise ValidationError(f"bad angle expression {expr!r}") from exc


_QREG = re.compile(r"qreg\s+(\w+)\[(\d+)\]$")
_ONE = re.compile(r"(u1|ry|rz)\((.+)\)\s+(\w+)\[(\d+)\]$")
_CX = re.compile(r"cx\s+(\w+)\[(\d+)\]\s*,\s*(\w+)\[(\d+)\]$")
_IGNORED = re.compile(r"(OPENQASM\s+2\.0|include\s+\"[^\"]*\"|creg\s+\w+\[\d+\]|measure\s+.*|barrier\s+.*)$")


def parse_qasm(text: str) -> Circuit:
    """Read OpenQASM 2.0 using a single qreg and the u1/ry/rz/cx gates."""
    n_qubits = None
    reg = None
    gates: list[Gate] = []
    body = re.sub(r"//[^\n]*", "", text)
    for stmt in (s.strip() for s in body.split(";")):
        if not stmt or _IGNORED.match(stmt):
            continue
        if m := _QREG.match(stmt):
            if reg is not None:
                raise ValidationError("only one qreg is supported")
            reg, n_qubits = m.group(1), int(m.group(2))
            continue
        if reg is None:
            raise ValidationError(f"gate before qreg declaration: {stmt!r}")
        if m := _ONE.match(stmt):
            kind, expr, r, q = m.groups()
            if r != reg:
                raise ValidationError(f"unknown register {r!r}")
            gates.append(Gate(kind, (int(q),), _eval_angle(expr)))
        elif m := _CX.match(stmt):
            r1, q1, r2, q2 = m.groups()
            if {r1, r2} != {reg}:
                raise ValidationError("unknown register in cx")
            gates.append(Gate("cx", (int(q1), int(q2))))
        else:
            raise UnsupportedGateError(f"unsupported statement {stmt!r}")
    if n_qubits is None:
        raise ValidationError("no qreg declaration")
    return Circuit(n_qubits, gates)
