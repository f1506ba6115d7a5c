"""LP and MPS emission, an LP reader for emitted files, and the solution-pool text format.

Solution pools hold one solution per line as whitespace-separated ``name=value`` pairs;
``#`` starts a comment. Variables absent from a solution read as 0.
"""

import io
import json
import math
import re
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

from pydantic import ValidationError

from archsearch_mip.exceptions import LpParseError, ModelBuildError, SolutionParseError
from archsearch_mip.mip.model import Domain, LinearConstraint, LinExpr, MipModel, MipVariable, ModelMetadata, QuadraticConstraint

LP_HEADER = "\\ archsearch-mip model"
METADATA_PREFIX = "\\ metadata "
_LINE_WIDTH = 200
_NAMES_PER_LINE = 10

Format = Literal["lp", "mps"]


def _num(value: float) -> str:
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _terms(linear: Iterable[Tuple[str, float]]) -> List[str]:
    tokens: List[str] = []
    for name, coef in linear:
        sign = "-" if coef < 0 else "+"
        tokens.append(f"{sign} {_num(abs(coef))} {name}")
    return tokens


def _quad_terms(quadratic: Sequence[Tuple[str, str, float]]) -> List[str]:
    parts: List[str] = []
    for a, b, coef in quadratic:
        sign = "-" if coef < 0 else "+"
        product = f"{a} ^ 2" if a == b else f"{a} * {b}"
        parts.append(f"{sign} {_num(abs(coef))} {product}")
    if not parts:
        return []
    parts[0] = "[ " + parts[0]
    parts[-1] = parts[-1] + " ]"
    return parts


def _wrap(head: str, tokens: List[str], tail: str, out: io.StringIO) -> None:
    line = head
    for token in tokens + ([tail] if tail else []):
        if len(line) + 1 + len(token) > _LINE_WIDTH and line.strip():
            out.write(line + "\n")
            line = "    " + token
        else:
            line = f"{line} {token}" if line else token
    out.write(line + "\n")


def _linear_tokens(terms: Sequence[Tuple[str, float]], fallback: str) -> List[str]:
    tokens = _terms(terms)
    if not tokens:
        # a row needs at least one term
        return [f"+ 0 {fallback}"]
    return tokens


def _emit_lp(model: MipModel) -> str:
    if not model.variables:
        raise ModelBuildError("cannot emit a model without variables")
    out = io.StringIO()
    first = next(iter(model.variables))
    out.write(LP_HEADER + "\n")
    out.write(METADATA_PREFIX + model.metadata.model_dump_json() + "\n")
    out.write("Minimize\n" if model.objective_sense == "minimize" else "Maximize\n")
    objective = _linear_tokens(list(model.objective.terms.items()), first)
    if model.objective.constant:
        objective.append(("- " if model.objective.constant < 0 else "+ ") + _num(abs(model.objective.constant)))
    _wrap(" obj:", objective, "", out)
    out.write("Subject To\n")
    for c in model.constraints:
        _wrap(f" {c.name}:", _linear_tokens(c.terms, first), f"{c.sense} {_num(c.rhs)}", out)
    for q in model.quadratic_constraints:
        tokens = _terms(q.linear) + _quad_terms(q.quadratic)
        _wrap(f" {q.name}:", tokens or [f"+ 0 {first}"], f"{q.sense} {_num(q.rhs)}", out)
    out.write("Bounds\n")
    for variable in model.variables.values():
        if math.isinf(variable.lower) and math.isinf(variable.upper):
            out.write(f" {variable.name} free\n")
        else:
            out.write(f" {_num(variable.lower)} <= {variable.name} <= {_num(variable.upper)}\n")
    for section, domain in (("Binaries", "binary"), ("Generals", "integer")):
        names = [v.name for v in model.variables.values() if v.domain == domain]
        if names:
            out.write(section + "\n")
            for start in range(0, len(names), _NAMES_PER_LINE):
                out.write(" " + " ".join(names[start : start + _NAMES_PER_LINE]) + "\n")
    out.write("End\n")
    return out.getvalue()


_ROW_TYPE = {"<=": "L", ">=": "G", "=": "E"}


def _emit_mps(model: MipModel) -> str:
    out = io.StringIO()
    title = re.sub(r"\s+", "_", model.metadata.name)
    out.write(f"NAME {title}\n")
    out.write("OBJSENSE\n    " + ("MIN" if model.objective_sense == "minimize" else "MAX") + "\n")
    out.write("ROWS\n N  obj\n")
    rows: List[Tuple[str, str, float, Sequence[Tuple[str, float]]]] = [(c.name, c.sense, c.rhs, c.terms) for c in model.constraints]
    rows += [(q.name, q.sense, q.rhs, q.linear) for q in model.quadratic_constraints]
    for name, sense, _, _ in rows:
        out.write(f" {_ROW_TYPE[sense]}  {name}\n")

    entries: Dict[str, List[Tuple[str, float]]] = {name: [] for name in model.variables}
    for name, coef in model.objective.terms.items():
        entries[name].append(("obj", coef))
    for row, _, _, terms in rows:
        for name, coef in terms:
            entries[name].append((row, coef))
    out.write("COLUMNS\n")
    marker = 0
    in_integer = False
    for variable in model.variables.values():
        integer = variable.domain != "continuous"
        if integer != in_integer:
            kind = "'INTORG'" if integer else "'INTEND'"
            out.write(f"    MARKER{marker} 'MARKER' {kind}\n")
            marker += 1
            in_integer = integer
        column = entries[variable.name] or [("obj", 0.0)]
        for row, coef in column:
            out.write(f"    {variable.name} {row} {_num(coef)}\n")
    if in_integer:
        out.write(f"    MARKER{marker} 'MARKER' 'INTEND'\n")
    out.write("RHS\n")
    for name, _, rhs, _ in rows:
        if rhs != 0:
            out.write(f"    RHS {name} {_num(rhs)}\n")
    if model.objective.constant:
        out.write(f"    RHS obj {_num(-model.objective.constant)}\n")
    out.write("BOUNDS\n")
    for variable in model.variables.values():
        name = variable.name
        if variable.domain == "binary":
            out.write(f" BV BND {name}\n")
        elif math.isinf(variable.lower) and math.isinf(variable.upper):
            out.write(f" FR BND {name}\n")
        else:
            out.write(f" MI BND {name}\n" if math.isinf(variable.lower) else f" LO BND {name} {_num(variable.lower)}\n")
            out.write(f" PL BND {name}\n" if math.isinf(variable.upper) else f" UP BND {name} {_num(variable.upper)}\n")
    for q in model.quadratic_constraints:
        out.write(f"QCMATRIX {q.name}\n")
        for a, b, coef in q.quadratic:
            if a == b:
                out.write(f"    {a} {b} {_num(coef)}\n")
            else:
                # the matrix is written in full, each off-diagonal product split over both triangles
                out.write(f"    {a} {b} {_num(coef / 2)}\n")
                out.write(f"    {b} {a} {_num(coef / 2)}\n")
    out.write("ENDATA\n")
    return out.getvalue()


def emit(model: MipModel, fmt: Format = "lp") -> bytes:
    """Deterministic solver file for ``model``; identical models give identical bytes."""
    if fmt == "lp":
        return _emit_lp(model).encode("ascii")
    if fmt == "mps":
        return _emit_mps(model).encode("ascii")
    raise ModelBuildError(f"unknown model format {fmt!r}")


_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$|^[+-]?inf$")
_SECTIONS = {"minimize", "maximize", "subject to", "bounds", "binaries", "generals", "end"}


def _is_number(token: str) -> bool:
    return bool(_NUMBER.match(token))


def _parse_expression(tokens: List[str], line: int) -> Tuple[List[Tuple[str, float]], List[Tuple[str, str, float]], float]:
    linear: List[Tuple[str, float]] = []
    quadratic: List[Tuple[str, str, float]] = []
    constant = 0.0
    sign = 1.0
    coef: Optional[float] = None
    inside = False
    i = 0
    while i < len(tokens):
        token = tokens[i]
        i += 1
        if token in ("+", "-"):
            sign = -1.0 if token == "-" else 1.0
        elif token == "[":
            inside = True
        elif token == "]":
            inside = False
        elif _is_number(token):
            if coef is not None:
                raise LpParseError(f"two numbers in a row near {token!r}", line)
            coef = float(token)
        else:
            value = sign * (1.0 if coef is None else coef)
            if inside:
                if tokens[i : i + 2] == ["^", "2"]:
                    quadratic.append((token, token, value))
                    i += 2
                elif i + 1 < len(tokens) and tokens[i] == "*":
                    quadratic.append((token, tokens[i + 1], value))
                    i += 2
                else:
                    raise LpParseError(f"malformed quadratic term at {token!r}", line)
            else:
                linear.append((token, value))
            sign, coef = 1.0, None
    if coef is not None:
        constant += sign * coef
    return linear, quadratic, constant


def _split_kind(name: str) -> Tuple[str, Tuple[int, ...]]:
    parts = name.split("_")
    index: List[int] = []
    while len(parts) > 1 and parts[-1].isdigit():
        index.insert(0, int(parts.pop()))
    return "_".join(parts), tuple(index)


def _statements(lines: List[Tuple[int, str]]) -> List[Tuple[int, str]]:
    """Join continuation lines (indented by four spaces) onto their statement."""
    joined: List[Tuple[int, str]] = []
    for number, text in lines:
        if text.startswith("    ") and joined:
            start, previous = joined[-1]
            joined[-1] = (start, previous + " " + text.strip())
        else:
            joined.append((number, text.strip()))
    return joined


def read_lp(text: str) -> MipModel:
    """Read an LP file written by :func:`emit` back into a model."""
    raw = text.splitlines()
    if not raw or raw[0] != LP_HEADER:
        raise LpParseError("missing archsearch-mip header", 1)
    if len(raw) < 2 or not raw[1].startswith(METADATA_PREFIX):
        raise LpParseError("missing metadata line", 2)
    try:
        metadata = ModelMetadata.model_validate(json.loads(raw[1][len(METADATA_PREFIX) :]))
    except (ValueError, ValidationError) as exc:
        raise LpParseError(f"unreadable metadata: {exc}", 2) from exc

    sections: Dict[str, List[Tuple[int, str]]] = {}
    objective_sense: Literal["minimize", "maximize"] = "minimize"
    current: Optional[str] = None
    for number, line in enumerate(raw[2:], start=3):
        key = line.strip().lower()
        if not key or key.startswith("\\"):
            continue
        if key in _SECTIONS:
            current = key
            if key in ("minimize", "maximize"):
                objective_sense = key  # type: ignore[assignment]
                current = "objective"
            sections.setdefault(current, [])
            continue
        if current is None:
            raise LpParseError(f"content before the first section: {line!r}", number)
        sections[current].append((number, line))
    if "end" not in sections:
        raise LpParseError("missing End")

    binaries = {name for _, line in sections.get("binaries", []) for name in line.split()}
    generals = {name for _, line in sections.get("generals", []) for name in line.split()}
    model = MipModel(metadata=metadata)
    for number, line in sections.get("bounds", []):
        parts = line.split()
        if len(parts) == 2 and parts[1] == "free":
            name, lower, upper = parts[0], -math.inf, math.inf
        elif len(parts) == 5 and parts[1] == "<=" and parts[3] == "<=":
            name, lower, upper = parts[2], float(parts[0]), float(parts[4])
        else:
            raise LpParseError(f"unsupported bound {line.strip()!r}", number)
        domain: Domain = "binary" if name in binaries else "integer" if name in generals else "continuous"
        kind, index = _split_kind(name)
        if name in model.variables:
            raise LpParseError(f"variable {name} bounded twice", number)
        model.variables[name] = MipVariable(name=name, kind=kind, index=index, domain=domain, lower=lower, upper=upper)

    for number, statement in _statements(sections.get("objective", [])):
        head, _, body = statement.partition(":")
        linear, _, constant = _parse_expression(_tokenize(body), number)
        model.objective = LinExpr(dict(linear), constant)
        model.objective_sense = objective_sense

    for number, statement in _statements(sections.get("subject to", [])):
        name, colon, body = statement.partition(":")
        if not colon:
            raise LpParseError("unnamed constraint", number)
        match = re.search(r"(<=|>=|=)\s*(\S+)\s*$", body)
        if match is None:
            raise LpParseError(f"constraint {name} has no sense", number)
        sense = match.group(1)
        rhs = float(match.group(2))
        linear, quadratic, _ = _parse_expression(_tokenize(body[: match.start()]), number)
        for var, _ in linear:
            if var not in model.variables:
                raise LpParseError(f"constraint {name} references undeclared variable {var}", number)
        tag = name.split("_", 1)[0]
        if quadratic:
            model.quadratic_constraints.append(
                QuadraticConstraint(name=name, linear=tuple(linear), quadratic=tuple(quadratic), sense=sense, rhs=rhs, tag=tag)  # type: ignore[arg-type]
            )
        else:
            model.constraints.append(LinearConstraint(name=name, terms=tuple(linear), sense=sense, rhs=rhs, tag=tag))  # type: ignore[arg-type]
        model._names.add(name)
    model.version += 1
    return model


def _tokenize(body: str) -> List[str]:
    return re.sub(r"([\[\]^*])", r" \1 ", body).split()


def _value(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text}")
    return value


def _pairs(line: str, number: int) -> Dict[str, float]:
    values: Dict[str, float] = {}
    for pair in line.split():
        name, eq, text = pair.partition("=")
        if not eq or not name:
            raise SolutionParseError(f"line {number}: expected name=value, got {pair!r}")
        try:
            values[name] = _value(text)
        except ValueError as exc:
            raise SolutionParseError(f"line {number}: bad value for {name}: {text!r}") from exc
    return values


def read_solution_pool(text: str) -> List[Dict[str, float]]:
    """One solution per non-empty line."""
    solutions = []
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if content:
            solutions.append(_pairs(content, number))
    return solutions


def read_assignment(text: str) -> Dict[str, float]:
    """A single solution, possibly spread over several lines."""
    values: Dict[str, float] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if content:
            values.update(_pairs(content, number))
    return values


def format_assignment(assignment: Mapping[str, float], one_per_line: bool = True) -> str:
    pairs = [f"{name}={_num(value)}" for name, value in assignment.items()]
    return ("\n" if one_per_line else " ").join(pairs) + "\n"
