"""Input-constraint model: parameter specs plus relational conditions.

A schema lists typed parameters (ranges, length bounds, charsets, element
specs) and boolean relations among them written in a small Python-subset
grammar: numeric literals, parameter references, ``len(param)``, arithmetic
``+ - * / %``, comparisons, and ``and``. Disjunction and negation are out of
the v1 grammar on purpose; rejection sampling stays simple that way.
"""

from __future__ import annotations

import ast
import string
from dataclasses import dataclass, field

from .errors import SchemaError

KINDS = ("int", "float", "bool", "string", "list", "tuple")
SIZED_KINDS = ("string", "list", "tuple")

MODE_ARGUMENT_VECTOR = "argument_vector"
MODE_TEXT_STREAM = "text_stream"

CHARSET_CLASSES = {
    "lowercase": string.ascii_lowercase,
    "uppercase": string.ascii_uppercase,
    "letters": string.ascii_letters,
    "digits": string.digits,
    "alphanumeric": string.ascii_letters + string.digits,
    "printable": string.ascii_letters + string.digits + string.punctuation + " ",
}


def resolve_charset(charset: str) -> str:
    """Named class or literal character set; single-char classes are literal."""
    return CHARSET_CLASSES.get(charset, charset)


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    bounds: tuple[float, float] | None = None       # int/float only
    length: tuple[int, int] | None = None           # string/list/tuple only
    element: "ParamSpec | None" = None              # list/tuple only
    charset: str | None = None                      # string only

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"unknown kind {self.kind!r} for parameter {self.name!r}")
        if self.bounds is not None:
            if self.kind not in ("int", "float"):
                raise SchemaError(f"bounds not allowed for kind {self.kind!r}")
            lo, hi = self.bounds
            if lo > hi:
                raise SchemaError(f"bounds for {self.name!r} must satisfy lo <= hi")
        if self.length is not None:
            if self.kind not in SIZED_KINDS:
                raise SchemaError(f"length bounds not allowed for kind {self.kind!r}")
            mn, mx = self.length
            if not (0 <= mn <= mx):
                raise SchemaError(f"length bounds for {self.name!r} must satisfy 0 <= min <= max")
        if (self.element is not None) != (self.kind in ("list", "tuple")):
            raise SchemaError(
                f"element spec must be present iff kind is list or tuple ({self.name!r})")
        if self.charset is not None and self.kind != "string":
            raise SchemaError(f"charset not allowed for kind {self.kind!r}")


_CMP_OPS = {
    ast.Lt: lambda a, b: a < b,
    ast.LtE: lambda a, b: a <= b,
    ast.Eq: lambda a, b: a == b,
    ast.NotEq: lambda a, b: a != b,
    ast.GtE: lambda a, b: a >= b,
    ast.Gt: lambda a, b: a > b,
}

_BIN_OPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Mod: lambda a, b: a % b,
}


@dataclass(frozen=True)
class RelationExpr:
    """One validated boolean condition over the schema's parameters."""

    text: str
    _tree: ast.Expression = field(repr=False, compare=False)
    names: frozenset[str] = frozenset()

    def evaluate(self, binding: dict[str, object]) -> bool:
        return bool(_eval_node(self._tree.body, binding))


def _eval_node(node: ast.AST, binding: dict[str, object]):
    if isinstance(node, ast.BoolOp):
        return all(_eval_node(v, binding) for v in node.values)
    if isinstance(node, ast.Compare):
        left = _eval_node(node.left, binding)
        for op, comparator in zip(node.ops, node.comparators):
            right = _eval_node(comparator, binding)
            if not _CMP_OPS[type(op)](left, right):
                return False
            left = right
        return True
    if isinstance(node, ast.BinOp):
        return _BIN_OPS[type(node.op)](_eval_node(node.left, binding),
                                       _eval_node(node.right, binding))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_eval_node(node.operand, binding)
    if isinstance(node, ast.Call):
        return len(binding[node.args[0].id])  # validated: len(param) only
    if isinstance(node, ast.Name):
        return binding[node.id]
    if isinstance(node, ast.Constant):
        return node.value
    raise AssertionError(f"unvalidated node {node!r}")


class _RelationValidator:
    """Walks a parsed relation, checking grammar, names and static types."""

    def __init__(self, text: str, params: dict[str, ParamSpec]):
        self.text = text
        self.params = params
        self.names: set[str] = set()

    def fail(self, why: str) -> SchemaError:
        return SchemaError(f"relation {self.text!r}: {why}")

    def check_bool(self, node: ast.AST) -> None:
        if isinstance(node, ast.BoolOp):
            if not isinstance(node.op, ast.And):
                raise self.fail("only 'and' is allowed between conditions")
            for value in node.values:
                self.check_bool(value)
            return
        if isinstance(node, ast.Compare):
            for op in node.ops:
                if type(op) not in _CMP_OPS:
                    raise self.fail(f"comparison {type(op).__name__} not allowed")
            self.check_numeric(node.left)
            for comparator in node.comparators:
                self.check_numeric(comparator)
            return
        raise self.fail("must be a comparison or a conjunction of comparisons")

    def check_numeric(self, node: ast.AST) -> str:
        """Returns the inferred static type, 'int' or 'float'."""
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise self.fail("only integer and float literals are allowed")
            return "float" if isinstance(node.value, float) else "int"
        if isinstance(node, ast.Name):
            spec = self.params.get(node.id)
            if spec is None:
                raise self.fail(f"unresolved name {node.id!r}")
            self.names.add(node.id)
            if spec.kind not in ("int", "float"):
                raise self.fail(
                    f"parameter {node.id!r} of kind {spec.kind!r} may appear only inside len()")
            return spec.kind
        if isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id == "len"):
                raise self.fail("only the len() function is allowed")
            if len(node.args) != 1 or node.keywords or not isinstance(node.args[0], ast.Name):
                raise self.fail("len() takes exactly one parameter name")
            target = node.args[0].id
            spec = self.params.get(target)
            if spec is None:
                raise self.fail(f"unresolved name {target!r}")
            if spec.kind not in SIZED_KINDS:
                raise self.fail(f"len() needs a sized parameter, got kind {spec.kind!r}")
            self.names.add(target)
            return "int"
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return self.check_numeric(node.operand)
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BIN_OPS:
                raise self.fail(f"operator {type(node.op).__name__} not allowed")
            left = self.check_numeric(node.left)
            right = self.check_numeric(node.right)
            if isinstance(node.op, ast.Div):
                return "float"  # division is real-valued
            if isinstance(node.op, ast.Mod) and "float" in (left, right):
                raise self.fail("mod is integer-only")
            return "float" if "float" in (left, right) else "int"
        raise self.fail(f"construct {type(node).__name__} not allowed")


def parse_relation(text: str, params: dict[str, ParamSpec]) -> RelationExpr:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise SchemaError(f"relation {text!r}: malformed expression ({exc.msg})") from exc
    validator = _RelationValidator(text, params)
    validator.check_bool(tree.body)
    return RelationExpr(text=text, _tree=tree, names=frozenset(validator.names))


@dataclass(frozen=True)
class InputSchema:
    params: tuple[ParamSpec, ...]
    relations: tuple[RelationExpr, ...] = ()
    mode: str = MODE_ARGUMENT_VECTOR

    def __post_init__(self) -> None:
        if self.mode not in (MODE_ARGUMENT_VECTOR, MODE_TEXT_STREAM):
            raise SchemaError(f"unknown mode {self.mode!r}")
        seen: set[str] = set()
        for spec in self.params:
            if spec.name in seen:
                raise SchemaError(f"duplicate parameter name {spec.name!r}")
            seen.add(spec.name)
        _check_definitional_cycles(self.relations)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)


def _check_definitional_cycles(relations: tuple[RelationExpr, ...]) -> None:
    """Reject cycles among relations of the shape ``name == expr(others)``."""
    deps: dict[str, set[str]] = {}
    for rel in relations:
        node = rel._tree.body
        if not (isinstance(node, ast.Compare) and len(node.ops) == 1
                and isinstance(node.ops[0], ast.Eq)):
            continue
        left, right = node.left, node.comparators[0]
        if isinstance(left, ast.Name) and isinstance(right, ast.Name):
            continue  # symmetric x == y, not definitional
        for bare, other in ((left, right), (right, left)):
            if isinstance(bare, ast.Name):
                used = {n.id for n in ast.walk(other) if isinstance(n, ast.Name)}
                used.discard("len")
                deps.setdefault(bare.id, set()).update(used)

    visiting: set[str] = set()
    done: set[str] = set()

    def visit(name: str) -> None:
        if name in done:
            return
        if name in visiting:
            raise SchemaError(f"definitional cycle through parameter {name!r}")
        visiting.add(name)
        for dep in deps.get(name, ()):
            visit(dep)
        visiting.discard(name)
        done.add(name)

    for name in deps:
        visit(name)


def _parse_pair(raw: object, what: str, name: str) -> tuple:
    if (not isinstance(raw, (list, tuple)) or len(raw) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw)):
        raise SchemaError(f"{what} for {name!r} must be a two-element numeric pair")
    return tuple(raw)


def parse_param(obj: dict, path: str = "") -> ParamSpec:
    if not isinstance(obj, dict):
        raise SchemaError(f"parameter spec must be an object, got {type(obj).__name__}")
    name = obj.get("name", path)
    if not isinstance(name, str) or not name:
        raise SchemaError("parameter name must be a non-empty string")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"unknown kind {kind!r} for parameter {name!r}")
    bounds = obj.get("bounds")
    if bounds is not None:
        bounds = _parse_pair(bounds, "bounds", name)
        if kind == "int":
            if not all(isinstance(x, int) for x in bounds):
                raise SchemaError(f"int bounds for {name!r} must be integers")
    length = obj.get("length")
    if length is not None:
        length = _parse_pair(length, "length bounds", name)
        if not all(isinstance(x, int) for x in length):
            raise SchemaError(f"length bounds for {name!r} must be integers")
    element = None
    if "element" in obj and obj["element"] is not None:
        element = parse_param(obj["element"], path=f"{name}[]")
    charset = obj.get("charset")
    if charset is not None:
        if not isinstance(charset, str) or not resolve_charset(charset):
            raise SchemaError(f"charset for {name!r} must be a non-empty string")
    return ParamSpec(name=name, kind=kind, bounds=bounds, length=length,
                     element=element, charset=charset)


def parse_schema(obj: dict, default_mode: str = MODE_ARGUMENT_VECTOR) -> InputSchema:
    """Build a validated InputSchema from its structured (already-parsed) form."""
    if not isinstance(obj, dict):
        raise SchemaError(f"schema must be an object, got {type(obj).__name__}")
    raw_params = obj.get("params")
    if not isinstance(raw_params, list):
        raise SchemaError("schema must carry a 'params' list")
    params = tuple(parse_param(p) for p in raw_params)
    table = {p.name: p for p in params}
    raw_relations = obj.get("relations", [])
    if not isinstance(raw_relations, list) or not all(isinstance(r, str) for r in raw_relations):
        raise SchemaError("'relations' must be a list of strings")
    relations = tuple(parse_relation(r, table) for r in raw_relations)
    mode = obj.get("mode", default_mode)
    return InputSchema(params=params, relations=relations, mode=mode)


def schema_to_object(schema: InputSchema) -> dict:
    """Inverse of parse_schema, for corpus round-trips."""

    def param_obj(spec: ParamSpec) -> dict:
        out: dict = {"name": spec.name, "kind": spec.kind}
        if spec.bounds is not None:
            out["bounds"] = list(spec.bounds)
        if spec.length is not None:
            out["length"] = list(spec.length)
        if spec.element is not None:
            elem = param_obj(spec.element)
            elem.pop("name", None)
            out["element"] = elem
        if spec.charset is not None:
            out["charset"] = spec.charset
        return out

    return {
        "params": [param_obj(p) for p in schema.params],
        "relations": [r.text for r in schema.relations],
        "mode": schema.mode,
    }


def _value_matches(value: object, spec: ParamSpec) -> bool:
    if spec.kind == "bool":
        return isinstance(value, bool)
    if spec.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            return False
        return spec.bounds is None or spec.bounds[0] <= value <= spec.bounds[1]
    if spec.kind == "float":
        if not isinstance(value, float):
            return False
        return spec.bounds is None or spec.bounds[0] <= value <= spec.bounds[1]
    if spec.kind == "string":
        if not isinstance(value, str):
            return False
        if spec.length is not None and not spec.length[0] <= len(value) <= spec.length[1]:
            return False
        if spec.charset is not None:
            allowed = set(resolve_charset(spec.charset))
            return all(c in allowed for c in value)
        return True
    # list / tuple
    if spec.kind == "list" and not isinstance(value, list):
        return False
    if spec.kind == "tuple" and not isinstance(value, tuple):
        return False
    if spec.length is not None and not spec.length[0] <= len(value) <= spec.length[1]:
        return False
    assert spec.element is not None
    return all(_value_matches(v, spec.element) for v in value)


def satisfies(schema: InputSchema, candidate) -> bool:
    """True iff the value vector matches every param spec and every relation."""
    values = list(candidate)
    if len(values) != len(schema.params):
        raise ValueError(
            f"arity mismatch: schema has {len(schema.params)} parameters, got {len(values)}")
    for value, spec in zip(values, schema.params):
        if not _value_matches(value, spec):
            return False
    binding = dict(zip(schema.param_names, values))
    try:
        return all(rel.evaluate(binding) for rel in schema.relations)
    except ZeroDivisionError:
        return False
