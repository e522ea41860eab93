"""Input-constraint model: parsing, validation, relation grammar, satisfies."""

import pytest

from difffuzz.errors import SchemaError
from difffuzz.schema import (
    MODE_ARGUMENT_VECTOR,
    MODE_TEXT_STREAM,
    InputSchema,
    ParamSpec,
    parse_relation,
    parse_schema,
    resolve_charset,
    satisfies,
    schema_to_object,
)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def schema_of(*params, relations=(), mode=MODE_ARGUMENT_VECTOR):
    table = {p.name: p for p in params}
    rels = tuple(parse_relation(r, table) for r in relations)
    return InputSchema(params=tuple(params), relations=rels, mode=mode)


INT_X = ParamSpec(name="x", kind="int", bounds=(-10, 10))
INT_Y = ParamSpec(name="y", kind="int", bounds=(-10, 10))
STR_S = ParamSpec(name="s", kind="string", length=(0, 5), charset="lowercase")
LIST_A = ParamSpec(name="a", kind="list", length=(0, 4),
                   element=ParamSpec(name="a[]", kind="int", bounds=(0, 9)))


class TestParamSpec:
    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaError):
            ParamSpec(name="x", kind="complex")

    def test_bounds_only_for_numbers(self):
        with pytest.raises(SchemaError):
            ParamSpec(name="s", kind="string", bounds=(0, 1))

    def test_inverted_bounds_rejected(self):
        with pytest.raises(SchemaError):
            ParamSpec(name="x", kind="int", bounds=(5, 1))

    def test_length_only_for_sized_kinds(self):
        with pytest.raises(SchemaError):
            ParamSpec(name="x", kind="int", length=(0, 3))

    def test_negative_length_rejected(self):
        with pytest.raises(SchemaError):
            ParamSpec(name="s", kind="string", length=(-1, 3))

    def test_list_requires_element_spec(self):
        with pytest.raises(SchemaError):
            ParamSpec(name="a", kind="list", length=(0, 3))

    def test_charset_only_for_strings(self):
        with pytest.raises(SchemaError):
            ParamSpec(name="x", kind="int", charset="digits")


class TestCharsets:
    def test_named_classes_resolve(self):
        assert resolve_charset("lowercase") == "abcdefghijklmnopqrstuvwxyz"
        assert resolve_charset("digits") == "0123456789"

    def test_literal_charset_passes_through(self):
        assert resolve_charset("abc!") == "abc!"


class TestRelationGrammar:
    def test_simple_comparison(self):
        rel = parse_relation("x < y", {"x": INT_X, "y": INT_Y})
        assert rel.evaluate({"x": 1, "y": 2})
        assert not rel.evaluate({"x": 2, "y": 2})

    def test_chained_comparison(self):
        rel = parse_relation("0 <= x <= y", {"x": INT_X, "y": INT_Y})
        assert rel.evaluate({"x": 0, "y": 0})
        assert not rel.evaluate({"x": 3, "y": 2})

    def test_len_over_sized_param(self):
        rel = parse_relation("len(s) > 2", {"s": STR_S})
        assert rel.evaluate({"s": "abc"})
        assert not rel.evaluate({"s": "ab"})

    def test_arithmetic(self):
        rel = parse_relation("x + y * 2 == 7", {"x": INT_X, "y": INT_Y})
        assert rel.evaluate({"x": 1, "y": 3})

    def test_mod_and_unary_minus(self):
        rel = parse_relation("x % 2 == -y", {"x": INT_X, "y": INT_Y})
        assert rel.evaluate({"x": 3, "y": -1})

    def test_conjunction(self):
        rel = parse_relation("x > 0 and y > 0", {"x": INT_X, "y": INT_Y})
        assert rel.evaluate({"x": 1, "y": 1})
        assert not rel.evaluate({"x": 1, "y": 0})

    def test_names_recorded(self):
        rel = parse_relation("len(a) == x", {"a": LIST_A, "x": INT_X})
        assert rel.names == frozenset({"a", "x"})

    @pytest.mark.parametrize("bad", [
        "x or y",                 # disjunction out of grammar
        "not x < 1",              # negation out of grammar
        "x < 'a'",                # string literal
        "abs(x) > 0",             # only len() is callable
        "len(x) > 0",             # len of unsized param
        "z > 0",                  # unresolved name
        "x ** 2 > 0",             # operator out of grammar
        "s > 'a'",                # sized param outside len()
        "x % 2.0 == 0",           # float mod
        "x +",                    # malformed
        "True",                   # bare literal, not a comparison
    ])
    def test_rejected_relation(self, bad):
        with pytest.raises(SchemaError):
            parse_relation(bad, {"x": INT_X, "y": INT_Y, "s": STR_S, "a": LIST_A})

    def test_division_is_real_valued(self):
        rel = parse_relation("x / y > 0.4", {"x": INT_X, "y": INT_Y})
        assert rel.evaluate({"x": 1, "y": 2})


class TestInputSchema:
    def test_duplicate_param_names_rejected(self):
        with pytest.raises(SchemaError):
            InputSchema(params=(INT_X, ParamSpec(name="x", kind="bool")))

    def test_unknown_mode_rejected(self):
        with pytest.raises(SchemaError):
            InputSchema(params=(INT_X,), mode="binary")

    def test_definitional_cycle_rejected(self):
        with pytest.raises(SchemaError):
            schema_of(INT_X, INT_Y, relations=("x == y + 1", "y == x + 1"))

    def test_symmetric_equality_is_not_a_cycle(self):
        schema = schema_of(INT_X, INT_Y, relations=("x == y",))
        assert satisfies(schema, (3, 3))

    def test_one_way_definition_is_fine(self):
        schema = schema_of(INT_X, INT_Y, relations=("y == x + 1",))
        assert satisfies(schema, (1, 2))
        assert not satisfies(schema, (1, 3))


class TestParseSchema:
    def test_round_trip(self):
        schema = schema_of(INT_X, STR_S, LIST_A,
                           relations=("x <= len(a)",), mode=MODE_ARGUMENT_VECTOR)
        assert parse_schema(schema_to_object(schema)) == schema

    def test_structured_form(self):
        obj = {
            "params": [
                {"name": "n", "kind": "int", "bounds": [0, 100]},
                {"name": "a", "kind": "list", "length": [0, 8],
                 "element": {"kind": "float", "bounds": [-1.0, 1.0]}},
            ],
            "relations": ["len(a) <= n"],
        }
        schema = parse_schema(obj)
        assert schema.param_names == ("n", "a")
        assert schema.params[1].element.kind == "float"
        assert schema.mode == MODE_ARGUMENT_VECTOR

    def test_default_mode_parameter(self):
        obj = {"params": [{"name": "x", "kind": "int"}]}
        assert parse_schema(obj, default_mode=MODE_TEXT_STREAM).mode == MODE_TEXT_STREAM

    @pytest.mark.parametrize("obj", [
        [],                                        # not an object
        {},                                        # params missing
        {"params": [{"name": "x", "kind": "int", "bounds": [0.5, 1]}]},  # float int-bounds
        {"params": [{"name": "x", "kind": "int"}], "relations": [3]},    # non-string relation
        {"params": [{"kind": "int"}]},             # nameless
    ])
    def test_malformed_rejected(self, obj):
        with pytest.raises(SchemaError):
            parse_schema(obj)


class TestSatisfies:
    def test_type_and_bounds(self):
        schema = schema_of(INT_X)
        assert satisfies(schema, (0,))
        assert not satisfies(schema, (11,))
        assert not satisfies(schema, (1.0,))
        assert not satisfies(schema, (True,))

    def test_string_charset_and_length(self):
        schema = schema_of(STR_S)
        assert satisfies(schema, ("abc",))
        assert not satisfies(schema, ("abcdef",))   # too long
        assert not satisfies(schema, ("aB",))       # outside charset

    def test_list_elements_checked(self):
        schema = schema_of(LIST_A)
        assert satisfies(schema, ([1, 2],))
        assert not satisfies(schema, ([1, 10],))
        assert not satisfies(schema, ((1, 2),))     # tuple is not list

    def test_relation_enforced(self):
        schema = schema_of(INT_X, INT_Y, relations=("x < y",))
        assert satisfies(schema, (1, 2))
        assert not satisfies(schema, (2, 1))

    def test_division_by_zero_in_relation_is_unsatisfied(self):
        schema = schema_of(INT_X, INT_Y, relations=("x / y > 0.1",))
        assert not satisfies(schema, (1, 0))

    def test_arity_mismatch_is_an_error(self):
        with pytest.raises(ValueError):
            satisfies(schema_of(INT_X), (1, 2))
