"""Abstract syntax of the calculus: types, terms, values.

Values are syntactically separated from (effectful) terms, and computation
types are lifted objects over types.  Also here: free-variable collection,
capture-avoiding substitution, alpha-equivalence and the pretty printer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from . import circuit as crl
from . import trees
from .circuit import (
    BoxedCircuit,
    MType,
    MTensor,
    MUnit,
    MWire,
    WireType,
    canonicalize_boxed_vars,
    format_circuit,
)
from .trees import (
    Lifted,
    LiftedLeaf,
    LiftedNode,
    LiftingTree,
    Renaming,
    TreeLeaf,
    TreeNode,
    all_vars,
    map_leaves,
    rename_lifted,
)


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# ---------------------------------------------------------------------------
# Types


class PqkType:
    __slots__ = ()


@dataclass(frozen=True)
class UnitType(PqkType):
    __slots__ = ()

    def __str__(self) -> str:
        return "Unit"

    __repr__ = __str__


@dataclass(frozen=True)
class WireT(PqkType):
    wire: WireType

    def __str__(self) -> str:
        return str(self.wire)

    __repr__ = __str__


@dataclass(frozen=True)
class ArrowType(PqkType):
    dom: PqkType
    cod: Lifted  # of PqkType

    def __str__(self) -> str:
        return format_type(self)

    __repr__ = __str__


@dataclass(frozen=True)
class BangType(PqkType):
    inner: Lifted  # of PqkType

    def __str__(self) -> str:
        return format_type(self)

    __repr__ = __str__


@dataclass(frozen=True)
class CircType(PqkType):
    in_type: MType
    out: Lifted  # of MType

    @property
    def tree(self) -> LiftingTree:
        return self.out.tree()

    def __str__(self) -> str:
        return format_type(self)

    __repr__ = __str__


@dataclass(frozen=True)
class TensorType(PqkType):
    left: PqkType
    right: PqkType

    def __str__(self) -> str:
        return format_type(self)

    __repr__ = __str__


UNIT_TYPE = UnitType()
BIT_TYPE = WireT(crl.BIT)
QUBIT_TYPE = WireT(crl.QUBIT)


def embed_mtype(t: MType) -> PqkType:
    if isinstance(t, MUnit):
        return UNIT_TYPE
    if isinstance(t, MWire):
        return WireT(t.wire)
    assert isinstance(t, MTensor)
    return TensorType(embed_mtype(t.left), embed_mtype(t.right))


def as_mtype(a: PqkType) -> MType | None:
    """The M-type a denotes, or None when a is not an M-type."""
    if isinstance(a, UnitType):
        return crl.M_UNIT
    if isinstance(a, WireT):
        return MWire(a.wire)
    if isinstance(a, TensorType):
        left = as_mtype(a.left)
        right = as_mtype(a.right)
        if left is not None and right is not None:
            return MTensor(left, right)
    return None


def is_parameter(a: PqkType) -> bool:
    """Parameter types are freely duplicable and droppable."""
    if isinstance(a, (UnitType, BangType, CircType)):
        return True
    if isinstance(a, TensorType):
        return is_parameter(a.left) and is_parameter(a.right)
    return False


# ---------------------------------------------------------------------------
# Terms and values


class Value:
    __slots__ = ()


class Term:
    __slots__ = ()


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Unit(Value):
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Var(Value):
    name: str
    span: Span | None = _span_field()


@dataclass(frozen=True)
class LabelVal(Value):
    name: str
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Lam(Value):
    var: str
    ann: PqkType
    body: Term
    span: Span | None = _span_field()


@dataclass(frozen=True)
class LiftV(Value):
    body: Term
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Boxed(Value):
    boxed: BoxedCircuit
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Pair(Value):
    left: Value
    right: Value
    span: Span | None = _span_field()


@dataclass(frozen=True)
class App(Term):
    fn: Value
    arg: Value
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Let(Term):
    var: str
    bound: Term
    branches: Lifted  # of Term
    span: Span | None = _span_field()


@dataclass(frozen=True)
class LetPair(Term):
    var1: str
    var2: str
    value: Value
    body: Term
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Force(Term):
    value: Value
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Box(Term):
    mtype: MType
    value: Value
    var_hint: tuple[str, ...] = ()
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Apply(Term):
    vars: tuple[str, ...]
    boxed: Value
    arg: Value
    span: Span | None = _span_field()


@dataclass(frozen=True)
class Return(Term):
    value: Value
    span: Span | None = _span_field()


# ---------------------------------------------------------------------------
# Free names


def free_vars(x: Term | Value) -> frozenset[str]:
    if isinstance(x, (Unit, LabelVal, Boxed)):
        return frozenset()
    if isinstance(x, Var):
        return frozenset({x.name})
    if isinstance(x, Lam):
        return free_vars(x.body) - {x.var}
    if isinstance(x, LiftV):
        return free_vars(x.body)
    if isinstance(x, Pair):
        return free_vars(x.left) | free_vars(x.right)
    if isinstance(x, App):
        return free_vars(x.fn) | free_vars(x.arg)
    if isinstance(x, Let):
        branch_fv = frozenset().union(*(free_vars(m) for m in trees.leaves(x.branches)))
        return free_vars(x.bound) | (branch_fv - {x.var})
    if isinstance(x, LetPair):
        return free_vars(x.value) | (free_vars(x.body) - {x.var1, x.var2})
    if isinstance(x, Force):
        return free_vars(x.value)
    if isinstance(x, Box):
        return free_vars(x.value)
    if isinstance(x, Apply):
        return free_vars(x.boxed) | free_vars(x.arg)
    assert isinstance(x, Return)
    return free_vars(x.value)


def bound_vars(x: Term | Value) -> frozenset[str]:
    if isinstance(x, (Unit, Var, LabelVal, Boxed)):
        return frozenset()
    if isinstance(x, Lam):
        return frozenset({x.var}) | bound_vars(x.body)
    if isinstance(x, LiftV):
        return bound_vars(x.body)
    if isinstance(x, Pair):
        return bound_vars(x.left) | bound_vars(x.right)
    if isinstance(x, App):
        return bound_vars(x.fn) | bound_vars(x.arg)
    if isinstance(x, Let):
        inner = frozenset().union(*(bound_vars(m) for m in trees.leaves(x.branches)))
        return frozenset({x.var}) | bound_vars(x.bound) | inner
    if isinstance(x, LetPair):
        return frozenset({x.var1, x.var2}) | bound_vars(x.value) | bound_vars(x.body)
    if isinstance(x, Force):
        return bound_vars(x.value)
    if isinstance(x, Box):
        return bound_vars(x.value)
    if isinstance(x, Apply):
        return bound_vars(x.boxed) | bound_vars(x.arg)
    assert isinstance(x, Return)
    return bound_vars(x.value)


def free_labels(x: Term | Value) -> frozenset[str]:
    """Labels occurring free; boxed circuits are label-closed."""
    if isinstance(x, (Unit, Var, Boxed)):
        return frozenset()
    if isinstance(x, LabelVal):
        return frozenset({x.name})
    if isinstance(x, Lam):
        return free_labels(x.body)
    if isinstance(x, LiftV):
        return free_labels(x.body)
    if isinstance(x, Pair):
        return free_labels(x.left) | free_labels(x.right)
    if isinstance(x, App):
        return free_labels(x.fn) | free_labels(x.arg)
    if isinstance(x, Let):
        inner = frozenset().union(*(free_labels(m) for m in trees.leaves(x.branches)))
        return free_labels(x.bound) | inner
    if isinstance(x, LetPair):
        return free_labels(x.value) | free_labels(x.body)
    if isinstance(x, Force):
        return free_labels(x.value)
    if isinstance(x, Box):
        return free_labels(x.value)
    if isinstance(x, Apply):
        return free_labels(x.boxed) | free_labels(x.arg)
    assert isinstance(x, Return)
    return free_labels(x.value)


def type_free_lifted_vars(a: PqkType) -> frozenset[str]:
    if isinstance(a, (UnitType, WireT)):
        return frozenset()
    if isinstance(a, ArrowType):
        out = all_vars(a.cod.tree())
        for t in trees.leaves(a.cod):
            out |= type_free_lifted_vars(t)
        return type_free_lifted_vars(a.dom) | out
    if isinstance(a, BangType):
        out = all_vars(a.inner.tree())
        for t in trees.leaves(a.inner):
            out |= type_free_lifted_vars(t)
        return frozenset(out)
    if isinstance(a, CircType):
        return frozenset()  # abstracted
    assert isinstance(a, TensorType)
    return type_free_lifted_vars(a.left) | type_free_lifted_vars(a.right)


def free_lifted_vars(x: Term | Value) -> frozenset[str]:
    if isinstance(x, (Unit, LabelVal, Var, Boxed)):
        return frozenset()  # boxed circuits abstract their lifted variables
    if isinstance(x, Lam):
        return type_free_lifted_vars(x.ann) | free_lifted_vars(x.body)
    if isinstance(x, LiftV):
        return free_lifted_vars(x.body)
    if isinstance(x, Pair):
        return free_lifted_vars(x.left) | free_lifted_vars(x.right)
    if isinstance(x, App):
        return free_lifted_vars(x.fn) | free_lifted_vars(x.arg)
    if isinstance(x, Let):
        out = free_lifted_vars(x.bound) | all_vars(x.branches.tree())
        for m in trees.leaves(x.branches):
            out |= free_lifted_vars(m)
        return frozenset(out)
    if isinstance(x, LetPair):
        return free_lifted_vars(x.value) | free_lifted_vars(x.body)
    if isinstance(x, Force):
        return free_lifted_vars(x.value)
    if isinstance(x, Box):
        return free_lifted_vars(x.value)
    if isinstance(x, Apply):
        return frozenset(x.vars) | free_lifted_vars(x.boxed) | free_lifted_vars(x.arg)
    assert isinstance(x, Return)
    return free_lifted_vars(x.value)


# ---------------------------------------------------------------------------
# Renaming of lifted variables (uniform over terms and types)


def rename_lifted_type(a: PqkType, pi: Renaming) -> PqkType:
    if isinstance(a, (UnitType, WireT)):
        return a
    if isinstance(a, ArrowType):
        return ArrowType(
            rename_lifted_type(a.dom, pi),
            rename_lifted(a.cod, pi, lambda t: rename_lifted_type(t, pi)),
        )
    if isinstance(a, BangType):
        return BangType(rename_lifted(a.inner, pi, lambda t: rename_lifted_type(t, pi)))
    if isinstance(a, CircType):
        return a  # abstracted variables are untouched by outer renamings
    assert isinstance(a, TensorType)
    return TensorType(rename_lifted_type(a.left, pi), rename_lifted_type(a.right, pi))


def rename_lifted_term(x: Term | Value, pi: Renaming):
    rec = lambda y: rename_lifted_term(y, pi)
    if isinstance(x, (Unit, Var, LabelVal, Boxed)):
        return x
    if isinstance(x, Lam):
        return Lam(x.var, rename_lifted_type(x.ann, pi), rec(x.body), x.span)
    if isinstance(x, LiftV):
        return LiftV(rec(x.body), x.span)
    if isinstance(x, Pair):
        return Pair(rec(x.left), rec(x.right), x.span)
    if isinstance(x, App):
        return App(rec(x.fn), rec(x.arg), x.span)
    if isinstance(x, Let):
        return Let(x.var, rec(x.bound), rename_lifted(x.branches, pi, rec), x.span)
    if isinstance(x, LetPair):
        return LetPair(x.var1, x.var2, rec(x.value), rec(x.body), x.span)
    if isinstance(x, Force):
        return Force(rec(x.value), x.span)
    if isinstance(x, Box):
        return Box(x.mtype, rec(x.value), x.var_hint, x.span)
    if isinstance(x, Apply):
        return Apply(tuple(pi(v) for v in x.vars), rec(x.boxed), rec(x.arg), x.span)
    assert isinstance(x, Return)
    return Return(rec(x.value), x.span)


# ---------------------------------------------------------------------------
# Substitution


class _FreshNames:
    def __init__(self, avoid: Iterable[str]):
        self.avoid = set(avoid)

    def fresh(self, base: str) -> str:
        for i in itertools.count(1):
            cand = f"{base}_{i}"
            if cand not in self.avoid:
                self.avoid.add(cand)
                return cand
        raise AssertionError  # pragma: no cover


def substitute(m, v: Value, x: str):
    """Capture-avoiding substitution of the value v for x in a term or value.

    Binders in m that collide with v's free variables are freshened first,
    then the clause-by-clause definition applies; boxed circuits are
    substitution-transparent.
    """
    clash = free_vars(v)
    if clash & bound_vars(m):
        m = _freshen(m, clash, _FreshNames(clash | free_vars(m) | bound_vars(m)))
    return _subst(m, v, x)


def _freshen(m, avoid: frozenset[str], names: _FreshNames):
    rec = lambda y: _freshen(y, avoid, names)
    if isinstance(m, (Unit, Var, LabelVal, Boxed)):
        return m
    if isinstance(m, Lam):
        if m.var in avoid:
            new = names.fresh(m.var)
            body = _subst(rec(m.body), Var(new), m.var)
            return Lam(new, m.ann, body, m.span)
        return Lam(m.var, m.ann, rec(m.body), m.span)
    if isinstance(m, LiftV):
        return LiftV(rec(m.body), m.span)
    if isinstance(m, Pair):
        return Pair(rec(m.left), rec(m.right), m.span)
    if isinstance(m, App):
        return App(rec(m.fn), rec(m.arg), m.span)
    if isinstance(m, Let):
        bound = rec(m.bound)
        if m.var in avoid:
            new = names.fresh(m.var)
            branches = map_leaves(m.branches, lambda t: _subst(rec(t), Var(new), m.var))
            return Let(new, bound, branches, m.span)
        return Let(m.var, bound, map_leaves(m.branches, rec), m.span)
    if isinstance(m, LetPair):
        v1, v2, body = m.var1, m.var2, rec(m.body)
        if v1 in avoid:
            new = names.fresh(v1)
            body = _subst(body, Var(new), v1)
            v1 = new
        if v2 in avoid:
            new = names.fresh(v2)
            body = _subst(body, Var(new), v2)
            v2 = new
        return LetPair(v1, v2, rec(m.value), body, m.span)
    if isinstance(m, Force):
        return Force(rec(m.value), m.span)
    if isinstance(m, Box):
        return Box(m.mtype, rec(m.value), m.var_hint, m.span)
    if isinstance(m, Apply):
        return Apply(m.vars, rec(m.boxed), rec(m.arg), m.span)
    assert isinstance(m, Return)
    return Return(rec(m.value), m.span)


def _subst(m, v: Value, x: str):
    rec = lambda y: _subst(y, v, x)
    if isinstance(m, Var):
        return v if m.name == x else m
    if isinstance(m, (Unit, LabelVal, Boxed)):
        return m
    if isinstance(m, Lam):
        if m.var == x:
            return m
        return Lam(m.var, m.ann, rec(m.body), m.span)
    if isinstance(m, LiftV):
        return LiftV(rec(m.body), m.span)
    if isinstance(m, Pair):
        return Pair(rec(m.left), rec(m.right), m.span)
    if isinstance(m, App):
        return App(rec(m.fn), rec(m.arg), m.span)
    if isinstance(m, Let):
        bound = rec(m.bound)
        if m.var == x:
            return Let(m.var, bound, m.branches, m.span)
        return Let(m.var, bound, map_leaves(m.branches, rec), m.span)
    if isinstance(m, LetPair):
        value = rec(m.value)
        if x in (m.var1, m.var2):
            return LetPair(m.var1, m.var2, value, m.body, m.span)
        return LetPair(m.var1, m.var2, value, rec(m.body), m.span)
    if isinstance(m, Force):
        return Force(rec(m.value), m.span)
    if isinstance(m, Box):
        return Box(m.mtype, rec(m.value), m.var_hint, m.span)
    if isinstance(m, Apply):
        return Apply(m.vars, rec(m.boxed), rec(m.arg), m.span)
    assert isinstance(m, Return)
    return Return(rec(m.value), m.span)


# ---------------------------------------------------------------------------
# Alpha-equivalence and type equality


def _lifted_equal(a: Lifted, b: Lifted, leaf_eq) -> bool:
    if isinstance(a, LiftedLeaf) and isinstance(b, LiftedLeaf):
        return leaf_eq(a.value, b.value)
    if isinstance(a, LiftedNode) and isinstance(b, LiftedNode):
        return (
            a.var == b.var
            and _lifted_equal(a.zero, b.zero, leaf_eq)
            and _lifted_equal(a.one, b.one, leaf_eq)
        )
    return False


def _canonical_tree(t: LiftingTree) -> LiftingTree:
    order: list[str] = []

    def collect(t: LiftingTree):
        if isinstance(t, TreeNode):
            if t.var not in order:
                order.append(t.var)
            collect(t.zero)
            collect(t.one)

    collect(t)
    pi = Renaming({v: f"~c{i}" for i, v in enumerate(order)})
    return trees.rename_tree(t, pi)


def types_equal(a: PqkType, b: PqkType) -> bool:
    """Type equality: Circ trees up to renaming, other lifted variables by name."""
    if isinstance(a, (UnitType, WireT)) or isinstance(b, (UnitType, WireT)):
        return a == b
    if isinstance(a, ArrowType) and isinstance(b, ArrowType):
        return types_equal(a.dom, b.dom) and _lifted_equal(a.cod, b.cod, types_equal)
    if isinstance(a, BangType) and isinstance(b, BangType):
        return _lifted_equal(a.inner, b.inner, types_equal)
    if isinstance(a, CircType) and isinstance(b, CircType):
        if a.in_type != b.in_type:
            return False
        ca, cb = _canonical_tree(a.tree), _canonical_tree(b.tree)
        if ca != cb:
            return False
        pa = Renaming(dict(zip(_preorder_vars(a.tree), _preorder_vars(ca))))
        pb = Renaming(dict(zip(_preorder_vars(b.tree), _preorder_vars(cb))))
        return rename_lifted(a.out, pa) == rename_lifted(b.out, pb)
    if isinstance(a, TensorType) and isinstance(b, TensorType):
        return types_equal(a.left, b.left) and types_equal(a.right, b.right)
    return False


def _preorder_vars(t: LiftingTree) -> list[str]:
    order: list[str] = []

    def walk(t: LiftingTree):
        if isinstance(t, TreeNode):
            if t.var not in order:
                order.append(t.var)
            walk(t.zero)
            walk(t.one)

    walk(t)
    return order


def lifted_types_equal(a: Lifted, b: Lifted) -> bool:
    return _lifted_equal(a, b, types_equal)


def alpha_equiv(a, b) -> bool:
    """Equality up to renaming of bound term variables and of the lifted
    variables abstracted by boxed circuits / Circ types."""
    if isinstance(a, PqkType) and isinstance(b, PqkType):
        return types_equal(a, b)
    return _alpha(a, b, {}, {}, [0])


def _alpha(a, b, ea: dict, eb: dict, depth: list[int]) -> bool:
    if type(a) is not type(b):
        return False

    def bind(xa: str, xb: str):
        depth[0] += 1
        ea2 = dict(ea)
        eb2 = dict(eb)
        ea2[xa] = depth[0]
        eb2[xb] = depth[0]
        return ea2, eb2

    if isinstance(a, Unit):
        return True
    if isinstance(a, Var):
        return ea.get(a.name) == eb.get(b.name) and (a.name in ea or a.name == b.name)
    if isinstance(a, LabelVal):
        return a.name == b.name
    if isinstance(a, Lam):
        if not types_equal(a.ann, b.ann):
            return False
        ea2, eb2 = bind(a.var, b.var)
        return _alpha(a.body, b.body, ea2, eb2, depth)
    if isinstance(a, LiftV):
        return _alpha(a.body, b.body, ea, eb, depth)
    if isinstance(a, Boxed):
        return canonicalize_boxed_vars(a.boxed) == canonicalize_boxed_vars(b.boxed)
    if isinstance(a, Pair):
        return _alpha(a.left, b.left, ea, eb, depth) and _alpha(a.right, b.right, ea, eb, depth)
    if isinstance(a, App):
        return _alpha(a.fn, b.fn, ea, eb, depth) and _alpha(a.arg, b.arg, ea, eb, depth)
    if isinstance(a, Let):
        if not _alpha(a.bound, b.bound, ea, eb, depth):
            return False
        ea2, eb2 = bind(a.var, b.var)
        return _lifted_equal(a.branches, b.branches, lambda m, n: _alpha(m, n, ea2, eb2, depth))
    if isinstance(a, LetPair):
        if not _alpha(a.value, b.value, ea, eb, depth):
            return False
        ea2, eb2 = bind(a.var1, b.var1)
        d2 = depth[0] + 1
        depth[0] = d2
        ea2[a.var2] = d2
        eb2[b.var2] = d2
        return _alpha(a.body, b.body, ea2, eb2, depth)
    if isinstance(a, Force):
        return _alpha(a.value, b.value, ea, eb, depth)
    if isinstance(a, Box):
        return a.mtype == b.mtype and _alpha(a.value, b.value, ea, eb, depth)
    if isinstance(a, Apply):
        return (
            a.vars == b.vars
            and _alpha(a.boxed, b.boxed, ea, eb, depth)
            and _alpha(a.arg, b.arg, ea, eb, depth)
        )
    assert isinstance(a, Return)
    return _alpha(a.value, b.value, ea, eb, depth)


# ---------------------------------------------------------------------------
# Pretty printing (surface syntax)


def format_tree(t: LiftingTree) -> str:
    if isinstance(t, TreeLeaf):
        return "_"
    assert isinstance(t, TreeNode)
    return f"<{t.var} ? {format_tree(t.zero)} | {format_tree(t.one)}>"


def format_mtype(t: MType) -> str:
    if isinstance(t, MUnit):
        return "Unit"
    if isinstance(t, MWire):
        return str(t.wire)
    assert isinstance(t, MTensor)
    left = format_mtype(t.left)
    if isinstance(t.left, MTensor):
        left = f"({left})"
    return f"{left} * {format_mtype(t.right)}"


def _format_lifted(obj: Lifted, fmt_leaf) -> str:
    if isinstance(obj, LiftedLeaf):
        return fmt_leaf(obj.value)
    assert isinstance(obj, LiftedNode)
    return f"<{obj.var} ? {_format_lifted(obj.zero, fmt_leaf)} | {_format_lifted(obj.one, fmt_leaf)}>"


def format_lifted_type(obj: Lifted) -> str:
    return _format_lifted(obj, format_type)


def _type_atom(a: PqkType) -> str:
    s = format_type(a)
    if isinstance(a, (ArrowType, TensorType)):
        return f"({s})"
    return s


def format_type(a: PqkType) -> str:
    if isinstance(a, UnitType):
        return "Unit"
    if isinstance(a, WireT):
        return str(a.wire)
    if isinstance(a, ArrowType):
        cod = _format_lifted(a.cod, format_type)
        return f"{_type_atom(a.dom)} -o {cod}"
    if isinstance(a, BangType):
        if isinstance(a.inner, LiftedLeaf):
            return f"!{_type_atom(a.inner.value)}"
        return f"!{_format_lifted(a.inner, _type_atom)}"
    if isinstance(a, CircType):
        out = _format_lifted(a.out, format_mtype)
        return f"Circ[{format_tree(a.tree)}]({format_mtype(a.in_type)}, {out})"
    assert isinstance(a, TensorType)
    left = format_type(a.left)
    if isinstance(a.left, (ArrowType, TensorType)):
        left = f"({left})"
    right = format_type(a.right)
    if isinstance(a.right, ArrowType):
        right = f"({right})"
    return f"{left} * {right}"


def format_value(v: Value) -> str:
    if isinstance(v, Unit):
        return "*"
    if isinstance(v, (Var, LabelVal)):
        return v.name
    if isinstance(v, Lam):
        return f"fun ({v.var} : {format_type(v.ann)}) -> {format_term(v.body)}"
    if isinstance(v, LiftV):
        return f"lift {format_term(v.body)}"
    if isinstance(v, Boxed):
        return format_boxed(v.boxed)
    assert isinstance(v, Pair)
    return f"({format_value(v.left)}, {format_value(v.right)})"


def _value_atom(v: Value) -> str:
    s = format_value(v)
    if isinstance(v, (Lam, LiftV)):
        return f"({s})"
    return s


def format_term(m: Term) -> str:
    if isinstance(m, App):
        return f"{_value_atom(m.fn)} {_value_atom(m.arg)}"
    if isinstance(m, Let):
        branches = _format_lifted_term(m.branches)
        return f"let {m.var} = {format_term(m.bound)} in {branches}"
    if isinstance(m, LetPair):
        return f"let ({m.var1}, {m.var2}) = {format_value(m.value)} in {format_term(m.body)}"
    if isinstance(m, Force):
        return f"force {_value_atom(m.value)}"
    if isinstance(m, Box):
        return f"box[{format_mtype(m.mtype)}] {_value_atom(m.value)}"
    if isinstance(m, Apply):
        vars_part = f"[{', '.join(m.vars)}]" if m.vars else ""
        return f"apply{vars_part}({format_value(m.boxed)}, {format_value(m.arg)})"
    assert isinstance(m, Return)
    return f"return {_value_atom(m.value)}"


def _format_lifted_term(obj: Lifted) -> str:
    if isinstance(obj, LiftedLeaf):
        return format_term(obj.value)
    assert isinstance(obj, LiftedNode)
    return (
        f"case {obj.var} {{ 0 => {_format_lifted_term(obj.zero)}"
        f" | 1 => {_format_lifted_term(obj.one)} }}"
    )


def format_boxed(b: BoxedCircuit) -> str:
    """Inline crl literal when the layout convention reconstructs b, else a
    non-parseable debug rendering."""
    from .parser import boxed_from_circuit  # cycle-free at call time

    try:
        if boxed_from_circuit(b.circuit) == b:
            body = format_circuit(b.circuit).replace("\n", " ")
            return f"crl {{ {body} }}"
    except Exception:
        pass
    return f"<boxed {b.in_tuple} -> {_format_lifted(b.out_tuples, str)} of {{{format_circuit(b.circuit)}}}>"


def format_lifted_value(obj: Lifted) -> str:
    return _format_lifted(obj, format_value)
