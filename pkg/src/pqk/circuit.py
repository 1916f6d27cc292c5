"""The circuit representation language: labels, gates, circuits and signatures.

A circuit is an input header followed by conditional gate applications and
conditional lift instructions.  Signature checking assigns every valid
circuit a lifting tree together with branch-indexed output label contexts.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping

from . import trees
from .errors import (
    AssignmentClash,
    DuplicateLabel,
    GateArityMismatch,
    InvalidBranch,
    LeftoverLabel,
    NonFreshOutput,
    PreconditionViolated,
    StaleLiftedVar,
    UnboundLabel,
    UnknownGate,
    WrongWireType,
)
from .trees import (
    Assignment,
    Lifted,
    LiftingTree,
    Renaming,
    all_vars,
    extending_paths,
    graft,
    graft_obj,
    is_consistent,
    leaf,
    lookup,
    map_leaves,
    path_set,
    rename_lifted,
    var_set,
    var_sort_key,
)


class WireType(Enum):
    BIT = "Bit"
    QUBIT = "Qubit"

    def __str__(self) -> str:
        return self.value


BIT = WireType.BIT
QUBIT = WireType.QUBIT


# ---------------------------------------------------------------------------
# M-types and M-values


class MType:
    __slots__ = ()


@dataclass(frozen=True)
class MUnit(MType):
    __slots__ = ()

    def __str__(self) -> str:
        return "Unit"

    __repr__ = __str__


@dataclass(frozen=True)
class MWire(MType):
    wire: WireType

    def __str__(self) -> str:
        return str(self.wire)

    __repr__ = __str__


@dataclass(frozen=True)
class MTensor(MType):
    left: MType
    right: MType

    def __str__(self) -> str:
        def atom(t: MType) -> str:
            return f"({t})" if isinstance(t, MTensor) else str(t)

        return f"{atom(self.left)} * {self.right}"

    __repr__ = __str__


M_UNIT = MUnit()
M_BIT = MWire(BIT)
M_QUBIT = MWire(QUBIT)


class MValue:
    __slots__ = ()

    def labels(self) -> list[str]:
        return mvalue_labels(self)


@dataclass(frozen=True)
class MUnitVal(MValue):
    __slots__ = ()

    def __str__(self) -> str:
        return "*"

    __repr__ = __str__


@dataclass(frozen=True)
class MLabel(MValue):
    name: str

    def __str__(self) -> str:
        return self.name

    __repr__ = __str__


@dataclass(frozen=True)
class MPair(MValue):
    left: MValue
    right: MValue

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"

    __repr__ = __str__


M_STAR = MUnitVal()


def mvalue_labels(v: MValue) -> list[str]:
    if isinstance(v, MUnitVal):
        return []
    if isinstance(v, MLabel):
        return [v.name]
    assert isinstance(v, MPair)
    return mvalue_labels(v.left) + mvalue_labels(v.right)


def mtuple(labels: Iterable[str]) -> MValue:
    """Right-nested tuple of labels; * when empty, bare label when singleton."""
    names = list(labels)
    if not names:
        return M_STAR
    if len(names) == 1:
        return MLabel(names[0])
    return MPair(MLabel(names[0]), mtuple(names[1:]))


# ---------------------------------------------------------------------------
# Label contexts


@dataclass(frozen=True)
class LabelContext:
    """Finite map from wire labels to wire types (insertion-ordered)."""

    entries: tuple[tuple[str, WireType], ...] = ()

    @staticmethod
    def of(mapping: Mapping[str, WireType] | Iterable[tuple[str, WireType]] = (), **kw: WireType) -> LabelContext:
        items = list(dict(mapping).items()) + list(kw.items())
        seen = set()
        for name, _ in items:
            if name in seen:
                raise DuplicateLabel(f"label {name} bound twice")
            seen.add(name)
        return LabelContext(tuple(items))

    def domain(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.entries)

    def get(self, name: str) -> WireType | None:
        for n, w in self.entries:
            if n == name:
                return w
        return None

    def merge(self, other: LabelContext) -> LabelContext:
        overlap = self.domain() & other.domain()
        if overlap:
            raise DuplicateLabel(f"label contexts overlap on {sorted(overlap)}")
        return LabelContext(self.entries + other.entries)

    def remove(self, names: Iterable[str]) -> LabelContext:
        gone = set(names)
        missing = gone - self.domain()
        if missing:
            raise UnboundLabel(f"labels {sorted(missing)} not present")
        return LabelContext(tuple(p for p in self.entries if p[0] not in gone))

    def rename(self, rho: Renaming) -> LabelContext:
        return LabelContext(tuple((rho(n), w) for n, w in self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelContext):
            return NotImplemented
        return dict(self.entries) == dict(other.entries)

    def __hash__(self) -> int:
        return hash(frozenset(self.entries))

    def __str__(self) -> str:
        return ", ".join(f"{n}:{w}" for n, w in self.entries) or "·"

    __repr__ = __str__


EMPTY_CONTEXT = LabelContext()


def type_mvalue(q: LabelContext, v: MValue) -> MType:
    """Type an M-value against a label context, consuming it exactly."""
    names = mvalue_labels(v)
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise DuplicateLabel(f"labels {sorted(dup)} repeated in tuple")
    missing = set(names) - q.domain()
    if missing:
        raise UnboundLabel(f"labels {sorted(missing)} not in context")
    extra = q.domain() - set(names)
    if extra:
        raise LeftoverLabel(f"labels {sorted(extra)} left unconsumed")
    return _mvalue_type(q, v)


def _mvalue_type(q: LabelContext, v: MValue) -> MType:
    if isinstance(v, MUnitVal):
        return M_UNIT
    if isinstance(v, MLabel):
        w = q.get(v.name)
        assert w is not None
        return MWire(w)
    assert isinstance(v, MPair)
    return MTensor(_mvalue_type(q, v.left), _mvalue_type(q, v.right))


def context_of_mvalue(v: MValue, t: MType) -> LabelContext:
    """Label context making v have type t; shape mismatch raises GateArityMismatch."""
    out: list[tuple[str, WireType]] = []

    def walk(v: MValue, t: MType):
        if isinstance(v, MUnitVal) and isinstance(t, MUnit):
            return
        if isinstance(v, MLabel) and isinstance(t, MWire):
            out.append((v.name, t.wire))
            return
        if isinstance(v, MPair) and isinstance(t, MTensor):
            walk(v.left, t.left)
            walk(v.right, t.right)
            return
        raise GateArityMismatch(f"tuple {v} does not match shape {t}")

    walk(v, t)
    return LabelContext.of(out)


# ---------------------------------------------------------------------------
# Gates


@dataclass(frozen=True)
class Gate:
    name: str
    in_type: MType
    out_type: MType


class GateSet:
    def __init__(self, gates: Iterable[Gate]):
        self._by_name = {g.name: g for g in gates}

    def get(self, name: str) -> Gate:
        g = self._by_name.get(name)
        if g is None:
            raise UnknownGate(f"gate {name} is not in the gate set")
        return g

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return sorted(self._by_name)


_Q2 = MTensor(M_QUBIT, M_QUBIT)
_B2 = MTensor(M_BIT, M_BIT)

DEFAULT_GATES = GateSet([
    Gate("H", M_QUBIT, M_QUBIT),
    Gate("X", M_QUBIT, M_QUBIT),
    Gate("Z", M_QUBIT, M_QUBIT),
    Gate("CNOT", _Q2, _Q2),
    Gate("Meas", M_QUBIT, M_BIT),
    Gate("Meas2", _Q2, _B2),
    # convenience extensions beyond the core set
    Gate("Init0", M_UNIT, M_QUBIT),
    Gate("Init1", M_UNIT, M_QUBIT),
    Gate("Discard", M_BIT, M_UNIT),
])


# ---------------------------------------------------------------------------
# Circuits


@dataclass(frozen=True)
class GateApp:
    cond: Assignment
    gate: str
    inputs: MValue
    outputs: MValue

    def __str__(self) -> str:
        prefix = f"{self.cond} ? " if self.cond else ""
        return f"{prefix}{self.gate}{_args(self.inputs)} -> {self.outputs}"

    __repr__ = __str__


@dataclass(frozen=True)
class LiftInstr:
    cond: Assignment
    wire: str
    var: str

    def __str__(self) -> str:
        prefix = f"{self.cond} ? " if self.cond else ""
        return f"{prefix}lift({self.wire}) => {self.var}"

    __repr__ = __str__


Instruction = GateApp | LiftInstr


def _args(v: MValue) -> str:
    if isinstance(v, MPair):
        return str(v)
    return f"({v})"


@dataclass(frozen=True)
class Circuit:
    input: LabelContext
    instructions: tuple[Instruction, ...] = ()

    def extended(self, instr: Instruction) -> Circuit:
        return Circuit(self.input, self.instructions + (instr,))

    def all_labels(self) -> set[str]:
        out = set(self.input.domain())
        for ins in self.instructions:
            if isinstance(ins, GateApp):
                out.update(mvalue_labels(ins.inputs))
                out.update(mvalue_labels(ins.outputs))
            else:
                out.add(ins.wire)
        return out

    def all_lifted_vars(self) -> set[str]:
        out = set()
        for ins in self.instructions:
            out.update(ins.cond.domain())
            if isinstance(ins, LiftInstr):
                out.add(ins.var)
        return out

    def __str__(self) -> str:
        return format_circuit(self)


def format_circuit(c: Circuit) -> str:
    head = f"input({c.input})" if c.input else "input()"
    parts = [head] + [str(ins) for ins in c.instructions]
    return ";\n".join(parts) + ";"


def empty_circuit() -> Circuit:
    return Circuit(EMPTY_CONTEXT)


# ---------------------------------------------------------------------------
# Signature checking


@dataclass(frozen=True)
class CircuitSignature:
    tree: LiftingTree
    input: LabelContext
    outputs: Lifted  # of LabelContext

    def output_at(self, a: Assignment) -> LabelContext:
        return lookup(self.outputs, a)


def check_signature(c: Circuit, gateset: GateSet = DEFAULT_GATES) -> CircuitSignature:
    """Derive the unique signature of c, or raise a specific CircuitError."""
    tree: LiftingTree = trees.EMPTY_TREE
    outputs: Lifted = leaf(c.input)
    seen_labels = set(c.input.domain())

    for ins in c.instructions:
        if not is_consistent(tree, ins.cond):
            raise InvalidBranch(f"condition {ins.cond} is not consistent with the lifted state at `{ins}`")
        branches = extending_paths(tree, ins.cond)
        if isinstance(ins, GateApp):
            gate = gateset.get(ins.gate)
            consumed = context_of_mvalue(ins.inputs, gate.in_type)
            produced = context_of_mvalue(ins.outputs, gate.out_type)
            stale = produced.domain() & seen_labels
            if stale:
                raise NonFreshOutput(f"output labels {sorted(stale)} already occur in the circuit at `{ins}`")
            new_leaves = {}
            for b in branches:
                ctx = lookup(outputs, b)
                for name, wire in consumed.entries:
                    have = ctx.get(name)
                    if have is None:
                        raise UnboundLabel(f"label {name} is not live on branch {b} at `{ins}`")
                    if have != wire:
                        raise WrongWireType(f"label {name} is {have}, gate {gate.name} expects {wire} (branch {b})")
                new_leaves[b] = ctx.remove(consumed.domain()).merge(produced)
            outputs = trees.compose(outputs, new_leaves, new_leaves.keys())
            seen_labels.update(produced.domain())
        else:
            assert isinstance(ins, LiftInstr)
            live = var_set(tree, ins.cond)
            if ins.var in live:
                raise StaleLiftedVar(f"lifted variable {ins.var} already live on branch {ins.cond}")
            reduced = {}
            for b in branches:
                ctx = lookup(outputs, b)
                have = ctx.get(ins.wire)
                if have is None:
                    raise UnboundLabel(f"label {ins.wire} is not live on branch {b} at `{ins}`")
                if have != BIT:
                    raise WrongWireType(f"lift needs a Bit wire, {ins.wire} is {have} (branch {b})")
                reduced[b] = ctx.remove([ins.wire])
            outputs = trees.compose(outputs, reduced, reduced.keys())
            split = trees.TreeNode(ins.var, trees.EMPTY_TREE, trees.EMPTY_TREE)
            outputs = graft_obj(outputs, ins.cond, split)
            tree = graft(tree, ins.cond, split)

    return CircuitSignature(tree, c.input, outputs)


# ---------------------------------------------------------------------------
# Renamings


def rename_mvalue(v: MValue, rho: Renaming) -> MValue:
    if isinstance(v, MUnitVal):
        return v
    if isinstance(v, MLabel):
        return MLabel(rho(v.name))
    assert isinstance(v, MPair)
    return MPair(rename_mvalue(v.left, rho), rename_mvalue(v.right, rho))


def rename_labels_circuit(c: Circuit, rho: Renaming) -> Circuit:
    instrs = []
    for ins in c.instructions:
        if isinstance(ins, GateApp):
            instrs.append(GateApp(ins.cond, ins.gate, rename_mvalue(ins.inputs, rho), rename_mvalue(ins.outputs, rho)))
        else:
            instrs.append(LiftInstr(ins.cond, rho(ins.wire), ins.var))
    return Circuit(c.input.rename(rho), tuple(instrs))


def rename_lifted_circuit(c: Circuit, pi: Renaming) -> Circuit:
    instrs = []
    for ins in c.instructions:
        if isinstance(ins, GateApp):
            instrs.append(GateApp(ins.cond.rename(pi), ins.gate, ins.inputs, ins.outputs))
        else:
            instrs.append(LiftInstr(ins.cond.rename(pi), ins.wire, pi(ins.var)))
    return Circuit(c.input, tuple(instrs))


def rename_labels_signature(sig: CircuitSignature, rho: Renaming) -> CircuitSignature:
    return CircuitSignature(
        sig.tree,
        sig.input.rename(rho),
        map_leaves(sig.outputs, lambda q: q.rename(rho)),
    )


def rename_lifted_signature(sig: CircuitSignature, pi: Renaming) -> CircuitSignature:
    return CircuitSignature(
        trees.rename_tree(sig.tree, pi),
        sig.input,
        rename_lifted(sig.outputs, pi),
    )


# ---------------------------------------------------------------------------
# Boxed circuits


@dataclass(frozen=True)
class BoxedCircuit:
    """First-class circuit datum: input tuple, circuit, branch-indexed output tuples.

    The lifted variables of the tree are binding occurrences; boxed circuits
    are compared up to their renaming (and label renaming, via boxed_equiv).
    """

    in_tuple: MValue
    circuit: Circuit
    out_tuples: Lifted  # of MValue

    @property
    def tree(self) -> LiftingTree:
        return self.out_tuples.tree()

    def binder_order(self) -> list[str]:
        """Abstracted lifted variables in the sorted-enumeration order."""
        return sorted(all_vars(self.tree), key=var_sort_key)

    def __str__(self) -> str:
        return f"({self.in_tuple}, {{{format_circuit(self.circuit)}}}, {self.out_tuples})"

    __repr__ = __str__


def rename_labels_boxed(b: BoxedCircuit, rho: Renaming) -> BoxedCircuit:
    return BoxedCircuit(
        rename_mvalue(b.in_tuple, rho),
        rename_labels_circuit(b.circuit, rho),
        map_leaves(b.out_tuples, lambda v: rename_mvalue(v, rho)),
    )


def rename_lifted_boxed(b: BoxedCircuit, pi: Renaming) -> BoxedCircuit:
    return BoxedCircuit(
        b.in_tuple,
        rename_lifted_circuit(b.circuit, pi),
        rename_lifted(b.out_tuples, pi),
    )


def canonicalize_boxed_vars(b: BoxedCircuit) -> BoxedCircuit:
    """Rename the abstracted lifted variables to a canonical sequence.

    Order: lift-instruction order in the circuit, then tree pre-order for any
    variable not introduced by a lift.
    """
    lifted_order: list[str] = []
    for ins in b.circuit.instructions:
        if isinstance(ins, LiftInstr) and ins.var not in lifted_order:
            lifted_order.append(ins.var)

    def preorder(t: LiftingTree):
        if isinstance(t, trees.TreeNode):
            if t.var not in lifted_order:
                lifted_order.append(t.var)
            preorder(t.zero)
            preorder(t.one)

    preorder(b.tree)
    pi = Renaming({v: f"~v{i}" for i, v in enumerate(lifted_order)})
    return rename_lifted_boxed(b, pi)


def canonical_boxed(b: BoxedCircuit) -> BoxedCircuit:
    """Canonical representative of b's equivalence class.

    Lifted variables are canonicalized, then labels are renamed in
    first-occurrence order over (in_tuple, input context, instructions,
    out tuples).
    """
    b = canonicalize_boxed_vars(b)

    label_order: list[str] = []

    def see(names: Iterable[str]):
        for n in names:
            if n not in label_order:
                label_order.append(n)

    see(mvalue_labels(b.in_tuple))
    see(n for n, _ in b.circuit.input.entries)
    for ins in b.circuit.instructions:
        if isinstance(ins, GateApp):
            see(mvalue_labels(ins.inputs))
            see(mvalue_labels(ins.outputs))
        else:
            see([ins.wire])
    for v in trees.leaves(b.out_tuples):
        see(mvalue_labels(v))
    rho = Renaming({n: f"~l{i}" for i, n in enumerate(label_order)})
    return rename_labels_boxed(b, rho)


def boxed_equiv(b1: BoxedCircuit, b2: BoxedCircuit) -> bool:
    """True when b1 and b2 differ only by a renaming of labels (trees up to alpha)."""
    return canonical_boxed(b1) == canonical_boxed(b2)


# ---------------------------------------------------------------------------
# Insertion and append


def insert(c: Circuit, a: Assignment, d: Circuit) -> Circuit:
    """Append d's instructions to c, each condition unioned with a (C ::_a D)."""
    out = c
    for ins in d.instructions:
        if a.domain() & ins.cond.domain():
            raise AssignmentClash(
                f"instruction condition {ins.cond} overlaps insertion branch {a}"
            )
        cond = a.union(ins.cond)
        if isinstance(ins, GateApp):
            out = out.extended(GateApp(cond, ins.gate, ins.inputs, ins.outputs))
        else:
            out = out.extended(LiftInstr(cond, ins.wire, ins.var))
    return out


class FreshLabels:
    """Monotone source of fresh wire labels (%0, %1, ...)."""

    PREFIX = "%"

    def __init__(self, start: int = 0):
        self._next = start

    def fresh(self) -> str:
        name = f"{self.PREFIX}{self._next}"
        self._next += 1
        return name

    @classmethod
    def above(cls, *label_sets: Iterable[str]) -> FreshLabels:
        top = 0
        for names in label_sets:
            for n in names:
                if n.startswith(cls.PREFIX) and n[1:].isdigit():
                    top = max(top, int(n[1:]) + 1)
        return cls(top)


def fresh_labels_for(t: MType, source: FreshLabels) -> tuple[LabelContext, MValue]:
    """(Q, tuple) with Q |= tuple : t, labels drawn from source."""
    if isinstance(t, MUnit):
        return EMPTY_CONTEXT, M_STAR
    if isinstance(t, MWire):
        name = source.fresh()
        return LabelContext.of({name: t.wire}), MLabel(name)
    assert isinstance(t, MTensor)
    q1, v1 = fresh_labels_for(t.left, source)
    q2, v2 = fresh_labels_for(t.right, source)
    return q1.merge(q2), MPair(v1, v2)


def match_tuples(pattern: MValue, target: MValue) -> dict[str, str]:
    """Label mapping sending pattern onto target; shapes must agree."""
    out: dict[str, str] = {}

    def walk(p: MValue, t: MValue):
        if isinstance(p, MUnitVal) and isinstance(t, MUnitVal):
            return
        if isinstance(p, MLabel) and isinstance(t, MLabel):
            if p.name in out and out[p.name] != t.name:
                raise PreconditionViolated(f"label {p.name} maps two ways")
            out[p.name] = t.name
            return
        if isinstance(p, MPair) and isinstance(t, MPair):
            walk(p.left, t.left)
            walk(p.right, t.right)
            return
        raise PreconditionViolated(f"tuple {t} does not have the boxed circuit's input shape {p}")

    walk(pattern, target)
    return out


def append(
    c: Circuit,
    a: Assignment,
    target: MValue,
    boxed: BoxedCircuit,
    fresh_vars: list[str],
    gateset: GateSet = DEFAULT_GATES,
    labels: FreshLabels | None = None,
) -> tuple[Circuit, Lifted]:
    """Unbox `boxed` onto the wires `target` of c on branch a.

    Implements the three steps: pick an equivalent boxed circuit whose input
    tuple is `target` and whose other labels are fresh in c, instantiate its
    abstracted lifted variables with fresh_vars (positionally against the
    sorted binder order), and insert the result on branch a.  Returns the new
    circuit and the instantiated output tuples.
    """
    sig = check_signature(c, gateset)
    if a not in set(path_set(sig.tree)):
        raise PreconditionViolated(f"branch {a} is not a path of the circuit's lifting tree")
    out_ctx = lookup(sig.outputs, a)
    target_labels = mvalue_labels(target)
    dup = {n for n in target_labels if target_labels.count(n) > 1}
    if dup:
        raise PreconditionViolated(f"target labels {sorted(dup)} repeated")
    missing = set(target_labels) - out_ctx.domain()
    if missing:
        raise PreconditionViolated(f"target labels {sorted(missing)} are not outputs on branch {a}")

    binders = boxed.binder_order()
    if len(fresh_vars) != len(binders):
        raise PreconditionViolated(
            f"expected {len(binders)} fresh lifted variables, got {len(fresh_vars)}"
        )
    if len(set(fresh_vars)) != len(fresh_vars):
        raise PreconditionViolated("fresh lifted variables must be pairwise distinct")
    live = var_set(sig.tree, a)
    stale = set(fresh_vars) & live
    if stale:
        raise PreconditionViolated(f"lifted variables {sorted(stale)} already live on branch {a}")

    # step 1: relabel the boxed circuit onto the target wires, everything else fresh
    mapping = match_tuples(boxed.in_tuple, target)
    if labels is None:
        labels = FreshLabels.above(c.all_labels(), boxed.circuit.all_labels())
    taken = c.all_labels() | set(target_labels)
    for name in sorted(boxed.circuit.all_labels() | set(mvalue_labels(boxed.in_tuple))):
        if name not in mapping:
            fresh = labels.fresh()
            while fresh in taken:
                fresh = labels.fresh()
            mapping[name] = fresh
    if len(set(mapping.values())) != len(mapping):
        raise PreconditionViolated("relabeling is not injective")
    rho = Renaming(mapping)
    relabeled = rename_labels_boxed(boxed, rho)

    # step 2: instantiate the abstracted lifted variables
    pi = Renaming(dict(zip(binders, fresh_vars)))
    body = rename_lifted_circuit(relabeled.circuit, pi)
    out_tuples = rename_lifted(relabeled.out_tuples, pi)

    # step 3: insert on branch a
    return insert(c, a, body), out_tuples


# ---------------------------------------------------------------------------
# JSON and DOT export


def mvalue_to_json(v: MValue) -> Any:
    if isinstance(v, MUnitVal):
        return None
    if isinstance(v, MLabel):
        return v.name
    assert isinstance(v, MPair)
    return [mvalue_to_json(v.left), mvalue_to_json(v.right)]


def mvalue_from_json(data: Any) -> MValue:
    if data is None:
        return M_STAR
    if isinstance(data, str):
        return MLabel(data)
    left, right = data
    return MPair(mvalue_from_json(left), mvalue_from_json(right))


def mtype_to_json(t: MType) -> Any:
    if isinstance(t, MUnit):
        return "Unit"
    if isinstance(t, MWire):
        return str(t.wire)
    assert isinstance(t, MTensor)
    return [mtype_to_json(t.left), mtype_to_json(t.right)]


def mtype_from_json(data: Any) -> MType:
    if data == "Unit":
        return M_UNIT
    if data in ("Bit", "Qubit"):
        return MWire(WireType(data))
    left, right = data
    return MTensor(mtype_from_json(left), mtype_from_json(right))


def context_to_json(q: LabelContext) -> Any:
    return {n: str(w) for n, w in q.entries}


def context_from_json(data: Any) -> LabelContext:
    return LabelContext.of({n: WireType(w) for n, w in data.items()})


def assignment_to_json(a: Assignment) -> Any:
    return {v: b for v, b in a.bindings}


def assignment_from_json(data: Any) -> Assignment:
    return Assignment.of({v: int(b) for v, b in data.items()})


def circuit_to_json(c: Circuit) -> Any:
    out = {"input": context_to_json(c.input), "instructions": []}
    for ins in c.instructions:
        if isinstance(ins, GateApp):
            out["instructions"].append({
                "kind": "gate",
                "cond": assignment_to_json(ins.cond),
                "gate": ins.gate,
                "in": mvalue_to_json(ins.inputs),
                "out": mvalue_to_json(ins.outputs),
            })
        else:
            out["instructions"].append({
                "kind": "lift",
                "cond": assignment_to_json(ins.cond),
                "wire": ins.wire,
                "var": ins.var,
            })
    return out


def circuit_from_json(data: Any) -> Circuit:
    instrs: list[Instruction] = []
    for ins in data["instructions"]:
        cond = assignment_from_json(ins["cond"])
        if ins["kind"] == "gate":
            instrs.append(GateApp(cond, ins["gate"], mvalue_from_json(ins["in"]), mvalue_from_json(ins["out"])))
        else:
            instrs.append(LiftInstr(cond, ins["wire"], ins["var"]))
    return Circuit(context_from_json(data["input"]), tuple(instrs))


def signature_to_json(sig: CircuitSignature) -> Any:
    return {
        "tree": trees.tree_to_json(sig.tree),
        "input": context_to_json(sig.input),
        "outputs": trees.lifted_to_json(sig.outputs, context_to_json),
    }


def _dot_quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def circuit_to_dot(c: Circuit) -> str:
    """Graphviz rendering: wires flow left to right between instruction nodes."""
    lines = ["digraph circuit {", "  rankdir=LR;", "  node [shape=box];"]
    lines.append('  in [label="input", shape=cds];')
    producer = {name: "in" for name in c.input.domain()}
    groups: dict[Assignment, list[str]] = {}
    edges: list[str] = []
    for i, ins in enumerate(c.instructions):
        nid = f"n{i}"
        if isinstance(ins, GateApp):
            label = ins.gate
            shape = "box"
            ins_in = mvalue_labels(ins.inputs)
            ins_out = mvalue_labels(ins.outputs)
        else:
            label = f"lift => {ins.var}"
            shape = "cds"
            ins_in = [ins.wire]
            ins_out = []
        groups.setdefault(ins.cond, []).append(f"    {nid} [label={_dot_quote(label)}, shape={shape}];")
        for name in ins_in:
            src = producer.get(name, "in")
            edges.append(f"  {src} -> {nid} [label={_dot_quote(name)}];")
        for name in ins_out:
            producer[name] = nid
    for k, (cond, nodes) in enumerate(sorted(groups.items(), key=lambda p: str(p[0]))):
        if cond:
            lines.append(f"  subgraph cluster_{k} {{")
            lines.append(f"    label={_dot_quote(str(cond))};")
            lines.append("    style=dashed;")
            lines.extend(nodes)
            lines.append("  }")
        else:
            lines.extend("  " + n.strip() for n in nodes)
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"
