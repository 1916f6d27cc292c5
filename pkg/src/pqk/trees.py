"""Lifting trees, assignments and lifted objects.

A lifting tree records the branching structure produced by dynamic lifting:
the empty tree (a leaf) or a node carrying a lifted-variable name with a
zero- and a one-subtree.  A lifted object decorates the leaves of a lifting
tree with payload values; equivalently it is a finite map from root-to-leaf
paths (assignments) to payloads.  Both views are provided: the tree form is
primary, the map view (``to_map``/``from_map``) serves as an oracle.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping

from .errors import AssignmentClash, InvalidBranch, VariableClash

# ---------------------------------------------------------------------------
# Variable names

_NAME_RE = re.compile(r"^(.*?)(\d*)$")


def var_sort_key(name: str) -> tuple[str, int, str]:
    """Total order on lifted-variable names: stem, then numeric suffix."""
    m = _NAME_RE.match(name)
    assert m is not None
    stem, digits = m.group(1), m.group(2)
    return (stem, int(digits) if digits else -1, name)


# ---------------------------------------------------------------------------
# Assignments


@dataclass(frozen=True)
class Assignment:
    """Finite partial map from lifted variables to bits, canonically sorted."""

    bindings: tuple[tuple[str, int], ...]

    @staticmethod
    def of(mapping: Mapping[str, int] | Iterable[tuple[str, int]] = (), **kw: int) -> Assignment:
        items = dict(mapping)
        items.update(kw)
        for v, b in items.items():
            if b not in (0, 1):
                raise ValueError(f"assignment binds {v} to non-bit {b!r}")
        return Assignment(tuple(sorted(items.items(), key=lambda p: var_sort_key(p[0]))))

    def domain(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.bindings)

    def get(self, var: str) -> int | None:
        for v, b in self.bindings:
            if v == var:
                return b
        return None

    def without(self, var: str) -> Assignment:
        return Assignment(tuple(p for p in self.bindings if p[0] != var))

    def union(self, other: Assignment) -> Assignment:
        overlap = self.domain() & other.domain()
        if overlap:
            raise AssignmentClash(f"assignments overlap on {sorted(overlap)}")
        return Assignment.of(dict(self.bindings) | dict(other.bindings))

    def extends(self, other: Assignment) -> bool:
        """True when self agrees with other on all of other's domain."""
        return all(self.get(v) == b for v, b in other.bindings)

    def rename(self, pi: Renaming) -> Assignment:
        return Assignment.of({pi(v): b for v, b in self.bindings})

    def __len__(self) -> int:
        return len(self.bindings)

    def __bool__(self) -> bool:
        return bool(self.bindings)

    def __str__(self) -> str:
        if not self.bindings:
            return "()"
        return "(" + "; ".join(f"{v} = {b}" for v, b in self.bindings) + ")"

    __repr__ = __str__


EMPTY_ASSIGNMENT = Assignment.of()


# ---------------------------------------------------------------------------
# Renamings (finite-support permutations of a name space)


class Renaming:
    """Finite-support permutation of names.

    Built from an injective mapping; completed to a permutation by pairing the
    unmatched values back onto the unmatched keys in sorted order (so a single
    pair u->s completes to the swap u<->s).
    """

    def __init__(self, mapping: Mapping[str, str]):
        values = list(mapping.values())
        if len(set(values)) != len(values):
            raise ValueError("renaming is not injective")
        perm = dict(mapping)
        loose_values = [v for v in values if v not in mapping]
        loose_keys = [k for k in mapping if k not in set(values)]
        for v, k in zip(sorted(loose_values, key=var_sort_key), sorted(loose_keys, key=var_sort_key)):
            perm[v] = k
        if sorted(perm) != sorted(perm.values()):
            raise ValueError("mapping does not complete to a permutation")
        self._perm = {k: v for k, v in perm.items() if k != v}

    def __call__(self, name: str) -> str:
        return self._perm.get(name, name)

    def inverse(self) -> Renaming:
        return Renaming({v: k for k, v in self._perm.items()})

    def support(self) -> frozenset[str]:
        return frozenset(self._perm)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}/{k}" for k, v in sorted(self._perm.items()))
        return f"Renaming({inner})"


IDENTITY_RENAMING = Renaming({})


# ---------------------------------------------------------------------------
# Lifting trees


class LiftingTree:
    """Either the empty tree (TreeLeaf) or TreeNode(var, zero, one)."""

    __slots__ = ()


@dataclass(frozen=True)
class TreeLeaf(LiftingTree):
    __slots__ = ()

    def __str__(self) -> str:
        return "_"

    __repr__ = __str__


@dataclass(frozen=True)
class TreeNode(LiftingTree):
    var: str
    zero: LiftingTree
    one: LiftingTree

    def __post_init__(self):
        below = all_vars(self.zero) | all_vars(self.one)
        if self.var in below:
            raise VariableClash(f"node variable {self.var} occurs in a subtree")

    def __str__(self) -> str:
        return f"<{self.var} ? {self.zero} | {self.one}>"

    __repr__ = __str__


EMPTY_TREE = TreeLeaf()


def all_vars(t: LiftingTree) -> frozenset[str]:
    """Every lifted variable mentioned in t (V(t))."""
    if isinstance(t, TreeLeaf):
        return frozenset()
    assert isinstance(t, TreeNode)
    return frozenset({t.var}) | all_vars(t.zero) | all_vars(t.one)


def var_set(t: LiftingTree, a: Assignment) -> frozenset[str]:
    """The variable set of t on branch a (V_a(t)); unknown variables in a are ignored."""
    if isinstance(t, TreeLeaf):
        return frozenset()
    assert isinstance(t, TreeNode)
    bit = a.get(t.var)
    if bit == 0:
        rest = var_set(t.zero, a)
    elif bit == 1:
        rest = var_set(t.one, a)
    else:
        rest = var_set(t.zero, a) | var_set(t.one, a)
    return frozenset({t.var}) | rest


def path_set(t: LiftingTree) -> list[Assignment]:
    """Root-to-leaf paths of t, in lexicographic order of canonical assignments."""
    return sorted(_paths(t), key=lambda a: tuple((var_sort_key(v), b) for v, b in a.bindings))


def _paths(t: LiftingTree) -> list[Assignment]:
    if isinstance(t, TreeLeaf):
        return [EMPTY_ASSIGNMENT]
    assert isinstance(t, TreeNode)
    out = []
    for bit, sub in ((0, t.zero), (1, t.one)):
        head = Assignment.of({t.var: bit})
        out.extend(head.union(p) for p in _paths(sub))
    return out


def assignment_set(t: LiftingTree) -> frozenset[Assignment]:
    """All assignments consistent with t (A_t); exponential, test/oracle use."""
    if isinstance(t, TreeLeaf):
        return frozenset({EMPTY_ASSIGNMENT})
    assert isinstance(t, TreeNode)
    zero = assignment_set(t.zero)
    one = assignment_set(t.one)
    out = set(zero) | set(one)
    out.update(Assignment.of({t.var: 0}).union(a) for a in zero)
    out.update(Assignment.of({t.var: 1}).union(b) for b in one)
    return frozenset(out)


def is_consistent(t: LiftingTree, a: Assignment) -> bool:
    """a belongs to A_t, i.e. a is a restriction of some root-to-leaf path."""
    if not a:
        return True
    if isinstance(t, TreeLeaf):
        return False
    assert isinstance(t, TreeNode)
    bit = a.get(t.var)
    if bit is not None:
        return is_consistent(t.zero if bit == 0 else t.one, a.without(t.var))
    return is_consistent(t.zero, a) or is_consistent(t.one, a)


def extending_paths(t: LiftingTree, a: Assignment) -> list[Assignment]:
    """The paths of t that extend a (P_t^a)."""
    if not is_consistent(t, a):
        raise InvalidBranch(f"{a} is not consistent with tree {t}")
    return [p for p in path_set(t) if p.extends(a)]


def rename_tree(t: LiftingTree, pi: Renaming) -> LiftingTree:
    if isinstance(t, TreeLeaf):
        return t
    assert isinstance(t, TreeNode)
    return TreeNode(pi(t.var), rename_tree(t.zero, pi), rename_tree(t.one, pi))


def subtree_at(t: LiftingTree, a: Assignment) -> LiftingTree:
    """Subtree reached by following a from the root; a must spell a node prefix."""
    if not a:
        return t
    if isinstance(t, TreeLeaf):
        raise InvalidBranch(f"{a} descends below a leaf")
    assert isinstance(t, TreeNode)
    bit = a.get(t.var)
    if bit is None:
        raise InvalidBranch(f"{a} does not bind {t.var}")
    return subtree_at(t.zero if bit == 0 else t.one, a.without(t.var))


# ---------------------------------------------------------------------------
# Lifted objects


class Lifted:
    """Lifting tree whose leaves carry payload values."""

    __slots__ = ()

    def tree(self) -> LiftingTree:
        raise NotImplementedError

    def paths(self) -> list[Assignment]:
        return path_set(self.tree())

    def lookup(self, a: Assignment) -> Any:
        return lookup(self, a)


@dataclass(frozen=True)
class LiftedLeaf(Lifted):
    value: Any

    def tree(self) -> LiftingTree:
        return EMPTY_TREE

    def __str__(self) -> str:
        return f"leaf({self.value})"

    __repr__ = __str__


@dataclass(frozen=True)
class LiftedNode(Lifted):
    var: str
    zero: Lifted
    one: Lifted

    def __post_init__(self):
        below = all_vars(self.zero.tree()) | all_vars(self.one.tree())
        if self.var in below:
            raise VariableClash(f"node variable {self.var} occurs in a subtree")

    def tree(self) -> LiftingTree:
        return TreeNode(self.var, self.zero.tree(), self.one.tree())

    def __str__(self) -> str:
        return f"<{self.var} ? {self.zero} | {self.one}>"

    __repr__ = __str__


def leaf(value: Any) -> LiftedLeaf:
    return LiftedLeaf(value)


def node(var: str, zero: Lifted, one: Lifted) -> LiftedNode:
    return LiftedNode(var, zero, one)


def lookup(obj: Lifted, a: Assignment) -> Any:
    """Read the map view: the payload at path a."""
    if isinstance(obj, LiftedLeaf):
        if a:
            raise InvalidBranch(f"{a} leftover below a leaf")
        return obj.value
    assert isinstance(obj, LiftedNode)
    bit = a.get(obj.var)
    if bit is None:
        raise InvalidBranch(f"path does not bind {obj.var}")
    return lookup(obj.zero if bit == 0 else obj.one, a.without(obj.var))


def to_map(obj: Lifted) -> dict[Assignment, Any]:
    """The lifted object as a finite map from paths to payloads."""
    return {p: lookup(obj, p) for p in obj.paths()}


def from_map(t: LiftingTree, mapping: Mapping[Assignment, Any]) -> Lifted:
    """Rebuild the tree form of a map view over t."""
    if isinstance(t, TreeLeaf):
        return LiftedLeaf(mapping[EMPTY_ASSIGNMENT])
    assert isinstance(t, TreeNode)

    def restrict(bit: int) -> dict[Assignment, Any]:
        return {
            a.without(t.var): v
            for a, v in mapping.items()
            if a.get(t.var) == bit
        }

    return LiftedNode(t.var, from_map(t.zero, restrict(0)), from_map(t.one, restrict(1)))


def const(t: LiftingTree, value: Any) -> Lifted:
    """Lifted object over t carrying the same payload at every leaf."""
    if isinstance(t, TreeLeaf):
        return LiftedLeaf(value)
    assert isinstance(t, TreeNode)
    return LiftedNode(t.var, const(t.zero, value), const(t.one, value))


def map_leaves(obj: Lifted, fn: Callable[[Any], Any]) -> Lifted:
    if isinstance(obj, LiftedLeaf):
        return LiftedLeaf(fn(obj.value))
    assert isinstance(obj, LiftedNode)
    return LiftedNode(obj.var, map_leaves(obj.zero, fn), map_leaves(obj.one, fn))


def leaves(obj: Lifted) -> list[Any]:
    """Payloads in path order."""
    return [lookup(obj, p) for p in obj.paths()]


def rename_lifted(obj: Lifted, pi: Renaming, leaf_fn: Callable[[Any], Any] | None = None) -> Lifted:
    """Rename node variables; leaf payloads are renamed by leaf_fn when given."""
    if isinstance(obj, LiftedLeaf):
        return LiftedLeaf(leaf_fn(obj.value)) if leaf_fn else obj
    assert isinstance(obj, LiftedNode)
    return LiftedNode(
        pi(obj.var),
        rename_lifted(obj.zero, pi, leaf_fn),
        rename_lifted(obj.one, pi, leaf_fn),
    )


# ---------------------------------------------------------------------------
# Composition, flattening, grafting


def compose(obj: Lifted, family: Mapping[Assignment, Any], index: Iterable[Assignment]) -> Lifted:
    """Overwrite the leaves at the paths in index with the family's values."""
    index = set(index)
    valid = set(obj.paths())
    for a in index:
        if a not in valid:
            raise InvalidBranch(f"{a} is not a path of {obj.tree()}")
        if a not in family:
            raise KeyError(f"family undefined on {a}")
    return _compose(obj, {a: family[a] for a in index})


def _compose(obj: Lifted, family: dict[Assignment, Any]) -> Lifted:
    if not family:
        return obj
    if isinstance(obj, LiftedLeaf):
        return LiftedLeaf(family[EMPTY_ASSIGNMENT])
    assert isinstance(obj, LiftedNode)
    zero = {a.without(obj.var): v for a, v in family.items() if a.get(obj.var) == 0}
    one = {a.without(obj.var): v for a, v in family.items() if a.get(obj.var) == 1}
    return LiftedNode(obj.var, _compose(obj.zero, zero), _compose(obj.one, one))


@dataclass(frozen=True)
class Sub:
    """Explicit tag marking a leaf payload as a nested lifted object to unfold."""

    inner: Lifted

    def __str__(self) -> str:
        return f"sub({self.inner})"

    __repr__ = __str__


def flatten(obj: Lifted) -> Lifted:
    """Unfold Sub-tagged leaves into subtrees (the accumulator-set definition)."""
    return _flatten(obj, frozenset())


def _flatten(obj: Lifted, acc: frozenset[str]) -> Lifted:
    if isinstance(obj, LiftedLeaf):
        if isinstance(obj.value, Sub):
            inner = obj.value.inner
            clash = all_vars(inner.tree()) & acc
            if clash:
                raise VariableClash(f"flattening reuses {sorted(clash)} already on the path")
            return inner
        return obj
    assert isinstance(obj, LiftedNode)
    acc = acc | {obj.var}
    return LiftedNode(obj.var, _flatten(obj.zero, acc), _flatten(obj.one, acc))


def flatten_tree(obj: Lifted) -> LiftingTree:
    """Flatten a lifted object whose leaves are themselves lifting trees."""
    return _flatten_tree(obj, frozenset())


def _flatten_tree(obj: Lifted, acc: frozenset[str]) -> LiftingTree:
    if isinstance(obj, LiftedLeaf):
        sub = obj.value
        if not isinstance(sub, LiftingTree):
            raise TypeError(f"leaf payload {sub!r} is not a lifting tree")
        clash = all_vars(sub) & acc
        if clash:
            raise VariableClash(f"flattening reuses {sorted(clash)} already on the path")
        return sub
    assert isinstance(obj, LiftedNode)
    acc = acc | {obj.var}
    return TreeNode(obj.var, _flatten_tree(obj.zero, acc), _flatten_tree(obj.one, acc))


def flatten_family(obj: Lifted, family: Mapping[Assignment, Lifted]) -> Lifted:
    """The let-shape operation: stick a lifted object under each listed path, then flatten."""
    tagged = compose(obj, {a: Sub(sub) for a, sub in family.items()}, family.keys())
    return flatten(tagged)


def graft_tree_family(t: LiftingTree, family: Mapping[Assignment, LiftingTree]) -> LiftingTree:
    """Result tree of flatten_family on trees alone."""
    base = const(t, EMPTY_TREE)
    tagged = compose(base, dict(family), family.keys())
    return flatten_tree(tagged)


def graft(t: LiftingTree, a: Assignment, r: LiftingTree) -> LiftingTree:
    """t with a copy of r grafted at every path extending a (t graft_a r)."""
    ext = extending_paths(t, a)
    return graft_tree_family(t, {p: r for p in ext})


def graft_obj(obj: Lifted, a: Assignment, r: LiftingTree) -> Lifted:
    """Each leaf payload at a path extending a is duplicated across a copy of r."""
    ext = extending_paths(obj.tree(), a)
    family = {p: const(r, lookup(obj, p)) for p in ext}
    return flatten_family(obj, family)


# ---------------------------------------------------------------------------
# JSON form


def tree_to_json(t: LiftingTree) -> Any:
    if isinstance(t, TreeLeaf):
        return {"leaf": None}
    assert isinstance(t, TreeNode)
    return {"var": t.var, "zero": tree_to_json(t.zero), "one": tree_to_json(t.one)}


def tree_from_json(data: Any) -> LiftingTree:
    if "leaf" in data:
        return EMPTY_TREE
    return TreeNode(data["var"], tree_from_json(data["zero"]), tree_from_json(data["one"]))


def lifted_to_json(obj: Lifted, leaf_to_json: Callable[[Any], Any]) -> Any:
    if isinstance(obj, LiftedLeaf):
        return {"leaf": leaf_to_json(obj.value)}
    assert isinstance(obj, LiftedNode)
    return {
        "var": obj.var,
        "zero": lifted_to_json(obj.zero, leaf_to_json),
        "one": lifted_to_json(obj.one, leaf_to_json),
    }


def lifted_from_json(data: Any, leaf_from_json: Callable[[Any], Any]) -> Lifted:
    if "leaf" in data:
        return LiftedLeaf(leaf_from_json(data["leaf"]))
    return LiftedNode(
        data["var"],
        lifted_from_json(data["zero"], leaf_from_json),
        lifted_from_json(data["one"], leaf_from_json),
    )
