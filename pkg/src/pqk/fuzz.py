"""Metatheory fuzzing: random well-typed closed programs and the executable
subject-reduction / progress checks.

Generation is top-down and type-directed: a resource map of typed variables
must be consumed exactly, so every emitted program is accepted by the checker
(asserted after generation).  A small library of seed boxed circuits makes
apply, box and multi-branch lets reachable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .circuit import DEFAULT_GATES, GateSet, M_QUBIT, M_UNIT
from .errors import PqkError, TypeCheckError
from .interp import Done, EvalEnv, FuelExhausted, Stuck, run_closed
from .parser import boxed_from_circuit, parse_circuit_text
from .syntax import (
    App,
    Apply,
    ArrowType,
    BIT_TYPE,
    BangType,
    Box,
    Boxed,
    CircType,
    Force,
    Lam,
    Let,
    LetPair,
    LiftV,
    Pair,
    PqkType,
    QUBIT_TYPE,
    Return,
    TensorType,
    Term,
    UNIT_TYPE,
    Unit,
    Value,
    Var,
    embed_mtype,
    format_term,
    is_parameter,
    substitute,
)
from .trees import (
    EMPTY_TREE,
    Lifted,
    LiftedNode,
    LiftingTree,
    TreeNode,
    all_vars,
    flatten_family,
    from_map,
    graft_tree_family,
    leaf,
    leaves,
    lookup,
    map_leaves,
    path_set,
)
from .typecheck import (
    Checker,
    EMPTY_TYPING_CONTEXT,
    check_closed_term,
    typecheck_closed_right_config,
)

SEED_CIRCUITS = {
    "INIT": "input(); Init0() -> q;",
    "HAD": "input(l:Qubit); H(l) -> l2;",
    "MEASD": "input(l:Qubit); Meas(l) -> b; Discard(b) -> *;",
    "ML": "input(l:Qubit); Meas(l) -> b; lift(b) => u;",
    "ONEWAY": "input(l:Qubit, k:Qubit); Meas(l) -> b; lift(b) => u; (u = 1) ? Meas(k) -> m;",
}


def seed_boxes() -> dict[str, Boxed]:
    return {
        name: Boxed(boxed_from_circuit(parse_circuit_text(text)))
        for name, text in SEED_CIRCUITS.items()
    }


DEFAULT_WEIGHTS = {
    "finish": 1.0,
    "let_apply": 2.5,
    "let_general": 1.0,
    "app": 1.0,
    "force": 0.7,
    "box": 0.7,
    "lam": 0.9,
    "call": 2.0,
}


@dataclass
class GenConfig:
    seed: int = 0
    max_depth: int = 6
    max_tree_depth: int = 3
    gateset: GateSet = DEFAULT_GATES
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))


@dataclass
class Finding:
    program: str
    prop: str
    diagnostic: str


class GenerationBudgetExceeded(PqkError):
    pass


@dataclass
class _GenOut:
    term: Term
    tree: LiftingTree
    type: Lifted  # of PqkType


class Generator:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.boxes = seed_boxes()
        self.var_n = 0
        self.lifted_n = 0

    def fresh_var(self) -> str:
        self.var_n += 1
        return f"x{self.var_n}"

    def fresh_lifted(self) -> str:
        self.lifted_n += 1
        return f"g{self.lifted_n}"

    def gen_closed(self, depth: int) -> Term:
        return self.gen_term({}, depth).term

    # -- core recursion

    def gen_term(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        if depth <= 0:
            return self.finish(res)
        moves = ["finish", "let_general", "app", "let_apply", "box", "lam"]
        if not any(not is_parameter(t) for t in res.values()):
            moves.append("force")
        if self._callable_arrows(res):
            moves.append("call")
        weights = [self.cfg.weights.get(m, 1.0) for m in moves]
        move = self.rng.choices(moves, weights)[0]
        if move == "finish":
            return self.finish(res)
        if move == "let_apply":
            return self.gen_let_apply(res, depth)
        if move == "let_general":
            return self.gen_let_general(res, depth)
        if move == "app":
            return self.gen_app(res, depth)
        if move == "force":
            return self.gen_force(res, depth)
        if move == "lam":
            return self.gen_lam_stmt(res, depth)
        if move == "call":
            return self.gen_call_stmt(res, depth)
        return self.gen_box_stmt(res, depth)

    def finish(self, res: dict[str, PqkType]) -> _GenOut:
        value, ty = self.pack(res)
        return _GenOut(Return(value), EMPTY_TREE, leaf(ty))

    def pack(self, res: dict[str, PqkType]) -> tuple[Value, PqkType]:
        names = sorted(res)
        self.rng.shuffle(names)
        if not names:
            choice = self.rng.randrange(4)
            if choice == 0:
                name = self.rng.choice(sorted(self.boxes))
                box = self.boxes[name]
                return box, self._box_type(box)
            if choice == 1:
                return LiftV(Return(Unit())), BangType(leaf(UNIT_TYPE))
            return Unit(), UNIT_TYPE
        value: Value = Var(names[-1])
        ty = res[names[-1]]
        for name in reversed(names[:-1]):
            value = Pair(Var(name), value)
            ty = TensorType(res[name], ty)
        return value, ty

    def _box_type(self, box: Boxed) -> PqkType:
        ty, _ = Checker(self.cfg.gateset).check_value(EMPTY_TYPING_CONTEXT, box)
        return ty

    def _qubit_vars(self, res: dict[str, PqkType]) -> list[str]:
        return sorted(n for n, t in res.items() if t == QUBIT_TYPE)

    def _split(self, res: dict[str, PqkType]) -> tuple[dict, dict]:
        left, right = {}, {}
        for name, ty in res.items():
            (left if self.rng.random() < 0.5 else right)[name] = ty
        return left, right

    # -- statements under a let

    def gen_let_apply(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        rng = self.rng
        qubits = self._qubit_vars(res)
        circ_vars = sorted(
            n for n, t in res.items()
            if isinstance(t, CircType) and t.in_type == M_QUBIT and not all_vars(t.tree)
        )
        options = ["INIT"]
        if qubits:
            options += ["HAD", "MEASD", "ML", "ML"]
            if circ_vars:
                options += ["varcirc", "varcirc"]
        if len(qubits) >= 2:
            options += ["ONEWAY"]
        kind = rng.choice(options)
        consumed: dict[str, PqkType] = {}
        if kind == "INIT":
            stmt: Term = Apply((), self.boxes["INIT"], Unit())
            tree: LiftingTree = EMPTY_TREE
            ty: Lifted = leaf(QUBIT_TYPE)
        elif kind == "varcirc":
            cname = rng.choice(circ_vars)
            target = rng.choice(qubits)
            consumed = {cname: res[cname], target: QUBIT_TYPE}
            stmt = Apply((), Var(cname), Var(target))
            tree = EMPTY_TREE
            ty = map_leaves(res[cname].out, embed_mtype)
        elif kind in ("HAD", "MEASD"):
            target = rng.choice(qubits)
            consumed = {target: QUBIT_TYPE}
            stmt = Apply((), self.boxes[kind], Var(target))
            tree = EMPTY_TREE
            ty = leaf(QUBIT_TYPE if kind == "HAD" else UNIT_TYPE)
        elif kind == "ML":
            target = rng.choice(qubits)
            consumed = {target: QUBIT_TYPE}
            var = self.fresh_lifted()
            stmt = Apply((var,), self.boxes["ML"], Var(target))
            tree = TreeNode(var, EMPTY_TREE, EMPTY_TREE)
            ty = LiftedNode(var, leaf(UNIT_TYPE), leaf(UNIT_TYPE))
        else:  # ONEWAY
            t1, t2 = rng.sample(qubits, 2)
            consumed = {t1: QUBIT_TYPE, t2: QUBIT_TYPE}
            var = self.fresh_lifted()
            stmt = Apply((var,), self.boxes["ONEWAY"], Pair(Var(t1), Var(t2)))
            tree = TreeNode(var, EMPTY_TREE, EMPTY_TREE)
            ty = LiftedNode(var, leaf(QUBIT_TYPE), leaf(BIT_TYPE))
        rest = {n: t for n, t in res.items() if n not in consumed}
        return self._wrap_let(stmt, tree, ty, rest, depth)

    def gen_let_general(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        left, right = self._split(res)
        bound = self.gen_term(left, depth - 1)
        return self._wrap_let(bound.term, bound.tree, bound.type, right, depth)

    def _wrap_let(self, stmt: Term, tree: LiftingTree, ty: Lifted,
                  rest: dict[str, PqkType], depth: int) -> _GenOut:
        x = self.fresh_var()
        branch_terms: dict = {}
        branch_trees: dict = {}
        branch_types: dict = {}
        for p in path_set(tree):
            sub_res = dict(rest)
            sub_res[x] = lookup(ty, p)
            sub = self.gen_term(sub_res, depth - 1)
            branch_terms[p] = sub.term
            branch_trees[p] = sub.tree
            branch_types[p] = sub.type
        mu = from_map(tree, branch_terms)
        out_tree = graft_tree_family(tree, branch_trees)
        out_type = flatten_family(ty, branch_types)
        return _GenOut(Let(x, stmt, mu), out_tree, out_type)

    def gen_app(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        left, right = self._split(res)
        arg, arg_ty = self.pack(left)
        x = self.fresh_var()
        body = self._gen_binder_body(x, arg_ty, right, depth)
        return _GenOut(App(Lam(x, arg_ty, body.term), arg), body.tree, body.type)

    def _gen_binder_body(self, x: str, ty: PqkType, rest: dict[str, PqkType], depth: int) -> _GenOut:
        """Body consuming x : ty plus rest; tensors are destructured first."""
        if isinstance(ty, TensorType) and self.rng.random() < 0.8:
            a, b = self.fresh_var(), self.fresh_var()
            res = dict(rest)
            res[a] = ty.left
            res[b] = ty.right
            inner = self._gen_binder_body2(res, depth)
            return _GenOut(LetPair(a, b, Var(x), inner.term), inner.tree, inner.type)
        res = dict(rest)
        res[x] = ty
        return self.gen_term(res, depth - 1)

    def _gen_binder_body2(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        return self.gen_term(res, depth - 1)

    def gen_force(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        if res and any(not is_parameter(t) for t in res.values()):
            return self.finish(res)
        if res:
            return self.finish(res)
        inner = self.gen_term({}, min(depth - 1, 2))
        return _GenOut(Force(LiftV(inner.term)), inner.tree, inner.type)

    def _callable_arrows(self, res: dict[str, PqkType]) -> list[str]:
        """Arrow-typed resources whose argument we can synthesize right now."""
        out = []
        for name, ty in res.items():
            if not isinstance(ty, ArrowType):
                continue
            if ty.dom == UNIT_TYPE:
                out.append(name)
            elif ty.dom == QUBIT_TYPE and any(
                n != name and t == QUBIT_TYPE for n, t in res.items()
            ):
                out.append(name)
        return sorted(out)

    def gen_lam_stmt(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        """Bind a lambda that may capture linear resources from the context."""
        captured = {}
        rest = {}
        for name, ty in res.items():
            (captured if self.rng.random() < 0.4 else rest)[name] = ty
        y = self.fresh_var()
        dom = self.rng.choice([QUBIT_TYPE, UNIT_TYPE])
        body_res = dict(captured)
        body_res[y] = dom
        body = self.gen_term(body_res, max(depth - 2, 0))
        lam_ty = ArrowType(dom, body.type)
        stmt = Return(Lam(y, dom, body.term))
        return self._wrap_let(stmt, EMPTY_TREE, leaf(lam_ty), rest, depth)

    def gen_call_stmt(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        """Apply an arrow-typed resource variable to a synthesized argument."""
        fname = self.rng.choice(self._callable_arrows(res))
        fty = res[fname]
        assert isinstance(fty, ArrowType)
        consumed = {fname: fty}
        if fty.dom == UNIT_TYPE:
            arg: Value = Unit()
        else:
            qubits = [n for n, t in res.items() if n != fname and t == QUBIT_TYPE]
            target = self.rng.choice(sorted(qubits))
            consumed[target] = QUBIT_TYPE
            arg = Var(target)
        stmt = App(Var(fname), arg)
        rest = {n: t for n, t in res.items() if n not in consumed}
        return self._wrap_let(stmt, fty.cod.tree(), fty.cod, rest, depth)

    def gen_box_stmt(self, res: dict[str, PqkType], depth: int) -> _GenOut:
        y = self.fresh_var()
        if self.rng.random() < 0.5:
            fn = Lam(y, QUBIT_TYPE, Apply((), self.boxes["HAD"], Var(y)))
            stmt: Term = Box(M_QUBIT, LiftV(Return(fn)))
            ty: PqkType = CircType(M_QUBIT, leaf(M_QUBIT))
        else:
            w = self.fresh_lifted()
            inner = Let(
                self.fresh_var(),
                Apply((w,), self.boxes["ML"], Var(y)),
                LiftedNode(w, leaf(Return(Unit())), leaf(Return(Unit()))),
            )
            fn = Lam(y, QUBIT_TYPE, inner)
            stmt = Box(M_QUBIT, LiftV(Return(fn)))
            ty = CircType(M_QUBIT, LiftedNode(w, leaf(M_UNIT), leaf(M_UNIT)))
        return self._wrap_let(stmt, EMPTY_TREE, leaf(ty), dict(res), depth)


# ---------------------------------------------------------------------------
# Corpus generation


def gen_well_typed(cfg: GenConfig) -> Term:
    """One closed, checker-accepted program; the post-check is asserted."""
    rng = random.Random(cfg.seed)
    gen = Generator(cfg, rng)
    term = gen.gen_closed(cfg.max_depth)
    check_closed_term(term, cfg.gateset)
    return term


def gen_corpus(cfg: GenConfig, count: int) -> list[Term]:
    rng = random.Random(cfg.seed)
    corpus = []
    for _ in range(count):
        gen = Generator(cfg, rng)
        term = gen.gen_closed(cfg.max_depth)
        check_closed_term(term, cfg.gateset)
        corpus.append(term)
    return corpus


def count_lifting_applies(term) -> int:
    """Number of apply occurrences naming at least one lifted variable."""
    n = 0

    def walk(x):
        nonlocal n
        if isinstance(x, Apply):
            if x.vars:
                n += 1
            walk(x.boxed)
            walk(x.arg)
        elif isinstance(x, (Return, Force, Box)):
            walk(x.value)
        elif isinstance(x, App):
            walk(x.fn)
            walk(x.arg)
        elif isinstance(x, Let):
            walk(x.bound)
            for m in leaves(x.branches):
                walk(m)
        elif isinstance(x, LetPair):
            walk(x.value)
            walk(x.body)
        elif isinstance(x, Lam):
            walk(x.body)
        elif isinstance(x, LiftV):
            walk(x.body)
        elif isinstance(x, Pair):
            walk(x.left)
            walk(x.right)

    walk(term)
    return n


# ---------------------------------------------------------------------------
# Property checks


def check_sr(term: Term, gateset: GateSet = DEFAULT_GATES,
             env_factory=None, shrink: bool = True) -> Finding | None:
    """Subject reduction: a Done result re-typechecks at the static typing."""
    expected = check_closed_term(term, gateset)
    env = env_factory() if env_factory else EvalEnv(gateset=gateset)
    outcome = run_closed(term, env)
    if not isinstance(outcome, Done):
        return None  # FuelExhausted is not an SR counterexample; Stuck is progress's
    report = typecheck_closed_right_config(outcome.config.circuit, outcome.config.value,
                                           expected, gateset)
    if report.ok:
        return None
    if shrink:
        term = shrink_finding(term, lambda t: _sr_violated(t, gateset, env_factory))
    return Finding(format_term(term), "subject-reduction", "; ".join(report.failures))


def _sr_violated(term: Term, gateset, env_factory) -> bool:
    try:
        expected = check_closed_term(term, gateset)
    except TypeCheckError:
        return False
    env = env_factory() if env_factory else EvalEnv(gateset=gateset)
    outcome = run_closed(term, env)
    if not isinstance(outcome, Done):
        return False
    return not typecheck_closed_right_config(outcome.config.circuit, outcome.config.value,
                                             expected, gateset).ok


def check_progress(term: Term, fuel: int = 10**6, gateset: GateSet = DEFAULT_GATES) -> Finding | None:
    """Progress: evaluation of a well-typed program is never Stuck."""
    check_closed_term(term, gateset)
    outcome = run_closed(term, EvalEnv(fuel=fuel, gateset=gateset))
    if not isinstance(outcome, Stuck):
        return None
    term = shrink_finding(term, lambda t: _progress_violated(t, fuel, gateset))
    outcome2 = run_closed(term, EvalEnv(fuel=fuel, gateset=gateset))
    reason = outcome2.reason if isinstance(outcome2, Stuck) else outcome.reason
    return Finding(format_term(term), "progress", f"stuck: {reason}")


def _progress_violated(term: Term, fuel: int, gateset) -> bool:
    try:
        check_closed_term(term, gateset)
    except TypeCheckError:
        return False
    return isinstance(run_closed(term, EvalEnv(fuel=fuel, gateset=gateset)), Stuck)


# ---------------------------------------------------------------------------
# Shrinking


def shrink_candidates(term: Term):
    """Structural reductions tried by the shrinker (candidates may be ill-typed)."""
    if isinstance(term, Let):
        yield term.bound
        for m in leaves(term.branches):
            yield m
    if isinstance(term, App) and isinstance(term.fn, Lam):
        yield substitute(term.fn.body, term.arg, term.fn.var)
    if isinstance(term, Force) and isinstance(term.value, LiftV):
        yield term.value.body
    if isinstance(term, LetPair):
        yield term.body
    yield Return(Unit())


def shrink_finding(term: Term, still_fails, max_steps: int = 200) -> Term:
    """Greedy shrink: take any candidate that preserves the violation."""
    steps = 0
    changed = True
    while changed and steps < max_steps:
        changed = False
        for cand in shrink_candidates(term):
            steps += 1
            if cand != term and still_fails(cand):
                term = cand
                changed = True
                break
    return term


# ---------------------------------------------------------------------------
# Harness


@dataclass
class FuzzReport:
    count: int
    sr_findings: list[Finding]
    progress_findings: list[Finding]
    fuel_exhausted: int
    lifting_apply_fraction: float

    def ok(self) -> bool:
        return not self.sr_findings and not self.progress_findings


def run_fuzz(cfg: GenConfig, count: int, fuel: int = 10**6) -> FuzzReport:
    corpus = gen_corpus(cfg, count)
    sr: list[Finding] = []
    progress: list[Finding] = []
    exhausted = 0
    with_lifts = 0
    for term in corpus:
        if count_lifting_applies(term) > 0:
            with_lifts += 1
        outcome = run_closed(term, EvalEnv(fuel=fuel, gateset=cfg.gateset))
        if isinstance(outcome, FuelExhausted):
            exhausted += 1
        finding = check_sr(term, cfg.gateset, env_factory=lambda: EvalEnv(fuel=fuel, gateset=cfg.gateset))
        if finding:
            sr.append(finding)
        finding = check_progress(term, fuel, cfg.gateset)
        if finding:
            progress.append(finding)
    return FuzzReport(count, sr, progress, exhausted, with_lifts / max(count, 1))
