"""Big-step evaluation of configurations.

A left configuration (circuit, branch, term) evaluates to a right
configuration (circuit, lifted value); the circuit grows as a side effect.
Divergence is approximated by a fuel budget: the calculus has no recursion,
so fuel exhaustion never occurs for well-typed programs at sane budgets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import (
    BoxedCircuit,
    Circuit,
    DEFAULT_GATES,
    FreshLabels,
    GateSet,
    LabelContext,
    MType,
    MValue,
    append,
    fresh_labels_for,
)
from .errors import CircuitError, VariableClash
from .syntax import (
    App,
    Apply,
    Box,
    Boxed,
    Force,
    Lam,
    Let,
    LetPair,
    LiftV,
    Pair,
    Return,
    Term,
    Var,
    substitute,
)
from .trees import (
    Assignment,
    EMPTY_ASSIGNMENT,
    Lifted,
    compose,
    flatten_family,
    from_map,
    leaf,
    lookup,
    map_leaves,
    path_set,
)
from .typecheck import mvalue_to_value, value_to_mvalue

DEFAULT_FUEL = 10**6


@dataclass(frozen=True)
class LeftConfig:
    circuit: Circuit
    branch: Assignment
    term: Term

    def __str__(self) -> str:
        return f"[{self.circuit.instructions and '…' or 'input'}, {self.branch}, {self.term!r}]"


@dataclass(frozen=True)
class RightConfig:
    circuit: Circuit
    value: Lifted  # of Value


@dataclass(frozen=True)
class Done:
    config: RightConfig


@dataclass(frozen=True)
class FuelExhausted:
    pass


@dataclass(frozen=True)
class Stuck:
    reason: str
    config: LeftConfig


EvalOutcome = Done | FuelExhausted | Stuck


@dataclass
class EvalEnv:
    """Mutable per-evaluation state: fuel, fresh-name counters, rng seed.

    The lifted-variable counter and seed are reserved (the core rules draw
    lifted names from the program and randomness lives in the simulator).
    """

    fuel: int = DEFAULT_FUEL
    labels: FreshLabels = field(default_factory=FreshLabels)
    lifted_var_counter: int = 0
    seed: int | None = None
    gateset: GateSet = DEFAULT_GATES
    mutate_skip_let_flatten: bool = False
    findings: list[str] = field(default_factory=list)

    def fresh_lifted_var(self) -> str:
        name = f"#{self.lifted_var_counter}"
        self.lifted_var_counter += 1
        return name


def freshlabels(env: EvalEnv, t: MType) -> tuple[LabelContext, MValue]:
    """(Q, tuple) with Q |= tuple : t, drawn from the evaluation's label counter."""
    return fresh_labels_for(t, env.labels)


def eval_config(cfg: LeftConfig, env: EvalEnv) -> EvalOutcome:
    if env.fuel <= 0:
        return FuelExhausted()
    env.fuel -= 1
    m = cfg.term

    if isinstance(m, Return):
        return Done(RightConfig(cfg.circuit, leaf(m.value)))

    if isinstance(m, App):
        if not isinstance(m.fn, Lam):
            return Stuck("AppNonLambda", cfg)
        body = substitute(m.fn.body, m.arg, m.fn.var)
        return eval_config(LeftConfig(cfg.circuit, cfg.branch, body), env)

    if isinstance(m, LetPair):
        if not isinstance(m.value, Pair):
            return Stuck("DestNonPair", cfg)
        body = substitute(m.body, m.value.left, m.var1)
        body = substitute(body, m.value.right, m.var2)
        return eval_config(LeftConfig(cfg.circuit, cfg.branch, body), env)

    if isinstance(m, Force):
        if not isinstance(m.value, LiftV):
            return Stuck("ForceNonLift", cfg)
        return eval_config(LeftConfig(cfg.circuit, cfg.branch, m.value.body), env)

    if isinstance(m, Box):
        if not isinstance(m.value, LiftV):
            return Stuck("BoxNonLift", cfg)
        q, in_tuple = freshlabels(env, m.mtype)
        sandbox_term = Let(
            "#box",
            m.value.body,
            leaf(App(Var("#box"), mvalue_to_value(in_tuple))),
        )
        outcome = eval_config(LeftConfig(Circuit(q), EMPTY_ASSIGNMENT, sandbox_term), env)
        if isinstance(outcome, (FuelExhausted, Stuck)):
            return outcome
        inner = outcome.config
        out_tuples = {}
        for p in path_set(inner.value.tree()):
            mv = value_to_mvalue(lookup(inner.value, p))
            if mv is None:
                return Stuck("BoxResultNotMValue", cfg)
            out_tuples[p] = mv
        boxed = BoxedCircuit(in_tuple, inner.circuit, from_map(inner.value.tree(), out_tuples))
        return Done(RightConfig(cfg.circuit, leaf(Boxed(boxed))))

    if isinstance(m, Apply):
        if not isinstance(m.boxed, Boxed):
            return Stuck("ApplyNonBoxed", cfg)
        target = value_to_mvalue(m.arg)
        if target is None:
            return Stuck("ApplyTargetNotLabels", cfg)
        try:
            circuit, out_tuples = append(
                cfg.circuit, cfg.branch, target, m.boxed.boxed,
                list(m.vars), env.gateset, env.labels,
            )
        except CircuitError as exc:
            return Stuck(f"AppendPrecondition: {exc}", cfg)
        return Done(RightConfig(circuit, map_leaves(out_tuples, mvalue_to_value)))

    if isinstance(m, Let):
        bound = eval_config(LeftConfig(cfg.circuit, cfg.branch, m.bound), env)
        if isinstance(bound, (FuelExhausted, Stuck)):
            return bound
        circuit = bound.config.circuit
        phi = bound.config.value
        if m.branches.tree() != phi.tree():
            return Stuck("LetBranchMismatch", cfg)
        results: dict[Assignment, Lifted] = {}
        for p in path_set(phi.tree()):
            branch_term = substitute(lookup(m.branches, p), lookup(phi, p), m.var)
            mark = len(circuit.instructions)
            sub = eval_config(LeftConfig(circuit, cfg.branch.union(p), branch_term), env)
            if isinstance(sub, (FuelExhausted, Stuck)):
                return sub
            circuit = sub.config.circuit
            full_branch = cfg.branch.union(p)
            for ins in circuit.instructions[mark:]:
                if not ins.cond.extends(full_branch):
                    env.findings.append(
                        f"branch-independence: instruction `{ins}` added on branch {full_branch}"
                    )
            results[p] = sub.config.value
        if env.mutate_skip_let_flatten:
            first = {p: lookup(r, path_set(r.tree())[0]) for p, r in results.items()}
            value = compose(phi, first, first.keys())
            return Done(RightConfig(circuit, value))
        try:
            value = flatten_family(phi, results)
        except VariableClash:
            return Stuck("FlattenClash", cfg)
        return Done(RightConfig(circuit, value))

    raise TypeError(f"not a term: {m!r}")


def run_closed(m: Term, env: EvalEnv | None = None) -> EvalOutcome:
    """Evaluate a closed program from the empty circuit on the empty branch."""
    return eval_config(LeftConfig(Circuit(LabelContext()), EMPTY_ASSIGNMENT, m), env or EvalEnv())
