"""Benchmark generation and the two SAT-based baseline methods.

Circuit instances: a pseudorandom combinational circuit is encoded into CNF
(gate-consistency clauses); the block to take out is the single widest
clause falsified by a chosen output vector, the quantified variables are the
internal and output signals, and the free variables are the circuit inputs.
A solution's clauses then block input cubes: an input falsifying the
solution can only drive the circuit to the chosen output vector.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .formula import Assignment, EcnfProblem, Lits, clause_satisfied
from .satcore import sat_solve
from .solver import SolverConfig, solve_pqe


@dataclass(frozen=True)
class Gate:
    out: int
    op: str  # AND | OR | NOT | XOR
    ins: Tuple[int, ...]


@dataclass(frozen=True)
class Circuit:
    inputs: Tuple[int, ...]
    gates: Tuple[Gate, ...]
    outputs: Tuple[int, ...]

    def internal_vars(self) -> Tuple[int, ...]:
        outs = set(self.outputs)
        return tuple(g.out for g in self.gates if g.out not in outs)


@dataclass
class PqeInstance:
    problem: EcnfProblem
    meta: Dict[str, object] = field(default_factory=dict)


_OPS = ("AND", "OR", "NOT", "XOR")


def gen_circuit(seed: int, n_inputs: int, n_gates: int) -> Circuit:
    """Deterministic pseudorandom DAG circuit; inputs are wired in first."""
    if n_inputs < 1 or n_gates < 1:
        raise ValueError("need at least one input and one gate")
    rng = random.Random(seed)
    inputs = tuple(range(1, n_inputs + 1))
    unused = list(inputs)
    rng.shuffle(unused)
    signals: List[int] = list(inputs)
    gates: List[Gate] = []
    for i in range(n_gates):
        out = n_inputs + 1 + i
        op = _OPS[rng.randrange(len(_OPS))]
        arity = 1 if op == "NOT" else 2
        ins = []
        for _ in range(arity):
            if unused:
                ins.append(unused.pop())
            else:
                ins.append(signals[rng.randrange(len(signals))])
        gates.append(Gate(out, op, tuple(ins)))
        signals.append(out)
    consumed = {s for g in gates for s in g.ins}
    outputs = tuple(g.out for g in gates if g.out not in consumed)
    return Circuit(inputs, tuple(gates), outputs)


def gate_clauses(gate: Gate) -> Tuple[Lits, ...]:
    g = gate.out
    if gate.op == "NOT":
        (a,) = gate.ins
        return ((-g, -a), (g, a))
    a, b = gate.ins
    if a == b:
        # degenerate two-input gate: a buffer, or constant false for XOR
        if gate.op == "XOR":
            return ((-g,),)
        return ((-g, a), (g, -a))
    if gate.op == "AND":
        return ((-g, a), (-g, b), (g, -a, -b))
    if gate.op == "OR":
        return ((g, -a), (g, -b), (-g, a, b))
    if gate.op == "XOR":
        return ((-g, a, b), (-g, -a, -b), (g, a, -b), (g, -a, b))
    raise ValueError(f"unknown gate op {gate.op}")


def tseitin(circuit: Circuit) -> Tuple[Lits, ...]:
    out: List[Lits] = []
    for gate in circuit.gates:
        out.extend(gate_clauses(gate))
    return tuple(out)


def simulate(circuit: Circuit, inputs: Assignment) -> Dict[int, int]:
    """Evaluate every signal under a total input assignment."""
    val = dict(inputs)
    for g in circuit.gates:
        ins = [val[i] for i in g.ins]
        if g.op == "NOT":
            val[g.out] = 1 - ins[0]
        elif g.op == "AND":
            val[g.out] = ins[0] & ins[1]
        elif g.op == "OR":
            val[g.out] = ins[0] | ins[1]
        else:
            val[g.out] = ins[0] ^ ins[1]
    return val


def output_falsified_clause(circuit: Circuit, z: Assignment) -> Lits:
    """The widest clause falsified exactly by the output vector z."""
    return tuple(-v if z[v] else v for v in circuit.outputs)


def circuit_to_pqe(circuit: Circuit, z: Assignment) -> PqeInstance:
    if set(z) != set(circuit.outputs):
        raise ValueError("output vector must assign every circuit output")
    cz = output_falsified_clause(circuit, z)
    quantified = [g.out for g in circuit.gates]
    problem = EcnfProblem.make(quantified, circuit.inputs, [cz], tseitin(circuit))
    return PqeInstance(
        problem,
        {
            "kind": "circuit",
            "inputs": len(circuit.inputs),
            "gates": len(circuit.gates),
            "z": dict(z),
            "circuit": circuit,
            "det": True,
        },
    )


def drop_clauses(inst: PqeInstance, fraction: float, seed: int) -> PqeInstance:
    """Remove a fraction of the second block, making the behaviour relational."""
    if not 0 <= fraction < 1:
        raise ValueError("fraction must be in [0, 1)")
    n_drop = int(fraction * len(inst.problem.f2))
    if n_drop == 0:
        return inst
    rng = random.Random(seed)
    idx = set(rng.sample(range(len(inst.problem.f2)), n_drop))
    f2 = tuple(c for i, c in enumerate(inst.problem.f2) if i not in idx)
    problem = EcnfProblem.make(
        inst.problem.x_vars, inst.problem.y_vars, inst.problem.f1, f2
    )
    meta = dict(inst.meta)
    meta["det"] = False
    meta["dropped"] = n_drop
    return PqeInstance(problem, meta)


def sat_reduction_instance(clauses: Sequence[Lits], x: Assignment) -> PqeInstance:
    """Split a CNF by a full assignment; solving decides its satisfiability."""
    all_vars = {abs(l) for c in clauses for l in c}
    if not all_vars <= set(x):
        raise ValueError("the assignment must cover every variable")
    f1 = [c for c in clauses if clause_satisfied(c, x)]
    f2 = [c for c in clauses if not clause_satisfied(c, x)]
    problem = EcnfProblem.make(sorted(all_vars), (), f1, f2)
    return PqeInstance(problem, {"kind": "satred", "assignment": dict(x)})


def pqe_sat_verdict(clauses: Sequence[Lits], x: Assignment, config=None) -> bool:
    """Satisfiability of the CNF via the elimination engine."""
    inst = sat_reduction_instance(clauses, x)
    res = solve_pqe(inst.problem, config or SolverConfig())
    return all(len(c) > 0 for c in res.f1_star)


class Inapplicable:
    """Marker: the core-lifting method met a satisfiable lift query."""

    def __repr__(self):
        return "INAPPLICABLE"


INAPPLICABLE = Inapplicable()


def _circuit_parts(inst: PqeInstance):
    if inst.meta.get("kind") != "circuit":
        raise ValueError("baseline methods run on circuit instances")
    if len(inst.problem.f1) != 1:
        raise ValueError("expected a single output-vector clause")
    cz = inst.problem.f1[0]
    u_z = tuple((-l,) for l in cz)
    return cz, u_z, inst.problem.f2


def method1_blocking(
    inst: PqeInstance,
    clause_budget: int = 1000,
    sat_max_conflicts: Optional[int] = None,
) -> List[Lits]:
    """Enumerate-and-block: shrink each witness input, block its cube.

    A literal is dropped only while the partial assignment (shrunk inputs
    plus the witness's internal and output values) still satisfies every
    clause on its own, so every extension of the kept cube reaches the same
    output vector.
    """
    cz, u_z, f2 = _circuit_parts(inst)
    inputs = sorted(inst.problem.y_vars)
    g: List[Lits] = []
    while len(g) < clause_budget:
        base = list(f2) + list(u_z) + g
        res = sat_solve(base, max_conflicts=sat_max_conflicts)
        if not res.satisfiable:
            return g
        partial = dict(res.model)
        for v in inputs:
            saved = partial.pop(v, None)
            if saved is None:
                continue  # input not mentioned by any clause
            if not all(clause_satisfied(c, partial) for c in base):
                partial[v] = saved
        cube = {v: partial[v] for v in inputs if v in partial}
        g.append(tuple(-v if cube[v] else v for v in sorted(cube)))
    return g


def method2_corelift(
    inst: PqeInstance,
    clause_budget: int = 1000,
    sat_max_conflicts: Optional[int] = None,
):
    """Enumerate-and-lift via unsatisfiable cores over the input literals.

    Works only when each input drives a unique output vector; otherwise the
    lift query is satisfiable and the method reports itself inapplicable.
    """
    cz, u_z, f2 = _circuit_parts(inst)
    inputs = sorted(inst.problem.y_vars)
    g: List[Lits] = []
    while len(g) < clause_budget:
        res = sat_solve(list(f2) + list(u_z) + g, max_conflicts=sat_max_conflicts)
        if not res.satisfiable:
            return g
        assumptions = [v if res.model.get(v, 0) else -v for v in inputs]
        lift = sat_solve(list(f2) + g + [cz], assumptions, max_conflicts=sat_max_conflicts)
        if lift.satisfiable:
            return INAPPLICABLE
        core = sorted(lift.core, key=abs)
        g.append(tuple(-l for l in core))
    return g


def pqe_blocking(inst: PqeInstance, config: Optional[SolverConfig] = None) -> List[Lits]:
    """The engine's answer for a circuit instance: input-cube clauses."""
    res = solve_pqe(inst.problem, config or SolverConfig())
    return list(res.f1_star)


def blocked_inputs(circuit: Circuit, g: Sequence[Lits]) -> frozenset:
    """All total input vectors falsifying at least one clause of g."""
    n = len(circuit.inputs)
    out = set()
    for bits in range(1 << n):
        x = {v: (bits >> i) & 1 for i, v in enumerate(circuit.inputs)}
        if any(not clause_satisfied(c, x) and all(abs(l) in x for l in c) for c in g):
            out.add(tuple(x[v] for v in circuit.inputs))
    return frozenset(out)


def producing_inputs(circuit: Circuit, z: Assignment) -> frozenset:
    """All total input vectors the circuit drives to the output vector z."""
    n = len(circuit.inputs)
    out = set()
    for bits in range(1 << n):
        x = {v: (bits >> i) & 1 for i, v in enumerate(circuit.inputs)}
        val = simulate(circuit, x)
        if all(val[v] == z[v] for v in circuit.outputs):
            out.add(tuple(x[v] for v in circuit.inputs))
    return frozenset(out)


def manifest_line(idx: int, seed: int, inputs: int, gates: int, det: bool, path: str) -> str:
    return f"{idx} {seed} {inputs} {gates} {'det' if det else 'nondet'} {path}"
