"""A small CDCL SAT solver with assumption literals and core extraction.

First-UIP learning over two watched literals, static decision order, no
restarts. Just enough solver for the duplicate-recovery check and the
SAT-based baseline methods; under assumptions an unsatisfiable answer
carries a subset of the assumptions whose conjunction with the clauses
is unsatisfiable.

Assumptions are placed as the first decisions, one level each. Learned
clauses are resolvents of input clauses only, so whenever the search finds
an assumption refuted, resolving the refutation back to assumption-level
decisions yields the core.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence

from .formula import PqeError


class ResourceLimit(PqeError):
    """A configured resource budget was exhausted."""


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    model: Optional[Dict[int, int]] = None  # var -> 0/1, total over the cnf vars
    core: Optional[FrozenSet[int]] = None  # subset of the assumption literals


class _Solver:
    def __init__(self, clauses: Sequence[Sequence[int]]):
        self.clauses: List[List[int]] = []
        self.assign: Dict[int, int] = {}
        self.reason: Dict[int, Optional[int]] = {}
        self.level: Dict[int, int] = {}
        self.trail: List[int] = []
        self.level_start: List[int] = [0]
        self.watches: Dict[int, List[int]] = {}
        self.empty_clause = False
        self.units: List[int] = []
        seen = set()
        for c in clauses:
            lits = sorted(set(c), key=abs)
            if any(-l in c for l in lits):
                continue  # tautology constrains nothing
            seen.update(abs(l) for l in lits)
            if not lits:
                self.empty_clause = True
            else:
                self._add_clause(lits)
        self.vars = sorted(seen)

    def _add_clause(self, lits: List[int]) -> int:
        idx = len(self.clauses)
        self.clauses.append(lits)
        if len(lits) == 1:
            self.units.append(idx)
        else:
            for l in lits[:2]:
                self.watches.setdefault(l, []).append(idx)
        return idx

    def _value(self, lit: int) -> Optional[int]:
        v = self.assign.get(abs(lit))
        if v is None:
            return None
        return 1 if (v == 1) == (lit > 0) else 0

    def _assign(self, lit: int, reason: Optional[int]) -> None:
        self.assign[abs(lit)] = 1 if lit > 0 else 0
        self.reason[abs(lit)] = reason
        self.level[abs(lit)] = len(self.level_start) - 1
        self.trail.append(lit)

    def _propagate(self, head: int) -> Optional[int]:
        """Watch-based unit propagation; returns a falsified clause index."""
        while head < len(self.trail):
            lit = self.trail[head]
            head += 1
            watching = self.watches.get(-lit, [])
            i = 0
            while i < len(watching):
                ci = watching[i]
                lits = self.clauses[ci]
                if lits[0] == -lit:
                    lits[0], lits[1] = lits[1], lits[0]
                if self._value(lits[0]) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(lits)):
                    if self._value(lits[k]) != 0:
                        lits[1], lits[k] = lits[k], lits[1]
                        watching[i] = watching[-1]
                        watching.pop()
                        self.watches.setdefault(lits[1], []).append(ci)
                        moved = True
                        break
                if moved:
                    continue
                if self._value(lits[0]) == 0:
                    return ci
                if self._value(lits[0]) is None:
                    self._assign(lits[0], ci)
                i += 1
        return None

    def _analyze(self, conflict: int):
        """First-UIP resolution; returns (asserting lit, other lits, back level)."""
        cur = len(self.level_start) - 1
        others: List[int] = []
        seen = set()
        counter = 0
        lits = list(self.clauses[conflict])
        idx = len(self.trail) - 1
        while True:
            for l in lits:
                v = abs(l)
                if v in seen or self.level[v] == 0:
                    continue
                seen.add(v)
                if self.level[v] == cur:
                    counter += 1
                else:
                    others.append(l)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            uip = self.trail[idx]
            seen.discard(abs(uip))
            idx -= 1
            counter -= 1
            if counter == 0:
                back = max((self.level[abs(l)] for l in others), default=0)
                return -uip, others, back
            lits = [l for l in self.clauses[self.reason[abs(uip)]] if abs(l) != abs(uip)]

    def _backtrack(self, level: int) -> None:
        cut = self.level_start[level + 1]
        for lit in self.trail[cut:]:
            v = abs(lit)
            del self.assign[v], self.reason[v], self.level[v]
        del self.trail[cut:]
        del self.level_start[level + 1 :]

    def _final_core(self, start_lits, assume_set) -> FrozenSet[int]:
        """Resolve falsified literals back to the assumption decisions they used."""
        core = set()
        seen = set()
        stack = list(start_lits)
        while stack:
            l = stack.pop()
            v = abs(l)
            if v in seen:
                continue
            seen.add(v)
            r = self.reason.get(v)
            true_lit = l if self._value(l) == 1 else -l
            if r is not None:
                stack.extend(x for x in self.clauses[r] if abs(x) != v)
            elif true_lit in assume_set:
                core.add(true_lit)
        return frozenset(core)

    def solve(self, assumptions: Sequence[int], max_conflicts: Optional[int]) -> SatResult:
        if self.empty_clause:
            return SatResult(False, core=frozenset())
        for u in self.units:
            lit = self.clauses[u][0]
            if self._value(lit) == 0:
                return SatResult(False, core=frozenset())
            if self._value(lit) is None:
                self._assign(lit, u)
        if self._propagate(0) is not None:
            return SatResult(False, core=frozenset())
        assume_set = set(assumptions)
        avars = {abs(a) for a in assumptions}
        order = [v for v in self.vars if v not in avars]
        conflicts = 0
        while True:
            decision = None
            for a in assumptions:
                val = self._value(a)
                if val == 0:
                    core = self._final_core([a], assume_set) | {a}
                    return SatResult(False, core=frozenset(core))
                if val is None:
                    decision = a
                    break
            if decision is None:
                for v in order:
                    if v not in self.assign:
                        decision = -v  # default polarity 0
                        break
            if decision is None:
                return SatResult(True, model=dict(self.assign))
            self.level_start.append(len(self.trail))
            self._assign(decision, None)
            head = len(self.trail) - 1
            while True:
                ci = self._propagate(head)
                if ci is None:
                    break
                conflicts += 1
                if max_conflicts is not None and conflicts > max_conflicts:
                    raise ResourceLimit(f"SAT conflict budget {max_conflicts} exhausted")
                if all(self.level[abs(l)] == 0 for l in self.clauses[ci]):
                    return SatResult(False, core=frozenset())
                asserting, others, back = self._analyze(ci)
                self._backtrack(back)
                idx = self._add_clause([asserting] + sorted(others, key=lambda l: -self.level[abs(l)]))
                self._assign(asserting, idx)
                head = len(self.trail) - 1


def sat_solve(
    clauses: Sequence[Sequence[int]],
    assumptions: Sequence[int] = (),
    max_conflicts: Optional[int] = None,
) -> SatResult:
    """Decide the CNF under the given assumption literals.

    A satisfiable result carries a total model over the clause variables
    (assumption variables included); an unsatisfiable one carries a core:
    a subset of the assumptions inconsistent with the clauses.
    """
    amap = {}
    for a in assumptions:
        if amap.get(abs(a), a) != a:
            return SatResult(False, core=frozenset({a, -a}))
        amap[abs(a)] = a
    solver = _Solver(clauses)
    res = solver.solve([amap[v] for v in sorted(amap)], max_conflicts)
    if res.satisfiable:
        model = dict(res.model or {})
        for v in solver.vars:
            model.setdefault(v, 0)
        for a in assumptions:
            model.setdefault(abs(a), 1 if a > 0 else 0)
        return SatResult(True, model=model)
    return res
