"""Clauses, clause stores and partial assignments for quantified CNF.

Variables are positive ints, literals are signed ints (DIMACS style).
A partial assignment is a plain ``dict`` mapping var -> 0/1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple


Assignment = Dict[int, int]
Lits = Tuple[int, ...]


class PqeError(Exception):
    """Base class for errors raised by this package."""


class TautologyError(PqeError):
    """A clause contains both polarities of some variable."""


class NotResolvable(PqeError):
    """Two clauses (or assignments) do not clash on exactly one variable."""


class _Satisfied:
    def __repr__(self):
        return "SATISFIED"


#: Returned by cofactor_clause when the assignment satisfies the clause.
SATISFIED = _Satisfied()


def canonical_lits(lits: Iterable[int]) -> Lits:
    """Sort by variable, drop duplicate literals, reject tautologies and 0."""
    seen: Dict[int, int] = {}
    for lit in lits:
        if lit == 0:
            raise ValueError("literal 0 is not allowed")
        var = abs(lit)
        prev = seen.get(var)
        if prev is None:
            seen[var] = lit
        elif prev != lit:
            raise TautologyError(f"clause contains both polarities of {var}")
    return tuple(seen[v] for v in sorted(seen))


def lit_truth(lit: int, asg: Assignment) -> Optional[int]:
    """1 if satisfied, 0 if falsified, None if the variable is unassigned."""
    val = asg.get(abs(lit))
    if val is None:
        return None
    return 1 if (val == 1) == (lit > 0) else 0


def satisfying_value(lit: int) -> int:
    return 1 if lit > 0 else 0


def clause_satisfied(lits: Sequence[int], asg: Assignment) -> bool:
    return any(lit_truth(l, asg) == 1 for l in lits)


def clause_falsified(lits: Sequence[int], asg: Assignment) -> bool:
    return all(lit_truth(l, asg) == 0 for l in lits)


def unit_literal(lits: Sequence[int], asg: Assignment) -> Optional[int]:
    """The single unassigned literal if all others are falsified, else None."""
    free = None
    for l in lits:
        t = lit_truth(l, asg)
        if t == 1:
            return None
        if t is None:
            if free is not None:
                return None
            free = l
    return free


def cofactor_clause(c: "Clause | Sequence[int]", q: Assignment):
    """Clause under q: SATISFIED, or the clause with falsified literals removed."""
    lits = c.lits if isinstance(c, Clause) else c
    out = []
    for l in lits:
        t = lit_truth(l, q)
        if t == 1:
            return SATISFIED
        if t is None:
            out.append(l)
    return tuple(out)


def falsifying_assignment(lits: Sequence[int]) -> Assignment:
    """The shortest assignment falsifying the clause."""
    return {abs(l): 0 if l > 0 else 1 for l in lits}


def clashing_vars(lits1: Sequence[int], lits2: Sequence[int]) -> Tuple[int, ...]:
    other = set(lits2)
    return tuple(sorted(abs(l) for l in lits1 if -l in other))


def resolve(c1: "Clause | Sequence[int]", c2: "Clause | Sequence[int]", v: int) -> Lits:
    """Resolvent on v; the clauses must clash on exactly v and nothing else."""
    l1 = c1.lits if isinstance(c1, Clause) else tuple(c1)
    l2 = c2.lits if isinstance(c2, Clause) else tuple(c2)
    clash = clashing_vars(l1, l2)
    if clash != (v,):
        raise NotResolvable(f"clash vars {clash}, wanted ({v},)")
    return canonical_lits([l for l in l1 if abs(l) != v] + [l for l in l2 if abs(l) != v])


def resolvable_on(lits1: Sequence[int], lits2: Sequence[int], v: int) -> bool:
    clash = clashing_vars(lits1, lits2)
    return clash == (v,)


def assignments_compatible(q1: Assignment, q2: Assignment) -> bool:
    for var, val in q1.items():
        if q2.get(var, val) != val:
            return False
    return True


def assignment_subsumes(q: Assignment, r: Assignment) -> bool:
    """True iff every assignment of q is present in r."""
    return all(r.get(var) == val for var, val in q.items())


def assignments_resolvable(q1: Assignment, q2: Assignment) -> Optional[int]:
    """The unique variable assigned opposite values, if exactly one exists."""
    clash = [var for var, val in q1.items() if q2.get(var, val) != val]
    return clash[0] if len(clash) == 1 else None


def resolve_assignments(q1: Assignment, q2: Assignment, v: int) -> Assignment:
    if assignments_resolvable(q1, q2) != v:
        raise NotResolvable(f"assignments do not clash exactly on {v}")
    out = {var: val for var, val in q1.items() if var != v}
    out.update((var, val) for var, val in q2.items() if var != v)
    return out


@dataclass(frozen=True)
class Clause:
    """Canonicalized clause with a stable id and an origin marker."""

    id: int
    lits: Lits
    origin: str  # f1-initial | f2-initial | derived-f1 | derived-f2

    def vars(self) -> Tuple[int, ...]:
        return tuple(abs(l) for l in self.lits)

    def lit_on(self, v: int) -> Optional[int]:
        for l in self.lits:
            if abs(l) == v:
                return l
        return None

    def is_f1_side(self) -> bool:
        return self.origin in ("f1-initial", "derived-f1")

    def __len__(self) -> int:
        return len(self.lits)


class ClauseDb:
    """Id-addressed clause store with liveness flags and active-dedup.

    Clauses are never physically removed: D-sequent structure constraints
    keep referring to ids of clauses proved redundant, and those clauses
    may return to the formula when a target level is popped.
    """

    def __init__(self) -> None:
        self._clauses: Dict[int, Clause] = {}
        self._active: Dict[int, bool] = {}
        self._dedup: Dict[Lits, int] = {}  # canonical lits -> active id
        self._any: Dict[Lits, int] = {}  # canonical lits -> last id ever
        self._occ: Dict[int, set] = {}  # literal -> ids containing it
        self._next_id = 1

    def add(self, lits: Iterable[int], origin: str) -> Clause:
        """Insert a clause; a duplicate of an active clause returns the existing one."""
        key = canonical_lits(lits)
        hit = self._dedup.get(key)
        if hit is not None:
            return self._clauses[hit]
        cid = self._next_id
        self._next_id += 1
        clause = Clause(cid, key, origin)
        self._clauses[cid] = clause
        self._active[cid] = True
        self._dedup[key] = cid
        self._any[key] = cid
        for l in key:
            self._occ.setdefault(l, set()).add(cid)
        return clause

    def clause(self, cid: int) -> Clause:
        return self._clauses[cid]

    def is_active(self, cid: int) -> bool:
        return self._active[cid]

    def find_active(self, lits: Iterable[int]) -> Optional[Clause]:
        cid = self._dedup.get(canonical_lits(lits))
        return self._clauses[cid] if cid is not None else None

    def find_any(self, lits: Iterable[int]) -> Optional[Clause]:
        """Match against every stored clause, live or soft-deleted."""
        cid = self._any.get(canonical_lits(lits))
        return self._clauses[cid] if cid is not None else None

    def deactivate(self, cid: int) -> None:
        if not self._active[cid]:
            raise ValueError(f"clause {cid} already inactive")
        self._active[cid] = False
        key = self._clauses[cid].lits
        if self._dedup.get(key) == cid:
            del self._dedup[key]

    def reactivate(self, cid: int) -> None:
        if self._active[cid]:
            raise ValueError(f"clause {cid} already active")
        key = self._clauses[cid].lits
        if key in self._dedup:
            raise ValueError(f"an active duplicate of clause {cid} exists")
        self._active[cid] = True
        self._dedup[key] = cid

    def active_ids(self) -> Tuple[int, ...]:
        return tuple(cid for cid in sorted(self._clauses) if self._active[cid])

    def all_ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self._clauses))

    def occurrences(self, lit: int) -> Tuple[int, ...]:
        """Ids of all clauses (any liveness) containing exactly this literal."""
        return tuple(sorted(self._occ.get(lit, ())))

    def __len__(self) -> int:
        return len(self._clauses)


def is_blocked(db: ClauseDb, c: Clause, v: int, q: Assignment) -> bool:
    """True iff no live unsatisfied clause is resolvable with c on v.

    Clauses clashing with c on a second variable resolve to tautologies and
    never block; soft-deleted clauses are out of the formula in the current
    subspace. Assumes v is unassigned in q and c is not satisfied by q.
    """
    lit = c.lit_on(v)
    if lit is None:
        raise ValueError(f"variable {v} does not occur in clause {c.id}")
    for cid in db.occurrences(-lit):
        if cid == c.id or not db.is_active(cid):
            continue
        other = db.clause(cid)
        if not resolvable_on(c.lits, other.lits, v):
            continue
        if not clause_satisfied(other.lits, q):
            return False
    return True


@dataclass(frozen=True)
class EcnfProblem:
    """An instance of taking f1 out of the quantified conjunction of f1 and f2."""

    x_vars: frozenset
    y_vars: frozenset
    f1: Tuple[Lits, ...]
    f2: Tuple[Lits, ...]

    @classmethod
    def make(
        cls,
        x_vars: Iterable[int],
        y_vars: Iterable[int],
        f1: Iterable[Sequence[int]],
        f2: Iterable[Sequence[int]],
    ) -> "EcnfProblem":
        xs = frozenset(x_vars)
        ys = frozenset(y_vars)
        if xs & ys:
            raise ValueError(f"quantified and free sets overlap: {sorted(xs & ys)}")

        def dedup(block: Iterable[Sequence[int]]) -> Tuple[Lits, ...]:
            out, seen = [], set()
            for lits in block:
                key = canonical_lits(lits)
                if key not in seen:
                    seen.add(key)
                    out.append(key)
            return tuple(out)

        c2 = dedup(f2)
        # A clause present in both blocks belongs to f2; solving the reduced
        # f1 solves the original problem (the clause set f1 ∧ f2 is unchanged).
        f2set = set(c2)
        c1 = tuple(c for c in dedup(f1) if c not in f2set)
        allowed = xs | ys
        for c in c1 + c2:
            for l in c:
                if abs(l) not in allowed:
                    raise ValueError(f"variable {abs(l)} is not declared")
        return cls(xs, ys, c1, c2)

    def is_x_clause(self, lits: Sequence[int]) -> bool:
        return any(abs(l) in self.x_vars for l in lits)

    def all_vars(self) -> Tuple[int, ...]:
        return tuple(sorted(self.x_vars | self.y_vars))
