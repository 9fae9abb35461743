"""The PQE engine: prove the first block's quantified clauses redundant one
at a time, learning D-sequents and clauses along the way.

Search layout
-------------
The trail holds (var, value, reason) entries grouped into decision levels.
Besides ordinary decisions, two kinds of assignment start their own level:
an assignment derived from the current target clause itself (it steers the
search, it is not an implication), and a deactivating assignment derived
from a D-sequent. Level-wise backtracking can therefore undo them cleanly.

While proving one clause redundant the engine may need other clauses proved
first; those secondary targets are tracked by a stack of target levels, one
per unit-clause assignment made while processing a target-derived
assignment (clause-only propagation). A target level records its key clause
and key variable; its pending targets are the live clauses resolvable with
the key on that variable. Clauses proved redundant at a live level are
soft-deleted and restored when the level is popped.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, Union

from . import dsequent as dsq
from .dsequent import DSequent, DSequentStore
from .formula import (
    Assignment,
    Clause,
    ClauseDb,
    EcnfProblem,
    Lits,
    assignment_subsumes,
    clause_falsified,
    clause_satisfied,
    is_blocked,
    resolvable_on,
    resolve,
    satisfying_value,
    unit_literal,
)
from .satcore import ResourceLimit, sat_solve


DECISION = object()  # queue marker for ordinary decisions


@dataclass
class SolverConfig:
    learn_depth_k: int = 0  # -1: learn nothing; 0: bottom-level targets only
    var_order: str = "static"  # or "activity"
    default_polarity: int = 0
    seed: int = 0
    max_conflicts: Optional[int] = None
    max_seconds: Optional[float] = None
    sat_max_conflicts: Optional[int] = None
    check_invariants: bool = False


@dataclass(frozen=True)
class SatTrg:
    var: int
    val: int


@dataclass(frozen=True)
class FalsifiedClause:
    cid: int


@dataclass(frozen=True)
class ConflictInBcpStar:
    cid: int


@dataclass(frozen=True)
class BlockedTrg:
    var: int


@dataclass(frozen=True)
class ActiveDSequent:
    record: DSequent


BacktrackCondition = Union[SatTrg, FalsifiedClause, ConflictInBcpStar, BlockedTrg, ActiveDSequent]


@dataclass(frozen=True)
class NextTarget:
    cid: int


@dataclass(frozen=True)
class PoppedKey:
    dseq: DSequent


@dataclass
class LrnOutcome:
    dseq: Optional[DSequent] = None
    clause: Optional[Clause] = None

    @property
    def is_conflict_clause(self) -> bool:
        return self.dseq is None


@dataclass
class TrailEntry:
    var: int
    val: int
    reason: object  # None: decision; int: clause id; DSequent: deactivation
    level: int
    level_start: bool


@dataclass
class TargetLevel:
    key_clause: int
    key_var: int
    key_pos: int  # trail index of the key variable's assignment
    pending: Tuple[int, ...]  # resolvable partners at creation time
    done: Dict[int, DSequent] = field(default_factory=dict)


@dataclass
class PqeResult:
    f1_star: Tuple[Lits, ...]
    stats: Dict[str, object]


_STAT_KEYS = (
    "decisions",
    "conflicts",
    "dseq_generated",
    "dseq_final",
    "dseq_reused",
    "deactivation_hints",
    "clauses_added_f1",
    "clauses_added_f2",
    "duplicates",
    "consistency_recoveries",
    "sat_calls",
    "max_target_depth",
    "primaries_proved",
)


class Engine:
    """Search state for one problem; drives the whole elimination."""

    def __init__(
        self,
        problem: EcnfProblem,
        config: Optional[SolverConfig] = None,
        on_dsequent: Optional[Callable[[DSequent, tuple], None]] = None,
        trace: Optional[Callable[[str], None]] = None,
    ):
        self.problem = problem
        self.config = config or SolverConfig()
        self.on_dsequent = on_dsequent
        self.trace = trace
        self.x_vars = set(problem.x_vars)
        self.y_vars = set(problem.y_vars)
        self.db = ClauseDb()
        self.f1_ids: Set[int] = set()
        self.f2_ids: Set[int] = set()
        for lits in problem.f1:
            self.f1_ids.add(self.db.add(lits, "f1-initial").id)
        for lits in problem.f2:
            self.f2_ids.add(self.db.add(lits, "f2-initial").id)
        self.store = DSequentStore(self.config.learn_depth_k)
        self.stats: Dict[str, object] = {k: 0 for k in _STAT_KEYS}
        self.activity: Dict[int, float] = {v: 0.0 for v in problem.all_vars()}
        self._act_inc = 1.0
        # search state, reset per proof
        self.assign: Assignment = {}
        self.trail: List[TrailEntry] = []
        self.pos: Dict[int, int] = {}
        self.level_start: List[int] = [0]
        self.queue: List[Tuple[int, int, object]] = []
        self.queued: Set[int] = set()
        self.tlevels: List[TargetLevel] = []
        self.done_global: Dict[int, DSequent] = {}
        self.removed: Set[int] = set()
        self.primary = 0
        self.target = 0
        self._deadline: Optional[float] = None

    # ------------------------------------------------------------------
    # top level
    # ------------------------------------------------------------------

    def solve(self) -> PqeResult:
        t0 = time.monotonic()
        if self.config.max_seconds is not None:
            self._deadline = t0 + self.config.max_seconds
        while True:
            cid = self._next_primary()
            if cid is None:
                break
            self.prove_redundant(cid)
            self.stats["primaries_proved"] += 1
            self._reset_search()
            self.db.deactivate(cid)
            self.removed.add(cid)
        f1_star = tuple(
            self.db.clause(cid).lits
            for cid in sorted(self.f1_ids)
            if self.db.is_active(cid) and not self.problem.is_x_clause(self.db.clause(cid).lits)
        )
        self.stats["wall_time_s"] = time.monotonic() - t0
        return PqeResult(f1_star, dict(self.stats))

    def _next_primary(self) -> Optional[int]:
        for cid in sorted(self.f1_ids):
            if self.db.is_active(cid) and self.problem.is_x_clause(self.db.clause(cid).lits):
                return cid
        return None

    # ------------------------------------------------------------------
    # the per-clause proof loop
    # ------------------------------------------------------------------

    def prove_redundant(self, primary: int) -> DSequent:
        """Drive the search until the primary target is unconditionally redundant."""
        self._reset_search()
        self.primary = primary
        self.target = primary
        empty = self._live_empty_clause()
        if empty is not None:
            self.stats["dseq_final"] += 1
            return self._emit(dsq.falsified_clause_dsequent(self.db.clause(primary), empty))
        pending: List[Union[LrnOutcome, PoppedKey]] = []
        while True:
            self._check_budget()
            if pending:
                ev = pending.pop(0)
            else:
                res = self._bcp()
                if res is None:
                    self._decide()
                    continue
                if isinstance(res, (PoppedKey, LrnOutcome)):
                    ev = res
                else:
                    ev = self._lrn(res)
            if isinstance(ev, PoppedKey):
                outcome = LrnOutcome(dseq=ev.dseq)
            else:
                outcome = ev
            if outcome.is_conflict_clause and not outcome.clause.lits:
                # the search refuted the whole formula; everything is redundant
                final = self._emit(
                    dsq.falsified_clause_dsequent(self.db.clause(primary), outcome.clause)
                )
                self.stats["dseq_final"] += 1
                self.store.consider(final, 0, self.x_vars, self.db)
                return final
            if outcome.dseq is not None:
                self.stats["dseq_final"] += 1
                self.store.consider(outcome.dseq, len(self.tlevels), self.x_vars, self.db)
            if self.target == self.primary and not self.tlevels:
                if outcome.is_conflict_clause:
                    self._backtrack_on_clause(outcome.clause)
                    continue
                ds = outcome.dseq
                if not ds.conditional:
                    return ds
                self._backtrack_on_dseq(ds)
                continue
            # secondary target
            if outcome.is_conflict_clause:
                nxt = self._spec_bcktr_clause(outcome.clause)
            else:
                nxt = self._spec_bcktr_dseq(outcome.dseq)
            if nxt is not None:
                pending.append(nxt)

    def _reset_search(self) -> None:
        for lv in reversed(self.tlevels):
            for cid in lv.done:
                self.db.reactivate(cid)
        self.tlevels.clear()
        self.done_global.clear()
        self.assign.clear()
        self.trail.clear()
        self.pos.clear()
        self.level_start = [0]
        self.queue.clear()
        self.queued.clear()

    def _live_empty_clause(self) -> Optional[Clause]:
        for cid in self.db.active_ids():
            if not self.db.clause(cid).lits:
                return self.db.clause(cid)
        return None

    def _check_budget(self) -> None:
        mc = self.config.max_conflicts
        if mc is not None and self.stats["conflicts"] > mc:
            raise ResourceLimit(f"conflict budget {mc} exhausted")
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise ResourceLimit(f"time budget {self.config.max_seconds}s exhausted")

    # ------------------------------------------------------------------
    # assignments, trail, queue
    # ------------------------------------------------------------------

    def _apply(self, var: int, val: int, reason: object, level_start: bool) -> None:
        if level_start:
            self.level_start.append(len(self.trail))
        entry = TrailEntry(var, val, reason, len(self.level_start) - 1, level_start)
        self.pos[var] = len(self.trail)
        self.trail.append(entry)
        self.assign[var] = val

    def _pop_suffix(self, new_len: int) -> None:
        while len(self.trail) > new_len:
            e = self.trail.pop()
            del self.assign[e.var]
            del self.pos[e.var]
        while len(self.level_start) > 1 and self.level_start[-1] >= len(self.trail):
            self.level_start.pop()

    def _backtrack_to_level(self, level: int) -> None:
        if level >= len(self.level_start) - 1:
            return
        self._pop_suffix(self.level_start[level + 1])

    def _clear_queue(self) -> None:
        self.queue.clear()
        self.queued.clear()

    def _enqueue(self, var: int, val: int, reason: object) -> None:
        if var in self.assign or var in self.queued:
            return
        self.queued.add(var)
        self.queue.append((var, val, reason))

    def _pick_queue(self) -> Tuple[int, int, object]:
        idx = 0
        for i, (var, val, reason) in enumerate(self.queue):
            if not (isinstance(reason, int) and reason == self.target):
                idx = i
                break
        else:
            idx = 0
        var, val, reason = self.queue.pop(idx)
        self.queued.discard(var)
        return var, val, reason

    def _decide(self) -> None:
        var = self._pick_branch_var()
        if var is None:
            raise AssertionError("nothing to decide and no backtracking condition")
        self.stats["decisions"] += 1
        self._enqueue(var, self.config.default_polarity, DECISION)

    def _pick_branch_var(self) -> Optional[int]:
        for pool in (self.problem.y_vars, self.problem.x_vars):
            cands = [v for v in pool if v not in self.assign and v not in self.queued]
            if not cands:
                continue
            if self.config.var_order == "activity":
                return max(cands, key=lambda v: (self.activity[v], -v))
            return min(cands)
        return None

    # ------------------------------------------------------------------
    # BCP
    # ------------------------------------------------------------------

    def _bcp(self) -> Union[None, BacktrackCondition, PoppedKey]:
        while True:
            cond = self._round_condition()
            if cond is not None:
                return cond
            if not self.queue:
                v = self._blocked_var()
                if v is not None:
                    return BlockedTrg(v)
                # consult learned records exactly where a decision would be
                # made: reuse then only ever replaces exploration, it never
                # preempts a condition the search was about to find anyway
                cond = self._stored_record_check()
                if cond is not None:
                    return cond
                if self.queue:
                    continue
                return None
            var, val, reason = self._pick_queue()
            if var in self.assign:
                if self.assign[var] == val:
                    continue
                if isinstance(reason, int):
                    return FalsifiedClause(reason)
                continue  # stale deactivation; round checks judge the record
            if reason is DECISION:
                self._apply(var, val, None, level_start=True)
            elif isinstance(reason, DSequent):
                self._apply(var, val, reason, level_start=True)
            elif reason == self.target and var in self.x_vars:
                res = self._bcp_star(var, val, reason)
                if isinstance(res, (ConflictInBcpStar, PoppedKey, LrnOutcome)):
                    return res
                # NextTarget: fall through to re-examine the new target
            elif reason == self.target:
                # unit target on a free variable: branch-steering assignment
                self._apply(var, val, reason, level_start=True)
            else:
                self._apply(var, val, reason, level_start=False)

    def _round_condition(self) -> Optional[BacktrackCondition]:
        tgt = self.db.clause(self.target)
        if clause_satisfied(tgt.lits, self.assign):
            var, val = self._satisfying_entry(tgt.lits)
            return SatTrg(var, val)
        if clause_falsified(tgt.lits, self.assign):
            return FalsifiedClause(tgt.id)
        active = self.db.active_ids()
        for cid in active:
            if clause_falsified(self.db.clause(cid).lits, self.assign):
                return FalsifiedClause(cid)
        for cid in active:
            ul = unit_literal(self.db.clause(cid).lits, self.assign)
            if ul is not None:
                self._enqueue(abs(ul), satisfying_value(ul), cid)
        return None

    def _stored_record_check(self) -> Optional[BacktrackCondition]:
        """Active and unit learned records for the current target.

        Consulted at decision points only. A unit record steers the branch
        variable the decision heuristic was about to pick; steering other
        variables would reshape the search tree, and on bad days cost more
        than the record saves.
        """
        live = None
        pick = self._pick_branch_var()
        for stored in self.store.records_for(self.target):
            if live is None:
                live = set(self.db.active_ids())
            if not stored.policy.constraint <= live:
                continue
            # sound reuse needs every as-derived support clause back in the
            # formula or satisfied here; usually guaranteed, but the target
            # may be serving as a secondary target inside its own proof
            if not all(
                cid in live or clause_satisfied(self.db.clause(cid).lits, self.assign)
                for cid in stored.full.constraint
            ):
                continue
            q = stored.policy.cond()
            if assignment_subsumes(q, self.assign):
                self.stats["dseq_reused"] += 1
                return ActiveDSequent(self._reactivate_record(stored.full))
            hint = dsq.unit_deactivating_assignment(stored.policy, self.assign)
            if hint is None or hint[0] != pick or hint[0] in self.queued:
                continue
            self.stats["deactivation_hints"] += 1
            self._enqueue(hint[0], hint[1], self._reactivate_record(stored.full))
        return None

    def _blocked_var(self) -> Optional[int]:
        tgt = self.db.clause(self.target)
        for lit in tgt.lits:
            v = abs(lit)
            if v in self.assign or v not in self.x_vars:
                continue
            if is_blocked(self.db, tgt, v, self.assign):
                return v
        return None

    def _satisfying_entry(self, lits: Sequence[int], exclude_var: Optional[int] = None) -> Tuple[int, int]:
        for e in self.trail:
            if e.var == exclude_var:
                continue
            for l in lits:
                if abs(l) == e.var and satisfying_value(l) == e.val:
                    return e.var, e.val
        raise AssertionError("clause is not satisfied by the trail")

    def _bcp_star(self, seed_var: int, seed_val: int, seed_reason: int):
        """Clause-only propagation of a target-derived assignment.

        Every unit clause found here opens a target level: its resolvable
        partners must be proved redundant for the chain above to collapse.
        """
        self._apply(seed_var, seed_val, seed_reason, level_start=True)
        self._push_tlevel(seed_reason, seed_var)
        while True:
            progressed = False
            for cid in self.db.active_ids():
                lits = self.db.clause(cid).lits
                if clause_falsified(lits, self.assign):
                    return ConflictInBcpStar(cid)
            for cid in self.db.active_ids():
                ul = unit_literal(self.db.clause(cid).lits, self.assign)
                if ul is not None:
                    self._apply(abs(ul), satisfying_value(ul), cid, level_start=False)
                    if abs(ul) in self.x_vars:
                        # redundancy branches only on quantified variables;
                        # free-variable units are plain implications
                        self._push_tlevel(cid, abs(ul))
                    progressed = True
                    break
            if not progressed:
                break
        return self._advance_target()

    def _push_tlevel(self, key_cid: int, key_var: int) -> None:
        key = self.db.clause(key_cid)
        pending = tuple(
            cid for cid in self._partners(key, key_var) if self.db.is_active(cid)
        )
        self.tlevels.append(TargetLevel(key_cid, key_var, self.pos[key_var], pending))
        if len(self.tlevels) > self.stats["max_target_depth"]:
            self.stats["max_target_depth"] = len(self.tlevels)

    def _partners(self, clause: Clause, v: int) -> Tuple[int, ...]:
        """Ids of clauses resolvable with the given clause on v, any liveness."""
        lit = clause.lit_on(v)
        out = []
        for cid in self.db.occurrences(-lit):
            if cid == clause.id or cid in self.removed:
                continue
            if resolvable_on(clause.lits, self.db.clause(cid).lits, v):
                out.append(cid)
        return tuple(sorted(out))

    # ------------------------------------------------------------------
    # target management
    # ------------------------------------------------------------------

    def _advance_target(self) -> Union[NextTarget, PoppedKey]:
        """Pick the next unproved pending target, or pop one exhausted level."""
        if not self.tlevels:
            self.target = self.primary
            return NextTarget(self.primary)
        top = self.tlevels[-1]
        key = self.db.clause(top.key_clause)
        for cid in self._partners(key, top.key_var):
            if (
                self.db.is_active(cid)
                and cid not in top.done
                and not clause_satisfied(self.db.clause(cid).lits, self.assign)
            ):
                self.target = cid
                return NextTarget(cid)
        # key clause blocked at its key variable: certify while everything the
        # partner records rely on is still assigned, then pop the level.
        # Entries above the key assignment are re-derivable (implications) or
        # re-decidable (decisions); if the certificate mentions them, the
        # caller steers into the complementary subspace instead.
        try:
            record = self._pop_third_kind(top)
        except dsq.InconsistentInputs:
            # the partner records form a support cycle (mutually exclusive
            # proofs); no application order exists, so certify semantically
            self.stats["consistency_recoveries"] += 1
            return self._handle_duplicate()
        for cid in sorted(top.done):
            self.db.reactivate(cid)
            del self.done_global[cid]
        self._pop_suffix(top.key_pos)
        self.tlevels.pop()
        self.target = top.key_clause
        record = self._rewrite(record)
        self.store.consider(record, len(self.tlevels), self.x_vars, self.db)
        return PoppedKey(record)

    def _pop_third_kind(self, top: TargetLevel) -> DSequent:
        key = self.db.clause(top.key_clause)
        v, b = top.key_var, self.assign[top.key_var]
        inputs = []
        for cid in self._partners(key, v):
            clause = self.db.clause(cid)
            if self.db.is_active(cid):
                sv, sval = self._satisfying_entry(clause.lits, exclude_var=v)
                rec = self._emit(dsq.atomic_first_kind(clause, sv, sval))
            else:
                rec = self.done_global.get(cid)
                if rec is None:
                    raise AssertionError(f"partner {cid} is gone without a record")
            while v in dict(rec.conditional):
                flip = self._emit(dsq.atomic_first_kind(self.db.clause(rec.target), v, 1 - b))
                rec = self._emit(dsq.join(rec, flip, v))
            inputs.append(rec)
        return self._emit(dsq.atomic_third_kind(key, v, self.x_vars, inputs))

    def _third_kind_seed(self, v: int) -> DSequent:
        tgt = self.db.clause(self.target)
        inputs = []
        for cid in self._partners(tgt, v):
            clause = self.db.clause(cid)
            if self.db.is_active(cid):
                sv, sval = self._satisfying_entry(clause.lits, exclude_var=v)
                inputs.append(self._emit(dsq.atomic_first_kind(clause, sv, sval)))
            else:
                rec = self.done_global.get(cid)
                if rec is None:
                    raise AssertionError(f"partner {cid} is gone without a record")
                inputs.append(rec)
        return self._emit(dsq.atomic_third_kind(tgt, v, self.x_vars, inputs))

    # ------------------------------------------------------------------
    # learning
    # ------------------------------------------------------------------

    def _lrn(self, cond: BacktrackCondition) -> LrnOutcome:
        if isinstance(cond, (FalsifiedClause, ConflictInBcpStar)):
            self.stats["conflicts"] += 1
            self._bump_clause(self.db.clause(cond.cid).lits)
            return self._lrn_falsified(cond.cid)
        if isinstance(cond, SatTrg):
            seed = self._emit(dsq.atomic_first_kind(self.db.clause(self.target), cond.var, cond.val))
        elif isinstance(cond, BlockedTrg):
            try:
                seed = self._third_kind_seed(cond.var)
            except dsq.InconsistentInputs:
                self.stats["consistency_recoveries"] += 1
                return self._handle_duplicate()
        elif isinstance(cond, ActiveDSequent):
            seed = cond.record
        else:  # pragma: no cover
            raise AssertionError(f"unknown condition {cond}")
        return LrnOutcome(dseq=self._rewrite(seed))

    def _lrn_falsified(self, cid: int) -> LrnOutcome:
        lits, f1_side, hit = self._conflict_walk(cid)
        if hit is None:
            if self.db.find_any(lits) is not None:
                return self._handle_duplicate()
            clause = self._add_derived_clause(lits, f1_side)
            self._bump_clause(lits)
            return LrnOutcome(clause=clause)
        if cid != self.target:
            seed = self._emit(
                dsq.falsified_clause_dsequent(self.db.clause(self.target), self.db.clause(cid))
            )
            return LrnOutcome(dseq=self._rewrite(seed))
        # the falsified clause is the target itself and a D-sequent-derived
        # assignment matters: a helper clause is added alongside the record
        if self.db.find_any(lits) is not None:
            return self._handle_duplicate()
        clause = self._add_derived_clause(lits, f1_side)
        self._bump_clause(lits)
        seed = self._emit(dsq.falsified_clause_dsequent(self.db.clause(self.target), clause))
        return LrnOutcome(dseq=self._rewrite(seed), clause=clause)

    def _conflict_walk(self, start_cid: int):
        """Resolve the falsified clause backwards through clause reasons.

        Stops at a real decision (a conflict clause has been built) or at a
        D-sequent-derived assignment (clause learning is impossible there).
        """
        start = self.db.clause(start_cid)
        work: Lits = start.lits
        f1_side = start.is_f1_side()
        while work:
            pos, _ = max((self.pos[abs(l)], l) for l in work)
            entry = self.trail[pos]
            if entry.reason is None:
                return work, f1_side, None
            if isinstance(entry.reason, DSequent):
                return work, f1_side, entry
            reason = self.db.clause(entry.reason)
            f1_side = f1_side or reason.is_f1_side()
            work = resolve(work, reason.lits, entry.var)
        return work, f1_side, None

    def _try_join(self, ds: DSequent, other: DSequent, var: int) -> Optional[DSequent]:
        """Join that must shrink the conditional's trail frontier.

        Rejects joins whose result mentions assignments that are no longer
        on the trail (the search left that branch) or that sit above the
        assignment being eliminated (no progress; convoluted backtracking
        histories can reassign a record's context higher up).
        """
        if dsq.assignments_resolvable(ds.cond(), other.cond()) != var:
            return None
        joined = dsq.join(ds, other, var)
        limit = self.pos[var]
        for v2, b2 in joined.conditional:
            if self.assign.get(v2) != b2 or self.pos[v2] >= limit:
                return None
        return joined

    def _rewrite(self, ds: DSequent) -> DSequent:
        """Eliminate derived assignments from the conditional, latest first.

        Stops at decision-like entries: real decisions, assignments derived
        from the target clause itself, deactivations from records for other
        targets, and key-variable assignments of live target levels (unless
        a satisfied-target join can remove them for free).
        """
        tgt = self.db.clause(ds.target)
        live_keys = {lv.key_clause: lv.key_var for lv in self.tlevels}
        while True:
            cond = ds.cond()
            assigned = [v for v in cond if v in self.pos]
            if not assigned:
                return ds
            var = max(assigned, key=lambda v: self.pos[v])
            entry = self.trail[self.pos[var]]
            if entry.val != cond[var]:
                return ds  # conditional left the trail subspace; nothing to do
            b = cond[var]
            joined = other = None
            reason = entry.reason
            if isinstance(reason, DSequent):
                if reason.target == ds.target:
                    joined = self._try_join(ds, reason, var)
            elif reason is not None and reason != ds.target and live_keys.get(reason) != var:
                other = dsq.falsified_clause_dsequent(tgt, self.db.clause(reason))
                joined = self._try_join(ds, other, var)
            if joined is None and reason is not None:
                # satisfied-target escape: free of charge, and the only way
                # out for key-variable assignments (their reason clause must
                # never enter a constraint its own certificate depends on)
                lt = tgt.lit_on(var)
                if lt is not None and satisfying_value(lt) != b:
                    other = dsq.atomic_first_kind(tgt, var, 1 - b)
                    joined = self._try_join(ds, other, var)
            if joined is None:
                return ds
            if other is not None:
                self._emit(other)
            ds = self._emit(joined)

    def _reactivate_record(self, full: DSequent) -> DSequent:
        """A stored record, made valid for the current formula state.

        Constraint clauses proved redundant meanwhile must be satisfied by
        the trail; substituting their satisfied-clause records drops them,
        at the cost of the satisfying assignments in the conditional.
        """
        gone = [cid for cid in sorted(full.constraint) if not self.db.is_active(cid)]
        out = full
        for cid in gone:
            var, val = self._satisfying_entry(self.db.clause(cid).lits)
            first = self._emit(dsq.atomic_first_kind(self.db.clause(cid), var, val))
            out = self._emit(dsq.substitute(out, first))
        return out

    def _bump_clause(self, lits: Sequence[int]) -> None:
        for l in lits:
            self.activity[abs(l)] = self.activity.get(abs(l), 0.0) + self._act_inc
        self._act_inc /= 0.95

    # ------------------------------------------------------------------
    # backtracking
    # ------------------------------------------------------------------

    def _cond_levels(self, cond: Assignment) -> List[Tuple[int, int]]:
        return sorted((self.trail[self.pos[v]].level, v) for v in cond if v in self.pos)

    def _backtrack_on_clause(self, clause: Clause) -> None:
        levels = sorted((self.trail[self.pos[abs(l)]].level, abs(l), l) for l in clause.lits)
        _, _, asserting = levels[-1]
        back = levels[-2][0] if len(levels) > 1 else 0
        self._backtrack_to_level(back)
        self._clear_queue()
        self._enqueue(abs(asserting), satisfying_value(asserting), clause.id)

    def _backtrack_on_dseq(self, ds: DSequent) -> None:
        """Flip the deepest assignment of the record's conditional.

        Chronological on purpose: a record-driven jump below other branch
        points would discard steering that only a stored record could
        re-derive, losing the tree discipline that bounds the search (and,
        with it, any benefit of learning). Clause-driven backtracking still
        jumps: clauses persist in the formula and re-propagate on arrival.
        """
        cond = ds.cond()
        missing = sorted(v for v in cond if v not in self.assign)
        self._clear_queue()
        if missing:
            v = missing[0]
            self._enqueue(v, 1 - cond[v], ds)
            return
        levels = self._cond_levels(cond)
        back = max(0, levels[-1][0] - 1)
        v = levels[-1][1]
        self._backtrack_to_level(back)
        if v in self.assign:
            raise AssertionError("record not asserting: backtrack left its frontier assigned")
        self._enqueue(v, 1 - cond[v], ds)

    def _spec_bcktr_dseq(self, ds: DSequent):
        """Handle a record for a secondary target.

        If its conditional reaches past the point of origin (the key-variable
        assignment of its level) the proof is not finished: back up within
        that scope and steer away. Otherwise mark the target done and move on.
        """
        top = self.tlevels[-1]
        poo = top.key_pos
        cond = ds.cond()
        above = [v for v in cond if v in self.pos and self.pos[v] > poo]
        missing = sorted(v for v in cond if v not in self.assign)
        if missing:
            self._clear_queue()
            self._enqueue(missing[0], 1 - cond[missing[0]], ds)
            return None
        if above:
            var = max(above, key=lambda v: self.pos[v])
            rest = [self.trail[self.pos[v]].level for v in cond if v != var]
            here = self.trail[self.pos[var]].level
            back = max([self.trail[poo].level, here - 1] + rest)
            self._backtrack_to_level(back)
            if var in self.assign:
                raise AssertionError("record not asserting within the backtrack scope")
            self._clear_queue()
            self._enqueue(var, 1 - cond[var], ds)
            return None
        # proved up to the point of origin
        self._pop_suffix(poo + 1)
        self._clear_queue()
        top.done[ds.target] = ds
        self.done_global[ds.target] = ds
        self.db.deactivate(ds.target)
        res = self._advance_target()
        return res if isinstance(res, (PoppedKey, LrnOutcome)) else None

    def _spec_bcktr_clause(self, clause: Clause):
        """Conflict-clause backtrack below secondary targets.

        Jumps like regular backtracking; any target level whose key variable
        gets unassigned is dissolved, its proved clauses returning to the
        formula (the new clause covers the whole subspace by itself).
        """
        old_level = self.tlevels[-1] if self.tlevels else None
        self._backtrack_on_clause(clause)
        while self.tlevels and self.tlevels[-1].key_pos >= len(self.trail):
            lv = self.tlevels.pop()
            for cid in sorted(lv.done):
                self.db.reactivate(cid)
                del self.done_global[cid]
        if self.tlevels and self.tlevels[-1] is old_level:
            return None  # same level, same target
        res = self._advance_target()
        return res if isinstance(res, (PoppedKey, LrnOutcome)) else None

    # ------------------------------------------------------------------
    # duplicate recovery
    # ------------------------------------------------------------------

    def _handle_duplicate(self) -> LrnOutcome:
        """A derived clause duplicates a stored one: decide the subspace semantically.

        Back out of all quantified-variable assignments and secondary targets,
        then ask a SAT check whether the formula holds under the remaining
        free-variable assignments; either a blocking free-variable clause or a
        shrunk satisfying witness certifies the primary target's redundancy.
        """
        self.stats["duplicates"] += 1
        while self.trail and self.trail[-1].var in self.x_vars:
            self._pop_suffix(len(self.trail) - 1)
        self._clear_queue()
        for lv in reversed(self.tlevels):
            for cid in sorted(lv.done):
                self.db.reactivate(cid)
                del self.done_global[cid]
        self.tlevels.clear()
        self.target = self.primary
        primary_clause = self.db.clause(self.primary)
        live = [self.db.clause(cid).lits for cid in self.db.active_ids()]
        assumps = [e.var if e.val else -e.var for e in self.trail if e.var in self.y_vars]
        self.stats["sat_calls"] += 1
        res = sat_solve(live, assumps, max_conflicts=self.config.sat_max_conflicts)
        if not res.satisfiable:
            lits = tuple(-l for l in sorted(res.core, key=abs))
            clause = self._add_derived_clause(lits, True)
            seed = self._emit(dsq.falsified_clause_dsequent(primary_clause, clause))
            return LrnOutcome(dseq=self._rewrite(seed))
        model = dict(res.model)
        partial = dict(model)
        for v in sorted(mv for mv in model if mv in self.y_vars):
            dropped = partial.pop(v)
            if not all(clause_satisfied(c, partial) for c in live):
                partial[v] = dropped
        y_star = {v: val for v, val in partial.items() if v in self.y_vars}
        seed = self._emit(DSequent.make(self.primary, y_star, (), "sat-witness"))
        return LrnOutcome(dseq=self._rewrite(seed))

    # ------------------------------------------------------------------
    # bookkeeping
    # ------------------------------------------------------------------

    def _add_derived_clause(self, lits: Lits, f1_side: bool) -> Clause:
        before = len(self.db)
        clause = self.db.add(lits, "derived-f1" if f1_side else "derived-f2")
        if len(self.db) > before:
            if f1_side:
                self.f1_ids.add(clause.id)
                self.stats["clauses_added_f1"] += 1
            else:
                self.f2_ids.add(clause.id)
                self.stats["clauses_added_f2"] += 1
        return clause

    def _emit(self, ds: DSequent) -> DSequent:
        self.stats["dseq_generated"] += 1
        key = f"dseq_{ds.rule.replace('-', '_')}"
        self.stats[key] = self.stats.get(key, 0) + 1
        if self.trace is not None:
            self.trace(dsq.trace_line(ds))
        if self.on_dsequent is not None:
            live = set(self.db.active_ids()) | set(self.done_global)
            snapshot = tuple((cid, self.db.clause(cid).lits) for cid in sorted(live))
            self.on_dsequent(ds, snapshot)
        return ds


def solve_pqe(
    problem: EcnfProblem,
    config: Optional[SolverConfig] = None,
    on_dsequent: Optional[Callable[[DSequent, tuple], None]] = None,
    trace: Optional[Callable[[str], None]] = None,
) -> PqeResult:
    """Take the first block out of the scope of the quantifiers.

    Returns the free-variable clauses equivalent to the first block under
    the quantified remainder, plus run statistics. Raises ResourceLimit if
    a configured budget is exhausted; no partial answer is ever returned.
    """
    return Engine(problem, config, on_dsequent, trace).solve()
