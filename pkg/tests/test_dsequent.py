import itertools

import pytest

from pqe.dsequent import (
    ChainBroken,
    Consistent,
    DSequent,
    DSequentStore,
    IncompatibleConditionals,
    Inconsistent,
    NoImplication,
    NotInConstraint,
    NotSatisfying,
    NotSubsumingAssignment,
    TargetMismatch,
    TargetNotXClause,
    atomic_first_kind,
    atomic_second_kind,
    atomic_third_kind,
    check_consistency,
    falsified_clause_dsequent,
    is_active,
    is_applicable,
    join,
    relax_order,
    retention_filter,
    strengthen_by_satisfied,
    substitute,
    trace_line,
    unit_deactivating_assignment,
    update_after_implication,
)
from pqe.formula import Clause, ClauseDb, NotResolvable


def ds(target, cond, constraint, rule="derived"):
    return DSequent.make(target, cond, constraint, rule)


class TestAtomicFirstKind:
    C = Clause(9, (-5, 6), "f2-initial")  # x5=5 quantified, y1=6 free

    def test_free_var_side(self):
        out = atomic_first_kind(self.C, 6, 1)
        assert out.cond() == {6: 1} and out.constraint == frozenset()

    def test_quantified_side(self):
        out = atomic_first_kind(self.C, 5, 0)
        assert out.cond() == {5: 0} and out.constraint == frozenset()

    def test_wrong_polarity(self):
        with pytest.raises(NotSatisfying):
            atomic_first_kind(self.C, 5, 1)


class TestAtomicSecondKind:
    B = Clause(1, (2, 4), "f2-initial")  # y1 v x2 with y1=4, x2=2
    C = Clause(2, (2, -3), "f1-initial")  # x2 v -x3

    def test_implication_under_subspace(self):
        out = atomic_second_kind(self.C, self.B, {4: 0}, x_vars=(2, 3))
        assert out.cond() == {4: 0} and out.constraint == {self.B.id}

    def test_duplicate_self_implication(self):
        twin = Clause(3, (2, -3), "f2-initial")
        out = atomic_second_kind(self.C, twin, {}, x_vars=(2, 3))
        assert out.cond() == {} and out.constraint == {twin.id}

    def test_no_implication_without_subspace(self):
        with pytest.raises(NoImplication):
            atomic_second_kind(self.C, self.B, {}, x_vars=(2, 3))

    def test_target_must_stay_quantified(self):
        c = Clause(4, (2, 5), "f1-initial")  # x2 v y2
        b = Clause(5, (5,), "f2-initial")
        with pytest.raises(TargetNotXClause):
            atomic_second_kind(c, b, {2: 0}, x_vars=(2, 3))

    def test_falsified_form_needs_no_quantified_cofactor(self):
        c = Clause(4, (2, 5), "f1-initial")
        b = Clause(5, (2,), "f2-initial")
        out = falsified_clause_dsequent(c, b)
        assert out.cond() == {2: 0} and out.constraint == {b.id}


class TestAtomicThirdKind:
    C1 = Clause(11, (1, 2), "f1-initial")

    def test_merges_partner_records(self):
        s2 = ds(12, {3: 1}, ())
        s3 = ds(13, {2: 1}, {14})
        out = atomic_third_kind(self.C1, 1, (1, 2), [s2, s3])
        assert out.cond() == {3: 1, 2: 1}
        assert out.constraint == {14}

    def test_vacuous_union(self):
        out = atomic_third_kind(self.C1, 1, (1, 2), [])
        assert out.cond() == {} and out.constraint == frozenset()

    def test_clash_rejected(self):
        with pytest.raises(IncompatibleConditionals):
            atomic_third_kind(self.C1, 1, (1, 2), [ds(12, {3: 0}, ()), ds(13, {3: 1}, ())])


class TestJoin:
    def test_worked_example(self):
        s1 = ds(21, {4: 0, 1: 0}, {22})
        s2 = ds(21, {4: 1, 2: 1}, {23})
        out = join(s1, s2, 4)
        assert out.cond() == {1: 0, 2: 1}
        assert out.constraint == {22, 23}

    def test_unconditional_from_two_branches(self):
        out = join(ds(21, {4: 0}, ()), ds(21, {4: 1}, ()), 4)
        assert out.cond() == {} and out.constraint == frozenset()

    def test_no_clash_rejected(self):
        with pytest.raises(NotResolvable):
            join(ds(21, {4: 0}, ()), ds(21, {4: 0}, ()), 4)

    def test_target_mismatch(self):
        with pytest.raises(TargetMismatch):
            join(ds(21, {4: 0}, ()), ds(22, {4: 1}, ()), 4)


class TestUpdateSubstituteStrengthen:
    def test_update_is_identity(self):
        s = ds(5, {1: 0}, {2})
        assert update_after_implication(s, ()) == s
        assert update_after_implication(s, (7, 8)) == s

    def test_substitute_empty_support(self):
        s1 = ds(30, {4: 0}, {31})
        s2 = ds(31, {1: 1}, ())
        out = substitute(s1, s2)
        assert out.cond() == {4: 0, 1: 1} and out.constraint == frozenset()

    def test_substitute_set_algebra(self):
        s1 = ds(30, {}, {31, 32})
        s2 = ds(31, {}, {33})
        out = substitute(s1, s2)
        assert out.constraint == {32, 33}

    def test_substitute_requires_membership(self):
        with pytest.raises(NotInConstraint):
            substitute(ds(30, {}, {31}), ds(99, {}, ()))

    def test_substitute_requires_compatibility(self):
        with pytest.raises(IncompatibleConditionals):
            substitute(ds(30, {1: 0}, {31}), ds(31, {1: 1}, ()))

    def test_strengthen_drops_satisfied(self):
        db = ClauseDb()
        c1 = db.add((3, 1), "f2-initial")  # y v x1
        c2 = db.add((1, 2), "f2-initial")  # x1 v x2
        tgt = db.add((-1, 2), "f1-initial")
        s = ds(tgt.id, {3: 0}, {c1.id, c2.id})
        out = strengthen_by_satisfied(s, {3: 0, 1: 1}, db)
        assert out.cond() == {3: 0, 1: 1}
        assert out.constraint == frozenset()

    def test_strengthen_keeps_untouched(self):
        db = ClauseDb()
        c1 = db.add((3, 1), "f2-initial")
        tgt = db.add((-1, 2), "f1-initial")
        s = ds(tgt.id, {3: 0}, {c1.id})
        out = strengthen_by_satisfied(s, {3: 0, 4: 1}, db)
        assert out.constraint == {c1.id}

    def test_strengthen_requires_strict_extension(self):
        db = ClauseDb()
        tgt = db.add((-1, 2), "f1-initial")
        s = ds(tgt.id, {3: 0}, ())
        with pytest.raises(NotSubsumingAssignment):
            strengthen_by_satisfied(s, {3: 0}, db)
        with pytest.raises(NotSubsumingAssignment):
            strengthen_by_satisfied(s, {3: 1, 4: 0}, db)


class TestRelaxOrder:
    def test_identity_when_absent(self):
        s = ds(40, {1: 0}, {41})
        assert relax_order(s, 99, []) == s

    def test_single_step(self):
        s = ds(40, {1: 0}, {41})
        helper = ds(41, {2: 1}, ())
        out = relax_order(s, 41, [helper])
        assert out.constraint == frozenset()
        assert out.cond() == {1: 0, 2: 1}

    def test_chain(self):
        # constraint chain 41 <- 42 <- 43; dropping 41 must not add 42/43
        s = ds(40, {}, {41})
        pool = [ds(41, {1: 1}, {42}), ds(42, {2: 1}, {43}), ds(43, {3: 1}, ())]
        out = relax_order(s, 41, pool)
        assert out.constraint == frozenset()
        assert out.cond() == {1: 1, 2: 1, 3: 1}

    def test_chain_broken(self):
        s = ds(40, {}, {41})
        with pytest.raises(ChainBroken):
            relax_order(s, 41, [ds(41, {}, {42})])

    def test_no_new_clauses(self):
        s = ds(40, {}, {41, 44})
        pool = [ds(41, {}, {44})]
        out = relax_order(s, 41, pool)
        assert out.constraint == {44}


class TestReusePredicates:
    def test_applicable(self):
        s = ds(3, {}, {2})
        assert is_applicable(s, {2, 3, 4})
        assert not is_applicable(s, {3, 4})
        assert is_applicable(ds(3, {}, ()), {3})

    def test_active(self):
        s = ds(3, {6: 0, 5: 1}, ())
        assert is_active(s, {6: 0, 5: 1, 2: 0}, {3})
        assert not is_active(s, {6: 0}, {3})
        assert not is_active(ds(3, {6: 0}, {9}), {6: 0}, {3})

    def test_unit_deactivating(self):
        s = ds(3, {6: 0, 5: 1}, ())
        assert unit_deactivating_assignment(s, {6: 0}) == (5, 0)
        assert unit_deactivating_assignment(s, {6: 1, 5: 1}) is None
        assert unit_deactivating_assignment(ds(3, {6: 0}, ()), {6: 0}) is None
        assert unit_deactivating_assignment(s, {}) is None


def brute_force_consistency_clean(dseqs):
    """Factorial-search reference for the checker: try every order."""
    n = len(dseqs)
    for i in range(n):
        qi = dseqs[i].cond()
        for j in range(i + 1, n):
            qj = dseqs[j].cond()
            if any(qi.get(v) not in (None, b) for v, b in qj.items()):
                return "incompatible"
    targets = [d.target for d in dseqs]
    for perm in itertools.permutations(range(n)):
        removed = set()
        ok = True
        for m in perm:
            if dseqs[m].constraint & removed:
                ok = False
                break
            removed.add(targets[m])
        if ok:
            return "consistent"
    return "inconsistent"


class TestConsistency:
    def test_mutually_exclusive_duplicates(self):
        s_c = ds(2, {}, {1})
        s_b = ds(1, {}, {2})
        res = check_consistency([s_c, s_b])
        assert isinstance(res, Inconsistent)
        assert res.cycle is not None and len(res.cycle) == 2

    def test_order_witness(self):
        s1 = ds(1, {}, ())
        s2 = ds(2, {}, {1})
        res = check_consistency([s1, s2])
        assert isinstance(res, Consistent)
        assert res.order == (1, 0)  # apply s2 first, while clause 1 is present

    def test_incompatible_pair(self):
        res = check_consistency([ds(1, {5: 0}, ()), ds(2, {5: 1}, ())])
        assert isinstance(res, Inconsistent)
        assert res.incompatible == (0, 1)

    def test_order_is_valid_application_order(self, rng):
        for _ in range(100):
            k = rng.randint(1, 6)
            targets = rng.sample(range(1, 10), k)
            dseqs = []
            for t in targets:
                h = set(rng.sample(range(1, 10), rng.randint(0, 3))) - {t}
                dseqs.append(ds(t, {}, h))
            res = check_consistency(dseqs)
            want = brute_force_consistency_clean(dseqs)
            if isinstance(res, Consistent):
                assert want == "consistent"
                removed = set()
                for m in res.order:
                    assert not (dseqs[m].constraint & removed)
                    removed.add(dseqs[m].target)
            else:
                assert want == "inconsistent"

    def test_duplicate_targets_rejected(self):
        with pytest.raises(ValueError):
            check_consistency([ds(1, {}, ()), ds(1, {}, ())])


class TestRetentionAndStore:
    def setup_method(self):
        self.db = ClauseDb()
        self.yc = self.db.add((5, 6), "f2-initial")  # free-only clause
        self.xc = self.db.add((1, 5), "f2-initial")
        self.tgt = self.db.add((1, 2), "f1-initial")
        self.x_vars = (1, 2)

    def test_depth_zero_strips_constraint(self):
        s = ds(self.tgt.id, {5: 0}, {self.xc.id, self.yc.id})
        out = retention_filter(s, 0, 0, self.x_vars, self.db)
        assert out is not None and out.constraint == frozenset()

    def test_deeper_than_k_dropped(self):
        s = ds(self.tgt.id, {5: 0}, ())
        assert retention_filter(s, 1, 0, self.x_vars, self.db) is None

    def test_no_learning(self):
        s = ds(self.tgt.id, {5: 0}, ())
        assert retention_filter(s, 0, -1, self.x_vars, self.db) is None

    def test_free_clauses_always_stripped(self):
        s = ds(self.tgt.id, {5: 0}, {self.xc.id, self.yc.id})
        out = retention_filter(s, 1, 2, self.x_vars, self.db)
        assert out.constraint == {self.xc.id}

    def test_store_deduplicates(self):
        store = DSequentStore(0)
        s = ds(self.tgt.id, {5: 0}, {self.yc.id})
        assert store.consider(s, 0, self.x_vars, self.db)
        # an equivalent record is already retained: reported, not re-added
        assert store.consider(s, 0, self.x_vars, self.db)
        assert len(store) == 1
        assert store.records_for(self.tgt.id)[0].full == s

    def test_store_rejects_by_depth(self):
        store = DSequentStore(0)
        s = ds(self.tgt.id, {5: 0}, ())
        assert not store.consider(s, 1, self.x_vars, self.db)
        assert len(store) == 0


def test_trace_line_format():
    s = ds(7, {3: 1, 5: 0}, {2, 4}, rule="join")
    assert trace_line(s) == "DS 7 Q 3 -5 0 H 2 4 0 RULE join"
    assert trace_line(ds(7, {}, ())) == "DS 7 Q 0 H 0 RULE derived"
