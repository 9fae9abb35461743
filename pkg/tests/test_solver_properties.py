"""Randomized semantic properties of the engine, checked against the oracle."""

import itertools
import random

from pqe.formula import clause_satisfied
from pqe.oracle import cnf_satisfiable, verify_dsequent, verify_pqe_solution
from pqe.solver import Engine, SolverConfig, solve_pqe
from tests.conftest import rand_problem


class TestSoundness:
    def test_solutions_verified_by_oracle(self):
        rng = random.Random(2024)
        for _ in range(150):
            problem = rand_problem(rng)
            res = solve_pqe(problem, SolverConfig(max_conflicts=100000, max_seconds=10))
            assert verify_pqe_solution(
                problem.f1, problem.f2, problem.x_vars, res.f1_star, problem.y_vars
            ), problem

    def test_learning_depths_all_sound(self):
        rng = random.Random(77)
        for k in (-1, 0, 1, 2):
            for _ in range(40):
                problem = rand_problem(rng, require_x_target=True)
                res = solve_pqe(problem, SolverConfig(learn_depth_k=k, max_seconds=10))
                assert verify_pqe_solution(
                    problem.f1, problem.f2, problem.x_vars, res.f1_star, problem.y_vars
                ), (k, problem)

    def test_activity_order_sound(self):
        rng = random.Random(88)
        for _ in range(40):
            problem = rand_problem(rng, require_x_target=True)
            res = solve_pqe(problem, SolverConfig(var_order="activity", max_seconds=10))
            assert verify_pqe_solution(
                problem.f1, problem.f2, problem.x_vars, res.f1_star, problem.y_vars
            )


class TestDerivedClausesImplied:
    def test_every_added_clause_follows_from_the_input(self):
        rng = random.Random(5150)
        for _ in range(60):
            problem = rand_problem(rng, max_x=4, max_y=3, max_clauses=10, require_x_target=True)
            eng = Engine(problem, SolverConfig(max_seconds=10))
            eng.solve()
            initial = list(problem.f1) + list(problem.f2)
            all_vars = sorted({abs(l) for c in initial for l in c} | set(problem.all_vars()))
            derived = [
                eng.db.clause(cid).lits
                for cid in eng.db.all_ids()
                if eng.db.clause(cid).origin.startswith("derived")
            ]
            for lits in derived:
                for bits in itertools.product((0, 1), repeat=len(all_vars)):
                    asg = dict(zip(all_vars, bits))
                    if all(clause_satisfied(c, asg) for c in initial):
                        assert clause_satisfied(lits, asg) or not lits, (problem, lits)


class TestEmittedRecordsValid:
    def test_records_pass_member_formula_check(self):
        rng = random.Random(31337)
        checked = 0
        for _ in range(60):
            problem = rand_problem(rng, max_x=4, max_y=3, max_clauses=8, require_x_target=True)
            records = []
            solve_pqe(
                problem,
                SolverConfig(max_seconds=10),
                on_dsequent=lambda ds, snap: records.append((ds, snap)),
            )
            for ds, snap in records:
                ids = [cid for cid, _ in snap]
                lits = [l for _, l in snap]
                idx = {cid: i for i, cid in enumerate(ids)}
                assert ds.target in idx and all(c in idx for c in ds.constraint)
                ok = verify_dsequent(
                    lits,
                    problem.x_vars,
                    idx[ds.target],
                    ds.cond(),
                    [idx[c] for c in ds.constraint],
                    problem.y_vars,
                    subset_cap=16,
                )
                assert ok, (problem, ds, lits)
                checked += 1
        assert checked > 200


class TestSearchDiscipline:
    def test_trail_and_stack_invariants(self):
        rng = random.Random(9090)

        class Watched(Engine):
            def _apply(self, var, val, reason, level_start):
                super()._apply(var, val, reason, level_start)
                self._audit_trail()

            def _pop_suffix(self, new_len):
                super()._pop_suffix(new_len)
                self._audit_trail()

            def _round_condition(self):
                # a stable point between propagation steps
                self._audit_trail()
                self._audit_stack()
                return super()._round_condition()

            def _audit_trail(self):
                assert len(self.trail) == len(self.assign) == len(self.pos)
                assert self.level_start[0] == 0
                # level 0 may be empty (implications only); others may not
                assert all(
                    a < b for a, b in zip(self.level_start[1:], self.level_start[2:])
                )
                for i, e in enumerate(self.trail):
                    assert self.pos[e.var] == i
                    assert self.assign[e.var] == e.val

            def _audit_stack(self):
                for lv in self.tlevels:
                    assert lv.key_pos < len(self.trail)
                    assert self.trail[lv.key_pos].var == lv.key_var
                    assert lv.key_var in self.x_vars
                    for cid in lv.done:
                        assert not self.db.is_active(cid)
                assert set(self.done_global) == {
                    cid for lv in self.tlevels for cid in lv.done
                }

        for _ in range(40):
            problem = rand_problem(rng, require_x_target=True)
            eng = Watched(problem, SolverConfig(max_seconds=10))
            res = eng.solve()
            assert verify_pqe_solution(
                problem.f1, problem.f2, problem.x_vars, res.f1_star, problem.y_vars
            )
            # after each proof the stack must have fully unwound
            assert eng.tlevels == [] and eng.done_global == {}

    def test_termination_without_budget(self):
        rng = random.Random(404)
        for _ in range(200):
            problem = rand_problem(rng, max_x=5, max_y=4, max_clauses=14)
            res = solve_pqe(problem, SolverConfig(max_conflicts=10**6))
            assert res is not None


class TestSatReductionAgreement:
    def test_matches_brute_force(self):
        from pqe.harness import pqe_sat_verdict
        from tests.conftest import rand_cnf

        rng = random.Random(6)
        for _ in range(30):
            nv = rng.randint(2, 8)
            clauses = rand_cnf(rng, nv, rng.randint(3, 22))
            x = {v: rng.randrange(2) for v in range(1, nv + 1)}
            assert pqe_sat_verdict(clauses, x) == cnf_satisfiable(clauses)
