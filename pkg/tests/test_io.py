import pytest
from hypothesis import given, strategies as st

from pqe.io import (
    PqeSemanticError,
    PqeSyntaxError,
    parse_pqe,
    parse_solution,
    write_pqe,
    write_solution,
)

GOLDEN = "p pqe 3 1 2\ne 1 2 0\n-1 2 0\n3 1 0\n3 -2 0\n"


class TestParse:
    def test_golden(self):
        p = parse_pqe(GOLDEN)
        assert sorted(p.x_vars) == [1, 2]
        assert sorted(p.y_vars) == [3]
        assert p.f1 == ((-1, 2),)
        assert p.f2 == ((1, 3), (-2, 3))

    def test_empty_problem(self):
        p = parse_pqe("p pqe 0 0 0\ne 0\n")
        assert p.f1 == () and p.f2 == () and not p.x_vars and not p.y_vars

    def test_comments_and_missing_final_newline(self):
        text = "c hello\np pqe 2 1 0\nc mid\ne 1 0\n1 -2 0"
        p = parse_pqe(text)
        assert p.f1 == ((1, -2),)

    def test_tautology_rejected(self):
        with pytest.raises(PqeSemanticError) as e:
            parse_pqe("p pqe 1 1 0\ne 1 0\n1 -1 0\n")
        assert e.value.line == 3

    def test_var_out_of_range(self):
        with pytest.raises(PqeSemanticError) as e:
            parse_pqe("p pqe 2 1 0\ne 1 0\n1 -3 0\n")
        assert e.value.line == 3 and e.value.col == 3

    def test_duplicate_quantifier(self):
        with pytest.raises(PqeSemanticError) as e:
            parse_pqe("p pqe 2 0 0\ne 1 1 0\n")
        assert e.value.line == 2

    def test_bad_header(self):
        with pytest.raises(PqeSyntaxError) as e:
            parse_pqe("p cnf 3 1\n")
        assert e.value.line == 1

    def test_unterminated_clause(self):
        with pytest.raises(PqeSyntaxError) as e:
            parse_pqe("p pqe 2 1 0\ne 1 0\n1 -2\n")
        assert e.value.line == 3

    def test_wrong_clause_count(self):
        with pytest.raises(PqeSyntaxError):
            parse_pqe("p pqe 2 2 0\ne 1 0\n1 0\n")

    def test_empty_clause_line(self):
        p = parse_pqe("p pqe 2 1 0\ne 1 0\n0\n")
        assert p.f1 == ((),)

    def test_non_integer(self):
        with pytest.raises(PqeSyntaxError) as e:
            parse_pqe("p pqe 2 1 0\ne 1 0\n1 x 0\n")
        assert (e.value.line, e.value.col) == (3, 3)


class TestRoundTrip:
    def test_golden_round_trip(self):
        p = parse_pqe(GOLDEN)
        assert parse_pqe(write_pqe(p)) == p

    def test_random_round_trip(self, rng):
        from tests.conftest import rand_problem

        for _ in range(50):
            p = rand_problem(rng)
            assert parse_pqe(write_pqe(p)) == p

    def test_comment_embedding(self):
        p = parse_pqe(GOLDEN)
        text = write_pqe(p, comment="generated for a test")
        assert text.startswith("c generated for a test\n")
        assert parse_pqe(text) == p


class TestSolution:
    def test_single_clause(self):
        assert write_solution([(3,)]) == "s pqe 1\n3 0\n"

    def test_constant_true(self):
        assert write_solution([]) == "s pqe 0\n"

    def test_constant_false(self):
        assert write_solution([()]) == "s pqe 1\n0\n"

    def test_round_trip(self):
        for sol in ([], [(3,)], [()], [(1, -2), (4,)]):
            assert parse_solution(write_solution(sol)) == tuple(
                tuple(sorted(c, key=abs)) for c in sol
            )

    @given(
        st.lists(
            st.lists(
                st.integers(min_value=1, max_value=9).flatmap(
                    lambda v: st.sampled_from([v, -v])
                ),
                max_size=4,
                unique_by=abs,
            ),
            max_size=6,
        )
    )
    def test_round_trip_property(self, sol):
        clauses = [tuple(sorted(c, key=abs)) for c in sol]
        assert parse_solution(write_solution(clauses)) == tuple(clauses)

    def test_bad_header(self):
        with pytest.raises(PqeSyntaxError):
            parse_solution("v 1 0\n")
