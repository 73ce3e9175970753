import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affmod.errors import BudgetExceeded
from affmod.fields import GF
from affmod.ffcount import (
    count_points,
    max_cells,
    singular_witness,
    uv_fiber_table,
    uv_identity,
    uv_identity_fast,
    value_histogram,
)
from affmod.parsing import parse
from affmod.poly import Poly, VarContext

from strategies import polys

X1 = VarContext(["x"])
XY = VarContext(["x", "y"])


def naive_count(f, q):
    """Independent count using the exact rational evaluator point by point.

    Denominators are coprime to q, so a value vanishes mod q exactly when
    its numerator does.
    """
    return sum(
        1
        for pt in itertools.product(range(q), repeat=len(f.ctx))
        if f.evaluate(pt).numerator % q == 0
    )


class TestCountPoints:
    def test_linear(self):
        assert count_points([parse("x", X1)], 3) == 1

    def test_uv_minus_x(self):
        ctx = VarContext(["x", "u", "v"])
        assert count_points([parse("u*v - x", ctx)], 3) == 9

    def test_circle(self):
        assert count_points([parse("x^2 + y^2 - 1", XY)], 5) == 4

    def test_system(self):
        eqs = [parse("x - y", XY), parse("x^2 - 1", XY)]
        assert count_points(eqs, 7) == 2

    def test_zero_polynomial(self):
        assert count_points([Poly.zero(XY)], 3) == 9

    def test_gf_coefficients(self):
        f = parse("x^2 + 1", X1, GF(5))
        assert count_points([f], 5) == 2

    def test_wrong_gf(self):
        with pytest.raises(ValueError):
            count_points([parse("x + 1", X1, GF(5))], 7)

    def test_bad_denominator(self):
        with pytest.raises(ValueError):
            count_points([parse("x/3 + 1", X1)], 3)

    def test_non_prime(self):
        with pytest.raises(ValueError):
            count_points([parse("x", X1)], 4)

    def test_q_too_large(self):
        with pytest.raises(ValueError):
            count_points([parse("x", X1)], 257)

    def test_budget(self, monkeypatch):
        monkeypatch.setenv("AFFMOD_MAX_CELLS", "100")
        assert max_cells() == 100
        with pytest.raises(BudgetExceeded):
            count_points([parse("u*v - x", VarContext(["x", "u", "v"]))], 5)

    def test_bad_budget_env(self, monkeypatch):
        monkeypatch.setenv("AFFMOD_MAX_CELLS", "lots")
        with pytest.raises(ValueError):
            max_cells()

    def test_chunking_matches_naive(self, monkeypatch):
        import affmod.ffcount as ff

        monkeypatch.setattr(ff, "CHUNK_CELLS", 8)
        f = parse("x^2*y - y^3 + x - 2", XY)
        assert count_points([f], 11) == naive_count(f, 11)

    @settings(max_examples=40)
    @given(polys(XY, max_terms=4, max_exp=3), st.sampled_from([2, 3, 5, 7]))
    def test_matches_naive(self, f, q):
        if any(c.denominator % q == 0 for c in f.terms.values()):
            return
        assert count_points([f], q) == naive_count(f, q)

    @settings(max_examples=30)
    @given(polys(XY, max_terms=4, max_exp=3), st.sampled_from([3, 5]))
    def test_permutation_invariance(self, f, q):
        if any(c.denominator % q == 0 for c in f.terms.values()):
            return
        swap = {"x": Poly.var(XY, "y"), "y": Poly.var(XY, "x")}
        from affmod.poly import PolyMap, substitute

        g = substitute(f, PolyMap.from_mapping(XY, XY, swap))
        assert count_points([f], q) == count_points([g], q)


class TestUvIdentity:
    @pytest.mark.parametrize(
        "text,q,n_x,n_0",
        [("x", 3, 9, 1), ("x^2", 3, 9, 1), ("x", 2, 4, 1)],
    )
    def test_examples(self, text, q, n_x, n_0):
        r = uv_identity(parse(text, X1), q)
        assert (r.N_X, r.N_0, r.predicted, r.match) == (n_x, n_0, n_x, True)
        assert uv_identity_fast(parse(text, X1), q) == r

    def test_fiber_table(self):
        # uv = 0 has 2q - 1 solutions, every other value q - 1
        for q in (2, 3, 5, 7):
            t = uv_fiber_table(q)
            assert t[0] == 2 * q - 1 and all(t[1:] == q - 1)

    def test_histogram_total(self):
        h = value_histogram(parse("x*y + x^3", XY), 5)
        assert h.sum() == 25 and isinstance(h, np.ndarray)

    def test_report_dict(self):
        d = uv_identity_fast(parse("x", X1), 3).to_dict()
        assert d == {"q": 3, "k": 1, "N_X": 9, "N_0": 1, "predicted": 9, "match": True}

    @settings(max_examples=25)
    @given(polys(XY, max_terms=4, max_exp=3), st.sampled_from([2, 3, 5]))
    def test_fast_agrees_with_brute_force(self, p, q):
        if any(c.denominator % q == 0 for c in p.terms.values()):
            return
        assert uv_identity_fast(p, q) == uv_identity(p, q)
        assert uv_identity(p, q).match


class TestSingularWitness:
    def test_smooth(self):
        ctx = VarContext(["x", "u", "v"])
        for q in (2, 3, 5):
            assert singular_witness([parse("u*v - x", ctx)], q) is None

    def test_cusp(self):
        ctx = VarContext(["x", "y", "u", "v"])
        assert singular_witness([parse("u*v - x^2 - y^3", ctx)], 5) == (0, 0, 0, 0)

    def test_empty(self):
        assert singular_witness([], 5) is None

    def test_budget_must_be_positive(self):
        with pytest.raises(ValueError):
            singular_witness([parse("x", X1)], 5, sample_budget=0)

    def test_budget_limits_search(self):
        # the only singular point of (x-4)^2 over F_5 is x = 4, the last in lex order
        f = parse("x^2 - 8*x + 16", X1)
        assert singular_witness([f], 5) == (4,)
        assert singular_witness([f], 5, sample_budget=4) is None
