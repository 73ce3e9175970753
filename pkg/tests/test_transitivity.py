import random
from fractions import Fraction

import pytest

from affmod.errors import DuplicatePointError, FiberPointsNotFound, OffVarietyError, SingularPointError
from affmod.fields import CC
from affmod.flows import HypersurfaceX, XPoint, apply_xgen, invert_word
from affmod.parsing import parse
from affmod.poly import VarContext, format_poly
from affmod.transitivity import (
    fiber_points,
    g0_transitive,
    gather_into_U1,
    integer_sequence,
    interpolate,
    is_smooth_point,
    move_off_hypersurface,
    separating_shear_setup,
    solve,
    stabilizing_q,
    time_sequence,
    verify_plan,
)

from generators import rand_frac

XY = VarContext(["x", "y"])
F = Fraction


def P(*coords):
    return XPoint.from_tuple([F(c) for c in coords])


def X_of(text, ctx=XY):
    return HypersurfaceX(parse(text, ctx))


class TestSequences:
    def test_time_sequence(self):
        import itertools

        assert list(itertools.islice(time_sequence(), 6)) == [1, -1, F(1, 2), F(-1, 2), F(1, 3), F(-1, 3)]

    def test_integer_sequence(self):
        import itertools

        assert list(itertools.islice(integer_sequence(), 5)) == [0, 1, -1, 2, -2]


class TestSmoothness:
    def test_cusp_origin(self):
        assert not is_smooth_point(X_of("x^2 + y^3"), P(0, 0, 0, 0))

    def test_linear_p(self):
        X = X_of("x")
        assert is_smooth_point(X, P(0, 3, 0, 0))
        assert is_smooth_point(X, P(2, 3, 1, 2))

    def test_on_curve_with_gradient(self):
        assert is_smooth_point(X_of("x^2 + y^3"), P(1, -1, 0, 5))

    def test_off_variety(self):
        with pytest.raises(OffVarietyError):
            is_smooth_point(X_of("x"), P(1, 0, 0, 0))


class TestInterpolate:
    def test_examples(self):
        assert format_poly(interpolate([0, 1], [1, -1])) == "-2*t + 1"
        assert interpolate([0, 1, 2], [0, 0, 0]).is_zero()
        assert format_poly(interpolate([0, 1, 2], [0, 1, 4])) == "t^2"

    def test_duplicates(self):
        with pytest.raises(DuplicatePointError):
            interpolate([1, 1], [0, 1])

    def test_random_nodes(self):
        rng = random.Random(1)
        for _ in range(50):
            n = rng.randint(1, 6)
            nodes = list({rand_frac(rng, 9) for _ in range(n)})
            vals = [rand_frac(rng, 9) for _ in nodes]
            f = interpolate(nodes, vals)
            assert f.degree() < len(nodes)
            assert [f.evaluate([a]) for a in nodes] == vals


class TestSeparation:
    def test_already_separated(self):
        w, _ = separating_shear_setup([(0, 0), (1, 1)])
        assert len(w) == 0

    def test_collision_on_first_coordinate(self):
        w, rep = separating_shear_setup([(0, 0), (0, 1)])
        assert rep.first_form == (1,)
        imgs = [w.apply((F(0), F(0))), w.apply((F(0), F(1)))]
        assert imgs[0][0] != imgs[1][0] and imgs[0][1] != imgs[1][1]

    def test_collinear_in_three_space(self):
        pts = [(0, 0, 0), (1, 1, 1), (2, 2, 2)]
        w, rep = separating_shear_setup(pts)
        assert all(abs(c) <= 3 for c in rep.first_form) and abs(rep.second_shift) <= 3
        imgs = [w.apply(tuple(F(c) for c in p)) for p in pts]
        assert len({p[0] for p in imgs}) == 3 and len({p[1] for p in imgs}) == 3


class TestG0:
    def test_single_point(self):
        w = g0_transitive([(0, 0)], [(2, 3)])
        assert w.apply((F(0), F(0))) == (2, 3)

    def test_swap_pair(self):
        w = g0_transitive([(0, 0), (1, 1)], [(0, 1), (1, 0)])
        assert [w.apply((F(a), F(b))) for a, b in [(0, 0), (1, 1)]] == [(0, 1), (1, 0)]

    def test_identity(self):
        assert len(g0_transitive([(1, 2), (3, 4)], [(1, 2), (3, 4)])) == 0

    def test_duplicates(self):
        with pytest.raises(DuplicatePointError):
            g0_transitive([(0, 0), (0, 0)], [(1, 1), (2, 2)])

    def test_inverse_word_returns(self):
        src, tgt = [(0, 0, 1), (1, 0, 0), (0, 1, 0)], [(5, 5, 5), (1, 2, 3), (-1, 0, 1)]
        w = g0_transitive(src, tgt)
        inv = invert_word(w)
        for s, t in zip(src, tgt):
            assert inv.apply(tuple(F(c) for c in t)) == tuple(F(c) for c in s)


class TestFiberPoints:
    def test_linear_in_y(self):
        assert fiber_points(parse("x + x^2*y", XY), 5, 2) == [(1, 4), (2, F(3, 4))]

    def test_coordinate(self):
        pts = fiber_points(parse("x", XY), 7, 3)
        assert len(set(pts)) == 3 and all(p[0] == 7 for p in pts)

    def test_no_rational_points(self):
        with pytest.raises(FiberPointsNotFound):
            fiber_points(parse("x^2 + y^2", XY), -1, 1)

    def test_avoid(self):
        pts = fiber_points(parse("x", XY), 1, 2, avoid=[(1, 0)])
        assert (1, 0) not in pts

    def test_approximate_backend(self):
        p = parse("x^2 + y^2", XY, CC)
        pts = fiber_points(p, -1, 2)
        assert all(p.evaluate(pt) == CC(-1) for pt in pts)


class TestMoveAndGather:
    def test_nothing_to_do(self):
        X = X_of("x")
        w, imgs = move_off_hypersurface(X, [P(1, 0, 1, 1)], "U0")
        assert len(w) == 0 and imgs == [P(1, 0, 1, 1)]

    def test_u_zero_point(self):
        X = X_of("x")
        w, imgs = move_off_hypersurface(X, [P(0, 0, 0, 5)], "U0")
        assert imgs[0].u != 0 and X.contains(imgs[0])
        assert w.apply(P(0, 0, 0, 5), X) == imgs[0]

    def test_gradient_direction(self):
        X = X_of("x^2 + y^3")
        w, imgs = move_off_hypersurface(X, [P(1, -1, 0, 2)], "U0")
        assert len(w) == 1 and imgs[0].u != 0

    def test_singular_input(self):
        with pytest.raises(SingularPointError):
            move_off_hypersurface(X_of("x^2 + y^3"), [P(0, 0, 0, 0)], "U0")

    def test_gather_single_in_U1(self):
        X = X_of("x")
        res = gather_into_U1(X, [P(2, 0, 1, 2)])
        assert len(res.word) == 0

    def test_gather_one_group(self):
        X = X_of("x")
        res = gather_into_U1(X, [P(2, 5, 2, 1)])
        assert res.images[0].u == 1

    def test_two_levels_do_not_disturb_each_other(self):
        X = X_of("x + x^2*y")
        pts = [P(1, 1, 2, 1), P(1, 4, 5, 1), P(2, 0, 1, 2)]
        res = gather_into_U1(X, pts)
        assert all(Q.u == 1 for Q in res.images)
        assert len({Q.as_tuple() for Q in res.images}) == 3
        assert [Q.v for Q in res.images] == [1, 1, 2]

    def test_stabilizer_fixes_other_levels(self):
        rng = random.Random(3)
        X = X_of("x + x^2*y")
        q = stabilizing_q(F(2), [F(1), F(-3)], X.field)
        assert q.evaluate([F(2)]) == 1 and q.evaluate([F(1)]) == 0 and q.evaluate([F(0)]) == 0
        from affmod.flows import XGenerator

        g = XGenerator.lift1("x", parse("y^2 + 1", XY), q, 1)
        for level in (F(0), F(1), F(-3)):
            for _ in range(10):
                xs = (rand_frac(rng, 5), rand_frac(rng, 5))
                val = X.p.evaluate(xs)
                Q = XPoint(xs, val / level if level else rand_frac(rng, 5), level)
                if level == 0 and val:
                    xs = (F(0), xs[1])
                    Q = XPoint(xs, rand_frac(rng, 5), F(0))
                assert apply_xgen(X, g, Q) == Q


class TestSolve:
    def test_example_p_equals_x(self):
        X = X_of("x")
        src, tgt = [P(0, 0, 0, 1)], [P(1, 1, 1, 1)]
        plan = solve(X, src, tgt)
        assert verify_plan(X, plan, src, tgt)

    def test_identity(self):
        X = X_of("x")
        pts = [P(1, 1, 1, 1), P(2, 0, 1, 2)]
        plan = solve(X, pts, pts)
        assert verify_plan(X, plan, pts, pts)

    def test_three_points(self):
        X = X_of("x + x^2*y")
        src = [P(1, 1, 2, 1), P(0, 3, 0, 7), P(-1, 2, 1, 1)]
        tgt = [P(2, 0, 1, 2), P(1, 0, 1, 1), P(0, 0, 5, 0)]
        plan = solve(X, src, tgt)
        assert verify_plan(X, plan, src, tgt)
        for _, _, pts in plan.trace:
            assert all(X.contains(Q) for Q in pts)

    def test_deleted_generator_fails(self):
        X = X_of("x + x^2*y")
        src = [P(1, 1, 2, 1), P(0, 3, 0, 7)]
        tgt = [P(2, 0, 1, 2), P(1, 0, 1, 1)]
        plan = solve(X, src, tgt)
        from affmod.flows import AutoWord
        from affmod.transitivity import TransitivityPlan

        broken = TransitivityPlan(AutoWord(plan.word.ctx, plan.word.steps[1:], "X"), [], {})
        assert not verify_plan(X, broken, src, tgt)

    def test_k1_rejected(self):
        X = HypersurfaceX(parse("x", VarContext(["x"])))
        with pytest.raises(ValueError):
            solve(X, [P(1, 1, 1)], [P(2, 1, 2)])

    def test_plan_json(self):
        X = X_of("x")
        plan = solve(X, [P(0, 0, 0, 1)], [P(1, 1, 1, 1)])
        data = plan.to_json()
        assert data["word"].startswith("XVARS x y\n")
        assert [t["stage"] for t in data["trace"]] == ["sources", "gathered", "matched", "targets"]
