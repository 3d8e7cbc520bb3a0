import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from momrec.errors import AmplitudeNotUnit, NodeCollision, ValidationError
from momrec.prony import (
    PronyProblem,
    confluent_column,
    forward,
    hankel_rank,
    solve_classical,
    solve_confluent,
    solve_signed,
)


def power_sums(nodes, amps, count):
    return [sum(a * x ** n for x, a in zip(nodes, amps)) for n in range(count)]


def random_instance(rng, exact=False):
    r = rng.randint(1, 4)
    while True:
        if exact:
            nodes = sorted(Fraction(rng.randint(-100, 100), 100) for _ in range(r))
        else:
            nodes = sorted(rng.uniform(-1, 1) for _ in range(r))
        if all(b - a >= 0.1 for a, b in zip(nodes, nodes[1:])):
            break
    if exact:
        amps = [Fraction(rng.randint(10, 200), 100) for _ in range(r)]
    else:
        amps = [rng.uniform(0.1, 2) for _ in range(r)]
    return nodes, amps


class TestClassical:
    def test_symmetric_pair(self):
        sol = solve_classical(PronyProblem([2, 0, 2, 0], 2))
        assert sol.nodes == pytest.approx([-1, 1])
        assert [a for (a,) in sol.amplitudes] == pytest.approx([1, 1])

    def test_opposite_signs(self):
        sol = solve_classical(PronyProblem([0, -2, 0, -2], 2))
        assert sol.nodes == pytest.approx([-1, 1])
        assert [a for (a,) in sol.amplitudes] == pytest.approx([1, -1])

    def test_zero_measure(self):
        sol = solve_classical(PronyProblem([0, 0, 0, 0], 2))
        assert len(sol) == 0

    def test_float_data_same_answer(self):
        sol = solve_classical(PronyProblem([2.0, 0.0, 2.0, 0.0], 2))
        assert sol.nodes == pytest.approx([-1, 1], abs=1e-10)

    def test_rejects_confluent_problem(self):
        with pytest.raises(ValidationError):
            solve_classical(PronyProblem([0] * 8, 2, confluency=1))

    def test_bad_problem(self):
        with pytest.raises(ValidationError):
            PronyProblem([1, 2], 0)

    @given(st.integers(0, 10 ** 6))
    def test_round_trip_float(self, seed):
        nodes, amps = random_instance(random.Random(seed))
        sol = solve_classical(PronyProblem(power_sums(nodes, amps, 2 * len(nodes)), len(nodes)))
        assert sol.nodes == pytest.approx(nodes, abs=1e-8)
        assert [a for (a,) in sol.amplitudes] == pytest.approx(amps, abs=1e-8)

    @given(st.integers(0, 10 ** 6))
    def test_round_trip_exact(self, seed):
        nodes, amps = random_instance(random.Random(seed), exact=True)
        sol = solve_classical(PronyProblem(power_sums(nodes, amps, 2 * len(nodes)), len(nodes)))
        assert sol.nodes == pytest.approx([float(x) for x in nodes], abs=1e-12)
        assert [a for (a,) in sol.amplitudes] == pytest.approx([float(a) for a in amps], abs=1e-12)

    @given(st.integers(0, 10 ** 6))
    def test_rank_is_node_count(self, seed):
        nodes, amps = random_instance(random.Random(seed))
        data = power_sums(nodes, amps, 2 * len(nodes) + 2)
        assert hankel_rank(data, len(nodes) + 1) == len(nodes)


class TestConfluent:
    def test_embedded_classical(self):
        data = [0 ** a - 2 * 1 ** a + 2 ** a for a in range(8)]
        sol = solve_confluent(PronyProblem(data, 3))
        assert sol.nodes == pytest.approx([0, 1, 2])
        assert [a for (a,) in sol.amplitudes] == pytest.approx([1, -2, 1])

    def test_single_derivative_node(self):
        data = [-a for a in range(8)]
        sol = solve_confluent(PronyProblem(data, 2, confluency=1))
        assert sol.nodes == pytest.approx([1])
        assert list(sol.amplitudes[0]) == pytest.approx([0, 1], abs=1e-12)

    def test_all_zero(self):
        assert len(solve_confluent(PronyProblem([0] * 12, 2, confluency=2))) == 0

    def test_column_is_delta_derivative_moment(self):
        assert confluent_column(Fraction(2), 1, 4) == [0, -1, -4, -12]

    @given(st.integers(0, 10 ** 6))
    def test_round_trip_exact(self, seed):
        rng = random.Random(seed)
        conf = rng.randint(1, 2)
        r = rng.randint(1, 3)
        nodes = sorted(Fraction(v, 10) for v in rng.sample(range(-10, 11), r))
        amps = [[Fraction(rng.randint(-9, 9), 4) for _ in range(conf + 1)] for _ in range(r)]
        for a in amps:
            if not any(a):
                a[-1] = Fraction(1)
        data = forward(nodes, amps, 2 * r * (conf + 1))
        sol = solve_confluent(PronyProblem(data, r, confluency=conf))
        assert sol.nodes == pytest.approx([float(x) for x in nodes], abs=1e-10)
        for got, want in zip(sol.amplitudes, amps):
            assert list(got) == pytest.approx([float(c) for c in want], abs=1e-8)


class TestSigned:
    def test_unit_strip(self):
        assert solve_signed([1, 1, 1, 1], 1) == pytest.approx([0, 1])

    def test_symmetric_strip(self):
        assert solve_signed([4, 0, 16, 0], 1) == pytest.approx([-2, 2])

    def test_two_strips(self):
        p = [2, 6, 20, 66, 212, 666, 2060, 6306]
        assert solve_signed(p, 2) == pytest.approx([0, 1, 2, 3])

    def test_float_sums(self):
        p = [2.0, 6.0, 20.0, 66.0, 212.0, 666.0, 2060.0, 6306.0]
        assert solve_signed(p, 2) == pytest.approx([0, 1, 2, 3], abs=1e-8)

    def test_wrong_strip_count(self):
        # two strips' worth of data read as one strip
        p = [2, 6, 20, 66, 212, 666, 2060]
        with pytest.raises(AmplitudeNotUnit):
            solve_signed(p[:4], 1)

    def test_amplitude_not_unit(self):
        # p_m = 2 * 1**m: a single node of weight 2
        with pytest.raises(AmplitudeNotUnit):
            solve_signed([2, 2, 2, 2], 1)

    def test_touching_strips_collide(self):
        # strips [0,1] and [1,2] share a boundary
        p = [(1 - 0) + (2 ** m - 1) for m in range(1, 9)]
        with pytest.raises((NodeCollision, AmplitudeNotUnit)):
            solve_signed(p, 2)

    def test_needs_enough_sums(self):
        with pytest.raises(ValidationError):
            solve_signed([1, 1], 1)

    @given(st.integers(0, 10 ** 6))
    def test_output_even_and_increasing(self, seed):
        rng = random.Random(seed)
        s = rng.randint(1, 3)
        ys = sorted(Fraction(v, 8) for v in rng.sample(range(-16, 17), 2 * s))
        p = [sum(ys[2 * l + 1] ** m - ys[2 * l] ** m for l in range(s)) for m in range(1, 4 * s + 1)]
        out = solve_signed(p, s)
        assert len(out) % 2 == 0
        assert all(a < b for a, b in zip(out, out[1:]))
        assert out == pytest.approx([float(y) for y in ys], abs=1e-10)
