"""Property-based invariants across the probability and graph layers."""

import math
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from chargraph.graphs import make_graph, or_power
from chargraph.probability import (
    JointPmf,
    Pmf,
    binary_entropy,
    diniz_joint,
    entropy,
    iid_bernoulli_joint,
    mutual_information,
    parity_param,
    product_param,
)
from chargraph.functions import LinearlySeparable, demand_from_json, demand_to_json
from chargraph.solvers import (
    chromatic_entropy,
    conditional_graph_entropy,
    graph_entropy,
)
from chargraph.topology import Topology, coverage_check, cyclic_placement


@st.composite
def char_graphs(draw, max_n=7):
    n = draw(st.integers(2, max_n))
    weights = draw(
        st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)
    )
    edges = [
        pair
        for pair in combinations(range(n), 2)
        if draw(st.booleans())
    ]
    return make_graph(dict(enumerate(weights)), edges)


class TestProbabilityProperties:
    @given(st.floats(0.0, 1.0))
    def test_binary_entropy_symmetric_and_bounded(self, p):
        assert 0.0 <= binary_entropy(p) <= 1.0
        assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p))

    @given(st.integers(1, 12), st.floats(0.0, 1.0))
    def test_parity_param_closed_form(self, l, eps):
        want = (1.0 - (1.0 - 2.0 * eps) ** l) / 2.0
        assert parity_param(l, eps) == pytest.approx(want, abs=1e-9)

    @given(st.integers(1, 12), st.floats(0.0, 1.0))
    def test_product_param_closed_form(self, l, eps):
        assert product_param(l, eps) == pytest.approx(eps**l, abs=1e-9)

    @given(st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6))
    def test_from_masses_accepts_in_tolerance_drift(self, raw):
        total = math.fsum(raw)
        normalized = [v / total for v in raw]
        p = Pmf.from_masses(normalized)
        assert math.fsum(p.mass) == pytest.approx(1.0, abs=1e-9)
        assert entropy(p) >= -1e-12

    @given(st.integers(1, 6), st.floats(0.01, 0.99))
    def test_iid_joint_entropy_is_additive(self, k, eps):
        joint = iid_bernoulli_joint(k, eps)
        assert joint.entropy() == pytest.approx(k * binary_entropy(eps), abs=1e-9)

    @given(st.integers(1, 6), st.floats(0.01, 0.99))
    def test_mixture_sum_law_at_rho_zero_is_binomial(self, k, eps):
        j = diniz_joint(k, eps, 0.0)
        assert math.fsum(j.mass) == pytest.approx(1.0, abs=1e-9)
        for s in range(k + 1):
            want = math.comb(k, s) * eps**s * (1 - eps) ** (k - s)
            assert j.mass[s] == pytest.approx(want, abs=1e-12)

    @given(
        st.integers(2, 5),
        st.floats(0.01, 0.99),
        st.floats(0.0, 1.0),
    )
    def test_mixture_sum_law_normalized(self, k, eps, rho):
        j = diniz_joint(k, eps, rho)
        assert math.fsum(j.mass) == pytest.approx(1.0, abs=1e-9)
        assert all(m >= -1e-15 for m in j.mass)

    @given(st.data())
    def test_mutual_information_bounds(self, data):
        nx = data.draw(st.integers(2, 4))
        ny = data.draw(st.integers(2, 4))
        cells = data.draw(
            st.lists(
                st.floats(0.05, 1.0), min_size=nx * ny, max_size=nx * ny
            )
        )
        total = math.fsum(cells)
        mass = {
            (i, j): cells[i * ny + j] / total
            for i in range(nx)
            for j in range(ny)
        }
        joint = JointPmf((nx, ny), mass)
        mi = mutual_information(joint)
        hx = joint.marginal([0]).entropy()
        hy = joint.marginal([1]).entropy()
        assert -1e-9 <= mi <= min(hx, hy) + 1e-9


class TestGraphProperties:
    @settings(max_examples=40, deadline=None)
    @given(char_graphs())
    def test_entropy_sandwich(self, g):
        lower = graph_entropy(g).value
        upper = chromatic_entropy(g)
        assert -1e-9 <= lower <= upper + 1e-6
        assert upper <= math.log2(g.n) + 1e-9

    @settings(max_examples=30, deadline=None)
    @given(char_graphs(max_n=6), st.data())
    def test_edge_monotonicity(self, g, data):
        non_edges = [
            (i, j)
            for i, j in combinations(range(g.n), 2)
            if not g.adjacent(i, j)
        ]
        if not non_edges:
            return
        extra = data.draw(st.sampled_from(non_edges))
        denser = make_graph(
            {v: m for v, m in zip(g.vertices, g.pmf)},
            [(g.vertices[i], g.vertices[j]) for i, j in g.edges]
            + [(g.vertices[extra[0]], g.vertices[extra[1]])],
        )
        assert (
            graph_entropy(g).value <= graph_entropy(denser).value + 1e-6
        )

    @settings(max_examples=30, deadline=None)
    @given(char_graphs(max_n=6), st.data())
    def test_conditioning_never_hurts(self, g, data):
        ny = data.draw(st.integers(1, 3))
        rows = []
        for _ in range(g.n):
            w = data.draw(
                st.lists(st.floats(0.05, 1.0), min_size=ny, max_size=ny)
            )
            tot = math.fsum(w)
            rows.append([v / tot for v in w])
        mass = {
            (x, y): g.pmf[x] * rows[x][y]
            for x in range(g.n)
            for y in range(ny)
        }
        joint = JointPmf((g.n, ny), mass)
        cond = conditional_graph_entropy(g, joint).value
        assert cond <= graph_entropy(g).value + 1e-6

    @settings(max_examples=25, deadline=None)
    @given(char_graphs(max_n=5))
    def test_or_square_pmf_is_product(self, g):
        sq = or_power(g, 2)
        for idx, (a, b) in enumerate(sq.vertices):
            want = g.pmf[g.index[a]] * g.pmf[g.index[b]]
            assert sq.pmf[idx] == pytest.approx(want, abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(char_graphs(max_n=5))
    def test_or_square_entropy_is_double(self, g):
        # graph entropy is additive over independent OR powers
        single = graph_entropy(g).value
        double = graph_entropy(or_power(g, 2)).value
        assert double == pytest.approx(2 * single, abs=2e-5)


class TestStructureProperties:
    @given(st.integers(1, 5), st.integers(1, 2), st.data())
    def test_cyclic_placement_always_covers(self, n, delta, data):
        nr = data.draw(st.integers(1, n))
        t = Topology(
            n=n, k=delta * n, kc=1, m=delta * (n - nr + 1), nr=nr
        )
        p = cyclic_placement(t)
        assert coverage_check(p, t) is True
        replicas = t.m * t.n // t.k
        for dataset in range(1, t.k + 1):
            assert sum(dataset in z for z in p.zones) == replicas

    @given(st.data())
    def test_linear_demand_json_roundtrip(self, data):
        q = data.draw(st.sampled_from([2, 3, 5]))
        kc = data.draw(st.integers(1, 3))
        k = data.draw(st.integers(1, 4))
        gamma = tuple(
            tuple(
                data.draw(st.integers(0, q - 1)) for _ in range(k)
            )
            for _ in range(kc)
        )
        d = LinearlySeparable(q=q, gamma=gamma)
        assert demand_from_json(demand_to_json(d), k=k) == d
