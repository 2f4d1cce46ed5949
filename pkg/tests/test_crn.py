import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trafficreaction.core import DensityState, DomainError, Fixed, FluxModel, Grid, RampConfig, Ring
from trafficreaction.crn import (
    ReactionNetwork,
    build_network,
    compatibility_class_check,
    export_reaction_graph,
    mass_action_rhs,
    ode_terms,
    reaction_rates,
    reduce_to_trm,
    simulate_mass_action,
    stoichiometric_subspace,
    to_dot,
    to_json,
)
from trafficreaction.schemes import TRM, rhs

# rows N_{i-1}, N_i, N_{i+1}, S_{i-1}, S_i, S_{i+1}; columns C_1..C_4
Y_THREE_SEGMENTS = np.array([
    [1, 0, 0, 0],
    [0, 1, 1, 0],
    [0, 0, 0, 1],
    [0, 1, 0, 0],
    [1, 0, 0, 1],
    [0, 0, 1, 0],
])


class TestBuild:
    def test_three_segment_line(self):
        net = build_network(3)
        assert net.n_species == 6 and net.n_complexes == 4 and len(net.reactions) == 2
        np.testing.assert_array_equal(net.Y, Y_THREE_SEGMENTS)
        assert [net.complex_label(j) for j in range(4)] == ["N_1+S_2", "N_2+S_1", "N_2+S_3", "N_3+S_2"]

    def test_single_on_ramp(self):
        net = build_network(1, k_on=[2.0])
        assert net.species == ("N_1", "S_1")
        assert len(net.reactions) == 1
        r = net.reactions[0]
        assert (net.complex_label(r.source), net.complex_label(r.product)) == ("S_1", "N_1")

    @pytest.mark.parametrize("n", [2, 3, 7])
    def test_ring(self, n):
        net = build_network(n, "ring")
        assert net.n_species == 2 * n
        assert sum(r.kind == "transport" for r in net.reactions) == n

    def test_complexes_are_at_most_bimolecular(self):
        net = build_network(5, "ring", k_on={1: 1.0}, k_off={4: 2.0})
        assert net.Y.sum(axis=0).max() <= 2

    def test_ramp_complexes_are_shared(self):
        net = build_network(3, "ring", k_on={1: 1.0}, k_off={1: 1.0})
        assert net.n_complexes == 6 + 2
        assert len(export_reaction_graph(net).edges) == 3 + 2

    @pytest.mark.parametrize("kwargs", [
        dict(segments=3, topology="tree"),
        dict(segments=3, k=0.0),
        dict(segments=3, k=[1.0, -1.0]),
        dict(segments=3, k=[1.0, 1.0, 1.0]),
        dict(segments=1, topology="ring"),
        dict(segments=0),
        dict(segments=3, k_on=[1.0, -2.0, 0.0]),
        dict(segments=3, k_off={4: 1.0}),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            build_network(**kwargs)

    def test_invalid_reaction(self):
        from trafficreaction.crn import Reaction
        with pytest.raises(ValueError):
            ReactionNetwork(("A",), [[1]], (Reaction(0, 1, 1.0),))


class TestKinetics:
    def test_hand_evaluation(self):
        net = build_network(3)
        # n1=2, n2=1, n3=0, s1=0, s2=3, s3=4
        x = np.array([2.0, 1.0, 0.0, 0.0, 3.0, 4.0])
        assert mass_action_rhs(net, x)[1] == 2.0

    def test_zero_state(self):
        net = build_network(4, "ring", k_on=[1, 0, 2, 0], k_off=[0, 1, 0, 3])
        assert np.all(mass_action_rhs(net, np.zeros(8)) == 0)

    def test_unimolecular(self):
        net = build_network(1, k_on=[2.0])
        np.testing.assert_array_equal(mass_action_rhs(net, [0.0, 5.0]), [10.0, -10.0])

    def test_negative_concentration(self):
        with pytest.raises(DomainError):
            mass_action_rhs(build_network(2), [1.0, -1.0, 0.0, 0.0])

    def test_degrees(self):
        net = build_network(4, "ring", k_on={2: 1.0}, k_off={3: 1.0})
        x = np.random.default_rng(0).uniform(0, 5, 8)
        r1, r2 = reaction_rates(net, x), reaction_rates(net, 2 * x)
        for r, a, b in zip(net.reactions, r1, r2):
            scale = 4.0 if r.kind == "transport" else 2.0
            assert b == pytest.approx(scale * a)

    def test_kinetic_form(self):
        # every negative monomial in dx_l/dt contains x_l
        net = build_network(5, "ring", k_on=[1, 2, 0, 0, 1], k_off=[0, 1, 1, 0, 0])
        for l, coeff, expo in ode_terms(net):
            if coeff < 0:
                assert expo[l] >= 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 8), st.sampled_from(["line", "ring"]), st.data())
    def test_segment_totals_are_first_integrals(self, n, topo, data):
        on = data.draw(st.lists(st.floats(0, 3), min_size=n, max_size=n))
        off = data.draw(st.lists(st.floats(0, 3), min_size=n, max_size=n))
        net = build_network(n, topo, 0.7, on, off)
        x = np.array(data.draw(st.lists(st.floats(0, 100), min_size=2 * n, max_size=2 * n)))
        d = mass_action_rhs(net, x)
        np.testing.assert_allclose(d[:n] + d[n:], 0.0, atol=1e-9)


class TestReduction:
    def test_uniform_ring_is_steady(self):
        red = reduce_to_trm(build_network(6, "ring", 0.5), 100.0)
        assert np.all(red(np.full(6, 30.0)) == 0.0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 8), st.sampled_from(["line", "ring"]), st.data())
    def test_matches_mass_action_substitution(self, n, topo, data):
        c = np.array(data.draw(st.lists(st.floats(1, 100), min_size=n, max_size=n)))
        frac = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
        on = data.draw(st.lists(st.floats(0, 2), min_size=n, max_size=n))
        net = build_network(n, topo, 0.3, k_on=on, k_off=on[::-1])
        nv = frac * c
        full = mass_action_rhs(net, np.concatenate([nv, c - nv]))
        np.testing.assert_allclose(reduce_to_trm(net, c)(nv), full[:n], rtol=0, atol=1e-12 * max(1, c.max() ** 2))

    def test_matches_trm_on_paper_geometry(self):
        # dx = 20 / N: same field up to round-off relative to its size
        m = FluxModel(1.0, 100.0)
        rng = np.random.default_rng(4)
        for n in range(2, 11):
            g = Grid(20.0, n)
            for topo, bc in (("line", Fixed(0.0, 100.0)), ("ring", Ring())):
                red = reduce_to_trm(build_network(n, topo, m.omega / g.dx), 100.0)
                for _ in range(20):
                    rho = rng.uniform(0, 100, n)
                    ref = rhs(DensityState(0.0, rho, 100.0), g, bc, TRM.quadratic(m))
                    np.testing.assert_allclose(red(rho), ref, rtol=0, atol=1e-12 * max(1.0, np.abs(ref).max()))

    def test_capacity_violation(self):
        red = reduce_to_trm(build_network(2), 10.0)
        with pytest.raises(DomainError):
            red(np.array([11.0, 1.0]))

    def test_needs_road_network(self):
        with pytest.raises(ValueError):
            reduce_to_trm(ReactionNetwork(("A", "B"), [[1, 0], [0, 1]], ()), 1.0)


class TestSubspace:
    def test_three_segments(self):
        basis = stoichiometric_subspace(build_network(3))
        np.testing.assert_array_equal(basis, [[-1, 1, 0, 1, -1, 0], [0, -1, 1, 0, 1, -1]])

    def test_empty(self):
        assert stoichiometric_subspace(build_network(1)).shape == (0, 2)

    def test_single_on_ramp(self):
        np.testing.assert_array_equal(stoichiometric_subspace(build_network(1, k_on=[1.0])), [[1, -1]])

    def test_ring_drops_dependent_reaction(self):
        # transport vectors on a ring sum to zero
        assert stoichiometric_subspace(build_network(4, "ring")).shape[0] == 3


class TestCompatibility:
    def test_constant_trajectory(self):
        net = build_network(3)
        assert compatibility_class_check(np.tile([1, 2, 3, 4, 5, 6.0], (5, 1)), net).passed

    def test_simulated_trajectory(self):
        net = build_network(3, k=[0.5, 0.8])
        x0 = np.array([40.0, 10.0, 70.0, 60.0, 90.0, 30.0])
        _, X = simulate_mass_action(net, x0, 2.0)
        rep = compatibility_class_check(X, net)
        assert rep.passed, rep.violations
        np.testing.assert_allclose(X[:, :3] + X[:, 3:], np.tile(x0[:3] + x0[3:], (X.shape[0], 1)), atol=1e-9)

    def test_perturbation_detected(self):
        net = build_network(3, k=[0.5, 0.8])
        _, X = simulate_mass_action(net, np.array([40.0, 10.0, 70.0, 60.0, 90.0, 30.0]), 1.0, n_samples=11)
        X[5, 0] += 1e-3
        rep = compatibility_class_check(X, net)
        assert not rep.passed and "sample 5" in rep.violations[0]


class TestExport:
    def test_graph(self):
        g = export_reaction_graph(build_network(3, k=[0.25, 0.5]))
        assert g.number_of_nodes() == 4 and g.number_of_edges() == 2
        assert sorted(w for *_, w in g.edges(data="weight")) == [0.25, 0.5]

    def test_vertex_only_graph(self):
        g = export_reaction_graph(build_network(1))
        assert g.number_of_edges() == 0

    def test_dot(self):
        dot = to_dot(build_network(3), header="hello")
        assert dot.startswith("// hello\ndigraph")
        assert 'c0 -> c1 [label="1"]' in dot

    def test_json_round_trip(self):
        doc = json.loads(to_json(build_network(3), extra=1))
        np.testing.assert_array_equal(doc["Y"], Y_THREE_SEGMENTS)
        assert doc["reactions"][0]["label"] == "N_1+S_2 -> N_2+S_1"
        assert doc["extra"] == 1
