import numpy as np
import pytest

from hyperfit.fit import fit_community
from hyperfit.model import Infeasible, ModelParams
from hyperfit.synth import (
    PlantedCommunity,
    SampleSpec,
    _pair_from_index,
    area_pairs,
    planted_spec,
    sample_graph,
)


def edge_set(g):
    u, v = g.edges()
    return set(zip(u.tolist(), v.tolist()))


class TestSampling:
    def test_exact_areas(self):
        nodes = (5, 2, 9, 0, 7, 3, 8)
        spec = SampleSpec(12, (PlantedCommunity(nodes, 2, 1, 1.0),), 0.0, seed=4)
        g = sample_graph(spec)
        mp = ModelParams.from_fixed(2, 1, 7)
        expected = set()
        for i in range(7):
            for j in range(7):
                if i != j and mp.contains(i, j):
                    a, b = nodes[i], nodes[j]
                    expected.add((min(a, b), max(a, b)))
        assert edge_set(g) == expected

    def test_empty(self):
        spec = SampleSpec(30, (PlantedCommunity(tuple(range(10)), 3, 1, 0.0),), 0.0)
        assert sample_graph(spec).m == 0

    def test_full_background(self):
        g = sample_graph(SampleSpec(15, (), 1.0))
        assert g.m == 15 * 14 // 2

    def test_deterministic(self):
        spec = planted_spec(300, [40, 50], 0.7, 0.02, seed=9, overlap=0.2)
        a, b = sample_graph(spec), sample_graph(spec)
        assert np.array_equal(a.indices, b.indices) and np.array_equal(a.indptr, b.indptr)
        other = sample_graph(SampleSpec(spec.n_nodes, spec.communities, spec.d_out, seed=10))
        assert edge_set(other) != edge_set(a)

    def test_first_community_governs(self):
        nodes = tuple(range(20))
        spec = SampleSpec(20, (PlantedCommunity(nodes, 19, 19, 1.0),
                               PlantedCommunity(nodes, 19, 19, 0.0)), 0.0)
        assert sample_graph(spec).m == 190

    def test_inside_density(self):
        n_c, gamma, h = 200, 30, 10
        i, j = area_pairs(ModelParams.from_fixed(gamma, h, n_c))
        nodes = tuple(range(n_c))
        rates = []
        for seed in range(20):
            g = sample_graph(SampleSpec(n_c, (PlantedCommunity(nodes, gamma, h, 0.9),), 0.02,
                                        seed=seed))
            A = g.adjacency()
            rates.append(np.asarray(A[i, j]).mean())
        pooled = float(np.mean(rates))
        se = np.sqrt(0.9 * 0.1 / (i.size * 20))
        assert abs(pooled - 0.9) <= 3 * se
        assert all(abs(r - 0.9) <= 0.03 for r in rates)

    def test_background_density(self):
        n = 2000
        g = sample_graph(SampleSpec(n, (), 0.01, seed=3))
        pairs = n * (n - 1) / 2
        se = np.sqrt(0.01 * 0.99 / pairs)
        assert abs(g.m / pairs - 0.01) <= 4 * se

    def test_pair_index_inverse(self):
        for n in (2, 3, 17, 100):
            t = np.arange(n * (n - 1) // 2)
            u, v = _pair_from_index(t, n)
            ru, rv = np.triu_indices(n, 1)
            assert np.array_equal(u, ru) and np.array_equal(v, rv)

    def test_area_pairs(self):
        mp = ModelParams.from_fixed(3, 1, 10)
        i, j = area_pairs(mp)
        assert (i > j).all()
        assert 2 * i.size + 4 == mp.area()  # plus the gamma + 1 diagonal cells


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SampleSpec(10, (), 1.5)
        with pytest.raises(ValueError):
            SampleSpec(10, (PlantedCommunity((0, 1, 2), 0, 0, -0.1),), 0.1)
        with pytest.raises(Infeasible):
            SampleSpec(200, (PlantedCommunity(tuple(range(100)), 10, 10, 0.5),), 0.1)
        with pytest.raises(ValueError):
            SampleSpec(5, (PlantedCommunity((0, 1, 9), 0, 0, 0.5),), 0.1)

    def test_dict_round_trip(self):
        spec = planted_spec(100, [20, 30], [0.5, 0.7], 0.01, seed=5, overlap=0.25)
        assert SampleSpec.from_dict(spec.to_dict()) == spec

    def test_overlap(self):
        spec = planted_spec(500, [40, 40], 0.5, 0.0, seed=1, overlap=0.5)
        a, b = (set(c.nodes) for c in spec.communities)
        assert len(a & b) == 20


def test_recovery_with_planted_order():
    errors = []
    nodes = tuple(range(200))
    for seed in range(5):
        spec = SampleSpec(200, (PlantedCommunity(nodes, 30, 10, 0.9),), 0.02, seed=seed)
        g = sample_graph(spec)
        fit = fit_community(g, np.arange(200), mode="fixed", order=np.array(nodes))
        errors.append((abs(fit.params.gamma - 30), abs(fit.params.h - 10)))
    assert np.median([e[0] for e in errors]) <= 3
    assert np.median([e[1] for e in errors]) <= 3


def test_recovery_with_degree_order():
    # the realistic pipeline: the order is re-derived from sampled degrees
    errors = []
    nodes = tuple(range(200))
    for seed in range(5):
        spec = SampleSpec(200, (PlantedCommunity(nodes, 30, 10, 0.9),), 0.02, seed=seed)
        fit = fit_community(sample_graph(spec), np.arange(200), mode="fixed")
        errors.append((abs(fit.params.gamma - 30), abs(fit.params.h - 10)))
    assert np.median([e[0] for e in errors]) <= 3
    assert np.median([e[1] for e in errors]) <= 3
