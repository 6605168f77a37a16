import numpy as np
import pytest
from scipy import sparse
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hyperfit.estimator import PARAM_COLUMNS, HyperbolicCommunityModel, check_graph, check_node_sets
from hyperfit.graph_fit import fit_graph
from hyperfit.synth import planted_spec, sample_graph


@pytest.fixture(scope="module")
def planted():
    spec = planted_spec(300, [50, 60], 0.8, 0.02, seed=7, overlap=0.2)
    return sample_graph(spec), [np.array(c.nodes) for c in spec.communities]


def test_params_round_trip():
    est = HyperbolicCommunityModel(mode="block", max_rounds=3)
    assert est.get_params() == {"mode": "block", "max_rounds": 3, "epsilon": 1e-9,
                                "n_jobs": None}
    twin = clone(est).set_params(mode="hycom")
    assert twin.mode == "hycom" and est.mode == "block"


def test_fit_transform(planted):
    g, sets = planted
    est = HyperbolicCommunityModel().fit(g, sets)
    table = est.transform()
    assert table.shape == (2, len(PARAM_COLUMNS))
    assert table[:, 0].tolist() == [50, 60]
    direct = fit_graph(g, sets)
    assert est.score() == pytest.approx(direct.log_likelihood)
    assert est.d_out_ == pytest.approx(direct.d_out)
    assert [f.index for f in est.communities_] == [0, 1]
    x = table[:, PARAM_COLUMNS.index("x")]
    assert ((-1 <= x) & (x <= 1)).all()


def test_matrix_inputs(planted):
    g, sets = planted
    A = g.adjacency()
    a = HyperbolicCommunityModel().fit(A, sets)
    b = HyperbolicCommunityModel().fit(A.toarray(), sets)
    c = HyperbolicCommunityModel().fit(g, sets)
    assert a.score() == b.score() == c.score()


def test_not_fitted():
    with pytest.raises(NotFittedError):
        HyperbolicCommunityModel().transform()


class TestValidation:
    def test_bad_mode(self, planted):
        g, sets = planted
        with pytest.raises(ValueError, match="unknown mode"):
            HyperbolicCommunityModel(mode="other").fit(g, sets)

    def test_bad_rounds(self, planted):
        g, sets = planted
        with pytest.raises(ValueError):
            HyperbolicCommunityModel(max_rounds=-1).fit(g, sets)

    def test_graph_shapes(self):
        with pytest.raises(ValueError, match="square"):
            check_graph(np.zeros((3, 4)))
        with pytest.raises(ValueError, match="2-D"):
            check_graph(np.zeros(3))
        with pytest.raises(ValueError, match="symmetric"):
            check_graph(sparse.csr_array(np.array([[0, 1], [0, 0]])))

    def test_node_sets(self):
        with pytest.raises(ValueError, match="required"):
            check_node_sets(None, 5)
        with pytest.raises(ValueError, match="at least one"):
            check_node_sets([], 5)
        with pytest.raises(ValueError, match="at least 2"):
            check_node_sets([[1]], 5)
        with pytest.raises(ValueError, match="outside"):
            check_node_sets([[1, 7]], 5)
        with pytest.raises(ValueError, match="duplicate"):
            check_node_sets([[1, 1, 2]], 5)
        with pytest.raises(ValueError, match="integers"):
            check_node_sets([[0.5, 1.0]], 5)
