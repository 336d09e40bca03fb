import itertools

import numpy as np
import pytest

from agents.compression_agent import (
    CompressionAgent, CompressionMethod, SelectionSet, compress, dom_scores, select, select_from_scores,
    snr_scores, sost_scores,
)
from agents.leakage_agent import DeviceNoise, LeakageAgent, make_synthetic_model
from data.traces import LeakageTrace, Secret, TraceSet
from utils.constants import VARIANCE_EPSILON
from utils.errors import DomainError


def test_selection_set_matrix_views():
    sel = SelectionSet(6, (4, 0, 2))
    assert sel.indices == (0, 2, 4)
    P = sel.sampling_matrix()
    np.testing.assert_array_equal(P @ P.T, np.eye(3))
    D = sel.diagonal()
    np.testing.assert_array_equal(D, P.T @ P)
    np.testing.assert_array_equal(D @ D, D)
    assert np.trace(D) == 3


def test_selection_set_rejects_bad_indices():
    with pytest.raises(DomainError):
        SelectionSet(4, (1, 1))
    with pytest.raises(DomainError):
        SelectionSet(4, (4,))


def test_selection_set_text_form():
    sel = SelectionSet(200, (12, 37, 62))
    assert str(sel) == "3/200: 12,37,62"
    assert SelectionSet.parse(str(sel)) == sel
    with pytest.raises(DomainError):
        SelectionSet.parse("2/10: 1")


def test_method_parse_and_labels():
    assert CompressionMethod.parse("3ppc").points_per_clock == 3
    assert CompressionMethod.parse("allap").threshold == pytest.approx(0.1)
    assert CompressionMethod.parse("allap@0.25").label == "allap@0.25"
    assert CompressionMethod.parse("sost@12").count == 12
    assert CompressionMethod.parse("snr@5").label == "snr@5"
    with pytest.raises(DomainError):
        CompressionMethod.parse("pca")
    with pytest.raises(DomainError):
        CompressionMethod.parse("20ppc", clock_len=10)


def test_dom_scores_identical_means_are_zero():
    trace_set = TraceSet(4, 1, {0: np.ones((3, 4)), 1: np.ones((3, 4))})
    np.testing.assert_array_equal(dom_scores(trace_set), np.zeros(4))


def test_dom_scores_single_point_difference():
    base = np.zeros((2, 5))
    shifted = base.copy()
    shifted[:, 3] = 0.7
    scores = dom_scores(TraceSet(5, 1, {0: base, 1: shifted}))
    np.testing.assert_allclose(scores, [0, 0, 0, 0.7, 0])


def test_dom_scores_match_pairwise_oracle():
    means = np.array([[0.0, 1.0, 2.0, -1.0], [0.5, -2.0, 2.0, 0.0], [3.0, 1.0, 0.0, 0.25]])
    trace_set = TraceSet(4, 2, {k: means[k][np.newaxis, :] for k in range(3)})
    oracle = np.zeros(4)
    for i, j in itertools.combinations(range(3), 2):
        oracle = np.maximum(oracle, np.abs(means[i] - means[j]))
    np.testing.assert_allclose(dom_scores(trace_set), oracle)


def test_dom_scores_need_two_keys():
    with pytest.raises(DomainError):
        dom_scores(TraceSet(3, 1, {0: np.zeros((2, 3))}))


def test_sost_scores_match_direct_summation(rng):
    traces = {k: rng.normal(loc=k, size=(5, 4)) for k in range(3)}
    trace_set = TraceSet(4, 2, traces)
    oracle = np.zeros(4)
    for i, j in itertools.combinations(range(3), 2):
        a, b = traces[i], traces[j]
        num = (a.mean(axis=0) - b.mean(axis=0)) ** 2
        den = a.var(axis=0, ddof=1) / 5 + b.var(axis=0, ddof=1) / 5
        oracle += num / den
    np.testing.assert_allclose(sost_scores(trace_set), oracle)


def test_sost_identical_means_and_noiseless_floor():
    flat = TraceSet(3, 1, {0: [[1.0, 0, 0], [-1.0, 0, 0]], 1: [[1.0, 0, 0], [-1.0, 0, 0]]})
    np.testing.assert_allclose(sost_scores(flat), np.zeros(3))
    noiseless = TraceSet(2, 1, {0: np.zeros((2, 2)), 1: np.ones((2, 2))})
    assert np.all(np.isfinite(sost_scores(noiseless)))


def test_snr_scores_limits():
    equal = TraceSet(2, 1, {0: [[0.0, 1.0], [2.0, 3.0]], 1: [[0.0, 1.0], [2.0, 3.0]]})
    np.testing.assert_allclose(snr_scores(equal), np.zeros(2))
    noiseless = TraceSet(2, 1, {0: np.zeros((2, 2)), 1: np.ones((2, 2))})
    # Var([0, 1]) = 0.25 sobre o piso de variância
    np.testing.assert_allclose(snr_scores(noiseless), 0.25 / VARIANCE_EPSILON)
    assert np.all(snr_scores(noiseless) <= 1.0 / VARIANCE_EPSILON)


def test_snr_argmax_is_informative(small_profiling, small_leakage):
    assert int(np.argmax(snr_scores(small_profiling))) in small_leakage.model.informative


def test_scores_are_mean_shift_invariant(small_profiling):
    shifted = TraceSet(small_profiling.m, small_profiling.B,
                       {k: v + 3.5 for k, v in small_profiling.traces.items()})
    for scorer in (dom_scores, sost_scores, snr_scores):
        np.testing.assert_allclose(scorer(shifted), scorer(small_profiling), rtol=1e-9, atol=1e-9)


def test_select_window_example():
    method = CompressionMethod("dom", points_per_clock=1, clock_len=4)
    sel = select_from_scores(method, [0, 9, 1, 0, 0, 0, 5, 0])
    assert sel.indices == (1, 6)


def test_select_skips_windows_below_floor():
    method = CompressionMethod("dom", points_per_clock=1, clock_len=4)
    scores = [1, 1, 1, 1.5, 1, 1, 1, 9]
    assert select_from_scores(method, scores).indices == (7,)


def test_select_allap_sost_snr_rules():
    scores = np.array([0.05, 1.0, 0.2, 0.09, 0.5, 0.0])
    assert select_from_scores(CompressionMethod("allap"), scores).indices == (1, 2, 4)
    assert select_from_scores(CompressionMethod("sost", count=2), scores).indices == (1, 4)
    with pytest.raises(DomainError):
        select_from_scores(CompressionMethod("snr", count=7), scores)


def test_select_empty_is_an_error():
    with pytest.raises(DomainError):
        select_from_scores(CompressionMethod("dom", clock_len=2), np.zeros(6))


def test_ppc_selections_are_nested(rng):
    for trial in range(20):
        informative = sorted(rng.choice(200, size=8, replace=False).tolist())
        model = make_synthetic_model(200, 8, informative, np.random.default_rng(trial))
        agent = LeakageAgent(model, DeviceNoise(0.0, 1.0))
        profiling = agent.generate(range(0, 256, 8), 10, rng)
        scores = dom_scores(profiling)
        selections = [
            set(select_from_scores(CompressionMethod("dom", points_per_clock=k, clock_len=25), scores).indices)
            for k in (1, 3, 20)
        ]
        assert selections[0] <= selections[1] <= selections[2]


def test_select_finds_informative_windows(small_profiling, small_leakage):
    sel = select(CompressionMethod("dom", points_per_clock=1, clock_len=5), small_profiling)
    assert set(sel.indices) == set(small_leakage.model.informative)


def test_compress_examples(rng):
    trace = np.arange(10.0)
    np.testing.assert_array_equal(compress(trace, SelectionSet.full(10)), trace)
    np.testing.assert_array_equal(compress(trace, SelectionSet(10, (0, 1, 9))), [0.0, 1.0, 9.0])
    sel = SelectionSet(10, tuple(rng.choice(10, 4, replace=False)))
    batch = rng.normal(size=(3, 10))
    np.testing.assert_allclose(compress(batch, sel), batch @ sel.sampling_matrix().T)


def test_compress_is_linear(rng):
    sel = SelectionSet(8, (1, 5, 6))
    a, b = rng.normal(size=8), rng.normal(size=8)
    np.testing.assert_allclose(compress(2.5 * a + b, sel), 2.5 * compress(a, sel) + compress(b, sel))


def test_compress_accepts_leakage_trace_and_checks_length():
    trace = LeakageTrace(np.arange(5.0), Secret(1, 2))
    np.testing.assert_array_equal(compress(trace, SelectionSet(5, (4,))), [4.0])
    with pytest.raises(DomainError):
        compress(np.zeros(4), SelectionSet(5, (1,)))


def test_compression_agent_requires_fit(small_profiling):
    agent = CompressionAgent(CompressionMethod("dom", clock_len=5))
    with pytest.raises(DomainError):
        agent.transform(np.zeros(20))
    sel = agent.fit(small_profiling)
    assert agent.transform(np.zeros((2, 20))).shape == (2, len(sel))
