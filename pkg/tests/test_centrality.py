"""Centrality scores, pessimistic ranking, and oracle agreement.

Frozen values for the reference trees were computed by hand and cross
checked against the brute-force oracles:

  T4 (parents 1,1,3): sizes [4,1,2,1]
      Jordan    [2,3,2,3]     closeness [4,6,4,6]
      rumor phi [2,6,2,6]     B' (q=2)  [5,9,5,9]
      B pairs   [2,0,2,0]     degree    [2,1,2,1]
      pessimistic Jordan ranking: centers {1,3}, I=3, R=2, gamma [2,4,1,3]
  P3 path: B^3 scores [8,2,8]
  S4 star: closeness ranking [1,4,3,2], I=1, R=1
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rootrank import (
    BETWEENNESS_PAIRS,
    BETWEENNESS_SQ,
    CLOSENESS,
    DEGREE,
    JORDAN,
    MEASURES,
    RUMOR,
    RecursiveTree,
    RngStream,
    ScoreOverflowError,
    betweenness_pairs_scores,
    betweenness_q,
    betweenness_sq_scores,
    closeness_scores,
    compute_profile,
    confidence_set,
    degree_scores,
    grow_urrt,
    jordan_scores,
    profile_csv,
    rumor_scores,
    subtree_sizes,
    verify_tree,
)
from rootrank.oracles import oracle_jordan, oracle_rank
from rootrank.tree import enumerate_recursive_trees

from test_tree import compact_strategy


class TestFrozenScores:
    def test_t4_all_measures(self, t4):
        assert jordan_scores(t4)[1:].tolist() == [2, 3, 2, 3]
        assert closeness_scores(t4)[1:].tolist() == [4, 6, 4, 6]
        logs, _ = rumor_scores(t4)
        assert np.allclose(logs[1:], np.log([2.0, 6.0, 2.0, 6.0]))
        assert betweenness_sq_scores(t4)[1:].tolist() == [5, 9, 5, 9]
        assert betweenness_pairs_scores(t4)[1:].tolist() == [2, 0, 2, 0]
        assert degree_scores(t4)[1:].tolist() == [2, 1, 2, 1]

    def test_p3_betweenness_cubed(self, p3):
        assert betweenness_sq_scores(p3, q=3)[1:].tolist() == [8, 2, 8]

    def test_singleton_scores(self):
        t = RecursiveTree([])
        for tag, measure in MEASURES.items():
            profile = compute_profile(t, measure)
            assert profile.rank[1:].tolist() == [1]
            assert profile.report.center_index == 1
            assert profile.report.root_rank == 1


class TestPessimisticRanking:
    def test_t4_jordan_ranking(self, t4):
        profile = compute_profile(t4, JORDAN)
        assert profile.rank[1:].tolist() == [2, 4, 1, 3]
        assert profile.report.center_index == 3
        assert profile.report.root_rank == 2
        assert profile.report.tied_center_set == (1, 3)

    def test_s4_closeness_ranking(self, s4):
        profile = compute_profile(s4, CLOSENESS)
        assert profile.rank[1:].tolist() == [1, 4, 3, 2]
        assert profile.report.center_index == 1
        assert profile.report.root_rank == 1

    def test_rank_is_permutation(self):
        t = grow_urrt(300, RngStream(5))
        for measure in MEASURES.values():
            profile = compute_profile(t, measure)
            assert sorted(profile.rank[1:].tolist()) == list(range(1, 301))

    def test_ties_ranked_by_descending_label(self, s4):
        # leaves 2,3,4 share degree 1; later arrivals rank ahead
        profile = compute_profile(s4, DEGREE)
        assert profile.rank[1:].tolist() == [1, 4, 3, 2]

    def test_confidence_set_t4(self, t4):
        profile = compute_profile(t4, JORDAN)
        assert confidence_set(profile.rank, 2).tolist() == [3, 1]
        assert confidence_set(profile.rank, 4).tolist() == [3, 1, 4, 2]
        with pytest.raises(ValueError):
            confidence_set(profile.rank, 0)
        with pytest.raises(ValueError):
            confidence_set(profile.rank, 5)

    def test_profile_csv_shape(self, t4):
        text = profile_csv(compute_profile(t4, JORDAN))
        lines = text.strip().split("\n")
        assert lines[0] == "vertex,score,rank"
        assert lines[1] == "1,2,2"
        assert len(lines) == 5


class TestOracleAgreement:
    def test_exhaustive_small(self):
        # every recursive tree with at most 6 vertices, all measures
        for n in range(1, 7):
            for t in enumerate_recursive_trees(n):
                verify_tree(t)

    @pytest.mark.parametrize("n,seed", [(30, 0), (137, 1), (400, 2)])
    def test_random_trees(self, n, seed):
        verify_tree(grow_urrt(n, RngStream(77, seed)))

    def test_jordan_against_oracle_directly(self):
        t = grow_urrt(80, RngStream(3))
        assert jordan_scores(t)[1:].tolist() == oracle_jordan(t)[1:].tolist()

    def test_rank_against_oracle(self):
        t = grow_urrt(40, RngStream(9))
        expected = oracle_rank(degree_scores(t).tolist(), larger_is_central=True)
        got = compute_profile(t, DEGREE).rank.tolist()
        assert got == expected

    @settings(max_examples=50, derandomize=True, deadline=None)
    @given(compact_strategy(max_n=10))
    def test_property_small_trees(self, compact):
        verify_tree(RecursiveTree(list(compact)))


class TestStructuralInvariants:
    """Centroid facts: at most two tied centers, adjacency, coincidence."""

    @pytest.mark.parametrize("seed", range(12))
    def test_center_set_facts(self, seed):
        t = grow_urrt(500, RngStream(400, seed))
        psi = jordan_scores(t)
        centers = compute_profile(t, JORDAN).report.tied_center_set
        assert 1 <= len(centers) <= 2
        if len(centers) == 2:
            a, b = centers
            assert t.parent[a] == b or t.parent[b] == a
        assert int(psi[list(centers)].max()) <= t.n // 2

    @pytest.mark.parametrize("seed", range(12))
    def test_tied_sets_coincide(self, seed):
        t = grow_urrt(500, RngStream(401, seed))
        sets = {
            tag: compute_profile(t, MEASURES[tag]).report.tied_center_set
            for tag in ("jordan", "closeness", "rumor")
        }
        assert sets["jordan"] == sets["closeness"] == sets["rumor"]

    @pytest.mark.parametrize("seed", range(6))
    def test_monotone_away_from_centroid(self, seed):
        t = grow_urrt(300, RngStream(402, seed))
        profile = compute_profile(t, JORDAN)
        centers = set(profile.report.tied_center_set)
        psi = jordan_scores(t)
        close = closeness_scores(t)
        logs, comparator = rumor_scores(t)
        c = profile.report.center_index
        # walk outward from the center; scores must strictly increase
        # once both endpoints are outside the tied set
        seen = {c}
        frontier = [c]
        while frontier:
            v = frontier.pop()
            neighbors = list(t.children[v].tolist())
            if v != 1:
                neighbors.append(int(t.parent[v]))
            for w in neighbors:
                if w in seen:
                    continue
                seen.add(w)
                frontier.append(w)
                if v in centers:
                    assert psi[w] >= psi[v]
                    assert close[w] >= close[v]
                    assert comparator.compare(w, v) >= 0
                else:
                    assert psi[w] > psi[v]
                    assert close[w] > close[v]
                    assert comparator.compare(w, v) > 0
        assert len(seen) == t.n


class TestBetweennessFamily:
    @pytest.mark.parametrize("seed", range(8))
    def test_pairs_and_sq_rank_identically(self, seed):
        t = grow_urrt(250, RngStream(403, seed))
        r_sq = compute_profile(t, BETWEENNESS_SQ).rank[1:].tolist()
        r_pairs = compute_profile(t, BETWEENNESS_PAIRS).rank[1:].tolist()
        assert r_sq == r_pairs

    def test_q_factory_tags(self):
        m = betweenness_q(5)
        assert m.tag == "betweenness-q5"
        assert m.q == 5

    def test_overflow_guard(self, t4):
        with pytest.raises(ScoreOverflowError):
            betweenness_sq_scores(t4, q=70)
        with pytest.raises(ScoreOverflowError):
            compute_profile(t4, betweenness_q(70))


class TestRerootingIdentities:
    def test_closeness_parent_identity(self):
        t = grow_urrt(600, RngStream(404))
        sizes = subtree_sizes(t)
        close = closeness_scores(t)
        for v in range(2, t.n + 1):
            assert close[v] - close[t.parent[v]] == t.n - 2 * sizes[v]

    def test_rumor_parent_identity(self):
        t = grow_urrt(600, RngStream(405))
        sizes = subtree_sizes(t)
        logs, _ = rumor_scores(t)
        for v in range(2, t.n + 1):
            gain = math.log(t.n - sizes[v]) - math.log(sizes[v])
            assert abs((logs[v] - logs[t.parent[v]]) - gain) < 1e-9

    def test_rumor_root_score_is_log_product(self, t4):
        logs, _ = rumor_scores(t4)
        sizes = subtree_sizes(t4)
        assert abs(logs[1] - sum(math.log(int(s)) for s in sizes[2:])) < 1e-12
