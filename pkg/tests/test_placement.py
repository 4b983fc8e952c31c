import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cachegeo.model import CachingPolicy
from cachegeo.placement import build_block_layout, cache_matrix, sample_cache


def layout_for(probs, memory):
    return build_block_layout(CachingPolicy(np.array(probs, dtype=float), memory))


class TestBuildBlockLayout:
    def test_unit_probabilities_fill_one_block_each(self):
        layout = layout_for([1.0, 1.0, 1.0], 3)
        assert [(s.content, s.block, s.start, s.end) for s in layout.segments] == [
            (0, 1, 0.0, 1.0),
            (1, 2, 0.0, 1.0),
            (2, 3, 0.0, 1.0),
        ]

    def test_hand_traced_overflow(self):
        layout = layout_for([0.8, 0.7, 0.5], 2)
        got = [(s.content, s.block, round(s.start, 12), round(s.end, 12)) for s in layout.segments]
        assert got == [
            (0, 1, 0.0, 0.8),
            (1, 1, 0.8, 1.0),
            (1, 2, 0.0, 0.5),
            (2, 2, 0.5, 1.0),
        ]

    def test_single_block_partition(self):
        layout = layout_for([0.5, 0.5], 1)
        got = [(s.content, s.start, s.end) for s in layout.segments]
        assert got == [(0, 0.0, 0.5), (1, 0.5, 1.0)]

    def test_rejects_infeasible_policy(self):
        with pytest.raises(ValueError):
            layout_for([0.9, 0.9], 1)

    @given(
        probs=st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=2, max_size=10),
        memory=st.integers(1, 9),
    )
    @settings(max_examples=120, deadline=None)
    def test_layout_invariants(self, probs, memory):
        p = np.array(probs)
        if memory >= p.size or p.sum() > memory:
            return
        layout = layout_for(p, memory)
        # per-content mass equals p_i
        mass = np.zeros(p.size)
        for seg in layout.segments:
            assert 1 <= seg.block <= memory
            assert 0.0 <= seg.start < seg.end <= 1.0 + 1e-12
            mass[seg.content] += seg.length
        np.testing.assert_allclose(mass, p, atol=1e-12)
        # a content spans at most two adjacent blocks
        for i in range(p.size):
            blocks = sorted(s.block for s in layout.segments if s.content == i)
            assert len(blocks) <= 2
            if len(blocks) == 2:
                assert blocks[1] == blocks[0] + 1
        # segments within a block are disjoint and ordered
        for b in range(1, memory + 1):
            segs = [s for s in layout.segments if s.block == b]
            for left, right in zip(segs, segs[1:]):
                assert left.end <= right.start + 1e-12


class TestSampleCache:
    def test_hand_trace_u_06(self):
        layout = layout_for([0.8, 0.7, 0.5], 2)
        assert sample_cache(layout, 0.6) == {0, 2}

    def test_full_blocks_select_everything(self):
        layout = layout_for([1.0, 1.0, 1.0], 3)
        for u in (0.0, 0.3, 0.999):
            assert sample_cache(layout, u) == {0, 1, 2}

    def test_half_open_boundary(self):
        layout = layout_for([0.5, 0.5], 1)
        assert sample_cache(layout, 0.49) == {0}
        assert sample_cache(layout, 0.5) == {1}

    def test_rejects_u_outside_unit_interval(self):
        layout = layout_for([0.5, 0.5], 1)
        with pytest.raises(ValueError):
            sample_cache(layout, 1.0)

    def test_empty_tail_block_contributes_nothing(self):
        layout = layout_for([0.5, 0.25], 2)  # block 2 is [0.75, 1) content-free? no:
        # fill trace: c0 [0,0.5) b1, c1 [0.5,0.75) b1; block 2 entirely empty
        assert sample_cache(layout, 0.9) == set()
        assert sample_cache(layout, 0.6) == {1}

    @given(
        probs=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8),
        memory=st.integers(1, 7),
        u=st.floats(0.0, 1.0, exclude_max=True),
    )
    @settings(max_examples=150, deadline=None)
    def test_no_duplicates_and_size_cap(self, probs, memory, u):
        p = np.array(probs)
        if memory >= p.size or p.sum() > memory:
            return
        layout = layout_for(p, memory)
        cache = sample_cache(layout, u)
        assert len(cache) <= memory
        hits = sum(1 for s in layout.segments if s.start <= u < s.end)
        assert hits == len(cache)  # one interval per selected content


class TestCacheMatrix:
    def test_matches_scalar_sampler(self):
        rng = np.random.default_rng(5)
        layout = layout_for([0.8, 0.7, 0.5], 2)
        us = rng.random(500)
        mat = cache_matrix(layout, us)
        for row, u in zip(mat, us):
            assert set(np.nonzero(row)[0]) == sample_cache(layout, float(u))

    def test_full_budget_gives_exactly_m_contents(self):
        layout = layout_for([0.9, 0.6, 0.5], 2)  # sums to 2 = M
        rng = np.random.default_rng(11)
        mat = cache_matrix(layout, rng.random(2000))
        assert np.all(mat.sum(axis=1) == 2)

    def test_marginal_inclusion_frequency(self):
        p = np.array([0.55, 0.4, 0.3, 0.2, 0.05])
        layout = layout_for(p, 2)
        n = 200_000
        rng = np.random.default_rng(17)
        freq = cache_matrix(layout, rng.random(n)).mean(axis=0)
        se = np.sqrt(p * (1 - p) / n)
        assert np.all(np.abs(freq - p) <= 3.5 * se)
