"""Hypothesis strategies that hand out seeds and small dimensions."""

from hypothesis import strategies as st

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=5)
small_dims = st.integers(min_value=2, max_value=4)
