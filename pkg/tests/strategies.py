"""Hypothesis strategies for specs and samples."""

import numpy as np
from hypothesis import strategies as st

from ipsw.domain import DgpSpec, ExtendedDgpSpec, TargetSample, TrialSample


def prob_vectors(k: int, lo: float = 0.02):
    vals = st.floats(lo, 1.0) if lo > 0 else st.sampled_from([0.0]) | st.floats(0.01, 1.0)
    return st.lists(vals, min_size=k, max_size=k).filter(lambda w: sum(w) > 0).map(
        lambda w: np.asarray(w) / np.sum(w)
    )


@st.composite
def specs(draw, min_k: int = 1, max_k: int = 4, center: bool = False):
    k = draw(st.integers(min_k, max_k))
    reals = lambda lo, hi: st.lists(st.floats(lo, hi), min_size=k, max_size=k)  # noqa: E731
    return DgpSpec(
        p_R=draw(prob_vectors(k)),
        p_T=draw(prob_vectors(k, lo=0.0)),
        pi=draw(reals(0.05, 0.95)),
        mean0=draw(reals(-20, 20)),
        mean1=draw(reals(-20, 20)),
        var0=draw(reals(0.0, 10)),
        var1=draw(reals(0.0, 10)),
    )


@st.composite
def trial_samples(draw, k: int, min_n: int = 1, max_n: int = 30):
    n = draw(st.integers(min_n, max_n))
    x = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    a = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    y = draw(st.lists(st.floats(-50, 50), min_size=n, max_size=n))
    return TrialSample(np.array(x), np.array(a), np.array(y))


@st.composite
def target_samples(draw, k: int, max_m: int = 30):
    m = draw(st.integers(1, max_m))
    return TargetSample(np.array(draw(st.lists(st.integers(0, k - 1), min_size=m, max_size=m))))


@st.composite
def modifier_extensions(draw, max_k: int = 3, max_l: int = 4):
    """Non-shifted V whose centered tau_shift modifies the effect."""
    base = draw(specs(max_k=max_k))
    L = draw(st.integers(2, max_l))
    q = draw(prob_vectors(L, lo=0.05))
    raw = np.array(draw(st.lists(st.floats(-5, 5), min_size=base.size * L, max_size=base.size * L)))
    raw = raw.reshape(base.size, L)
    shift = raw - (raw @ q)[:, None]
    return ExtendedDgpSpec(base, q, q, tau_shift=shift)


@st.composite
def shifted_extensions(draw, max_k: int = 3, max_l: int = 4):
    """Shifted V with no effect on the CATE."""
    base = draw(specs(max_k=max_k))
    L = draw(st.integers(2, max_l))
    return ExtendedDgpSpec(base, draw(prob_vectors(L, lo=0.05)), draw(prob_vectors(L, lo=0.0)))
