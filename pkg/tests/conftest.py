import numpy as np
import pytest

from fkdyn.oracle import RCParams
from fkdyn.topology import Graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def half_two():
    return RCParams(0.5, 2.0)


def single_edge(root=None):
    return Graph(2, [(0, 1)], root=root)


def path(k, root=None):
    return Graph(k + 1, [(i, i + 1) for i in range(k)], root=root)


def cycle(k):
    return Graph(k, [(i, (i + 1) % k) for i in range(k)])


def complete(n):
    return Graph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def chi2_pvalue(codes, probs, min_expected=5.0):
    """Goodness-of-fit p-value of observed state codes against ``probs``.

    States with small expected counts are pooled into one bin.
    """
    from scipy.stats import chisquare

    codes = np.asarray(codes, dtype=np.int64)
    probs = np.asarray(probs, dtype=float)
    obs = np.bincount(codes, minlength=probs.size).astype(float)
    exp = probs * codes.size
    big = exp >= min_expected
    o = list(obs[big])
    e = list(exp[big])
    if (~big).any():
        o.append(obs[~big].sum())
        e.append(exp[~big].sum())
    e = np.asarray(e)
    o = np.asarray(o)
    return float(chisquare(o, e * o.sum() / e.sum()).pvalue)


def config_codes(configs):
    configs = np.atleast_2d(np.asarray(configs, dtype=np.int64))
    return configs @ (1 << np.arange(configs.shape[1], dtype=np.int64))
