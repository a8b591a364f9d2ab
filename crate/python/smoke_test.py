"""Smoke test for the pylinmark extension.

Build and install with `pip install --no-build-isolation ./crates/python`, then run
`python python/smoke_test.py`.
"""

import math

import pylinmark as lm


def main():
    net = lm.Network([(0, 0, 1, 0)])
    d = net.distances([(0, 0), (0.5, 0), (1, 0)])
    assert d == [[0.0, 0.5, 1.0], [0.5, 0.0, 0.5], [1.0, 0.5, 0.0]], d
    assert net.perimeter_count((0.5, 0), 0.25) == 2
    assert net.perimeter_count((0.5, 0), 0.75) == 0

    tree = lm.Network.dendrite(depth=4, diameter=100.0, seed=3)
    p = lm.Pattern.uniform(tree, 60, seed=1)
    p = p.with_marks([1.0 + (k % 7) for k in range(len(p))])
    assert p.is_network and len(p) == 60

    r = [2.5 * k for k in range(21)]
    k = lm.summarize(p, "k", r=r)
    assert k.r == r and k.value[0] == 0.0
    assert all(b >= a for a, b in zip(k.value, k.value[1:]))

    kappa = lm.summarize(p, "markcorr", r=r, tf="stoyan")
    assert any(math.isfinite(v) for v in kappa.value)

    env = lm.envelope(p, "markcorr", nsim=19, rank=1, seed=5, r=r)
    assert env.lo is not None and len(env.lo) == len(r)
    assert 0.0 <= env.exceed_fraction <= 1.0

    flat = lm.Pattern.planar([(0.1, 0.2), (0.4, 0.4), (0.8, 0.3), (0.5, 0.9)], (0, 1, 0, 1), types=[1, 2, 1, 2])
    assert len(lm.summarize(flat, "mingling", r=[0.0, 0.5, 1.0]).value) == 3

    try:
        lm.summarize(p, "nonsense")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown statistic accepted")

    print("pylinmark smoke test passed")


if __name__ == "__main__":
    main()
