"""Smoke test for the pyreflector extension module."""

import math

import pyreflector as pr


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    grid = pr.DirectionGrid(2, 3)
    assert len(grid) == 642

    sphere = pr.FocalField(grid, [], default=2.0)
    r = pr.Reflector(sphere)
    assert all(close(v, 1.0) for v in r.radial_values())
    assert sphere.check()["valid"]
    d = r.directrix()
    assert all(close(math.dist(p, (0, 0, 0)), 2.0, 1e-6) for p in d["points"])
    assert d["hausdorff"] <= d["tolerance"]

    lens = pr.Reflector(pr.FocalField(grid, [([0, 0, 1], 1.0), ([0, 0, -1], 1.0)]))
    assert close(lens.radius([0, 0, 1]), 0.5)
    h, _ = lens.support([0, 0, 1])
    assert close(h, 0.5)
    assert close(lens.focal([-1, 0, 0]), 2.0)
    terms = sorted(lens.decompose([1, 0, 0], [-1, 0, 0]), key=lambda t: t[1][2])
    assert [round(a, 9) for a, _ in terms] == [1.0, 1.0]
    for out in lens.trace([0.3, 0.2, 0.9]):
        assert close(out[2], -1.0)

    inflated = pr.FocalField(grid, [([0, 0, 1], 1.0), ([0, 0, -1], 1.0), ([-1, 0, 0], 3.0)])
    verdict = inflated.check()
    assert not verdict["valid"] and verdict["witness"]["p"] == 3.0

    try:
        pr.Reflector(pr.FocalField(grid, [([0, 0, 1], 1.0)]))
    except pr.ReflectorError as e:
        assert "unbounded-reflector" in str(e)
    else:
        raise AssertionError("a single paraboloid must be rejected")

    y = pr.reflect([0.0, 0.6, 0.8], [0.0, 0.0, 1.0])
    assert all(close(a, b) for a, b in zip(y, [0.0, 0.6, -0.8]))
    print("pyreflector smoke test passed")


if __name__ == "__main__":
    main()
