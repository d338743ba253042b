"""Exact projective de Casteljau evaluation used to freeze test constants."""
from fractions import Fraction as F

corners = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1)]
weights = [1, 2000, 1, 1, 1, 1, 1]


def de_casteljau(points, w, t):
    h = [[F(c) * wi for c in p] + [F(wi)] for p, wi in zip(points, w)]
    while len(h) > 1:
        h = [[(1 - t) * a + t * b for a, b in zip(h[i], h[i + 1])] for i in range(len(h) - 1)]
    x = h[0]
    return [c / x[3] for c in x[:3]]


if __name__ == "__main__":
    v = de_casteljau(corners, weights, F(1, 4))
    print([repr(float(c)) for c in v])
    print([str(c) for c in v])
