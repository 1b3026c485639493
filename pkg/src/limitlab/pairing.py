"""Cantor pairing helpers shared by learners and reductions."""


def pair(a, b):
    """Cantor pairing: pair(0,0)=0, pair(1,0)=1, bijective on N x N."""
    return (a + b) * (a + b + 1) // 2 + b


def unpair(n):
    w = 0
    while (w + 1) * (w + 2) // 2 <= n:
        w += 1
    b = n - w * (w + 1) // 2
    return w - b, b


def triple(s, i, j):
    return pair(s, pair(i, j))


def untriple(n):
    s, rest = unpair(n)
    i, j = unpair(rest)
    return s, i, j
