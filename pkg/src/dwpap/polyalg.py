"""Exact dense univariate polynomial arithmetic over the rationals.

Polynomials are lists of :class:`fractions.Fraction` ordered from the
constant term upward, with no trailing zeros (the zero polynomial is ``[]``).
"""

from fractions import Fraction


def trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p):
    return len(p) - 1


def add(p, q):
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def neg(p):
    return [-c for c in p]


def sub(p, q):
    return add(p, neg(q))


def mul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def divmod_poly(p, q):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    dq = degree(q)
    lead = q[-1]
    quot = [Fraction(0)] * max(len(p) - dq, 0)
    while r and degree(r) >= dq:
        c = r[-1] / lead
        shift = degree(r) - dq
        quot[shift] = c
        for i, b in enumerate(q):
            r[i + shift] -= c * b
        r = trim(r)
    return trim(quot), r


def derivative(p):
    return trim([i * c for i, c in enumerate(p)][1:])


def monic(p):
    if not p:
        return []
    lead = p[-1]
    return [c / lead for c in p]


def gcd(p, q):
    a, b = trim(p), trim(q)
    while b:
        _, r = divmod_poly(a, b)
        a, b = b, r
    return monic(a)


def evaluate(p, x):
    acc = Fraction(0) if isinstance(x, Fraction) else 0.0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def sturm_sequence(p):
    seq = [trim(p), derivative(p)]
    while seq[-1]:
        _, r = divmod_poly(seq[-2], seq[-1])
        seq.append(neg(r))
    return seq[:-1]


def _sign_changes(signs):
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(p):
    """Number of distinct real roots, by Sturm sign changes at -inf and +inf."""
    p = trim(p)
    if degree(p) < 1:
        return 0
    seq = sturm_sequence(square_free_part(p))
    at_pos = [1 if q[-1] > 0 else -1 for q in seq]
    at_neg = [(1 if q[-1] > 0 else -1) * (-1 if degree(q) % 2 else 1) for q in seq]
    return _sign_changes(at_neg) - _sign_changes(at_pos)


def square_free_part(p):
    p = trim(p)
    if degree(p) < 1:
        return p
    g = gcd(p, derivative(p))
    q, _ = divmod_poly(p, g)
    return q


def square_free_decomposition(p):
    """Yun's algorithm: returns [(factor, multiplicity), ...] with monic factors."""
    p = monic(trim(p))
    if degree(p) < 1:
        return []
    out = []
    dp = derivative(p)
    a = gcd(p, dp)
    b, _ = divmod_poly(p, a)
    c, _ = divmod_poly(dp, a)
    d = sub(c, derivative(b))
    k = 1
    while degree(b) >= 1:
        g = gcd(b, d)
        if degree(g) >= 1:
            out.append((g, k))
        b, _ = divmod_poly(b, g)
        c, _ = divmod_poly(d, g)
        d = sub(c, derivative(b))
        k += 1
    return out
