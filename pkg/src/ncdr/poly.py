"""Univariate polynomials over Q as coefficient lists, lowest degree first."""

from fractions import Fraction


def trim(p):
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def add(p, q):
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def sub(p, q):
    return add(p, [-c for c in q])


def mul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def divmod_poly(p, q):
    p, q = trim(p), trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    rem = list(p)
    while len(rem) >= len(q):
        c = rem[-1] / q[-1]
        k = len(rem) - len(q)
        quot[k] = c
        for i, b in enumerate(q):
            rem[k + i] -= c * b
        rem = trim(rem)
    return trim(quot), rem


def ext_gcd(p, q):
    """Return (g, s, t) with s p + t q = g monic."""
    r0, r1 = trim(p), trim(q)
    s0, s1, t0, t1 = [Fraction(1)], [], [], [Fraction(1)]
    while r1:
        qt, r = divmod_poly(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(qt, s1))
        t0, t1 = t1, sub(t0, mul(qt, t1))
    lead = r0[-1]
    return ([c / lead for c in r0], [c / lead for c in s0], [c / lead for c in t0])


def evaluate(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p):
    return trim([i * c for i, c in enumerate(p)][1:])


def geometric(n):
    """1 + T + ... + T^(n-1)."""
    return [Fraction(1)] * n


def cofactor(n):
    """q_n = (T^n - 1)(T^(n+1) - 1) / (T - 1)^2."""
    return mul(geometric(n), geometric(n + 1))


def annihilator(n):
    """(T^n - 1)(T^(n+1) - 1): kills kappa on n-forms."""
    return mul([Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)],
               [Fraction(-1)] + [Fraction(0)] * n + [Fraction(1)])


def harmonic_poly(n):
    """Idempotent p with p = 1 mod (T-1)^2 and p = 0 mod q_n.

    Closed form p = q (r0 + r1 (T - 1)) with r0 = 1/q(1), r1 = -q'(1)/q(1)^2."""
    q = cofactor(n)
    q1 = evaluate(q, 1)
    dq1 = evaluate(derivative(q), 1)
    r0 = 1 / q1
    r1 = -dq1 / q1 ** 2
    return mul(q, [r0 - r1, r1])


def inverse_one_minus(n):
    """U with (1 - T) U = 1 mod q_n, reduced modulo q_n."""
    q = cofactor(n)
    g, s, _ = ext_gcd([Fraction(1), Fraction(-1)], q)
    assert g == [1]
    return divmod_poly(s, q)[1]
