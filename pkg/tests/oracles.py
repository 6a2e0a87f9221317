"""Scalar, loop-based reference implementations used only by the tests.

Written straight from the textbook DTLZ and WFG definitions with plain
Python floats so they share no code with the vectorized package version.
"""

import math

EPS = 1e-10


def _clip01(v):
    if -EPS <= v < 0:
        return 0.0
    if 1 < v <= 1 + EPS:
        return 1.0
    return v


# ---------------------------------------------------------------- DTLZ

def dtlz(name, x, m):
    n = len(x)
    k = n - m + 1
    tail = x[m - 1:]
    if name in ("DTLZ1", "DTLZ3"):
        g = 100.0 * (k + sum((v - 0.5) ** 2 - math.cos(20.0 * math.pi * (v - 0.5)) for v in tail))
    elif name == "DTLZ6":
        g = sum(v ** 0.1 for v in tail)
    elif name == "DTLZ7":
        g = 1.0 + 9.0 / k * sum(tail)
    else:
        g = sum((v - 0.5) ** 2 for v in tail)

    if name == "DTLZ1":
        f = []
        for i in range(m):
            val = 0.5 * (1.0 + g)
            for j in range(m - 1 - i):
                val *= x[j]
            if i > 0:
                val *= 1.0 - x[m - 1 - i]
            f.append(val)
        return f

    if name == "DTLZ7":
        f = list(x[: m - 1])
        h = m - sum(fi / (1.0 + g) * (1.0 + math.sin(3.0 * math.pi * fi)) for fi in f)
        f.append((1.0 + g) * h)
        return f

    if name == "DTLZ4":
        theta = [x[i] ** 100 * math.pi / 2 for i in range(m - 1)]
    elif name in ("DTLZ5", "DTLZ6"):
        theta = [x[0] * math.pi / 2]
        for i in range(1, m - 1):
            theta.append(math.pi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[i]))
    else:
        theta = [x[i] * math.pi / 2 for i in range(m - 1)]

    f = []
    for i in range(m):
        val = 1.0 + g
        for j in range(m - 1 - i):
            val *= math.cos(theta[j])
        if i > 0:
            val *= math.sin(theta[m - 1 - i])
        f.append(val)
    return f


# ---------------------------------------------------------------- WFG primitives

def b_poly(y, a):
    return _clip01(y ** a)


def b_flat(y, a, b, c):
    v = a + min(0.0, math.floor(y - b)) * a * (b - y) / b - min(0.0, math.floor(c - y)) * (1.0 - a) * (y - c) / (1.0 - c)
    return _clip01(v)


def b_param(y, u, a, b, c):
    v = b + (c - b) * (a - (1.0 - 2.0 * u) * abs(math.floor(0.5 - u) + a))
    return _clip01(y ** v)


def s_linear(y, a):
    return _clip01(abs(y - a) / abs(math.floor(a - y) + a))


def s_decept(y, a, b, c):
    t1 = math.floor(y - a + b) * (1.0 - c + (a - b) / b) / (a - b)
    t2 = math.floor(a + b - y) * (1.0 - c + (1.0 - a - b) / b) / (1.0 - a - b)
    return _clip01(1.0 + (abs(y - a) - b) * (t1 + t2 + 1.0 / b))


def s_multi(y, a, b, c):
    t = abs(y - c) / (2.0 * (math.floor(c - y) + c))
    v = (1.0 + math.cos((4.0 * a + 2.0) * math.pi * (0.5 - t)) + 4.0 * b * t * t) / (b + 2.0)
    return _clip01(v)


def r_sum(y, w=None):
    w = [1.0] * len(y) if w is None else w
    assert len(w) == len(y)
    return _clip01(sum(a * b for a, b in zip(y, w)) / sum(w))


def r_nonsep(y, a):
    n = len(y)
    num = 0.0
    for j in range(n):
        num += y[j]
        for k in range(a - 1):
            num += abs(y[j] - y[(j + k + 1) % n])
    den = n / a * math.ceil(a / 2) * (1.0 + 2.0 * a - 2.0 * math.ceil(a / 2))
    return _clip01(num / den)


# ---------------------------------------------------------------- WFG shapes

def _linear(x, m):
    f = []
    for i in range(1, m + 1):
        v = 1.0
        for j in range(m - i):
            v *= x[j]
        if i > 1:
            v *= 1.0 - x[m - i]
        f.append(v)
    return f


def _convex(x, m):
    f = []
    for i in range(1, m + 1):
        v = 1.0
        for j in range(m - i):
            v *= 1.0 - math.cos(x[j] * math.pi / 2)
        if i > 1:
            v *= 1.0 - math.sin(x[m - i] * math.pi / 2)
        f.append(v)
    return f


def _concave(x, m):
    f = []
    for i in range(1, m + 1):
        v = 1.0
        for j in range(m - i):
            v *= math.sin(x[j] * math.pi / 2)
        if i > 1:
            v *= math.cos(x[m - i] * math.pi / 2)
        f.append(v)
    return f


def _mixed(x1, alpha=1.0, a=5):
    return (1.0 - x1 - math.cos(2.0 * a * math.pi * x1 + math.pi / 2) / (2.0 * a * math.pi)) ** alpha


def _disc(x1, alpha=1.0, beta=1.0, a=5):
    return 1.0 - x1 ** alpha * math.cos(a * x1 ** beta * math.pi) ** 2


# ---------------------------------------------------------------- WFG problems

def _groups_sum(t, m, k, weights):
    gap = k // (m - 1)
    out = []
    for i in range(m - 1):
        sl = slice(i * gap, (i + 1) * gap)
        out.append(r_sum(t[sl], weights[sl]))
    out.append(r_sum(t[k:], weights[k:]))
    return out


def _groups_nonsep(t, m, k):
    gap = k // (m - 1)
    out = [r_nonsep(t[i * gap:(i + 1) * gap], gap) for i in range(m - 1)]
    out.append(r_nonsep(t[k:], len(t) - k))
    return out


def wfg(name, z, m, k):
    n = len(z)
    y = [z[i] / (2.0 * (i + 1)) for i in range(n)]
    ones = [1.0] * n

    if name == "WFG1":
        y = y[:k] + [s_linear(v, 0.35) for v in y[k:]]
        y = y[:k] + [b_flat(v, 0.8, 0.75, 0.85) for v in y[k:]]
        y = [b_poly(v, 0.02) for v in y]
        t = _groups_sum(y, m, k, [2.0 * (i + 1) for i in range(n)])
    elif name in ("WFG2", "WFG3"):
        y = y[:k] + [s_linear(v, 0.35) for v in y[k:]]
        l = n - k
        y = y[:k] + [r_nonsep(y[k + 2 * i: k + 2 * i + 2], 2) for i in range(l // 2)]
        gap = k // (m - 1)
        t = [r_sum(y[i * gap:(i + 1) * gap]) for i in range(m - 1)]
        t.append(r_sum(y[k:]))
    elif name == "WFG4":
        y = [s_multi(v, 30, 10, 0.35) for v in y]
        t = _groups_sum(y, m, k, ones)
    elif name == "WFG5":
        y = [s_decept(v, 0.35, 0.001, 0.05) for v in y]
        t = _groups_sum(y, m, k, ones)
    elif name == "WFG6":
        y = y[:k] + [s_linear(v, 0.35) for v in y[k:]]
        t = _groups_nonsep(y, m, k)
    elif name == "WFG7":
        y = [b_param(y[i], r_sum(y[i + 1:]), 0.98 / 49.98, 0.02, 50) for i in range(k)] + y[k:]
        y = y[:k] + [s_linear(v, 0.35) for v in y[k:]]
        t = _groups_sum(y, m, k, ones)
    elif name == "WFG8":
        y = y[:k] + [b_param(y[i], r_sum(y[:i]), 0.98 / 49.98, 0.02, 50) for i in range(k, n)]
        y = y[:k] + [s_linear(v, 0.35) for v in y[k:]]
        t = _groups_sum(y, m, k, ones)
    elif name == "WFG9":
        y = [b_param(y[i], r_sum(y[i + 1:]), 0.98 / 49.98, 0.02, 50) for i in range(n - 1)] + [y[-1]]
        y = [s_decept(v, 0.35, 0.001, 0.05) for v in y[:k]] + [s_multi(v, 30, 95, 0.35) for v in y[k:]]
        t = _groups_nonsep(y, m, k)
    else:
        raise ValueError(name)

    degenerate = [1.0] + [0.0] * (m - 2) if name == "WFG3" else [1.0] * (m - 1)
    xm = t[m - 1]
    x = [max(xm, degenerate[i]) * (t[i] - 0.5) + 0.5 for i in range(m - 1)]
    if name == "WFG1":
        h = _convex(x, m)
        h[m - 1] = _mixed(x[0])
    elif name == "WFG2":
        h = _convex(x, m)
        h[m - 1] = _disc(x[0])
    elif name == "WFG3":
        h = _linear(x, m)
    else:
        h = _concave(x, m)
    return [xm + 2.0 * (i + 1) * h[i] for i in range(m)]


def evaluate(name, x, m, k=None):
    if name.startswith("DTLZ"):
        return dtlz(name, list(map(float, x)), m)
    return wfg(name, list(map(float, x)), m, k)


# ---------------------------------------------------------------- indicators

def igd_plus_naive(A, Z):
    total = 0.0
    for z in Z:
        best = math.inf
        for a in A:
            best = min(best, math.sqrt(sum(max(ai - zi, 0.0) ** 2 for ai, zi in zip(a, z))))
        total += best
    return total / len(Z)


def igd_naive(A, Z):
    total = 0.0
    for z in Z:
        best = math.inf
        for a in A:
            best = min(best, math.sqrt(sum((ai - zi) ** 2 for ai, zi in zip(a, z))))
        total += best
    return total / len(Z)
