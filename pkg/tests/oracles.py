"""Independent brute-force oracles, deliberately naive and loop-based.

None of these reuse the package's fitting or split-search code; they
enumerate the candidates directly so a shared bug cannot hide.
"""

import math

import numpy as np

TIE = 1e-12


# ----------------------------------------------------------------- least squares


def ssr(g, y, r, x, w=None):
    g, y = np.asarray(g, float), np.asarray(y, float)
    w = np.ones_like(y) if w is None else np.asarray(w, float)
    return float(np.sum(w * (y - (r * g + x)) ** 2))


def grid_search_ols(g, y, w=None, r_range=None, x_range=None, points=200):
    """Best (r, X, ssr) over a points x points grid."""
    rs = np.linspace(*r_range, points)
    xs = np.linspace(*x_range, points)
    g, y = np.asarray(g, float), np.asarray(y, float)
    w = np.ones_like(y) if w is None else np.asarray(w, float)
    # (points, points, samples) residual cube
    resid = y[None, None, :] - (rs[:, None, None] * g[None, None, :] + xs[None, :, None])
    cube = np.sum(w * resid**2, axis=2)
    i, j = np.unravel_index(np.argmin(cube), cube.shape)
    return rs[i], xs[j], float(cube.min()), cube


# ----------------------------------------------------------------- CART


def _gini_counts(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    p = sum(labels) / n
    return 1.0 - p * p - (1 - p) * (1 - p)


def _midpoint(a, b):
    m = (a + b) / 2.0
    return a if m >= b else m


def all_splits(X, y, min_leaf=1):
    """Every (feature, threshold, weighted child Gini) of one node, in (feature, threshold) order."""
    out = []
    n = len(y)
    for f in range(len(X[0])):
        values = sorted(set(row[f] for row in X))
        for a, b in zip(values, values[1:]):
            t = _midpoint(a, b)
            left = [y[i] for i in range(n) if X[i][f] <= t]
            right = [y[i] for i in range(n) if X[i][f] > t]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            score = (len(left) * _gini_counts(left) + len(right) * _gini_counts(right)) / n
            out.append((f, t, score))
    return out


def pick_min(cands):
    """Global best, then lowest feature, then lowest threshold."""
    if not cands:
        return None
    best = min(c[2] for c in cands)
    return next(c for c in cands if c[2] <= best + TIE)


def pick_max(cands):
    if not cands:
        return None
    best = max(c[2] for c in cands)
    return next(c for c in cands if c[2] >= best - TIE)


def oracle_cart(X, y, max_depth=16, min_leaf=1, depth=0):
    """Nested dicts: {'feature','threshold','rows','left','right'} or {'leaf', 'rows'}."""
    X = [list(map(float, row)) for row in X]
    y = [int(v) for v in y]
    return _cart(X, y, list(range(len(y))), max_depth, min_leaf, depth)


def _cart(X, y, rows, max_depth, min_leaf, depth):
    ys = [y[i] for i in rows]
    pos = sum(ys)
    if pos in (0, len(ys)) or depth >= max_depth or len(ys) < 2 * min_leaf:
        return {"leaf": (len(ys) - pos, pos), "rows": rows}
    choice = pick_min(all_splits([X[i] for i in rows], ys, min_leaf))
    if choice is None:
        return {"leaf": (len(ys) - pos, pos), "rows": rows}
    f, t, _ = choice
    left = [i for i in rows if X[i][f] <= t]
    right = [i for i in rows if X[i][f] > t]
    return {
        "feature": f,
        "threshold": t,
        "rows": rows,
        "left": _cart(X, y, left, max_depth, min_leaf, depth + 1),
        "right": _cart(X, y, right, max_depth, min_leaf, depth + 1),
    }


# ----------------------------------------------------------------- boosting


def stump_gains(X, g, h, lam):
    """Every (feature, threshold, gain) by explicit partition sums."""
    n = len(g)
    G, H = sum(g), sum(h)
    parent = G * G / (H + lam)
    out = []
    for f in range(len(X[0])):
        values = sorted(set(row[f] for row in X))
        for a, b in zip(values, values[1:]):
            t = _midpoint(a, b)
            GL = sum(g[i] for i in range(n) if X[i][f] <= t)
            HL = sum(h[i] for i in range(n) if X[i][f] <= t)
            GR, HR = G - GL, H - HL
            gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent)
            out.append((f, t, gain))
    return out


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))
