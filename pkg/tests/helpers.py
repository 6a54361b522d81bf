"""Shared random expression generator and finite-difference oracle."""

import numpy as np

from epsnet import expr as E

SMOOTH = ("sin", "cos", "exp", "bump")


def random_expr(rng, depth=3, dim=1):
    """Smooth random tree in x (or x1..xd) and eps, bounded on [-1, 1]^d."""
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.55:
            return E.var(int(rng.integers(dim)))
        if r < 0.75:
            return E.EPS
        return E.const(float(rng.integers(-3, 4)) or 1.0)
    kind = rng.choice(["add", "mul", "func", "pow", "sub"])
    a = random_expr(rng, depth - 1, dim)
    if kind == "func":
        name = str(rng.choice(SMOOTH))
        if name == "exp":
            a = E.mul(E.const(0.5), E.sin(a))
        return E.func(name, a)
    if kind == "pow":
        return E.pow_(a, int(rng.integers(2, 4)))
    b = random_expr(rng, depth - 1, dim)
    return {"add": E.add, "mul": E.mul, "sub": E.sub}[kind](a, b)


def fd_derivative(e, points, eps, axis=0, h=1e-5):
    """Fourth-order central difference along one axis."""
    pts = np.array(points, dtype=float)
    step = np.zeros(pts.shape[1])
    step[axis] = h
    f = lambda shift: E.evaluate_array(e, pts + shift * step, eps)
    return (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * h)


def fd_agreement(rng, n_cases=50, dim=1):
    """Worst relative gap between symbolic and finite-difference first derivatives."""
    worst = 0.0
    for _ in range(n_cases):
        e = random_expr(rng, 3, dim)
        axis = int(rng.integers(dim))
        multi = tuple(1 if i == axis else 0 for i in range(dim))
        d = E.derivative(e, multi, "whole")
        pts = rng.uniform(-0.9, 0.9, size=(7, dim))
        eps = float(rng.uniform(0.05, 1.0))
        sym = E.evaluate_array(d, pts, eps)
        num = fd_derivative(e, pts, eps, axis)
        scale = np.maximum(1.0, np.abs(sym))
        worst = max(worst, float(np.max(np.abs(sym - num) / scale)))
    return worst


# nets with negligible |f|-integrals over a << b: (f, a, b)
NEGLIGIBLE_INTEGRALS = [
    ("exp(-1/eps)*sin(x)^2", "0", "1"),
    ("eps^16*(1 + x^2)", "-1", "1"),
    ("exp(-1/eps)*bump(x)", "eps", "1"),
    ("x^2*exp(-1/eps)", "0", "eps^(1/2)"),
    ("eps^20*cos(x/eps)", "-1", "2"),
]


def subsequence_nets(grid):
    """a = 0; b = 1 on even grid indices, else 0; f = 0 there, else 1."""
    even = {str(k): "1" for k in grid.ks if k % 2 == 0}
    zero_on_even = {str(k): "0" for k in grid.ks if k % 2 == 0}
    return "0", ("0", even), ("1", zero_on_even)
