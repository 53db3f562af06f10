"""Independent reference values frozen into the C++ tests.

Everything here is computed with mpmath at 50 digits (or scipy where noted),
without touching the C++ code. Run: python3 tests/oracles/frozen_values.py
"""
import itertools

import mpmath as mp
import numpy as np
from scipy import optimize

mp.mp.dps = 50


def show(name, value):
    if isinstance(value, (list, tuple)):
        print(f"{name} = [" + ", ".join(mp.nstr(v, 17) for v in value) + "]")
    else:
        print(f"{name} = {mp.nstr(value, 17)}")


# Cubic model pieces ---------------------------------------------------------
def model_1d(g, H, M, h):
    return g * h + H * h * h / 2 + M / 6 * abs(h) ** 3


show("model_value(g=1,H=1,M=2,h=-0.618034)", model_1d(1, 1, 2, mp.mpf("-0.618034")))
h_star = mp.findroot(lambda h: 1 + h - h * h, -0.6)  # stationarity for h < 0
show("solve_1d(1,1,2).h", h_star)
show("golden section check", mp.findroot(lambda h: mp.diff(lambda t: model_1d(1, 1, 2, t), h), -0.5))
show("model at optimum", model_1d(1, 1, 2, h_star))

# 1-D with l1 slice: minimize over h numerically with high precision
def l1_case(g, H, M, lam, x):
    f = lambda h: model_1d(g, H, M, h) + lam * abs(x + h)
    # piecewise smooth; scan candidates on each branch and at the kink
    cands = [-x]
    for s in (+1, -1):
        gg = g + s * lam
        try:
            r = mp.findroot(lambda h: gg + H * h + M / 2 * abs(h) * h, -gg / (H + 1))
            if s * (x + r) >= 0:
                cands.append(r)
        except Exception:
            pass
    best = min(cands, key=f)
    return best, f(best) - lam * abs(x)


for args in [(3, 1, 2, 1, 0.5), (0.5, 1, 2, 1, 0.2), (-4, 0.5, 1, 1, -0.3), (0.2, 2, 1, 1, 0.0)]:
    h, dec = l1_case(*[mp.mpf(a) for a in args])
    show(f"solve_1d l1 g,H,M,lam,x={args} h", h)

# Block case with scipy (BFGS on the smooth convex model, tight tolerance)
H = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.3], [0.0, 0.3, 0.5]])
g = np.array([1.0, -2.0, 0.5])
M = 1.5
f = lambda h: g @ h + 0.5 * h @ H @ h + M / 6 * np.linalg.norm(h) ** 3
jac = lambda h: g + H @ h + M / 2 * np.linalg.norm(h) * h
res = optimize.minimize(f, np.zeros(3), jac=jac, method="BFGS", options={"gtol": 1e-14})
# polish with Newton in mpmath
hm = mp.matrix(res.x.tolist())
Hm = mp.matrix(H.tolist())
gm = mp.matrix(g.tolist())
for _ in range(20):
    r = mp.norm(hm)
    grad = gm + Hm * hm + M / 2 * r * hm
    J = Hm + M / 2 * (r * mp.eye(3) + hm * hm.T / r)
    hm = hm - mp.lu_solve(J, grad)
show("block 3x3 h", [hm[i] for i in range(3)])
show("block 3x3 model", (gm.T * hm)[0] + (hm.T * Hm * hm)[0] / 2 + M / 6 * mp.norm(hm) ** 3)

# Oracles --------------------------------------------------------------------
# logistic n=1, a=(2,0), b=1, lambda=0 at x=0
phi = lambda t: mp.log(1 + mp.exp(-t))
show("logistic grad_1", mp.diff(lambda u: phi(2 * u), 0))
show("logistic hess_11", mp.diff(lambda u: phi(2 * u), 0, 2))

# small fixed logistic instance: n=3, d=2, lambda=0.1
A = [[1.0, -0.5], [0.3, 2.0], [-1.2, 0.7]]
b = [1, -1, 1]
lam = mp.mpf("0.1")
x = [mp.mpf("0.4"), mp.mpf("-0.3")]


def logistic_f(x):
    return sum(phi(b[i] * (A[i][0] * x[0] + A[i][1] * x[1])) for i in range(3)) / 3 + lam / 2 * (x[0] ** 2 + x[1] ** 2)


show("logistic3 f", logistic_f(x))
show("logistic3 grad", [mp.diff(lambda u: logistic_f([u, x[1]]), x[0]), mp.diff(lambda u: logistic_f([x[0], u]), x[1])])
show("logistic3 hess", [mp.diff(lambda u: logistic_f([u, x[1]]), x[0], 2),
                        mp.diff(lambda u, v: logistic_f([u, v]), (x[0], x[1]), (1, 1)),
                        mp.diff(lambda v: logistic_f([x[0], v]), x[1], 2)])

# log-sum-exp small instance: n=3, d=2, sigma=0.5
bl = [0.2, -0.1, 0.4]
sig = mp.mpf("0.5")


def lse_f(x):
    return sig * mp.log(sum(mp.exp((A[i][0] * x[0] + A[i][1] * x[1] - bl[i]) / sig) for i in range(3)))


show("lse3 f", lse_f(x))
show("lse3 grad", [mp.diff(lambda u: lse_f([u, x[1]]), x[0]), mp.diff(lambda u: lse_f([x[0], u]), x[1])])
show("lse3 hess", [mp.diff(lambda u: lse_f([u, x[1]]), x[0], 2),
                   mp.diff(lambda u, v: lse_f([u, v]), (x[0], x[1]), (1, 1)),
                   mp.diff(lambda v: lse_f([x[0], v]), x[1], 2)])
# large residuals: (<a,x> - b)/sigma around 700
show("lse far value", sig * mp.log(mp.exp(350 / sig) + mp.exp(-350 / sig)))

# Theory ---------------------------------------------------------------------
show("c = 1/(6 sqrt 3)", 1 / (6 * mp.sqrt(3)))
third = lambda t: mp.diff(phi, t, 3)
tmax = mp.findroot(lambda t: mp.diff(phi, t, 4), 1.3)
show("argmax |phi'''|", tmax)
show("max |phi'''|", abs(third(tmax)))


def zeta(Hs, tau):
    d = Hs.rows
    E = mp.zeros(d, d)
    subsets = list(itertools.combinations(range(d), tau))
    for S in subsets:
        sub = mp.matrix([[Hs[i, j] for j in S] for i in S])
        inv = sub ** -1
        for a, i in enumerate(S):
            for c, j in enumerate(S):
                E[i, j] += inv[a, c] / len(subsets)
    ev, Q = mp.eighe(Hs)
    root = Q * mp.diag([mp.sqrt(v) for v in ev]) * Q.T
    vals, _ = mp.eighe(root * E * root)
    return min(vals)


show("zeta diag(1,2) tau=1", zeta(mp.diag([1, 2]), 1))
Hz = mp.matrix([[2, 0.5, 0.1], [0.5, 1, 0.3], [0.1, 0.3, 1.5]])
show("zeta 3x3 tau=1", zeta(Hz, 1))
show("zeta 3x3 tau=2", zeta(Hz, 2))
