"""
Compiled inner loops for the representation solver.

Words are stored flat: ``letters`` holds signed 1-based generator indices,
word ``w`` occupies ``letters[offsets[w]:offsets[w + 1]]``.  Each word
contributes a block of four residual rows ``rho(word) - target``; the block
``merid`` has the alpha-dependent target ``cos(alpha) + sin(alpha) k``.

Derivatives are analytic: for ``P = g_1 ... g_L`` the derivative in the
``d``-th component of the generator at position ``t`` is
``(g_1 ... g_{t-1}) e_d (g_{t+1} ... g_L)``, chained through the
normalization ``q = X / |X|``.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _mul(a0, a1, a2, a3, b0, b1, b2, b3):
    return (a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0)


@njit(cache=True)
def normalize_rows(X):
    Q = np.empty_like(X)
    norms = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        n = np.sqrt(X[i, 0] ** 2 + X[i, 1] ** 2 + X[i, 2] ** 2 + X[i, 3] ** 2)
        norms[i] = n
        for d in range(4):
            Q[i, d] = X[i, d] / n
    return Q, norms


@njit(cache=True)
def word_value(Q, letters, start, end):
    r0, r1, r2, r3 = 1.0, 0.0, 0.0, 0.0
    for t in range(start, end):
        g = letters[t]
        i = abs(g) - 1
        s = 1.0 if g > 0 else -1.0
        r0, r1, r2, r3 = _mul(r0, r1, r2, r3, Q[i, 0], s * Q[i, 1], s * Q[i, 2], s * Q[i, 3])
    out = np.empty(4)
    out[0], out[1], out[2], out[3] = r0, r1, r2, r3
    return out


@njit(cache=True)
def residual_jacobian(X, alpha, letters, offsets, targets, merid, free_alpha, want_jac):
    """Residual (4W,) and, if requested, Jacobian (4W, 4n [+1])."""
    n = X.shape[0]
    W = offsets.shape[0] - 1
    P = 4 * n + (1 if free_alpha else 0)
    Q, norms = normalize_rows(X)
    r = np.empty(4 * W)
    J = np.zeros((4 * W, P)) if want_jac else np.zeros((0, 0))
    Jq = np.zeros((4, 4 * n))
    ca, sa = np.cos(alpha), np.sin(alpha)
    for w in range(W):
        a, b = offsets[w], offsets[w + 1]
        L = b - a
        pre = np.empty((L + 1, 4))
        suf = np.empty((L + 1, 4))
        pre[0, 0], pre[0, 1], pre[0, 2], pre[0, 3] = 1.0, 0.0, 0.0, 0.0
        suf[L, 0], suf[L, 1], suf[L, 2], suf[L, 3] = 1.0, 0.0, 0.0, 0.0
        for t in range(L):
            g = letters[a + t]
            i = abs(g) - 1
            s = 1.0 if g > 0 else -1.0
            x = _mul(pre[t, 0], pre[t, 1], pre[t, 2], pre[t, 3],
                     Q[i, 0], s * Q[i, 1], s * Q[i, 2], s * Q[i, 3])
            pre[t + 1, 0], pre[t + 1, 1], pre[t + 1, 2], pre[t + 1, 3] = x
        if w == merid:
            tgt0, tgt1, tgt2, tgt3 = ca, 0.0, 0.0, sa
        else:
            tgt0, tgt1, tgt2, tgt3 = targets[w, 0], targets[w, 1], targets[w, 2], targets[w, 3]
        r[4 * w + 0] = pre[L, 0] - tgt0
        r[4 * w + 1] = pre[L, 1] - tgt1
        r[4 * w + 2] = pre[L, 2] - tgt2
        r[4 * w + 3] = pre[L, 3] - tgt3
        if not want_jac:
            continue
        for t in range(L - 1, -1, -1):
            g = letters[a + t]
            i = abs(g) - 1
            s = 1.0 if g > 0 else -1.0
            x = _mul(Q[i, 0], s * Q[i, 1], s * Q[i, 2], s * Q[i, 3],
                     suf[t + 1, 0], suf[t + 1, 1], suf[t + 1, 2], suf[t + 1, 3])
            suf[t, 0], suf[t, 1], suf[t, 2], suf[t, 3] = x
        Jq[:, :] = 0.0
        for t in range(L):
            g = letters[a + t]
            i = abs(g) - 1
            s = 1.0 if g > 0 else -1.0
            for d in range(4):
                e0, e1, e2, e3 = 0.0, 0.0, 0.0, 0.0
                if d == 0:
                    e0 = 1.0
                elif d == 1:
                    e1 = s
                elif d == 2:
                    e2 = s
                else:
                    e3 = s
                y = _mul(pre[t, 0], pre[t, 1], pre[t, 2], pre[t, 3], e0, e1, e2, e3)
                z = _mul(y[0], y[1], y[2], y[3],
                         suf[t + 1, 0], suf[t + 1, 1], suf[t + 1, 2], suf[t + 1, 3])
                for c in range(4):
                    Jq[c, 4 * i + d] += z[c]
        # chain rule through q = X / |X|: dq/dX = (I - q q^T) / |X|
        for i in range(n):
            for c in range(4):
                dot = 0.0
                for d in range(4):
                    dot += Jq[c, 4 * i + d] * Q[i, d]
                for d in range(4):
                    J[4 * w + c, 4 * i + d] = (Jq[c, 4 * i + d] - dot * Q[i, d]) / norms[i]
        if free_alpha and w == merid:
            J[4 * w + 0, 4 * n] = sa
            J[4 * w + 3, 4 * n] = -ca
    return r, J


@njit(cache=True)
def levenberg_marquardt(X, alpha, letters, offsets, targets, merid, free_alpha,
                        max_iter, lam0, ftol):
    """Single-problem Levenberg-Marquardt; returns ``(X, alpha, |r|)``."""
    n = X.shape[0]
    P = 4 * n + (1 if free_alpha else 0)
    X, _ = normalize_rows(X)
    r, _J = residual_jacobian(X, alpha, letters, offsets, targets, merid, free_alpha, False)
    cost = np.sum(r * r)
    lam = lam0
    for _ in range(max_iter):
        if cost <= ftol * ftol:
            break
        r, J = residual_jacobian(X, alpha, letters, offsets, targets, merid, free_alpha, True)
        A = J.T @ J
        g = J.T @ r
        scale = 0.0
        for p in range(P):
            scale += A[p, p]
        scale = max(scale / P, 1e-300)
        for p in range(P):
            A[p, p] += lam * scale
        step = -np.linalg.solve(A, g)
        Xn = X.copy()
        for i in range(n):
            for d in range(4):
                Xn[i, d] += step[4 * i + d]
        Xn, _ = normalize_rows(Xn)
        an = alpha + step[4 * n] if free_alpha else alpha
        rn, _J = residual_jacobian(Xn, an, letters, offsets, targets, merid, free_alpha, False)
        cn = np.sum(rn * rn)
        if np.isfinite(cn) and cn < cost:
            X, alpha, cost = Xn, an, cn
            lam = max(lam / 5.0, 1e-15)
        else:
            lam *= 8.0
            if lam > 1e10:
                break
    return X, alpha, np.sqrt(cost)


@njit(cache=True)
def levenberg_marquardt_batch(Xb, alphas, letters, offsets, targets, merid, free_alpha,
                              max_iter, lam0, ftol):
    B = Xb.shape[0]
    Xo = np.empty_like(Xb)
    ao = np.empty(B)
    ro = np.empty(B)
    for b in range(B):
        x, a, rn = levenberg_marquardt(Xb[b], alphas[b], letters, offsets, targets, merid,
                                       free_alpha, max_iter, lam0, ftol)
        Xo[b] = x
        ao[b] = a
        ro[b] = rn
    return Xo, ao, ro


@njit(cache=True)
def commutator_gap(Q):
    best = 0.0
    n = Q.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            a = _mul(Q[i, 0], Q[i, 1], Q[i, 2], Q[i, 3], Q[j, 0], Q[j, 1], Q[j, 2], Q[j, 3])
            b = _mul(Q[j, 0], Q[j, 1], Q[j, 2], Q[j, 3], Q[i, 0], Q[i, 1], Q[i, 2], Q[i, 3])
            s = 0.0
            for c in range(4):
                s += (a[c] - b[c]) ** 2
            best = max(best, np.sqrt(s))
    return best
