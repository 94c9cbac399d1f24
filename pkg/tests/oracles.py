"""Independent reference computations used by the test-suite.

Nothing here calls the solver: torus-knot representations are written down
in closed form as 2x2 complex matrices and boundary angles are read off by
eigen-decomposition.
"""

import math

import numpy as np


def su2_matrix(axis, t):
    """exp(t * (n . (i, j, k))) under w + xi + yj + zk -> [[w+iz, ix-y], [ix+y, w-iz]]."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    i_, j_, k_ = (np.array([[0, 1j], [1j, 0]]), np.array([[0, -1], [1, 0]], dtype=complex),
                  np.array([[1j, 0], [0, -1j]]))
    return math.cos(t) * np.eye(2) + math.sin(t) * (n[0] * i_ + n[1] * j_ + n[2] * k_)


def mpow(M, e):
    if e >= 0:
        return np.linalg.matrix_power(M, e)
    return np.linalg.matrix_power(np.linalg.inv(M), -e)


def bezout(q, p):
    """(u, v) with q u + p v = 1, by brute force."""
    for u in range(-abs(p) - 1, abs(p) + 2):
        for v in range(-abs(q) - 1, abs(q) + 2):
            if q * u + p * v == 1:
                return u, v
    raise ValueError


def boundary_angles(M, L):
    """(alpha, beta): alpha in [0, pi] from M's eigenvalues, beta = arg of L on
    the e^{i alpha} eigenvector of M."""
    vals, vecs = np.linalg.eig(M)
    idx = int(np.argmax(np.angle(vals)))
    alpha = float(np.angle(vals[idx]))
    v = vecs[:, idx]
    beta = float(np.angle(np.vdot(v, L @ v) / np.vdot(v, v)))
    return alpha, beta


def torus_components(p, q):
    """(j, l) index pairs of the irreducible arcs of T(p, q): rho(x) has
    angle j pi / p, rho(y) angle l pi / q, with x^p = y^q = (-1)^j."""
    return [(j, l) for j in range(1, p) for l in range(1, q) if (j - l) % 2 == 0]


def torus_rep(p, q, j, l, alpha):
    """Closed-form irreducible of T(p, q) on arc (j, l) with meridian angle
    alpha, or None if alpha is outside the arc.  Returns (X, Y, M, L)."""
    u, v = bezout(q, p)
    a, b = j * math.pi / p, l * math.pi / q
    # trace(m)/2 = cos(ua)cos(vb) - sin(ua)sin(vb) cos(theta)
    c0 = math.cos(u * a) * math.cos(v * b)
    c1 = math.sin(u * a) * math.sin(v * b)
    if abs(c1) < 1e-14:
        return None
    cos_theta = (c0 - math.cos(alpha)) / c1
    if not -1.0 < cos_theta < 1.0:
        return None
    theta = math.acos(cos_theta)
    X = su2_matrix((0, 0, 1), a)
    Y = su2_matrix((math.sin(theta), 0, math.cos(theta)), b)
    M = mpow(X, u) @ mpow(Y, v)
    L = mpow(X, p) @ mpow(M, -p * q)
    return X, Y, M, L


def torus_image(p, q, alphas):
    """Closed-form boundary points (alpha, beta) of T(p, q) irreducibles."""
    pts = []
    for j, l in torus_components(p, q):
        for alpha in alphas:
            rep = torus_rep(p, q, j, l, alpha)
            if rep is None:
                continue
            _, _, M, L = rep
            pts.append(boundary_angles(M, L))
    return np.array(pts).reshape(-1, 2)


def canonical(a, b):
    """Canonical pillowcase representative, written independently."""
    a = (a + math.pi) % (2 * math.pi) - math.pi
    b = (b + math.pi) % (2 * math.pi) - math.pi
    if a < 0:
        a, b = -a, -b
    b = (b + math.pi) % (2 * math.pi) - math.pi
    if b == -math.pi:
        b = math.pi
    if a in (0.0, math.pi) and b < 0:
        b = -b
    return a, b


def quotient_distance(x, y):
    best = math.inf
    for s in (1, -1):
        da = (x[0] - s * y[0] + math.pi) % (2 * math.pi) - math.pi
        db = (x[1] - s * y[1] + math.pi) % (2 * math.pi) - math.pi
        best = min(best, math.hypot(da, db))
    return best


def hausdorff(A, B):
    """Symmetric Hausdorff distance under the quotient metric (vectorized)."""
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if len(A) == 0 and len(B) == 0:
        return 0.0
    if len(A) == 0 or len(B) == 0:
        return math.inf

    def directed(P, R):
        worst = 0.0
        for i in range(0, len(P), 512):
            chunk = P[i:i + 512]
            best = np.full(len(chunk), np.inf)
            for s in (1, -1):
                da = (chunk[:, None, 0] - s * R[None, :, 0] + math.pi) % (2 * math.pi) - math.pi
                db = (chunk[:, None, 1] - s * R[None, :, 1] + math.pi) % (2 * math.pi) - math.pi
                best = np.minimum(best, np.min(np.hypot(da, db), axis=1))
            worst = max(worst, float(np.max(best)))
        return worst

    return max(directed(A, B), directed(B, A))


# ---------------------------------------------------------------------------
# brute-force solver in an axis chart (independent of the package solver)

def _word_matrix(word, mats):
    out = np.eye(2, dtype=complex)
    for g in word:
        out = out @ (mats[abs(g) - 1] if g > 0 else mats[abs(g) - 1].conj().T)
    return out


def _axis(theta, phi):
    return (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))


def wirtinger_brute_force(relators, meridian, longitude, n, alpha, restarts=200, seed=0):
    """Irreducible boundary points at meridian angle ``alpha`` for a
    Wirtinger presentation: every generator is ``exp(alpha n_i)`` for a unit
    axis ``n_i``; generator 1 is pinned to the z-axis, generator 2's axis
    to the xz-plane.  Solved with scipy least squares from random starts.
    Returns canonical (alpha, beta) pairs of converged irreducible solutions.
    """
    from scipy.optimize import least_squares

    rng = np.random.default_rng(seed)

    def mats_of(v):
        thetas = np.concatenate([[0.0], v[: n - 1]])
        phis = np.concatenate([[0.0, 0.0], v[n - 1:]])
        return [su2_matrix(_axis(thetas[i], phis[i]), alpha) for i in range(n)]

    def resid(v):
        mats = mats_of(v)
        out = []
        for r in relators:
            d = _word_matrix(r, mats) - np.eye(2)
            out.extend([d.real.ravel(), d.imag.ravel()])
        return np.concatenate(out)

    pts = []
    for _ in range(restarts):
        v0 = np.concatenate([rng.uniform(0, math.pi, n - 1), rng.uniform(-math.pi, math.pi, n - 2)])
        sol = least_squares(resid, v0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        if np.max(np.abs(resid(sol.x))) > 1e-10:
            continue
        mats = mats_of(sol.x)
        comm = max(np.linalg.norm(a @ b - b @ a) for a in mats for b in mats)
        if comm < 1e-5:
            continue
        M, L = _word_matrix(meridian, mats), _word_matrix(longitude, mats)
        pts.append(canonical(*boundary_angles(M, L)))
    return np.array(pts).reshape(-1, 2)


def _sine_sum(coeffs, t):
    out = np.zeros_like(t)
    for k, c in enumerate(coeffs, start=1):
        out += c * np.sin(k * t)
    return out


def _wrap(x):
    return x - 2 * math.pi * np.round(x / (2 * math.pi))


def brute_force_emptiness(points, lines, coeffs, tol, n_samples=1_000_000):
    """Dense scan for solutions of beta = -g(alpha) on stored points and lines.

    Points are tested with both orbit representatives; each line
    ``p a + q b = c`` is scanned over ``n_samples`` values of alpha in
    ``[-pi, pi]`` for near-zeros and sign changes of the wrapped residual.
    Returns True when nothing is found.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    for a, b in pts:
        for s in (1.0, -1.0):
            if abs(_wrap(s * b + _sine_sum(coeffs, np.array([s * a]))[0])) <= tol:
                return False
    alpha = np.linspace(-math.pi, math.pi, n_samples)
    beta = -_sine_sum(coeffs, alpha)
    for line in lines:
        F = _wrap(line.p * alpha + line.q * beta - line.c)
        if np.any(np.abs(F) <= tol):
            return False
        jump = np.abs(np.diff(F)) < math.pi
        if np.any((np.sign(F[:-1]) != np.sign(F[1:])) & jump):
            return False
    return True
