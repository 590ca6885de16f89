"""Shared test utilities: random strictly feasible SDPs with known optima."""

import numpy as np

from strictfeas.model import MatrixPencil, SdpProblem


def random_certified_sdp(rng: np.random.Generator, n: int, m: int):
    """A strictly feasible pencil SDP with a known optimum.

    Construction: pick a strictly complementary pair Z* = Q D_z Q^T,
    X* = Q D_x Q^T (D_z D_x = 0, D_z + D_x > 0), random symmetric terms with
    the first one positive definite, y* random, and set
    F0 = Z* - sum_k y*_k F_k,  b_k = -<F_k, X*>.
    Then every feasible y has <b, y> <= <F0, X*> (weak duality via X*), the
    bound is attained at y*, and y* + t e_1 is strictly feasible for t > 0
    because F_1 > 0.  Returns (problem, optimum, strictly_feasible_point).
    """
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    r = int(rng.integers(1, n))  # rank of X*
    dx = np.concatenate([rng.uniform(0.5, 2.0, size=r), np.zeros(n - r)])
    dz = np.concatenate([np.zeros(r), rng.uniform(0.5, 2.0, size=n - r)])
    Xstar = (Q * dx) @ Q.T
    Zstar = (Q * dz) @ Q.T

    terms = []
    B = rng.standard_normal((n, n))
    terms.append(B @ B.T + n * np.eye(n))  # positive definite
    for _ in range(m - 1):
        S = rng.standard_normal((n, n))
        terms.append(0.5 * (S + S.T))
    ystar = rng.uniform(-1.0, 1.0, size=m)

    F0 = Zstar - sum(yk * Fk for yk, Fk in zip(ystar, terms))
    b = tuple(-float(np.tensordot(Fk, Xstar, axes=2)) for Fk in terms)
    optimum = float(np.tensordot(F0, Xstar, axes=2))

    pencil = MatrixPencil(
        n=n,
        scalar="double",
        f0=0.5 * (F0 + F0.T),
        var_names=tuple(f"y{k}" for k in range(m)),
        terms=tuple(0.5 * (T + T.T) for T in terms),
    )
    prob = SdpProblem(pencil=pencil, objective=b, name=f"random-certified-{n}x{m}")
    interior = dict(zip(pencil.var_names, ystar))
    interior["y0"] = float(interior["y0"]) + 0.25
    return prob, optimum, interior
