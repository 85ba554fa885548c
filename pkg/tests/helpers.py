"""Random polynomial data shared by the property tests."""

from __future__ import annotations

from fractions import Fraction

from osculum.jet import multi_indices

VARS = ("u1", "u2", "u3")


def rand_q(rng, lo=-9, hi=9, den=4) -> Fraction:
    return Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, den + 1)))


def monomial(beta, variables) -> str:
    parts = [f"{v}^{b}" if b > 1 else v for v, b in zip(variables, beta) if b]
    return "*".join(parts) if parts else "1"


def poly_text(coeffs: dict, variables) -> str:
    if not coeffs:
        return "0"
    return " + ".join(f"({c})*{monomial(b, variables)}" for b, c in sorted(coeffs.items()))


def rand_poly(rng, p: int, lo_deg: int, hi_deg: int, density: float = 0.6, force: bool = False) -> dict:
    """Random rational coefficients on monomials of degree lo_deg..hi_deg.

    With ``force`` the degree-lo_deg part is guaranteed non-zero.
    """
    out = {}
    for d in range(lo_deg, hi_deg + 1):
        for beta in multi_indices(p, d):
            if sum(beta) == d and rng.random() < density:
                c = rand_q(rng)
                if c:
                    out[beta] = c
    if force and not any(sum(b) == lo_deg for b in out):
        beta = [b for b in multi_indices(p, lo_deg) if sum(b) == lo_deg]
        out[beta[int(rng.integers(len(beta)))]] = Fraction(int(rng.choice([-3, -2, -1, 1, 2, 3])))
    return out


def rand_graph_pair(rng, p: int, t: int, s: int, max_deg: int = 6):
    """Graph maps F, Ft : R^p -> R^t, tangent at 0, whose difference starts in degree s + 1."""
    variables = VARS[:p]
    F, Ft = [], []
    lead = int(rng.integers(t))
    for i in range(t):
        base = rand_poly(rng, p, 2, max_deg)
        diff = rand_poly(rng, p, s + 1, max(max_deg, s + 1), force=(i == lead))
        tilde = dict(base)
        for b, c in diff.items():
            tilde[b] = tilde.get(b, 0) + c
        tilde = {b: c for b, c in tilde.items() if c}
        F.append(poly_text(base, variables))
        Ft.append(poly_text(tilde, variables))
    return F, Ft, list(variables)
