"""Optimal ate pairing on BLS12-381, including multi-pair products.

The Miller loop keeps G2 points on the twist and maps each line into Fq12
through the untwist isomorphism (x, y) -> (x/w^2, y/w^3); lines are scaled
by the constant xi, which the final exponentiation kills. `pairing_product`
shares one Miller accumulator and one final exponentiation across several
(G1, G2) pairs, which is what decapsulation wants.
"""

from __future__ import annotations

import hashlib

from .fields import (
    BLS_X,
    P,
    R,
    FQ12_ONE,
    fq2_inv,
    fq2_mul,
    fq2_neg,
    fq2_scalar,
    fq2_sqr,
    fq2_sub,
    fq12_conj,
    fq12_frob2,
    fq12_inv,
    fq12_mul,
    fq12_pow_cyclotomic,
    fq12_sqr,
    fq12_to_ints,
    FQ2_ZERO,
    FQ6_ZERO,
)

_X_BITS = bin(BLS_X)[3:]  # MSB handled by loop initialization

# exponents of the final exponentiation: easy part (q^6-1)(q^2+1), hard part
# Phi_12(q)/r
_HARD_EXP, _rem = divmod(P**4 - P**2 + 1, R)
assert _rem == 0


def _line(t, q_or_none, xp, yp, lam):
    """Line through T (and Q, for additions) evaluated at the G1 point P.

    T, Q are twist points; the returned value is xi * l(P) as a sparse Fq12
    element (1, v*w, v^2*w coefficients).
    """
    xt, yt = t
    c0 = (yp % P, yp % P)  # xi * yp = yp + yp*u
    c1 = fq2_sub(fq2_mul(lam, xt), yt)
    c2 = fq2_neg(fq2_scalar(lam, xp))
    return ((c0, FQ2_ZERO, FQ2_ZERO), (FQ2_ZERO, c1, c2))


def _double_step(t, xp, yp):
    xt, yt = t
    lam = fq2_mul(fq2_scalar(fq2_sqr(xt), 3), fq2_inv(fq2_scalar(yt, 2)))
    line = _line(t, None, xp, yp, lam)
    x3 = fq2_sub(fq2_sqr(lam), fq2_scalar(xt, 2))
    y3 = fq2_sub(fq2_mul(lam, fq2_sub(xt, x3)), yt)
    return (x3, y3), line


def _add_step(t, q, xp, yp):
    xt, yt = t
    xq, yq = q
    lam = fq2_mul(fq2_sub(yq, yt), fq2_inv(fq2_sub(xq, xt)))
    line = _line(t, q, xp, yp, lam)
    x3 = fq2_sub(fq2_sub(fq2_sqr(lam), xt), xq)
    y3 = fq2_sub(fq2_mul(lam, fq2_sub(xt, x3)), yt)
    return (x3, y3), line


def miller_loop_product(pairs) -> tuple:
    """Product of Miller values f_{|x|}(P_i, Q_i), conjugated for x < 0."""
    live = [((p[0] % P, p[1] % P), q) for p, q in pairs if p is not None and q is not None]
    if not live:
        return FQ12_ONE
    ts = [q for _, q in live]
    f = FQ12_ONE
    for bit in _X_BITS:
        f = fq12_sqr(f)
        for i, (pt, q) in enumerate(live):
            ts[i], line = _double_step(ts[i], pt[0], pt[1])
            f = fq12_mul(f, line)
        if bit == "1":
            for i, (pt, q) in enumerate(live):
                ts[i], line = _add_step(ts[i], q, pt[0], pt[1])
                f = fq12_mul(f, line)
    return fq12_conj(f)  # BLS parameter is negative


def final_exponentiation(f) -> tuple:
    f1 = fq12_mul(fq12_conj(f), fq12_inv(f))  # f^(q^6-1)
    f2 = fq12_mul(fq12_frob2(f1), f1)  # ^(q^2+1)
    return fq12_pow_cyclotomic(f2, _HARD_EXP)


def pairing(p, q) -> tuple:
    """e(P, Q) for P in G1, Q in G2 (affine, subgroup members)."""
    return final_exponentiation(miller_loop_product([(p, q)]))


def pairing_product(pairs) -> tuple:
    """prod_i e(P_i, Q_i) with a shared loop and one final exponentiation."""
    return final_exponentiation(miller_loop_product(pairs))


def gt_pow(f, e: int) -> tuple:
    """Exponentiation in the pairing target group (cyclotomic subgroup)."""
    return fq12_pow_cyclotomic(f, e % R)


def gt_to_bytes(f) -> bytes:
    """Canonical 576-byte encoding of a target-group element."""
    return b"".join(c.to_bytes(48, "big") for c in fq12_to_ints(f))


def gt_from_bytes(data: bytes) -> tuple:
    if len(data) != 576:
        raise ValueError(f"target-group element must be 576 bytes, got {len(data)}")
    coeffs = [int.from_bytes(data[i * 48 : (i + 1) * 48], "big") for i in range(12)]
    if any(c >= P for c in coeffs):
        raise ValueError("target-group coefficient out of range")
    halves = []
    for h in range(2):
        base = h * 6
        halves.append(tuple((coeffs[base + 2 * j], coeffs[base + 2 * j + 1]) for j in range(3)))
    return (halves[0], halves[1])


def gt_fingerprint(f) -> bytes:
    return hashlib.sha256(gt_to_bytes(f)).digest()
