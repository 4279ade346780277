"""Production scheme: two-level anonymous identity-based KEM over BLS12-381.

Structure (asymmetric-group variant of the commutative-blinding HIBE family,
anonymity via withheld G2 parameters, cf. Boyen-Waters anonymous HIBE and
Ducas, "Anonymity from Asymmetry", CT-RSA 2010):

* public params: g, u10, u11, u20, u21 in G1 and Omega = e(g, g2_hat)^alpha;
  the G2 copies of the level-1 bases never leave the key authority, so a
  header is untestable against a candidate root under DDH in G1.
* holder key for root H with hash h1: a0 = g2_hat^alpha * F1_hat(H)^r1,
  a1 = ghat^r1, plus the level-2 G2 bases as delegation material (they ship
  inside holder keys, not in the public params).
* day key for (H, T): b0 = a0 * F2_hat(T)^r2, b1 = a1, b2 = ghat^r2 with
  fresh r2. Stripping F2_hat(T)^r2 out of b0 to forge a sibling day is a
  computational Diffie-Hellman instance.
* encapsulation to (H, T): s fresh; header = (g^s, F1(H)^s, F2(T)^s); shared
  key = hash(Omega^s, header). Decapsulation pairs the header against
  (b0, b1, b2); any identity mismatch leaves an uncancelled pairing factor
  and thus a key that fails AEAD authentication downstream.

A day-scoped header component is testable by anyone holding delegation
material; revocation tables are published per day, so the day is public
context anyway. The holder root is what the scheme hides.
"""

from __future__ import annotations

import hashlib

from ..pairing import (
    G1_GEN,
    G2_GEN,
    g1_add,
    g1_from_bytes,
    g1_mul,
    g1_neg,
    g1_to_bytes,
    g2_add,
    g2_from_bytes,
    g2_mul,
    g2_to_bytes,
    gt_from_bytes,
    gt_pow,
    gt_to_bytes,
    pairing,
    pairing_product,
)
from ..pairing.fields import R
from ..primitives import RandomBytes, hkdf_sha256

SCHEME_ID = "bw2-bls381-v1"

_ROOT_ID_CTX = b"revoca/bw2/root-id/v1"
_DAY_ID_CTX = b"revoca/bw2/day-id/v1"
_KEM_CTX = b"revoca/bw2/kem/v1"

_E_GG = None  # e(g, ghat), computed once per process


def _base_pairing():
    global _E_GG
    if _E_GG is None:
        _E_GG = pairing(G1_GEN, G2_GEN)
    return _E_GG


def _rand_scalar(rng: RandomBytes) -> int:
    return 1 + int.from_bytes(rng(48), "big") % (R - 1)


def _scalar_bytes(k: int) -> bytes:
    return k.to_bytes(32, "big")


def _root_exponent(root: str) -> int:
    return int.from_bytes(hkdf_sha256(root.encode("utf-8"), _ROOT_ID_CTX, 48), "big") % R


def _day_exponent(day: int) -> int:
    return int.from_bytes(hkdf_sha256(day.to_bytes(8, "big"), _DAY_ID_CTX, 48), "big") % R


def setup(rng: RandomBytes):
    from . import MasterPublicParams, MasterSecret

    alpha, z, x10, x11, x20, x21 = (_rand_scalar(rng) for _ in range(6))
    omega = gt_pow(_base_pairing(), alpha * z % R)
    mpp = MasterPublicParams(
        scheme_id=SCHEME_ID,
        fields={
            "u10": g1_to_bytes(g1_mul(G1_GEN, x10)),
            "u11": g1_to_bytes(g1_mul(G1_GEN, x11)),
            "u20": g1_to_bytes(g1_mul(G1_GEN, x20)),
            "u21": g1_to_bytes(g1_mul(G1_GEN, x21)),
            "omega": gt_to_bytes(omega),
        },
    )
    msk = MasterSecret(
        scheme_id=SCHEME_ID,
        fields={
            "alpha": _scalar_bytes(alpha),
            "z": _scalar_bytes(z),
            "x10": _scalar_bytes(x10),
            "x11": _scalar_bytes(x11),
            # level-2 bases go out inside holder keys as delegation material
            "d20": g2_to_bytes(g2_mul(G2_GEN, x20)),
            "d21": g2_to_bytes(g2_mul(G2_GEN, x21)),
        },
    )
    return mpp, msk


def extract(msk, identity, rng: RandomBytes):
    from . import HolderKey

    alpha = int.from_bytes(msk.fields["alpha"], "big")
    z = int.from_bytes(msk.fields["z"], "big")
    x10 = int.from_bytes(msk.fields["x10"], "big")
    x11 = int.from_bytes(msk.fields["x11"], "big")
    h1 = _root_exponent(identity.root)
    r1 = _rand_scalar(rng)
    a0 = g2_mul(G2_GEN, (z * alpha + (x10 + x11 * h1) * r1) % R)
    a1 = g2_mul(G2_GEN, r1)
    return HolderKey(
        scheme_id=SCHEME_ID,
        identity=identity,
        key_material={"a0": g2_to_bytes(a0), "a1": g2_to_bytes(a1)},
        delegation={"d20": msk.fields["d20"], "d21": msk.fields["d21"]},
    )


def delegate(hk, identity, rng: RandomBytes):
    from . import DayKey

    a0 = g2_from_bytes(hk.key_material["a0"], check_subgroup=False)
    d20 = g2_from_bytes(hk.delegation["d20"], check_subgroup=False)
    d21 = g2_from_bytes(hk.delegation["d21"], check_subgroup=False)
    tau = _day_exponent(identity.day)
    r2 = _rand_scalar(rng)
    f2 = g2_add(d20, g2_mul(d21, tau))
    b0 = g2_add(a0, g2_mul(f2, r2))
    return DayKey(
        scheme_id=SCHEME_ID,
        identity=identity,
        key_material={
            "b0": g2_to_bytes(b0),
            "b1": hk.key_material["a1"],
            "b2": g2_to_bytes(g2_mul(G2_GEN, r2)),
        },
    )


def _encap_with_scalar(mpp, identity, s: int):
    from . import EncapHeader

    h1 = _root_exponent(identity.root)
    tau = _day_exponent(identity.day)
    f1 = g1_add(g1_from_bytes(mpp.fields["u10"]), g1_mul(g1_from_bytes(mpp.fields["u11"]), h1))
    f2 = g1_add(g1_from_bytes(mpp.fields["u20"]), g1_mul(g1_from_bytes(mpp.fields["u21"]), tau))
    header = EncapHeader(
        scheme_id=SCHEME_ID,
        fields={
            "b": g1_to_bytes(g1_mul(G1_GEN, s)),
            "c1": g1_to_bytes(g1_mul(f1, s)),
            "c2": g1_to_bytes(g1_mul(f2, s)),
        },
    )
    shared = gt_pow(gt_from_bytes(mpp.fields["omega"]), s)
    return header, _kem_key(shared, header)


def _kem_key(shared_gt, header) -> bytes:
    return hashlib.sha256(_KEM_CTX + gt_to_bytes(shared_gt) + header.canonical_bytes()).digest()


def encap(mpp, identity, rng: RandomBytes):
    return _encap_with_scalar(mpp, identity, _rand_scalar(rng))


def det_encap(mpp, identity, binding: bytes):
    from . import det_randomness

    s = 1 + int.from_bytes(det_randomness(identity, binding), "big") % (R - 1)
    return _encap_with_scalar(mpp, identity, s)


def decap(dk, header) -> bytes:
    b = g1_from_bytes(header.fields["b"])
    c1 = g1_from_bytes(header.fields["c1"])
    c2 = g1_from_bytes(header.fields["c2"])
    b0 = g2_from_bytes(dk.key_material["b0"], check_subgroup=False)
    b1 = g2_from_bytes(dk.key_material["b1"], check_subgroup=False)
    b2 = g2_from_bytes(dk.key_material["b2"], check_subgroup=False)
    shared = pairing_product([(b, b0), (g1_neg(c1), b1), (g1_neg(c2), b2)])
    return _kem_key(shared, header)
