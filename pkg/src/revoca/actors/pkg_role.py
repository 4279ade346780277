"""Key-authority role: master setup and holder-key extraction."""

from __future__ import annotations

from .. import ahibe
from ..primitives import RandomBytes, default_rng


def pkg_setup(security_level: str = "test", rng: RandomBytes = default_rng):
    """Generate the hierarchy's public params (published) and master secret
    (never serialized into any published artifact)."""
    return ahibe.setup(security_level, rng)


def pkg_extract(msk: ahibe.MasterSecret, root: str, rng: RandomBytes = default_rng) -> ahibe.HolderKey:
    """Extract the level-1 key for a holder root, delivered out of band."""
    return ahibe.extract(msk, root, rng)
