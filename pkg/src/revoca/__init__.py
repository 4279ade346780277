"""Privacy-preserving verifiable-credential revocation with day-scoped
temporal authorizations.

A holder presents a credential together with per-day authorizations (a day
token plus a delegated one-day decryption key); the verifier checks the
token against a published check table, locates the credential's slot in the
published revocation table, and decrypts any revocation documents for
exactly the authorized days. The issuer learns nothing about which
credential was checked; the verifier learns nothing outside the granted
days.
"""

__version__ = "0.1.0"
