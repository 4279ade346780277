"""The four protocol roles: key authority, issuer, holder wallet, verifier."""

from .credentials import (  # noqa: F401
    NONCE_LEN,
    Presentation,
    TemporalAuthorization,
    TrustStore,
    VerifiableCredential,
    pop_payload,
    sign_credential,
)
from .pkg_role import pkg_extract, pkg_setup  # noqa: F401
from .issuer import (  # noqa: F401
    CredentialRecord,
    IssuerState,
    RegisteredDocument,
    RegistryError,
    issuer_export_day,
    issuer_init,
    issuer_issue,
    issuer_publish,
    issuer_revoke,
    issuer_rollover,
    issuer_state_from_bytes,
    issuer_state_to_bytes,
    load_issuer_state,
    save_issuer_state,
)
from .holder import (  # noqa: F401
    Wallet,
    WalletRecord,
    WalletRejection,
    holder_audit,
    holder_present,
    holder_store,
)
from .verifier import (  # noqa: F401
    NO_REVOCATION_FOUND,
    BadProofOfPossession,
    BadSignature,
    CheckDigestNotFound,
    DeferredFutureDay,
    KeyProbeFailed,
    SnapshotUnavailable,
    StatusResult,
    VerificationError,
    verifier_check,
)
