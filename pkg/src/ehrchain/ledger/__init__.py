"""Single-node permissioned ledger with a hash-chained audit log."""

from .chain import (
    GENESIS_PREV_HASH,
    Block,
    BlockChain,
    compute_block_hash,
    load_chain,
    sha3_hex,
)
from .core import DEFAULT_ACL_SOURCE, REJECTION_DETAIL, Ledger, RetrievalGrant, default_acl_rules
from .encoding import EncodingError, decode_entries, encode_entries, encode_entry
from .records import (
    AccessEvent,
    AssetEntry,
    BlacklistEntry,
    EhrAsset,
    EventEntry,
    LedgerEntry,
    Outcome,
    ParticipantKind,
    ParticipantRecord,
    RegisterEntry,
)

__all__ = [
    "AccessEvent",
    "AssetEntry",
    "BlacklistEntry",
    "Block",
    "BlockChain",
    "DEFAULT_ACL_SOURCE",
    "EhrAsset",
    "EncodingError",
    "EventEntry",
    "GENESIS_PREV_HASH",
    "Ledger",
    "LedgerEntry",
    "Outcome",
    "ParticipantKind",
    "ParticipantRecord",
    "REJECTION_DETAIL",
    "RegisterEntry",
    "RetrievalGrant",
    "compute_block_hash",
    "decode_entries",
    "default_acl_rules",
    "encode_entries",
    "encode_entry",
    "load_chain",
    "sha3_hex",
]
