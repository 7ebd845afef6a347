"""Hash-chained block store.

Every committed transaction becomes one block. A block binds its payload
with SHA3-256 twice over: ``payload_hash`` fingerprints the canonical
payload bytes, and ``block_hash`` covers ``prev_hash || payload_hash ||
height`` (raw 32-byte digests plus the height as a big-endian u64). The
genesis block links to 64 zero hex digits.

Verification revalidates every payload hash, every block hash, and every
link; it reports the first height that fails. Truncating the chain from the
tail is undetectable by design — a prefix is a valid chain.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

from .encoding import EncodingError, decode_entries, encode_entries
from .records import LedgerEntry

GENESIS_PREV_HASH = "0" * 64


def sha3_hex(data: bytes) -> str:
    return hashlib.sha3_256(data).hexdigest()


def compute_block_hash(prev_hash: str, payload_hash: str, height: int) -> str:
    material = bytes.fromhex(prev_hash) + bytes.fromhex(payload_hash) \
        + struct.pack(">Q", height)
    return sha3_hex(material)


@dataclass
class Block:
    height: int
    prev_hash: str
    payload_hash: str
    payload_bytes: bytes
    entries: tuple[LedgerEntry, ...]
    block_hash: str


class BlockChain:
    def __init__(self):
        self.blocks: list[Block] = []

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def tip_hash(self) -> str:
        return self.blocks[-1].block_hash if self.blocks else GENESIS_PREV_HASH

    def append(self, entries: tuple[LedgerEntry, ...]) -> Block:
        if not entries:
            raise ValueError("block payload must be non-empty")
        payload_bytes = encode_entries(entries)
        payload_hash = sha3_hex(payload_bytes)
        height = len(self.blocks)
        prev_hash = self.tip_hash
        block = Block(
            height=height,
            prev_hash=prev_hash,
            payload_hash=payload_hash,
            payload_bytes=payload_bytes,
            entries=entries,
            block_hash=compute_block_hash(prev_hash, payload_hash, height),
        )
        self.blocks.append(block)
        return block

    def verify(self) -> int | None:
        """Return the first invalid height, or None if the chain is sound."""
        expected_prev = GENESIS_PREV_HASH
        for i, block in enumerate(self.blocks):
            if block.height != i or block.prev_hash != expected_prev:
                return i
            if sha3_hex(block.payload_bytes) != block.payload_hash:
                return i
            if compute_block_hash(block.prev_hash, block.payload_hash, i) != block.block_hash:
                return i
            expected_prev = block.block_hash
        return None


# -- on-disk format --------------------------------------------------------------
#
# The ledger file is a sequence of length-prefixed frames, one per block:
#   u32 frame_len | u64 height | 32B prev | 32B payload_hash | 32B block_hash
#   | payload_bytes
# Appending a frame never rewrites earlier bytes.

def encode_frame(block: Block) -> bytes:
    body = (struct.pack(">Q", block.height)
            + bytes.fromhex(block.prev_hash)
            + bytes.fromhex(block.payload_hash)
            + bytes.fromhex(block.block_hash)
            + block.payload_bytes)
    return struct.pack(">I", len(body)) + body


def append_frame(path: Path, block: Block) -> None:
    with open(path, "ab") as fh:
        fh.write(encode_frame(block))


def load_chain(path: Path) -> BlockChain:
    chain = BlockChain()
    data = Path(path).read_bytes()
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise EncodingError("truncated frame header")
        (frame_len,) = struct.unpack(">I", data[pos:pos + 4])
        pos += 4
        frame = data[pos:pos + frame_len]
        if len(frame) != frame_len or frame_len < 8 + 3 * 32:
            raise EncodingError("truncated frame")
        pos += frame_len
        (height,) = struct.unpack(">Q", frame[:8])
        prev_hash = frame[8:40].hex()
        payload_hash = frame[40:72].hex()
        block_hash = frame[72:104].hex()
        payload_bytes = frame[104:]
        chain.blocks.append(Block(
            height=height,
            prev_hash=prev_hash,
            payload_hash=payload_hash,
            payload_bytes=payload_bytes,
            entries=decode_entries(payload_bytes),
            block_hash=block_hash,
        ))
    return chain
