"""One-time self-destructing URL vault.

A minted URL is ``otu://<node-id>/<tokenId>#<keyPartBase64url>``. The record
locator is sealed with AES-256-GCM under a fresh key K; the vault keeps
K xor U and the URL fragment carries U, so neither half alone decrypts
anything, and the fragment never reaches request logs once the scheme is
mapped onto HTTP.

Redemption is an atomic check-and-destroy: the token flips UNREDEEMED ->
REDEEMED and its sealed material is erased *before* decryption, so over any
interleaving exactly one caller can obtain the locator, and a wrong key part
still burns the token. Redeemed, expired, and unknown tokens are all
reported as TokenGone — deliberately indistinguishable.

Persistence is one JSON file per live token (never containing the locator or
the URL key part) replaced by an empty ``.gone`` marker on redemption, so
"removed from the system" is literal.
"""

from __future__ import annotations

import base64
import binascii
import json
import random
import threading
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from urllib.parse import urlparse

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..clocks import Clock, system_clock
from ..errors import TokenGone

URL_SCHEME = "otu"
DEFAULT_TTL_MS = 24 * 60 * 60 * 1000
_KEY_LEN = 32
_NONCE_LEN = 12


class TokenState(Enum):
    UNREDEEMED = "UNREDEEMED"
    REDEEMED = "REDEEMED"


@dataclass(frozen=True)
class SealedAddress:
    ciphertext: bytes
    nonce: bytes
    server_key_part: bytes


@dataclass
class OneTimeToken:
    token_id: str
    state: TokenState
    bound_event_id: str
    expires_at_ms: int | None
    sealed: SealedAddress | None


def _rand_bytes(rng: random.Random, n: int) -> bytes:
    return rng.getrandbits(n * 8).to_bytes(n, "big")


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _b64(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.urlsafe_b64decode(text + "=" * (-len(text) % 4))


class OneTimeVault:
    def __init__(self, directory: str | Path, node_id: str = "edge-1",
                 clock: Clock | None = None, rng: random.Random | None = None,
                 ttl_ms: int | None = DEFAULT_TTL_MS):
        self.node_id = node_id
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._clock = clock or system_clock
        self._rng = rng or random.SystemRandom()
        self._ttl_ms = ttl_ms or None  # 0 means no expiry
        self._tokens: dict[str, OneTimeToken] = {}
        self._lock = threading.Lock()
        self._load()

    def _load(self) -> None:
        for path in self._dir.glob("*.json"):
            data = json.loads(path.read_text())
            self._tokens[data["tokenId"]] = OneTimeToken(
                token_id=data["tokenId"],
                state=TokenState.UNREDEEMED,
                bound_event_id=data["eventId"],
                expires_at_ms=data["expiresAt"],
                sealed=SealedAddress(
                    ciphertext=bytes.fromhex(data["ciphertextHex"]),
                    nonce=bytes.fromhex(data["nonceHex"]),
                    server_key_part=bytes.fromhex(data["serverKeyPartHex"]),
                ),
            )
        for path in self._dir.glob("*.gone"):
            token_id = path.stem
            self._tokens[token_id] = OneTimeToken(
                token_id, TokenState.REDEEMED, "", None, None)

    def mint(self, locator: str, bound_event_id: str) -> str:
        with self._lock:
            token_id = _rand_bytes(self._rng, 16).hex()
            key = _rand_bytes(self._rng, _KEY_LEN)
            url_key_part = _rand_bytes(self._rng, _KEY_LEN)
            nonce = _rand_bytes(self._rng, _NONCE_LEN)
            ciphertext = AESGCM(key).encrypt(nonce, locator.encode("utf-8"),
                                             token_id.encode("ascii"))
            sealed = SealedAddress(ciphertext, nonce, _xor(key, url_key_part))
            expires_at = self._clock() + self._ttl_ms if self._ttl_ms else None
            token = OneTimeToken(token_id, TokenState.UNREDEEMED,
                                 bound_event_id, expires_at, sealed)
            self._tokens[token_id] = token
            self._token_path(token_id).write_text(json.dumps({
                "tokenId": token_id,
                "state": token.state.value,
                "eventId": bound_event_id,
                "expiresAt": expires_at,
                "serverKeyPartHex": sealed.server_key_part.hex(),
                "nonceHex": sealed.nonce.hex(),
                "ciphertextHex": sealed.ciphertext.hex(),
            }))
        return f"{URL_SCHEME}://{self.node_id}/{token_id}#{_b64(url_key_part)}"

    def redeem(self, url: str) -> tuple[str, str]:
        """Consume the URL; returns (locator, bound event id) exactly once."""
        token_id, url_key_part = self._parse_url(url)
        with self._lock:
            token = self._tokens.get(token_id)
            alive = (token is not None
                     and token.state is TokenState.UNREDEEMED
                     and token.sealed is not None
                     and (token.expires_at_ms is None
                          or self._clock() < token.expires_at_ms))
            if not alive:
                raise TokenGone("url is gone and cannot be accessed again")
            sealed = token.sealed
            event_id = token.bound_event_id
            token.state = TokenState.REDEEMED
            token.sealed = None
            self._token_path(token_id).unlink(missing_ok=True)
            self._gone_path(token_id).touch()
        try:
            key = _xor(sealed.server_key_part, url_key_part)
            locator = AESGCM(key).decrypt(sealed.nonce, sealed.ciphertext,
                                          token_id.encode("ascii"))
        except (InvalidTag, ValueError) as exc:
            raise TokenGone("url is gone and cannot be accessed again") from exc
        return locator.decode("utf-8"), event_id

    def token(self, token_id: str) -> OneTimeToken | None:
        with self._lock:
            return self._tokens.get(token_id)

    def _token_path(self, token_id: str) -> Path:
        return self._dir / f"{token_id}.json"

    def _gone_path(self, token_id: str) -> Path:
        return self._dir / f"{token_id}.gone"

    def _parse_url(self, url: str) -> tuple[str, bytes]:
        parts = urlparse(url)
        token_id = parts.path.lstrip("/")
        if parts.scheme != URL_SCHEME or not token_id or not parts.fragment:
            raise TokenGone("url is gone and cannot be accessed again")
        try:
            key_part = _unb64(parts.fragment)
        except (ValueError, binascii.Error) as exc:
            raise TokenGone("url is gone and cannot be accessed again") from exc
        return token_id, key_part
