"""Key-derived watermark bits from an AES-128 counter-mode keystream.

The payload is the first L bits of AES-128 applied to counter blocks
``nonce || 0``, ``nonce || 1``, ... (8-byte big-endian counters), taken
MSB-first within each keystream byte. The nonce is public per-image salt;
the 128-bit key is the only secret.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

__all__ = ["WatermarkKey", "BitSequence", "aes128_encrypt_block", "derive_pn", "MAX_PN_BITS"]

MAX_PN_BITS = 1024


@dataclass(frozen=True)
class WatermarkKey:
    key_bytes: bytes  # 16-byte secret
    nonce: bytes      # 8-byte public salt

    def __post_init__(self):
        if len(self.key_bytes) != 16:
            raise ValueError("key must be exactly 16 bytes (128 bits)")
        if len(self.nonce) != 8:
            raise ValueError("nonce must be exactly 8 bytes")

    @classmethod
    def from_hex(cls, key_hex: str, nonce_hex: str) -> "WatermarkKey":
        return cls(key_bytes=bytes.fromhex(key_hex), nonce=bytes.fromhex(nonce_hex))


@dataclass(frozen=True)
class BitSequence:
    bits: tuple

    def __post_init__(self):
        if len(self.bits) < 1:
            raise ValueError("bit sequence must be non-empty")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, i):
        return self.bits[i]


def aes128_encrypt_block(key: bytes, block: bytes) -> bytes:
    """One raw AES-128 block encryption (FIPS-197)."""
    if len(key) != 16:
        raise ValueError("key must be exactly 16 bytes")
    if len(block) != 16:
        raise ValueError("block must be exactly 16 bytes")
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def derive_pn(key: WatermarkKey, length: int) -> BitSequence:
    """First ``length`` keystream bits for (key, nonce); deterministic."""
    if not 1 <= length <= MAX_PN_BITS:
        raise ValueError(f"length must lie in 1..{MAX_PN_BITS}")
    n_blocks = (length + 127) // 128
    stream = b"".join(
        aes128_encrypt_block(key.key_bytes, key.nonce + counter.to_bytes(8, "big"))
        for counter in range(n_blocks)
    )
    bits = np.unpackbits(np.frombuffer(stream, dtype=np.uint8))[:length]
    return BitSequence(tuple(int(b) for b in bits))
