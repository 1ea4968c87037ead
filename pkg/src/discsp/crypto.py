"""Cooperative ElGamal encryption of booleans over a safe-prime group.

Supports the homomorphic operations the encrypted solvers need: OR of two
cyphertexts, AND of a cyphertext with a cleartext boolean, re-randomization,
compound public keys formed as the product of per-agent shares, and
decryption split into per-share partial steps.

Encoding: false is the group identity 1, true is a fixed element z != 1 of
large prime order, so an OR-product of k trues decodes to z**k.  Anything
that is neither 1 nor a small power of z signals a protocol bug and raises.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


class CryptoError(ValueError):
    pass


class MalformedCyphertext(CryptoError):
    """Recovered group element is neither 1 nor a small power of z."""


# ------------------------------------------------------------------ groups

def is_probable_prime(n: int, rounds: int = 64, rng=None) -> bool:
    """Miller-Rabin with the given number of rounds."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    rng = rng or random.Random(0xC0FFEE ^ (n & 0xFFFF))
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupParams:
    """Safe-prime group: p = 2q + 1 with q prime, g a generator of Z_p^*,
    z the true-encoding element (a generator of the order-q subgroup)."""

    p: int
    g: int
    z: int
    bit_length: int
    # Products of up to this many trues are decodable; beyond that the
    # element is treated as malformed.
    true_power_bound: int = 1 << 16
    _z_powers: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def q(self) -> int:
        return (self.p - 1) // 2

    def validate(self):
        if not is_probable_prime(self.p) or not is_probable_prime(self.q):
            raise CryptoError("p is not a safe prime")
        if pow(self.g, 2, self.p) == 1 or pow(self.g, self.q, self.p) == 1:
            raise CryptoError("g does not generate Z_p^*")
        if self.z == 1 or pow(self.z, self.q, self.p) != 1:
            raise CryptoError("z must be a non-identity element of the order-q subgroup")

    def decode(self, element: int) -> int:
        """Return k >= 0 such that element == z**k, else raise.

        k == 0 means false; k >= 1 means an OR-product of k trues.
        """
        if element == 1:
            return 0
        if not self._z_powers:
            self._z_powers[self.z] = 1
        if element in self._z_powers:
            return self._z_powers[element]
        acc = max(self._z_powers.values())
        cur = pow(self.z, acc, self.p)
        while acc < self.true_power_bound:
            acc += 1
            cur = cur * self.z % self.p
            self._z_powers[cur] = acc
            if cur == element:
                return acc
        raise MalformedCyphertext("recovered element is not a small power of z")


def make_group(p: int, g: int) -> GroupParams:
    """Build params from a known safe prime; z is fixed to g**2."""
    return GroupParams(p=p, g=g, z=pow(g, 2, p), bit_length=p.bit_length())


def generate_group(bits: int, rng: random.Random) -> GroupParams:
    """Probabilistic safe-prime search (Miller-Rabin, 64 rounds)."""
    if bits < 5:
        raise CryptoError("group too small")
    while True:
        q = rng.getrandbits(bits - 1) | (1 << (bits - 2)) | 1
        if not is_probable_prime(q, rng=rng):
            continue
        p = 2 * q + 1
        if p.bit_length() != bits or not is_probable_prime(p, rng=rng):
            continue
        for g in range(2, 200):
            if pow(g, 2, p) != 1 and pow(g, q, p) != 1:
                params = make_group(p, g)
                params.validate()
                return params


# Published in-repo groups: a tiny textbook group for exhaustive tests, a
# 64-bit toy group for encrypted-solver tests, and the 512-bit default.
TOY_GROUP = make_group(23, 5)
TOY64_GROUP = make_group(11881870593822888767, 5)
GROUP_512 = make_group(
    13283543209006620618882737316122394413749935301436007935858629953897489188592406634357374894532301246549631937186744522571185597391625718348457546517485563,  # noqa: E501
    2,
)

_GROUPS_BY_BITS = {5: TOY_GROUP, 64: TOY64_GROUP, 512: GROUP_512}


def group_for_bits(bits: int, rng: random.Random | None = None) -> GroupParams:
    if bits in _GROUPS_BY_BITS:
        return _GROUPS_BY_BITS[bits]
    return generate_group(bits, rng or random.Random(bits))


# ------------------------------------------------------------------- keys

@dataclass(frozen=True)
class KeyPairShare:
    private: int  # x_i in [1, p-2]
    public: int   # y_i = g**x_i mod p


@dataclass(frozen=True)
class CompoundPublicKey:
    y: int
    share_count: int


def generate_share(params: GroupParams, rng: random.Random) -> KeyPairShare:
    x = rng.randrange(1, params.p - 1)
    return KeyPairShare(private=x, public=pow(params.g, x, params.p))


def combine_public(params: GroupParams, publics) -> CompoundPublicKey:
    y = 1
    n = 0
    for pub in publics:
        y = y * pub % params.p
        n += 1
    return CompoundPublicKey(y=y, share_count=n)


def split_public_shares(params: GroupParams, share: KeyPairShare, count: int,
                        rng: random.Random) -> list[int]:
    """Split one key pair's public part into `count` sub-shares whose product
    is g**private.  Lets an agent publish several shares while keeping a
    single private exponent."""
    if count < 1:
        raise CryptoError("count must be >= 1")
    order = params.p - 1
    exps = [rng.randrange(0, order) for _ in range(count - 1)]
    last = (share.private - sum(exps)) % order
    exps.append(last)
    return [pow(params.g, e, params.p) for e in exps]


# ------------------------------------------------------------- encryption

@dataclass(frozen=True)
class Cyphertext:
    alpha: int
    beta: int

    def canonical(self):
        return {"alpha": self.alpha, "beta": self.beta}


def encode_bool(params: GroupParams, m: bool) -> int:
    return params.z if m else 1


def encrypt_element(params: GroupParams, key: CompoundPublicKey, element: int,
                    r: int) -> Cyphertext:
    if not 1 <= r <= params.p - 2:
        raise CryptoError("randomness outside [1, p-2]")
    return Cyphertext(alpha=element * pow(key.y, r, params.p) % params.p,
                      beta=pow(params.g, r, params.p))


def encrypt(params: GroupParams, key: CompoundPublicKey, m: bool,
            rng: random.Random) -> Cyphertext:
    r = rng.randrange(1, params.p - 1)
    return encrypt_element(params, key, encode_bool(params, m), r)


def rerandomize(params: GroupParams, key: CompoundPublicKey, c: Cyphertext,
                r: int) -> Cyphertext:
    """Multiply in a fresh encryption of 1; r == 0 leaves c unchanged."""
    return Cyphertext(alpha=c.alpha * pow(key.y, r, params.p) % params.p,
                      beta=c.beta * pow(params.g, r, params.p) % params.p)


def rerandomize_fresh(params: GroupParams, key: CompoundPublicKey,
                      c: Cyphertext, rng: random.Random) -> Cyphertext:
    return rerandomize(params, key, c, rng.randrange(1, params.p - 1))


def or_cipher(params: GroupParams, c1: Cyphertext, c2: Cyphertext) -> Cyphertext:
    """Component-wise product: decrypts true iff either input is true."""
    return Cyphertext(alpha=c1.alpha * c2.alpha % params.p,
                      beta=c1.beta * c2.beta % params.p)


def and_cleartext(params: GroupParams, key: CompoundPublicKey, c: Cyphertext,
                  b: bool, rng: random.Random) -> Cyphertext:
    """AND with a cleartext boolean: false yields a fresh encryption of
    false, true re-randomizes c."""
    if not b:
        return encrypt(params, key, False, rng)
    return rerandomize_fresh(params, key, c, rng)


def partial_decrypt(params: GroupParams, c: Cyphertext, share: KeyPairShare) -> int:
    """This share's decryption contribution beta**x_i mod p."""
    return pow(c.beta, share.private, params.p)


def recover_element(params: GroupParams, c: Cyphertext, decryption_shares) -> int:
    denom = 1
    for s in decryption_shares:
        denom = denom * s % params.p
    return c.alpha * pow(denom, -1, params.p) % params.p


def combine_decrypt(params: GroupParams, c: Cyphertext, decryption_shares) -> bool:
    """False iff the recovered element is 1; true for a small power of z;
    anything else raises MalformedCyphertext."""
    return params.decode(recover_element(params, c, decryption_shares)) > 0


def strip_share(params: GroupParams, c: Cyphertext, share: KeyPairShare) -> Cyphertext:
    """Fold one partial decryption into alpha, leaving beta untouched.

    After all shares are stripped, alpha holds the plaintext element."""
    return Cyphertext(
        alpha=c.alpha * pow(partial_decrypt(params, c, share), -1, params.p) % params.p,
        beta=c.beta,
    )


# Small-integer encoding used by the rerooting vectors: value v in {-1, 0, 1}
# is encrypted as z**(v + 2), i.e. z, z**2 or z**3.

def encode_small(params: GroupParams, v: int) -> int:
    if v not in (-1, 0, 1):
        raise CryptoError("vector entries must be in {-1, 0, 1}")
    return pow(params.z, v + 2, params.p)


def decode_small(params: GroupParams, element: int) -> int:
    for v in (-1, 0, 1):
        if element == encode_small(params, v):
            return v
    raise MalformedCyphertext("element is not an encoded vector entry")


def encrypt_small(params: GroupParams, key: CompoundPublicKey, v: int,
                  rng: random.Random) -> Cyphertext:
    return encrypt_element(params, key, encode_small(params, v),
                           rng.randrange(1, params.p - 1))


# ---------------------------------------------------------- serialization

def _uint_bytes(n: int) -> bytes:
    if n < 0:
        raise CryptoError("negative integer in wire encoding")
    raw = n.to_bytes((n.bit_length() + 7) // 8 or 1, "big")
    return len(raw).to_bytes(4, "big") + raw


def _read_uint(buf: bytes, off: int) -> tuple[int, int]:
    ln = int.from_bytes(buf[off:off + 4], "big")
    off += 4
    return int.from_bytes(buf[off:off + ln], "big"), off + ln


def cyphertext_to_bytes(c: Cyphertext) -> bytes:
    return _uint_bytes(c.alpha) + _uint_bytes(c.beta)


def cyphertext_from_bytes(buf: bytes) -> Cyphertext:
    alpha, off = _read_uint(buf, 0)
    beta, off = _read_uint(buf, off)
    if off != len(buf):
        raise CryptoError("trailing bytes in cyphertext encoding")
    return Cyphertext(alpha=alpha, beta=beta)


def group_to_bytes(params: GroupParams) -> bytes:
    return (_uint_bytes(params.p) + _uint_bytes(params.g) + _uint_bytes(params.z)
            + _uint_bytes(params.bit_length))


def group_from_bytes(buf: bytes) -> GroupParams:
    p, off = _read_uint(buf, 0)
    g, off = _read_uint(buf, off)
    z, off = _read_uint(buf, off)
    bits, off = _read_uint(buf, off)
    if off != len(buf):
        raise CryptoError("trailing bytes in group encoding")
    return GroupParams(p=p, g=g, z=z, bit_length=bits)
