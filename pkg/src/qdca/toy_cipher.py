"""Toy SPN block cipher, differential characteristics and the right-pair predicate.

The cipher is a classic substitution-permutation network on an 8-bit block
(two parallel 4-bit S-boxes, low nibble = bits 0..3). Each round XORs a
round key and applies the S-box layer; every round except the last is
followed by a bit permutation, and a final whitening key is XORed after
the last round. The last round key (the whitening key) is the attack target.

All objects here are immutable after construction; every operation is a
pure function, safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

NIBBLE_BITS = 4

# Widely studied tutorial S-box, and a nibble-interleaving bit transpose
# (bit i -> (i mod 4)*2 + i div 4) so each S-box output feeds both next-round
# S-boxes. A pure nibble-local pbox would split the cipher into two
# independent 4-bit threads and ruin the counting statistics.
DEFAULT_SBOX = (0xE, 0x4, 0xD, 0x1, 0x2, 0xF, 0xB, 0x8,
                0x3, 0xA, 0x6, 0xC, 0x5, 0x9, 0x0, 0x7)
DEFAULT_PBOX = tuple((i % 4) * 2 + i // 4 for i in range(8))

# Default planted attack instance (found by exhaustive search over all
# plaintext differences, single-nibble output differences and master keys):
# with key 0x09 the n=6 count table is [8,2,0,2,2,2,2,2,0,2,0,0,0,0,2,0]
# and the exact full-codebook probability is 16/256.
DEFAULT_PLAINTEXT_DIFF = 0x0A
DEFAULT_OUTPUT_DIFF = 0x02
DEFAULT_PLANTED_KEY = 0x09


def rotl(value: int, amount: int, width: int = 8) -> int:
    """Rotate ``value`` left by ``amount`` bits within ``width`` bits."""
    amount %= width
    mask = (1 << width) - 1
    return ((value << amount) | (value >> (width - amount))) & mask


def _schedule_rotate(master: int, rounds: int, width: int) -> tuple[int, ...]:
    return tuple(rotl(master, r, width) for r in range(rounds + 1))


def _schedule_zero(master: int, rounds: int, width: int) -> tuple[int, ...]:
    return (0,) * (rounds + 1)


KEY_SCHEDULES = {"rotate": _schedule_rotate, "zero": _schedule_zero}


@dataclass(frozen=True)
class ToyCipher:
    """SPN instance: S-box table, bit permutation, round count, key schedule."""

    sbox: tuple[int, ...] = DEFAULT_SBOX
    pbox: tuple[int, ...] = DEFAULT_PBOX
    rounds: int = 4
    key_schedule: str = "rotate"
    block_width: int = 8

    def __post_init__(self):
        if self.block_width % NIBBLE_BITS != 0 or not 4 <= self.block_width <= 16:
            raise ValueError(f"unsupported block width {self.block_width}")
        if sorted(self.sbox) != list(range(16)):
            raise ValueError("sbox must be a bijection on [0, 16)")
        if sorted(self.pbox) != list(range(self.block_width)):
            raise ValueError(f"pbox must be a bijection on bit positions [0, {self.block_width})")
        if self.rounds < 1:
            raise ValueError("at least one round required")
        if self.key_schedule not in KEY_SCHEDULES:
            raise ValueError(f"unknown key schedule {self.key_schedule!r}")
        size = 1 << self.block_width
        xs = np.arange(size)
        sub = np.zeros(size, dtype=np.int64)
        for shift in range(0, self.block_width, NIBBLE_BITS):
            sub |= np.asarray(self.sbox)[(xs >> shift) & 0xF] << shift
        perm = np.zeros(size, dtype=np.int64)
        for i, dest in enumerate(self.pbox):
            perm |= ((xs >> i) & 1) << dest
        object.__setattr__(self, "_sub", sub)
        object.__setattr__(self, "_perm", perm)
        object.__setattr__(self, "_isub", np.argsort(sub))
        object.__setattr__(self, "_iperm", np.argsort(perm))

    # ---- layers -------------------------------------------------------

    @property
    def num_sboxes(self) -> int:
        return self.block_width // NIBBLE_BITS

    @property
    def block_size(self) -> int:
        return 1 << self.block_width

    def sub_layer(self, block):
        return self._sub[block]

    def inv_sub_layer(self, block):
        return self._isub[block]

    def permute(self, block):
        return self._perm[block]

    def inv_permute(self, block):
        return self._iperm[block]

    def round_keys(self, master: int) -> tuple[int, ...]:
        self._check_block(master, "key")
        return KEY_SCHEDULES[self.key_schedule](master, self.rounds, self.block_width)

    def last_round_key(self, master: int) -> int:
        return self.round_keys(master)[self.rounds]

    def _check_block(self, value, what: str):
        v = np.asarray(value)
        if np.any(v < 0) or np.any(v >= self.block_size):
            raise ValueError(f"{what} out of range for {self.block_width}-bit block")

    # ---- encryption ---------------------------------------------------

    def encrypt(self, key: int, pt):
        """Encrypt a block (or numpy array of blocks) under the master key."""
        self._check_block(pt, "plaintext")
        keys = self.round_keys(key)
        state = np.asarray(pt)
        for r in range(self.rounds):
            state = self._sub[state ^ keys[r]]
            if r < self.rounds - 1:
                state = self._perm[state]
        state = state ^ keys[self.rounds]
        return int(state) if np.isscalar(pt) or np.ndim(pt) == 0 else state

    def decrypt(self, key: int, ct):
        self._check_block(ct, "ciphertext")
        keys = self.round_keys(key)
        state = np.asarray(ct) ^ keys[self.rounds]
        for r in range(self.rounds - 1, -1, -1):
            if r < self.rounds - 1:
                state = self._iperm[state]
            state = self._isub[state]
            state = state ^ keys[r]
        return int(state) if np.isscalar(ct) or np.ndim(ct) == 0 else state


# ---- expected output difference expressions ---------------------------


@dataclass(frozen=True)
class ConstantDifference:
    """SPN-style expression: a fixed difference at the last S-box layer input."""

    delta: int

    def expected(self, ct_pair: tuple[int, int]) -> int:
        return self.delta


@dataclass(frozen=True)
class CiphertextDependentDifference:
    """Expected difference computed from the ciphertext pair itself.

    Mirrors attacks where the predicted value is ``left_half(c1 ^ c2) ^ mask``;
    the result has ``half_width`` bits and constrains the low (attacked) half.
    """

    mask: int
    half_width: int = 4

    def expected(self, ct_pair: tuple[int, int]) -> int:
        c1, c2 = ct_pair
        return ((c1 ^ c2) >> self.half_width) ^ self.mask


DifferenceExpr = Union[ConstantDifference, CiphertextDependentDifference]


@dataclass(frozen=True)
class Characteristic:
    """A differential: plaintext difference, expected last-round input
    difference expression, measured probability and the targeted key bits.

    ``active_sboxes`` lists the S-box positions (0 = low nibble) whose last
    round key bits are recovered; ``subkey_bits`` = 4 * len(active_sboxes).
    ``probability`` is measured exhaustively for a planted instance and
    stored, never hand-estimated.
    """

    plaintext_diff: int
    expr: DifferenceExpr
    probability: float
    active_sboxes: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not 0 < self.probability <= 1:
            raise ValueError("characteristic probability must be in (0, 1]")
        if self.plaintext_diff == 0:
            raise ValueError("degenerate zero plaintext difference")
        if len(set(self.active_sboxes)) != len(self.active_sboxes):
            raise ValueError("duplicate active S-box positions")
        if isinstance(self.expr, ConstantDifference):
            for pos in range(max(self.expr.delta.bit_length() // NIBBLE_BITS + 1,
                                 max(self.active_sboxes) + 1)):
                nib = (self.expr.delta >> (NIBBLE_BITS * pos)) & 0xF
                if pos in self.active_sboxes and nib == 0:
                    raise ValueError(f"active S-box {pos} has zero expected difference")
                if pos not in self.active_sboxes and nib != 0:
                    raise ValueError(
                        f"expected difference touches S-box {pos} whose key bits "
                        "are not attacked")
        elif len(self.active_sboxes) != 1:
            raise ValueError("ciphertext-dependent expression targets one S-box")

    @property
    def subkey_bits(self) -> int:
        return NIBBLE_BITS * len(self.active_sboxes)

    def expected_difference(self, ct_pair: tuple[int, int]) -> int:
        """The difference the last round must exhibit for a right pair."""
        return self.expr.expected(ct_pair)


@dataclass(frozen=True)
class PairSet:
    """The chosen-plaintext pairs (P_i, P_i ^ P') with their ciphertexts."""

    index_bits: int
    plaintext_diff: int
    entries: tuple[tuple[int, int, int, int], ...]

    @property
    def num_pairs(self) -> int:
        return len(self.entries)

    def __post_init__(self):
        # N is a power of two; an entirely empty set is allowed as a degenerate input
        if self.entries and len(self.entries) != 1 << self.index_bits:
            raise ValueError("entry count must equal 2**index_bits")
        for p1, p2, _, _ in self.entries:
            if p1 ^ p2 != self.plaintext_diff:
                raise ValueError("entry plaintext difference mismatch")


def gen_pairs(cipher: ToyCipher, key: int, plaintext_diff: int, index_bits: int) -> PairSet:
    """Query the cryptosystem for N = 2**index_bits pairs with difference P'."""
    if plaintext_diff == 0:
        raise ValueError("degenerate zero plaintext difference")
    cipher._check_block(plaintext_diff, "plaintext difference")
    if index_bits < 1 or (1 << index_bits) > cipher.block_size:
        raise ValueError(f"index_bits {index_bits} outside block capacity")
    p1 = np.arange(1 << index_bits)
    p2 = p1 ^ plaintext_diff
    c1 = cipher.encrypt(key, p1)
    c2 = cipher.encrypt(key, p2)
    entries = tuple(zip(p1.tolist(), p2.tolist(), c1.tolist(), c2.tolist()))
    return PairSet(index_bits, plaintext_diff, entries)


def expected_output_difference(ch: Characteristic, ct_pair: tuple[int, int]) -> int:
    return ch.expected_difference(ct_pair)


def _split_subkey(ch: Characteristic, x: int) -> dict[int, int]:
    # 4 bits of x per active S-box, lowest position first
    out = {}
    for i, pos in enumerate(sorted(ch.active_sboxes)):
        out[pos] = (x >> (NIBBLE_BITS * i)) & 0xF
    return out


def true_subkey(cipher: ToyCipher, key: int, ch: Characteristic) -> int:
    """The planted value of the attacked last-round key bits."""
    last = cipher.last_round_key(key)
    z = 0
    for i, pos in enumerate(sorted(ch.active_sboxes)):
        z |= ((last >> (NIBBLE_BITS * pos)) & 0xF) << (NIBBLE_BITS * i)
    return z


def _inv_sbox(cipher: ToyCipher) -> tuple[int, ...]:
    inv = [0] * 16
    for i, v in enumerate(cipher.sbox):
        inv[v] = i
    return tuple(inv)


def _pair_is_right(cipher: ToyCipher, ch: Characteristic, x: int,
                   ct_pair: tuple[int, int]) -> bool:
    """One-round trial decryption check of a ciphertext pair under guess x."""
    c1, c2 = ct_pair
    guesses = _split_subkey(ch, x)
    inv_s = _inv_sbox(cipher)
    if isinstance(ch.expr, ConstantDifference):
        delta = ch.expr.delta
        for pos in range(cipher.num_sboxes):
            shift = NIBBLE_BITS * pos
            n1, n2 = (c1 >> shift) & 0xF, (c2 >> shift) & 0xF
            if pos in guesses:
                if inv_s[n1 ^ guesses[pos]] ^ inv_s[n2 ^ guesses[pos]] != (delta >> shift) & 0xF:
                    return False
            elif n1 ^ n2 != 0:
                # zero expected difference must already show in the ciphertexts
                return False
        return True
    pos = ch.active_sboxes[0]
    shift = NIBBLE_BITS * pos
    want = ch.expected_difference(ct_pair) & 0xF
    u1 = inv_s[((c1 >> shift) & 0xF) ^ guesses[pos]]
    u2 = inv_s[((c2 >> shift) & 0xF) ^ guesses[pos]]
    return (u1 ^ u2) == want


def is_right_pair(cipher: ToyCipher, ch: Characteristic, x: int, j: int,
                  pairs: PairSet) -> int:
    """e(x, j): 1 iff pair j is a right pair of subkey x.

    The index space is padded to 2N: indices j >= N never mark.
    """
    n_pairs = pairs.num_pairs
    if not 0 <= j < 2 * n_pairs:
        raise ValueError(f"pair index {j} outside padded index space [0, {2*n_pairs})")
    if x < 0 or x >= (1 << ch.subkey_bits):
        raise ValueError(f"subkey {x} outside [0, {1 << ch.subkey_bits})")
    if j >= n_pairs:
        return 0
    _, _, c1, c2 = pairs.entries[j]
    return int(_pair_is_right(cipher, ch, x, (c1, c2)))


def right_pair_table(cipher: ToyCipher, ch: Characteristic, x: int,
                     pairs: PairSet) -> np.ndarray:
    """Boolean e(x, .) over the padded index space [0, 2N), vectorized."""
    n_pairs = pairs.num_pairs
    c1 = np.fromiter((e[2] for e in pairs.entries), dtype=np.int64, count=n_pairs)
    c2 = np.fromiter((e[3] for e in pairs.entries), dtype=np.int64, count=n_pairs)
    guesses = _split_subkey(ch, x)
    inv_s = np.asarray(_inv_sbox(cipher))
    ok = np.ones(n_pairs, dtype=bool)
    if isinstance(ch.expr, ConstantDifference):
        delta = ch.expr.delta
        for pos in range(cipher.num_sboxes):
            shift = NIBBLE_BITS * pos
            n1, n2 = (c1 >> shift) & 0xF, (c2 >> shift) & 0xF
            want = (delta >> shift) & 0xF
            if pos in guesses:
                ok &= (inv_s[n1 ^ guesses[pos]] ^ inv_s[n2 ^ guesses[pos]]) == want
            else:
                ok &= (n1 ^ n2) == 0
    else:
        pos = ch.active_sboxes[0]
        shift = NIBBLE_BITS * pos
        want = ((c1 ^ c2) >> ch.expr.half_width) ^ ch.expr.mask
        n1, n2 = (c1 >> shift) & 0xF, (c2 >> shift) & 0xF
        ok &= (inv_s[n1 ^ guesses[pos]] ^ inv_s[n2 ^ guesses[pos]]) == (want & 0xF)
    return np.concatenate([ok, np.zeros(n_pairs, dtype=bool)])


@dataclass(frozen=True)
class AttackContext:
    """Everything the oracles need: cipher, characteristic and the pair data."""

    cipher: ToyCipher
    characteristic: Characteristic
    pairs: PairSet
    _tables: dict = field(default_factory=dict, compare=False, repr=False)

    def marked_table(self, x: int) -> np.ndarray:
        if x not in self._tables:
            self._tables[x] = right_pair_table(self.cipher, self.characteristic, x, self.pairs)
        return self._tables[x]

    @property
    def subkey_bits(self) -> int:
        return self.characteristic.subkey_bits

    @property
    def index_bits(self) -> int:
        return self.pairs.index_bits


# ---- characteristic construction --------------------------------------


def difference_distribution_table(sbox: Sequence[int]) -> np.ndarray:
    """DDT[dx][dy] = #{v : S[v] ^ S[v ^ dx] == dy}."""
    sbox = np.asarray(sbox)
    ddt = np.zeros((16, 16), dtype=np.int64)
    v = np.arange(16)
    for dx in range(16):
        np.add.at(ddt[dx], sbox[v] ^ sbox[v ^ dx], 1)
    return ddt


def measure_probability(cipher: ToyCipher, key: int, ch: Characteristic) -> float:
    """Exact right-pair frequency of the true subkey over the full codebook."""
    pts = np.arange(cipher.block_size)
    c1 = cipher.encrypt(key, pts)
    c2 = cipher.encrypt(key, pts ^ ch.plaintext_diff)
    z = true_subkey(cipher, key, ch)
    pairs = PairSet(cipher.block_width, ch.plaintext_diff,
                    tuple(zip(pts.tolist(), (pts ^ ch.plaintext_diff).tolist(),
                              c1.tolist(), c2.tolist())))
    table = right_pair_table(cipher, ch, z, pairs)
    return float(table[:cipher.block_size].sum()) / cipher.block_size


def make_characteristic(cipher: ToyCipher, key: int, plaintext_diff: int,
                        delta: int, active_sboxes: tuple[int, ...] = (0,)) -> Characteristic:
    """Build a constant-expression characteristic and measure its exact p."""
    probe = Characteristic(plaintext_diff, ConstantDifference(delta), 1.0, active_sboxes)
    p = measure_probability(cipher, key, probe)
    if p == 0:
        raise ValueError("characteristic has zero probability for this key")
    return Characteristic(plaintext_diff, ConstantDifference(delta), p, active_sboxes)


def default_characteristic(cipher: ToyCipher, key: int) -> Characteristic:
    """The stock single-S-box characteristic, with p measured for this key."""
    return make_characteristic(cipher, key, DEFAULT_PLAINTEXT_DIFF,
                               DEFAULT_OUTPUT_DIFF, (0,))


def find_characteristic(cipher: ToyCipher, key: int, subkey_bits: int = 4,
                        index_bits: int = 6) -> Characteristic:
    """Exhaustive build-time search for the strongest planted characteristic.

    Ranks (P', delta) by count separation (true subkey count minus best
    wrong-subkey count) on the canonical n-bit pair set, breaking ties by
    the true count. Only differences reachable per the S-box DDT are tried.
    """
    if subkey_bits not in (4, 8) or subkey_bits > cipher.block_width:
        raise ValueError("subkey_bits must be 4 or 8 and fit the block")
    active = (0,) if subkey_bits == 4 else (0, 1)
    ddt = difference_distribution_table(cipher.sbox)
    reachable = {d for d in range(1, 16) if ddt[:, d].sum() > ddt[0, d]}
    best = None
    for p_diff in range(1, cipher.block_size):
        pairs = gen_pairs(cipher, key, p_diff, index_bits)
        for delta in _candidate_deltas(cipher, active, reachable):
            probe = Characteristic(p_diff, ConstantDifference(delta), 1.0, active)
            counts = np.array([right_pair_table(cipher, probe, x, pairs).sum()
                               for x in range(1 << subkey_bits)])
            z = true_subkey(cipher, key, probe)
            wrong = np.delete(counts, z)
            score = (counts[z] - wrong.max(), counts[z])
            if counts[z] > 0 and (best is None or score > best[0]):
                best = (score, p_diff, delta)
    if best is None:
        raise ValueError("no usable characteristic found")
    _, p_diff, delta = best
    return make_characteristic(cipher, key, p_diff, delta, active)


def _candidate_deltas(cipher, active, reachable):
    if len(active) == 1:
        shift = NIBBLE_BITS * active[0]
        return [d << shift for d in sorted(reachable)]
    return [lo | (hi << NIBBLE_BITS) for lo in sorted(reachable) for hi in sorted(reachable)]


# ---- JSON-style configuration -----------------------------------------


def cipher_from_dict(doc: dict) -> ToyCipher:
    """Cipher from a config document (sbox as 16 hex digits, pbox index list)."""
    kwargs = {}
    if "sbox" in doc:
        s = doc["sbox"]
        if isinstance(s, str):
            if len(s) != 16:
                raise ValueError("sbox string must be 16 hex digits")
            s = [int(c, 16) for c in s]
        kwargs["sbox"] = tuple(s)
    if "pbox" in doc:
        kwargs["pbox"] = tuple(doc["pbox"])
    for name in ("rounds", "key_schedule", "block_width"):
        if name in doc:
            kwargs[name] = doc[name]
    return ToyCipher(**kwargs)


def characteristic_from_dict(doc: dict, cipher: ToyCipher, key: int) -> Characteristic:
    """Characteristic from a config document; p is re-measured unless given."""
    p_diff = _parse_hex(doc.get("plaintext_diff", DEFAULT_PLAINTEXT_DIFF))
    delta = _parse_hex(doc.get("output_diff", DEFAULT_OUTPUT_DIFF))
    active = tuple(doc.get("active_sboxes",
                           [pos for pos in range(cipher.num_sboxes)
                            if (delta >> (NIBBLE_BITS * pos)) & 0xF]))
    if "probability" in doc:
        return Characteristic(p_diff, ConstantDifference(delta),
                              float(doc["probability"]), active)
    return make_characteristic(cipher, key, p_diff, delta, active)


def _parse_hex(value) -> int:
    if isinstance(value, str):
        return int(value, 16)
    return int(value)
