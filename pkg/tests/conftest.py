import pytest

from qdca.toy_cipher import (AttackContext, ToyCipher, default_characteristic,
                             gen_pairs, make_characteristic,
                             DEFAULT_PLANTED_KEY)

# second planted instance with a nonzero true subkey, so tie-break-to-zero
# bugs cannot hide behind the stock instance's z = 0
ALT_KEY = 0x01
ALT_PLAINTEXT_DIFF = 0x1A
ALT_OUTPUT_DIFF = 0x40  # high nibble active


@pytest.fixture(scope="session")
def cipher():
    return ToyCipher()


@pytest.fixture(scope="session")
def planted(cipher):
    """Stock planted instance at n=6: (key, characteristic, pairs, context)."""
    key = DEFAULT_PLANTED_KEY
    ch = default_characteristic(cipher, key)
    pairs = gen_pairs(cipher, key, ch.plaintext_diff, 6)
    return key, ch, pairs, AttackContext(cipher, ch, pairs)


@pytest.fixture(scope="session")
def planted_alt(cipher):
    """Alternate planted instance (true subkey 1, high nibble attacked)."""
    ch = make_characteristic(cipher, ALT_KEY, ALT_PLAINTEXT_DIFF,
                             ALT_OUTPUT_DIFF, active_sboxes=(1,))
    pairs = gen_pairs(cipher, ALT_KEY, ch.plaintext_diff, 6)
    return ALT_KEY, ch, pairs, AttackContext(cipher, ch, pairs)
