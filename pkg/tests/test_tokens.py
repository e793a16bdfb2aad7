import struct

import pytest
from hypothesis import given, strategies as st

from chainauth import crypto
from chainauth.errors import EncodingError
from chainauth.tokens import (AccessToken, Claims, SignedToken, Verdict, canonical_decode,
                              canonical_encode, issue_token, verify_token)

K = bytes(range(32))
POP = b"\x11" * 32
NONCE = b"\x22" * 16


def expected_length(issuer: str, audience: str, scopes) -> int:
    # version + two length-prefixed strings + count + scopes + two u64 + binding + nonce
    return (1 + 2 + len(issuer.encode()) + 2 + len(audience.encode()) + 2
            + sum(2 + len(s.encode()) for s in scopes) + 16 + 32 + 16)


def make(scopes=("read",), issued=5, expires=105, issuer="as.examp", audience="thing-01"):
    return issue_token(Claims(issuer, audience, frozenset(scopes), issued, expires, NONCE), POP, K)


def test_one_scope_eight_char_names_is_93_bytes():
    st_ = make()
    assert len(canonical_encode(st_.token)) == expected_length("as.examp", "thing-01", ["read"]) == 93
    assert len(st_.to_bytes()) == 93 + 32


def test_layout_fields_at_expected_offsets():
    raw = canonical_encode(make().token)
    assert raw[0] == 1
    assert struct.unpack(">H", raw[1:3]) == (8,)
    assert raw[3:11] == b"as.examp"
    issued, expires = struct.unpack(">QQ", raw[-64:-48])
    assert (issued, expires) == (5, 105)
    assert raw[-48:-16] == crypto.digest(POP)
    assert raw[-16:] == NONCE


def test_scope_order_is_canonical():
    a = make(scopes=("write", "read", "admin"))
    b = make(scopes=("admin", "write", "read"))
    assert a.to_bytes() == b.to_bytes()


def test_decoder_rejects_noncanonical_forms():
    raw = canonical_encode(make(scopes=("a", "b")).token)
    swapped = raw.replace(b"\x00\x01a\x00\x01b", b"\x00\x01b\x00\x01a")
    with pytest.raises(EncodingError):
        canonical_decode(swapped)
    with pytest.raises(EncodingError):
        canonical_decode(raw + b"\0")
    with pytest.raises(EncodingError):
        canonical_decode(raw[:-1])
    with pytest.raises(EncodingError):
        canonical_decode(b"\x02" + raw[1:])


scope_text = st.text(st.characters(min_codepoint=33, max_codepoint=0x2FF), min_size=1, max_size=8)


@given(st.text(max_size=20), st.text(max_size=20), st.frozensets(scope_text, min_size=1, max_size=5),
       st.integers(0, 2**40), st.integers(1, 2**40))
def test_round_trip(issuer, audience, scopes, issued, span):
    t = AccessToken(issuer, audience, scopes, issued, issued + span, POP, NONCE)
    raw = canonical_encode(t)
    assert canonical_decode(raw) == t
    assert len(raw) == expected_length(issuer, audience, scopes)


def test_invalid_tokens_rejected():
    with pytest.raises(EncodingError):
        AccessToken("i", "a", frozenset(), 0, 1, POP, NONCE)
    with pytest.raises(EncodingError):
        AccessToken("i", "a", {"r"}, 5, 5, POP, NONCE)
    with pytest.raises(EncodingError):
        AccessToken("i", "a", {"r"}, 0, 1, POP[:31], NONCE)


def test_verdicts():
    st_ = make()
    assert verify_token(st_, K, 50, "read", "thing-01") is Verdict.VALID
    assert verify_token(st_, bytes(32), 50, "read", "thing-01") is Verdict.BAD_MAC
    assert verify_token(st_, K, 50, "read", "thing-02") is Verdict.WRONG_AUDIENCE
    assert verify_token(st_, K, 50, "write", "thing-01") is Verdict.SCOPE_DENIED
    assert verify_token(st_, K, 50, None, "thing-01")


def test_expiry_boundary_is_exclusive():
    st_ = make(issued=0, expires=10)
    assert verify_token(st_, K, 9, "read", "thing-01") is Verdict.VALID
    assert verify_token(st_, K, 10, "read", "thing-01") is Verdict.EXPIRED


def test_any_byte_mutation_breaks_the_mac():
    raw = make().to_bytes()
    for i in range(len(raw)):
        mutated = bytearray(raw)
        mutated[i] ^= 0x01
        try:
            st_ = SignedToken.from_bytes(bytes(mutated))
        except EncodingError:
            continue
        assert verify_token(st_, K, 50, "read", "thing-01") is Verdict.BAD_MAC, i


def test_token_binds_the_pop_key():
    assert make().token.pop_binding == crypto.digest(POP)
