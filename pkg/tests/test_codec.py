import math
import random
import struct

import pytest
from hypothesis import given, settings, strategies as st

from cdmpm import (Alphabet, CorruptContainerError, DesyncError, Mode, Params, compress, decompress,
                   parse_header)
from cdmpm.codec import encode
from cdmpm.corpus import iid, markov

SLACK = 33

ABABAB_HEADER = b"CDMP\x01\x01\x02\x01" + struct.pack(">Q", 6) + b"\x00\x01" + b"ab"


def test_header_bytes():
    c = compress(b"ababab", Params(2, 1))
    assert c.startswith(ABABAB_HEADER)
    assert parse_header(ABABAB_HEADER) == (Params(2, 1, Mode.CDMPM), 6, Alphabet(b"ab"))


def test_header_mpm_flag():
    data = bytearray(ABABAB_HEADER)
    data[5] = 0
    assert parse_header(bytes(data))[0].mode is Mode.MPM


@pytest.mark.parametrize("offset, value", [(0, ord("X")), (4, 2), (5, 0x03), (6, 1), (7, 64)])
def test_header_rejects_bad_fields(offset, value):
    data = bytearray(ABABAB_HEADER)
    data[offset] = value
    with pytest.raises(CorruptContainerError):
        parse_header(bytes(data))


def test_bad_magic():
    with pytest.raises(CorruptContainerError):
        decompress(b"XXXX" + ABABAB_HEADER[4:])


def test_truncated_header():
    for cut in (0, 5, 17, 18):
        with pytest.raises(CorruptContainerError):
            parse_header(ABABAB_HEADER[:cut])


def test_duplicate_alphabet_symbol():
    with pytest.raises(CorruptContainerError):
        parse_header(ABABAB_HEADER[:-1] + b"a")


def test_empty_input():
    c = compress(b"", Params(2, 1))
    params, n, alphabet = parse_header(c)
    assert n == 0 and alphabet.symbols == b"\x00"
    assert len(c) == 18 + 1  # fixed fields plus the one default symbol, no payload
    assert decompress(c) == b""


def test_single_byte():
    res = encode(b"a", Params(2, 5))
    assert res.rep.top == 0 and res.coded_tokens == 1
    assert decompress(res.container) == b"a"


def test_ababab_payload():
    res = encode(b"ababab", Params(2, 1))
    assert res.ideal_bits == pytest.approx(4 + math.log2(3), abs=1e-9)
    assert res.coded_tokens == 5
    assert res.payload_bits <= res.ideal_bits + SLACK
    assert len(res.payload) <= 5
    assert decompress(res.container) == b"ababab"


def test_decoder_tokens_match_encoder_trace():
    seen = []
    decompress(compress(b"ababab", Params(2, 1)), observer=seen.append)
    assert [(e.level, e.token) for e in seen] == [(0, 0), (0, 1), (0, 0), (0, 1), (1, 1)]


def test_random_bytes_roundtrip():
    x = random.Random(6).randbytes(4096)
    assert decompress(compress(x, Params(2, 8))) == x


def test_deterministic():
    x = markov(3000)
    p = Params(3, 5, Mode.MPM)
    assert compress(x, p) == compress(x, p)


def dual_run(x, params):
    enc_events, dec_events = [], []
    res = encode(x, params, observer=enc_events.append)
    back = decompress(res.container, observer=dec_events.append)
    return res, back, enc_events, dec_events


@settings(max_examples=150, deadline=None)
@given(st.binary(max_size=300) | st.text("abc", max_size=300).map(str.encode),
       st.integers(2, 4), st.integers(0, 10), st.sampled_from(list(Mode)))
def test_model_synchrony(x, r, levels, mode):
    res, back, enc_events, dec_events = dual_run(x, Params(r, levels, mode))
    assert back == x
    assert enc_events == dec_events
    assert len(enc_events) == res.coded_tokens


@settings(max_examples=150, deadline=None)
@given(st.binary(max_size=400), st.integers(2, 4), st.integers(1, 10), st.sampled_from(list(Mode)))
def test_payload_accounting(x, r, levels, mode):
    res, _, events, _ = dual_run(x, Params(r, levels, mode))
    ideal = sum(math.log2(e.total / e.count) for e in events)
    assert res.ideal_bits == pytest.approx(ideal, abs=1e-6)
    assert res.payload_bits <= ideal + SLACK
    assert len(res.payload) == (res.payload_bits + 7) // 8


@pytest.mark.parametrize("r, levels", [(2, 1), (2, 4), (3, 10), (4, 2)])
@pytest.mark.parametrize("mode", list(Mode))
@pytest.mark.parametrize("source", ["iid2", "iid256", "markov", "periodic", "constant"])
def test_roundtrip_varied(source, r, levels, mode):
    rnd = random.Random(f"{source}/{r}/{levels}")
    for n in (0, 1, r ** levels - 1, r ** levels, r ** levels + 1, 97, 1009):
        x = {
            "iid2": lambda: bytes(rnd.choice(b"ab") for _ in range(n)),
            "iid256": lambda: bytes(rnd.randrange(256) for _ in range(n)),
            "markov": lambda: markov(n, seed=n + 1),
            "periodic": lambda: (b"abc" * n)[:n],
            "constant": lambda: b"z" * n,
        }[source]()
        assert decompress(compress(x, Params(r, levels, mode))) == x


def test_hundred_thousand_symbols():
    x = iid(100_000, 16, seed=5)
    assert decompress(compress(x, Params(2, 24))) == x


def test_truncated_payload_is_desync():
    x = iid(2000, 256, seed=3)
    c = compress(x, Params(2, 6))
    with pytest.raises(DesyncError):
        decompress(c[:len(c) // 2])


def test_bit_flips_never_escape_as_other_errors():
    x = iid(500, 16, seed=4)
    c = compress(x, Params(2, 4))
    rnd = random.Random(0)
    for _ in range(50):
        bad = bytearray(c)
        bad[rnd.randrange(30, len(bad))] ^= 1 << rnd.randrange(8)
        try:
            out = decompress(bytes(bad))
        except CorruptContainerError:
            continue
        # no checksum: a flipped bit may decode to other bytes of the right length
        assert len(out) == len(x)
