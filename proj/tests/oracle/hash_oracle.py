#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Independent re-derivation of the hash vectors checked by the C++ tests.

Prints one "name hex" line per vector. Only hashlib and struct are used;
every encoding is spelled out by hand here rather than shared with C++.
"""

import hashlib
import struct
import sys


def sha(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def field(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def u64_field(v: int) -> bytes:
    return field(struct.pack(">Q", v))


def hashvm(width, height, fps_milli, position_ms, payload: bytes) -> bytes:
    pre = "%d|%d|%d|%d|%s" % (width, height, fps_milli, position_ms, sha(payload).hex())
    return sha(pre.encode("ascii"))


def chunk_frame(width, height, fps_milli, position_ms, payload: bytes) -> bytes:
    return (b"SVC1" + struct.pack(">IIIQQ", width, height, fps_milli, position_ms, len(payload)) + payload)


def vectors():
    abc = b"abc"
    ramp = bytes(range(256))
    out = []
    out.append(("address_abc", sha(abc)))
    out.append(("chunk_hash_abc", sha(abc)))
    out.append(("hashvm_abc", hashvm(1920, 1080, 30000, 0, abc)))
    out.append(("hashvm_ramp", hashvm(1280, 720, 29970, 10000, ramp)))
    out.append(("address_frame_abc", sha(chunk_frame(1920, 1080, 30000, 0, abc))))
    out.append(("address_frame_ramp", sha(chunk_frame(1280, 720, 29970, 10000, ramp))))

    device = b"\x11" * 32
    gateway = b"\x22" * 32
    header = field(device) + field(b"\x00" * 32) + u64_field(1700000000000) + field(gateway)
    header_hash = sha(header)
    out.append(("header_hash", header_hash))

    payload = field(sha(abc)) + field(hashvm(1920, 1080, 30000, 0, abc)) + u64_field(1700000000123)
    tx_hash = sha(field(header_hash) + u64_field(0) + field(payload))
    out.append(("tx_hash_0", tx_hash))
    return out


def main():
    for name, digest in vectors():
        sys.stdout.write("%s %s\n" % (name, digest.hex()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
