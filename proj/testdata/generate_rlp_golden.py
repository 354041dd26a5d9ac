#!/usr/bin/env python3
"""Regenerates rlp_golden.json using the reference `rlp` and `eth-hash` packages.

Each vector is a transaction tree described field by field plus the hex encoding
produced by pyrlp. The C++ tests rebuild the tree from the description and compare bytes.
"""
import json
import random

import rlp
from eth_hash.auto import keccak

PRIVATE = 0xFF << 248
FIELDS = ["type", "coordination_chain", "coordination_contract", "timeout_blocks", "tx_id",
          "originating_sidechain", "target_sidechain", "nonce", "gas_price", "gas_limit", "to",
          "value", "data", "subordinates", "v", "r", "s"]


def int_bytes(v):
    return b"" if v == 0 else v.to_bytes((v.bit_length() + 7) // 8, "big")


def rand_id(rng):
    return rng.choice([rng.randrange(0, 0x10000), PRIVATE + rng.randrange(0, 1 << 64), PRIVATE - 1 + (1 << 248)])


def make_tree(rng, tx_type, depth, orig, coord, contract, tx_id):
    node = {
        "type": tx_type,
        "coordination_chain": coord,
        "coordination_contract": contract,
        "timeout_blocks": rng.randrange(1, 1 << 20) if tx_type == 0 else None,
        "tx_id": tx_id,
        "originating_sidechain": orig,
        "target_sidechain": rand_id(rng) if tx_type != 0 else None,
        "nonce": rng.choice([0, rng.randrange(1, 300)]),
        "gas_price": rng.choice([0, 1, rng.randrange(1, 1 << 40)]),
        "gas_limit": rng.randrange(0, 1 << 32),
        "to": rng.randbytes(20).hex(),
        "value": rng.choice([0, rng.randrange(1, 128), rng.randrange(1, 1 << 200)]),
        "data": rng.randbytes(rng.choice([0, 1, 4, 40, 70])).hex(),
        "v": rng.choice([0, 27, 28]),
        "r": rng.randrange(0, 1 << 256),
        "s": rng.randrange(0, 1 << 255),
        "subordinates": [],
    }
    if node["v"] == 0:
        node["r"] = node["s"] = 0
    if depth > 0:
        for _ in range(rng.randrange(0, 4)):
            child = 2 if tx_type == 2 else rng.choice([1, 2])
            node["subordinates"].append(make_tree(rng, child, depth - 1, orig, coord, contract, tx_id))
    return node


def to_list(node):
    def opt(v):
        return b"" if v is None else int_bytes(v)
    return [
        int_bytes(node["type"]), int_bytes(node["coordination_chain"]), bytes.fromhex(node["coordination_contract"]),
        opt(node["timeout_blocks"]), int_bytes(node["tx_id"]), int_bytes(node["originating_sidechain"]),
        opt(node["target_sidechain"]), int_bytes(node["nonce"]), int_bytes(node["gas_price"]),
        int_bytes(node["gas_limit"]), bytes.fromhex(node["to"]), int_bytes(node["value"]),
        bytes.fromhex(node["data"]), [to_list(s) for s in node["subordinates"]],
        int_bytes(node["v"]), int_bytes(node["r"]), int_bytes(node["s"]),
    ]


def stringify(node):
    out = dict(node)
    for k in ("coordination_chain", "tx_id", "originating_sidechain", "target_sidechain", "nonce", "gas_price",
              "gas_limit", "value", "v", "r", "s", "timeout_blocks"):
        if out[k] is not None:
            out[k] = hex(out[k])
    out["subordinates"] = [stringify(s) for s in node["subordinates"]]
    return out


def main():
    rng = random.Random(20190410)
    vectors = []
    for i in range(20):
        depth = i % 5
        tree = make_tree(rng, 0, depth, rand_id(rng), rand_id(rng), rng.randbytes(20).hex(), rng.randrange(0, 1 << 256))
        encoded = rlp.encode(to_list(tree))
        vectors.append({"name": f"vector-{i:02d}", "tree": stringify(tree), "hex": encoded.hex(),
                        "tx_hash": keccak(encoded).hex()})
    with open("rlp_golden.json", "w") as fh:
        json.dump(vectors, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main()
