#pragma once

#include <random>

#include "xchain/wire/transaction.hpp"

namespace xchain::test_support {

inline U256 random_u256(std::mt19937_64& rng, unsigned max_bytes = 32) {
  std::uniform_int_distribution<unsigned> len_dist(0, max_bytes);
  unsigned len = len_dist(rng);
  U256 v = 0;
  for (unsigned i = 0; i < len; ++i) v = (v << 8) | (rng() & 0xff);
  return v;
}

inline wire::SidechainId random_sidechain(std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0:
      return {rng() % 0x10000};
    case 1:
      return wire::SidechainId::private_sidechain(rng());
    default:
      return {(U256(1) << 256) - 1 - (rng() % 1000)};
  }
}

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t max_len) {
  Bytes b(rng() % (max_len + 1));
  for (auto& x : b) x = static_cast<Byte>(rng());
  return b;
}

inline Address random_address(std::mt19937_64& rng) {
  Address a;
  for (auto& x : a.data) x = static_cast<Byte>(rng());
  return a;
}

/// Random valid tree up to the given depth and fan-out.
inline wire::CrosschainTransaction random_tree(std::mt19937_64& rng, wire::TxType type, int depth, int fanout,
                                               const wire::CrosschainTransaction* root = nullptr) {
  wire::CrosschainTransaction tx;
  tx.type = type;
  if (root) {
    tx.coordination_chain = root->coordination_chain;
    tx.coordination_contract = root->coordination_contract;
    tx.tx_id = root->tx_id;
    tx.originating_sidechain = root->originating_sidechain;
    tx.target_sidechain = random_sidechain(rng);
  } else {
    tx.coordination_chain = random_sidechain(rng);
    tx.coordination_contract = random_address(rng);
    tx.tx_id = random_u256(rng);
    tx.originating_sidechain = random_sidechain(rng);
    tx.timeout_blocks = rng() % 100000;
  }
  tx.nonce = random_u256(rng, 3);
  tx.gas_price = random_u256(rng, 8);
  tx.gas_limit = random_u256(rng, 4);
  tx.to = random_address(rng);
  tx.value = random_u256(rng);
  tx.data = random_bytes(rng, 80);
  if (rng() % 2) {
    tx.sig_v = 27 + rng() % 2;
    tx.sig_r = random_u256(rng);
    tx.sig_s = random_u256(rng);
  }
  if (depth > 0) {
    int n = static_cast<int>(rng() % (fanout + 1));
    for (int i = 0; i < n; ++i) {
      wire::TxType child = (type == wire::TxType::SubordinateView || rng() % 2) ? wire::TxType::SubordinateView
                                                                                : wire::TxType::SubordinateTx;
      tx.subordinates.push_back(random_tree(rng, child, depth - 1, fanout, root ? root : &tx));
    }
  }
  return tx;
}

}  // namespace xchain::test_support
