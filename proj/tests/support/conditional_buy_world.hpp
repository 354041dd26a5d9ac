#pragma once

#include <memory>

#include "xchain/ledger/builtins.hpp"
#include "xchain/protocol/node.hpp"
#include "xchain/protocol/world.hpp"

namespace xchain::test_support {

/// Three sidechains: a Control contract on sc1 reads an Oracle on sc2 and buys from a Commodity on sc3.
struct ConditionalBuyWorld {
  struct Options {
    crypto::threshold::SchemeKind scheme = crypto::threshold::SchemeKind::Simulated;
    U256 rate = 42;
    U256 stock = 10;
    bool include_sc3_member = true;
    std::uint32_t multichains = 1;
    std::uint64_t seed = 1;
  };

  std::unique_ptr<protocol::World> world;
  wire::SidechainId sc1 = wire::SidechainId::private_sidechain(1);
  wire::SidechainId sc2 = wire::SidechainId::private_sidechain(2);
  wire::SidechainId sc3 = wire::SidechainId::private_sidechain(3);
  wire::SidechainId cc = wire::SidechainId::private_sidechain(100);
  Address contract_address;
  Address control, oracle, commodity;
  crypto::secp256k1::AccountKey user = crypto::secp256k1::AccountKey::from_seed(7);
  crypto::secp256k1::AccountKey user2 = crypto::secp256k1::AccountKey::from_seed(8);

  ConditionalBuyWorld() : ConditionalBuyWorld(Options{}) {}

  explicit ConditionalBuyWorld(Options opt, const std::function<void(protocol::SidechainSpec&)>& tweak = {}) {
    protocol::WorldConfig cfg;
    cfg.scheme = opt.scheme;
    cfg.sim.seed = opt.seed;
    world = std::make_unique<protocol::World>(cfg);
    contract_address.data.fill(0xCC);
    world->add_coordination_chain("main", {cc, contract_address, 100, 16}, 10);
    int k = 1;
    for (auto id : {sc1, sc2, sc3}) {
      protocol::SidechainSpec s;
      s.name = "sc" + std::to_string(k);
      s.id = id;
      s.keygen.seed = 100 + k++;
      if (tweak) tweak(s);
      world->add_sidechain(std::move(s));
    }
    for (std::uint32_t m = 1; m <= opt.multichains; ++m) {
      std::map<wire::SidechainId, std::uint32_t> members{{sc1, m}, {sc2, m}};
      if (opt.include_sc3_member) members[sc3] = m;
      world->add_multichain("mc" + std::to_string(m), members);
    }
    world->bootstrap_keys();

    using namespace ledger::builtins;
    Address deployer;
    deployer.data.fill(0xDE);
    oracle = world->deploy(sc2, deployer, "Oracle", false, {{oracle::kRate, opt.rate}}, 0);
    commodity = world->deploy(sc3, deployer, "Commodity", true, {{commodity::kStock, opt.stock}}, 0);
    control = world->deploy(sc1, deployer, "Control", true,
                            {{control::kOracleChain, sc2.value},
                             {control::kOracle, ledger::address_to_word(oracle)},
                             {control::kCommodityChain, sc3.value},
                             {control::kCommodity, ledger::address_to_word(commodity)}},
                            0);
    world->start();
  }

  protocol::EntryCall cond_buy(std::uint64_t qty) const {
    return {sc1, control, ledger::encode_call("condBuy(uint256)", {ledger::encode_word(qty)}), 0};
  }

  protocol::SubmitIntent intent(const std::string& name, std::uint64_t qty, std::uint64_t timeout = 20,
                                const std::string& mc = "mc1") const {
    protocol::SubmitIntent in{name, mc, user, cond_buy(qty)};
    in.timeout_blocks = timeout;
    in.coordination = {cc, contract_address};
    return in;
  }

  U256 slot(const wire::SidechainId& chain, const Address& a, unsigned key, std::uint32_t validator = 1) const {
    const auto* info = world->sidechain(chain);
    const auto& l = world->node(info->nodes.at(validator - 1)).ledger();
    const auto* c = l.contract(a);
    auto it = c->storage.find(key);
    return it == c->storage.end() ? U256(0) : it->second;
  }

  /// True when every replica of a chain has the same state digest.
  bool replicas_agree(const wire::SidechainId& chain) const {
    const auto* info = world->sidechain(chain);
    std::optional<Hash256> d;
    for (const auto& id : info->nodes) {
      Hash256 x = world->node(id).ledger().state_digest();
      if (d && !(*d == x)) return false;
      d = x;
    }
    return true;
  }

  bool any_locked() const {
    for (const auto* n : world->all_nodes()) {
      for (const auto& [a, c] : n->ledger().contracts()) {
        if (c.locked()) return true;
      }
    }
    return false;
  }
};

}  // namespace xchain::test_support
