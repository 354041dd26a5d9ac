#include "xchain/protocol/steps.hpp"

namespace xchain::protocol::steps {

const char* role_prefix(Role r) {
  switch (r) {
    case Role::Origin: return "origin";
    case Role::SubTx: return "subtx";
    case Role::SubView: return "subview";
  }
  return "?";
}

const std::vector<std::string>& role_steps(Role r) {
  static const std::vector<std::string> kOrigin{
      "received",         "checks-passed",  "start-signed",      "start-submitted",   "start-accepted",
      "views-dispatched", "views-collected", "executed",         "mined",             "subtxs-dispatched",
      "ready-collected",  "pre-commit-submit", "commit-submitted", "post-commit-accepted", "check-broadcast"};
  static const std::vector<std::string> kSubTx{"received", "checks-passed", "views-collected", "executed",
                                               "mined",    "ready-signed",  "children-dispatched", "ready-sent"};
  static const std::vector<std::string> kSubView{"received", "checks-passed", "executed", "result-signed",
                                                 "result-sent"};
  switch (r) {
    case Role::Origin: return kOrigin;
    case Role::SubTx: return kSubTx;
    case Role::SubView: return kSubView;
  }
  return kOrigin;
}

std::string qualified(Role r, std::string_view step) { return std::string(role_prefix(r)) + "/" + std::string(step); }

std::set<std::string> all() {
  std::set<std::string> out;
  for (Role r : {Role::Origin, Role::SubTx, Role::SubView}) {
    for (const auto& s : role_steps(r)) out.insert(qualified(r, s));
  }
  return out;
}

}  // namespace xchain::protocol::steps
