#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

// Protocol step names (fault triggers and trace markers).
namespace xchain::protocol::steps {

enum class Role { Origin, SubTx, SubView };

const char* role_prefix(Role r);

/// Steps of one role in the order a successful run passes them, without the role prefix.
const std::vector<std::string>& role_steps(Role r);

/// "origin/received", "subtx/mined", ...
std::string qualified(Role r, std::string_view step);

/// Every qualified step name.
std::set<std::string> all();

}  // namespace xchain::protocol::steps
