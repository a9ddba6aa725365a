#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ergo/core/system.hpp"

namespace ergo {

// "identity", "doubling", "cat", "modular-geodesic". Throws DomainError otherwise.
std::unique_ptr<SystemModel> make_system(const std::string& id);
std::vector<std::string> system_ids();

}  // namespace ergo
