#include "ergo/models/registry.hpp"

#include "ergo/core/errors.hpp"
#include "ergo/models/flat.hpp"
#include "ergo/models/modular.hpp"

namespace ergo {

std::unique_ptr<SystemModel> make_system(const std::string& id) {
  if (id == "identity") return identity_system();
  if (id == "doubling") return doubling_system();
  if (id == "cat") return cat_system();
  if (id == "modular-geodesic") return modular_system();
  throw DomainError("unknown system id '" + id + "'");
}

std::vector<std::string> system_ids() { return {"identity", "doubling", "cat", "modular-geodesic"}; }

}  // namespace ergo
