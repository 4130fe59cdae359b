#pragma once

#include <string>

#include "emod/frontend.hpp"

namespace emod::testing {

inline std::string fixture(const std::string& name) { return std::string(EMOD_FIXTURES_DIR) + "/" + name; }

inline Program load_fixture(const std::string& name) { return parse_file(fixture(name)); }

}  // namespace emod::testing
