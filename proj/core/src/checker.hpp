#pragma once

#include "emod/ast.hpp"

namespace emod::detail {

/// Resolves names, annotates types and assigns dense node ids in place.
void check(Program& program);

}  // namespace emod::detail
