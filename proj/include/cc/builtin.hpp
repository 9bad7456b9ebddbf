#pragma once

#include <string>
#include <vector>

#include "cc/structure.hpp"

namespace cc {

/// Registry of built-in spaces: "heisenberg", "engel", "abelian<N>",
/// "heisenberg_perturbed".
CCStructure builtin_space(const std::string& name);

std::vector<std::string> list_builtin();

bool is_builtin(const std::string& name);

}  // namespace cc
