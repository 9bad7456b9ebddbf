#include "cc/builtin.hpp"

#include <sstream>

namespace cc {

namespace {

std::string heisenberg_json() {
    return R"({
        "dimension": 3,
        "filtration": [2, 3],
        "chart_radius": 4.0,
        "fields": [
            ["1", "0", "-0.5*x2"],
            ["0", "1", "0.5*x1"],
            ["0", "0", "1"]
        ]
    })";
}

std::string engel_json() {
    return R"({
        "dimension": 4,
        "filtration": [2, 3, 4],
        "chart_radius": 4.0,
        "fields": [
            ["1", "0", "0", "0"],
            ["0", "1", "x1", "0.5*x1^2"],
            ["0", "0", "1", "x1"],
            ["0", "0", "0", "1"]
        ]
    })";
}

// Heisenberg frame plus cubic perturbations; the perturbations vanish to
// third order at 0, so the nilpotentization at the origin is unchanged but
// the space is no longer a group.
std::string heisenberg_perturbed_json() {
    return R"({
        "dimension": 3,
        "filtration": [2, 3],
        "chart_radius": 4.0,
        "fields": [
            ["1", "0.1*x1^2*x2", "-0.5*x2 + 0.1*x2^3"],
            ["0", "1", "0.5*x1 + 0.1*x1^3"],
            ["0", "0", "1"]
        ]
    })";
}

std::string abelian_json(int n) {
    std::ostringstream os;
    os << "{\"dimension\": " << n << ", \"filtration\": [" << n << "], "
       << "\"chart_radius\": 4.0, \"fields\": [";
    for (int i = 0; i < n; ++i) {
        os << (i ? ", [" : "[");
        for (int j = 0; j < n; ++j) os << (j ? ", " : "") << (i == j ? "\"1\"" : "\"0\"");
        os << "]";
    }
    os << "]}";
    return os.str();
}

}  // namespace

CCStructure builtin_space(const std::string& name) {
    if (name == "heisenberg") return load_structure(heisenberg_json());
    if (name == "engel") return load_structure(engel_json());
    if (name == "heisenberg_perturbed")
        return load_structure(heisenberg_perturbed_json());
    if (name.rfind("abelian", 0) == 0) {
        int n = 0;
        try {
            n = std::stoi(name.substr(7));
        } catch (...) {
            n = 0;
        }
        if (n >= 1 && n <= 16) return load_structure(abelian_json(n));
    }
    std::string msg = "unknown space '" + name + "'; available:";
    for (const auto& s : list_builtin()) msg += " " + s;
    throw Error(msg);
}

std::vector<std::string> list_builtin() {
    return {"heisenberg", "engel", "abelian<N>", "heisenberg_perturbed"};
}

bool is_builtin(const std::string& name) {
    try {
        builtin_space(name);
        return true;
    } catch (...) {
        return false;
    }
}

}  // namespace cc
