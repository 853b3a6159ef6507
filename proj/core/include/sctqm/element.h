#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sctqm {

struct ElementInfo {
  std::string_view symbol;
  int z;
  double covalent_radius;  // Å
};

// Looks up a species by symbol. Capitalization is normalized ("CL" -> "Cl").
// The table covers H..Xe; {H, C, N, O, S, Cl} are the core organic set.
std::optional<ElementInfo> find_element(std::string_view symbol);
std::optional<ElementInfo> find_element(int z);

// Canonical capitalization of a symbol, e.g. "cl" -> "Cl".
std::string normalize_symbol(std::string_view symbol);

bool is_core_organic(int z);

}  // namespace sctqm
