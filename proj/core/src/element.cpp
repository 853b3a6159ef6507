#include "sctqm/element.h"

#include <algorithm>
#include <array>
#include <cctype>

namespace sctqm {
namespace {

// Covalent radii (Å), Cordero et al. 2008 single-bond values.
constexpr std::array<ElementInfo, 54> kElements{{
    {"H", 1, 0.31},   {"He", 2, 0.28},  {"Li", 3, 1.28},  {"Be", 4, 0.96},
    {"B", 5, 0.84},   {"C", 6, 0.76},   {"N", 7, 0.71},   {"O", 8, 0.66},
    {"F", 9, 0.57},   {"Ne", 10, 0.58}, {"Na", 11, 1.66}, {"Mg", 12, 1.41},
    {"Al", 13, 1.21}, {"Si", 14, 1.11}, {"P", 15, 1.07},  {"S", 16, 1.05},
    {"Cl", 17, 1.02}, {"Ar", 18, 1.06}, {"K", 19, 2.03},  {"Ca", 20, 1.76},
    {"Sc", 21, 1.70}, {"Ti", 22, 1.60}, {"V", 23, 1.53},  {"Cr", 24, 1.39},
    {"Mn", 25, 1.39}, {"Fe", 26, 1.32}, {"Co", 27, 1.26}, {"Ni", 28, 1.24},
    {"Cu", 29, 1.32}, {"Zn", 30, 1.22}, {"Ga", 31, 1.22}, {"Ge", 32, 1.20},
    {"As", 33, 1.19}, {"Se", 34, 1.20}, {"Br", 35, 1.20}, {"Kr", 36, 1.16},
    {"Rb", 37, 2.20}, {"Sr", 38, 1.95}, {"Y", 39, 1.90},  {"Zr", 40, 1.75},
    {"Nb", 41, 1.64}, {"Mo", 42, 1.54}, {"Tc", 43, 1.47}, {"Ru", 44, 1.46},
    {"Rh", 45, 1.42}, {"Pd", 46, 1.39}, {"Ag", 47, 1.45}, {"Cd", 48, 1.44},
    {"In", 49, 1.42}, {"Sn", 50, 1.39}, {"Sb", 51, 1.39}, {"Te", 52, 1.38},
    {"I", 53, 1.39},  {"Xe", 54, 1.40},
}};

}  // namespace

std::string normalize_symbol(std::string_view symbol) {
  std::string out(symbol);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto c = static_cast<unsigned char>(out[i]);
    out[i] = static_cast<char>(i == 0 ? std::toupper(c) : std::tolower(c));
  }
  return out;
}

std::optional<ElementInfo> find_element(std::string_view symbol) {
  const std::string norm = normalize_symbol(symbol);
  const auto it = std::find_if(kElements.begin(), kElements.end(),
                               [&](const ElementInfo& e) { return e.symbol == norm; });
  if (it == kElements.end()) return std::nullopt;
  return *it;
}

std::optional<ElementInfo> find_element(int z) {
  if (z < 1 || z > static_cast<int>(kElements.size())) return std::nullopt;
  return kElements[static_cast<std::size_t>(z - 1)];
}

bool is_core_organic(int z) {
  return z == 1 || z == 6 || z == 7 || z == 8 || z == 16 || z == 17;
}

}  // namespace sctqm
