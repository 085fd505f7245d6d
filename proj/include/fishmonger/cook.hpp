#pragma once

// Buyer-side decision policies.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace fishmonger {

// Accept iff price <= threshold (ties accept).
struct NaivePolicy {
  double threshold = 0.0;
};

// A fixed decision list, consumed one entry per round.
struct ScriptedPolicy {
  std::vector<bool> decisions;
  std::size_t cursor = 0;
};

// Defers to a caller-supplied channel (live play, remote programs).
struct ExternalPolicy {
  std::function<bool(double price, std::size_t round)> decide;
};

using CookPolicy = std::variant<NaivePolicy, ScriptedPolicy, ExternalPolicy>;

CookPolicy naive(double threshold);
CookPolicy scripted(std::vector<bool> decisions);
CookPolicy external(std::function<bool(double, std::size_t)> decide);

// One decision per line, "0" or "1". Blank lines and '#' comments skipped.
ScriptedPolicy load_script(const std::filesystem::path& path);

// Throws PolicyError when a script is exhausted or an external channel is
// unset.
bool decide(CookPolicy& policy, double price, std::size_t round);

std::string describe(const CookPolicy& policy);

}  // namespace fishmonger
