#include "fishmonger/cook.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fishmonger/errors.hpp"

namespace fishmonger {

CookPolicy naive(double threshold) {
  if (!std::isfinite(threshold) || threshold < 0.0) {
    throw ConfigError("naive threshold must be a finite value >= 0");
  }
  return NaivePolicy{threshold};
}

CookPolicy scripted(std::vector<bool> decisions) {
  return ScriptedPolicy{std::move(decisions), 0};
}

CookPolicy external(std::function<bool(double, std::size_t)> decide) {
  return ExternalPolicy{std::move(decide)};
}

ScriptedPolicy load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open decision script " + path.string());
  ScriptedPolicy policy;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    if (token == "1") {
      policy.decisions.push_back(true);
    } else if (token == "0") {
      policy.decisions.push_back(false);
    } else {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 0 or 1, got '" + token + "'");
    }
  }
  return policy;
}

bool decide(CookPolicy& policy, double price, std::size_t round) {
  struct Visitor {
    double price;
    std::size_t round;
    bool operator()(const NaivePolicy& p) const { return price <= p.threshold; }
    bool operator()(ScriptedPolicy& p) const {
      if (p.cursor >= p.decisions.size()) {
        throw PolicyError("decision script exhausted after " +
                          std::to_string(p.decisions.size()) + " decisions (round " +
                          std::to_string(round) + ")");
      }
      return p.decisions[p.cursor++];
    }
    bool operator()(ExternalPolicy& p) const {
      if (!p.decide) throw PolicyError("external policy has no decision channel");
      return p.decide(price, round);
    }
  };
  return std::visit(Visitor{price, round}, policy);
}

std::string describe(const CookPolicy& policy) {
  struct Visitor {
    std::string operator()(const NaivePolicy& p) const {
      std::ostringstream os;
      os.precision(17);
      os << "naive(" << p.threshold << ")";
      return os.str();
    }
    std::string operator()(const ScriptedPolicy& p) const {
      return "scripted(" + std::to_string(p.decisions.size()) + " decisions)";
    }
    std::string operator()(const ExternalPolicy&) const { return "external"; }
  };
  return std::visit(Visitor{}, policy);
}

}  // namespace fishmonger
