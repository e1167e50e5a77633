#pragma once
// Validation reports shared by every checker.

#include <string>
#include <vector>

namespace tdual {

struct Check {
  std::string id;
  bool ok = true;
  std::string detail;
};

struct Report {
  std::string subject;
  std::vector<Check> checks;

  void add(std::string id, bool ok, std::string detail = {}) {
    checks.push_back({std::move(id), ok, std::move(detail)});
  }
  void merge(const Report& other, const std::string& prefix = {}) {
    for (const auto& c : other.checks) checks.push_back({prefix + c.id, c.ok, c.detail});
  }
  bool ok() const {
    for (const auto& c : checks)
      if (!c.ok) return false;
    return true;
  }
  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    for (const auto& c : checks)
      if (!c.ok) v.push_back(c.id + ": " + c.detail);
    return v;
  }
  std::string render() const;
};

}  // namespace tdual
