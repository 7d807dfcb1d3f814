#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tgm {

/// One rule violation. `element` names the offending element: a type or
/// edge label at schema level, a node/edge id at instance level, a value
/// path ("$.day") inside a property check.
struct Violation {
  std::string rule;
  std::string element;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
  friend auto operator<=>(const Violation&, const Violation&) = default;
};

/// Outcome of a validation pass. ok() iff no violations were recorded;
/// warnings never change the outcome.
class Verdict {
 public:
  void add(std::string rule, std::string element, std::string message) {
    violations_.push_back(
        {std::move(rule), std::move(element), std::move(message)});
  }
  void warn(std::string rule, std::string element, std::string message) {
    warnings_.push_back(
        {std::move(rule), std::move(element), std::move(message)});
  }
  void merge(const Verdict& other) {
    violations_.insert(violations_.end(), other.violations_.begin(),
                       other.violations_.end());
    warnings_.insert(warnings_.end(), other.warnings_.begin(),
                     other.warnings_.end());
  }

  bool ok() const { return violations_.empty(); }
  const std::vector<Violation>& violations() const { return violations_; }
  const std::vector<Violation>& warnings() const { return warnings_; }

  bool has(const std::string& rule) const {
    return std::any_of(violations_.begin(), violations_.end(),
                       [&](const Violation& v) { return v.rule == rule; });
  }
  bool has_warning(const std::string& rule) const {
    return std::any_of(warnings_.begin(), warnings_.end(),
                       [&](const Violation& v) { return v.rule == rule; });
  }

  /// Sorts both lists by (rule, element, message) and drops exact
  /// duplicates. Every public entry point finalizes before returning, so
  /// verdicts compare and serialize deterministically.
  void finalize() {
    auto tidy = [](std::vector<Violation>& vs) {
      std::sort(vs.begin(), vs.end());
      vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    };
    tidy(violations_);
    tidy(warnings_);
  }

 private:
  std::vector<Violation> violations_;
  std::vector<Violation> warnings_;
};

/// Hard failure: broken preconditions or unusable input (unknown labels,
/// parse errors, conflicting redefinitions). Rule findings that a caller
/// is expected to inspect go into a Verdict instead.
class TgmError : public std::runtime_error {
 public:
  TgmError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace tgm
