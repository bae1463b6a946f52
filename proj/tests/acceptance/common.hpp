#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace acceptance {

/// Collects sub-checks for one criterion and prints the per-criterion
/// PASS/FAIL line the suite is specified to emit.
class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_.push_back(what);
    }
    std::printf("  %s %s\n", ok ? "[ok]  " : "[FAIL]", what.c_str());
  }

  void note(const std::string& what) { std::printf("  [....] %s\n", what.c_str()); }

  bool finish() const {
    std::printf("[%s] criterion %d: %s\n", pass_ ? "PASS" : "FAIL", id_, title_.c_str());
    return pass_;
  }

 private:
  int id_;
  std::string title_;
  bool pass_ = true;
  std::vector<std::string> failures_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

bool run_criterion_1();
bool run_criterion_2();
bool run_criterion_3();
bool run_criterion_4();
bool run_criterion_5();
bool run_criterion_6();
bool run_criterion_7();
bool run_criterion_8();

}  // namespace acceptance
