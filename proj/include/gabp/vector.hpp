#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace gabp {

// Value vector. Construction rejects NaN/Inf, so a non-finite value seen
// downstream always means a solver failure, never bad input.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n) : v_(n, 0.0) {}
  Vector(std::initializer_list<double> xs) : v_(xs) { validate(); }
  explicit Vector(std::vector<double> xs) : v_(std::move(xs)) { validate(); }

  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }
  bool operator==(const Vector&) const = default;

 private:
  void validate() const;
  std::vector<double> v_;
};

}  // namespace gabp
