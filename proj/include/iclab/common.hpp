#pragma once

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace iclab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ErrorKind {
  dimension,
  parameter,
  numeric,
  domain,
  spec,
  manifold,
  linalg,
  instability,
  io,
  schema,
  version,
  mode_mismatch,
  unsupported,
  argument,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

std::uint64_t splitmix64(std::uint64_t x);

// Splittable generator. stream(i) is a pure function of (seed, i), so sequence i
// gets the same draws no matter which thread or batch slot produces it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  Rng stream(std::uint64_t index) const {
    return Rng(splitmix64(seed_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
  }

  double normal() { return normal_(eng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  std::uint64_t bits() { return eng_(); }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  boost::random::normal_distribution<double> normal_;  // ziggurat
};

bool all_finite(const Eigen::Ref<const MatrixXd>& m);

}  // namespace iclab
