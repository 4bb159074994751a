#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdl/approxfun.hpp"
#include "mdl/realnum.hpp"

namespace mdl::cli {

// Syntax error with a 1-based position.
class ConfigSyntaxError : public std::runtime_error {
 public:
  ConfigSyntaxError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

// Semantic error naming the offending key.
class ConfigSemanticError : public std::runtime_error {
 public:
  ConfigSemanticError(const std::string& key, const std::string& what);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct Config {
  std::string subcommand;             // optional; the command line wins
  std::string gamma = "sqrt2";
  std::string beta = "sqrt2";
  std::string gamma2 = "0";
  std::vector<std::string> gammas;    // highdim; defaults from gamma, golden, e
  std::string psi = "c_over_q:1/2";   // family:c, or table:q=v,q=v
  std::optional<std::uint64_t> psi_q0;
  std::vector<std::string> filters;
  std::uint64_t Q = 1024;
  std::uint64_t N = 2000;
  std::optional<std::uint64_t> H;     // default 50 for discrepancy, 4 elsewhere
  unsigned k = 1;
  std::vector<unsigned> K;            // f-tail exponents; default 2, 3, 4
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t seed = 1;
  std::uint64_t mc_samples = 1000000;
  unsigned threads = 1;
  unsigned precision_digits = 64;
  std::uint64_t indeterminate_cap = 0;
  std::string out = "mdl_out";

  bool operator==(const Config& o) const;

  // Materialized views; throw ConfigSemanticError with the key path.
  realnum::PrecisionPolicy policy() const;
  realnum::CertifiedReal real(const std::string& key) const;
  std::vector<realnum::CertifiedReal> gamma_list() const;
  approxfun::ApproxFunction psi_function() const;
  unsigned H_or(unsigned fallback) const { return H ? static_cast<unsigned>(*H) : fallback; }
  std::vector<unsigned> K_list() const;
  void validate() const;
};

Config parse_config_text(const std::string& text);
Config parse_config(const std::string& path);
std::string emit_config(const Config& c);

// "family:c" or "table:1=1/4,2=1/8".
approxfun::ApproxFunction parse_psi(const std::string& spec, std::optional<std::uint64_t> q0,
                                    const std::vector<std::string>& filters);

}  // namespace mdl::cli
