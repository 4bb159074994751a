#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "mdl/estimate.hpp"

namespace mdl::cli {

struct Table {
  std::string name;  // empty for the primary table
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::string subcommand;
  std::string header;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::string> failures;  // asserted invariants that did not hold
  std::uint64_t indeterminate = 0;

  Table& table(const std::string& name);
  void note(const std::string& key, const std::string& value) { summary.emplace_back(key, value); }
};

// Exact rational as "p/q" (or "p" for integers).
std::string fraction(const mpq_class& x);
// Nearest long double with its conversion error, "value:err".
std::string approx(const mpq_class& x);
std::string decision(Decision d);
inline std::string boolean(bool b) { return b ? "true" : "false"; }

std::string to_csv(const Table& t);
std::string to_json(const Report& r);

// File name for table t of report r: "<sub>.csv" or "<sub>_<name>.csv".
std::string csv_name(const Report& r, const Table& t);

// Writes path via a temporary file in the same directory and a rename.
void write_atomic(const std::string& path, const std::string& content);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace mdl::cli
