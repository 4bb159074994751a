#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mdl::cli {

Table& Report::table(const std::string& name) {
  for (auto& t : tables)
    if (t.name == name) return t;
  tables.push_back(Table{name, {}, {}});
  return tables.back();
}

std::string fraction(const mpq_class& x) { return x.get_str(); }

std::string approx(const mpq_class& x) {
  const long double v = static_cast<long double>(x.get_d());
  // get_d truncates toward zero with a 53-bit result.
  const long double err = std::abs(v) * std::ldexp(1.0L, -52) + std::ldexp(1.0L, -1074);
  return format_estimate({v, sgn(x) == 0 ? 0.0L : err});
}

std::string decision(Decision d) { return to_string(d); }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["subcommand"] = r.subcommand;
  j["header"] = r.header;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.summary) summary[k] = v;
  j["summary"] = summary;
  j["failures"] = r.failures;
  j["indeterminate"] = r.indeterminate;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) {
    nlohmann::ordered_json jt;
    jt["name"] = t.name.empty() ? r.subcommand : t.name;
    jt["columns"] = t.columns;
    jt["rows"] = t.rows;
    tables.push_back(jt);
  }
  j["tables"] = tables;
  return j.dump(2) + "\n";
}

std::string csv_name(const Report& r, const Table& t) {
  return t.name.empty() ? r.subcommand + ".csv" : r.subcommand + "_" + t.name + ".csv";
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace mdl::cli
