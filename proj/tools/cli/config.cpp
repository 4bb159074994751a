#include "config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "mdl/errors.hpp"

namespace mdl::cli {

ConfigSyntaxError::ConfigSyntaxError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

ConfigSemanticError::ConfigSemanticError(const std::string& key, const std::string& what)
    : std::runtime_error("config key '" + key + "': " + what), key_(key) {}

namespace {

struct Value {
  enum class Kind { Integer, String, Array } kind = Kind::Integer;
  std::uint64_t integer = 0;
  std::string text;
  std::vector<Value> items;
};

class Lexer {
 public:
  Lexer(const std::string& line, std::size_t lineno) : s_(line), line_(lineno) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigSyntaxError(line_, pos_ + 1, what); }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  std::string key() {
    skip_ws();
    const std::size_t b = pos_;
    if (pos_ >= s_.size() || !(std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      fail("expected a key");
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return s_.substr(b, pos_ - b);
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  Value value(bool nested = false) {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a value");
    const char c = s_[pos_];
    Value v;
    if (c == '"') {
      v.kind = Value::Kind::String;
      ++pos_;
      for (;;) {
        if (pos_ >= s_.size()) fail("unterminated string");
        const char d = s_[pos_++];
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= s_.size()) fail("unterminated escape");
          const char e = s_[pos_++];
          if (e != '"' && e != '\\') {
            --pos_;
            fail("unknown escape");
          }
          v.text += e;
        } else {
          v.text += d;
        }
      }
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t b = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == '/'))
        fail("numbers must be plain integers; quote rationals and decimals");
      const std::string digits = s_.substr(b, pos_ - b);
      if (digits.size() > 20 || (digits.size() == 20 && digits > "18446744073709551615")) {
        pos_ = b;
        fail("integer out of range");
      }
      v.integer = std::stoull(digits);
      return v;
    }
    if (c == '[' && !nested) {
      v.kind = Value::Kind::Array;
      ++pos_;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        v.items.push_back(value(true));
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']'");
      }
      return v;
    }
    fail(nested ? "expected a string or integer" : "expected a string, integer, or array");
  }

 private:
  const std::string& s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string str_of(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::String) throw ConfigSemanticError(key, "expected a string");
  return v.text;
}

std::uint64_t int_of(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::Integer) throw ConfigSemanticError(key, "expected an integer");
  return v.integer;
}

std::vector<std::string> strs_of(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::Array) throw ConfigSemanticError(key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v.items) out.push_back(str_of(key, x));
  return out;
}

std::vector<std::uint64_t> ints_of(const std::string& key, const Value& v) {
  if (v.kind != Value::Kind::Array) throw ConfigSemanticError(key, "expected an array of integers");
  std::vector<std::uint64_t> out;
  for (const auto& x : v.items) out.push_back(int_of(key, x));
  return out;
}

unsigned small(const std::string& key, std::uint64_t v, std::uint64_t hi) {
  if (v > hi) throw ConfigSemanticError(key, "value " + std::to_string(v) + " exceeds " + std::to_string(hi));
  return static_cast<unsigned>(v);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <class T>
std::string list(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, std::string>) out += quote(v[i]);
    else out += std::to_string(v[i]);
  }
  return out + "]";
}

mpq_class parse_rational(const std::string& key, const std::string& text) {
  try {
    const auto r = realnum::CertifiedReal::parse(text);
    if (!r.is_exact()) throw ConfigSemanticError(key, "'" + text + "' is not an exact rational");
    return r.ball().mid;
  } catch (const ConfigSemanticError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigSemanticError(key, e.what());
  }
}

}  // namespace

bool Config::operator==(const Config& o) const {
  return subcommand == o.subcommand && gamma == o.gamma && beta == o.beta && gamma2 == o.gamma2 &&
         gammas == o.gammas && psi == o.psi && psi_q0 == o.psi_q0 && filters == o.filters && Q == o.Q &&
         N == o.N && H == o.H && k == o.k && K == o.K && checkpoints == o.checkpoints && seed == o.seed &&
         mc_samples == o.mc_samples && threads == o.threads && precision_digits == o.precision_digits &&
         indeterminate_cap == o.indeterminate_cap && out == o.out;
}

Config parse_config_text(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    Lexer lx(line, lineno);
    if (lx.at_end_or_comment()) continue;
    const std::string key = lx.key();
    lx.expect('=');
    const Value v = lx.value();
    if (!lx.at_end_or_comment()) lx.fail("trailing characters after value");
    if (!seen.insert(key).second) throw ConfigSemanticError(key, "duplicate key");
    if (key == "subcommand") c.subcommand = str_of(key, v);
    else if (key == "gamma") c.gamma = str_of(key, v);
    else if (key == "beta") c.beta = str_of(key, v);
    else if (key == "gamma2") c.gamma2 = str_of(key, v);
    else if (key == "gammas") c.gammas = strs_of(key, v);
    else if (key == "psi") c.psi = str_of(key, v);
    else if (key == "psi_q0") c.psi_q0 = int_of(key, v);
    else if (key == "filters") c.filters = strs_of(key, v);
    else if (key == "Q") c.Q = int_of(key, v);
    else if (key == "N") c.N = int_of(key, v);
    else if (key == "H") c.H = int_of(key, v);
    else if (key == "k") c.k = small(key, int_of(key, v), 3);
    else if (key == "K") {
      c.K.clear();
      for (auto x : ints_of(key, v)) c.K.push_back(small(key, x, 8));
    } else if (key == "checkpoints") c.checkpoints = ints_of(key, v);
    else if (key == "seed") c.seed = int_of(key, v);
    else if (key == "mc_samples") c.mc_samples = int_of(key, v);
    else if (key == "threads") c.threads = small(key, int_of(key, v), 1024);
    else if (key == "precision_digits") c.precision_digits = small(key, int_of(key, v), 65536);
    else if (key == "indeterminate_cap") c.indeterminate_cap = int_of(key, v);
    else if (key == "out") c.out = str_of(key, v);
    else throw ConfigSemanticError(key, "unknown key");
  }
  c.validate();
  return c;
}

Config parse_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigSemanticError("config", "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string emit_config(const Config& c) {
  std::ostringstream o;
  if (!c.subcommand.empty()) o << "subcommand = " << quote(c.subcommand) << "\n";
  o << "gamma = " << quote(c.gamma) << "\n";
  o << "beta = " << quote(c.beta) << "\n";
  o << "gamma2 = " << quote(c.gamma2) << "\n";
  o << "gammas = " << list(c.gammas) << "\n";
  o << "psi = " << quote(c.psi) << "\n";
  if (c.psi_q0) o << "psi_q0 = " << *c.psi_q0 << "\n";
  o << "filters = " << list(c.filters) << "\n";
  o << "Q = " << c.Q << "\n";
  o << "N = " << c.N << "\n";
  if (c.H) o << "H = " << *c.H << "\n";
  o << "k = " << c.k << "\n";
  o << "K = " << list(c.K) << "\n";
  o << "checkpoints = " << list(c.checkpoints) << "\n";
  o << "seed = " << c.seed << "\n";
  o << "mc_samples = " << c.mc_samples << "\n";
  o << "threads = " << c.threads << "\n";
  o << "precision_digits = " << c.precision_digits << "\n";
  o << "indeterminate_cap = " << c.indeterminate_cap << "\n";
  o << "out = " << quote(c.out) << "\n";
  return o.str();
}

realnum::PrecisionPolicy Config::policy() const {
  realnum::PrecisionPolicy p;
  p.start_digits = precision_digits;
  if (p.start_digits > p.max_digits) p.max_digits = p.start_digits;
  return p;
}

realnum::CertifiedReal Config::real(const std::string& key) const {
  const std::string& text = key == "gamma" ? gamma : key == "beta" ? beta : gamma2;
  try {
    return realnum::CertifiedReal::parse(text, policy());
  } catch (const std::exception& e) {
    throw ConfigSemanticError(key, e.what());
  }
}

std::vector<realnum::CertifiedReal> Config::gamma_list() const {
  std::vector<std::string> names = gammas;
  if (names.empty()) {
    const std::vector<std::string> fill{gamma, "golden", "e"};
    names.assign(fill.begin(), fill.begin() + k);
  }
  if (names.size() != k)
    throw ConfigSemanticError("gammas", "expected " + std::to_string(k) + " entries for k = " + std::to_string(k));
  std::vector<realnum::CertifiedReal> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    try {
      out.push_back(realnum::CertifiedReal::parse(names[i], policy()));
    } catch (const std::exception& e) {
      throw ConfigSemanticError("gammas[" + std::to_string(i) + "]", e.what());
    }
  }
  return out;
}

approxfun::ApproxFunction parse_psi(const std::string& spec, std::optional<std::uint64_t> q0,
                                    const std::vector<std::string>& filters) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigSemanticError("psi", "expected 'family:c' or 'table:q=v,...'");
  const std::string fam = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  std::vector<approxfun::Filter> fs;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    try {
      fs.push_back(approxfun::Filter::parse(filters[i]));
    } catch (const std::exception& e) {
      throw ConfigSemanticError("filters[" + std::to_string(i) + "]", e.what());
    }
  }
  try {
    if (fam == "table") {
      std::map<std::uint64_t, mpq_class> values;
      std::stringstream ss(rest);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigSemanticError("psi", "table entries look like q=value");
        const std::string qs = item.substr(0, eq);
        if (qs.empty() || qs.find_first_not_of("0123456789") != std::string::npos)
          throw ConfigSemanticError("psi", "bad table index '" + qs + "'");
        values[std::stoull(qs)] = parse_rational("psi", item.substr(eq + 1));
      }
      if (q0) throw ConfigSemanticError("psi_q0", "tables take no q0");
      return approxfun::ApproxFunction::table(std::move(values), fs);
    }
    const auto family = approxfun::parse_family(fam);
    return approxfun::ApproxFunction::make(family, parse_rational("psi", rest), q0, fs);
  } catch (const ConfigSemanticError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigSemanticError("psi", e.what());
  }
}

approxfun::ApproxFunction Config::psi_function() const { return parse_psi(psi, psi_q0, filters); }

std::vector<unsigned> Config::K_list() const {
  if (K.empty()) return {2, 3, 4};
  return K;
}

void Config::validate() const {
  static const std::set<std::string> subs{"",           "discrepancy", "master-check", "counting-sum",
                                          "harman-c0",  "f-tail",      "coverage",     "multiplicative",
                                          "highdim",    "szusz-shrink", "self-test"};
  if (!subs.count(subcommand)) throw ConfigSemanticError("subcommand", "unknown subcommand '" + subcommand + "'");
  if (Q == 0) throw ConfigSemanticError("Q", "must be positive");
  if (N == 0) throw ConfigSemanticError("N", "must be positive");
  if (k < 1 || k > 3) throw ConfigSemanticError("k", "must lie in {1, 2, 3}");
  if (threads == 0) throw ConfigSemanticError("threads", "must be positive");
  if (precision_digits < 16) throw ConfigSemanticError("precision_digits", "must be at least 16");
  if (mc_samples == 0) throw ConfigSemanticError("mc_samples", "must be positive");
  for (auto x : K)
    if (x == 0) throw ConfigSemanticError("K", "exponents must be positive");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1]) throw ConfigSemanticError("checkpoints", "must increase");
  (void)real("gamma");
  (void)real("beta");
  (void)real("gamma2");
  (void)gamma_list();
  (void)psi_function();
}

}  // namespace mdl::cli
