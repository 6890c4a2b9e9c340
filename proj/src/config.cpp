#include "deltasa/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace deltasa {
namespace {

std::vector<double> parse_number_list(const std::string& body, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot read number '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

struct Term {
  double coef = 1.0;
  double n_pow = 0.0;
  double ln_pow = 0.0;
  int inverse_gaps = 0;
  bool uses_a = false;
};

// Recursive descent over the stripped text; "D" stands for (1/d_n+1/d_{n+1}).
class AlphaParser {
 public:
  explicit AlphaParser(std::string text) : s_(std::move(text)) {}

  std::vector<Term> parse() {
    std::vector<Term> terms;
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') sign = get() == '-' ? -1.0 : 1.0;
    for (;;) {
      Term t = term();
      t.coef *= sign;
      terms.push_back(t);
      if (at_end()) break;
      const char c = get();
      if (c != '+' && c != '-') fail("expected '+' or '-'");
      sign = c == '-' ? -1.0 : 1.0;
    }
    return terms;
  }

 private:
  Term term() {
    Term t;
    factor(t, false);
    while (peek() == '*' || peek() == '/') factor(t, get() == '/');
    return t;
  }

  void factor(Term& t, bool divide) {
    const double s = divide ? -1.0 : 1.0;
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const double v = number();
      if (divide && v == 0.0) fail("division by zero");
      t.coef = divide ? t.coef / v : t.coef * v;
    } else if (match("ln")) {
      t.ln_pow += s * exponent();
    } else if (match("n")) {
      t.n_pow += s * exponent();
    } else if (match("D")) {
      if (divide) fail("(1/d_n+1/d_{n+1}) cannot be a divisor");
      ++t.inverse_gaps;
    } else if (match("a")) {
      if (divide || t.uses_a) fail("a may appear once, as a multiplier");
      t.uses_a = true;
    } else {
      fail("unexpected input");
    }
  }

  double exponent() {
    if (peek() != '^') return 1.0;
    ++pos_;
    double sign = 1.0;
    if (peek() == '-' || peek() == '+') sign = get() == '-' ? -1.0 : 1.0;
    return sign * number();
  }

  double number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  bool match(const char* word) {
    const std::string w(word);
    if (s_.compare(pos_, w.size(), w) != 0) return false;
    const std::size_t next = pos_ + w.size();
    if (next < s_.size() && std::isalpha(static_cast<unsigned char>(s_[next]))) return false;
    pos_ = next;
    return true;
  }

  [[nodiscard]] bool at_end() const { return pos_ >= s_.size(); }
  [[nodiscard]] char peek() const { return at_end() ? '\0' : s_[pos_]; }
  char get() { return at_end() ? '\0' : s_[pos_++]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw UsageError("alpha: " + what + " at offset " + std::to_string(pos_) + " of '" + s_ + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
};

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw UsageError("config: unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_key(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("config: bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

std::string format_list(const std::vector<double>& v) {
  std::string out = "list:";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out += (i ? "," : "") + std::string(buf);
  }
  return out;
}

}  // namespace

GridSequence GridSpec::build() const {
  if (family == "power_log") return GridSequence::power_log(gamma, eta, d1);
  if (family == "constant") return GridSequence::constant(d);
  if (family == "explicit") return GridSequence::explicit_gaps(gaps, tail);
  throw UsageError("grid: unknown family '" + family + "'");
}

GridSpec parse_grid(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("grid: expected family:parameters, got '" + text + "'");
  const std::string family = text.substr(0, colon);
  const auto values = parse_number_list(text.substr(colon + 1), "grid");
  GridSpec spec;
  if (family == "powerlog" || family == "power_log") {
    if (values.size() < 2 || values.size() > 3) throw UsageError("grid: powerlog takes gamma,eta[,d1]");
    spec.family = "power_log";
    spec.gamma = values[0];
    spec.eta = values[1];
    if (values.size() == 3) spec.d1 = values[2];
  } else if (family == "constant") {
    if (values.size() != 1) throw UsageError("grid: constant takes one value");
    spec.family = "constant";
    spec.d = values[0];
  } else if (family == "list" || family == "explicit") {
    spec.family = "explicit";
    spec.gaps = values;
  } else {
    throw UsageError("grid: unknown family '" + family + "'");
  }
  return spec;
}

AlphaSequence parse_alpha(const std::string& text, std::optional<double> a) {
  std::string s = strip_spaces(text);
  if (s.empty()) throw UsageError("alpha: empty expression");
  if (s == "zero" || s == "0") return AlphaSequence::zero();
  if (s.rfind("list:", 0) == 0) return AlphaSequence::explicit_values(parse_number_list(s.substr(5), "alpha"));
  for (const char* form : {"(1/d_n+1/d_{n+1})", "(1/d_{n}+1/d_{n+1})"}) {
    for (auto p = s.find(form); p != std::string::npos; p = s.find(form)) s.replace(p, std::string(form).size(), "D");
  }
  double scale = 0.0;
  bool has_scale = false;
  std::vector<PowerTerm> terms;
  for (const auto& t : AlphaParser(s).parse()) {
    double coef = t.coef;
    if (t.uses_a) {
      if (!a) throw UsageError("alpha: the expression uses a but no value of a was given");
      coef *= *a;
    }
    if (t.inverse_gaps > 1) throw UsageError("alpha: (1/d_n+1/d_{n+1}) may appear once per term");
    if (t.inverse_gaps == 1) {
      if (t.n_pow != 0.0 || t.ln_pow != 0.0)
        throw UsageError("alpha: (1/d_n+1/d_{n+1}) may only be scaled by constants");
      scale += coef;
      has_scale = true;
    } else if (coef != 0.0) {
      terms.push_back({coef, t.n_pow, t.ln_pow});
    }
  }
  if (has_scale) return AlphaSequence::scaled_inverse_gaps(scale, std::move(terms));
  if (terms.empty()) return AlphaSequence::zero();
  return AlphaSequence::power_terms(std::move(terms));
}

long parse_horizon(const std::string& text) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError("horizon: cannot read '" + text + "'");
  }
  if (!std::isfinite(v) || v < 1.0 || v > 1e12 || std::abs(v - std::round(v)) > 1e-9 * v)
    throw UsageError("horizon: '" + text + "' is not a positive integer");
  return std::lround(v);
}

std::vector<long> default_horizons() {
  const char* env = std::getenv("DELTA_SPEC_HORIZON");
  if (env == nullptr || *env == '\0') return {10000, 100000, 1000000};
  const long n = parse_horizon(env);
  std::vector<long> out;
  for (long h : {n / 100, n / 10, n})
    if (h >= 10 && (out.empty() || h > out.back())) out.push_back(h);
  return out;
}

void AnalysisConfig::validate() const {
  const auto& h = deficiency.horizons;
  if (h.empty()) throw UsageError("config: horizons must not be empty");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] < 1) throw UsageError("config: horizons must be positive");
    if (i > 0 && h[i] <= h[i - 1]) throw UsageError("config: horizons must be strictly increasing");
  }
  if (h.back() < 64) throw UsageError("config: the largest horizon must be at least 64");
  const auto& c = deficiency;
  for (double t : {c.floquet_margin, c.ratio_limit_tol, c.lemma_product_tol, c.criteria.drift, c.l2.margin})
    if (!(t > 0.0)) throw UsageError("config: tolerances must be positive");
  if (c.oracle_horizon < 0) throw UsageError("config: oracle horizon must be nonnegative");
  if (grid.family == "explicit" && grid.gaps.empty()) throw UsageError("config: explicit grid needs gaps");
}

json AnalysisConfig::echo() const {
  json g = {{"family", grid.family}};
  if (grid.family == "power_log") {
    g["gamma"] = number(grid.gamma);
    g["eta"] = number(grid.eta);
    g["d1"] = number(grid.d1);
  } else if (grid.family == "constant") {
    g["d"] = number(grid.d);
  } else {
    g["gaps"] = grid.gaps;
    g["tail"] = grid.tail == TailRule::Periodic ? "periodic" : "hold_last";
  }
  json lambdas = json::array();
  for (const auto& l : deficiency.oracle_lambdas) lambdas.push_back({number(l.real()), number(l.imag())});
  json out = {{"grid", g}, {"alpha", alpha}};
  out["a"] = a ? number(*a) : json(nullptr);
  out["horizons"] = deficiency.horizons;
  out["oracle"] = {{"horizon", deficiency.oracle_horizon},
                   {"always_run", deficiency.always_run_oracle},
                   {"lambdas", lambdas}};
  out["tolerances"] = {{"drift", number(deficiency.criteria.drift)},
                       {"burn_in", deficiency.criteria.burn_in},
                       {"floquet_margin", number(deficiency.floquet_margin)},
                       {"ratio_limit_tol", number(deficiency.ratio_limit_tol)},
                       {"lemma_product_tol", number(deficiency.lemma_product_tol)},
                       {"l2_margin", number(deficiency.l2.margin)},
                       {"l2_fit_blocks", deficiency.l2.fit_blocks},
                       {"l2_min_blocks", deficiency.l2.min_blocks}};
  return out;
}

void apply_json(AnalysisConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw UsageError("config: top level must be an object");
  reject_unknown(doc, {"grid", "alpha", "a", "horizons", "tolerances", "oracle", "output"}, "the top level");
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    if (g.is_string()) {
      cfg.grid = parse_grid(g.get<std::string>());
    } else if (g.is_object()) {
      reject_unknown(g, {"family", "gamma", "eta", "d1", "d", "gaps", "tail"}, "'grid'");
      GridSpec spec;
      spec.family = g.contains("family") ? get_key<std::string>(g, "family", "'grid'") : "power_log";
      if (g.contains("gamma")) spec.gamma = get_key<double>(g, "gamma", "'grid'");
      if (g.contains("eta")) spec.eta = get_key<double>(g, "eta", "'grid'");
      if (g.contains("d1")) spec.d1 = get_key<double>(g, "d1", "'grid'");
      if (g.contains("d")) spec.d = get_key<double>(g, "d", "'grid'");
      if (g.contains("gaps")) spec.gaps = get_key<std::vector<double>>(g, "gaps", "'grid'");
      if (g.contains("tail")) {
        const auto tail = get_key<std::string>(g, "tail", "'grid'");
        if (tail == "periodic") spec.tail = TailRule::Periodic;
        else if (tail == "hold_last") spec.tail = TailRule::HoldLast;
        else throw UsageError("config: 'tail' must be periodic or hold_last");
      }
      if (spec.family != "power_log" && spec.family != "constant" && spec.family != "explicit")
        throw UsageError("config: unknown grid family '" + spec.family + "'");
      cfg.grid = spec;
    } else {
      throw UsageError("config: 'grid' must be a string or an object");
    }
  }
  if (doc.contains("alpha")) {
    const auto& al = doc["alpha"];
    if (al.is_string()) cfg.alpha = al.get<std::string>();
    else if (al.is_array()) cfg.alpha = format_list(get_key<std::vector<double>>(doc, "alpha", "the top level"));
    else throw UsageError("config: 'alpha' must be a string or a list of numbers");
  }
  if (doc.contains("a")) cfg.a = get_key<double>(doc, "a", "the top level");
  if (doc.contains("horizons")) {
    const auto& h = doc["horizons"];
    if (!h.is_array()) throw UsageError("config: 'horizons' must be a list");
    std::vector<long> out;
    for (const auto& x : h) {
      if (x.is_string()) out.push_back(parse_horizon(x.get<std::string>()));
      else if (x.is_number()) out.push_back(parse_horizon(x.dump()));
      else throw UsageError("config: horizons must be numbers");
    }
    cfg.deficiency.horizons = out;
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    const std::string where = "'tolerances'";
    reject_unknown(t, {"drift", "burn_in", "floquet_margin", "ratio_limit_tol", "lemma_product_tol", "l2_margin",
                       "l2_fit_blocks", "l2_min_blocks"},
                   where);
    auto& d = cfg.deficiency;
    if (t.contains("drift")) d.criteria.drift = get_key<double>(t, "drift", where);
    if (t.contains("burn_in")) d.criteria.burn_in = get_key<long>(t, "burn_in", where);
    if (t.contains("floquet_margin")) d.floquet_margin = get_key<double>(t, "floquet_margin", where);
    if (t.contains("ratio_limit_tol")) d.ratio_limit_tol = get_key<double>(t, "ratio_limit_tol", where);
    if (t.contains("lemma_product_tol")) d.lemma_product_tol = get_key<double>(t, "lemma_product_tol", where);
    if (t.contains("l2_margin")) d.l2.margin = get_key<double>(t, "l2_margin", where);
    if (t.contains("l2_fit_blocks")) d.l2.fit_blocks = get_key<int>(t, "l2_fit_blocks", where);
    if (t.contains("l2_min_blocks")) d.l2.min_blocks = get_key<int>(t, "l2_min_blocks", where);
  }
  if (doc.contains("oracle")) {
    const auto& o = doc["oracle"];
    const std::string where = "'oracle'";
    reject_unknown(o, {"horizon", "always_run", "lambdas"}, where);
    if (o.contains("horizon")) cfg.deficiency.oracle_horizon = get_key<long>(o, "horizon", where);
    if (o.contains("always_run")) cfg.deficiency.always_run_oracle = get_key<bool>(o, "always_run", where);
    if (o.contains("lambdas")) {
      const auto pairs = get_key<std::vector<std::vector<double>>>(o, "lambdas", where);
      cfg.deficiency.oracle_lambdas.clear();
      for (const auto& p : pairs) {
        if (p.size() != 2) throw UsageError("config: each lambda is [re, im]");
        cfg.deficiency.oracle_lambdas.emplace_back(p[0], p[1]);
      }
    }
  }
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    const std::string where = "'output'";
    reject_unknown(o, {"report", "csv_dir", "timings"}, where);
    if (o.contains("report")) cfg.report_path = get_key<std::string>(o, "report", where);
    if (o.contains("csv_dir")) cfg.csv_dir = get_key<std::string>(o, "csv_dir", where);
    if (o.contains("timings")) cfg.with_timings = get_key<bool>(o, "timings", where);
  }
}

void load_config_file(AnalysisConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
  apply_json(cfg, doc);
}

}  // namespace deltasa
