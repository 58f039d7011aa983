#include "stride_cli/run_config.hpp"

#include <charconv>
#include <sstream>

namespace stride::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw UsageError(key + ": expected " + want + ", got '" + value + "'");
}

GuidanceMode parse_guidance(const std::string& v) {
  if (v == "temporal") return GuidanceMode::temporal;
  if (v == "fixed") return GuidanceMode::fixed;
  if (v == "optimal") return GuidanceMode::optimal_closed_form;
  if (v == "oracle") return GuidanceMode::optimal_oracle;
  bad_value("guidance", v, "temporal, fixed, optimal or oracle");
}

ConsistencyMode parse_consistency(const std::string& v) {
  if (v == "transported") return ConsistencyMode::transported;
  if (v == "row_replace") return ConsistencyMode::row_replace;
  bad_value("consistency", v, "transported or row_replace");
}

std::array<bool, 4> parse_bands(const std::string& v) {
  std::array<bool, 4> out{false, false, false, false};
  std::istringstream is(v);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (tok == "LL") out[LL] = true;
    else if (tok == "LH") out[LH] = true;
    else if (tok == "HL") out[HL] = true;
    else if (tok == "HH") out[HH] = true;
    else if (tok == "none" || tok.empty()) continue;
    else bad_value("bands", v, "a comma list of LL, LH, HL, HH");
  }
  return out;
}

}  // namespace

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!allowed_.count(key)) throw UsageError("unknown key '" + key + "'");
  kv_[key] = value;
}

void RunConfig::set_pair(const std::string& pair) {
  const auto eq = pair.find('=');
  if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + pair + "'");
  set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

std::string RunConfig::str(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::string RunConfig::required(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end() || it->second.empty()) throw UsageError("missing required --" + key);
  return it->second;
}

double RunConfig::num(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    bad_value(key, it->second, "a number");
  }
  if (used != it->second.size()) bad_value(key, it->second, "a number");
  return v;
}

long long RunConfig::integer(const std::string& key, long long fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_value(key, s, "an integer");
  return v;
}

std::size_t RunConfig::count(const std::string& key, std::size_t fallback) const {
  const long long v = integer(key, static_cast<long long>(fallback));
  if (v < 0) bad_value(key, str(key), "a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::seed(const std::string& key, std::uint64_t fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_value(key, s, "an unsigned integer");
  return v;
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const auto& v = it->second;
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  bad_value(key, v, "true or false");
}

const std::set<std::string>& schedule_keys() {
  static const std::set<std::string> keys{"T", "beta_start", "beta_end", "ve_sigma_min", "ve_sigma_max",
                                          "wavelet"};
  return keys;
}

const std::set<std::string>& pipeline_keys() {
  static const std::set<std::string> keys{
      "guidance",   "nu",           "lambda",         "oracle_step", "ddim_steps",    "eta",
      "cfg_omega",  "align",        "align_every_step", "correct",   "corrector_steps", "eps_min",
      "lambda_L",   "lambda_H",     "bands",          "consistency", "final_denoise", "corrector_seed",
      "filter",     "cutoff",       "padding",        "preweight",   "bp_weight",     "seed"};
  return keys;
}

PipelineConfig pipeline_config(const RunConfig& rc, PipelineConfig c) {
  c.T = static_cast<int>(rc.integer("T", c.T));
  c.beta_start = rc.num("beta_start", c.beta_start);
  c.beta_end = rc.num("beta_end", c.beta_end);
  c.ve_sigma_min = rc.num("ve_sigma_min", c.ve_sigma_min);
  c.ve_sigma_max = rc.num("ve_sigma_max", c.ve_sigma_max);
  if (rc.has("wavelet")) {
    try {
      c.wavelet = parse_wavelet(rc.str("wavelet"));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  c.guidance.T = c.T;
  if (rc.has("guidance")) c.guidance.mode = parse_guidance(rc.str("guidance"));
  c.guidance.nu = rc.num("nu", c.guidance.nu);
  c.guidance.fixed_lambda = rc.num("lambda", c.guidance.fixed_lambda);
  c.guidance.oracle_step = rc.num("oracle_step", c.guidance.oracle_step);
  c.ddim_steps = static_cast<int>(rc.integer("ddim_steps", c.ddim_steps));
  c.ddim_eta = rc.num("eta", c.ddim_eta);
  c.cfg_omega = rc.num("cfg_omega", c.cfg_omega);
  c.align = rc.flag("align", c.align);
  c.align_every_step = rc.flag("align_every_step", c.align_every_step);
  c.correct = rc.flag("correct", c.correct);
  c.corrector.n_steps = static_cast<int>(rc.integer("corrector_steps", c.corrector.n_steps));
  c.corrector.eps_min = rc.num("eps_min", c.corrector.eps_min);
  c.corrector.lambda_L = rc.num("lambda_L", c.corrector.lambda_L);
  c.corrector.lambda_H = rc.num("lambda_H", c.corrector.lambda_H);
  if (rc.has("bands")) c.corrector.update_band = parse_bands(rc.str("bands"));
  if (rc.has("consistency")) c.corrector.consistency = parse_consistency(rc.str("consistency"));
  c.corrector.final_denoise = rc.flag("final_denoise", c.corrector.final_denoise);
  c.corrector.seed = rc.seed("corrector_seed", c.corrector.seed);
  if (rc.has("filter")) {
    const auto v = rc.str("filter");
    if (v == "ram_lak") c.filter.kind = FilterKind::ram_lak;
    else if (v == "hann") c.filter.kind = FilterKind::hann;
    else bad_value("filter", v, "ram_lak or hann");
  }
  c.filter.cutoff = rc.num("cutoff", c.filter.cutoff);
  if (rc.has("padding")) {
    const auto v = rc.str("padding");
    if (v == "zero_pad") c.filter.padding = FilterPadding::zero_pad;
    else if (v == "periodic") c.filter.padding = FilterPadding::periodic;
    else bad_value("padding", v, "zero_pad or periodic");
  }
  c.fbp.fan_preweight = rc.flag("preweight", c.fbp.fan_preweight);
  if (rc.has("bp_weight")) {
    const auto v = rc.str("bp_weight");
    if (v == "distance") c.fbp.weight = BackprojectionWeight::distance;
    else if (v == "detector") c.fbp.weight = BackprojectionWeight::detector;
    else bad_value("bp_weight", v, "distance or detector");
  }
  c.seed = rc.seed("seed", c.seed);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

}  // namespace stride::cli
