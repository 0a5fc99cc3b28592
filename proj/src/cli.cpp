#include "fedpriv/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fedpriv/adaptive.hpp"
#include "fedpriv/errors.hpp"
#include "fedpriv/harness.hpp"
#include "fedpriv/parallel.hpp"
#include "fedpriv/protocols.hpp"
#include "fedpriv/rates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fedpriv {

namespace {

const std::vector<std::string> kRequired = {"m",       "n",     "sigma", "s",
                                            "epsilon", "delta", "alpha"};

const std::set<std::string> kKnown = {
    "m",          "n",          "sigma",          "s",           "epsilon",
    "delta",      "alpha",      "R",              "p",           "q",
    "kappa_tilde", "command",   "seed",           "protocol",    "L",
    "eps_grid",   "s_grid",     "rho",            "rho_grid",    "signal",
    "signal_level", "prior_scale", "reps",        "calib_reps",  "reps_per_probe",
    "tol_rel",    "target_power", "initial_rho",  "s_min",       "s_max",
    "shared",     "local",      "outcomes",       "log_factor"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "inf" || v == "+inf") return kInf;
  double out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("field '" + key + "': expected a number, got '" + raw +
                      "'");
  }
  return out;
}

long long parse_integer(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("field '" + key + "': expected an integer, got '" + raw +
                      "'");
  }
  return out;
}

std::string json_scalar(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) {
    return std::to_string(v.get<unsigned long long>());
  }
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  throw ConfigError("field '" + key + "': unsupported JSON value");
}

std::map<std::string, std::string> parse_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("JSON config must be an object");
  const json* body = &doc;
  if (doc.contains("config")) {
    // Replay sidecar: {"run_id": ..., "command": ..., "config": {...}}.
    for (const auto& [k, v] : doc.items()) {
      if (k != "config" && k != "run_id" && k != "command") {
        throw ConfigError("unknown sidecar field '" + k + "'");
      }
    }
    body = &doc["config"];
    if (!body->is_object()) throw ConfigError("'config' must be an object");
  }
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : body->items()) {
    if (v.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) joined += ",";
        joined += json_scalar(k, v[i]);
      }
      out[k] = joined;
    } else {
      out[k] = json_scalar(k, v);
    }
  }
  if (body != &doc && doc.contains("command") && !out.count("command")) {
    out["command"] = json_scalar("command", doc["command"]);
  }
  return out;
}

std::map<std::string, std::string> parse_ini(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    if (out.count(key)) throw ConfigError("duplicate field '" + key + "'");
    out[key] = value;
  }
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  const std::string t = trim(text);
  cfg.values_ = (!t.empty() && t[0] == '{') ? parse_json(t) : parse_ini(t);
  cfg.finalize();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void RunConfig::finalize() {
  for (const auto& [k, v] : values_) {
    if (!kKnown.count(k)) throw ConfigError("unknown field '" + k + "'");
  }
  for (const auto& k : kRequired) {
    if (!has(k)) throw ConfigError("missing required field '" + k + "'");
  }
  ModelConfig m;
  const long long mm = integer("m");
  const long long nn = integer("n");
  if (mm < 1 || nn < 1 || mm > 1000000 || nn > 1000000) {
    throw ConfigError("invalid m or n: must be in 1..1000000");
  }
  m.m = static_cast<int>(mm);
  m.n = static_cast<int>(nn);
  m.sigma = number("sigma");
  m.s = number("s");
  m.epsilon = number("epsilon");
  m.delta = number("delta");
  m.alpha = number("alpha");
  m.R = number_or("R", 1.0);
  m.p = number_or("p", 2.0);
  m.q = number_or("q", 2.0);
  m.kappa_tilde = number_or("kappa_tilde", 1.0);
  m.validate();
  model_ = m;
}

std::string RunConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("missing required field '" + key + "'");
  }
  return it->second;
}

std::string RunConfig::text_or(const std::string& key,
                               const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double RunConfig::number(const std::string& key) const {
  return parse_double(key, text(key));
}

double RunConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long long RunConfig::integer(const std::string& key) const {
  return parse_integer(key, text(key));
}

long long RunConfig::integer_or(const std::string& key,
                                long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool RunConfig::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = trim(text(key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("field '" + key + "': expected true or false");
}

std::vector<double> RunConfig::list(const std::string& key) const {
  const std::string v = trim(text(key));
  for (const char* kind : {"log:", "lin:"}) {
    if (v.rfind(kind, 0) != 0) continue;
    std::vector<std::string> parts;
    std::stringstream ss(v.substr(4));
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) {
      throw ConfigError("field '" + key + "': expected " + kind +
                        "lo:hi:count");
    }
    const double lo = parse_double(key, parts[0]);
    const double hi = parse_double(key, parts[1]);
    const long long count = parse_integer(key, parts[2]);
    if (count < 1 || count > 100000 || !(hi >= lo)) {
      throw ConfigError("field '" + key + "': bad grid bounds");
    }
    if (kind[1] == 'o') {
      if (!(lo > 0)) throw ConfigError("field '" + key + "': log grid needs lo > 0");
      return log_grid(lo, hi, static_cast<int>(count));
    }
    std::vector<double> out(count);
    for (long long i = 0; i < count; ++i) {
      out[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    }
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_double(key, part));
  if (out.empty()) throw ConfigError("field '" + key + "': empty list");
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  finalize();
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "rates", "regimes", "calibrate", "risk", "boundary", "compare", "adaptive"};
  return names;
}

namespace {

std::string join_levels(const std::vector<int>& levels) {
  std::string out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) out += ";";
    out += std::to_string(levels[i]);
  }
  return out.empty() ? "none" : out;
}

std::string num(double v) { return format_number(v); }
std::string num(long long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

struct Context {
  const RunConfig& cfg;
  const ModelConfig& model;
  std::string command;
  std::uint64_t seed;
  int workers;
  fs::path out_dir;
  std::map<std::string, std::string> effective;
  std::string id;
  std::vector<std::string> written;

  std::vector<std::string> preamble(bool rate_note) const {
    std::vector<std::string> lines;
    lines.push_back("fedpriv " + command + " run_id=" + id);
    std::string conf = "config";
    for (const auto& [k, v] : effective) conf += " " + k + "=" + v;
    lines.push_back(conf);
    if (rate_note) {
      lines.push_back(
          "rates evaluated with every asymptotic constant set to 1; "
          "logarithmic factors excluded");
    }
    return lines;
  }

  void write(const std::string& name, const Table& table, bool rate_note) {
    const fs::path path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
    write_csv(out, table, preamble(rate_note));
    if (!out) throw RuntimeError("failed writing '" + path.string() + "'");
    written.push_back(path.string());
  }

  void write_sidecar() {
    json cfg_json = json::object();
    for (const auto& [k, v] : effective) cfg_json[k] = v;
    json doc = {{"run_id", id}, {"command", command}, {"config", cfg_json}};
    const fs::path path = out_dir / (command + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    written.push_back(path.string());
  }
};

bool default_shared(const Context& ctx, Protocol p) {
  (void)ctx;
  return p == Protocol::III || p == Protocol::adaptive_shared;
}

Protocol selected_protocol(const Context& ctx) {
  if (ctx.command == "adaptive") {
    if (ctx.cfg.has("protocol")) {
      const Protocol p = parse_protocol(ctx.cfg.text("protocol"));
      if (!is_adaptive(p)) {
        throw ConfigError("the adaptive command needs an adaptive protocol");
      }
      return p;
    }
    return ctx.cfg.flag_or("shared", false) ? Protocol::adaptive_shared
                                            : Protocol::adaptive_local;
  }
  return parse_protocol(ctx.cfg.text("protocol"));
}

ProtocolPlan build_plan(const Context& ctx, Protocol p) {
  if (is_adaptive(p)) {
    const double s_min = ctx.cfg.number("s_min");
    const double s_max = ctx.cfg.number("s_max");
    const ResolutionGrid grid = resolution_grid(
        ctx.model, s_min, s_max, p == Protocol::adaptive_shared);
    return make_adaptive_plan(ctx.model, grid);
  }
  const int L = static_cast<int>(ctx.cfg.integer_or(
      "L", optimal_resolution(ctx.model, default_shared(ctx, p))));
  return make_plan(p, ctx.model, L);
}

std::string plan_levels(const ProtocolPlan& plan) {
  std::vector<int> levels;
  if (plan.classical_level) levels.push_back(plan.classical_level);
  for (const auto& x : plan.low) levels.push_back(x.L);
  for (const auto& x : plan.coordinate) levels.push_back(x.L);
  for (const auto& x : plan.rotated) levels.push_back(x.L);
  std::sort(levels.begin(), levels.end());
  return join_levels(levels);
}

int default_signal_level(const Context& ctx, const ProtocolPlan& plan) {
  if (!is_adaptive(plan.protocol)) return plan.max_level;
  const int L = optimal_resolution(ctx.model,
                                   plan.protocol == Protocol::adaptive_shared);
  return std::min(L, plan.max_level);
}

Signal build_signal(const Context& ctx, const ProtocolPlan& plan) {
  const std::string kind = ctx.cfg.text_or("signal", "spike");
  if (kind.rfind("file:", 0) == 0) {
    std::ifstream in(kind.substr(5));
    if (!in) throw ConfigError("cannot read signal file '" + kind.substr(5) + "'");
    return read_signal(in);
  }
  const int L = static_cast<int>(
      ctx.cfg.integer_or("signal_level", default_signal_level(ctx, plan)));
  if (L < 1 || L > plan.max_level) {
    throw ConfigError("signal_level must lie in 1.." +
                      std::to_string(plan.max_level));
  }
  const double rho = ctx.cfg.number("rho");
  if (!(rho >= 0)) throw ConfigError("rho must be nonnegative");
  if (kind == "prior") {
    return gen_signal_prior(L, rho, ctx.cfg.number_or("prior_scale", 1.0),
                            derive_seed(ctx.seed, {tag(Stream::prior)}));
  }
  return gen_signal_single_level(L, rho, parse_spread(kind));
}

int reps_key(const Context& ctx, const std::string& key, long long fallback,
             long long minimum) {
  const long long r = ctx.cfg.integer_or(key, fallback);
  if (r < minimum || r > 100000000) {
    throw ConfigError("field '" + key + "' must be at least " +
                      std::to_string(minimum));
  }
  return static_cast<int>(r);
}

double calibrate(const Context& ctx, const ProtocolPlan& plan) {
  return calibrate_threshold(plan, ctx.model.alpha,
                             reps_key(ctx, "calib_reps", 2000, 1000),
                             derive_seed(ctx.seed, {tag(Stream::calibration)}),
                             ctx.workers);
}

std::vector<bool> modes(const Context& ctx) {
  std::vector<bool> out;
  if (ctx.cfg.flag_or("local", false)) out.push_back(false);
  if (ctx.cfg.flag_or("shared", true)) out.push_back(true);
  if (out.empty()) throw ConfigError("both 'shared' and 'local' are false");
  return out;
}

std::vector<double> eps_values(const Context& ctx) {
  return ctx.cfg.has("eps_grid") ? ctx.cfg.list("eps_grid")
                                 : std::vector<double>{ctx.model.epsilon};
}

void cmd_rates(Context& ctx) {
  const bool with_log = ctx.cfg.flag_or("log_factor", false);
  Table t;
  t.columns = {"epsilon", "rho2", "regime_id", "case_regime", "shared"};
  if (with_log) t.columns.push_back("log_multiplier2");
  const auto eps = eps_values(ctx);
  for (bool shared : modes(ctx)) {
    for (const auto& row : rate_curve(ctx.model, eps, shared)) {
      std::vector<std::string> cells = {num(row.epsilon), num(row.rho2),
                                        num(row.regime_id),
                                        num(row.case_regime),
                                        shared ? "true" : "false"};
      if (with_log) cells.push_back(num(log_multiplier_squared(ctx.model)));
      t.add_row(std::move(cells));
    }
  }
  ctx.write("rates.csv", t, true);
}

void cmd_regimes(Context& ctx) {
  Table t;
  t.columns = {"s",        "epsilon",  "regime_id", "case_regime",
               "dominant_term", "rho2", "branch_value", "A",
               "B_shared", "B_local",  "C",         "D",
               "shared"};
  const auto eps = eps_values(ctx);
  const auto s_values = ctx.cfg.has("s_grid") ? ctx.cfg.list("s_grid")
                                              : std::vector<double>{ctx.model.s};
  for (bool shared : modes(ctx)) {
    for (double s : s_values) {
      ModelConfig base = ctx.model;
      base.s = s;
      for (double e : eps) {
        base.epsilon = e;
        base.validate();
        const RegimeReport rep = classify_regime(base, shared);
        const RateTerms r = rate_terms(base);
        t.add_row({num(s), num(e), num(rep.regime_id), num(rep.case_regime),
                   rep.dominant_term, num(rep.rho_squared),
                   num(rep.branch_value), num(r.A), num(r.B_shared),
                   num(r.B_local), num(r.C), num(r.D),
                   shared ? "true" : "false"});
      }
    }
  }
  ctx.write("regimes.csv", t, true);
}

void cmd_calibrate(Context& ctx) {
  const ProtocolPlan plan = build_plan(ctx, selected_protocol(ctx));
  const double kappa = calibrate(ctx, plan);
  Table t;
  t.columns = {"protocol", "L", "alpha", "reps", "critical_value",
               "grid_size", "low_count", "high_count"};
  t.add_row({to_string(plan.protocol), plan_levels(plan),
             num(ctx.model.alpha),
             num(static_cast<long long>(reps_key(ctx, "calib_reps", 2000, 1000))),
             num(kappa), num(plan.grid_size), num(plan.low_count),
             num(plan.high_count)});
  ctx.write("calibrate.csv", t, false);
}

void write_mechanisms(Context& ctx, const ProtocolPlan& plan) {
  const Evaluation ev = simulate(
      plan, Signal{}, derive_seed(ctx.seed, {tag(Stream::audit)}), true);
  Table t;
  t.columns = {"index", "sensitivity", "gamma", "noise_std", "components",
               "delta", "group"};
  for (std::size_t i = 0; i < ev.records.size(); ++i) {
    const auto& r = ev.records[i];
    t.add_row({num(static_cast<long long>(i)), num(r.sensitivity),
               num(r.gamma), num(r.noise_std), num(r.components),
               num(r.delta), num(r.group)});
  }
  ctx.write(ctx.command + "_mechanisms.csv", t, false);
}

void write_outcomes(Context& ctx, const ProtocolPlan& plan, double kappa,
                    const Signal& f, int reps, double rho) {
  std::vector<TestOutcome> outcomes(reps);
  parallel_for(reps, ctx.workers, [&](std::size_t r) {
    const Evaluation ev = simulate(
        plan, f, derive_seed(ctx.seed, {tag(Stream::alt_reps), r}));
    outcomes[r] = decide(plan, ev, kappa);
  });
  Table t;
  t.columns = {"protocol", "L",         "rho",            "epsilon",
               "delta",    "statistic", "critical_value", "reject",
               "rejecting_level"};
  const std::string levels = plan_levels(plan);
  for (const auto& o : outcomes) {
    t.add_row({to_string(plan.protocol), levels, num(rho),
               num(ctx.model.epsilon), num(ctx.model.delta), num(o.statistic),
               num(o.critical_value), o.reject ? "1" : "0",
               o.reject ? num(o.rejecting_level) : "none"});
  }
  ctx.write(ctx.command + "_outcomes.csv", t, false);
}

void cmd_risk(Context& ctx) {
  const ProtocolPlan plan = build_plan(ctx, selected_protocol(ctx));
  const Signal f = build_signal(ctx, plan);
  const int reps = reps_key(ctx, "reps", 2000, 100);
  const double kappa = calibrate(ctx, plan);
  const RiskEstimate est =
      estimate_risk(plan, kappa, f, reps, ctx.seed, ctx.workers);
  const double rho = std::sqrt(f.squared_norm());
  const Evaluation audit = simulate(
      plan, Signal{}, derive_seed(ctx.seed, {tag(Stream::audit)}), true);
  MechanismRecord first;
  if (!audit.records.empty()) first = audit.records.front();

  Table t;
  t.columns = {"protocol",  "L",          "rho",        "epsilon",
               "delta",     "type_i",     "type_ii",    "se_i",
               "se_ii",     "reps",       "critical_value", "sensitivity",
               "gamma",     "components", "grid_size",  "low_count",
               "high_count", "config_hash"};
  t.add_row({to_string(plan.protocol), plan_levels(plan), num(rho),
             num(ctx.model.epsilon), num(ctx.model.delta), num(est.type_i),
             num(est.type_ii), num(est.se_i), num(est.se_ii),
             num(static_cast<long long>(est.reps)), num(kappa),
             num(first.sensitivity), num(first.gamma), num(first.components),
             num(plan.grid_size), num(plan.low_count), num(plan.high_count),
             ctx.id});
  ctx.write(ctx.command + ".csv", t, false);
  write_mechanisms(ctx, plan);
  if (ctx.command == "adaptive" || ctx.cfg.flag_or("outcomes", false)) {
    write_outcomes(ctx, plan, kappa, f, reps, rho);
  }
}

void cmd_boundary(Context& ctx) {
  const Protocol p = selected_protocol(ctx);
  const ProtocolPlan plan = build_plan(ctx, p);
  const double kappa = calibrate(ctx, plan);
  BoundaryOptions opt;
  const std::string kind = ctx.cfg.text_or("signal", "spike");
  opt.spread = parse_spread(kind);
  opt.level = static_cast<int>(
      ctx.cfg.integer_or("signal_level", default_signal_level(ctx, plan)));
  opt.reps_per_probe = reps_key(ctx, "reps_per_probe", 1000, 100);
  opt.tol_rel = ctx.cfg.number_or("tol_rel", 0.05);
  opt.initial_rho = ctx.cfg.number_or(
      "initial_rho",
      std::sqrt(separation_rate(ctx.model, default_shared(ctx, p))));
  const double target = ctx.cfg.number_or("target_power", 0.5);
  const BoundaryEstimate est =
      detection_boundary(plan, kappa, target, opt, ctx.seed, ctx.workers);
  Table t;
  t.columns = {"protocol",  "L",        "signal_level", "target_power",
               "rho_star",  "lo",       "hi",           "power_lo",
               "power_hi",  "iterations", "critical_value", "reps_per_probe",
               "epsilon",   "delta"};
  t.add_row({to_string(plan.protocol), plan_levels(plan), num(opt.level),
             num(target), num(est.rho_star), num(est.lo), num(est.hi),
             num(est.power_lo), num(est.power_hi), num(est.iterations),
             num(kappa), num(opt.reps_per_probe), num(ctx.model.epsilon),
             num(ctx.model.delta)});
  ctx.write("boundary.csv", t, false);
}

void cmd_compare(Context& ctx) {
  const int L = static_cast<int>(
      ctx.cfg.integer_or("L", optimal_resolution(ctx.model, true)));
  const auto rhos = ctx.cfg.list("rho_grid");
  const Spread spread = parse_spread(ctx.cfg.text_or("signal", "spike"));
  const int reps = reps_key(ctx, "reps", 2000, 100);
  const auto rows = compare_protocols(
      ctx.model, L, rhos, spread, reps, reps_key(ctx, "calib_reps", 2000, 1000),
      ctx.seed, ctx.workers);
  Table t;
  t.columns = {"protocol", "L",     "rho", "epsilon",       "delta",
               "power",    "se",    "reps", "critical_value"};
  for (const auto& r : rows) {
    t.add_row({to_string(r.protocol), num(L), num(r.rho),
               num(ctx.model.epsilon), num(ctx.model.delta), num(r.power),
               num(r.se), num(static_cast<long long>(reps)),
               num(r.critical_value)});
  }
  ctx.write("compare.csv", t, false);
}

}  // namespace

std::vector<std::string> run_command(const RunConfig& cfg,
                                     const RunOptions& options) {
  std::string command = options.command;
  if (command.empty()) command = cfg.text_or("command", "");
  if (command.empty()) throw ConfigError("no command given");
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    throw ConfigError("unknown command '" + command + "'");
  }
  if (options.workers < 1 || options.workers > 256) {
    throw ConfigError("workers must be in 1..256");
  }
  std::uint64_t seed = 1;
  if (options.seed) {
    seed = *options.seed;
  } else if (cfg.has("seed")) {
    const long long s = cfg.integer("seed");
    if (s < 0) throw ConfigError("seed must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  }

  Context ctx{cfg, cfg.model(), command, seed, options.workers,
              fs::path(options.out_dir), cfg.values(), "", {}};
  ctx.effective["seed"] = std::to_string(seed);
  ctx.effective.erase("command");
  std::string canonical = "command=" + command + "\n";
  for (const auto& [k, v] : ctx.effective) canonical += k + "=" + v + "\n";
  ctx.id = run_id(canonical);

  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec || !fs::is_directory(ctx.out_dir)) {
    throw RuntimeError("cannot create output directory '" + options.out_dir +
                       "'");
  }

  if (command == "rates") {
    cmd_rates(ctx);
  } else if (command == "regimes") {
    cmd_regimes(ctx);
  } else if (command == "calibrate") {
    cmd_calibrate(ctx);
  } else if (command == "risk" || command == "adaptive") {
    cmd_risk(ctx);
  } else if (command == "boundary") {
    cmd_boundary(ctx);
  } else if (command == "compare") {
    cmd_compare(ctx);
  }
  ctx.write_sidecar();
  return ctx.written;
}

int run(const std::string& config_path, const RunOptions& options,
        std::string* error) {
  try {
    const RunConfig cfg = RunConfig::load(config_path);
    run_command(cfg, options);
    return 0;
  } catch (const ConfigError& e) {
    if (error) *error = e.what();
    return 2;
  } catch (const std::invalid_argument& e) {
    if (error) *error = e.what();
    return 2;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return 3;
  }
}

std::vector<std::string> emit_figure2_bundle(const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw RuntimeError("cannot create output directory '" + out_dir + "'");
  }
  const std::vector<double> eps = log_grid(0.05, 1.0, 50);
  struct Setting {
    int n;
    int m;
  };
  const Setting settings[] = {{5, 5}, {2, 15}};
  const double smooth[] = {0.2, 0.5, 1.0, 3.0};
  std::vector<std::string> files;
  std::ostringstream plot;
  plot << "# gnuplot script for the separation-rate curves\n"
       << "set logscale xy\nset xlabel 'epsilon'\nset ylabel 'rho'\n"
       << "set datafile separator ','\nset key outside\n"
       << "set terminal pngcairo size 1200,900\n"
       << "set output 'figure2.png'\nset multiplot layout 2,2\n";
  for (const char* mode : {"local", "shared"}) {
    const bool shared = std::string(mode) == "shared";
    for (const auto& st : settings) {
      plot << "set title '" << mode << ", (n,m)=(" << st.n << "," << st.m
           << ")'\nplot ";
      bool first = true;
      for (double s : smooth) {
        ModelConfig cfg;
        cfg.m = st.m;
        cfg.n = st.n;
        cfg.sigma = 1;
        cfg.s = s;
        char name[96];
        std::snprintf(name, sizeof name, "figure2_n%d_m%d_s%g_%s.csv", st.n,
                      st.m, s, mode);
        Table t;
        t.columns = {"epsilon", "rho", "rho2", "regime_id", "case_regime",
                     "shared"};
        for (const auto& row : rate_curve(cfg, eps, shared)) {
          t.add_row({format_number(row.epsilon),
                     format_number(std::sqrt(row.rho2)),
                     format_number(row.rho2), std::to_string(row.regime_id),
                     std::to_string(row.case_regime),
                     shared ? "true" : "false"});
        }
        const fs::path path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
        char desc[160];
        std::snprintf(desc, sizeof desc,
                      "rate curve n=%d m=%d sigma=1 s=%g mode=%s", st.n, st.m,
                      s, mode);
        write_csv(out, t,
                  {desc,
                   "rates evaluated with every asymptotic constant set to 1; "
                   "logarithmic factors excluded"});
        files.push_back(path.string());
        plot << (first ? "" : ", ") << "'" << name
             << "' using 1:2 with lines title 's=" << s << "'";
        first = false;
      }
      plot << "\n";
    }
  }
  plot << "unset multiplot\n";
  const fs::path script = dir / "figure2.gp";
  std::ofstream out(script, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + script.string() + "'");
  out << plot.str();
  files.push_back(script.string());
  return files;
}

}  // namespace fedpriv
