#include "pension_cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pension/csv.hpp"
#include "pension/errors.hpp"

namespace pension::cli {

namespace {

std::string position(int line, int column) {
  if (line < 0) return {};
  std::ostringstream out;
  out << "line " << line;
  if (column >= 0) out << ", column " << column;
  out << ": ";
  return out.str();
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(position(line, column) + message), line_(line), column_(column) {}

namespace {

// A node together with its dotted path, for diagnostics.
class Field {
 public:
  Field(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const YAML::Node& node() const { return node_; }
  bool has(const std::string& key) const { return node_.IsMap() && node_[key]; }

  [[noreturn]] void fail(const std::string& message) const {
    const auto mark = node_.Mark();
    const bool known = mark.line >= 0 && !mark.is_null();
    throw ConfigError(message, known ? mark.line + 1 : -1, known ? mark.column + 1 : -1);
  }

  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  Field require(const std::string& key) const {
    expect_map();
    if (!node_[key]) fail("missing required field `" + child_path(key) + "`");
    return Field(node_[key], child_path(key));
  }

  std::optional<Field> optional(const std::string& key) const {
    expect_map();
    if (!node_[key] || node_[key].IsNull()) return std::nullopt;
    return Field(node_[key], child_path(key));
  }

  void expect_map() const {
    if (!node_.IsMap()) fail("`" + (path_.empty() ? std::string("<root>") : path_) + "` must be a mapping");
  }

  void only_keys(std::initializer_list<const char*> allowed) const {
    expect_map();
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) Field(kv.first, path_).fail("unknown field `" + child_path(key) + "`");
    }
  }

  double number() const {
    if (!node_.IsScalar()) fail("`" + path_ + "` must be a number");
    try {
      return node_.as<double>();
    } catch (const YAML::BadConversion&) {
      fail("`" + path_ + "` must be a number, got '" + node_.Scalar() + "'");
    }
  }

  std::uint64_t count() const {
    if (!node_.IsScalar()) fail("`" + path_ + "` must be a non-negative integer");
    try {
      const auto text = node_.Scalar();
      if (!text.empty() && text.front() == '-') throw YAML::BadConversion(node_.Mark());
      return node_.as<std::uint64_t>();
    } catch (const YAML::BadConversion&) {
      fail("`" + path_ + "` must be a non-negative integer, got '" + node_.Scalar() + "'");
    }
  }

  int integer() const {
    if (!node_.IsScalar()) fail("`" + path_ + "` must be an integer");
    try {
      return node_.as<int>();
    } catch (const YAML::BadConversion&) {
      fail("`" + path_ + "` must be an integer, got '" + node_.Scalar() + "'");
    }
  }

  std::string text() const {
    if (!node_.IsScalar()) fail("`" + path_ + "` must be a string");
    return node_.Scalar();
  }

  std::vector<double> numbers() const {
    if (!node_.IsSequence()) fail("`" + path_ + "` must be a list of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < node_.size(); ++k)
      out.push_back(Field(node_[k], path_ + "[" + std::to_string(k) + "]").number());
    return out;
  }

  std::vector<Field> items() const {
    if (!node_.IsSequence()) fail("`" + path_ + "` must be a list");
    std::vector<Field> out;
    for (std::size_t k = 0; k < node_.size(); ++k)
      out.emplace_back(node_[k], path_ + "[" + std::to_string(k) + "]");
    return out;
  }

 private:
  YAML::Node node_;
  std::string path_;
};

CurveSpec parse_curve(const Field& f) {
  CurveSpec c;
  // A bare number is shorthand for a constant rate.
  if (f.node().IsScalar()) {
    c.value = f.number();
    return c;
  }
  c.type = f.require("type").text();
  if (c.type == "constant") {
    f.only_keys({"type", "value"});
    c.value = f.require("value").number();
  } else if (c.type == "piecewise_linear") {
    f.only_keys({"type", "knots", "values"});
    c.knots = f.require("knots").numbers();
    c.values = f.require("values").numbers();
    if (c.knots.size() != c.values.size())
      f.fail("`" + f.path() + "`: knots and values differ in length");
  } else if (c.type == "gompertz_makeham") {
    f.only_keys({"type", "alpha", "beta", "growth"});
    c.alpha = f.require("alpha").number();
    c.beta = f.require("beta").number();
    c.growth = f.require("growth").number();
  } else {
    f.require("type").fail("`" + f.path() + ".type` must be constant, piecewise_linear or "
                           "gompertz_makeham, got '" + c.type + "'");
  }
  return c;
}

MortalitySpec parse_mortality(const Field& f) {
  MortalitySpec m;
  f.only_keys({"base", "improvement"});
  m.base = parse_curve(f.require("base"));
  if (auto imp = f.optional("improvement")) m.improvement = parse_curve(*imp);
  return m;
}

AgeDensitySpec parse_age_density(const Field& f) {
  AgeDensitySpec a;
  a.type = f.require("type").text();
  if (a.type == "uniform") {
    f.only_keys({"type", "lo", "hi", "lo_slope", "hi_slope"});
    a.lo = f.require("lo").number();
    a.hi = f.require("hi").number();
    if (auto s = f.optional("lo_slope")) a.lo_slope = s->number();
    if (auto s = f.optional("hi_slope")) a.hi_slope = s->number();
  } else if (a.type == "truncated_normal") {
    f.only_keys({"type", "offset", "sd"});
    a.offset = f.require("offset").number();
    a.sd = f.require("sd").number();
  } else if (a.type == "tabulated") {
    f.only_keys({"type", "times", "ages", "values"});
    a.times = f.require("times").numbers();
    a.ages = f.require("ages").numbers();
    const Field rows = f.require("values");
    for (const auto& row : rows.items()) {
      a.table.push_back(row.numbers());
      if (a.table.back().size() != a.ages.size())
        row.fail("`" + row.path() + "` must have one value per age");
    }
    if (a.table.size() != a.times.size()) rows.fail("`" + rows.path() + "` must have one row per time");
  } else {
    f.require("type").fail("`" + f.path() + ".type` must be uniform, truncated_normal or "
                           "tabulated, got '" + a.type + "'");
  }
  return a;
}

DeathSpec parse_death(const Field& f) {
  DeathSpec d;
  d.type = f.require("type").text();
  if (d.type == "mortality") {
    f.only_keys({"type", "curve"});
    d.mortality = parse_curve(f.require("curve"));
  } else if (d.type == "tabulated") {
    f.only_keys({"type", "knots", "values"});
    d.knots = f.require("knots").numbers();
    d.values = f.require("values").numbers();
  } else {
    f.require("type").fail("`" + f.path() + ".type` must be mortality or tabulated, got '" +
                           d.type + "'");
  }
  return d;
}

PolicyConfig parse_policy(const Field& f) {
  PolicyConfig p;
  f.only_keys({"name", "kind", "amount", "age_limit", "post_death_mortality"});
  p.name = f.require("name").text();
  p.kind = f.require("kind").text();
  if (p.kind != "lifelong_annuity" && p.kind != "terminating_annuity" &&
      p.kind != "lump_sum_at_age")
    f.require("kind").fail("`" + f.path() + ".kind` must be lifelong_annuity, "
                           "terminating_annuity or lump_sum_at_age, got '" + p.kind + "'");
  if (auto a = f.optional("amount")) p.amount = a->number();
  if (p.kind == "lifelong_annuity") {
    if (auto c = f.optional("age_limit")) p.age_limit = c->number();
  } else {
    p.age_limit = f.require("age_limit").number();
  }
  if (auto m = f.optional("post_death_mortality")) p.post_death_mortality = parse_mortality(*m);
  return p;
}

ScenarioConfig parse_root(const Field& root) {
  ScenarioConfig c;
  root.only_keys({"mode", "a_min", "grid", "truncation", "intensities", "short_rate", "policies",
                  "portfolio", "simulation", "report"});
  if (auto m = root.optional("mode")) {
    c.mode = m->text();
    if (c.mode != "general" && c.mode != "g82")
      m->fail("`mode` must be general or g82, got '" + c.mode + "'");
  }
  if (c.g82()) c.a_min = root.require("a_min").number();
  else if (auto a = root.optional("a_min")) c.a_min = a->number();

  const Field grid = root.require("grid");
  grid.only_keys({"step", "t_max", "y_max"});
  c.grid.step = grid.require("step").number();
  c.grid.t_max = grid.optional("t_max") ? grid.require("t_max").number() : kDefaultHorizon;
  c.grid.y_max = grid.optional("y_max") ? grid.require("y_max").number() : kDefaultHorizon;

  if (auto t = root.optional("truncation")) {
    t->only_keys({"nu_cap", "epsilon"});
    if (auto n = t->optional("nu_cap")) c.nu_cap = n->integer();
    if (auto e = t->optional("epsilon")) c.epsilon = e->number();
  }

  const Field in = root.require("intensities");
  in.only_keys({"gamma", "sigma", "spouse_mortality", "age_at_marriage", "death"});
  c.gamma = parse_curve(in.require("gamma"));
  c.sigma = parse_curve(in.require("sigma"));
  c.spouse_mortality = parse_mortality(in.require("spouse_mortality"));
  c.age_at_marriage = parse_age_density(in.require("age_at_marriage"));
  c.death = parse_death(in.require("death"));

  if (auto r = root.optional("short_rate")) c.short_rate = parse_curve(*r);

  std::set<std::string> names;
  if (auto ps = root.optional("policies")) {
    for (const auto& item : ps->items()) {
      c.policies.push_back(parse_policy(item));
      if (!names.insert(c.policies.back().name).second)
        item.fail("duplicate policy name '" + c.policies.back().name + "'");
    }
  }

  if (auto pf = root.optional("portfolio")) {
    pf->only_keys({"insured_mortality", "max_age", "members"});
    PortfolioConfig p;
    p.insured_mortality = parse_curve(pf->require("insured_mortality"));
    if (auto m = pf->optional("max_age")) p.max_age = m->number();
    for (const auto& item : pf->require("members").items()) {
      item.only_keys({"initial_age", "policy", "weight"});
      MemberConfig m;
      m.initial_age = item.require("initial_age").number();
      m.policy = item.require("policy").text();
      if (auto w = item.optional("weight")) m.weight = w->number();
      if (!names.count(m.policy))
        item.require("policy").fail("portfolio member refers to unknown policy '" + m.policy + "'");
      p.members.push_back(std::move(m));
    }
    c.portfolio = std::move(p);
  }

  if (auto s = root.optional("simulation")) {
    s->only_keys({"n_paths", "seed", "g_times", "f_times", "bin_width", "tracked_layers"});
    if (auto n = s->optional("n_paths")) c.simulation.n_paths = n->count();
    if (auto n = s->optional("seed")) c.simulation.seed = n->count();
    if (auto n = s->optional("g_times")) c.simulation.g_times = n->numbers();
    if (auto n = s->optional("f_times")) c.simulation.f_times = n->numbers();
    if (auto n = s->optional("bin_width")) c.simulation.bin_width = n->number();
    if (auto n = s->optional("tracked_layers")) c.simulation.tracked_layers = n->integer();
  }
  if (auto r = root.optional("report")) {
    r->only_keys({"f_times"});
    if (auto n = r->optional("f_times")) c.report_f_times = n->numbers();
  }
  return c;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("configuration is empty");
  return parse_root(Field(root, ""));
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

// ---------------------------------------------------------------------------

namespace {

void emit_number(YAML::Emitter& out, double x) { out << format_double(x); }

void emit_numbers(YAML::Emitter& out, const std::vector<double>& xs) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : xs) emit_number(out, x);
  out << YAML::EndSeq;
}

void emit_curve(YAML::Emitter& out, const CurveSpec& c) {
  out << YAML::BeginMap << YAML::Key << "type" << YAML::Value << c.type;
  if (c.type == "constant") {
    out << YAML::Key << "value" << YAML::Value;
    emit_number(out, c.value);
  } else if (c.type == "piecewise_linear") {
    out << YAML::Key << "knots" << YAML::Value;
    emit_numbers(out, c.knots);
    out << YAML::Key << "values" << YAML::Value;
    emit_numbers(out, c.values);
  } else {
    out << YAML::Key << "alpha" << YAML::Value;
    emit_number(out, c.alpha);
    out << YAML::Key << "beta" << YAML::Value;
    emit_number(out, c.beta);
    out << YAML::Key << "growth" << YAML::Value;
    emit_number(out, c.growth);
  }
  out << YAML::EndMap;
}

void emit_mortality(YAML::Emitter& out, const MortalitySpec& m) {
  out << YAML::BeginMap << YAML::Key << "base" << YAML::Value;
  emit_curve(out, m.base);
  if (m.improvement) {
    out << YAML::Key << "improvement" << YAML::Value;
    emit_curve(out, *m.improvement);
  }
  out << YAML::EndMap;
}

void emit_key_number(YAML::Emitter& out, const char* key, double x) {
  out << YAML::Key << key << YAML::Value;
  emit_number(out, x);
}

}  // namespace

std::string echo_config(const ScenarioConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << c.mode;
  if (c.g82()) emit_key_number(out, "a_min", c.a_min);

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  emit_key_number(out, "step", c.grid.step);
  emit_key_number(out, "t_max", c.grid.t_max);
  emit_key_number(out, "y_max", c.grid.y_max);
  out << YAML::EndMap;

  out << YAML::Key << "truncation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "nu_cap" << YAML::Value << c.nu_cap;
  emit_key_number(out, "epsilon", c.epsilon);
  out << YAML::EndMap;

  out << YAML::Key << "intensities" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gamma" << YAML::Value;
  emit_curve(out, c.gamma);
  out << YAML::Key << "sigma" << YAML::Value;
  emit_curve(out, c.sigma);
  out << YAML::Key << "spouse_mortality" << YAML::Value;
  emit_mortality(out, c.spouse_mortality);

  const auto& a = c.age_at_marriage;
  out << YAML::Key << "age_at_marriage" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << a.type;
  if (a.type == "uniform") {
    emit_key_number(out, "lo", a.lo);
    emit_key_number(out, "hi", a.hi);
    emit_key_number(out, "lo_slope", a.lo_slope);
    emit_key_number(out, "hi_slope", a.hi_slope);
  } else if (a.type == "truncated_normal") {
    emit_key_number(out, "offset", a.offset);
    emit_key_number(out, "sd", a.sd);
  } else {
    out << YAML::Key << "times" << YAML::Value;
    emit_numbers(out, a.times);
    out << YAML::Key << "ages" << YAML::Value;
    emit_numbers(out, a.ages);
    out << YAML::Key << "values" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : a.table) emit_numbers(out, row);
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "death" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << c.death.type;
  if (c.death.type == "mortality") {
    out << YAML::Key << "curve" << YAML::Value;
    emit_curve(out, c.death.mortality);
  } else {
    out << YAML::Key << "knots" << YAML::Value;
    emit_numbers(out, c.death.knots);
    out << YAML::Key << "values" << YAML::Value;
    emit_numbers(out, c.death.values);
  }
  out << YAML::EndMap;
  out << YAML::EndMap;  // intensities

  out << YAML::Key << "short_rate" << YAML::Value;
  emit_curve(out, c.short_rate);

  if (!c.policies.empty()) {
    out << YAML::Key << "policies" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : c.policies) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << p.name;
      out << YAML::Key << "kind" << YAML::Value << p.kind;
      emit_key_number(out, "amount", p.amount);
      emit_key_number(out, "age_limit", p.age_limit);
      if (p.post_death_mortality) {
        out << YAML::Key << "post_death_mortality" << YAML::Value;
        emit_mortality(out, *p.post_death_mortality);
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (c.portfolio) {
    out << YAML::Key << "portfolio" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "insured_mortality" << YAML::Value;
    emit_curve(out, c.portfolio->insured_mortality);
    emit_key_number(out, "max_age", c.portfolio->max_age);
    out << YAML::Key << "members" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : c.portfolio->members) {
      out << YAML::Flow << YAML::BeginMap;
      emit_key_number(out, "initial_age", m.initial_age);
      out << YAML::Key << "policy" << YAML::Value << m.policy;
      emit_key_number(out, "weight", m.weight);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }

  const auto& s = c.simulation;
  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_paths" << YAML::Value << s.n_paths;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "g_times" << YAML::Value;
  emit_numbers(out, s.g_times);
  out << YAML::Key << "f_times" << YAML::Value;
  emit_numbers(out, s.f_times);
  emit_key_number(out, "bin_width", s.bin_width);
  out << YAML::Key << "tracked_layers" << YAML::Value << s.tracked_layers;
  out << YAML::EndMap;

  out << YAML::Key << "report" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "f_times" << YAML::Value;
  emit_numbers(out, c.report_f_times);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------

IntensityCurve build_curve(const CurveSpec& spec, double t_max, double step) {
  if (spec.type == "constant") return IntensityCurve::constant(spec.value, t_max);
  if (spec.type == "piecewise_linear")
    return IntensityCurve::piecewise_linear(spec.knots, spec.values, t_max);
  return IntensityCurve::gompertz_makeham(spec.alpha, spec.beta, spec.growth, t_max, step);
}

MortalitySurface build_mortality(const MortalitySpec& spec, double age_domain, double t_max,
                                 double step) {
  std::optional<IntensityCurve> improvement;
  if (spec.improvement) improvement = build_curve(*spec.improvement, t_max, step);
  return MortalitySurface(build_curve(spec.base, age_domain, step), std::move(improvement));
}

AgeAtMarriageDensity build_age_density(const AgeDensitySpec& spec) {
  if (spec.type == "uniform")
    return AgeAtMarriageDensity::uniform(spec.lo, spec.hi, spec.lo_slope, spec.hi_slope);
  if (spec.type == "truncated_normal")
    return AgeAtMarriageDensity::truncated_normal(spec.offset, spec.sd);
  return AgeAtMarriageDensity::tabulated(TabulatedAges{spec.times, spec.ages, spec.table});
}

namespace {

// Calendar horizon covered by the time-indexed curves.
double time_domain(const ScenarioConfig& c) {
  return c.portfolio ? std::max(c.grid.t_max, c.portfolio->max_age) : c.grid.t_max;
}

// Spouse ages reachable on the grid: y_max at t = 0 plus the whole horizon.
double age_domain(const ScenarioConfig& c) { return c.grid.y_max + time_domain(c); }

}  // namespace

IntensitySet build_intensities(const ScenarioConfig& c) {
  const double step = c.grid.step;
  const double horizon = time_domain(c);
  DeathDensity death = c.death.type == "mortality"
                           ? DeathDensity::from_mortality(build_curve(c.death.mortality, horizon, step), step)
                           : DeathDensity::tabulated(c.death.knots, c.death.values, step);
  return IntensitySet{build_curve(c.gamma, horizon, step), build_curve(c.sigma, horizon, step),
                      build_mortality(c.spouse_mortality, age_domain(c), horizon, step),
                      build_age_density(c.age_at_marriage), std::move(death)};
}

G82Inputs build_g82_inputs(const ScenarioConfig& c) {
  if (c.spouse_mortality.improvement)
    throw ConfigError("g82 mode requires time-independent spouse mortality (no improvement)");
  const double step = c.grid.step;
  return G82Inputs{build_curve(c.gamma, c.grid.t_max, step), build_curve(c.sigma, c.grid.t_max, step),
                   build_curve(c.spouse_mortality.base, age_domain(c), step),
                   build_age_density(c.age_at_marriage), c.a_min};
}

std::vector<PolicySpec> build_policies(const ScenarioConfig& c) {
  std::vector<PolicySpec> out;
  for (const auto& p : c.policies) {
    PolicySpec spec;
    if (p.kind == "lifelong_annuity") spec = PolicySpec::lifelong_annuity(p.amount);
    else if (p.kind == "terminating_annuity") spec = PolicySpec::terminating_annuity(p.age_limit, p.amount);
    else spec = PolicySpec::lump_sum_at_age(p.age_limit, p.amount);
    spec.name = p.name;
    if (p.post_death_mortality)
      spec.post_death_mortality =
          build_mortality(*p.post_death_mortality, age_domain(c), time_domain(c), c.grid.step);
    spec.validate();
    out.push_back(std::move(spec));
  }
  return out;
}

ShortRate build_short_rate(const ScenarioConfig& c) {
  return ShortRate(build_curve(c.short_rate, time_domain(c), c.grid.step));
}

SolverOptions solver_options(const ScenarioConfig& c) {
  SolverOptions o;
  o.nu_cap = c.nu_cap;
  o.epsilon = c.epsilon;
  return o;
}

SimulationSettings simulation_settings(const ScenarioConfig& c) {
  SimulationSettings s;
  s.n_paths = c.simulation.n_paths;
  s.seed = c.simulation.seed;
  s.grid = c.grid;
  s.f_times = c.simulation.f_times;
  s.bin_width = c.simulation.bin_width;
  s.tracked_layers = c.simulation.tracked_layers;
  return s;
}

}  // namespace pension::cli
