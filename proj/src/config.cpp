#include "drp/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "drp/models.hpp"

#ifndef DRP_VERSION
#define DRP_VERSION "0.0.0"
#endif

namespace drp {

using nlohmann::json;

std::vector<double> parse_grid(const std::string& spec) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (...) {
      throw InvalidArgument("grid '" + spec + "': '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v)) {
      throw InvalidArgument("grid '" + spec + "': '" + s + "' is not a finite number");
    }
    return v;
  };
  if (spec.empty()) throw InvalidArgument("empty grid");
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw InvalidArgument("grid '" + spec + "' must be start:stop:count");
    const double a = number(parts[0]);
    const double b = number(parts[1]);
    const double c = number(parts[2]);
    if (c < 1 || c != std::floor(c)) throw InvalidArgument("grid '" + spec + "': count must be a positive integer");
    const int n = static_cast<int>(c);
    if (n == 1 && a != b) throw InvalidArgument("grid '" + spec + "': count 1 needs start == stop");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(item));
  return out;
}

namespace {

const std::set<std::string>& known_observables() {
  static const std::set<std::string> names = {
      "chi",   "phi_par", "phi_perp", "gamma", "c_r_st", "c_r_ud", "c_l1_st", "c_l1_ud",
      "c_st",  "c_1",     "e_c",      "e_n",   "global_l1_st", "global_l1_ud",
      "global_coherent_yield"};
  return names;
}

}  // namespace

void SweepSpec::validate() const {
  if (j0_mhz.empty() || nu_d_mhz.empty() || delta_d.empty()) {
    throw InvalidArgument("sweep axes must be non-empty");
  }
  for (const auto* axis : {&j0_mhz, &nu_d_mhz, &delta_d, &tau_us})
    for (double v : *axis)
      if (!std::isfinite(v)) throw InvalidArgument("sweep values must be finite");
  for (double v : nu_d_mhz)
    if (v < 0.0) throw InvalidArgument("driving frequency must be >= 0");
  for (double v : delta_d)
    if (v < 0.0) throw InvalidArgument("driving amplitude must be >= 0");
  for (double v : tau_us)
    if (!(v > 0.0)) throw InvalidArgument("damping time must be positive");
  if (observables.empty()) throw InvalidArgument("sweep needs at least one observable");
  for (const auto& o : observables) {
    if (!known_observables().count(o)) throw InvalidArgument("unknown observable '" + o + "'");
  }
  if (orient_level < 0 || orient_level > 6) throw InvalidArgument("orient_level must be in [0, 6]");
  if (!(t_max > 0.0)) throw InvalidArgument("t_max must be positive");
  if (!(measure_t_upper > 0.0)) throw InvalidArgument("measure horizon must be positive");
  if (weighting != "renormalize" && weighting != "raw") {
    throw InvalidArgument("weighting must be renormalize or raw");
  }
}

std::size_t SweepSpec::size() const {
  return j0_mhz.size() * nu_d_mhz.size() * delta_d.size() * std::max<std::size_t>(1, tau_us.size());
}

void RunConfig::validate() const {
  setup.validate();
  sweep.validate();
}

json system_to_json(const SpinSystem& s) {
  json j;
  j["name"] = s.name;
  j["displacement_angstrom"] = {s.displacement.x(), s.displacement.y(), s.displacement.z()};
  json radicals = json::array();
  for (const auto& rad : s.radicals) {
    json list = json::array();
    for (const auto& n : rad) {
      json t = json::array();
      for (int r = 0; r < 3; ++r) t.push_back({n.tensor.matrix(r, 0), n.tensor.matrix(r, 1), n.tensor.matrix(r, 2)});
      list.push_back({{"label", n.label}, {"spin", n.spin}, {"tensor_mt", t}});
    }
    radicals.push_back(list);
  }
  j["radicals"] = radicals;
  return j;
}

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InvalidArgument("config section '" + section + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw InvalidArgument("config section '" + section + "': unknown key '" + it.key() + "'");
    }
  }
}

Vec3 vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument(what + " must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<double> grid_value(const json& j, const std::string& what) {
  if (j.is_string()) return parse_grid(j.get<std::string>());
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) return j.get<std::vector<double>>();
  throw InvalidArgument(what + " must be a grid string, a number or a list");
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SpinSystem system_from_json(const json& j) {
  SpinSystem s;
  if (j.contains("preset")) s = preset_system(j.at("preset").get<std::string>());
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("displacement_angstrom")) s.displacement = vec3(j.at("displacement_angstrom"), "displacement");
  if (j.contains("radicals")) {
    const json& rads = j.at("radicals");
    if (!rads.is_array() || rads.size() != 2) throw InvalidArgument("radicals must list two radicals");
    for (int r = 0; r < 2; ++r) {
      s.radicals[r].clear();
      for (const auto& n : rads[r]) {
        Nucleus nuc;
        nuc.label = n.value("label", "");
        nuc.spin = n.at("spin").get<double>();
        const json& t = n.at("tensor_mt");
        if (!t.is_array() || t.size() != 3) throw InvalidArgument("tensor_mt must be 3x3");
        for (int a = 0; a < 3; ++a) {
          if (!t[a].is_array() || t[a].size() != 3) throw InvalidArgument("tensor_mt must be 3x3");
          for (int b = 0; b < 3; ++b) nuc.tensor.matrix(a, b) = t[a][b].get<double>();
        }
        s.radicals[r].push_back(nuc);
      }
    }
  }
  s.validate();
  return s;
}

json config_to_json(const RunConfig& c) {
  const auto& s = c.setup;
  json j;
  json sys = system_to_json(s.system);
  sys["preset"] = c.preset;
  sys["j0_mhz"] = s.j0_mhz;
  sys["eed"] = s.include_eed;
  sys["g"] = s.constants.g_e;
  j["system"] = sys;
  j["field"] = {{"magnitude_mt", s.field.magnitude_mt},
                {"direction", {s.field.direction.x(), s.field.direction.y(), s.field.direction.z()}}};
  json d;
  d["kind"] = to_string(s.driving.kind);
  d["delta_d_angstrom"] = s.driving.delta_d;
  d["nu_d_mhz"] = s.driving.nu_d;
  d["sign"] = s.driving.sign == DrivingSign::Increase ? "increase" : "decrease";
  d["tau_us"] = s.driving.tau;
  if (s.driving.axis) d["axis"] = {s.driving.axis->x(), s.driving.axis->y(), s.driving.axis->z()};
  if (!s.driving.knots.empty()) {
    json knots = json::array();
    for (const auto& k : s.driving.knots) knots.push_back({k.t_us, k.displacement});
    d["knots"] = knots;
  }
  d["max_slew"] = s.driving.max_slew;
  d["average_rate"] = s.average_rate;
  d["average_coupling"] = s.average_coupling;
  j["driving"] = d;
  j["rates"] = {{"kb0", s.rates.kb0}, {"kf", s.rates.kf}, {"beta", s.rates.beta}};
  const auto& w = c.sweep;
  j["sweep"] = {{"j0_mhz", w.j0_mhz},
                {"nu_d_mhz", w.nu_d_mhz},
                {"delta_d_angstrom", w.delta_d},
                {"tau_us", w.tau_us},
                {"observables", w.observables},
                {"solver", to_string(w.solver)},
                {"orient_level", w.orient_level},
                {"t_max_us", w.t_max},
                {"measure_t_upper_us", w.measure_t_upper},
                {"weighting", w.weighting}};
  j["output"] = {{"path", c.output.path}, {"trajectory", c.output.trajectory_path}};
  return j;
}

RunConfig default_config(const std::string& preset) {
  RunConfig c;
  c.preset = preset;
  c.setup.system = preset_system(preset);
  return c;
}

RunConfig config_from_json(const json& j) {
  check_keys(j, "top level", {"system", "field", "driving", "rates", "sweep", "output"});
  RunConfig c;
  try {
    if (j.contains("system")) {
      const json& s = j.at("system");
      check_keys(s, "system", {"preset", "name", "radicals", "displacement_angstrom", "j0_mhz", "eed", "g"});
      c.preset = s.value("preset", std::string("one_nitrogen"));
      json sys = s;
      sys["preset"] = c.preset;
      c.setup.system = system_from_json(sys);
      maybe(s, "j0_mhz", c.setup.j0_mhz);
      maybe(s, "eed", c.setup.include_eed);
      maybe(s, "g", c.setup.constants.g_e);
    } else {
      c.setup.system = preset_system(c.preset);
    }
    if (j.contains("field")) {
      const json& f = j.at("field");
      check_keys(f, "field", {"magnitude_mt", "direction"});
      maybe(f, "magnitude_mt", c.setup.field.magnitude_mt);
      if (f.contains("direction")) c.setup.field.direction = vec3(f.at("direction"), "field direction").normalized();
    }
    if (j.contains("driving")) {
      const json& d = j.at("driving");
      check_keys(d, "driving", {"kind", "delta_d_angstrom", "nu_d_mhz", "sign", "tau_us", "axis", "knots",
                                "trajectory_csv", "max_slew", "average_rate", "average_coupling"});
      auto& dr = c.setup.driving;
      if (d.contains("trajectory_csv")) {
        std::ifstream in(d.at("trajectory_csv").get<std::string>());
        if (!in) throw InvalidArgument("cannot open trajectory csv '" + d.at("trajectory_csv").get<std::string>() + "'");
        dr = read_trajectory_csv(in);
      }
      if (d.contains("kind")) dr.kind = driving_kind_from_string(d.at("kind").get<std::string>());
      maybe(d, "delta_d_angstrom", dr.delta_d);
      maybe(d, "nu_d_mhz", dr.nu_d);
      maybe(d, "tau_us", dr.tau);
      maybe(d, "max_slew", dr.max_slew);
      if (d.contains("sign")) {
        const auto sign = d.at("sign").get<std::string>();
        if (sign == "increase") dr.sign = DrivingSign::Increase;
        else if (sign == "decrease") dr.sign = DrivingSign::Decrease;
        else throw InvalidArgument("driving sign must be increase or decrease");
      }
      if (d.contains("axis")) dr.axis = vec3(d.at("axis"), "driving axis").normalized();
      if (d.contains("knots")) {
        dr.knots.clear();
        for (const auto& k : d.at("knots")) {
          if (!k.is_array() || k.size() != 2) throw InvalidArgument("knots must be [t_us, displacement] pairs");
          dr.knots.push_back({k[0].get<double>(), k[1].get<double>()});
        }
      }
      maybe(d, "average_rate", c.setup.average_rate);
      maybe(d, "average_coupling", c.setup.average_coupling);
    }
    if (j.contains("rates")) {
      const json& r = j.at("rates");
      check_keys(r, "rates", {"kb0", "kf", "beta"});
      maybe(r, "kb0", c.setup.rates.kb0);
      maybe(r, "kf", c.setup.rates.kf);
      maybe(r, "beta", c.setup.rates.beta);
    }
    if (j.contains("sweep")) {
      const json& w = j.at("sweep");
      check_keys(w, "sweep", {"j0_mhz", "nu_d_mhz", "delta_d_angstrom", "tau_us", "observables", "solver",
                              "orient_level", "t_max_us", "measure_t_upper_us", "weighting"});
      auto& sw = c.sweep;
      if (w.contains("j0_mhz")) sw.j0_mhz = grid_value(w.at("j0_mhz"), "sweep.j0_mhz");
      if (w.contains("nu_d_mhz")) sw.nu_d_mhz = grid_value(w.at("nu_d_mhz"), "sweep.nu_d_mhz");
      if (w.contains("delta_d_angstrom")) sw.delta_d = grid_value(w.at("delta_d_angstrom"), "sweep.delta_d_angstrom");
      if (w.contains("tau_us")) sw.tau_us = grid_value(w.at("tau_us"), "sweep.tau_us");
      maybe(w, "observables", sw.observables);
      if (w.contains("solver")) sw.solver = solver_from_string(w.at("solver").get<std::string>());
      maybe(w, "orient_level", sw.orient_level);
      maybe(w, "t_max_us", sw.t_max);
      maybe(w, "measure_t_upper_us", sw.measure_t_upper);
      maybe(w, "weighting", sw.weighting);
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      check_keys(o, "output", {"path", "trajectory"});
      maybe(o, "path", c.output.path);
      maybe(o, "trajectory", c.output.trajectory_path);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string engine_version() {
#ifdef DRP_REVISION
  return std::string(DRP_VERSION) + "+" + DRP_REVISION;
#else
  return DRP_VERSION;
#endif
}

}  // namespace drp
