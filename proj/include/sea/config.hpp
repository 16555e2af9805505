#pragma once

// Run configuration: INI-style sections of `key = value` lines (boost
// property_tree's ini dialect; `;` or `#` start a comment line). Every key is
// optional and unknown sections or keys are rejected. Value syntax:
//   number       1e-4, 0.2, -6
//   vector       "a, b"
//   matrix       "a11, a12; a21, a22"   (rows separated by ';')
//   boolean      true | false
//   breakpoints  "t1:v1, t2:v2"         ([disturbance] points)

#include <Eigen/Core>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sea/controller.hpp"
#include "sea/errors.hpp"
#include "sea/io.hpp"
#include "sea/linkage.hpp"
#include "sea/lyapunov.hpp"
#include "sea/plant.hpp"
#include "sea/reference.hpp"
#include "sea/simulation.hpp"

namespace sea {

/// Parameters the controller believes; default to the true plant values.
struct ModelOverrides {
  double m = 2.0;
  double damping = 0.5;
  double d3 = 0.0525;
  double g = 9.81;

  friend bool operator==(const ModelOverrides&, const ModelOverrides&) = default;
};

struct OutputSettings {
  std::string dir = "out";
  bool plots = true;

  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

/// Fully resolved, user-level configuration.
struct RunConfig {
  LinkageParams geometry;
  double damping = 0.5;
  double mass_ratio = 1.0;
  MotorParams motor;
  std::optional<double> zeta = 47.535;  // nullopt: computed from the motor parameters
  ModelOverrides model;
  ControllerSettings controller;
  SimConfig sim;
  ReferenceTrajectory reference;
  DisturbanceProfile disturbance;
  OutputSettings output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline Scenario to_scenario(const RunConfig& rc) {
  Scenario sc;
  sc.plant.linkage = rc.geometry;
  sc.plant.damping = rc.damping;
  sc.plant.motor = rc.motor;
  sc.plant.filter = sea_filter_constants(rc.motor, rc.geometry.k, rc.geometry.m, rc.mass_ratio, rc.zeta);
  sc.model = sc.plant;
  sc.model.linkage.m = rc.model.m;
  sc.model.linkage.d3 = rc.model.d3;
  sc.model.linkage.g = rc.model.g;
  sc.model.damping = rc.model.damping;
  sc.controller = rc.controller;
  sc.reference = rc.reference;
  sc.disturbance = rc.disturbance;
  sc.sim = rc.sim;
  sc.finalize();
  return sc;
}

// Checks every cross-field constraint; throws ValidationError, NotHurwitz or
// MatchingInfeasible naming the violated rule.
inline void validate(const RunConfig& rc) {
  validate(rc.geometry);
  validate(rc.motor);
  validate(rc.sim);
  if (!(rc.damping >= 0.0)) throw ValidationError("plant D must be >= 0");
  if (!(rc.mass_ratio > 0.0)) throw ValidationError("plant mass_ratio must be > 0");
  if (rc.zeta && !(*rc.zeta > 0.0)) throw ValidationError("motor zeta must be > 0");
  if (!(rc.model.m > 0.0) || !(rc.model.d3 > 0.0)) throw ValidationError("model m and d3 must be > 0");
  if (!(rc.model.damping >= 0.0)) throw ValidationError("model D must be >= 0");
  const ControllerSettings& c = rc.controller;
  if (!is_hurwitz(c.A_m)) throw NotHurwitz("controller A_m is not Hurwitz");
  if (!(c.derivative_tau >= 0.0)) throw ValidationError("backstepping derivative_tau must be >= 0");
  if (!c.initial_gains.all_finite()) throw ValidationError("initial gains must be finite");

  const Scenario sc = to_scenario(rc);
  validate(sc.controller.adaptation);
  ideal_gains(limb_drift_matrix(sc.model), sc.controller.adaptation.B, sc.controller.adaptation.Lambda,
              c.A_m, c.B_m);

  const ReferenceTrajectory& r = rc.reference;
  if (r.kind == ReferenceTrajectory::Kind::parametric_walk || r.kind == ReferenceTrajectory::Kind::sine) {
    if (!(r.period > 0.0)) throw ValidationError("reference period must be > 0");
  }
  if (r.kind == ReferenceTrajectory::Kind::csv && r.samples.size() < 2) {
    throw ValidationError("csv reference needs at least two samples");
  }
  const DisturbanceProfile& d = rc.disturbance;
  for (std::size_t i = 1; i < d.points.size(); ++i) {
    if (!(d.points[i].first > d.points[i - 1].first)) {
      throw ValidationError("disturbance points must have strictly increasing times");
    }
  }
  if (rc.output.dir.empty()) throw ValidationError("output dir must not be empty");
}

namespace detail {

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

inline constexpr EnumName<SimMode> kSimModes[] = {{SimMode::full_cascade, "full_cascade"},
                                                  {SimMode::ideal_mrac, "ideal_mrac"}};
inline constexpr EnumName<AdaptationIntegrator> kIntegrators[] = {
    {AdaptationIntegrator::euler, "euler"}, {AdaptationIntegrator::rk4, "rk4"}};
inline constexpr EnumName<ReferenceTrajectory::Kind> kReferenceKinds[] = {
    {ReferenceTrajectory::Kind::parametric_walk, "parametric_walk"},
    {ReferenceTrajectory::Kind::csv, "csv"},
    {ReferenceTrajectory::Kind::constant, "constant"},
    {ReferenceTrajectory::Kind::step, "step"},
    {ReferenceTrajectory::Kind::sine, "sine"}};
inline constexpr EnumName<DisturbanceProfile::Kind> kDisturbanceKinds[] = {
    {DisturbanceProfile::Kind::zero, "zero"},
    {DisturbanceProfile::Kind::constant, "constant"},
    {DisturbanceProfile::Kind::sinusoid, "sinusoid"},
    {DisturbanceProfile::Kind::piecewise, "piecewise"}};

template <typename E, std::size_t N>
std::string_view enum_name(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

// One config section: typed getters that remember which keys were read so
// leftovers can be reported as unknown.
class SectionReader {
 public:
  SectionReader(std::string name, const boost::property_tree::ptree* tree)
      : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto child = tree_->get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return std::string(trim(child->data()));
  }

  void number(const std::string& key, double& out) {
    if (auto v = raw(key)) out = parse_number(key, *v);
  }

  void boolean(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      if (*v == "true") out = true;
      else if (*v == "false") out = false;
      else fail(key, "expected true or false, got '" + *v + "'");
    }
  }

  void text(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void vector2(const std::string& key, Eigen::Vector2d& out) {
    if (auto v = raw(key)) {
      const auto parts = numbers(key, *v, ',');
      if (parts.size() != 2) fail(key, "expected 2 comma-separated numbers");
      out = Eigen::Vector2d(parts[0], parts[1]);
    }
  }

  void matrix2(const std::string& key, Eigen::Matrix2d& out) {
    if (auto v = raw(key)) {
      const auto rows = split(*v, ';');
      if (rows.size() != 2) fail(key, "expected 2 rows separated by ';'");
      for (int i = 0; i < 2; ++i) {
        const auto cols = numbers(key, rows[static_cast<std::size_t>(i)], ',');
        if (cols.size() != 2) fail(key, "expected 2 numbers per row");
        out(i, 0) = cols[0];
        out(i, 1) = cols[1];
      }
    }
  }

  template <typename E, std::size_t N>
  void choice(const std::string& key, const EnumName<E> (&table)[N], E& out) {
    if (auto v = raw(key)) {
      for (const auto& e : table) {
        if (e.name == *v) {
          out = e.value;
          return;
        }
      }
      std::string allowed;
      for (const auto& e : table) allowed += (allowed.empty() ? "" : ", ") + std::string(e.name);
      fail(key, "expected one of {" + allowed + "}, got '" + *v + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ParseError("[" + name_ + "] " + key + ": " + msg);
  }

  double parse_number(const std::string& key, std::string_view s) const {
    double v = 0.0;
    if (!parse_double(s, v) || !std::isfinite(v)) fail(key, "expected a finite number, got '" + std::string(s) + "'");
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::string_view s, char sep) const {
    std::vector<double> out;
    for (auto part : split(s, sep)) out.push_back(parse_number(key, part));
    return out;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!used_.count(key)) throw ParseError("[" + name_ + "] unknown key '" + key + "'");
      if (!child.empty()) throw ParseError("[" + name_ + "] " + key + ": unexpected nesting");
    }
  }

 private:
  std::string name_;
  const boost::property_tree::ptree* tree_;
  std::set<std::string> used_;
};

inline std::string fmt_vec(const Eigen::Vector2d& v) {
  return format_double(v[0]) + ", " + format_double(v[1]);
}

inline std::string fmt_mat(const Eigen::Matrix2d& m) {
  return format_double(m(0, 0)) + ", " + format_double(m(0, 1)) + "; " + format_double(m(1, 0)) +
         ", " + format_double(m(1, 1));
}

inline const char* fmt_bool(bool b) { return b ? "true" : "false"; }

}  // namespace detail

inline const std::vector<std::string>& config_sections() {
  static const std::vector<std::string> names = {"plant",        "motor",      "geometry",  "model",
                                                 "controller",   "adaptation", "backstepping",
                                                 "simulation",   "reference",  "disturbance",
                                                 "output"};
  return names;
}

// Parses and validates config text. Relative reference CSV paths resolve
// against base_dir and are stored absolute.
inline RunConfig parse_config_string(const std::string& text,
                                     const std::filesystem::path& base_dir = std::filesystem::current_path()) {
  namespace pt = boost::property_tree;
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  const auto& known = config_sections();
  for (const auto& [name, child] : root) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      if (child.empty()) throw ParseError("key '" + name + "' is outside any section");
      throw ParseError("unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    const auto child = root.get_child_optional(pt::ptree::path_type(name, '\0'));
    return detail::SectionReader(name, child ? &*child : nullptr);
  };

  RunConfig rc;
  std::vector<detail::SectionReader> readers;

  auto plant = section("plant");
  plant.number("m", rc.geometry.m);
  plant.number("D", rc.damping);
  plant.number("k", rc.geometry.k);
  plant.number("g", rc.geometry.g);
  plant.number("mass_ratio", rc.mass_ratio);
  readers.push_back(std::move(plant));

  auto motor = section("motor");
  MotorParams& mp = rc.motor;
  motor.number("R", mp.R);
  motor.number("L_ind", mp.L_ind);
  motor.number("K_T", mp.K_T);
  motor.number("K_EMF", mp.K_EMF);
  motor.number("B_M", mp.B_M);
  motor.number("J_M", mp.J_M);
  motor.number("J_s", mp.J_s);
  motor.number("m0", mp.m0);
  motor.number("n", mp.n);
  motor.number("lead", mp.lead);
  motor.number("eta1", mp.eta1);
  motor.number("eta2", mp.eta2);
  if (auto z = motor.raw("zeta")) {
    rc.zeta = *z == "computed" ? std::nullopt : std::optional<double>(motor.parse_number("zeta", *z));
  }
  readers.push_back(std::move(motor));

  auto geom = section("geometry");
  LinkageParams& lp = rc.geometry;
  geom.number("d1", lp.d1);
  geom.number("d2", lp.d2);
  geom.number("d3", lp.d3);
  geom.number("d4", lp.d4);
  geom.number("d5", lp.d5);
  geom.number("d6", lp.d6);
  geom.number("d7", lp.d7);
  geom.number("beta_offset", lp.beta_offset);
  geom.number("phi_min", lp.phi_min);
  geom.number("phi_max", lp.phi_max);
  readers.push_back(std::move(geom));

  auto model = section("model");
  rc.model = {lp.m, rc.damping, lp.d3, lp.g};
  model.number("m", rc.model.m);
  model.number("D", rc.model.damping);
  model.number("d3", rc.model.d3);
  model.number("g", rc.model.g);
  readers.push_back(std::move(model));

  ControllerSettings& c = rc.controller;
  AdaptationConfig& a = c.adaptation;
  auto ctrl = section("controller");
  ctrl.matrix2("A_m", c.A_m);
  ctrl.vector2("B_m", c.B_m);
  ctrl.matrix2("Q", a.Q);
  ctrl.boolean("use_printed_P", c.use_printed_P);
  ctrl.boolean("drift_without_zeta", c.drift_without_zeta);
  readers.push_back(std::move(ctrl));

  auto adapt = section("adaptation");
  adapt.matrix2("gamma_x", a.gamma_x);
  adapt.number("gamma_r", a.gamma_r);
  adapt.matrix2("gamma_theta", a.gamma_theta);
  adapt.choice("integrator", detail::kIntegrators, c.integrator);
  adapt.boolean("freeze", c.freeze_gains);
  adapt.vector2("K_x0", c.initial_gains.K_x);
  adapt.number("K_r0", c.initial_gains.K_r);
  adapt.vector2("theta0", c.initial_gains.theta);
  readers.push_back(std::move(adapt));

  auto bs = section("backstepping");
  bs.number("k1", a.k1);
  bs.number("k2", a.k2);
  bs.number("derivative_tau", c.derivative_tau);
  readers.push_back(std::move(bs));

  auto simsec = section("simulation");
  SimConfig& s = rc.sim;
  simsec.number("dt_physics", s.dt_physics);
  simsec.number("dt_control", s.dt_control);
  simsec.number("duration", s.duration);
  simsec.number("x1_0", s.initial.x1);
  simsec.number("x2_0", s.initial.x2);
  simsec.number("z1_0", s.initial.z1);
  simsec.number("z2_0", s.initial.z2);
  simsec.number("xm1_0", s.reference_initial[0]);
  simsec.number("xm2_0", s.reference_initial[1]);
  simsec.choice("mode", detail::kSimModes, s.mode);
  simsec.number("transient_cutoff", s.transient_cutoff);
  readers.push_back(std::move(simsec));

  auto ref = section("reference");
  ReferenceTrajectory& r = rc.reference;
  ref.choice("kind", detail::kReferenceKinds, r.kind);
  ref.number("amplitude", r.amplitude);
  ref.number("amplitude2", r.amplitude2);
  ref.number("period", r.period);
  ref.number("phase", r.phase);
  ref.number("phase2", r.phase2);
  ref.number("offset", r.offset);
  ref.number("value", r.value);
  ref.number("step_time", r.step_time);
  if (auto f = ref.raw("file"); f && !f->empty()) {
    std::filesystem::path p(*f);
    if (p.is_relative()) p = base_dir / p;
    r.file = std::filesystem::absolute(p).lexically_normal().string();
  }
  if (r.kind == ReferenceTrajectory::Kind::csv) {
    if (r.file.empty()) ref.fail("file", "required when kind = csv");
    r.samples = load_reference_csv(r.file);
  }
  readers.push_back(std::move(ref));

  auto dist = section("disturbance");
  DisturbanceProfile& d = rc.disturbance;
  dist.choice("kind", detail::kDisturbanceKinds, d.kind);
  dist.number("amplitude", d.amplitude);
  dist.number("frequency", d.frequency);
  dist.number("phase", d.phase);
  if (auto pts = dist.raw("points"); pts && !pts->empty()) {
    for (auto item : detail::split(*pts, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) dist.fail("points", "expected t:value pairs");
      d.points.emplace_back(dist.parse_number("points", item.substr(0, colon)),
                            dist.parse_number("points", item.substr(colon + 1)));
    }
  }
  readers.push_back(std::move(dist));

  auto out = section("output");
  out.text("dir", rc.output.dir);
  out.boolean("plots", rc.output.plots);
  readers.push_back(std::move(out));

  for (const auto& rd : readers) rd.reject_unknown();
  validate(rc);
  return rc;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path.string());
  std::ostringstream text;
  text << in.rdbuf();
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_config_string(text.str(), base);
}

/// Default configuration (the empty file).
inline RunConfig default_config() { return parse_config_string(""); }

// Effective config with every default materialized. Parsing the result gives
// back an identical RunConfig.
inline std::string to_config_string(const RunConfig& rc) {
  using detail::fmt_bool;
  using detail::fmt_mat;
  using detail::fmt_vec;
  auto f = [](double v) { return format_double(v); };
  const ControllerSettings& c = rc.controller;
  const AdaptationConfig& a = c.adaptation;
  const LinkageParams& lp = rc.geometry;
  const MotorParams& mp = rc.motor;
  const SimConfig& s = rc.sim;
  const ReferenceTrajectory& r = rc.reference;
  const DisturbanceProfile& d = rc.disturbance;

  std::ostringstream o;
  o << "[plant]\nm = " << f(lp.m) << "\nD = " << f(rc.damping) << "\nk = " << f(lp.k) << "\ng = " << f(lp.g)
    << "\nmass_ratio = " << f(rc.mass_ratio) << "\n\n";
  o << "[motor]\nR = " << f(mp.R) << "\nL_ind = " << f(mp.L_ind) << "\nK_T = " << f(mp.K_T)
    << "\nK_EMF = " << f(mp.K_EMF) << "\nB_M = " << f(mp.B_M) << "\nJ_M = " << f(mp.J_M)
    << "\nJ_s = " << f(mp.J_s) << "\nm0 = " << f(mp.m0) << "\nn = " << f(mp.n) << "\nlead = " << f(mp.lead)
    << "\neta1 = " << f(mp.eta1) << "\neta2 = " << f(mp.eta2)
    << "\nzeta = " << (rc.zeta ? f(*rc.zeta) : std::string("computed")) << "\n\n";
  o << "[geometry]\nd1 = " << f(lp.d1) << "\nd2 = " << f(lp.d2) << "\nd3 = " << f(lp.d3) << "\nd4 = " << f(lp.d4)
    << "\nd5 = " << f(lp.d5) << "\nd6 = " << f(lp.d6) << "\nd7 = " << f(lp.d7)
    << "\nbeta_offset = " << f(lp.beta_offset) << "\nphi_min = " << f(lp.phi_min)
    << "\nphi_max = " << f(lp.phi_max) << "\n\n";
  o << "[model]\nm = " << f(rc.model.m) << "\nD = " << f(rc.model.damping) << "\nd3 = " << f(rc.model.d3)
    << "\ng = " << f(rc.model.g) << "\n\n";
  o << "[controller]\nA_m = " << fmt_mat(c.A_m) << "\nB_m = " << fmt_vec(c.B_m) << "\nQ = " << fmt_mat(a.Q)
    << "\nuse_printed_P = " << fmt_bool(c.use_printed_P) << "\ndrift_without_zeta = " << fmt_bool(c.drift_without_zeta) << "\n\n";
  o << "[adaptation]\ngamma_x = " << fmt_mat(a.gamma_x) << "\ngamma_r = " << f(a.gamma_r)
    << "\ngamma_theta = " << fmt_mat(a.gamma_theta)
    << "\nintegrator = " << detail::enum_name(detail::kIntegrators, c.integrator)
    << "\nfreeze = " << fmt_bool(c.freeze_gains) << "\nK_x0 = " << fmt_vec(c.initial_gains.K_x)
    << "\nK_r0 = " << f(c.initial_gains.K_r) << "\ntheta0 = " << fmt_vec(c.initial_gains.theta) << "\n\n";
  o << "[backstepping]\nk1 = " << f(a.k1) << "\nk2 = " << f(a.k2)
    << "\nderivative_tau = " << f(c.derivative_tau) << "\n\n";
  o << "[simulation]\ndt_physics = " << f(s.dt_physics) << "\ndt_control = " << f(s.dt_control)
    << "\nduration = " << f(s.duration) << "\nx1_0 = " << f(s.initial.x1) << "\nx2_0 = " << f(s.initial.x2)
    << "\nz1_0 = " << f(s.initial.z1) << "\nz2_0 = " << f(s.initial.z2)
    << "\nxm1_0 = " << f(s.reference_initial[0]) << "\nxm2_0 = " << f(s.reference_initial[1])
    << "\nmode = " << detail::enum_name(detail::kSimModes, s.mode)
    << "\ntransient_cutoff = " << f(s.transient_cutoff) << "\n\n";
  o << "[reference]\nkind = " << detail::enum_name(detail::kReferenceKinds, r.kind)
    << "\namplitude = " << f(r.amplitude) << "\namplitude2 = " << f(r.amplitude2) << "\nperiod = " << f(r.period)
    << "\nphase = " << f(r.phase) << "\nphase2 = " << f(r.phase2) << "\noffset = " << f(r.offset)
    << "\nvalue = " << f(r.value) << "\nstep_time = " << f(r.step_time) << "\nfile = " << r.file << "\n\n";
  o << "[disturbance]\nkind = " << detail::enum_name(detail::kDisturbanceKinds, d.kind)
    << "\namplitude = " << f(d.amplitude) << "\nfrequency = " << f(d.frequency) << "\nphase = " << f(d.phase)
    << "\npoints = ";
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    o << (i ? ", " : "") << f(d.points[i].first) << ':' << f(d.points[i].second);
  }
  o << "\n\n[output]\ndir = " << rc.output.dir << "\nplots = " << fmt_bool(rc.output.plots) << "\n";
  return o.str();
}

}  // namespace sea
