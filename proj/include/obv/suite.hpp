#pragma once

// Suite configuration, the named verification suites, and JSON/CSV report
// emission for the command-line driver.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "obv/bourgeois.hpp"
#include "obv/catalog.hpp"
#include "obv/contact.hpp"
#include "obv/liouville.hpp"
#include "obv/monodromy.hpp"
#include "obv/prelagrangian.hpp"
#include "obv/report.hpp"

namespace obv {

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration or command line; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"g1_s3",     "g2_s3",       "g2_s5", "disk_hypersurface",
                                              "subcritical", "prelag", "all"};
  return names;
}

struct SuiteConfig {
  std::string suite = "g1_s3";
  std::uint64_t seed = 7;
  std::size_t samples = 2000;           // contact and adapted checks
  std::size_t binding_samples = 100;
  std::size_t form_samples = 200;       // Bourgeois, spinning field, filling
  std::size_t property_samples = 40;    // nested finite differences
  std::size_t flow_samples = 200;
  std::size_t compare_samples = 100;
  std::size_t twist_samples = 200;
  std::size_t coordinate_samples = 1000;
  double tolerance = 1e-3;              // margin tolerance for positivity checks
  double flow_step = 1e-4;
  double compare_step = 1e-3;
  std::vector<double> eps_grid{0.1, 0.5, 1.0};
  std::vector<double> filling_eps{0.0, 0.01, 0.05, 0.1};
  std::vector<double> T_grid = default_T_grid();
  std::vector<double> tau_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  double weinstein_delta_plane = 0.2;
  double weinstein_delta_cotangent = 0.35;
  std::string out;
  std::string format = "json";

  void validate() const {
    bool known = false;
    for (const auto& s : suite_names()) known = known || s == suite;
    if (!known) throw ConfigError("field 'suite': unknown suite '" + suite + "'");
    auto positive_count = [](std::size_t v, const char* field) {
      if (v < 1) throw ConfigError(std::string("field '") + field + "': must be at least 1");
    };
    positive_count(samples, "samples");
    positive_count(binding_samples, "binding_samples");
    positive_count(form_samples, "form_samples");
    positive_count(property_samples, "property_samples");
    positive_count(flow_samples, "flow_samples");
    positive_count(compare_samples, "compare_samples");
    positive_count(twist_samples, "twist_samples");
    positive_count(coordinate_samples, "coordinate_samples");
    auto positive = [](double v, const char* field) {
      if (!(v > 0.0)) throw ConfigError(std::string("field '") + field + "': must be positive");
    };
    positive(tolerance, "tolerance");
    positive(flow_step, "flow_step");
    positive(compare_step, "compare_step");
    positive(weinstein_delta_plane, "weinstein_delta_plane");
    positive(weinstein_delta_cotangent, "weinstein_delta_cotangent");
    if (eps_grid.empty() || filling_eps.empty() || T_grid.empty() || tau_grid.empty())
      throw ConfigError("grids must be non-empty");
    for (double e : eps_grid) positive(e, "eps_grid");
    for (double e : filling_eps)
      if (!(e >= 0.0)) throw ConfigError("field 'filling_eps': entries must be non-negative");
    for (double T : T_grid)
      if (!(T >= 0.0)) throw ConfigError("field 'T_grid': entries must be non-negative");
    if (format != "json" && format != "csv") throw ConfigError("field 'format': must be json or csv");
  }
};

namespace detail {

inline std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parse a JSON config object. Unknown keys and wrong types are errors.
inline SuiteConfig parse_config(const std::string& text, SuiteConfig cfg = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error at " + detail::line_of(text, e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const nlohmann::json& v = it.value();
    try {
      if (k == "suite") cfg.suite = v.get<std::string>();
      else if (k == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (k == "samples") cfg.samples = v.get<std::size_t>();
      else if (k == "binding_samples") cfg.binding_samples = v.get<std::size_t>();
      else if (k == "form_samples") cfg.form_samples = v.get<std::size_t>();
      else if (k == "property_samples") cfg.property_samples = v.get<std::size_t>();
      else if (k == "flow_samples") cfg.flow_samples = v.get<std::size_t>();
      else if (k == "compare_samples") cfg.compare_samples = v.get<std::size_t>();
      else if (k == "twist_samples") cfg.twist_samples = v.get<std::size_t>();
      else if (k == "coordinate_samples") cfg.coordinate_samples = v.get<std::size_t>();
      else if (k == "tolerance") cfg.tolerance = v.get<double>();
      else if (k == "flow_step") cfg.flow_step = v.get<double>();
      else if (k == "compare_step") cfg.compare_step = v.get<double>();
      else if (k == "eps_grid") cfg.eps_grid = v.get<std::vector<double>>();
      else if (k == "filling_eps") cfg.filling_eps = v.get<std::vector<double>>();
      else if (k == "T_grid") cfg.T_grid = v.get<std::vector<double>>();
      else if (k == "tau_grid") cfg.tau_grid = v.get<std::vector<double>>();
      else if (k == "weinstein_delta_plane") cfg.weinstein_delta_plane = v.get<double>();
      else if (k == "weinstein_delta_cotangent") cfg.weinstein_delta_cotangent = v.get<double>();
      else if (k == "out") cfg.out = v.get<std::string>();
      else if (k == "format") cfg.format = v.get<std::string>();
      else throw ConfigError("field '" + k + "': unknown key");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("field '" + k + "': " + e.what());
    }
  }
  return cfg;
}

inline SuiteConfig load_config(const std::filesystem::path& path, SuiteConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(cfg));
}

inline nlohmann::json config_to_json(const SuiteConfig& c) {
  return {{"suite", c.suite},
          {"seed", c.seed},
          {"samples", c.samples},
          {"binding_samples", c.binding_samples},
          {"form_samples", c.form_samples},
          {"property_samples", c.property_samples},
          {"flow_samples", c.flow_samples},
          {"compare_samples", c.compare_samples},
          {"twist_samples", c.twist_samples},
          {"coordinate_samples", c.coordinate_samples},
          {"tolerance", c.tolerance},
          {"flow_step", c.flow_step},
          {"compare_step", c.compare_step},
          {"eps_grid", c.eps_grid},
          {"filling_eps", c.filling_eps},
          {"T_grid", c.T_grid},
          {"tau_grid", c.tau_grid},
          {"weinstein_delta_plane", c.weinstein_delta_plane},
          {"weinstein_delta_cotangent", c.weinstein_delta_cotangent},
          {"format", c.format}};
}

// ---------------------------------------------------------------------------
// Suites.

namespace detail {

/// Runs one check; an exception becomes a failed report carrying the message.
class SuiteRun {
 public:
  explicit SuiteRun(const SuiteConfig& cfg) : cfg_(cfg) {}

  void add(const std::string& name, const std::function<CheckReport()>& fn) {
    CheckReport r;
    Stopwatch sw;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = CheckReport{};
      r.name = name;
      r.fail(std::string("error: ") + e.what());
      r.wall_time_ms = sw.ms();
      r.finalize();
    }
    r.seed = cfg_.seed;
    reports_.push_back(std::move(r));
  }

  std::uint64_t seed(std::uint64_t salt) const { return splitmix64(cfg_.seed ^ splitmix64(salt)); }
  std::vector<CheckReport> take() { return std::move(reports_); }

 private:
  const SuiteConfig& cfg_;
  std::vector<CheckReport> reports_;
};

inline std::vector<Vec> off_binding_samples(const RepresentationData& rep, std::size_t n, std::uint64_t seed,
                                            double exclusion = 1e-3) {
  const DefiningFunction f = rep.f;
  return sample_where(rep.contact.manifold, n, seed, [f, exclusion](const Vec& p) { return std::abs(f(p)) >= exclusion; });
}

/// Checks shared by the sphere suites: contact, adapted, representation,
/// regularized volume, Bourgeois contact and structure, ε-scaling, spinning field.
inline void sphere_checks(SuiteRun& run, const SuiteConfig& cfg, const RepresentationData& rep, const std::string& tag) {
  const auto off = sample(rep.contact.manifold, cfg.samples, run.seed(1));
  const auto on = sample(binding(rep), cfg.binding_samples, run.seed(2));
  const auto off_forms = off_binding_samples(rep, cfg.form_samples, run.seed(3));
  run.add("contact " + tag, [&] {
    auto r = verify_contact(rep.contact, off, cfg.tolerance, 1, "contact condition " + tag);
    return r;
  });
  run.add("adapted " + tag, [&] {
    auto r = verify_adapted(rep.contact, rep.f, off, on, cfg.tolerance);
    r.name = "adapted open book " + tag;
    return r;
  });
  run.add("representation " + tag, [&] { return verify_representation(rep, off, on, cfg.tolerance, "representation " + tag); });
  run.add("regularized volume " + tag, [&] {
    auto r = openbook_volume_check(rep, off_forms, on, cfg.tolerance);
    r.name += " " + tag;
    return r;
  });
  const BourgeoisFormData bf = bourgeois_form(rep);
  const auto torus_pts = sample(bf.total, cfg.form_samples, run.seed(4));
  run.add("bourgeois contact " + tag, [&] {
    BgOptions o;
    o.tolerance = cfg.tolerance;
    auto r = verify_bg_contact(bf, torus_pts, o);
    r.name += " " + tag;
    return r;
  });
  run.add("bourgeois structure " + tag, [&] {
    auto r = bg_structure_check(bf, torus_pts);
    r.name += " " + tag;
    return r;
  });
  run.add("eps scaling " + tag, [&] {
    auto r = eps_scaling_check(rep, torus_pts, cfg.eps_grid);
    r.name += " " + tag;
    return r;
  });
  run.add("spinning field " + tag, [&] {
    auto r = spinning_field_check(SpinningField(rep), off_forms);
    r.name += " " + tag;
    return r;
  });
}

inline void filling_check(SuiteRun& run, const SuiteConfig& cfg, const RepresentationData& rep, const std::string& tag) {
  run.add("weak filling " + tag, [&] {
    const int n = rep.contact.manifold.ambient_dim / 2;
    FillingPolyData fp{rep, catalog::omega0(n), cfg.filling_eps, cfg.T_grid};
    const auto pts = sample(product_with_torus(rep.contact.manifold), cfg.form_samples, run.seed(5));
    auto r = filling_polynomial(fp, pts, cfg.tolerance);
    r.name += " " + tag;
    return r;
  });
}

inline void suite_g1_s3(SuiteRun& run, const SuiteConfig& cfg) {
  const RepresentationData rep = catalog::standard_g1(2);
  sphere_checks(run, cfg, rep, "(alpha0, z1) on S3");
  const VecField rot = first_coordinate_rotation(2);
  run.add("spinning property of the Hopf rotation", [&] {
    const auto off = sample(rep.contact.manifold, cfg.property_samples, run.seed(6));
    const auto on = sample(binding(rep), cfg.property_samples, run.seed(7));
    auto r = spinning_property_check(rep, rot, off, on);
    r.name += " (Hopf rotation, z1)";
    return r;
  });
  run.add("time-one return (z1)", [&] {
    const auto starts = sample(rep.contact.manifold, cfg.flow_samples, run.seed(8));
    return flow_return_check(rep.contact.manifold, rot, starts, cfg.flow_step, 1e-7,
                             "time-one return of the Hopf rotation (z1)");
  });
  filling_check(run, cfg, rep, "(alpha0, z1) on S3");
}

inline void suite_g2_s3(SuiteRun& run, const SuiteConfig& cfg) {
  const RepresentationData rep = catalog::standard_g2(2);
  sphere_checks(run, cfg, rep, "(alpha0, z1^2+z2^2) on S3");
  const SpinningField Y(rep);
  run.add("analytic flow", [&] {
    const DefiningFunction f = rep.f;
    const auto starts = sample_where(rep.contact.manifold, cfg.flow_samples, run.seed(9), [f](const Vec& p) {
      const double g0 = std::abs(f(p));
      return g0 >= 0.05 && g0 <= 0.95;
    });
    AnalyticFlowOptions o;
    o.step = cfg.flow_step;
    return analytic_flow_check(Y, starts, o);
  });
  run.add("monodromy compare", [&] {
    const auto disk = sample(disk_bundle(2, 1.0 - 1e-3), cfg.compare_samples, run.seed(10));
    CompareOptions o;
    o.flow.step = cfg.compare_step;
    return monodromy_compare(Y, disk, o);
  });
  run.add("dehn twist", [&] {
    const Submanifold D = disk_bundle(2);
    const auto in = sample(D, cfg.twist_samples, run.seed(11));
    std::vector<Vec> bd = sample(D, cfg.binding_samples, run.seed(12));
    for (Vec& x : bd) {
      const Vec p = x.tail(2);
      if (p.norm() > 0) x.tail(2) = p / p.norm();
    }
    return dehn_twist_check(standard_twist(), 2, in, bd);
  });

  // inverse monodromy with the profiled defining function
  const RepresentationData prof{rep.contact, catalog::profiled(rep.f)};
  const auto inv_pts = sample(rep.contact.manifold, cfg.samples, run.seed(13));
  std::optional<double> C;
  run.add("inverse form search", [&] {
    InverseSearch s = find_inverse_constant(prof, inv_pts, cfg.tolerance);
    C = s.C;
    CheckReport r = s.at_C;
    r.name = "inverse form contact with reversed orientation";
    for (const auto& [c, m] : s.tried) r.metrics["margin_at_C_" + std::to_string(static_cast<int>(c))] = m;
    return r;
  });
  run.add("inverse form at 2C", [&] {
    if (!C) throw PreconditionError("no admissible C was found");
    auto r = verify_contact(inverse_form(prof, 2 * *C), inv_pts, cfg.tolerance, -1,
                            "inverse form contact with reversed orientation at 2C");
    r.metrics["C"] = 2 * *C;
    return r;
  });
  run.add("inverse restriction", [&] {
    if (!C) throw PreconditionError("no admissible C was found");
    const auto off = off_binding_samples(prof, cfg.form_samples, run.seed(14));
    const auto on = sample(binding(rep), cfg.binding_samples, run.seed(15));
    return inverse_restriction_check(prof, *C, off, on);
  });
  run.add("isotopy", [&] {
    if (!C) throw PreconditionError("no admissible C was found");
    const auto pts = sample(product_with_torus(rep.contact.manifold), cfg.form_samples, run.seed(16));
    IsotopyOptions o;
    o.tolerance = cfg.tolerance;
    return isotopy_check(prof, *C, cfg.tau_grid, pts, o);
  });
  filling_check(run, cfg, rep, "(alpha0, z1^2+z2^2) on S3");
}

inline void suite_g2_s5(SuiteRun& run, const SuiteConfig& cfg) {
  sphere_checks(run, cfg, catalog::standard_g2(3), "(alpha0, z1^2+z2^2+z3^2) on S5");
  const RepresentationData g1 = catalog::standard_g1(3);
  const auto off = sample(g1.contact.manifold, cfg.samples, run.seed(17));
  const auto on = sample(binding(g1), cfg.binding_samples, run.seed(18));
  run.add("adapted (alpha0, z1) on S5", [&] {
    auto r = verify_adapted(g1.contact, g1.f, off, on, cfg.tolerance);
    r.name = "adapted open book (alpha0, z1) on S5";
    return r;
  });
  run.add("regularized volume (alpha0, z1) on S5", [&] {
    const auto offf = off_binding_samples(g1, cfg.form_samples, run.seed(19));
    auto r = openbook_volume_check(g1, offf, on, cfg.tolerance);
    r.name += " (alpha0, z1) on S5";
    return r;
  });
}

inline void suite_disk_hypersurface(SuiteRun& run, const SuiteConfig& cfg) {
  const LiouvilleDomainData ball = ball_domain(1, 4);
  const LiouvilleDomainData ball4 = ball_domain(2, 4);
  const LiouvilleDomainData cot = cotangent_disk_domain(1);
  const LiouvilleDomainData cot2 = cotangent_disk_domain(2);
  for (const LiouvilleDomainData* d : {&ball, &ball4, &cot, &cot2}) {
    run.add("completion " + d->name, [&, d] {
      return completion_check(*d, sample(d->F, cfg.form_samples, run.seed(20)),
                              boundary_samples(*d, cfg.binding_samples, run.seed(21)), 0.0);
    });
  }
  run.add("identification ball", [&] {
    auto pts = sample(ball4.F, cfg.form_samples, run.seed(22));
    for (Vec& p : pts) p *= 0.7 / p.norm();
    return identification_check(ball4, IdealExample::Ball, pts);
  });
  run.add("identification cotangent", [&] {
    auto pts = sample(cot2.F, cfg.form_samples, run.seed(23));
    for (Vec& p : pts) p.tail(2) *= 0.5 / p.tail(2).norm();
    return identification_check(cot2, IdealExample::CotangentDisk, pts);
  });
  for (const LiouvilleDomainData* d : {&ball, &ball4}) {
    run.add("page volume " + d->name, [&, d] { return page_volume_identity(*d, sample(d->F, cfg.form_samples, run.seed(24))); });
  }
  std::optional<Hypersurface> h;
  run.add("hypersurface build", [&] {
    h = hypersurface_build(ball, sample(ball.F, cfg.form_samples, run.seed(25)),
                           boundary_samples(ball, cfg.binding_samples, run.seed(26)));
    return transversality_check(*h, sample(h->V, cfg.samples, run.seed(27)));
  });
  if (!h) return;
  const auto off = sample(h->V, cfg.samples, run.seed(27));
  const auto on = sample(hypersurface_binding(*h), cfg.binding_samples, run.seed(28));
  run.add("contact V", [&] { return verify_contact(h->contact, off, cfg.tolerance, 1, "contact condition on V"); });
  run.add("adapted V", [&] {
    auto r = verify_adapted(h->contact, h->f, off, on, cfg.tolerance);
    r.name = "adapted open book on V";
    return r;
  });
  run.add("representation V", [&] { return verify_representation(h->representation(), off, on, cfg.tolerance, "representation on V"); });
  run.add("spinning V", [&] {
    const auto offp = sample(h->V, cfg.property_samples, run.seed(29));
    auto r = spinning_property_check(h->representation(), angular_rotation(*h), offp, on);
    r.name += " (2 pi d/d theta on V)";
    return r;
  });
  run.add("trivial monodromy V", [&] {
    const auto starts = sample(h->V, std::min<std::size_t>(cfg.flow_samples, 50), run.seed(30));
    return trivial_monodromy_check(*h, starts);
  });
}

inline void suite_subcritical(SuiteRun& run, const SuiteConfig& cfg) {
  run.add("subcritical coordinates", [&] {
    const auto pts = annulus_samples(6, 4, 0.0, 2.0, cfg.coordinate_samples, run.seed(31));
    return subcritical_check(weinstein_plane(cfg.weinstein_delta_plane), pts);
  });
  run.add("weinstein plane", [&] {
    return weinstein_check(weinstein_plane(cfg.weinstein_delta_plane),
                           annulus_samples(2, 2, 0.1, 2.0, cfg.form_samples, run.seed(32)));
  });
  run.add("weinstein cotangent", [&] {
    return weinstein_check(weinstein_cotangent_torus(cfg.weinstein_delta_cotangent),
                           annulus_samples(4, 2, 0.1, 2.0, cfg.form_samples, run.seed(33), 2));
  });
}

inline void suite_prelag(SuiteRun& run, const SuiteConfig& cfg) {
  const PreLagrangianData pl = real_circle_prelagrangian();
  run.add("prelagrangian real circle", [&] { return verify_prelagrangian(pl, sample(pl.P, cfg.form_samples, run.seed(34))); });
  run.add("prelagrangian binding", [&] {
    const PreLagrangianData bl = binding_prelagrangian();
    const auto pts = sample(bl.P, cfg.form_samples, run.seed(35));
    auto r = verify_prelagrangian(bl, pts);
    const double tp = torus_part_on_binding(pts);
    r.metrics["torus_part_on_P"] = tp;
    if (tp != 0.0) r.fail("f_x or f_y is nonzero on K x T2");
    return r.finalize();
  });
  run.add("legendrian real circle", [&] {
    const Submanifold L = circle_in_sphere(CircleFixture::RealCircle);
    return legendrian_check(L, catalog::alpha0(2), catalog::g2(2), 3, sample(L, cfg.form_samples, run.seed(36)));
  });
  run.add("straighten loop", [&] {
    const LoopData loop =
        real_circle_loop([](double t) { return t + 0.5 * std::sin(t); }, [](double t) { return 1.0 + 0.5 * std::cos(t); });
    return straighten_loop(loop, pl, coordinate_shift(6, 4)).report;
  });
}

}  // namespace detail

/// Runs the selected suite; "all" runs every suite in dependency order.
inline std::vector<CheckReport> run_suite(const SuiteConfig& cfg) {
  cfg.validate();
  detail::SuiteRun run(cfg);
  const std::vector<std::pair<std::string, void (*)(detail::SuiteRun&, const SuiteConfig&)>> table{
      {"g1_s3", detail::suite_g1_s3},
      {"g2_s3", detail::suite_g2_s3},
      {"g2_s5", detail::suite_g2_s5},
      {"disk_hypersurface", detail::suite_disk_hypersurface},
      {"subcritical", detail::suite_subcritical},
      {"prelag", detail::suite_prelag}};
  for (const auto& [name, fn] : table)
    if (cfg.suite == "all" || cfg.suite == name) fn(run, cfg);
  return run.take();
}

inline bool all_pass(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

inline nlohmann::json report_to_json(const CheckReport& r) {
  nlohmann::json j{{"name", r.name},
                   {"n_samples", r.n_samples},
                   {"min_margin", nullptr},
                   {"max_residual", nullptr},
                   {"tolerance", r.tolerance},
                   {"residual_tolerance", r.residual_tolerance},
                   {"pass", r.pass},
                   {"seed", r.seed},
                   {"wall_time_ms", r.wall_time_ms},
                   {"anchor", r.anchor},
                   {"detail", r.detail},
                   {"failures", r.failures},
                   {"metrics", r.metrics}};
  if (r.min_margin) j["min_margin"] = *r.min_margin;
  if (r.max_residual) j["max_residual"] = *r.max_residual;
  if (!r.columns.empty()) {
    j["columns"] = r.columns;
    j["rows"] = r.rows;
  }
  return j;
}

inline nlohmann::json reports_to_json(const SuiteConfig& cfg, const std::vector<CheckReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  return {{"schema_version", kSchemaVersion},
          {"suite", cfg.suite},
          {"seed", cfg.seed},
          {"config", config_to_json(cfg)},
          {"all_pass", all_pass(reports)},
          {"reports", arr}};
}

inline std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

namespace detail {

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream o(p);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  o << text;
  if (!o) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace detail

/// One row per check.
inline std::string summary_csv(const std::vector<CheckReport>& reports) {
  std::ostringstream sum;
  sum << "name,pass,n_samples,min_margin,max_residual,tolerance,residual_tolerance,seed\n";
  for (const auto& r : reports) {
    sum << detail::csv_quote(r.name) << ',' << (r.pass ? 1 : 0) << ',' << r.n_samples << ','
        << (r.min_margin ? detail::csv_number(*r.min_margin) : "") << ','
        << (r.max_residual ? detail::csv_number(*r.max_residual) : "") << ',' << detail::csv_number(r.tolerance) << ','
        << detail::csv_number(r.residual_tolerance) << ',' << r.seed << '\n';
  }
  return sum.str();
}

/// Writes report.json, or summary.csv plus one CSV per check that carries a
/// per-point table. Returns the written paths.
inline std::vector<std::filesystem::path> emit_report(const SuiteConfig& cfg, const std::vector<CheckReport>& reports,
                                                      const std::filesystem::path& dir, const std::string& format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (format == "json") {
    const auto p = dir / "report.json";
    detail::write_file(p, reports_to_json(cfg, reports).dump(2) + "\n");
    written.push_back(p);
    return written;
  }
  if (format != "csv") throw ConfigError("format must be json or csv");
  const std::string sum = summary_csv(reports);
  std::set<std::string> used;
  for (const auto& r : reports) {
    if (r.columns.empty()) continue;
    std::string base = slug(r.name);
    std::string name = base;
    for (int k = 2; used.count(name); ++k) name = base + "_" + std::to_string(k);
    used.insert(name);
    std::ostringstream t;
    for (std::size_t c = 0; c < r.columns.size(); ++c) t << (c ? "," : "") << r.columns[c];
    t << '\n';
    for (const auto& row : r.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) t << (c ? "," : "") << detail::csv_number(row[c]);
      t << '\n';
    }
    const auto p = dir / (name + ".csv");
    detail::write_file(p, t.str());
    written.push_back(p);
  }
  const auto p = dir / "summary.csv";
  detail::write_file(p, sum);
  written.insert(written.begin(), p);
  return written;
}

}  // namespace obv
