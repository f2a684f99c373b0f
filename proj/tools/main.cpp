// casimir: batch front end for xi scans, energies, zeta values, forces,
// separation sweeps, refinement studies and the multipole oracle.

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "casimir/functional.hpp"
#include "casimir/mesh_io.hpp"
#include "casimir/parallel.hpp"
#include "output.hpp"
#include "scene.hpp"

using namespace casimir;
using namespace casimir::cli;
using nlohmann::json;

namespace {

struct Options {
  std::string scene_path;
  std::string out;
  int threads = 0;
  std::vector<double> kappas;
  bool oracle = false;
  int lmax = 0;  // 0: scene value
  double s = -0.5;
  double unit = 1.0;
  int body = 0;  // 1-based; 0: last body
  std::string axis = "x";
  double h = 0.05;
  std::vector<double> distances;
  std::vector<int> subdivs{1, 2, 3};
  double radius = 1.0;
  int subdiv = 2;
  std::string format;
};

struct Context {
  SceneConfig scene;
  Metadata meta;
  std::string out;
};

Context load(const Options& o, const std::string& command) {
  if (o.scene_path.empty()) throw ConfigError("--scene is required");
  Context c;
  c.scene = SceneConfig::load(o.scene_path);
  if (o.lmax > 0) c.scene.solver.lmax_oracle = o.lmax;
  if (o.threads > 0) {
    set_default_threads(o.threads);
    c.scene.solver.threads = o.threads;
  }
  c.out = o.out.empty() ? c.scene.output.path : o.out;
  c.meta.command = command;
  c.meta.config = json{{"scene", c.scene.resolved()}};
  return c;
}

std::vector<Sphere> require_spheres(const SceneConfig& scene) {
  auto s = scene.spheres();
  if (!s) throw ConfigError("the oracle needs a scene made of sphere bodies only");
  if (s->size() > 2) throw ConfigError("the oracle supports at most two spheres");
  return *s;
}

double relative_gap(double value, double reference) {
  if (reference != 0.0) return std::abs(value - reference) / std::abs(reference);
  return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

// Explicit list, or the energy rule nodes (delta = 1 for a single body).
std::vector<double> kappa_grid(const Options& o, const Context& c) {
  for (double k : o.kappas) {
    if (!(k > 0.0)) throw ConfigError("--kappa values must be positive");
  }
  if (!o.kappas.empty()) return o.kappas;
  const double delta = c.meta.delta.value_or(1.0);
  return energy_rule(delta, c.scene.solver).nodes;
}

Vec3 parse_axis(const std::string& text) {
  if (text == "x") return Vec3::UnitX();
  if (text == "y") return Vec3::UnitY();
  if (text == "z") return Vec3::UnitZ();
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--axis: cannot parse '" + text + "'");
    }
  }
  if (v.size() != 3 || Vec3(v[0], v[1], v[2]).norm() == 0.0) throw ConfigError("--axis needs x, y, z or three numbers");
  return Vec3(v[0], v[1], v[2]).normalized();
}

int body_index(const Options& o, int n) {
  const int b = o.body == 0 ? n : o.body;
  if (b < 1 || b > n) throw ConfigError("--body must lie in [1, " + std::to_string(n) + "]");
  return b - 1;
}

json energy_json(const EnergyResult& e, double unit) {
  return {{"energy", e.energy},
          {"energy_scaled", e.energy * unit},
          {"unit_factor", unit},
          {"quadrature", e.quadrature},
          {"head", e.head},
          {"tail", e.tail},
          {"quad_error", e.quad_error},
          {"head_error", e.head_error},
          {"tail_error", e.tail_error},
          {"total_error", e.total_error()},
          {"nodes", e.nodes},
          {"kappa_min", e.curve.rule.kappa_min},
          {"kappa_max", e.curve.rule.kappa_max},
          {"tail_rate", e.curve.tail_rate}};
}

void cmd_xi(const Options& o, bool oracle_only) {
  Context c = load(o, oracle_only ? "oracle xi" : "xi");
  const Assembly a = c.scene.assembly();
  c.meta.describe(a);
  const auto kappas = kappa_grid(o, c);
  c.meta.config["kappa"] = kappas;
  c.meta.config["oracle"] = o.oracle || oracle_only;
  std::optional<std::vector<Sphere>> spheres;
  if (o.oracle || oracle_only) spheres = require_spheres(c.scene);

  std::vector<XiSample> bem(kappas.size());
  if (!oracle_only) {
    c.meta.timings.start("bem");
    const EdgeBasis basis(a);
    parallel_for(static_cast<int>(kappas.size()),
                 [&](int i) { bem[i] = xi(assemble(basis, kappas[i], c.scene.solver.assembly)); },
                 c.scene.solver.threads);
    c.meta.timings.stop();
  }
  std::vector<OracleXi> orc(kappas.size());
  if (spheres) {
    c.meta.timings.start("oracle");
    for (std::size_t i = 0; i < kappas.size(); ++i) orc[i] = oracle_xi(*spheres, kappas[i], c.scene.solver.lmax_oracle);
    c.meta.timings.stop();
  }

  std::vector<std::string> cols;
  if (oracle_only) {
    cols = {"kappa", "xi_oracle", "truncation_estimate"};
  } else {
    cols = {"kappa", "xi", "cond_ZD", "schur_max_sv"};
    if (spheres) cols.insert(cols.end(), {"xi_oracle", "rel_gap"});
  }
  CsvTable table(cols);
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (oracle_only) {
      table.add_row({kappas[i], orc[i].sample.xi, orc[i].truncation_estimate});
      continue;
    }
    std::vector<double> row{kappas[i], bem[i].xi, bem[i].cond_zd, bem[i].schur_max_sv};
    if (spheres) {
      row.push_back(orc[i].sample.xi);
      row.push_back(relative_gap(bem[i].xi, orc[i].sample.xi));
    }
    table.add_row(row);
  }
  emit(c.out, [&](std::ostream& out) { table.write(out, c.meta); });
}

void cmd_energy(const Options& o, bool oracle_only) {
  Context c = load(o, oracle_only ? "oracle energy" : "energy");
  const Assembly a = c.scene.assembly();
  c.meta.describe(a);
  c.meta.config["oracle"] = o.oracle || oracle_only;
  c.meta.timings.start("energy");
  const EnergyResult e = (o.oracle || oracle_only) ? oracle_energy(require_spheres(c.scene), c.scene.solver)
                                                   : casimir_energy(a, c.scene.solver);
  c.meta.timings.stop();
  emit(c.out, [&](std::ostream& out) { write_json(out, c.meta, energy_json(e, o.unit)); });
}

void cmd_zeta(const Options& o) {
  Context c = load(o, "zeta");
  const Assembly a = c.scene.assembly();
  c.meta.describe(a);
  c.meta.config["s"] = o.s;
  c.meta.config["oracle"] = o.oracle;
  c.meta.timings.start("zeta");
  double z = 0.0;
  if (o.oracle) {
    if (!(o.s > -3.0 && o.s < 0.0)) throw ConfigError("s must lie in (-3, 0)");
    const auto spheres = require_spheres(c.scene);
    z = spheres.size() < 2 ? 0.0 : zeta_from_curve(oracle_energy(spheres, c.scene.solver).curve, o.s);
  } else {
    z = relative_zeta(a, o.s, c.scene.solver);
  }
  c.meta.timings.stop();
  emit(c.out, [&](std::ostream& out) { write_json(out, c.meta, {{"s", o.s}, {"zeta", z}}); });
}

json force_json(const ForceResult& f) {
  return {{"force", f.force},
          {"force_half", f.force_half},
          {"richardson", f.richardson},
          {"error", f.error},
          {"h", f.h}};
}

void cmd_force(const Options& o) {
  Context c = load(o, "force");
  const Assembly a = c.scene.assembly();
  c.meta.describe(a);
  const int body = body_index(o, a.size());
  const Vec3 axis = parse_axis(o.axis);
  c.meta.config["body"] = body + 1;
  c.meta.config["axis"] = {axis.x(), axis.y(), axis.z()};
  c.meta.config["h"] = o.h;
  c.meta.config["oracle"] = o.oracle;
  c.meta.timings.start("force");
  ForceResult f;
  if (o.oracle) {
    const auto spheres = require_spheres(c.scene);
    if (spheres.size() < 2) throw ConfigError("force needs at least two bodies");
    const SemiInfiniteRule rule = energy_rule(min_separation(a), c.scene.solver);
    f = central_difference_force(
        [&](double t) {
          auto moved = spheres;
          moved[body].center += t * axis;
          return oracle_energy(moved, c.scene.solver, rule);
        },
        o.h);
  } else {
    f = casimir_force(a, body, axis, o.h, c.scene.solver);
  }
  c.meta.timings.stop();
  emit(c.out, [&](std::ostream& out) { write_json(out, c.meta, force_json(f)); });
}

// Moves body `b` along the line from body 1's centroid so that the centroid
// distance equals d.
SceneConfig at_distance(const SceneConfig& base, const Assembly& a, int b, double d) {
  const Vec3 c0 = a.body(0).centroid();
  const Vec3 cb = a.body(b).centroid();
  Vec3 dir = cb - c0;
  const double d0 = dir.norm();
  dir = d0 > 0.0 ? Vec3(dir / d0) : Vec3(Vec3::UnitX());
  SceneConfig moved = base;
  moved.bodies[b].translate += (d - d0) * dir;
  return moved;
}

void cmd_sweep(const Options& o) {
  Context c = load(o, "sweep");
  const Assembly a = c.scene.assembly();
  c.meta.describe(a);
  if (a.size() < 2) throw ConfigError("sweep needs at least two bodies");
  if (o.distances.empty()) throw ConfigError("--distances is required");
  const int body = body_index(o, a.size());
  if (body == 0) throw ConfigError("sweep moves a body other than body 1");
  c.meta.config["body"] = body + 1;
  c.meta.config["distances"] = o.distances;
  c.meta.config["oracle"] = o.oracle;
  CsvTable table({"distance", "delta", "energy", "total_error", "tail_rate"});
  c.meta.timings.start("sweep");
  for (double d : o.distances) {
    const SceneConfig moved = at_distance(c.scene, a, body, d);
    const Assembly ma = moved.assembly();
    const EnergyResult e =
        o.oracle ? oracle_energy(require_spheres(moved), moved.solver) : casimir_energy(ma, moved.solver);
    table.add_row({d, min_separation(ma), e.energy, e.total_error(), e.curve.tail_rate});
  }
  c.meta.timings.stop();
  emit(c.out, [&](std::ostream& out) { table.write(out, c.meta); });
}

void cmd_converge(const Options& o) {
  Context c = load(o, "converge");
  const auto spheres = require_spheres(c.scene);
  const std::vector<double> kappas = o.kappas.empty() ? std::vector<double>{0.5} : o.kappas;
  for (double k : kappas) {
    if (!(k > 0.0)) throw ConfigError("--kappa values must be positive");
  }
  c.meta.config["kappa"] = kappas;
  c.meta.config["subdivisions"] = o.subdivs;
  c.meta.describe(c.scene.assembly());
  std::vector<double> reference;
  for (double k : kappas) reference.push_back(oracle_xi(spheres, k, c.scene.solver.lmax_oracle).sample.xi);
  CsvTable table({"subdivisions", "unknowns", "kappa", "xi", "xi_oracle", "rel_gap", "seconds"});
  for (int sd : o.subdivs) {
    if (sd < 0 || sd > kMaxIcosphereSubdivisions) throw ConfigError("--subdivs out of range");
    SceneConfig refined = c.scene;
    for (auto& b : refined.bodies) b.subdivisions = sd;
    const Assembly a = refined.assembly();
    const EdgeBasis basis(a);
    c.meta.timings.start("subdiv" + std::to_string(sd));
    for (std::size_t i = 0; i < kappas.size(); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const double x = xi(assemble(basis, kappas[i], refined.solver.assembly)).xi;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      table.add_row({double(sd), double(basis.size()), kappas[i], x, reference[i], relative_gap(x, reference[i]), secs});
    }
    c.meta.timings.stop();
  }
  emit(c.out, [&](std::ostream& out) { table.write(out, c.meta); });
}

void cmd_gen_sphere(const Options& o) {
  if (o.out.empty()) throw ConfigError("--out is required");
  if (!(o.radius > 0.0)) throw ConfigError("--radius must be positive");
  const SurfaceMesh m = make_icosphere(o.radius, o.subdiv);
  save_mesh(o.out, m, o.format.empty() ? mesh_format_from_path(o.out) : parse_mesh_format(o.format));
  const json summary{{"path", o.out}, {"V", m.num_vertices()}, {"E", m.num_edges()}, {"F", m.num_triangles()},
                     {"genus", m.genus()}};
  std::cout << summary.dump() << '\n';
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::numerical: return 3;
    case ErrorKind::convergence: return 4;
  }
  return 1;
}

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::convergence: return "convergence";
  }
  return "internal";
}

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir energies of perfectly conducting bodies"};
  app.require_subcommand(1);
  Options o;

  auto scene_flags = [&](CLI::App* sub) {
    sub->add_option("--scene", o.scene_path, "Scene JSON")->required();
    sub->add_option("--out", o.out, "Output path (default: stdout or scene output.path)");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::NonNegativeNumber);
    sub->add_option("--lmax", o.lmax, "Oracle multipole order")->check(CLI::Range(1, 120));
  };
  auto kappa_flag = [&](CLI::App* sub) {
    sub->add_option("--kappa", o.kappas, "Comma separated kappa list")->delimiter(',');
  };

  auto* xi_cmd = app.add_subcommand("xi", "Xi(i kappa) on a list or the energy grid (CSV)");
  scene_flags(xi_cmd);
  kappa_flag(xi_cmd);
  xi_cmd->add_flag("--oracle", o.oracle, "Add multipole oracle columns");

  auto* energy_cmd = app.add_subcommand("energy", "Casimir energy report (JSON)");
  scene_flags(energy_cmd);
  energy_cmd->add_flag("--oracle", o.oracle, "Use the multipole oracle");
  energy_cmd->add_option("--unit", o.unit, "Multiplicative unit conversion for energy_scaled");

  auto* zeta_cmd = app.add_subcommand("zeta", "Relative zeta function (JSON)");
  scene_flags(zeta_cmd);
  zeta_cmd->add_option("--s", o.s, "Argument s in (-3, 0)");
  zeta_cmd->add_flag("--oracle", o.oracle, "Use the multipole oracle");

  auto* force_cmd = app.add_subcommand("force", "Force by central differences (JSON)");
  scene_flags(force_cmd);
  force_cmd->add_option("--body", o.body, "1-based body to move (default: last)");
  force_cmd->add_option("--axis", o.axis, "x, y, z or 'ax,ay,az'");
  force_cmd->add_option("--step", o.h, "Displacement step")->check(CLI::PositiveNumber);
  force_cmd->add_flag("--oracle", o.oracle, "Use the multipole oracle");

  auto* sweep_cmd = app.add_subcommand("sweep", "Energy over centre distances (CSV)");
  scene_flags(sweep_cmd);
  sweep_cmd->add_option("--distances", o.distances, "Comma separated centre distances")->delimiter(',')->required();
  sweep_cmd->add_option("--body", o.body, "1-based body to move (default: last)");
  sweep_cmd->add_flag("--oracle", o.oracle, "Use the multipole oracle");

  auto* converge_cmd = app.add_subcommand("converge", "Xi gap to the oracle under refinement (CSV)");
  scene_flags(converge_cmd);
  kappa_flag(converge_cmd);
  converge_cmd->add_option("--subdivs", o.subdivs, "Comma separated subdivision levels")->delimiter(',');

  auto* mesh_cmd = app.add_subcommand("mesh", "Mesh utilities");
  mesh_cmd->require_subcommand(1);
  auto* gen = mesh_cmd->add_subcommand("gen-sphere", "Write an icosphere");
  gen->add_option("--radius", o.radius, "Radius");
  gen->add_option("--subdiv", o.subdiv, "Subdivisions")->check(CLI::Range(0, kMaxIcosphereSubdivisions));
  gen->add_option("--out", o.out, "Output mesh path")->required();
  gen->add_option("--format", o.format, "off or json-tri (default: from extension)");

  auto* oracle_cmd = app.add_subcommand("oracle", "Multipole oracle for sphere scenes");
  oracle_cmd->require_subcommand(1);
  auto* oracle_xi_cmd = oracle_cmd->add_subcommand("xi", "Oracle xi (CSV)");
  scene_flags(oracle_xi_cmd);
  kappa_flag(oracle_xi_cmd);
  auto* oracle_energy_cmd = oracle_cmd->add_subcommand("energy", "Oracle energy (JSON)");
  scene_flags(oracle_energy_cmd);
  oracle_energy_cmd->add_option("--unit", o.unit, "Multiplicative unit conversion for energy_scaled");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("config", e.what(), 2);
  }

  try {
    if (*xi_cmd) cmd_xi(o, false);
    else if (*energy_cmd) cmd_energy(o, false);
    else if (*zeta_cmd) cmd_zeta(o);
    else if (*force_cmd) cmd_force(o);
    else if (*sweep_cmd) cmd_sweep(o);
    else if (*converge_cmd) cmd_converge(o);
    else if (*gen) cmd_gen_sphere(o);
    else if (*oracle_xi_cmd) cmd_xi(o, true);
    else if (*oracle_energy_cmd) cmd_energy(o, true);
  } catch (const Error& e) {
    return report_error(kind_name(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
