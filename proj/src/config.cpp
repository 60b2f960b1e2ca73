#include "linereg/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "linereg/io.hpp"

namespace linereg {

void PipelineConfig::validate() const {
  if (!(voxel_size > 0.0)) throw std::invalid_argument("config: voxel_size must be positive");
  if (train_points < 1) throw std::invalid_argument("config: train_points must be >= 1");
  if (eval_points < 1) throw std::invalid_argument("config: eval_points must be >= 1");
  if (gen_scenes < 1) throw std::invalid_argument("config: gen_scenes must be >= 1");
  if (feature_k < 1) throw std::invalid_argument("config: feature_k must be >= 1");
  net.validate();
  loss.validate();
  if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be positive");
  if (pretrain_epochs < 1) throw std::invalid_argument("config: pretrain_epochs must be >= 1");
  if (train_epochs < 1) throw std::invalid_argument("config: train_epochs must be >= 1");
  if (!(holdout_fraction > 0.0) || !(holdout_fraction < 1.0)) {
    throw std::invalid_argument("config: holdout_fraction must be in (0, 1)");
  }
  adaptation.validate();
  match.validate();
  if (coarse_yaw_steps < 1) throw std::invalid_argument("config: coarse_yaw_steps must be >= 1");
  solver.validate();
  if (eval_pairs < 1) throw std::invalid_argument("config: eval_pairs must be >= 1");
  if (!(eval_yaw_range_deg >= 0.0)) {
    throw std::invalid_argument("config: eval_yaw_range_deg must be >= 0");
  }
  if (!(eval_xy_range >= 0.0)) throw std::invalid_argument("config: eval_xy_range must be >= 0");
  eval_scene.validate();
}

PairRegistrationConfig PipelineConfig::registration() const {
  PairRegistrationConfig cfg;
  cfg.extract.growth_radius = adaptation.growth_radius;
  cfg.extract.fit = adaptation.fit;
  cfg.match = match;
  cfg.coarse_yaw_steps = coarse_yaw_steps;
  cfg.solver = solver;
  return cfg;
}

namespace {

// One mutable view over every serialized field. Save, load, and the docs all
// walk this single table, so they cannot drift apart.
struct FieldRef {
  const char* section;
  const char* key;
  std::variant<int*, double*, bool*, std::uint64_t*, DescriptorSource*> ref;
};

std::vector<FieldRef> field_table(PipelineConfig& c) {
  return {
      {"data", "voxel_size", &c.voxel_size},
      {"data", "train_points", &c.train_points},
      {"data", "eval_points", &c.eval_points},
      {"data", "gen_scenes", &c.gen_scenes},
      {"features", "k", &c.feature_k},
      {"network", "k", &c.net.k},
      {"network", "stride", &c.net.stride},
      {"network", "channels", &c.net.channels},
      {"network", "descriptor_dim", &c.net.descriptor_dim},
      {"network", "scale_invariant_first_layer", &c.net.scale_invariant_first_layer},
      {"loss", "delta_same", &c.loss.delta_same},
      {"loss", "delta_diff", &c.loss.delta_diff},
      {"loss", "omega", &c.loss.omega},
      {"training", "learning_rate", &c.learning_rate},
      {"training", "pretrain_epochs", &c.pretrain_epochs},
      {"training", "train_epochs", &c.train_epochs},
      {"training", "holdout_fraction", &c.holdout_fraction},
      {"adaptation", "n_perturbations", &c.adaptation.n_perturbations},
      {"adaptation", "xy_range", &c.adaptation.xy_range},
      {"adaptation", "yaw_range_deg", &c.adaptation.yaw_range_deg},
      {"adaptation", "vote_threshold", &c.adaptation.vote_threshold},
      {"adaptation", "growth_radius", &c.adaptation.growth_radius},
      {"adaptation", "iterations", &c.adaptation.iterations},
      {"adaptation", "fit_min_points", &c.adaptation.fit.min_points},
      {"adaptation", "fit_linearity_min", &c.adaptation.fit.linearity_min},
      {"adaptation", "fit_length_min", &c.adaptation.fit.length_min},
      {"matching", "descriptor_source", &c.match.source},
      {"matching", "threshold", &c.match.threshold},
      {"registration", "coarse_yaw_steps", &c.coarse_yaw_steps},
      {"registration", "max_iterations", &c.solver.max_iterations},
      {"registration", "step_tolerance", &c.solver.step_tolerance},
      {"registration", "initial_damping", &c.solver.initial_damping},
      {"registration", "outlier_distance", &c.solver.outlier_distance},
      {"registration", "outlier_rounds", &c.solver.outlier_rounds},
      {"eval", "pairs", &c.eval_pairs},
      {"eval", "yaw_range_deg", &c.eval_yaw_range_deg},
      {"eval", "xy_range", &c.eval_xy_range},
      {"eval", "n_lines", &c.eval_scene.n_lines},
      {"eval", "min_length", &c.eval_scene.min_length},
      {"eval", "length_step", &c.eval_scene.length_step},
      {"eval", "min_separation", &c.eval_scene.min_separation},
      {"eval", "workspace", &c.eval_scene.workspace},
      {"eval", "points_per_line", &c.eval_scene.points_per_line},
      {"eval", "noise_sigma", &c.eval_scene.noise_sigma},
      {"eval", "background_points", &c.eval_scene.background_points},
      {"run", "seed", &c.seed},
  };
}

std::string render_value(const FieldRef& f) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.17g", *p);
          return buf;
        } else if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, DescriptorSource>) {
          return *p == DescriptorSource::Geometric ? "geometric" : "learned";
        } else {
          return std::to_string(*p);
        }
      },
      f.ref);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
  throw FileFormatError(origin + ": line " + std::to_string(line) + ": " + what);
}

std::string trim(std::string s) {
  const auto from = s.find_first_not_of(" \t\r");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r");
  return s.substr(from, to - from + 1);
}

void assign_value(const std::string& origin, std::size_t line_no, const FieldRef& field,
                  const std::string& value) {
  auto bad = [&](const char* want) {
    fail(origin, line_no,
         std::string("value '") + value + "' for key '" + field.key + "' is not " + want);
  };
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          double v = 0.0;
          const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
          if (ec != std::errc() || end != value.data() + value.size()) bad("a number");
          *p = v;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true") {
            *p = true;
          } else if (value == "false") {
            *p = false;
          } else {
            bad("'true' or 'false'");
          }
        } else if constexpr (std::is_same_v<T, DescriptorSource>) {
          if (value == "geometric") {
            *p = DescriptorSource::Geometric;
          } else if (value == "learned") {
            *p = DescriptorSource::Learned;
          } else {
            bad("'geometric' or 'learned'");
          }
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          std::uint64_t v = 0;
          const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
          if (ec != std::errc() || end != value.data() + value.size()) {
            bad("an unsigned integer");
          }
          *p = v;
        } else {
          long v = 0;
          const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
          if (ec != std::errc() || end != value.data() + value.size() ||
              v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            bad("an integer");
          }
          *p = static_cast<int>(v);
        }
      },
      field.ref);
}

}  // namespace

std::string save_config(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;  // the field table binds mutable pointers
  std::string out;
  std::string section;
  for (const FieldRef& f : field_table(copy)) {
    if (section != f.section) {
      if (!out.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + render_value(f) + "\n";
  }
  return out;
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
  PipelineConfig cfg;
  const auto table = field_table(cfg);
  std::map<std::pair<std::string, std::string>, const FieldRef*> lookup;
  std::map<std::string, bool> known_sections;
  for (const auto& f : table) {
    lookup[{f.section, f.key}] = &f;
    known_sections[f.section] = true;
  }

  std::map<std::pair<std::string, std::string>, std::size_t> assigned;
  std::istringstream stream(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_sections.count(section)) {
        fail(origin, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail(origin, line_no, "key '" + key + "' appears before any section");
    const auto it = lookup.find({section, key});
    if (it == lookup.end()) {
      fail(origin, line_no, "unknown key '" + key + "' in section [" + section + "]");
    }
    const auto prev = assigned.find({section, key});
    if (prev != assigned.end()) {
      fail(origin, line_no,
           "duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")");
    }
    assigned[{section, key}] = line_no;
    assign_value(origin, line_no, *it->second, value);
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FileFormatError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), path.string());
}

void write_config(const std::filesystem::path& path, const PipelineConfig& cfg) {
  atomic_write_file(path, save_config(cfg));
}

}  // namespace linereg
