#include "varlab/registry.hpp"

#include "varlab/taylor_green.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace varlab {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out.empty() ? "(none)" : out;
}

/// Typed access to Params with defaults, tracking the entry for messages.
class Reader {
 public:
  Reader(const Params& params, std::string where) : params_(params), where_(std::move(where)) {}

  bool has(const std::string& key) const { return params_.count(key) > 0; }

  double num(const std::string& key, double fallback) const {
    auto it = params_.find(key);
    return it == params_.end() ? fallback : parse_double(it->second, where_ + "." + key);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const double v = num(key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v)) throw ConfigError(where_ + "." + key + " must be a count");
    return static_cast<std::size_t>(v);
  }

  Vec vec(const std::string& key, Vec fallback) const {
    auto it = params_.find(key);
    return it == params_.end() ? fallback : parse_vec(it->second, where_ + "." + key);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  const std::string& where() const { return where_; }

 private:
  const Params& params_;
  std::string where_;
};

template <class T, class... Args>
struct Entry {
  std::vector<std::string> keys;
  std::function<T(const Reader&, Args...)> make;
};

template <class T, class... Args>
using Table = std::map<std::string, Entry<T, Args...>>;

template <class T, class... Args>
std::vector<std::string> names_of(const Table<T, Args...>& table) {
  std::vector<std::string> out;
  for (const auto& [name, entry] : table) out.push_back(name);
  return out;
}

template <class T, class... Args>
const Entry<T, Args...>& lookup(const Table<T, Args...>& table, const std::string& registry,
                                const std::string& name, const Params& params) {
  auto it = table.find(name);
  if (it == table.end()) {
    throw ConfigError("no entry '" + name + "' in the " + registry + " registry (available: " +
                      join(names_of(table)) + ")");
  }
  for (const auto& [key, value] : params) {
    const auto& keys = it->second.keys;
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(registry + " '" + name + "': unknown key '" + key +
                        "' (valid keys: " + join(keys) + ")");
    }
  }
  return it->second;
}

Vec filled(std::size_t dim, double value) {
  Vec v(static_cast<Eigen::Index>(dim));
  v.setConstant(value);
  return v;
}

void require_dim(const Vec& v, std::size_t dim, const std::string& what) {
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw ConfigError(what + " has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(dim));
  }
}

std::size_t checked_dim(std::size_t dim, const std::string& where) {
  if (dim == 0 || dim > kMaxDim) {
    throw ConfigError(where + ": dim must be in 1.." + std::to_string(kMaxDim));
  }
  return dim;
}

const Table<SemimartingaleModel>& model_table() {
  static const Table<SemimartingaleModel> table = {
      {"brownian",
       {{"dim", "start"},
        [](const Reader& r) {
          const auto dim = checked_dim(r.count("dim", r.has("start") ? 0 : 1), r.where());
          Vec start = r.vec("start", zero_vec(dim));
          require_dim(start, dim, r.where() + ".start");
          return models::brownian(dim, start);
        }}},
      {"constant_drift",
       {{"drift", "start", "sigma"},
        [](const Reader& r) {
          const Vec drift = r.vec("drift", filled(1, 1.0));
          const auto dim = checked_dim(static_cast<std::size_t>(drift.size()), r.where());
          const Vec start = r.vec("start", zero_vec(dim));
          require_dim(start, dim, r.where() + ".start");
          return models::constant_drift(drift, start, r.num("sigma", 1.0));
        }}},
      {"brownian_with_drift_t",
       {{"dim"},
        [](const Reader& r) {
          return models::brownian_with_drift_t(checked_dim(r.count("dim", 1), r.where()));
        }}},
      {"pinned_brownian",
       {{"x", "y"},
        [](const Reader& r) {
          const Vec y = r.vec("y", filled(1, 1.0));
          const auto dim = checked_dim(static_cast<std::size_t>(y.size()), r.where());
          const Vec x = r.vec("x", zero_vec(dim));
          require_dim(x, dim, r.where() + ".x");
          return models::pinned_brownian(x, y);
        }}},
      {"entropic_density",
       {{"a"},
        [](const Reader& r) {
          const double a = r.num("a", 0.5);
          if (!(a >= 0.0 && a < 1.0)) throw ConfigError(r.where() + ".a must lie in [0, 1)");
          return models::entropic_density_sde(a);
        }}},
      {"taylor_green",
       {{"start"},
        [](const Reader& r) {
          const Vec start = r.vec("start", taylor_green::default_start());
          require_dim(start, 2, r.where() + ".start");
          return taylor_green::model(start);
        }}},
  };
  return table;
}

const Table<Potential>& potential_table() {
  static const Table<Potential> table = {
      {"zero", {{}, [](const Reader&) { return potentials::zero(); }}},
      {"quadratic", {{"k"}, [](const Reader& r) { return potentials::quadratic(r.num("k", 1.0)); }}},
      {"coordinate_square",
       {{"c"}, [](const Reader& r) { return potentials::coordinate_square(r.num("c", 1.0)); }}},
      {"taylor_green_pressure", {{}, [](const Reader&) { return taylor_green::potential(); }}},
  };
  return table;
}

const Table<Lagrangian, const Potential&>& lagrangian_table() {
  static const Table<Lagrangian, const Potential&> table = {
      {"kinetic", {{}, [](const Reader&, const Potential&) { return lagrangians::kinetic(); }}},
      {"with_potential",
       {{}, [](const Reader&, const Potential& V) { return lagrangians::with_potential(V); }}},
      {"trace_weighted",
       {{}, [](const Reader&, const Potential&) { return lagrangians::trace_weighted(); }}},
      {"with_potential_and_trace",
       {{"c"},
        [](const Reader& r, const Potential& V) {
          return lagrangians::with_potential_and_trace(V, r.num("c", 0.5));
        }}},
  };
  return table;
}

const Table<AdaptedShift, std::size_t>& shift_table() {
  static const Table<AdaptedShift, std::size_t> table = {
      {"constant",
       {{"c"},
        [](const Reader& r, std::size_t dim) {
          Vec c = r.vec("c", filled(dim, 1.0));
          require_dim(c, dim, r.where() + ".c");
          return shifts::constant(c);
        }}},
      {"state", {{}, [](const Reader&, std::size_t dim) { return shifts::state(dim); }}},
      {"square_wave",
       {{"c"},
        [](const Reader& r, std::size_t dim) {
          Vec c = r.vec("c", filled(dim, 1.0));
          require_dim(c, dim, r.where() + ".c");
          return shifts::square_wave(c);
        }}},
      {"cosine",
       {{"c", "k"},
        [](const Reader& r, std::size_t dim) {
          Vec c = r.vec("c", filled(dim, 1.0));
          require_dim(c, dim, r.where() + ".c");
          return shifts::cosine(c, static_cast<int>(r.count("k", 1)));
        }}},
      {"sine_state", {{}, [](const Reader&, std::size_t dim) { return shifts::sine_state(dim); }}},
  };
  return table;
}

const Table<SpaceTimeMap, std::size_t>& map_table() {
  static const Table<SpaceTimeMap, std::size_t> table = {
      {"identity", {{}, [](const Reader&, std::size_t dim) { return maps::identity(dim); }}},
      {"affine",
       {{"a", "b"},
        [](const Reader& r, std::size_t dim) {
          // a: row-major d x d matrix, or d diagonal entries.
          const std::vector<double> entries =
              r.has("a") ? parse_numbers(r.text("a", ""), r.where() + ".a")
                         : std::vector<double>(dim, 1.0);
          Mat a = zero_mat(dim);
          if (entries.size() == dim) {
            for (std::size_t i = 0; i < dim; ++i) a(i, i) = entries[i];
          } else if (entries.size() == dim * dim) {
            for (std::size_t i = 0; i < dim; ++i)
              for (std::size_t j = 0; j < dim; ++j) a(i, j) = entries[i * dim + j];
          } else {
            throw ConfigError(r.where() + ".a needs d or d*d entries");
          }
          Vec b = r.vec("b", zero_vec(dim));
          require_dim(b, dim, r.where() + ".b");
          return maps::affine(a, b);
        }}},
      {"sine_warp",
       {{"amplitude"},
        [](const Reader& r, std::size_t dim) {
          return maps::sine_warp(dim, r.num("amplitude", 0.3));
        }}},
      {"time_scaling",
       {{"rate"},
        [](const Reader& r, std::size_t dim) {
          return maps::time_scaling(dim, r.num("rate", 0.25));
        }}},
      {"heat_square",
       {{},
        [](const Reader& r, std::size_t dim) {
          if (dim != 1) throw ConfigError(r.where() + " is one-dimensional");
          return maps::heat_square();
        }}},
      {"square",
       {{},
        [](const Reader& r, std::size_t dim) {
          if (dim != 1) throw ConfigError(r.where() + " is one-dimensional");
          return maps::square();
        }}},
  };
  return table;
}

const Table<NoetherFamily, std::size_t>& family_table() {
  static const Table<NoetherFamily, std::size_t> table = {
      {"translation",
       {{"k"},
        [](const Reader& r, std::size_t dim) {
          const std::size_t k = r.count("k", 0);
          if (k >= dim) throw ConfigError(r.where() + ".k exceeds the dimension");
          return families::translation(dim, k);
        }}},
      {"rotation",
       {{},
        [](const Reader& r, std::size_t dim) {
          if (dim != 2) throw ConfigError(r.where() + " needs dimension 2");
          return families::rotation();
        }}},
  };
  return table;
}

const Table<FbsdeSpec>& fbsde_table() {
  static const Table<FbsdeSpec> table = {
      {"oscillator",
       {{"x0", "potential", "k", "noise", "z_scale"},
        [](const Reader& r) {
          const Vec x0 = r.vec("x0", filled(1, 1.0));
          checked_dim(static_cast<std::size_t>(x0.size()), r.where());
          Params vp;
          const std::string vname = r.text("potential", "quadratic");
          if (r.has("k")) vp[vname == "coordinate_square" ? "c" : "k"] = r.text("k", "1");
          FbsdeSpec spec = fbsde::oscillator(x0, registry::potential(vname, vp));
          const std::string noise = r.text("noise", "constant");
          if (noise == "constant") {
            spec.noise = FbsdeSpec::Noise::kConstant;
          } else if (noise == "driving") {
            spec.noise = FbsdeSpec::Noise::kDriving;
            spec.z_scale = r.num("z_scale", 0.5);
          } else {
            throw ConfigError(r.where() + ".noise must be constant or driving");
          }
          return spec;
        }}},
      {"filtering_oscillator",
       {{"y0_mean", "y0_var", "z_scale"},
        [](const Reader& r) {
          FbsdeSpec spec = fbsde::filtering_oscillator();
          spec.y0_mean = r.num("y0_mean", spec.y0_mean);
          spec.y0_var = r.num("y0_var", spec.y0_var);
          if (r.has("z_scale")) {
            spec.noise = FbsdeSpec::Noise::kIndependent;
            spec.z_scale = r.num("z_scale", 0.0);
          }
          return spec;
        }}},
  };
  return table;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  std::string s = text;
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  return v;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> values;
  std::string token;
  while (in >> token) values.push_back(parse_double(token, what));
  if (values.empty()) throw ConfigError(what + ": expected a list of numbers");
  return values;
}

Vec parse_vec(const std::string& text, const std::string& what) {
  const auto values = parse_numbers(text, what);
  if (values.size() > kMaxDim) {
    throw ConfigError(what + ": at most " + std::to_string(kMaxDim) + " entries");
  }
  Vec v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

namespace registry {

std::vector<std::string> model_names() { return names_of(model_table()); }
std::vector<std::string> potential_names() { return names_of(potential_table()); }
std::vector<std::string> lagrangian_names() { return names_of(lagrangian_table()); }
std::vector<std::string> shift_names() { return names_of(shift_table()); }
std::vector<std::string> map_names() { return names_of(map_table()); }
std::vector<std::string> family_names() { return names_of(family_table()); }
std::vector<std::string> fbsde_names() { return names_of(fbsde_table()); }

std::vector<std::string> parameter_keys(const std::string& reg, const std::string& name) {
  auto find = [&](const auto& table) {
    return lookup(table, reg, name, Params{}).keys;
  };
  if (reg == "model") return find(model_table());
  if (reg == "potential") return find(potential_table());
  if (reg == "lagrangian") return find(lagrangian_table());
  if (reg == "shift") return find(shift_table());
  if (reg == "map") return find(map_table());
  if (reg == "family") return find(family_table());
  if (reg == "fbsde") return find(fbsde_table());
  throw ConfigError("unknown registry '" + reg + "'");
}

SemimartingaleModel model(const std::string& name, const Params& params) {
  return lookup(model_table(), "model", name, params).make(Reader(params, "model " + name));
}

Potential potential(const std::string& name, const Params& params) {
  return lookup(potential_table(), "potential", name, params)
      .make(Reader(params, "potential " + name));
}

Lagrangian lagrangian(const std::string& name, const Params& params, const Potential& V) {
  return lookup(lagrangian_table(), "lagrangian", name, params)
      .make(Reader(params, "lagrangian " + name), V);
}

AdaptedShift shift(const std::string& name, const Params& params, std::size_t dim) {
  return lookup(shift_table(), "shift", name, params).make(Reader(params, "shift " + name), dim);
}

SpaceTimeMap map(const std::string& name, const Params& params, std::size_t dim) {
  return lookup(map_table(), "map", name, params).make(Reader(params, "map " + name), dim);
}

NoetherFamily family(const std::string& name, const Params& params, std::size_t dim) {
  return lookup(family_table(), "family", name, params).make(Reader(params, "family " + name), dim);
}

FbsdeSpec fbsde(const std::string& name, const Params& params) {
  return lookup(fbsde_table(), "fbsde", name, params).make(Reader(params, "fbsde " + name));
}

}  // namespace registry

}  // namespace varlab
