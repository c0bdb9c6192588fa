#pragma once

#include "varlab/fbsde.hpp"
#include "varlab/lagrangian.hpp"
#include "varlab/model.hpp"
#include "varlab/noether.hpp"
#include "varlab/shifts.hpp"
#include "varlab/transform.hpp"

#include <map>
#include <string>
#include <vector>

namespace varlab {

/// Raw "key = value" parameters of a registry reference. Vectors are written
/// as comma- or space-separated numbers.
using Params = std::map<std::string, std::string>;

/// Name-based constructors for the objects a scenario can reference.
/// Unknown names throw ConfigError naming the registry; unknown parameter
/// keys throw ConfigError listing the accepted keys.
namespace registry {

std::vector<std::string> model_names();
std::vector<std::string> potential_names();
std::vector<std::string> lagrangian_names();
std::vector<std::string> shift_names();
std::vector<std::string> map_names();
std::vector<std::string> family_names();
std::vector<std::string> fbsde_names();

/// Accepted parameter keys of an entry ("model", "potential", ...).
std::vector<std::string> parameter_keys(const std::string& registry, const std::string& name);

SemimartingaleModel model(const std::string& name, const Params& params = {});
Potential potential(const std::string& name, const Params& params = {});
/// Lagrangians that involve a potential use V; the others ignore it.
Lagrangian lagrangian(const std::string& name, const Params& params, const Potential& V);
AdaptedShift shift(const std::string& name, const Params& params, std::size_t dim);
SpaceTimeMap map(const std::string& name, const Params& params, std::size_t dim);
NoetherFamily family(const std::string& name, const Params& params, std::size_t dim);
FbsdeSpec fbsde(const std::string& name, const Params& params = {});

}  // namespace registry

double parse_double(const std::string& text, const std::string& what);
std::vector<double> parse_numbers(const std::string& text, const std::string& what);
Vec parse_vec(const std::string& text, const std::string& what);

}  // namespace varlab
