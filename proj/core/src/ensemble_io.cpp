#include "varlab/ensemble_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace varlab {
namespace {

constexpr std::uint64_t kConstantDiffusionFlag = 1;
constexpr std::uint64_t kWeightsFlag = 2;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t k = 0; k < sizeof(T) / 2; ++k) std::swap(b[k], b[sizeof(T) - 1 - k]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_doubles(std::ostream& os, const std::vector<double>& xs) {
  for (double x : xs) {
    x = to_little(x);
    os.write(reinterpret_cast<const char*>(&x), sizeof x);
  }
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw Error("read_ensemble: truncated header");
  return to_little(v);
}

void get_doubles(std::istream& is, std::vector<double>& xs) {
  is.read(reinterpret_cast<char*>(xs.data()),
          static_cast<std::streamsize>(xs.size() * sizeof(double)));
  if (!is) throw Error("read_ensemble: truncated data");
  for (double& x : xs) x = to_little(x);
}

}  // namespace

void write_ensemble(const PathEnsemble& e, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error("write_ensemble: cannot open " + file.string());
  os.write(kEnsembleMagic, sizeof kEnsembleMagic);
  put_u64(os, e.grid().steps());
  put_u64(os, e.n_paths());
  put_u64(os, e.dim());
  put_u64(os, e.seed());
  put_u64(os, e.steps());
  std::uint64_t flags = 0;
  if (e.diffusion_storage() == PathEnsemble::DiffusionStorage::kConstant) {
    flags |= kConstantDiffusionFlag;
  }
  if (e.weights()) flags |= kWeightsFlag;
  put_u64(os, flags);
  put_doubles(os, e.states_data());
  put_doubles(os, e.drifts_data());
  put_doubles(os, e.diffusions_data());
  if (e.weights()) put_doubles(os, *e.weights());
  if (!os) throw Error("write_ensemble: write failed for " + file.string());
}

PathEnsemble read_ensemble(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error("read_ensemble: cannot open " + file.string());
  char magic[sizeof kEnsembleMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kEnsembleMagic, sizeof magic) != 0) {
    throw Error("read_ensemble: bad magic in " + file.string());
  }
  const auto m = get_u64(is);
  const auto n = get_u64(is);
  const auto d = get_u64(is);
  const auto seed = get_u64(is);
  const auto k = get_u64(is);
  const auto flags = get_u64(is);
  if (m == 0 || n == 0 || d == 0 || d > static_cast<std::uint64_t>(kMaxDim) || k == 0 || k > m) {
    throw Error("read_ensemble: inconsistent header in " + file.string());
  }
  const auto storage = (flags & kConstantDiffusionFlag) ? PathEnsemble::DiffusionStorage::kConstant
                                                        : PathEnsemble::DiffusionStorage::kPerStep;
  PathEnsemble e(TimeGrid(m), n, d, k, seed, storage);
  get_doubles(is, e.states_data());
  get_doubles(is, e.drifts_data());
  get_doubles(is, e.diffusions_data());
  if (flags & kWeightsFlag) {
    std::vector<double> w(n);
    get_doubles(is, w);
    e.set_weights(std::move(w));
  }
  return e;
}

void write_paths_csv(const PathEnsemble& e, std::span<const std::size_t> paths,
                     const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw Error("write_paths_csv: cannot open " + file.string());
  os << "path,step,time";
  for (std::size_t c = 0; c < e.dim(); ++c) os << ",x" << c;
  os << '\n' << std::setprecision(17);
  for (const auto i : paths) {
    if (i >= e.n_paths()) throw PreconditionError("write_paths_csv: path index out of range");
    for (std::size_t j = 0; j <= e.steps(); ++j) {
      os << i << ',' << j << ',' << e.grid().time(j);
      const auto x = e.state(i, j);
      for (std::size_t c = 0; c < e.dim(); ++c) os << ',' << x(static_cast<Eigen::Index>(c));
      os << '\n';
    }
  }
}

}  // namespace varlab
