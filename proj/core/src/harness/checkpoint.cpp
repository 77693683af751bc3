#include "lcr/harness/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "lcr/errors.hpp"

namespace lcr::harness {

static_assert(std::endian::native == std::endian::little, "checkpoint io assumes a little-endian host");

namespace {

constexpr std::array<char, 8> magic = {'L', 'C', 'R', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ConfigError("checkpoint '" + path.string() + "' is truncated");
  }
  return value;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const numerics::ParameterList& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  out.write(magic.data(), magic.size());
  put<std::uint32_t>(out, checkpoint_version);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape()) put<std::uint64_t>(out, d);
  }
  for (const auto* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.raw()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
}

void load_checkpoint(const std::filesystem::path& path, const numerics::ParameterList& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path.string() + "'");
  std::array<char, 8> header{};
  if (!in.read(header.data(), header.size()) || header != magic) {
    throw ConfigError("'" + path.string() + "' is not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != checkpoint_version) {
    throw ConfigError("checkpoint '" + path.string() + "' has unsupported version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(in, path);
  if (count != params.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(count) + " tensors, model has " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    const auto rank = get<std::uint32_t>(in, path);
    numerics::Shape shape(rank);
    for (auto& d : shape) d = get<std::uint64_t>(in, path);
    if (shape != params[i]->value.shape()) {
      throw ConfigError("checkpoint tensor " + std::to_string(i) + " has shape " + numerics::to_string(shape) +
                        ", model expects " + numerics::to_string(params[i]->value.shape()));
    }
  }
  for (auto* p : params) {
    if (!in.read(reinterpret_cast<char*>(p->value.raw()), static_cast<std::streamsize>(p->value.size() * sizeof(double)))) {
      throw ConfigError("checkpoint '" + path.string() + "' is truncated");
    }
  }
}

}  // namespace lcr::harness
