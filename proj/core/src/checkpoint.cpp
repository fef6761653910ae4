#include "ghr/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ghr/error.hpp"

namespace ghr {

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'H', 'R', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get(std::istream& is) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = is.get();
    require(c != EOF, ErrorCode::kFormat, "truncated checkpoint");
    v |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

std::string get_string(std::istream& is, std::size_t n) {
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  require(static_cast<std::size_t>(is.gcount()) == n, ErrorCode::kFormat, "truncated checkpoint");
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& os, const ParamStore& params, const nlohmann::json& config,
                      int element_width) {
  require(element_width == 4 || element_width == 8, ErrorCode::kInvalidConfig,
          "element width must be 4 or 8");
  nlohmann::json header;
  header["config"] = config;
  header["frozen"] = nlohmann::json::array();
  for (const auto& p : params)
    if (!p.trainable) header["frozen"].push_back(p.name);
  const std::string text = header.dump();

  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint64_t>(os, p.value.rows());
    put<std::uint64_t>(os, p.value.cols());
    put<std::uint8_t>(os, static_cast<std::uint8_t>(element_width));
    for (double v : p.value.values()) {
      if (element_width == 8)
        put<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
      else
        put<std::uint32_t>(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  require(static_cast<bool>(os), ErrorCode::kIo, "failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  require(is.gcount() == 8 && magic == kMagic, ErrorCode::kFormat, "not a checkpoint file");
  const auto version = get<std::uint32_t>(is);
  require(version == kCheckpointVersion, ErrorCode::kFormat,
          "unsupported checkpoint version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(is);
  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(get_string(is, header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, e.what());
  }
  std::vector<std::string> frozen;
  if (ck.header.contains("frozen")) frozen = ck.header["frozen"].get<std::vector<std::string>>();
  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = get_string(is, get<std::uint32_t>(is));
    const auto rows = get<std::uint64_t>(is);
    const auto cols = get<std::uint64_t>(is);
    const auto width = get<std::uint8_t>(is);
    require(width == 4 || width == 8, ErrorCode::kFormat, "bad element width");
    Tensor t(rows, cols);
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = width == 8 ? std::bit_cast<double>(get<std::uint64_t>(is))
                        : static_cast<double>(std::bit_cast<float>(get<std::uint32_t>(is)));
    }
    const bool trainable = std::find(frozen.begin(), frozen.end(), name) == frozen.end();
    ck.params.add(std::move(name), std::move(t), trainable);
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const nlohmann::json& config, int element_width) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_checkpoint(os, params, config, element_width);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace ghr
