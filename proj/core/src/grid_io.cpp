#include "cshv/grid_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "cshv/error.hpp"

namespace cshv {

namespace {

constexpr std::string_view kMagic = "CSHGRID";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
  return v;
}

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string encode_cshgrid(const ScalarGrid& grid) {
  const TorusLattice& L = grid.lattice();
  std::string out = std::string(kMagic) + " v1 " + std::to_string(L.nx()) + " " + std::to_string(L.ny()) +
                    " " + format_exact(L.tau1().x) + " " + format_exact(L.tau1().y) + " " +
                    format_exact(L.tau2().x) + " " + format_exact(L.tau2().y) + "\n";
  const std::size_t header = out.size();
  out.resize(header + 8 * grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(grid[k]));
    std::memcpy(out.data() + header + 8 * k, &bits, 8);
  }
  return out;
}

ScalarGrid decode_cshgrid(std::string_view bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string_view::npos) throw Error(ErrorKind::Io, "CSHGRID header line missing");
  std::istringstream header{std::string(bytes.substr(0, eol))};
  std::string magic, version;
  int nx = 0, ny = 0;
  Vec2 t1, t2;
  header >> magic >> version >> nx >> ny >> t1.x >> t1.y >> t2.x >> t2.y;
  if (!header || magic != kMagic || version != "v1") {
    throw Error(ErrorKind::Io, "not a CSHGRID v1 header");
  }
  const TorusLattice lattice(t1, t2, nx, ny);
  const std::string_view payload = bytes.substr(eol + 1);
  if (payload.size() != 8 * lattice.size()) {
    throw Error(ErrorKind::Io, "CSHGRID payload has " + std::to_string(payload.size()) + " bytes, expected " +
                                   std::to_string(8 * lattice.size()));
  }
  std::vector<double> values(lattice.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, payload.data() + 8 * k, 8);
    values[k] = std::bit_cast<double>(to_little_endian(bits));
  }
  return ScalarGrid(lattice, std::move(values));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename onto " + path.string());
  }
}

void write_cshgrid(const std::filesystem::path& path, const ScalarGrid& grid) {
  write_file_atomic(path, encode_cshgrid(grid));
}

ScalarGrid read_cshgrid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_cshgrid(ss.str());
}

}  // namespace cshv
