#include "apml/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "apml/csv.hpp"

namespace apml {

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'S', 'E', 'T'};
constexpr std::size_t kHeaderBytes = 16;

std::vector<std::string_view> split_fields(std::string_view line,
                                           std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(seps, pos);
    if (start == std::string_view::npos)
      break;
    const auto stop = line.find_first_of(seps, start);
    const auto end = stop == std::string_view::npos ? line.size() : stop;
    out.push_back(line.substr(start, end - start));
    pos = end;
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const char *first = tok.data();
  if (!tok.empty() && tok.front() == '+')
    ++first;
  const auto res = std::from_chars(first, tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError("cannot parse number '" + std::string(tok) + "'", line_no);
  return v;
}

bool is_blank_or_comment(std::string_view line) {
  const auto start = line.find_first_not_of(" \t\r");
  return start == std::string_view::npos || line[start] == '#';
}

void put_u32(std::string &buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b)
    buf.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_file(const std::string &path) {
  if (path.empty())
    throw IOError("empty path");
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IOError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string &path, const std::string &bytes) {
  if (path.empty())
    throw IOError("empty path");
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IOError("cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
      throw IOError("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IOError("cannot move temporary file onto '" + path + "'");
  }
}

PointSet<double> parse_ascii(const std::string &text) {
  std::vector<double> coords;
  Index dim = 0;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line))
      continue;
    const auto fields = split_fields(line, " \t\r");
    if (dim == 0) {
      dim = static_cast<Index>(fields.size());
    } else if (static_cast<Index>(fields.size()) != dim) {
      throw DimensionMismatch("line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) +
                              " coordinates, expected " + std::to_string(dim));
    }
    for (auto f : fields)
      coords.push_back(parse_double(f, line_no));
  }
  if (dim == 0)
    throw EmptyInput("point cloud file has no points");
  const Index n = static_cast<Index>(coords.size()) / dim;
  Matrix<double> pts =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(coords.data(), n, dim);
  return PointSet<double>(std::move(pts));
}

PointSet<double> parse_binary(const std::string &bytes) {
  if (bytes.size() < kHeaderBytes ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
    throw FormatError("missing PSET magic");
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  const std::uint32_t version = get_u32(p + 4);
  if (version != kBinaryVersion)
    throw FormatError("unsupported PSET version " + std::to_string(version));
  const std::uint64_t n = get_u32(p + 8);
  const std::uint64_t d = get_u32(p + 12);
  if (n == 0 || d == 0)
    throw EmptyInput("PSET file declares an empty point set");
  if (bytes.size() != kHeaderBytes + n * d * 4)
    throw FormatError("PSET payload size does not match header");
  Matrix<double> pts(static_cast<Index>(n), static_cast<Index>(d));
  const unsigned char *data = p + kHeaderBytes;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t k = 0; k < d; ++k) {
      const std::uint32_t raw = get_u32(data + 4 * (i * d + k));
      pts(static_cast<Index>(i), static_cast<Index>(k)) =
          static_cast<double>(std::bit_cast<float>(raw));
    }
  return PointSet<double>(std::move(pts));
}

} // namespace

CloudFormat format_from_path(const std::string &path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".bin" || ext == ".pset")
    return CloudFormat::BinaryF32;
  return CloudFormat::AsciiXYZ;
}

PointSet<double> load_pointcloud(const std::string &path, CloudFormat format) {
  const std::string bytes = read_file(path);
  return format == CloudFormat::BinaryF32 ? parse_binary(bytes)
                                          : parse_ascii(bytes);
}

void save_pointcloud(const PointSet<double> &set, const std::string &path,
                     CloudFormat format) {
  if (path.empty())
    throw IOError("empty path");
  const auto &pts = set.points();
  std::string buf;
  if (format == CloudFormat::BinaryF32) {
    buf.append(kMagic.data(), kMagic.size());
    put_u32(buf, kBinaryVersion);
    put_u32(buf, static_cast<std::uint32_t>(pts.rows()));
    put_u32(buf, static_cast<std::uint32_t>(pts.cols()));
    for (Index i = 0; i < pts.rows(); ++i)
      for (Index k = 0; k < pts.cols(); ++k)
        put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(pts(i, k))));
  } else {
    for (Index i = 0; i < pts.rows(); ++i) {
      for (Index k = 0; k < pts.cols(); ++k) {
        if (k > 0)
          buf.push_back(' ');
        buf += format_number(pts(i, k), 9);
      }
      buf.push_back('\n');
    }
  }
  write_file_atomic(path, buf);
}

Matrix<double> load_matrix_csv(const std::string &path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  Index cols = 0, rows = 0;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line))
      continue;
    const auto fields = split_fields(line, ", \t\r");
    if (cols == 0)
      cols = static_cast<Index>(fields.size());
    else if (static_cast<Index>(fields.size()) != cols)
      throw DimensionMismatch("ragged matrix row at line " +
                              std::to_string(line_no));
    for (auto f : fields)
      values.push_back(parse_double(f, line_no));
    ++rows;
  }
  if (rows == 0)
    throw EmptyInput("matrix file is empty");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(values.data(), rows,
                                                          cols);
}

void save_matrix_csv(const Matrix<double> &m, const std::string &path) {
  std::string buf;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0)
        buf.push_back(',');
      buf += format_number(m(i, j));
    }
    buf.push_back('\n');
  }
  write_file_atomic(path, buf);
}

} // namespace apml
