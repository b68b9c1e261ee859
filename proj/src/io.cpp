#include "randsource/io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/crc.hpp>

namespace randsource::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written as native little-endian doubles");

namespace {

std::uint32_t write_doubles(const std::filesystem::path& path, const std::vector<double>& buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto* bytes = reinterpret_cast<const char*>(buf.data());
  const auto size = static_cast<std::streamsize>(buf.size() * sizeof(double));
  out.write(bytes, size);
  if (!out) throw std::runtime_error("write failed: " + path.string());
  boost::crc_32_type crc;
  crc.process_bytes(bytes, static_cast<std::size_t>(size));
  return crc.checksum();
}

std::vector<double> read_doubles(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto bytes = std::filesystem::file_size(path);
  if (bytes != count * sizeof(double)) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(count * sizeof(double)) +
                             " bytes, found " + std::to_string(bytes));
  }
  std::vector<double> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("read failed: " + path.string());
  return buf;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& bin) {
  auto p = bin;
  p.replace_extension(".json");
  if (p == bin) p += ".json";
  return p;
}

std::uint32_t write_cov(const std::filesystem::path& bin, const CovMatrix& C,
                        const MeasurementBasis& basis, const nlohmann::json& extra) {
  if (C.rows() != C.cols() || C.rows() != basis.size()) {
    throw std::invalid_argument("write_cov: matrix is not " + std::to_string(basis.size()) +
                                " x " + std::to_string(basis.size()));
  }
  const Eigen::Index M = C.rows();
  std::vector<double> buf(static_cast<std::size_t>(2 * M * M));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j) {
      buf[k++] = C(i, j).real();
      buf[k++] = C(i, j).imag();
    }
  const auto crc = write_doubles(bin, buf);
  nlohmann::json side = extra.is_object() ? extra : nlohmann::json::object();
  side["M"] = M;
  side["L"] = basis.L;
  side["R"] = basis.R;
  side["kappa"] = basis.kappa;
  write_json(sidecar_path(bin), side);
  return crc;
}

CovFile read_cov(const std::filesystem::path& bin) {
  CovFile f;
  f.sidecar = read_json(sidecar_path(bin));
  f.basis = MeasurementBasis{f.sidecar.at("R").get<double>(), f.sidecar.at("kappa").get<double>(),
                             f.sidecar.at("L").get<int>()};
  f.basis.validate();
  const auto M = f.sidecar.at("M").get<Eigen::Index>();
  if (M != f.basis.size()) throw std::runtime_error(bin.string() + ": sidecar M does not match L");
  const auto buf = read_doubles(bin, static_cast<std::size_t>(2 * M * M));
  f.C.resize(M, M);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j, k += 2) f.C(i, j) = {buf[k], buf[k + 1]};
  return f;
}

CovMatrix expand_cov(const PotentialMatrix& P, const CovMatrix& C) {
  if (!P.compressed()) return C;
  return P.range * C * P.range.adjoint();
}

CovMatrix restrict_cov(const PotentialMatrix& P, const CovMatrix& C) {
  if (!P.compressed()) return C;
  return P.range.adjoint() * C * P.range;
}

std::uint32_t write_field(const std::filesystem::path& bin, const SourceField& q,
                          const nlohmann::json& extra) {
  if (!q.grid) throw std::invalid_argument("write_field: field has no grid");
  const std::vector<double> buf(q.values.data(), q.values.data() + q.values.size());
  const auto crc = write_doubles(bin, buf);
  nlohmann::json side = extra.is_object() ? extra : nlohmann::json::object();
  side["dim"] = q.grid->dim;
  side["n"] = q.grid->n;
  side["side"] = q.grid->side;
  write_json(sidecar_path(bin), side);
  return crc;
}

SourceField read_field(const std::filesystem::path& bin) {
  const auto side = read_json(sidecar_path(bin));
  auto grid = make_grid(side.at("dim").get<int>(), side.at("n").get<int>(), side.at("side").get<double>());
  const auto buf = read_doubles(bin, static_cast<std::size_t>(grid->size()));
  return SourceField(grid, Eigen::Map<const Eigen::VectorXd>(buf.data(), grid->size()));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace randsource::io
