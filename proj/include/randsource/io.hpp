#pragma once

// On-disk formats. Binary payloads are little-endian float64, row-major; each
// one has a JSON sidecar next to it (same path with the extension replaced by
// ".json") describing its shape.
//
//   covariance: M x M complex, (re, im) per entry; sidecar {M, L, R, kappa}
//   field:      J reals in grid order;            sidecar {dim, n, side}

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "randsource/operator.hpp"
#include "randsource/phantom.hpp"

namespace randsource::io {

std::filesystem::path sidecar_path(const std::filesystem::path& bin);

/// Writes C in the e_lm basis. `extra` entries are merged into the sidecar.
/// Returns the CRC-32 of the payload bytes.
std::uint32_t write_cov(const std::filesystem::path& bin, const CovMatrix& C,
                        const MeasurementBasis& basis, const nlohmann::json& extra = {});

struct CovFile {
  CovMatrix C;
  MeasurementBasis basis;
  nlohmann::json sidecar;
};
CovFile read_cov(const std::filesystem::path& bin);

/// Maps a covariance of P's data space back to the e_lm basis (U C U^H for a
/// compressed potential, C itself otherwise).
CovMatrix expand_cov(const PotentialMatrix& P, const CovMatrix& C);
/// Inverse direction: U^H C U, or C itself.
CovMatrix restrict_cov(const PotentialMatrix& P, const CovMatrix& C);

std::uint32_t write_field(const std::filesystem::path& bin, const SourceField& q,
                          const nlohmann::json& extra = {});
/// Rebuilds the grid from the sidecar.
SourceField read_field(const std::filesystem::path& bin);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace randsource::io
