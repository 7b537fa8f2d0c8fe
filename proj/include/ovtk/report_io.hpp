#pragma once

#include <string>

#include "ovtk/certify.hpp"
#include "ovtk/config.hpp"

namespace ovtk {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Write certificate.csv, gamma_series.csv, diagnostics.csv, metadata.txt and
/// summary.txt into `dir` (created if needed). summary.txt is rendered from
/// the just-written files, so re-rendering from disk reproduces it byte for
/// byte.
void write_report(const CertificateReport& report, const RunConfig& cfg, const std::string& dir);

/// Re-render summary.txt from the CSVs + metadata in `dir`; returns the text.
std::string render_summary_from_dir(const std::string& dir);

}  // namespace ovtk
