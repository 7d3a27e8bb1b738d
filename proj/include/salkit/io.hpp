#ifndef SALKIT_IO_HPP_
#define SALKIT_IO_HPP_

#include <filesystem>
#include <string>

#include "salkit/core.hpp"
#include "salkit/gmm.hpp"
#include "salkit/sweep.hpp"

namespace salkit::io {

/// "%.17g" — enough digits to round-trip a double exactly.
std::string format_g17(double value);

/// Dispatch on extension: .pgm/.pnm or .csv. Values are loaded as-is and
/// the map is Raw; callers normalize per metric requirements.
SaliencyMap read_map(const std::filesystem::path& path);

SaliencyMap read_pgm(const std::filesystem::path& path);

/// Writes P5 (or P2 when ascii) with the given maxval; values are scaled
/// linearly so the map maximum lands on maxval.
void write_pgm(const SaliencyMap& map, const std::filesystem::path& path, int maxval = 65535,
               bool ascii = false);

SaliencyMap read_csv_map(const std::filesystem::path& path);
void write_csv_map(const SaliencyMap& map, const std::filesystem::path& path);

/// Fixation CSV: one "x,y" integer pair per line, 0-indexed, x = column,
/// origin top-left. Duplicates are kept.
FixationSet read_fixations(const std::filesystem::path& path, int height, int width);
void write_fixations(const FixationSet& fix, const std::filesystem::path& path);

/// GMM JSON document:
///   {"cov_mode": "diag"|"full",
///    "components": [{"weight": w, "mean": [mx, my],
///                    "cov": [[sxx, sxy], [sxy, syy]]}, ...]}
/// Coordinates are normalized to [0,1]^2; weights must sum to 1 within
/// 1e-6 on load (then renormalized exactly).
Gmm2D parse_gmm_json(const std::string& text);
std::string gmm_to_json_string(const Gmm2D& g);
Gmm2D read_gmm_json(const std::filesystem::path& path);
void write_gmm_json(const Gmm2D& g, const std::filesystem::path& path);

/// Sweep spec JSON: {"scenario": ..., "gt": <gmm document>, "lo": ...,
/// "hi": ..., "steps": ..., "raster": [h, w], "losses": [...], "eps": ...}
/// (raster, losses and eps are optional).
SweepSpec parse_sweep_spec_json(const std::string& text);
std::string sweep_spec_to_json_string(const SweepSpec& spec);
SweepSpec read_sweep_spec(const std::filesystem::path& path);
void write_sweep_spec(const SweepSpec& spec, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace salkit::io

#endif // SALKIT_IO_HPP_
