#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docconf/active_learning.hpp"
#include "docconf/estimators.hpp"
#include "docconf/evaluation.hpp"
#include "docconf/features.hpp"
#include "docconf/forest.hpp"
#include "docconf/metrics.hpp"
#include "docconf/postprocess.hpp"

namespace docconf {

inline constexpr const char* kToolVersion = "0.1.0";

// --- probability maps -------------------------------------------------------
//
// PMAP layout (little-endian):
//   0  char[4]  "PMAP"
//   4  u16      format version (1)
//   6  u16      reserved, 0
//   8  u32      height
//  12  u32      width
//  16  f32[height * width], row-major, each in [0, 1]

inline constexpr std::uint16_t kPmapVersion = 1;

std::vector<std::uint8_t> encode_pmap(const ProbabilityMap& m);
/// Parses PMAP, or a binary (P5) / plain (P2) graymap with maxval <= 255 whose
/// pixels map to value / maxval.
ProbabilityMap decode_probability_map(const std::vector<std::uint8_t>& bytes);

void save_probability_map(const ProbabilityMap& m, const std::filesystem::path& path);
ProbabilityMap load_probability_map(const std::filesystem::path& path);

// --- polygon documents --------------------------------------------------------
//
// {"image_id": str, "height": int, "width": int,
//  "objects": [{"polygon": [[x, y], ...], "mean_prob": real?, "pixel_area": int?}]}

struct PolygonDocument {
  std::string image_id;
  int height = 0;
  int width = 0;
  struct Object {
    Polygon polygon;
    std::optional<double> mean_prob;
    std::optional<long long> pixel_area;
  };
  std::vector<Object> objects;
};

std::string polygons_to_json(const Prediction& p, const std::string& meta_json = {});
std::string polygons_to_json(const GroundTruth& g, const std::string& meta_json = {});
/// Throws SchemaError with the offending path, InvalidGeometry for bad rings.
PolygonDocument parse_polygons(const std::string& text);

GroundTruth to_ground_truth(const PolygonDocument& d);
/// Missing mean_prob defaults to 1; missing pixel_area is recomputed by
/// rasterizing the polygon.
Prediction to_prediction(const PolygonDocument& d);

void save_polygons(const Prediction& p, const std::filesystem::path& path);
void save_polygons(const GroundTruth& g, const std::filesystem::path& path);
PolygonDocument load_polygons(const std::filesystem::path& path);

// --- manifests ----------------------------------------------------------------
//
// {"images": [{"image_id": str, "height": int, "width": int,
//              "maps": [path, ...], "predictions": [path, ...],
//              "ground_truth": path}]}
// Paths are relative to the manifest's directory. One map/prediction is a
// single detection; several form a dropout ensemble.

struct ManifestEntry {
  std::string image_id;
  int height = 0;
  int width = 0;
  std::vector<std::filesystem::path> maps;
  std::vector<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> ground_truth;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
};

/// Validates the whole document (schema, unique ids, referenced files exist)
/// and reports every problem at once.
Manifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const Manifest& m, const std::string& meta_json = {});
void save_manifest(const Manifest& m, const std::filesystem::path& path, const std::string& meta_json = {});

// --- CSV --------------------------------------------------------------------------

/// Shortest text that parses back to the same double.
std::string format_number(double v);

/// "# key=value" comment lines written at the top of every output file.
struct OutputHeader {
  std::string command;
  std::vector<std::pair<std::string, std::string>> fields;

  void add(const std::string& key, const std::string& value) { fields.emplace_back(key, value); }
  std::string digest() const;
  std::string render() const;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;  // without the leading '#'
};

/// Comment lines start with '#'; the first non-comment line is the header.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

std::string confidence_csv(const std::vector<ConfidenceScore>& scores);
std::vector<ConfidenceScore> parse_confidence_csv(const CsvTable& t);

std::string image_scores_csv(const DatasetScores& s);
std::vector<ImageScore> parse_image_scores_csv(const CsvTable& t);

std::string features_csv(const std::vector<FeatureVector>& rows, const FeatureConfig& cfg);
std::vector<FeatureVector> parse_features_csv(const CsvTable& t);

std::string targets_csv(const std::vector<ImageScore>& scores);
std::map<std::string, double> parse_targets_csv(const CsvTable& t);

std::string curve_csv(const RejectCurve& c);
std::string band_csv(const CurveBand& b);
std::string al_log_csv(const std::vector<IterationLog>& log);

}  // namespace docconf
