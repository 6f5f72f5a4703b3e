#include "docconf/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "docconf/error.hpp"
#include "docconf/rng.hpp"

namespace docconf {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// --- probability maps -------------------------------------------------------

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

ProbabilityMap decode_pmap(const std::vector<std::uint8_t>& in) {
  if (in.size() < 16) throw ParseError("PMAP header truncated", in.size());
  const std::uint16_t version = static_cast<std::uint16_t>(in[4] | (in[5] << 8));
  if (version != kPmapVersion) {
    throw ParseError("unsupported PMAP version " + std::to_string(version), 4);
  }
  const std::uint32_t h = get_u32(in, 8), w = get_u32(in, 12);
  if (h == 0 || w == 0) throw ParseError("PMAP dimensions must be positive", 8);
  const std::uint64_t expected = static_cast<std::uint64_t>(h) * w * 4;
  if (in.size() - 16 != expected) {
    throw ParseError("PMAP payload is " + std::to_string(in.size() - 16) + " bytes, header declares " +
                         std::to_string(h) + "x" + std::to_string(w) + " floats (" +
                         std::to_string(expected) + " bytes)",
                     16);
  }
  std::vector<float> values(static_cast<std::size_t>(h) * w);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = std::bit_cast<float>(get_u32(in, 16 + 4 * i));
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ParseError("probability " + fmt::format("{}", v) + " outside [0,1]", 16 + 4 * i);
    }
    values[i] = v;
  }
  return ProbabilityMap(static_cast<int>(h), static_cast<int>(w), std::move(values));
}

class PgmScanner {
 public:
  explicit PgmScanner(const std::vector<std::uint8_t>& in) : in_(in) {}

  long long integer(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < in_.size() && std::isdigit(in_[pos_])) {
      v = v * 10 + (in_[pos_] - '0');
      if (v > 1'000'000'000) throw ParseError(std::string("graymap ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("graymap: expected ") + what, start);
    return v;
  }
  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < in_.size()) {
      if (std::isspace(in_[pos_])) {
        ++pos_;
      } else if (in_[pos_] == '#') {
        while (pos_ < in_.size() && in_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 2;
};

ProbabilityMap decode_pgm(const std::vector<std::uint8_t>& in) {
  const bool binary = in[1] == '5';
  PgmScanner sc(in);
  const long long w = sc.integer("width");
  const long long h = sc.integer("height");
  const std::size_t maxval_at = sc.pos();
  const long long maxval = sc.integer("maxval");
  if (w < 1 || h < 1) throw ParseError("graymap dimensions must be positive", 2);
  if (maxval < 1 || maxval > 255) {
    throw ParseError("only 8-bit graymaps are supported (maxval " + std::to_string(maxval) + ")",
                     maxval_at);
  }
  std::vector<float> values(static_cast<std::size_t>(h * w));
  if (binary) {
    sc.advance(1);  // single whitespace after maxval
    const std::size_t start = sc.pos();
    if (in.size() < start || in.size() - start != values.size()) {
      throw ParseError("graymap payload is " + std::to_string(in.size() - std::min(in.size(), start)) +
                           " bytes, expected " + std::to_string(values.size()),
                       start);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const unsigned px = in[start + i];
      if (px > maxval) throw ParseError("graymap pixel above maxval", start + i);
      values[i] = static_cast<float>(static_cast<double>(px) / static_cast<double>(maxval));
    }
  } else {
    for (auto& v : values) {
      const std::size_t at = sc.pos();
      const long long px = sc.integer("pixel");
      if (px > maxval) throw ParseError("graymap pixel above maxval", at);
      v = static_cast<float>(static_cast<double>(px) / static_cast<double>(maxval));
    }
  }
  return ProbabilityMap(static_cast<int>(h), static_cast<int>(w), std::move(values));
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<std::uint8_t> encode_pmap(const ProbabilityMap& m) {
  std::vector<std::uint8_t> out{'P', 'M', 'A', 'P'};
  out.reserve(16 + m.values().size() * 4);
  put_u16(out, kPmapVersion);
  put_u16(out, 0);
  put_u32(out, static_cast<std::uint32_t>(m.height()));
  put_u32(out, static_cast<std::uint32_t>(m.width()));
  for (float v : m.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

ProbabilityMap decode_probability_map(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "PMAP", 4) == 0) return decode_pmap(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
    return decode_pgm(bytes);
  }
  std::string magic;
  for (std::size_t i = 0; i < std::min<std::size_t>(4, bytes.size()); ++i) {
    const char c = static_cast<char>(bytes[i]);
    magic += std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : fmt::format("\\x{:02x}", bytes[i]);
  }
  throw ParseError("bad magic '" + magic + "' (expected PMAP or a P5/P2 graymap)", 0);
}

void save_probability_map(const ProbabilityMap& m, const fs::path& path) {
  write_bytes(path, encode_pmap(m));
}

ProbabilityMap load_probability_map(const fs::path& path) {
  try {
    return decode_probability_map(read_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// --- polygon documents --------------------------------------------------------

namespace {

ojson polygon_json(const Polygon& p) {
  ojson pts = ojson::array();
  for (const auto& v : p.vertices()) pts.push_back(ojson::array({v.x, v.y}));
  return pts;
}

std::string finish_document(ojson doc, const std::string& meta_json, int indent = -1) {
  if (!meta_json.empty()) doc["meta"] = ojson::parse(meta_json);
  return doc.dump(indent) + "\n";
}

[[noreturn]] void schema(const std::string& path, const std::string& what) { throw SchemaError(path, what); }

int positive_int(const ojson& doc, const char* key) {
  const std::string path = std::string("$.") + key;
  if (!doc.contains(key)) schema(path, "missing required field");
  const auto& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1'000'000) {
    schema(path, "must be a positive integer");
  }
  return v.get<int>();
}

}  // namespace

std::string polygons_to_json(const Prediction& p, const std::string& meta_json) {
  ojson doc;
  doc["image_id"] = p.image_id;
  doc["height"] = p.height;
  doc["width"] = p.width;
  doc["objects"] = ojson::array();
  for (const auto& o : p.objects) {
    ojson obj;
    obj["polygon"] = polygon_json(o.polygon);
    obj["mean_prob"] = o.mean_prob;
    obj["pixel_area"] = o.pixel_area;
    doc["objects"].push_back(std::move(obj));
  }
  return finish_document(std::move(doc), meta_json);
}

std::string polygons_to_json(const GroundTruth& g, const std::string& meta_json) {
  ojson doc;
  doc["image_id"] = g.image_id;
  doc["height"] = g.height;
  doc["width"] = g.width;
  doc["objects"] = ojson::array();
  for (const auto& poly : g.objects) doc["objects"].push_back(ojson{{"polygon", polygon_json(poly)}});
  return finish_document(std::move(doc), meta_json);
}

PolygonDocument parse_polygons(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) schema("$", "document must be an object");
  PolygonDocument out;
  if (!doc.contains("image_id")) schema("$.image_id", "missing required field");
  if (!doc["image_id"].is_string()) schema("$.image_id", "must be a string");
  out.image_id = doc["image_id"].get<std::string>();
  out.height = positive_int(doc, "height");
  out.width = positive_int(doc, "width");
  if (!doc.contains("objects")) schema("$.objects", "missing required field");
  const auto& objects = doc["objects"];
  if (!objects.is_array()) schema("$.objects", "must be an array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string opath = "$.objects[" + std::to_string(i) + "]";
    const auto& o = objects[i];
    if (!o.is_object()) schema(opath, "must be an object");
    if (!o.contains("polygon")) schema(opath + ".polygon", "missing required field");
    const auto& pts = o["polygon"];
    if (!pts.is_array()) schema(opath + ".polygon", "must be an array of [x, y] pairs");
    std::vector<Point> vertices;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto& pt = pts[j];
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        schema(opath + ".polygon[" + std::to_string(j) + "]", "must be an [x, y] pair of numbers");
      }
      vertices.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    PolygonDocument::Object obj{[&] {
      try {
        return Polygon(std::move(vertices));
      } catch (const InvalidGeometry& e) {
        throw InvalidGeometry(opath + ".polygon: " + e.what());
      }
    }(), std::nullopt, std::nullopt};
    if (o.contains("mean_prob")) {
      const auto& mp = o["mean_prob"];
      if (!mp.is_number() || !(mp.get<double>() >= 0.0 && mp.get<double>() <= 1.0)) {
        schema(opath + ".mean_prob", "must be a number in [0,1]");
      }
      obj.mean_prob = mp.get<double>();
    }
    if (o.contains("pixel_area")) {
      const auto& pa = o["pixel_area"];
      if (!pa.is_number_integer() || pa.get<long long>() < 0) {
        schema(opath + ".pixel_area", "must be a non-negative integer");
      }
      obj.pixel_area = pa.get<long long>();
    }
    out.objects.push_back(std::move(obj));
  }
  return out;
}

GroundTruth to_ground_truth(const PolygonDocument& d) {
  GroundTruth g{d.image_id, d.height, d.width, {}};
  for (const auto& o : d.objects) g.objects.push_back(o.polygon);
  return g;
}

Prediction to_prediction(const PolygonDocument& d) {
  Prediction p{d.image_id, d.height, d.width, {}};
  for (const auto& o : d.objects) {
    const long long area = o.pixel_area ? *o.pixel_area
                                        : rasterize_object(o.polygon, d.height, d.width).count;
    p.objects.push_back(DetectedObject{o.polygon, bounding_rect(o.polygon), area, o.mean_prob.value_or(1.0)});
  }
  return p;
}

void save_polygons(const Prediction& p, const fs::path& path) { write_text_file(path, polygons_to_json(p)); }
void save_polygons(const GroundTruth& g, const fs::path& path) { write_text_file(path, polygons_to_json(g)); }

PolygonDocument load_polygons(const fs::path& path) {
  try {
    return parse_polygons(read_text_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(e.path(), path.string() + ": " + std::string(e.what()).substr(e.path().size() + 2));
  }
}

// --- manifests ----------------------------------------------------------------

Manifest load_manifest(const fs::path& path) {
  ojson doc;
  try {
    doc = ojson::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what(), e.byte);
  }
  Manifest m;
  m.base_dir = path.parent_path();
  std::vector<std::string> problems;
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw SchemaError("$.images", path.string() + ": manifest needs an \"images\" array");
  }
  std::set<std::string> ids;
  const auto& images = doc["images"];
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string at = "$.images[" + std::to_string(i) + "]";
    const auto& e = images[i];
    if (!e.is_object()) {
      problems.push_back(at + ": must be an object");
      continue;
    }
    ManifestEntry entry;
    if (!e.contains("image_id") || !e["image_id"].is_string()) {
      problems.push_back(at + ".image_id: missing or not a string");
    } else {
      entry.image_id = e["image_id"].get<std::string>();
      if (!ids.insert(entry.image_id).second) {
        problems.push_back(at + ".image_id: duplicate id '" + entry.image_id + "'");
      }
      if (entry.image_id.find_first_of(",\n\r") != std::string::npos) {
        problems.push_back(at + ".image_id: must not contain commas or newlines");
      }
    }
    for (const char* key : {"height", "width"}) {
      if (!e.contains(key)) continue;
      if (!e[key].is_number_integer() || e[key].get<long long>() < 1) {
        problems.push_back(at + "." + key + ": must be a positive integer");
      } else {
        (std::string(key) == "height" ? entry.height : entry.width) = e[key].get<int>();
      }
    }
    auto paths = [&](const char* key, std::vector<fs::path>& out) {
      if (!e.contains(key)) return;
      const auto& arr = e[key];
      if (!arr.is_array()) {
        problems.push_back(at + "." + key + ": must be an array of paths");
        return;
      }
      for (std::size_t k = 0; k < arr.size(); ++k) {
        if (!arr[k].is_string()) {
          problems.push_back(at + "." + key + "[" + std::to_string(k) + "]: must be a string");
          continue;
        }
        out.emplace_back(arr[k].get<std::string>());
        if (!fs::exists(m.resolve(out.back()))) {
          problems.push_back(at + "." + key + "[" + std::to_string(k) + "]: file not found: " +
                             m.resolve(out.back()).string());
        }
      }
    };
    paths("maps", entry.maps);
    paths("predictions", entry.predictions);
    if (e.contains("ground_truth")) {
      if (!e["ground_truth"].is_string()) {
        problems.push_back(at + ".ground_truth: must be a string");
      } else {
        entry.ground_truth = fs::path(e["ground_truth"].get<std::string>());
        if (!fs::exists(m.resolve(*entry.ground_truth))) {
          problems.push_back(at + ".ground_truth: file not found: " + m.resolve(*entry.ground_truth).string());
        }
      }
    }
    if (entry.maps.empty() && entry.predictions.empty() && !entry.ground_truth) {
      problems.push_back(at + ": lists no maps, predictions or ground_truth");
    }
    m.entries.push_back(std::move(entry));
  }
  if (!problems.empty()) {
    std::string msg = path.string() + ": " + std::to_string(problems.size()) + " manifest problem(s):";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InvalidArgument(msg);
  }
  return m;
}

std::string manifest_to_json(const Manifest& m, const std::string& meta_json) {
  ojson doc;
  doc["images"] = ojson::array();
  for (const auto& e : m.entries) {
    ojson j;
    j["image_id"] = e.image_id;
    if (e.height > 0) j["height"] = e.height;
    if (e.width > 0) j["width"] = e.width;
    auto strs = [](const std::vector<fs::path>& v) {
      ojson a = ojson::array();
      for (const auto& p : v) a.push_back(p.generic_string());
      return a;
    };
    if (!e.maps.empty()) j["maps"] = strs(e.maps);
    if (!e.predictions.empty()) j["predictions"] = strs(e.predictions);
    if (e.ground_truth) j["ground_truth"] = e.ground_truth->generic_string();
    doc["images"].push_back(std::move(j));
  }
  return finish_document(std::move(doc), meta_json, 1);
}

void save_manifest(const Manifest& m, const fs::path& path, const std::string& meta_json) {
  write_text_file(path, manifest_to_json(m, meta_json));
}

// --- CSV --------------------------------------------------------------------------

std::string format_number(double v) {
  if (v == 0.0) return "0";  // no "-0"
  return fmt::format("{}", v);
}

std::string OutputHeader::digest() const {
  std::string canon = command;
  for (const auto& [k, v] : fields) canon += "\n" + k + "=" + v;
  return fmt::format("{:016x}", hash_string(canon));
}

std::string OutputHeader::render() const {
  std::string out = fmt::format("# tool=docconf {}\n# command={}\n", kToolVersion, command);
  for (const auto& [k, v] : fields) out += "# " + k + "=" + v + "\n";
  out += "# config_digest=" + digest() + "\n";
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t column(const CsvTable& t, const std::string& name) {
  auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw SchemaError("$." + name, "CSV lacks column '" + name + "'");
  return static_cast<std::size_t>(it - t.columns.begin());
}

double number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("not a number: '" + s + "' in " + where);
}

bool boolean(const std::string& s) { return s == "1" || s == "true"; }

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
      continue;
    }
    auto cells = split(line);
    if (!have_header) {
      t.columns = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.columns.size()) {
        throw ParseError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " cells, header has " + std::to_string(t.columns.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw ParseError("CSV has no header line");
  return t;
}

CsvTable read_csv(const fs::path& path) {
  try {
    return parse_csv(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text_file(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

std::string confidence_csv(const std::vector<ConfidenceScore>& scores) {
  std::string out = "image_id,estimator,value,higher_is_confident,conventional\n";
  for (const auto& s : scores) {
    out += fmt::format("{},{},{},{},{}\n", s.image_id, to_string(s.estimator), format_number(s.value),
                       s.higher_is_confident ? 1 : 0, s.conventional ? 1 : 0);
  }
  return out;
}

std::vector<ConfidenceScore> parse_confidence_csv(const CsvTable& t) {
  const auto id = column(t, "image_id"), est = column(t, "estimator"), val = column(t, "value");
  const auto hic = column(t, "higher_is_confident");
  const auto conv = std::find(t.columns.begin(), t.columns.end(), "conventional") - t.columns.begin();
  std::vector<ConfidenceScore> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    ConfidenceScore s;
    s.image_id = row[id];
    s.estimator = parse_estimator(row[est]);
    s.value = number(row[val], "row " + std::to_string(r + 1));
    s.higher_is_confident = boolean(row[hic]);
    s.conventional = static_cast<std::size_t>(conv) < t.columns.size() && boolean(row[conv]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string image_scores_csv(const DatasetScores& s) {
  std::string out = "image_id,pixel_iou,map\n";
  for (const auto& i : s.images) {
    out += fmt::format("{},{},{}\n", i.image_id, format_number(i.pixel_iou), format_number(i.map));
  }
  out += "# mean_pixel_iou=" + format_number(s.mean_pixel_iou) + "\n";
  out += "# mean_map=" + format_number(s.mean_map) + "\n";
  return out;
}

std::vector<ImageScore> parse_image_scores_csv(const CsvTable& t) {
  const auto id = column(t, "image_id"), iou = column(t, "pixel_iou"), map = column(t, "map");
  std::vector<ImageScore> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    out.push_back(ImageScore{row[id], number(row[iou], where), number(row[map], where)});
  }
  return out;
}

std::string features_csv(const std::vector<FeatureVector>& rows, const FeatureConfig& cfg) {
  std::string out = "# feature_config=" + cfg.fingerprint() + "\nimage_id";
  for (std::size_t i = 0; i < cfg.vector_length(); ++i) out += fmt::format(",v_{}", i);
  out += "\n";
  for (const auto& r : rows) {
    out += r.image_id;
    for (double v : r.values) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

std::vector<FeatureVector> parse_features_csv(const CsvTable& t) {
  if (t.columns.empty() || t.columns.front() != "image_id") {
    throw SchemaError("$.image_id", "feature CSV must start with an image_id column");
  }
  std::vector<FeatureVector> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    FeatureVector v{t.rows[r][0], {}};
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
      v.values.push_back(number(t.rows[r][c], "row " + std::to_string(r + 1)));
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string targets_csv(const std::vector<ImageScore>& scores) {
  std::string out = "image_id,map\n";
  for (const auto& s : scores) out += s.image_id + "," + format_number(s.map) + "\n";
  return out;
}

std::map<std::string, double> parse_targets_csv(const CsvTable& t) {
  const auto id = column(t, "image_id"), map = column(t, "map");
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!out.emplace(t.rows[r][id], number(t.rows[r][map], "row " + std::to_string(r + 1))).second) {
      throw InvalidArgument("duplicate image id '" + t.rows[r][id] + "' in targets");
    }
  }
  return out;
}

std::string curve_csv(const RejectCurve& c) {
  std::string out = "threshold,rejection_rate,metric,n_remaining\n";
  for (const auto& p : c.points) {
    out += fmt::format("{},{},{},{}\n", format_number(p.threshold), format_number(p.rejection_rate),
                       format_number(p.metric), p.n_remaining);
  }
  return out;
}

std::string band_csv(const CurveBand& b) {
  std::string out = "rejection_rate,p10,median,p90\n";
  for (std::size_t i = 0; i < b.rejection_rate.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", format_number(b.rejection_rate[i]), format_number(b.p10[i]),
                       format_number(b.median[i]), format_number(b.p90[i]));
  }
  return out;
}

std::string al_log_csv(const std::vector<IterationLog>& log) {
  std::string out = "iteration,estimator,policy,n_selected,cumulative_images,test_iou,test_map\n";
  for (const auto& r : log) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.iteration, r.estimator, r.policy, r.n_selected,
                       r.cumulative_images, format_number(r.test_iou), format_number(r.test_map));
  }
  return out;
}

}  // namespace docconf
