#include "docconf/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <thread>

#include "docconf/error.hpp"
#include "docconf/rng.hpp"

namespace docconf {

void ForestParams::validate() const {
  if (n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
  if (max_depth < 0) throw InvalidArgument("max_depth must be >= 0 (0 = unlimited)");
  if (min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
  if (features_per_split < 0) throw InvalidArgument("features_per_split must be >= 0");
}

double RegressionTree::predict(const std::vector<double>& x) const {
  std::int32_t i = 0;
  while (nodes[i].feature >= 0) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

ForestModel::ForestModel(ForestParams params, FeatureConfig features, std::size_t n_inputs,
                         std::vector<RegressionTree> trees, double target_min, double target_max)
    : params_(params),
      features_(std::move(features)),
      n_inputs_(n_inputs),
      trees_(std::move(trees)),
      target_min_(target_min),
      target_max_(target_max) {}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const RegressionDataset& data, const ForestParams& params, Rng& rng)
      : data_(data), params_(params), rng_(rng), n_inputs_(data.front().x.size()) {}

  RegressionTree build(std::vector<int> samples) {
    tree_.nodes.clear();
    grow(samples, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;  // sum_l^2/n_l + sum_r^2/n_r, larger is better
  };

  std::int32_t grow(std::vector<int>& samples, int depth) {
    const std::int32_t id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double sum = 0.0, lo = data_[samples.front()].target, hi = lo;
    for (int s : samples) {
      const double y = data_[s].target;
      sum += y;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    tree_.nodes[id].value = lo == hi ? lo : std::clamp(sum / static_cast<double>(samples.size()), lo, hi);
    const bool depth_done = params_.max_depth > 0 && depth >= params_.max_depth;
    if (depth_done || static_cast<int>(samples.size()) < params_.min_samples_split || lo == hi) {
      return id;
    }
    const Split best = find_split(samples);
    if (best.feature < 0) return id;

    std::vector<int> left, right;
    for (int s : samples) {
      (data_[s].x[best.feature] <= best.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    const std::int32_t l = grow(left, depth + 1);
    tree_.nodes[id].left = l;
    const std::int32_t r = grow(right, depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  std::vector<int> candidate_features() {
    std::vector<int> all(n_inputs_);
    std::iota(all.begin(), all.end(), 0);
    const int k = params_.features_per_split;
    if (k == 0 || k >= static_cast<int>(n_inputs_)) return all;
    // Partial Fisher-Yates, then ascending order for deterministic tie-breaks.
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng_.below(n_inputs_ - i));
      std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split find_split(const std::vector<int>& samples) {
    Split best;
    const std::size_t n = samples.size();
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    double total = 0.0;
    for (int s : samples) total += data_[s].target;
    std::vector<std::pair<double, double>> xy(n);
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) {
        xy[i] = {data_[samples[i]].x[f], data_[samples[i]].target};
      }
      std::sort(xy.begin(), xy.end());
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += xy[i].second;
        if (xy[i].first == xy[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(nl) +
                             right_sum * right_sum / static_cast<double>(nr);
        if (score > best.score) {
          double mid = xy[i].first + (xy[i + 1].first - xy[i].first) / 2.0;
          if (!(mid < xy[i + 1].first)) mid = xy[i].first;
          best = Split{f, mid, score};
        }
      }
    }
    return best;
  }

  const RegressionDataset& data_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t n_inputs_;
  RegressionTree tree_;
};

void check_dataset(const RegressionDataset& data) {
  if (data.empty()) throw InvalidArgument("regression dataset is empty");
  const std::size_t len = data.front().x.size();
  if (len == 0) throw InvalidArgument("regression dataset has zero-length feature vectors");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].x.size() != len) {
      throw LengthMismatch("row " + std::to_string(i) + " has " +
                           std::to_string(data[i].x.size()) + " features, expected " +
                           std::to_string(len));
    }
    if (!(data[i].target >= 0.0 && data[i].target <= 1.0)) {
      throw InvalidArgument("row " + std::to_string(i) + " target outside [0,1]");
    }
  }
}

}  // namespace

ForestModel fit(const RegressionDataset& data, const ForestParams& params,
                const FeatureConfig& features, int jobs) {
  params.validate();
  check_dataset(data);
  const std::size_t n = data.size();
  const std::size_t n_trees = static_cast<std::size_t>(params.n_trees);
  std::vector<RegressionTree> trees(n_trees);
  std::vector<std::vector<std::uint8_t>> in_bag(n_trees, std::vector<std::uint8_t>(n, 0));

  auto grow_tree = [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, {t}));
    std::vector<int> samples(n);
    if (params.bootstrap) {
      for (auto& s : samples) s = static_cast<int>(rng.below(n));
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    for (int s : samples) in_bag[t][s] = 1;
    TreeBuilder builder(data, params, rng);
    trees[t] = builder.build(std::move(samples));
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < n_trees; ++t) grow_tree(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < n_trees; t += workers) grow_tree(t);
      });
    }
  }

  double lo = data.front().target, hi = lo;
  for (const auto& r : data) {
    lo = std::min(lo, r.target);
    hi = std::max(hi, r.target);
  }
  ForestModel model(params, features, data.front().x.size(), std::move(trees), lo, hi);

  double sq = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t t = 0; t < n_trees; ++t) {
      if (in_bag[t][i]) continue;
      sum += model.trees()[t].predict(data[i].x);
      ++k;
    }
    if (k == 0) continue;
    const double d = sum / static_cast<double>(k) - data[i].target;
    sq += d * d;
    ++counted;
  }
  if (counted > 0) model.set_oob_mse(sq / static_cast<double>(counted));
  return model;
}

double predict(const ForestModel& m, const std::vector<double>& x) {
  if (x.size() != m.n_inputs()) {
    throw LengthMismatch("feature vector has length " + std::to_string(x.size()) +
                         ", model expects " + std::to_string(m.n_inputs()));
  }
  // Mean anchored at the first tree: exact when all trees agree, clamped to
  // the range of the leaves reached.
  const double first = m.trees().front().predict(x);
  double offset = 0.0, lo = first, hi = first;
  for (std::size_t t = 1; t < m.trees().size(); ++t) {
    const double v = m.trees()[t].predict(x);
    offset += v - first;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::clamp(first + offset / static_cast<double>(m.trees().size()), lo, hi);
}

double predict(const ForestModel& m, const FeatureVector& x) { return predict(m, x.values); }

double mse(const ForestModel& m, const RegressionDataset& data) {
  if (data.empty()) throw InvalidArgument("cannot compute MSE on an empty dataset");
  double sq = 0.0;
  for (const auto& r : data) {
    const double d = predict(m, r.x) - r.target;
    sq += d * d;
  }
  return sq / static_cast<double>(data.size());
}

// --- serialization ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'D', 'C', 'R', 'F'};
constexpr std::uint16_t kVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::size_t end) : in_(in), end_(end) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1, "u8")); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2, "u16")); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4, "u32")); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4, "i32"))); }
  std::uint64_t u64() { return get(8, "u64"); }
  double f64() { return std::bit_cast<double>(get(8, "f64")); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n, "string");
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (pos_ + n > end_) {
      throw ParseError(std::string("model file truncated while reading ") + what, pos_);
    }
  }
  std::uint64_t get(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint64_t checksum(const std::uint8_t* p, std::size_t n) {
  return hash_string(std::string_view(reinterpret_cast<const char*>(p), n));
}

}  // namespace

std::vector<std::uint8_t> serialize(const ForestModel& m) {
  Writer w;
  w.raw(kMagic, 4);
  w.u16(kVersion);
  w.u16(0);
  const ForestParams& p = m.params();
  w.i32(p.n_trees);
  w.i32(p.max_depth);
  w.i32(p.min_samples_split);
  w.i32(p.min_samples_leaf);
  w.i32(p.features_per_split);
  w.u8(p.bootstrap ? 1 : 0);
  w.u64(p.seed);
  const FeatureConfig& fc = m.feature_config();
  w.i32(fc.bins);
  w.u8(fc.normalize ? 1 : 0);
  for (const auto& r : fc.ranges) {
    w.f64(r.lo);
    w.f64(r.hi);
  }
  w.str(fc.fingerprint());
  w.u64(m.n_inputs());
  w.f64(m.target_min());
  w.f64(m.target_max());
  w.u32(static_cast<std::uint32_t>(m.trees().size()));
  for (const auto& t : m.trees()) {
    w.u32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& node : t.nodes) {
      w.i32(node.feature);
      w.f64(node.threshold);
      w.i32(node.left);
      w.i32(node.right);
      w.f64(node.value);
    }
  }
  w.u64(checksum(w.bytes().data(), w.bytes().size()));
  return std::move(w.bytes());
}

ForestModel deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw ParseError("model file too short", bytes.size());
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw ParseError("bad model magic '" + std::string(bytes.begin(), bytes.begin() + 4) + "'", 0);
  }
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
  Reader r(bytes, body);
  r.u32();  // magic
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw ParseError("unsupported model version " + std::to_string(version) + " (expected " +
                         std::to_string(kVersion) + ")",
                     4);
  }
  // Checked before decoding so a truncated or corrupt file never yields a partial model.
  if (stored != checksum(bytes.data(), body)) {
    throw ParseError("model checksum mismatch (file truncated or corrupt)", body);
  }
  r.u16();
  ForestParams p;
  p.n_trees = r.i32();
  p.max_depth = r.i32();
  p.min_samples_split = r.i32();
  p.min_samples_leaf = r.i32();
  p.features_per_split = r.i32();
  p.bootstrap = r.u8() != 0;
  p.seed = r.u64();
  FeatureConfig fc;
  fc.bins = r.i32();
  fc.normalize = r.u8() != 0;
  for (auto& range : fc.ranges) {
    range.lo = r.f64();
    range.hi = r.f64();
  }
  const std::size_t fp_at = r.pos();
  const std::string fingerprint = r.str();
  if (fingerprint != fc.fingerprint()) {
    throw ParseError("feature-config fingerprint does not match stored config", fp_at);
  }
  const std::uint64_t n_inputs = r.u64();
  const double tmin = r.f64();
  const double tmax = r.f64();
  const std::uint32_t n_trees = r.u32();
  if (n_trees == 0 || static_cast<int>(n_trees) != p.n_trees) {
    throw ParseError("tree count does not match parameters", r.pos());
  }
  std::vector<RegressionTree> trees(n_trees);
  for (auto& t : trees) {
    const std::size_t at = r.pos();
    const std::uint32_t n_nodes = r.u32();
    if (n_nodes == 0) throw ParseError("tree without nodes", at);
    t.nodes.resize(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      const std::size_t node_at = r.pos();
      auto& node = t.nodes[i];
      node.feature = r.i32();
      node.threshold = r.f64();
      node.left = r.i32();
      node.right = r.i32();
      node.value = r.f64();
      const bool leaf = node.feature < 0;
      const bool ok =
          leaf ? (node.feature == -1 && node.left == -1 && node.right == -1)
               : (static_cast<std::uint64_t>(node.feature) < n_inputs &&
                  node.left > static_cast<std::int32_t>(i) && node.right > static_cast<std::int32_t>(i) &&
                  node.left < static_cast<std::int32_t>(n_nodes) &&
                  node.right < static_cast<std::int32_t>(n_nodes));
      if (!ok) throw ParseError("malformed tree node " + std::to_string(i), node_at);
    }
  }
  if (r.pos() != body) throw ParseError("trailing bytes after model body", r.pos());
  return ForestModel(p, fc, static_cast<std::size_t>(n_inputs), std::move(trees), tmin, tmax);
}

void save(const ForestModel& m, const std::filesystem::path& path) {
  const auto bytes = serialize(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing model to '" + path.string() + "'");
}

ForestModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return deserialize(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace docconf
