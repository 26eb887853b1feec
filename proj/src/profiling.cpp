#include "rasid/profiling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rasid/error.hpp"

namespace rasid {

using nlohmann::json;

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::mean: return "mean";
    case FeatureKind::std_dev: return "std_dev";
    case FeatureKind::variance: return "variance";
  }
  return "variance";
}

FeatureKind parse_feature_kind(const std::string& text) {
  if (text == "mean") return FeatureKind::mean;
  if (text == "std_dev") return FeatureKind::std_dev;
  if (text == "variance") return FeatureKind::variance;
  throw ConfigError("unknown feature kind '" + text + "'");
}

double feature(std::span<const double> window, FeatureKind kind) {
  const std::size_t l = window.size();
  if (l == 0) throw DataError("feature: empty window");
  const double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(l);
  if (kind == FeatureKind::mean) return mean;
  if (l < 2) throw DataError("feature: dispersion needs a window of at least 2 samples");
  double ss = 0.0;
  for (double v : window) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(l - 1);
  return kind == FeatureKind::variance ? var : std::sqrt(var);
}

double histogram_distance(std::span<const double> a, std::span<const double> b, std::size_t bins) {
  if (bins == 0) throw DataError("histogram_distance: bins must be > 0");
  if (a.empty() || b.empty()) throw DataError("histogram_distance: empty sample");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  const double width = (hi - lo) / static_cast<double>(bins);

  auto histogram = [&](std::span<const double> xs) {
    std::vector<double> h(bins, 0.0);
    for (double v : xs) {
      std::size_t idx = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
      h[std::min(idx, bins - 1)] += 1.0;
    }
    for (auto& c : h) c /= static_cast<double>(xs.size());
    return h;
  };
  const auto ha = histogram(a);
  const auto hb = histogram(b);
  double ss = 0.0;
  for (std::size_t i = 0; i < bins; ++i) ss += (ha[i] - hb[i]) * (ha[i] - hb[i]);
  return std::sqrt(ss);
}

std::vector<double> linear_weights(std::size_t n) {
  std::vector<double> w(n);
  const double total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(i + 1) / total;
  return w;
}

// ---------------------------------------------------------------------------

double NormalProfile::score(double x) const {
  if (is_dispersion(feature)) return x / upper;
  if (x >= center) {
    const double span = upper - center;
    return span > 0.0 ? (x - center) / span : (x > center ? INFINITY : 0.0);
  }
  const double span = center - *lower;
  return span > 0.0 ? (center - x) / span : INFINITY;
}

bool NormalProfile::anomalous(double x) const { return score(x) > 1.0; }

namespace {

void set_bounds(NormalProfile& p) {
  if (is_dispersion(p.feature)) {
    p.upper = p.model.quantile(1.0 - p.alpha);
    p.lower.reset();
    p.center = 0.0;
  } else {
    p.lower = p.model.quantile(p.alpha / 2.0);
    p.upper = p.model.quantile(1.0 - p.alpha / 2.0);
    p.center = p.model.quantile(0.5);
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

}  // namespace

NormalProfile make_profile(const StreamId& stream, FeatureKind kind, std::vector<double> points,
                           double alpha, std::size_t window) {
  check_alpha(alpha);
  const std::size_t n = points.size();
  NormalProfile p{.stream = stream,
                  .feature = kind,
                  .model = KdeModel::fit(std::move(points)),
                  .alpha = alpha,
                  .upper = 0.0,
                  .lower = std::nullopt,
                  .center = 0.0,
                  .capacity = n,
                  .window = window};
  set_bounds(p);
  return p;
}

NormalProfile build_profile(const RssTrace& training, const StreamId& stream, std::size_t l,
                            double alpha, FeatureKind kind) {
  check_alpha(alpha);
  if (l < 2) throw ConfigError("window length l must be >= 2");
  const auto n = training.samples(stream).size();
  if (n < l + 1) {
    throw DataError("stream " + stream.str() + " has " + std::to_string(n) +
                    " training samples, need at least " + std::to_string(l + 1));
  }
  std::vector<double> points;
  for (const auto& w : windows(training, stream, l)) points.push_back(feature(w.samples, kind));
  return make_profile(stream, kind, std::move(points), alpha, l);
}

NormalProfile maybe_update(const NormalProfile& profile, std::span<const ScoredFeature> group,
                           const UpdatePolicy& policy) {
  if (policy.l_update == 0) throw ConfigError("l_update must be >= 1");
  if (group.size() != policy.l_update) {
    throw DataError("update group has " + std::to_string(group.size()) + " entries, expected " +
                    std::to_string(policy.l_update));
  }
  double total = 0.0;
  for (const auto& g : group) total += g.score;
  if (!(total / static_cast<double>(group.size()) < 1.0)) return profile;

  const std::size_t n = profile.capacity;
  const auto old = profile.model.points();
  std::vector<double> points;
  points.reserve(n);
  if (group.size() >= n) {
    for (std::size_t i = group.size() - n; i < group.size(); ++i) points.push_back(group[i].x);
  } else {
    points.assign(old.begin() + static_cast<std::ptrdiff_t>(group.size()), old.end());
    for (const auto& g : group) points.push_back(g.x);
  }

  NormalProfile next = profile;
  next.model = KdeModel::fit(std::move(points), linear_weights(n));
  next.updates = profile.updates + 1;
  set_bounds(next);
  return next;
}

// ---------------------------------------------------------------------------
// persistence

json to_json(const NormalProfile& p) {
  json doc{{"stream", p.stream.str()},
           {"feature", to_string(p.feature)},
           {"alpha", p.alpha},
           {"u", p.upper},
           {"n", p.capacity},
           {"l", p.window},
           {"updates", p.updates},
           {"kde", to_json(p.model)}};
  if (p.lower) {
    doc["lower"] = *p.lower;
    doc["center"] = p.center;
  }
  return doc;
}

NormalProfile profile_from_json(const json& doc) {
  try {
    NormalProfile p{.stream = StreamId::parse(doc.at("stream").get<std::string>()),
                    .feature = parse_feature_kind(doc.at("feature").get<std::string>()),
                    .model = kde_from_json(doc.at("kde")),
                    .alpha = doc.at("alpha").get<double>(),
                    .upper = doc.at("u").get<double>(),
                    .lower = std::nullopt,
                    .center = 0.0,
                    .capacity = doc.at("n").get<std::size_t>(),
                    .window = doc.value("l", std::size_t{0}),
                    .updates = doc.value("updates", std::size_t{0})};
    if (doc.contains("lower")) {
      p.lower = doc.at("lower").get<double>();
      p.center = doc.at("center").get<double>();
    }
    if (p.model.size() != p.capacity) throw DataError("profile n does not match kde point count");
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("profile document: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("profile document: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const ProfileBundle& bundle) {
  json doc = json::object();
  json profiles = json::array();
  for (const auto& p : bundle) profiles.push_back(to_json(p));
  doc["profiles"] = profiles;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

ProfileBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open profile bundle " + path.string());
  ProfileBundle bundle;
  try {
    const json doc = json::parse(in);
    for (const auto& p : doc.at("profiles")) bundle.push_back(profile_from_json(p));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return bundle;
}

const NormalProfile* find_profile(const ProfileBundle& bundle, const StreamId& stream) {
  for (const auto& p : bundle) {
    if (p.stream == stream) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> window_features(std::span<const double> xs, std::size_t l, FeatureKind kind) {
  std::vector<double> out;
  for (std::size_t end = l; end <= xs.size(); ++end) out.push_back(feature(xs.subspan(end - l, l), kind));
  return out;
}

}  // namespace

std::vector<FeatureStudyRow> feature_study(std::span<const double> silence,
                                           std::span<const double> motion,
                                           std::span<const std::size_t> window_lengths,
                                           std::size_t bins) {
  std::vector<FeatureStudyRow> rows;
  for (std::size_t l : window_lengths) {
    if (l < 2 || silence.size() < l || motion.size() < l) {
      throw DataError("feature_study: window length " + std::to_string(l) + " does not fit the data");
    }
    FeatureStudyRow row{l, 0.0, 0.0};
    row.mean_distance = histogram_distance(window_features(silence, l, FeatureKind::mean),
                                           window_features(motion, l, FeatureKind::mean), bins);
    row.std_distance = histogram_distance(window_features(silence, l, FeatureKind::std_dev),
                                          window_features(motion, l, FeatureKind::std_dev), bins);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rasid
