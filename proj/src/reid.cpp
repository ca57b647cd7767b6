#include "mpf/reid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpf/errors.hpp"
#include "mpf/kernels.hpp"

namespace mpf::reid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Descriptor Descriptor::from_raw(const Eigen::VectorXd& raw) {
  if (raw.size() == 0) throw Error(ErrorCategory::invalid_argument, "descriptor is empty");
  if (!raw.allFinite()) throw Error(ErrorCategory::invalid_argument, "descriptor has non-finite entries");
  const double norm = raw.norm();
  if (!(norm > 0.0)) throw Error(ErrorCategory::invalid_argument, "descriptor has zero norm");
  return Descriptor(raw / norm);
}

Descriptor PassthroughExtractor::extract(const ExtractorInput& input) const {
  if (!input.raw) throw Error(ErrorCategory::invalid_argument, "passthrough extractor needs a descriptor vector");
  if (input.raw->size() != dim_) {
    throw Error(ErrorCategory::invalid_argument,
                "descriptor dimension " + std::to_string(input.raw->size()) + " does not match configured " +
                    std::to_string(dim_));
  }
  return Descriptor::from_raw(*input.raw);
}

void SyntheticAppearanceConfig::validate() const {
  if (dim < 1) throw SchemaError("appearance.dim", "must be >= 1");
  if (clusters < 1) throw SchemaError("appearance.clusters", "must be >= 1");
  if (2 + 4 * clusters > dim) throw SchemaError("appearance.dim", "too small for the number of clusters");
  if (!(similarity >= 0.0 && similarity <= 1.0)) throw SchemaError("appearance.similarity", "must be in [0, 1]");
  if (!(lower_similarity >= 0.0 && lower_similarity <= 1.0)) {
    throw SchemaError("appearance.lower_similarity", "must be in [0, 1]");
  }
  if (!(drift >= 0.0)) throw SchemaError("appearance.drift", "must be >= 0");
  if (!(noise >= 0.0)) throw SchemaError("appearance.noise", "must be >= 0");
}

SyntheticExtractor::SyntheticExtractor(SyntheticAppearanceConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int k = cfg_.clusters;
  const int needed = 2 + 4 * k;

  std::mt19937_64 rng(splitmix64(cfg_.seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gaussian(cfg_.dim, needed);
  for (Eigen::Index j = 0; j < gaussian.cols(); ++j) {
    for (Eigen::Index i = 0; i < gaussian.rows(); ++i) gaussian(i, j) = normal(rng);
  }
  const Eigen::MatrixXd basis =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ() *
      Eigen::MatrixXd::Identity(cfg_.dim, needed);

  const Eigen::VectorXd common_full = basis.col(0);
  const Eigen::VectorXd common_lower = basis.col(1);
  const double sf = std::sqrt(cfg_.similarity), pf = std::sqrt(1.0 - cfg_.similarity);
  const double sl = std::sqrt(cfg_.lower_similarity), pl = std::sqrt(1.0 - cfg_.lower_similarity);
  for (int c = 0; c < k; ++c) {
    full_means_.push_back(sf * common_full + pf * basis.col(2 + c));
    lower_means_.push_back(sl * common_lower + pl * basis.col(2 + k + c));
    view_a_.push_back(basis.col(2 + 2 * k + c));
    view_b_.push_back(basis.col(2 + 3 * k + c));
  }
}

const Eigen::VectorXd& SyntheticExtractor::full_mean(int cluster) const {
  return full_means_.at(static_cast<std::size_t>(cluster));
}

const Eigen::VectorXd& SyntheticExtractor::lower_mean(int cluster) const {
  return lower_means_.at(static_cast<std::size_t>(cluster));
}

Descriptor SyntheticExtractor::extract(const ExtractorInput& input) const {
  if (!input.appearance) {
    throw Error(ErrorCategory::invalid_argument, "synthetic extractor needs simulator appearance state");
  }
  return extract(*input.appearance);
}

Descriptor SyntheticExtractor::extract(const AppearanceObservation& obs) const {
  if (obs.cluster < 0 || obs.cluster >= cfg_.clusters) {
    throw Error(ErrorCategory::invalid_argument, "appearance cluster out of range");
  }
  const auto c = static_cast<std::size_t>(obs.cluster);
  const double upper = std::clamp(obs.upper_visibility, 0.0, 1.0);

  Eigen::VectorXd v = upper * full_means_[c] + (1.0 - upper) * lower_means_[c] +
                      cfg_.drift * (std::cos(obs.viewpoint) * view_a_[c] +
                                    std::sin(obs.viewpoint) * view_b_[c]);
  if (cfg_.noise > 0.0) {
    std::mt19937_64 rng(splitmix64(cfg_.seed ^ splitmix64(obs.noise_key)));
    std::normal_distribution<double> normal(0.0, cfg_.noise / std::sqrt(static_cast<double>(cfg_.dim)));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += normal(rng);
  }
  return Descriptor::from_raw(v);
}

std::unique_ptr<DescriptorExtractor> make_extractor(std::string_view name,
                                                    const ExtractorOptions& options) {
  if (name == "passthrough") return std::make_unique<PassthroughExtractor>(options.dim);
  if (name == "synthetic") {
    SyntheticAppearanceConfig cfg = options.synthetic;
    cfg.dim = options.dim;
    return std::make_unique<SyntheticExtractor>(cfg);
  }
  throw SchemaError("reid.extractor", "unknown extractor '" + std::string(name) +
                                          "' (expected passthrough or synthetic)");
}

// ---------------------------------------------------------------------------

std::string_view to_string(SamplingMode mode) {
  return mode == SamplingMode::short_term ? "ST" : "SLT";
}

SamplingMode sampling_mode_from_string(std::string_view name) {
  if (name == "ST" || name == "st") return SamplingMode::short_term;
  if (name == "SLT" || name == "slt") return SamplingMode::short_long_term;
  throw SchemaError("reid.mode", "expected ST or SLT, got '" + std::string(name) + "'");
}

SampleSet::SampleSet(SamplingMode mode, std::size_t capacity, double long_term_fraction,
                     std::uint64_t seed)
    : mode_(mode), capacity_(capacity), rng_(splitmix64(seed)) {
  if (capacity == 0) throw SchemaError("reid.capacity", "must be > 0");
  if (!(long_term_fraction >= 0.0 && long_term_fraction <= 1.0)) {
    throw SchemaError("reid.long_term_fraction", "must be in [0, 1]");
  }
  if (mode == SamplingMode::short_term) {
    short_capacity_ = capacity;
    long_ = Reservoir<AppearanceSample>(0);
  } else {
    const auto long_capacity =
        static_cast<std::size_t>(std::floor(long_term_fraction * static_cast<double>(capacity)));
    short_capacity_ = capacity - long_capacity;
    long_ = Reservoir<AppearanceSample>(long_capacity);
  }
}

void SampleSet::add(const AppearanceSample& sample) {
  if (sample.label != 0 && sample.label != 1) {
    throw Error(ErrorCategory::invalid_argument, "sample label must be 0 or 1");
  }
  ++version_;
  short_.push_back(sample);
  while (short_.size() > short_capacity_) {
    AppearanceSample evicted = std::move(short_.front());
    short_.pop_front();
    if (mode_ == SamplingMode::short_long_term && evicted.label == 1) {
      long_.offer(std::move(evicted), rng_);
    }
  }
}

void SampleSet::add(std::span<const AppearanceSample> samples) {
  for (const auto& s : samples) add(s);
}

std::size_t SampleSet::count(int label) const {
  std::size_t n = 0;
  for_each([&](const AppearanceSample& s) { n += s.label == label ? 1 : 0; });
  return n;
}

// ---------------------------------------------------------------------------

RidgeClassifier::RidgeClassifier(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw SchemaError("reid.lambda", "must be > 0");
}

TrainStatus RidgeClassifier::train(const SampleSet& set) {
  if (set.size() == 0) return TrainStatus::insufficient_samples;
  Eigen::Index d = 0;
  set.for_each([&](const AppearanceSample& s) { d = s.descriptor.dim(); });

  Eigen::MatrixXd samples(d, static_cast<Eigen::Index>(set.size()));
  Eigen::VectorXd labels(static_cast<Eigen::Index>(set.size()));
  Eigen::Index j = 0;
  set.for_each([&](const AppearanceSample& s) {
    if (s.descriptor.dim() != d) throw Error(ErrorCategory::invalid_argument, "mixed descriptor dimensions");
    samples.col(j) = s.descriptor.values();
    labels(j) = s.label;
    ++j;
  });
  return train(samples, labels);
}

TrainStatus RidgeClassifier::train(const Eigen::MatrixXd& samples, const Eigen::VectorXd& labels) {
  if (samples.cols() != labels.size()) throw Error(ErrorCategory::invalid_argument, "sample/label count mismatch");
  const Eigen::Index n = samples.cols();
  const auto positives = (labels.array() == 1.0).count();
  const auto negatives = (labels.array() == 0.0).count();
  if (positives + negatives != n) throw Error(ErrorCategory::invalid_argument, "labels must be 0 or 1");
  if (positives == 0 || negatives == 0) return TrainStatus::insufficient_samples;

  const Eigen::VectorXd mean_x = samples.rowwise().mean();
  const double mean_l = labels.mean();
  const Eigen::MatrixXd centred = samples.colwise() - mean_x;
  const Eigen::VectorXd centred_l = labels.array() - mean_l;

  Eigen::VectorXd w;
  if (n <= samples.rows()) {
    Eigen::MatrixXd k = kernels::gram(centred);
    k.diagonal().array() += lambda_;
    const Eigen::VectorXd alpha = k.ldlt().solve(centred_l);
    w = centred * alpha;
  } else {
    Eigen::MatrixXd a = kernels::gram(centred.transpose());
    a.diagonal().array() += lambda_;
    w = a.ldlt().solve(centred * centred_l);
  }
  if (!w.allFinite()) throw Error(ErrorCategory::runtime, "ridge solve produced non-finite weights");

  w_ = std::move(w);
  b_ = mean_l - w_.dot(mean_x);
  trained_ = true;
  return TrainStatus::trained;
}

double RidgeClassifier::raw_response(const Descriptor& d) const {
  if (!trained_) throw UntrainedClassifier();
  if (d.dim() != w_.size()) throw Error(ErrorCategory::invalid_argument, "descriptor dimension mismatch");
  return w_.dot(d.values()) + b_;
}

double RidgeClassifier::score(const Descriptor& d) const {
  return std::clamp(raw_response(d), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

std::string_view to_string(FollowMode mode) {
  return mode == FollowMode::following ? "following" : "reid";
}

void ReidConfig::validate() const {
  if (!(delta_switch >= 0.0 && delta_switch <= 1.0)) throw SchemaError("reid.delta_switch", "must be in [0, 1]");
  if (!(delta_id >= 0.0 && delta_id <= 1.0)) throw SchemaError("reid.delta_id", "must be in [0, 1]");
  if (n_id < 1) throw SchemaError("reid.n_id", "must be >= 1");
  if (!(lambda > 0.0)) throw SchemaError("reid.lambda", "must be > 0");
  if (capacity == 0) throw SchemaError("reid.capacity", "must be > 0");
  if (!(long_term_fraction >= 0.0 && long_term_fraction <= 1.0)) {
    throw SchemaError("reid.long_term_fraction", "must be in [0, 1]");
  }
  if (retrain_period < 1) throw SchemaError("reid.retrain_period", "must be >= 1");
  if (max_negatives < 0) throw SchemaError("reid.max_negatives", "must be >= 0");
  if (descriptor_dim < 1) throw SchemaError("reid.descriptor_dim", "must be >= 1");
  if (extractor != "passthrough" && extractor != "synthetic") {
    throw SchemaError("reid.extractor", "expected passthrough or synthetic");
  }
}

StateMachineOutput step_state_machine(const FollowerState& state,
                                      const std::map<TrackId, double>& scores,
                                      const std::set<TrackId>& visible, const ReidConfig& cfg) {
  StateMachineOutput out;
  out.state = state;
  FollowerState& next = out.state;

  if (next.mode == FollowMode::following) {
    const bool target_visible = next.target && visible.contains(*next.target);
    bool switch_suspected = false;
    if (target_visible) {
      const auto it = scores.find(*next.target);
      switch_suspected = it != scores.end() && it->second < cfg.delta_switch;
    }
    if (!target_visible || switch_suspected) {
      next.mode = FollowMode::reid;
      next.consecutive_hits.clear();
      out.entered_reid = true;
    } else {
      out.reported_target = next.target;
    }
    return out;
  }

  std::erase_if(next.consecutive_hits, [&](const auto& kv) { return !visible.contains(kv.first); });

  std::optional<TrackId> winner;
  double winner_score = -1.0;
  for (TrackId id : visible) {
    const auto it = scores.find(id);
    if (it == scores.end()) {
      next.consecutive_hits.erase(id);
      continue;
    }
    int& hits = next.consecutive_hits[id];
    hits = it->second > cfg.delta_id ? hits + 1 : 0;
    if (hits >= cfg.n_id) {
      // visible is ordered by id, so a strict > keeps the lower id on equal scores
      if (!winner || it->second > winner_score) {
        winner = id;
        winner_score = it->second;
      }
    }
  }

  if (winner) {
    next.mode = FollowMode::following;
    next.target = winner;
    next.consecutive_hits.clear();
    out.reported_target = winner;
    out.reacquired = true;
  }
  return out;
}

}  // namespace mpf::reid
