#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mpf/tracker.hpp"

namespace mpf::reid {

using tracking::TrackId;

// ---------------------------------------------------------------------------
// Descriptors

/// Unit-normalised appearance vector.
class Descriptor {
 public:
  Descriptor() = default;

  /// Normalises `raw`. Throws for an empty, zero or non-finite vector.
  static Descriptor from_raw(const Eigen::VectorXd& raw);

  const Eigen::VectorXd& values() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }

 private:
  explicit Descriptor(Eigen::VectorXd v) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

/// Appearance state the simulator knows about a person in one frame.
struct AppearanceObservation {
  int cluster = 0;
  double viewpoint = 0.0;         // rad, person heading relative to the line of sight
  double upper_visibility = 1.0;  // 1 = full body, 0 = lower body only
  std::uint64_t noise_key = 0;
};

struct ExtractorInput {
  std::optional<Eigen::VectorXd> raw;
  std::optional<AppearanceObservation> appearance;
};

class DescriptorExtractor {
 public:
  virtual ~DescriptorExtractor() = default;
  virtual Descriptor extract(const ExtractorInput& input) const = 0;
  virtual std::string_view name() const = 0;
  virtual int dim() const = 0;
};

/// Normalises descriptors computed elsewhere (e.g. carried in a sequence file).
class PassthroughExtractor final : public DescriptorExtractor {
 public:
  explicit PassthroughExtractor(int dim) : dim_(dim) {}
  Descriptor extract(const ExtractorInput& input) const override;
  std::string_view name() const override { return "passthrough"; }
  int dim() const override { return dim_; }

 private:
  int dim_;
};

struct SyntheticAppearanceConfig {
  int dim = 512;
  int clusters = 2;
  double similarity = 0.3;         // cosine between full-body cluster means
  double lower_similarity = 0.95;  // cosine between lower-body cluster means
  double drift = 0.12;             // viewpoint component amplitude
  double noise = 0.12;             // expected norm of the isotropic noise
  std::uint64_t seed = 1;

  void validate() const;
};

/// Generative stand-in for a CNN descriptor.
///
/// Full-body means are sqrt(s) c + sqrt(1 - s) e_k over an orthonormal basis, so any two
/// clusters have cosine exactly s; lower-body means are built the same way from a separate
/// basis. An observation blends the two by upper-body visibility, adds a viewpoint term
/// rotating in a per-cluster plane and isotropic noise, then renormalises.
class SyntheticExtractor final : public DescriptorExtractor {
 public:
  explicit SyntheticExtractor(SyntheticAppearanceConfig cfg);

  Descriptor extract(const ExtractorInput& input) const override;
  Descriptor extract(const AppearanceObservation& obs) const;
  std::string_view name() const override { return "synthetic"; }
  int dim() const override { return cfg_.dim; }

  const Eigen::VectorXd& full_mean(int cluster) const;
  const Eigen::VectorXd& lower_mean(int cluster) const;
  const SyntheticAppearanceConfig& config() const { return cfg_; }

 private:
  SyntheticAppearanceConfig cfg_;
  std::vector<Eigen::VectorXd> full_means_;
  std::vector<Eigen::VectorXd> lower_means_;
  std::vector<Eigen::VectorXd> view_a_;
  std::vector<Eigen::VectorXd> view_b_;
};

struct ExtractorOptions {
  int dim = 512;
  SyntheticAppearanceConfig synthetic;
};

/// "passthrough" or "synthetic"; throws SchemaError for anything else.
std::unique_ptr<DescriptorExtractor> make_extractor(std::string_view name,
                                                    const ExtractorOptions& options);

// ---------------------------------------------------------------------------
// Sample sets

struct AppearanceSample {
  Descriptor descriptor;
  int label = 0;  // 1 target, 0 other
  std::int64_t frame_index = 0;
  TrackId track_id = 0;
};

enum class SamplingMode { short_term, short_long_term };

std::string_view to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(std::string_view name);

/// Uniform reservoir (Algorithm R): after n offers each offered item is held
/// with probability min(1, capacity / n).
template <class T>
class Reservoir {
 public:
  explicit Reservoir(std::size_t capacity = 0) : capacity_(capacity) {}

  template <class Rng>
  void offer(T item, Rng& rng) {
    ++seen_;
    if (capacity_ == 0) return;
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
      return;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, seen_ - 1);
    const std::uint64_t slot = pick(rng);
    if (slot < capacity_) items_[static_cast<std::size_t>(slot)] = std::move(item);
  }

  const std::vector<T>& items() const { return items_; }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t seen() const { return seen_; }

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<T> items_;
};

/// Training set of the online classifier.
///
/// short_term: FIFO of the newest samples. In short_long_term mode the budget is split:
/// ceil((1 - f) N) short-term slots and floor(f N) long-term slots. Target samples evicted
/// from the short-term FIFO are offered to the long-term reservoir; other samples are
/// dropped on eviction.
class SampleSet {
 public:
  SampleSet(SamplingMode mode, std::size_t capacity, double long_term_fraction = 0.5,
            std::uint64_t seed = 0);

  void add(std::span<const AppearanceSample> samples);
  void add(const AppearanceSample& sample);

  const std::deque<AppearanceSample>& short_term() const { return short_; }
  const std::vector<AppearanceSample>& long_term() const { return long_.items(); }

  std::size_t size() const { return short_.size() + long_.items().size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t short_term_capacity() const { return short_capacity_; }
  std::size_t long_term_capacity() const { return long_.capacity(); }
  std::size_t count(int label) const;
  SamplingMode mode() const { return mode_; }
  /// Bumped whenever the contents change.
  std::uint64_t version() const { return version_; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& s : long_.items()) fn(s);
    for (const auto& s : short_) fn(s);
  }

 private:
  SamplingMode mode_;
  std::size_t capacity_;
  std::size_t short_capacity_;
  std::deque<AppearanceSample> short_;
  Reservoir<AppearanceSample> long_;
  std::mt19937_64 rng_;
  std::uint64_t version_ = 0;
};

// ---------------------------------------------------------------------------
// Classifier

enum class TrainStatus { trained, insufficient_samples };

/// Ridge regression with an unregularised bias:
///   (w, b) = argmin sum_i (w^T x_i + b - l_i)^2 + lambda ||w||^2
/// solved in closed form on centred data, through the n x n dual system when
/// there are fewer samples than dimensions and the d x d normal equations otherwise.
class RidgeClassifier {
 public:
  explicit RidgeClassifier(double lambda = 1e-2);

  /// Needs at least one sample of each label; otherwise the classifier is left unchanged.
  TrainStatus train(const SampleSet& set);
  /// `samples` is d x n, one sample per column; labels in {0, 1}.
  TrainStatus train(const Eigen::MatrixXd& samples, const Eigen::VectorXd& labels);

  bool trained() const { return trained_; }
  /// w^T v + b. Throws UntrainedClassifier before the first successful train.
  double raw_response(const Descriptor& d) const;
  /// raw_response clamped to [0, 1].
  double score(const Descriptor& d) const;

  const Eigen::VectorXd& weights() const { return w_; }
  double bias() const { return b_; }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
  Eigen::VectorXd w_;
  double b_ = 0.0;
  bool trained_ = false;
};

// ---------------------------------------------------------------------------
// Follow / re-identification state machine

enum class FollowMode { following, reid };

std::string_view to_string(FollowMode mode);

struct ReidConfig {
  double delta_switch = 0.35;
  double delta_id = 0.60;
  int n_id = 5;
  double lambda = 1e-2;
  std::size_t capacity = 64;
  SamplingMode mode = SamplingMode::short_long_term;
  double long_term_fraction = 0.5;
  int retrain_period = 1;
  int max_negatives = 3;
  int descriptor_dim = 512;
  std::string extractor = "passthrough";

  void validate() const;
};

struct FollowerState {
  FollowMode mode = FollowMode::reid;
  std::optional<TrackId> target;
  std::map<TrackId, int> consecutive_hits;
};

struct StateMachineOutput {
  FollowerState state;
  std::optional<TrackId> reported_target;  // present only while following
  bool entered_reid = false;
  bool reacquired = false;
};

/// One frame of the follow / re-identification logic.
///
/// following: leave for reid when the target is not among `visible` or its score is below
///   delta_switch; otherwise report it. A target without a score (classifier not yet
///   trained) is kept.
/// reid: every visible candidate's counter increments when its score exceeds delta_id and
///   resets otherwise; counters of invisible tracks are dropped. The first candidate to
///   reach n_id becomes the target (ties: higher score, then lower id).
StateMachineOutput step_state_machine(const FollowerState& state,
                                      const std::map<TrackId, double>& scores,
                                      const std::set<TrackId>& visible, const ReidConfig& cfg);

}  // namespace mpf::reid
