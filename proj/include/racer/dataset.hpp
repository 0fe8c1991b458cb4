#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace racer {

/// Ordered candidate pool M. The virtual null model is addressed by index
/// `size()` in every augmented vector.
class ModelPool {
 public:
  static constexpr const char* kDefaultNullId = "__null__";

  ModelPool() = default;
  explicit ModelPool(std::vector<std::string> names, std::string null_id = kDefaultNullId);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t index) const;  // index == size() names the null model
  const std::string& null_id() const noexcept { return null_id_; }
  std::size_t null_index() const noexcept { return names_.size(); }

  std::optional<std::size_t> index_of(const std::string& name) const;

  bool operator==(const ModelPool&) const = default;

 private:
  std::vector<std::string> names_;
  std::string null_id_ = kDefaultNullId;
};

struct QueryRecord {
  std::string id;
  std::vector<double> scores;        // f(x, m) in pool order
  std::vector<std::size_t> correct;  // G(x) as ascending pool indices, possibly empty
  std::map<std::string, std::string> answers;
  std::string gold;
  // scheme -> model -> confidence in [0, 1]
  std::map<std::string, std::map<std::string, double>> confidences;

  bool operator==(const QueryRecord&) const = default;
};

struct RoutingDataset {
  ModelPool pool;
  std::vector<QueryRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  bool has_confidence_scheme(const std::string& scheme) const;
};

/// Checks every QueryRecord invariant and id uniqueness; throws Schema / DuplicateId.
void validate(const RoutingDataset& dataset);

enum class DataFormat { Jsonl, Csv };

struct LoadOptions {
  // Rescale all base scores by the dataset-wide min and max instead of
  // rejecting values outside [0, 1].
  bool minmax_normalize = false;
};

RoutingDataset load_dataset(const std::filesystem::path& path, DataFormat format,
                            const LoadOptions& options = {});
RoutingDataset parse_jsonl(std::string_view text, const LoadOptions& options = {});
RoutingDataset parse_csv(std::string_view text, const LoadOptions& options = {});

/// One JSON object per record, pool order preserved in "scores".
std::string to_jsonl(const RoutingDataset& dataset);

struct SplitSpec {
  double cal_frac = 0.5;
  double val_frac = 0.1;
  double test_frac = 0.4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DatasetSplit {
  RoutingDataset cal;
  RoutingDataset val;
  RoutingDataset test;
};

/// Partition sizes ⌊n·cal⌋, ⌊n·val⌋ and the remainder for test.
std::tuple<std::size_t, std::size_t, std::size_t> split_sizes(std::size_t n, const SplitSpec& spec);

/// Seeded uniform permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

RoutingDataset subset(const RoutingDataset& dataset, std::span<const std::size_t> indices);

DatasetSplit split(const RoutingDataset& dataset, const SplitSpec& spec);

struct SynthConfig {
  std::size_t n = 0;
  std::vector<double> model_accuracies;  // one per model, defines K
  double score_sharpness = 4.0;
  std::uint64_t seed = 0;
  // Models whose wrong answers coincide ("wrong-shared") instead of being
  // model-specific. Lets a group of weak models out-vote the gold answer.
  std::vector<std::size_t> colluding_models;
};

RoutingDataset synthesize(const SynthConfig& config);

std::vector<std::string> synthetic_model_names(std::size_t k);

}  // namespace racer
