#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpbms/image.hpp"
#include "kpbms/metrics.hpp"
#include "kpbms/saliency.hpp"

namespace kpbms {

/// One dataset entry as consumed by the tuning objective.
struct DatasetSample {
    std::string id;
    GrayImage image;
    KeypointSet keypoints;
};

/// Hyperparameter domain of the saliency/box pipeline.
struct SearchSpace {
    std::pair<double, double> alpha_range{0.0, 1.0};
    std::pair<int, int> n_range{8, 96};
    std::pair<double, double> blob_fraction_range{0.05, 1.0};
    std::vector<Connectivity> connectivity_choices{Connectivity::four,
                                                   Connectivity::eight};

    void validate() const;
    bool contains(const SaliencyConfig& config) const;
};

struct Trial {
    int index = 0;
    SaliencyConfig config;
    double objective = 0.0;
    /// Aggregate evaluation behind the objective; empty for synthetic
    /// objectives that never touch a dataset.
    EvalReport report;
};

struct SearchResult {
    Trial best;
    std::vector<Trial> log;
};

/// Callback invoked after each evaluated trial (used to stream trial logs).
using TrialCallback = std::function<void(const Trial&)>;

/// Scalar objective over the hyperparameters, in [0,1] for the dataset
/// objective below; searches maximize it.
using ObjectiveFn = std::function<double(const SaliencyConfig&)>;

/// Objective plus the aggregate report it was computed from.
struct ObjectiveResult {
    double value = 0.0;
    EvalReport report;
};
using RichObjectiveFn = std::function<ObjectiveResult(const SaliencyConfig&)>;

/// F-score times quality q of generated boxes over the dataset, evaluated
/// with deterministic threshold sampling so the optimization surface is
/// noise-free. Throws std::invalid_argument on an empty dataset.
double objective(const std::vector<DatasetSample>& dataset,
                 const SaliencyConfig& config);

/// Same evaluation, returning the aggregate report alongside the value.
ObjectiveResult objective_report(const std::vector<DatasetSample>& dataset,
                                 const SaliencyConfig& config);

/// Uniform random search over the space; deterministic given the seed.
/// When `baseline` is set it is evaluated as trial 0 (within the budget),
/// so the returned best can never fall below an existing configuration.
SearchResult random_search(const SearchSpace& space, const ObjectiveFn& objective_fn,
                           int budget, std::uint64_t seed,
                           const std::optional<SaliencyConfig>& baseline = {},
                           const TrialCallback& on_trial = {});

SearchResult random_search(const SearchSpace& space,
                           const std::vector<DatasetSample>& dataset, int budget,
                           std::uint64_t seed,
                           const std::optional<SaliencyConfig>& baseline = {},
                           const TrialCallback& on_trial = {});

/// Tree-structured Parzen estimator search. The first `startup` trials are
/// random; afterwards the history splits at the gamma-quantile of
/// objectives into good/bad sets, per-dimension kernel densities are
/// fitted over each (truncated normals for continuous dimensions,
/// smoothed mass functions for categorical ones) and each proposal is the
/// best of a fixed number of draws from the good-set density, ranked by
/// the good/bad density ratio. Deterministic given the seed.
SearchResult tpe_search(const SearchSpace& space, const ObjectiveFn& objective_fn,
                        int budget, std::uint64_t seed, double gamma = 0.25,
                        int startup = 10,
                        const std::optional<SaliencyConfig>& baseline = {},
                        const TrialCallback& on_trial = {});

SearchResult tpe_search(const SearchSpace& space,
                        const std::vector<DatasetSample>& dataset, int budget,
                        std::uint64_t seed, double gamma = 0.25, int startup = 10,
                        const std::optional<SaliencyConfig>& baseline = {},
                        const TrialCallback& on_trial = {});

}  // namespace kpbms
