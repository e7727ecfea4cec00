#include "kpbms/tune.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kpbms/bbox.hpp"

namespace kpbms {

void SearchSpace::validate() const {
    if (!(alpha_range.first >= 0.0 && alpha_range.second <= 1.0 &&
          alpha_range.first <= alpha_range.second))
        throw std::invalid_argument("alpha_range outside [0,1] or empty");
    if (n_range.first < 1 || n_range.first > n_range.second)
        throw std::invalid_argument("n_range invalid");
    if (!(blob_fraction_range.first > 0.0 && blob_fraction_range.second <= 1.0 &&
          blob_fraction_range.first <= blob_fraction_range.second))
        throw std::invalid_argument("blob_fraction_range outside (0,1] or empty");
    if (connectivity_choices.empty())
        throw std::invalid_argument("connectivity_choices empty");
}

bool SearchSpace::contains(const SaliencyConfig& config) const {
    return config.alpha >= alpha_range.first && config.alpha <= alpha_range.second &&
           config.n_thresholds >= n_range.first &&
           config.n_thresholds <= n_range.second &&
           config.blob_fraction >= blob_fraction_range.first &&
           config.blob_fraction <= blob_fraction_range.second &&
           std::find(connectivity_choices.begin(), connectivity_choices.end(),
                     config.connectivity) != connectivity_choices.end();
}

ObjectiveResult objective_report(const std::vector<DatasetSample>& dataset,
                                 const SaliencyConfig& config) {
    if (dataset.empty()) throw std::invalid_argument("objective: empty dataset");
    SaliencyConfig deterministic = config;
    deterministic.sampling = SamplingMode::evenly_spaced;
    std::vector<EvalReport> reports;
    reports.reserve(dataset.size());
    for (const auto& sample : dataset) {
        BoxSet boxes = generate(sample.image, sample.keypoints, deterministic);
        reports.push_back(evaluate(boxes, sample.keypoints));
    }
    ObjectiveResult result;
    result.report = aggregate(reports);
    result.value = result.report.f_score * result.report.q;
    return result;
}

double objective(const std::vector<DatasetSample>& dataset,
                 const SaliencyConfig& config) {
    return objective_report(dataset, config).value;
}

namespace {

SaliencyConfig sample_uniform(const SearchSpace& space, std::mt19937_64& rng) {
    SaliencyConfig config;
    config.sampling = SamplingMode::evenly_spaced;
    if (space.alpha_range.first == space.alpha_range.second) {
        config.alpha = space.alpha_range.first;
    } else {
        config.alpha = std::uniform_real_distribution<double>(
            space.alpha_range.first, space.alpha_range.second)(rng);
    }
    config.n_thresholds = std::uniform_int_distribution<int>(
        space.n_range.first, space.n_range.second)(rng);
    if (space.blob_fraction_range.first == space.blob_fraction_range.second) {
        config.blob_fraction = space.blob_fraction_range.first;
    } else {
        config.blob_fraction = std::uniform_real_distribution<double>(
            space.blob_fraction_range.first, space.blob_fraction_range.second)(rng);
    }
    config.connectivity = space.connectivity_choices[std::uniform_int_distribution<
        std::size_t>(0, space.connectivity_choices.size() - 1)(rng)];
    return config;
}

Trial run_trial(int index, const SaliencyConfig& config,
                const RichObjectiveFn& objective_fn,
                const TrialCallback& on_trial) {
    Trial trial;
    trial.index = index;
    trial.config = config;
    ObjectiveResult result = objective_fn(config);
    trial.objective = result.value;
    trial.report = std::move(result.report);
    if (on_trial) on_trial(trial);
    return trial;
}

RichObjectiveFn enrich(const ObjectiveFn& objective_fn) {
    return [objective_fn](const SaliencyConfig& config) {
        return ObjectiveResult{objective_fn(config), {}};
    };
}

SearchResult finish(std::vector<Trial> log) {
    SearchResult result;
    result.best = log.front();
    for (const auto& trial : log)
        if (trial.objective > result.best.objective) result.best = trial;
    result.log = std::move(log);
    return result;
}

// --- univariate kernel densities over trial history -------------------

constexpr double kInv_sqrt2 = 0.70710678118654752440;
constexpr double kInv_sqrt2pi = 0.39894228040143267794;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInv_sqrt2); }

// Truncated-normal kernel density on [lo, hi].
double trunc_normal_pdf(double x, double mu, double sigma, double lo, double hi) {
    const double z = (x - mu) / sigma;
    const double scale =
        normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
    if (scale <= 0.0) return 0.0;
    return kInv_sqrt2pi * std::exp(-0.5 * z * z) / (sigma * scale);
}

// Kernel mixture over one continuous dimension, with a uniform prior
// component so unexplored regions keep non-zero density.
struct ContinuousKde {
    std::vector<double> centers;
    double sigma = 1.0;
    double lo = 0.0;
    double hi = 1.0;

    ContinuousKde(std::vector<double> values, double lo_in, double hi_in)
        : centers(std::move(values)), lo(lo_in), hi(hi_in) {
        const double width = hi - lo;
        double mean = 0.0;
        for (double v : centers) mean += v;
        mean /= static_cast<double>(centers.size());
        double var = 0.0;
        for (double v : centers) var += (v - mean) * (v - mean);
        var /= static_cast<double>(centers.size());
        // Scott-style shrink with floors so degenerate sets stay usable.
        sigma = std::max(std::sqrt(var), width / 8.0) *
                std::pow(static_cast<double>(centers.size()), -0.2);
        sigma = std::max(sigma, width * 1e-3);
    }

    double pdf(double x) const {
        double acc = 1.0 / (hi - lo);  // uniform prior kernel
        for (double mu : centers) acc += trunc_normal_pdf(x, mu, sigma, lo, hi);
        return acc / static_cast<double>(centers.size() + 1);
    }

    double draw(std::mt19937_64& rng) const {
        std::uniform_int_distribution<std::size_t> pick(0, centers.size());
        const std::size_t k = pick(rng);
        if (k == centers.size())
            return std::uniform_real_distribution<double>(lo, hi)(rng);
        std::normal_distribution<double> normal(centers[k], sigma);
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double x = normal(rng);
            if (x >= lo && x <= hi) return x;
        }
        return std::clamp(centers[k], lo, hi);
    }
};

// Laplace-smoothed mass function over a categorical dimension.
struct CategoricalPmf {
    std::vector<double> probs;

    CategoricalPmf(const std::vector<std::size_t>& counts, std::size_t total) {
        probs.resize(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            probs[i] = static_cast<double>(counts[i] + 1) /
                       static_cast<double>(total + counts.size());
    }

    double pmf(std::size_t choice) const { return probs[choice]; }

    std::size_t draw(std::mt19937_64& rng) const {
        std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
        return dist(rng);
    }
};

struct TpeModel {
    const SearchSpace& space;
    bool alpha_free;
    bool n_free;
    bool blob_free;
    bool conn_free;
    std::optional<ContinuousKde> alpha_kde;
    std::optional<ContinuousKde> n_kde;
    std::optional<ContinuousKde> blob_kde;
    std::optional<CategoricalPmf> conn_pmf;

    TpeModel(const SearchSpace& s, const std::vector<const Trial*>& trials)
        : space(s),
          alpha_free(s.alpha_range.first < s.alpha_range.second),
          n_free(s.n_range.first < s.n_range.second),
          blob_free(s.blob_fraction_range.first < s.blob_fraction_range.second),
          conn_free(s.connectivity_choices.size() > 1) {
        if (alpha_free) {
            std::vector<double> v;
            for (auto* t : trials) v.push_back(t->config.alpha);
            alpha_kde.emplace(std::move(v), s.alpha_range.first, s.alpha_range.second);
        }
        if (n_free) {
            std::vector<double> v;
            for (auto* t : trials)
                v.push_back(static_cast<double>(t->config.n_thresholds));
            n_kde.emplace(std::move(v), static_cast<double>(s.n_range.first),
                          static_cast<double>(s.n_range.second));
        }
        if (blob_free) {
            std::vector<double> v;
            for (auto* t : trials) v.push_back(t->config.blob_fraction);
            blob_kde.emplace(std::move(v), s.blob_fraction_range.first,
                             s.blob_fraction_range.second);
        }
        if (conn_free) {
            std::vector<std::size_t> counts(s.connectivity_choices.size(), 0);
            for (auto* t : trials) counts[conn_index(t->config.connectivity)]++;
            conn_pmf.emplace(counts, trials.size());
        }
    }

    std::size_t conn_index(Connectivity c) const {
        return static_cast<std::size_t>(
            std::find(space.connectivity_choices.begin(),
                      space.connectivity_choices.end(), c) -
            space.connectivity_choices.begin());
    }

    double log_density(const SaliencyConfig& config) const {
        double acc = 0.0;
        if (alpha_free) acc += std::log(alpha_kde->pdf(config.alpha));
        if (n_free)
            acc += std::log(n_kde->pdf(static_cast<double>(config.n_thresholds)));
        if (blob_free) acc += std::log(blob_kde->pdf(config.blob_fraction));
        if (conn_free)
            acc += std::log(conn_pmf->pmf(conn_index(config.connectivity)));
        return acc;
    }

    SaliencyConfig draw(std::mt19937_64& rng) const {
        SaliencyConfig config;
        config.sampling = SamplingMode::evenly_spaced;
        config.alpha = alpha_free ? alpha_kde->draw(rng) : space.alpha_range.first;
        config.n_thresholds =
            n_free ? std::clamp(static_cast<int>(std::lround(n_kde->draw(rng))),
                                space.n_range.first, space.n_range.second)
                   : space.n_range.first;
        config.blob_fraction =
            blob_free ? blob_kde->draw(rng) : space.blob_fraction_range.first;
        config.connectivity = conn_free
                                  ? space.connectivity_choices[conn_pmf->draw(rng)]
                                  : space.connectivity_choices.front();
        return config;
    }
};

SearchResult random_search_core(const SearchSpace& space,
                                const RichObjectiveFn& objective_fn, int budget,
                                std::uint64_t seed,
                                const std::optional<SaliencyConfig>& baseline,
                                const TrialCallback& on_trial) {
    space.validate();
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<Trial> log;
    log.reserve(budget);
    if (baseline)
        log.push_back(run_trial(0, *baseline, objective_fn, on_trial));
    while (static_cast<int>(log.size()) < budget) {
        log.push_back(run_trial(static_cast<int>(log.size()),
                                sample_uniform(space, rng), objective_fn, on_trial));
    }
    return finish(std::move(log));
}

}  // namespace

SearchResult random_search(const SearchSpace& space, const ObjectiveFn& objective_fn,
                           int budget, std::uint64_t seed,
                           const std::optional<SaliencyConfig>& baseline,
                           const TrialCallback& on_trial) {
    return random_search_core(space, enrich(objective_fn), budget, seed, baseline,
                              on_trial);
}

SearchResult random_search(const SearchSpace& space,
                           const std::vector<DatasetSample>& dataset, int budget,
                           std::uint64_t seed,
                           const std::optional<SaliencyConfig>& baseline,
                           const TrialCallback& on_trial) {
    return random_search_core(
        space,
        [&](const SaliencyConfig& c) { return objective_report(dataset, c); },
        budget, seed, baseline, on_trial);
}

namespace {

SearchResult tpe_search_core(const SearchSpace& space,
                             const RichObjectiveFn& objective_fn, int budget,
                             std::uint64_t seed, double gamma, int startup,
                             const std::optional<SaliencyConfig>& baseline,
                             const TrialCallback& on_trial) {
    space.validate();
    if (startup < 2) throw std::invalid_argument("startup must be >= 2");
    if (budget < startup) throw std::invalid_argument("budget must be >= startup");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("gamma outside (0,1)");
    constexpr int kCandidatesPerProposal = 24;

    std::mt19937_64 rng(seed);
    std::vector<Trial> log;
    log.reserve(budget);
    if (baseline)
        log.push_back(run_trial(0, *baseline, objective_fn, on_trial));
    while (static_cast<int>(log.size()) < startup) {
        log.push_back(run_trial(static_cast<int>(log.size()),
                                sample_uniform(space, rng), objective_fn, on_trial));
    }

    while (static_cast<int>(log.size()) < budget) {
        // Split history at the gamma-quantile of objectives (maximizing).
        std::vector<const Trial*> ranked;
        ranked.reserve(log.size());
        for (const auto& t : log) ranked.push_back(&t);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const Trial* a, const Trial* b) {
                             return a->objective > b->objective;
                         });
        const auto n_good = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::ceil(gamma * static_cast<double>(ranked.size()))));
        std::vector<const Trial*> good(ranked.begin(), ranked.begin() + n_good);
        std::vector<const Trial*> bad(ranked.begin() + n_good, ranked.end());

        const TpeModel good_model(space, good);
        const TpeModel bad_model(space, bad);

        SaliencyConfig best_candidate = good_model.draw(rng);
        double best_ratio = good_model.log_density(best_candidate) -
                            bad_model.log_density(best_candidate);
        for (int c = 1; c < kCandidatesPerProposal; ++c) {
            const SaliencyConfig candidate = good_model.draw(rng);
            const double ratio = good_model.log_density(candidate) -
                                 bad_model.log_density(candidate);
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_candidate = candidate;
            }
        }
        log.push_back(run_trial(static_cast<int>(log.size()), best_candidate,
                                objective_fn, on_trial));
    }
    return finish(std::move(log));
}

}  // namespace

SearchResult tpe_search(const SearchSpace& space, const ObjectiveFn& objective_fn,
                        int budget, std::uint64_t seed, double gamma, int startup,
                        const std::optional<SaliencyConfig>& baseline,
                        const TrialCallback& on_trial) {
    return tpe_search_core(space, enrich(objective_fn), budget, seed, gamma,
                           startup, baseline, on_trial);
}

SearchResult tpe_search(const SearchSpace& space,
                        const std::vector<DatasetSample>& dataset, int budget,
                        std::uint64_t seed, double gamma, int startup,
                        const std::optional<SaliencyConfig>& baseline,
                        const TrialCallback& on_trial) {
    return tpe_search_core(
        space,
        [&](const SaliencyConfig& c) { return objective_report(dataset, c); },
        budget, seed, gamma, startup, baseline, on_trial);
}

}  // namespace kpbms
