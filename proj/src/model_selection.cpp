#include "occupancy/model_selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include "csv.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/random.hpp"

namespace occupancy {

std::vector<std::size_t> FoldAssignment::members(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::complement(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
    std::vector<std::size_t> out(k, 0);
    for (const auto f : fold_of) ++out[f];
    return out;
}

FoldAssignment make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgument("need at least 2 folds");
    if (n < k) throw InvalidArgument("fewer samples (" + std::to_string(n) + ") than folds (" + std::to_string(k) + ")");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    FoldAssignment fa{n, k, seed, std::vector<std::size_t>(n)};
    for (std::size_t pos = 0; pos < n; ++pos) fa.fold_of[order[pos]] = pos % k;
    return fa;
}

std::string CandidateSpec::label() const { return std::string(to_string(combo)) + ":" + structure.to_string(); }

std::uint64_t fold_network_seed(std::uint64_t master_seed, std::size_t candidate_index, std::size_t fold) {
    return mix_seed(master_seed, 0x6e6574ULL, candidate_index, fold);
}

std::uint64_t partition_seed(std::uint64_t master_seed, std::optional<std::size_t> candidate_index) {
    return candidate_index ? mix_seed(master_seed, 0x666f6c64ULL, *candidate_index) : mix_seed(master_seed, 0x666f6c64ULL);
}

namespace {

// Runs task(i) for i in [0, count) on up to `workers` threads. The first
// failure (by index) is rethrown after all threads finish.
template <typename Task>
void run_parallel(std::size_t count, std::size_t workers, Task task) {
    std::vector<std::exception_ptr> errors(count);
    auto body = [&](std::atomic<std::size_t>& next) {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::atomic<std::size_t> next{0};
    const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), count);
    if (threads <= 1) {
        body(next);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back([&] { body(next); });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

FoldOutcome run_fold(const FeatureSet& fs, const CandidateSpec& candidate, const FoldAssignment& folds,
                     const RpropConfig& config, std::uint64_t seed, std::size_t candidate_index, std::size_t j) {
    FoldOutcome out;
    const auto train_idx = folds.complement(j);
    out.indices = folds.members(j);
    if (out.indices.empty() || train_idx.empty()) throw InvalidArgument("empty fold " + std::to_string(j));

    const auto train_raw = select(fs, train_idx);
    out.scaler = fit_scaler(train_raw);
    out.network_seed = fold_network_seed(seed, candidate_index, j);
    auto trained = train(init_network(candidate.structure, out.network_seed), apply_scaler(out.scaler, train_raw), config);
    out.converged = trained.report.converged;
    out.epochs = trained.report.epochs;

    for (const auto i : out.indices) {
        const auto& v = fs.vectors[i];
        out.predictions.push_back(predict(trained.network, out.scaler.apply(v.values)));
        out.observations.push_back(static_cast<double>(*v.target));
    }
    out.mse = mse(out.predictions, out.observations);
    return out;
}

void summarize(CVResult& r) {
    r.fold_mse.clear();
    r.converged.clear();
    for (const auto& f : r.folds) {
        r.fold_mse.push_back(f.mse);
        r.converged.push_back(f.converged);
    }
    const double k = static_cast<double>(r.fold_mse.size());
    double sum = 0.0;
    for (const double m : r.fold_mse) sum += m;
    r.mean_mse = sum / k;
    double ss = 0.0;
    for (const double m : r.fold_mse) ss += (m - r.mean_mse) * (m - r.mean_mse);
    r.std_mse = std::sqrt(ss / k);
}

void check_cv_inputs(const FeatureSet& fs, const CandidateSpec& candidate, const FoldAssignment& folds) {
    if (fs.combo != candidate.combo) throw InvalidArgument("candidate combo does not match the feature set");
    if (folds.n != fs.size()) throw InvalidArgument("fold assignment size does not match the feature set");
    for (const auto& v : fs.vectors) {
        if (!v.target) throw InvalidArgument("cross-validation requires known targets");
    }
    for (const auto s : folds.sizes()) {
        if (s == 0) throw InvalidArgument("fold assignment contains an empty fold");
    }
}

}  // namespace

CVResult cross_validate(const FeatureSet& fs, const CandidateSpec& candidate, const FoldAssignment& folds,
                        const RpropConfig& config, std::uint64_t seed, std::size_t candidate_index,
                        std::size_t workers) {
    check_cv_inputs(fs, candidate, folds);
    CVResult r;
    r.candidate = candidate;
    r.folds.resize(folds.k);
    run_parallel(folds.k, workers, [&](std::size_t j) {
        r.folds[j] = run_fold(fs, candidate, folds, config, seed, candidate_index, j);
    });
    summarize(r);
    return r;
}

bool ranks_before(const CVResult& a, const CVResult& b) {
    if (a.mean_mse != b.mean_mse) return a.mean_mse < b.mean_mse;
    const auto pa = a.candidate.structure.parameter_count();
    const auto pb = b.candidate.structure.parameter_count();
    if (pa != pb) return pa < pb;
    if (a.candidate.structure.hidden != b.candidate.structure.hidden)
        return a.candidate.structure.hidden < b.candidate.structure.hidden;
    return a.candidate.combo < b.candidate.combo;
}

GridResult grid_search(const std::map<VariableCombo, FeatureSet>& featuresets, const std::vector<CandidateSpec>& grid,
                       const RpropConfig& config, std::uint64_t seed, const GridOptions& options) {
    if (grid.empty()) throw InvalidArgument("grid search needs at least one candidate");
    config.validate();
    std::map<VariableCombo, FoldAssignment> shared;
    std::vector<FoldAssignment> per_candidate(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto it = featuresets.find(grid[c].combo);
        if (it == featuresets.end())
            throw InvalidArgument("no feature set for combo " + std::string(to_string(grid[c].combo)));
        if (options.reuse_partition) {
            if (!shared.count(grid[c].combo))
                shared.emplace(grid[c].combo, make_folds(it->second.size(), options.k, partition_seed(seed)));
            per_candidate[c] = shared.at(grid[c].combo);
        } else {
            per_candidate[c] = make_folds(it->second.size(), options.k, partition_seed(seed, c));
        }
        check_cv_inputs(it->second, grid[c], per_candidate[c]);
    }

    std::vector<CVResult> results(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        results[c].candidate = grid[c];
        results[c].folds.resize(options.k);
    }
    run_parallel(grid.size() * options.k, options.workers, [&](std::size_t task) {
        const std::size_t c = task / options.k;
        const std::size_t j = task % options.k;
        results[c].folds[j] =
            run_fold(featuresets.at(grid[c].combo), grid[c], per_candidate[c], config, seed, c, j);
    });
    for (auto& r : results) summarize(r);
    std::sort(results.begin(), results.end(), ranks_before);
    GridResult out;
    out.winner = results.front().candidate;
    out.ranked = std::move(results);
    return out;
}

GridAxes GridAxes::defaults() {
    GridAxes a;
    for (std::size_t h = 6; h <= 20; ++h) a.single_layer.push_back(h);
    for (std::size_t h = 9; h <= 21; h += 2) a.first_layer.push_back(h);
    for (std::size_t h = 7; h <= 13; h += 2) a.second_layer.push_back(h);
    return a;
}

std::vector<CandidateSpec> make_grid(const GridAxes& axes) {
    std::vector<CandidateSpec> grid;
    for (const auto combo : axes.combos) {
        for (const auto h : axes.single_layer) grid.push_back({combo, {axes.input_dim, {h}, 1}});
        for (const auto h1 : axes.first_layer) {
            for (const auto h2 : axes.second_layer) grid.push_back({combo, {axes.input_dim, {h1, h2}, 1}});
        }
    }
    return grid;
}

CandidateSpec default_candidate() { return {VariableCombo::rh_co2, {10, {18, 13}, 1}}; }

void write_cv_csv(std::ostream& out, const GridResult& result) {
    out << "combo,structure,fold,mse,converged\n";
    for (const auto& r : result.ranked) {
        for (std::size_t j = 0; j < r.fold_mse.size(); ++j) {
            out << to_string(r.candidate.combo) << ",\"" << r.candidate.structure.to_string() << "\"," << j << ','
                << csv::format_double(r.fold_mse[j]) << ',' << (r.converged[j] ? "true" : "false") << '\n';
        }
    }
}

}  // namespace occupancy
