#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "occupancy/features.hpp"
#include "occupancy/mlp.hpp"
#include "occupancy/rprop.hpp"

namespace occupancy {

struct FoldAssignment {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> fold_of;  // fold index per sample

    std::vector<std::size_t> members(std::size_t fold) const;     // ascending sample indices
    std::vector<std::size_t> complement(std::size_t fold) const;  // ascending
    std::vector<std::size_t> sizes() const;
};

// Seeded Fisher-Yates shuffle, then round-robin assignment. Throws if n < k or k < 2.
FoldAssignment make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct CandidateSpec {
    VariableCombo combo;
    NetworkStructure structure;

    std::string label() const;  // "rh_co2:18,13"
    bool operator==(const CandidateSpec&) const = default;
};

struct FoldOutcome {
    double mse = 0.0;
    bool converged = false;
    std::size_t epochs = 0;
    std::uint64_t network_seed = 0;
    Scaler scaler;                    // fitted on the training folds only
    std::vector<std::size_t> indices; // validation rows
    std::vector<double> predictions;
    std::vector<double> observations;
};

struct CVResult {
    CandidateSpec candidate;
    std::vector<double> fold_mse;
    std::vector<bool> converged;
    double mean_mse = 0.0;
    double std_mse = 0.0;  // population convention
    std::vector<FoldOutcome> folds;
};

// Network seed for fold j of candidate c.
std::uint64_t fold_network_seed(std::uint64_t master_seed, std::size_t candidate_index, std::size_t fold);
// Seed of the shared fold partition (or of candidate c's partition when not shared).
std::uint64_t partition_seed(std::uint64_t master_seed, std::optional<std::size_t> candidate_index = std::nullopt);

CVResult cross_validate(const FeatureSet& fs, const CandidateSpec& candidate, const FoldAssignment& folds,
                        const RpropConfig& config, std::uint64_t seed, std::size_t candidate_index = 0,
                        std::size_t workers = 1);

struct GridOptions {
    std::size_t k = 10;
    bool reuse_partition = true;
    std::size_t workers = 1;
};

struct GridResult {
    std::vector<CVResult> ranked;  // ascending mean MSE, ties: fewer parameters, then structure, then combo
    CandidateSpec winner;
};

GridResult grid_search(const std::map<VariableCombo, FeatureSet>& featuresets, const std::vector<CandidateSpec>& grid,
                       const RpropConfig& config, std::uint64_t seed, const GridOptions& options = {});

// Strict ordering used by grid_search.
bool ranks_before(const CVResult& a, const CVResult& b);

struct GridAxes {
    std::vector<VariableCombo> combos{std::begin(kAllCombos), std::end(kAllCombos)};
    std::vector<std::size_t> single_layer;  // one-hidden-layer sizes
    std::vector<std::size_t> first_layer;   // two-hidden-layer grid
    std::vector<std::size_t> second_layer;
    std::size_t input_dim = 10;

    static GridAxes defaults();  // 6..20; {9,11,...,21} x {7,9,11,13}
};

std::vector<CandidateSpec> make_grid(const GridAxes& axes);

// RH and CO2 with 18 and 13 hidden units: the reference configuration.
CandidateSpec default_candidate();

void write_cv_csv(std::ostream& out, const GridResult& result);

}  // namespace occupancy
