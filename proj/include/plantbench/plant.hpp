#pragma once

#include <optional>
#include <vector>

#include "plantbench/net.hpp"
#include "plantbench/ticket.hpp"

namespace plantbench {

struct MatchQuality {
    double q = 0.0;       // attained minimum of ||theta - lambda m||_2
    double lambda = 0.0;  // optimal least-squares scaling theta'm / ||m||^2
};

// Returns nullopt when m is all-zero (no valid scaling; candidate skipped).
std::optional<MatchQuality> match_quality(const std::vector<double>& theta,
                                          const std::vector<double>& m);

struct PlacedWeight {
    int layer;  // 1-based, mother coordinates
    int row;
    int col;
};

struct PlacedBias {
    int layer;
    int idx;
};

struct PlantReport {
    Architecture target_arch, mother_arch;
    // per layer l (1-based -> index l-1): target neuron index -> mother
    // neuron index, -1 for target neurons with no parameters
    std::vector<std::vector<int>> placement;
    // per layer: lambda of each target neuron (1 where nothing was placed)
    std::vector<std::vector<double>> neuron_scales;
    std::vector<double> lambda_out;  // per output neuron
    std::vector<PlacedWeight> placed_weights;  // mother coordinates
    std::vector<PlacedBias> placed_biases;
};

struct PlantResult {
    MaskedMLP mother;  // with the ticket written in
    PlantReport report;
};

// Layerwise matching of target neurons into the mother network with
// per-neuron rescaling. Hidden layers pick the unmatched candidate
// minimizing q over candidates with lambda > 0 (positive homogeneity);
// output neurons map one-to-one and the residual scale lands in lambda_out.
// Only the matched positions are overwritten; the rest of the mother is
// untouched.
PlantResult plant(const SparseTicket& target, const MaskedMLP& mother);

// Masks the mother down to exactly the placed entries.
MaskedMLP extract_subnet(const MaskedMLP& mother, const PlantReport& report);

MaskSet planted_masks(const MaskedMLP& mother, const PlantReport& report);

// lambda_out applied componentwise to the extracted subnet's output; this is
// the function the planted ticket computes.
std::vector<double> rescaled_forward(const MaskedMLP& extracted, const PlantReport& report,
                                     const std::vector<double>& x);

struct HidingLayerStats {
    int layer = 0;
    int planted_count = 0;
    double planted_rms = 0.0, background_rms = 0.0;
    double planted_mean_abs = 0.0, background_mean_abs = 0.0;
    double planted_max_abs = 0.0, background_max_abs = 0.0;
    // planted_rms / background_rms; absent when a side is empty
    std::optional<double> rms_ratio;
};

// Compares the magnitude distribution of planted vs untouched entries per
// layer; a well-hidden ticket has ratios near 1.
std::vector<HidingLayerStats> hiding_score(const MaskedMLP& mother, const PlantReport& report);

}  // namespace plantbench
