#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fusegraph/dataset.hpp"

namespace fusegraph {

/** \brief Generator of a 3-class dataset with two complementary modalities.
 *
 * Modality "alpha" isolates class c0, modality "beta" isolates class c2; the
 * other two classes form a merged pair in that modality. The merged pair sits
 * around a random centre, its two classes shifted apart by
 * `confusable_offset` along a random direction v. The isolated class is split
 * into two blobs at distance `separation` on either side of the centre along
 * a direction u orthogonal to v; `minor_fraction` of its samples land in the
 * second blob. A hyperplane can only cut off the major blob while nearest
 * neighbours see both. All blobs carry isotropic Gaussian noise.
 */
struct SyntheticOptions {
    std::size_t samples = 300;
    std::size_t dim = 3;
    double separation = 4.0;
    double noise = 1.0;
    double confusable_offset = 1.5;
    double minor_fraction = 0.3;
    std::uint64_t seed = 0;
};

struct SyntheticDataset {
    std::vector<FeatureTable> tables;  // alpha, beta
    LabelTable labels;
};

SyntheticDataset make_complementary_dataset(const SyntheticOptions& options);

/// Random rows for `samples` ids over `modalities` descriptors, for scale tests.
std::vector<FeatureTable> make_random_tables(std::size_t samples, std::size_t modalities, std::size_t dim,
                                             std::uint64_t seed);

}  // namespace fusegraph
