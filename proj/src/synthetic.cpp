#include "fusegraph/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "fusegraph/errors.hpp"
#include "fusegraph/random.hpp"

namespace fusegraph {

namespace {

std::string sample_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%05zu", i);
    return buf;
}

struct Modality {
    std::string name;
    std::size_t isolated_class;
    std::size_t lower_pair_class;  // sits at -offset/2 inside the merged pair
};

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double norm = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

// Random unit vector orthogonal to `u`.
std::vector<double> orthogonal_unit(Rng& rng, const std::vector<double>& u) {
    auto v = random_unit(rng, u.size());
    double dot = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) dot += u[k] * v[k];
    double norm = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        v[k] -= dot * u[k];
        norm += v[k] * v[k];
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

}  // namespace

SyntheticDataset make_complementary_dataset(const SyntheticOptions& options) {
    if (options.dim < 2) throw DomainError("the synthetic generator needs dim >= 2");
    Rng rng(options.seed);
    const std::size_t classes = 3;
    const std::vector<Modality> modalities{{"alpha", 0, 1}, {"beta", 2, 0}};

    std::map<SampleId, std::string> labels;
    std::vector<std::size_t> klass(options.samples);
    for (std::size_t i = 0; i < options.samples; ++i) {
        klass[i] = i % classes;
        labels[sample_name(i)] = "c" + std::to_string(klass[i]);
    }

    SyntheticDataset out;
    for (const auto& modality : modalities) {
        std::vector<double> centre(options.dim);
        for (auto& x : centre) x = 2.0 * rng.uniform() - 1.0;
        const auto u = random_unit(rng, options.dim);
        const auto v = orthogonal_unit(rng, u);

        FeatureTable table(modality.name, options.dim);
        std::vector<double> row(options.dim);
        for (std::size_t i = 0; i < options.samples; ++i) {
            double along_u = 0.0;
            double along_v = 0.0;
            if (klass[i] == modality.isolated_class) {
                along_u = (rng.uniform() < options.minor_fraction ? -1.0 : 1.0) * options.separation;
            } else {
                along_v = (klass[i] == modality.lower_pair_class ? -0.5 : 0.5) * options.confusable_offset;
            }
            for (std::size_t k = 0; k < options.dim; ++k) {
                row[k] = centre[k] + along_u * u[k] + along_v * v[k] + options.noise * rng.normal();
            }
            table.add_row(sample_name(i), row);
        }
        out.tables.push_back(std::move(table));
    }
    out.labels = make_label_table(std::move(labels));
    return out;
}

std::vector<FeatureTable> make_random_tables(std::size_t samples, std::size_t modalities, std::size_t dim,
                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<FeatureTable> out;
    std::vector<double> row(dim);
    for (std::size_t m = 0; m < modalities; ++m) {
        FeatureTable table("random" + std::to_string(m), dim);
        for (std::size_t i = 0; i < samples; ++i) {
            for (auto& x : row) x = rng.uniform();
            table.add_row(sample_name(i), row);
        }
        out.push_back(std::move(table));
    }
    return out;
}

}  // namespace fusegraph
