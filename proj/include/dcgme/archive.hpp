#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <dcgme/nn.hpp>
#include <dcgme/rng.hpp>

namespace dcgme {

    // k-means centroids over [0,1]^dim, stored flat (count x dim, row-major).
    struct Centroids {
        std::size_t dim = 0;
        std::vector<double> flat;

        std::size_t count() const { return dim == 0 ? 0 : flat.size() / dim; }
        std::span<const double> point(std::size_t i) const
        {
            return {flat.data() + i * dim, dim};
        }
    };

    struct Elite {
        ParamVector genotype;
        double fitness = 0.0;
        std::vector<double> descriptor;
    };

    struct Archive {
        Centroids centroids;
        std::vector<std::optional<Elite>> cells;

        explicit Archive(Centroids c = {})
            : centroids(std::move(c)), cells(centroids.count()) {}

        std::size_t occupied_count() const
        {
            std::size_t n = 0;
            for (const auto& c : cells)
                if (c)
                    n++;
            return n;
        }

        std::vector<std::size_t> occupied_cells() const
        {
            std::vector<std::size_t> idx;
            idx.reserve(cells.size());
            for (std::size_t i = 0; i < cells.size(); i++)
                if (cells[i])
                    idx.push_back(i);
            return idx;
        }
    };

    // Lloyd's algorithm, fixed 50 iterations over 100*count uniform samples,
    // k-means++ seeding. Deterministic given seed.
    inline Centroids cvt_centroids(std::size_t count, std::size_t dim, std::uint64_t seed)
    {
        if (count < 1 || dim < 1)
            throw std::invalid_argument("cvt_centroids: count and dim must be >= 1");
        Rng rng(seed);
        const std::size_t n_samples = 100 * count;
        std::vector<double> samples(n_samples * dim);
        for (double& v : samples)
            v = rng.uniform();

        Centroids c;
        c.dim = dim;
        c.flat.reserve(count * dim);
        {
            // k-means++: next seed drawn proportionally to squared distance
            // from the nearest already-chosen one
            std::vector<double> d2(n_samples, std::numeric_limits<double>::infinity());
            std::size_t pick = rng.uniform_index(n_samples);
            for (std::size_t k = 0; k < count; k++) {
                c.flat.insert(c.flat.end(), samples.begin() + pick * dim,
                    samples.begin() + (pick + 1) * dim);
                if (k + 1 == count)
                    break;
                double total = 0.0;
                for (std::size_t s = 0; s < n_samples; s++) {
                    double dist = 0.0;
                    for (std::size_t j = 0; j < dim; j++) {
                        const double diff = samples[s * dim + j] - samples[pick * dim + j];
                        dist += diff * diff;
                    }
                    d2[s] = std::min(d2[s], dist);
                    total += d2[s];
                }
                const double r = rng.uniform() * total;
                double acc = 0.0;
                pick = n_samples - 1;
                for (std::size_t s = 0; s < n_samples; s++) {
                    acc += d2[s];
                    if (acc >= r) {
                        pick = s;
                        break;
                    }
                }
            }
        }

        std::vector<std::size_t> assign(n_samples);
        std::vector<double> sums(count * dim);
        std::vector<std::size_t> sizes(count);
        // coordinate-major centroid copy and a per-sample distance row keep the
        // assignment loop vectorizable
        std::vector<double> coords(count * dim);
        std::vector<double> dist_row(count);
        for (int iter = 0; iter < 50; iter++) {
            for (std::size_t j = 0; j < dim; j++)
                for (std::size_t k = 0; k < count; k++)
                    coords[j * count + k] = c.flat[k * dim + j];
            for (std::size_t s = 0; s < n_samples; s++) {
                const double* p = samples.data() + s * dim;
                if (dim == 2) {
                    const double px = p[0], py = p[1];
                    const double* cx = coords.data();
                    const double* cy = coords.data() + count;
                    for (std::size_t k = 0; k < count; k++) {
                        const double dx = px - cx[k];
                        const double dy = py - cy[k];
                        dist_row[k] = dx * dx + dy * dy;
                    }
                } else {
                    std::fill(dist_row.begin(), dist_row.end(), 0.0);
                    for (std::size_t j = 0; j < dim; j++) {
                        const double pj = p[j];
                        const double* cj = coords.data() + j * count;
                        for (std::size_t k = 0; k < count; k++) {
                            const double diff = pj - cj[k];
                            dist_row[k] += diff * diff;
                        }
                    }
                }
                // 4-lane argmin, ties resolved to the lowest index
                std::size_t li[4] = {0, 0, 0, 0};
                double lm[4];
                lm[0] = lm[1] = lm[2] = lm[3] = std::numeric_limits<double>::infinity();
                const std::size_t tail = count - count % 4;
                for (std::size_t k = 0; k < tail; k += 4)
                    for (std::size_t l = 0; l < 4; l++)
                        if (dist_row[k + l] < lm[l]) {
                            lm[l] = dist_row[k + l];
                            li[l] = k + l;
                        }
                std::size_t best_i = li[0];
                double best = lm[0];
                for (std::size_t l = 1; l < 4; l++)
                    if (lm[l] < best || (lm[l] == best && li[l] < best_i)) {
                        best = lm[l];
                        best_i = li[l];
                    }
                for (std::size_t k = tail; k < count; k++)
                    if (dist_row[k] < best) {
                        best = dist_row[k];
                        best_i = k;
                    }
                assign[s] = best_i;
            }
            std::fill(sums.begin(), sums.end(), 0.0);
            std::fill(sizes.begin(), sizes.end(), 0u);
            for (std::size_t s = 0; s < n_samples; s++) {
                const double* p = samples.data() + s * dim;
                double* dst = sums.data() + assign[s] * dim;
                for (std::size_t j = 0; j < dim; j++)
                    dst[j] += p[j];
                sizes[assign[s]]++;
            }
            for (std::size_t k = 0; k < count; k++) {
                if (sizes[k] == 0)
                    continue; // empty cluster keeps its centroid
                for (std::size_t j = 0; j < dim; j++)
                    c.flat[k * dim + j] = sums[k * dim + j] / static_cast<double>(sizes[k]);
            }
        }
        return c;
    }

    // Process-wide cache; CVT construction is the only expensive setup step and
    // identical (count, dim, seed) triples recur across replications.
    inline const Centroids& cvt_centroids_cached(std::size_t count, std::size_t dim,
        std::uint64_t seed)
    {
        static std::map<std::tuple<std::size_t, std::size_t, std::uint64_t>, Centroids> cache;
        auto key = std::make_tuple(count, dim, seed);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, cvt_centroids(count, dim, seed)).first;
        return it->second;
    }

    // Index of the Euclidean-nearest centroid; ties resolve to the lowest index.
    // Out-of-range descriptors are still assigned to their nearest centroid.
    inline std::size_t cell_index(const Centroids& c, std::span<const double> descriptor)
    {
        if (descriptor.size() != c.dim)
            throw std::invalid_argument("cell_index: descriptor dimension mismatch");
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        const std::size_t n = c.count();
        for (std::size_t k = 0; k < n; k++) {
            const double* q = c.flat.data() + k * c.dim;
            double d2 = 0.0;
            for (std::size_t j = 0; j < c.dim; j++) {
                const double diff = descriptor[j] - q[j];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                best_i = k;
            }
        }
        return best_i;
    }

    enum class AddOutcome {
        inserted_new,
        replaced,
        rejected,
        rejected_invalid // non-finite fitness, flagged
    };

    // Elitist insertion: a candidate lands when its cell is empty or it is
    // strictly fitter than the incumbent. Stored descriptors are clamped to
    // [0,1]^dim; assignment uses the raw descriptor.
    inline AddOutcome try_insert(Archive& archive, ParamVector genotype, double fitness,
        std::span<const double> descriptor)
    {
        if (!std::isfinite(fitness))
            return AddOutcome::rejected_invalid;
        const std::size_t cell = cell_index(archive.centroids, descriptor);
        std::optional<Elite>& slot = archive.cells[cell];
        if (slot && !(fitness > slot->fitness))
            return AddOutcome::rejected;
        const bool was_empty = !slot.has_value();
        Elite e;
        e.genotype = std::move(genotype);
        e.fitness = fitness;
        e.descriptor.assign(descriptor.begin(), descriptor.end());
        for (double& v : e.descriptor)
            v = std::clamp(v, 0.0, 1.0);
        slot = std::move(e);
        return was_empty ? AddOutcome::inserted_new : AddOutcome::replaced;
    }

    // k elites uniformly with replacement from the occupied cells.
    inline std::vector<const Elite*> select_uniform(const Archive& archive, std::size_t k,
        Rng& rng)
    {
        const std::vector<std::size_t> occ = archive.occupied_cells();
        if (occ.empty())
            throw std::runtime_error("select_uniform: archive is empty");
        std::vector<const Elite*> picked(k);
        for (std::size_t i = 0; i < k; i++)
            picked[i] = &*archive.cells[occ[rng.uniform_index(occ.size())]];
        return picked;
    }

    struct ArchiveMetrics {
        double qd_score = 0.0;
        double coverage = 0.0;
        std::optional<double> max_fitness;
    };

    inline ArchiveMetrics archive_metrics(const Archive& archive)
    {
        ArchiveMetrics m;
        std::size_t occupied = 0;
        for (const auto& c : archive.cells) {
            if (!c)
                continue;
            occupied++;
            m.qd_score += c->fitness;
            if (!m.max_fitness || c->fitness > *m.max_fitness)
                m.max_fitness = c->fitness;
        }
        const std::size_t total = archive.cells.size();
        m.coverage = total == 0 ? 0.0 : static_cast<double>(occupied) / static_cast<double>(total);
        return m;
    }

} // namespace dcgme
