#include "wtw/sampling.hpp"

#include "wtw/errors.hpp"
#include "wtw/random.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <thread>

namespace wtw {

namespace {

constexpr std::size_t kChunk = 32;

struct Accumulator {
    std::vector<double> sum, sumsq;
    std::vector<std::size_t> count;

    explicit Accumulator(std::size_t n = 0) : sum(n, 0.0), sumsq(n, 0.0), count(n, 0) {}
    void add(std::size_t i, double v) {
        sum[i] += v;
        sumsq[i] += v * v;
        ++count[i];
    }
    void merge(const Accumulator& o) {
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += o.sum[i];
            sumsq[i] += o.sumsq[i];
            count[i] += o.count[i];
        }
    }
};

struct ChunkResult {
    std::vector<Accumulator> per_metric;
    Accumulator scalars{2};  // L, W
};

/// Realized weights of every pair i < j for one sample, row-major upper triangle.
class Draw {
public:
    Draw(const Ensemble& e, std::uint64_t seed, std::uint64_t t) : n_(e.size()), w_(n_ * n_, 0) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) {
                SplitMix64 rng(stream_key(seed, t, i, j));
                const double u1 = rng.uniform();
                const double u2 = rng.uniform();
                const Weight w = e.draw(i, j, u1, u2);
                w_[i * n_ + j] = w_[j * n_ + i] = w;
            }
    }
    Weight operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<Weight> w_;
};

class Worker {
public:
    Worker(const Ensemble& e, const SampleOptions& opt, std::size_t n_metrics)
        : e_(e), opt_(opt), n_(e.size()), words_((n_ + 63) / 64), n_metrics_(n_metrics) {}

    ChunkResult run(std::uint64_t seed, std::size_t begin, std::size_t end) {
        ChunkResult r;
        r.per_metric.assign(n_metrics_, Accumulator(n_));
        for (std::size_t t = begin; t < end; ++t)
            one(seed, t, r);
        return r;
    }

private:
    void one(std::uint64_t seed, std::size_t t, ChunkResult& r) {
        const Draw d(e_, seed, t);
        const bool weighted = e_.weighted();
        bits_.assign(n_ * words_, 0);
        nbrs_.assign(n_, {});
        std::vector<double> k(n_, 0.0), s(n_, 0.0);
        double links = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) {
                const Weight w = d(i, j);
                if (w <= 0)
                    continue;
                bits_[i * words_ + j / 64] |= 1ULL << (j % 64);
                bits_[j * words_ + i / 64] |= 1ULL << (i % 64);
                nbrs_[i].push_back(j);
                nbrs_[j].push_back(i);
                k[i] += 1.0;
                k[j] += 1.0;
                const double wd = weighted ? static_cast<double>(w) : 1.0;
                s[i] += wd;
                s[j] += wd;
                links += 1.0;
                total += wd;
            }
        r.scalars.add(0, links);
        r.scalars.add(1, total);

        std::size_t slot = 0;
        for (std::size_t i = 0; i < n_; ++i)
            r.per_metric[slot].add(i, k[i]);
        ++slot;
        if (weighted) {
            for (std::size_t i = 0; i < n_; ++i)
                r.per_metric[slot].add(i, s[i]);
            ++slot;
        }
        if (opt_.ratio_metrics) {
            for (std::size_t i = 0; i < n_; ++i) {
                if (k[i] == 0.0)
                    continue;
                double sk = 0.0;
                for (std::size_t j : nbrs_[i])
                    sk += k[j];
                r.per_metric[slot].add(i, sk / k[i]);
            }
            ++slot;
            for (std::size_t i = 0; i < n_; ++i) {
                if (k[i] <= 1.0)
                    continue;
                double closed = 0.0;
                const std::uint64_t* bi = &bits_[i * words_];
                for (std::size_t j : nbrs_[i]) {
                    const std::uint64_t* bj = &bits_[j * words_];
                    for (std::size_t q = 0; q < words_; ++q)
                        closed += std::popcount(bi[q] & bj[q]);
                }
                r.per_metric[slot].add(i, closed / (k[i] * (k[i] - 1.0)));
            }
            ++slot;
            if (weighted) {
                for (std::size_t i = 0; i < n_; ++i) {
                    if (k[i] == 0.0)
                        continue;
                    double ss = 0.0;
                    for (std::size_t j : nbrs_[i])
                        ss += s[j];
                    r.per_metric[slot].add(i, ss / k[i]);
                }
                ++slot;
            }
        }
        if (weighted && opt_.weighted_clustering && total > 0.0) {
            std::vector<double> cr(n_ * n_, 0.0);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j : nbrs_[i])
                    cr[i * n_ + j] = std::cbrt(static_cast<double>(d(i, j)) / total);
            for (std::size_t i = 0; i < n_; ++i) {
                if (k[i] <= 1.0)
                    continue;
                double sum = 0.0;
                for (std::size_t j : nbrs_[i])
                    for (std::size_t l : nbrs_[i])
                        sum += cr[i * n_ + j] * cr[j * n_ + l] * cr[l * n_ + i];
                r.per_metric[slot].add(i, sum / (k[i] * (k[i] - 1.0)));
            }
        }
    }

    const Ensemble& e_;
    const SampleOptions& opt_;
    std::size_t n_, words_, n_metrics_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::vector<std::size_t>> nbrs_;
};

std::vector<std::string> metric_names(bool weighted, const SampleOptions& opt) {
    std::vector<std::string> names{"k"};
    if (weighted)
        names.push_back("s");
    if (opt.ratio_metrics) {
        names.push_back("knn");
        names.push_back("c");
        if (weighted)
            names.push_back("snn");
    }
    if (weighted && opt.weighted_clustering)
        names.push_back("cw");
    return names;
}

ScalarEstimate estimate(double sum, double sumsq, std::size_t count) {
    const double c = static_cast<double>(count);
    ScalarEstimate e;
    e.mean = sum / c;
    if (count > 1) {
        const double var = std::max(0.0, (sumsq - c * e.mean * e.mean) / (c - 1.0));
        e.se = std::sqrt(var / c);
    }
    return e;
}

} // namespace

const MonteCarloMetric& SampleSet::at(const std::string& metric) const {
    for (const auto& mc : metrics)
        if (mc.metric == metric)
            return mc;
    throw InputError("sample set has no metric '" + metric + "'");
}

SampleSet sample(const Ensemble& ensemble, std::size_t m, std::uint64_t seed, const SampleOptions& options) {
    if (m == 0)
        throw InputError("number of samples must be at least 1");
    const std::size_t n = ensemble.size();
    const auto names = metric_names(ensemble.weighted(), options);
    const std::size_t chunks = (m + kChunk - 1) / kChunk;
    std::vector<ChunkResult> results(chunks);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        Worker w(ensemble, options, names.size());
        for (std::size_t c = next++; c < chunks; c = next++)
            results[c] = w.run(seed, c * kChunk, std::min(m, (c + 1) * kChunk));
    };
    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, chunks);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(work);
    }

    // Fixed merge order keeps the result independent of scheduling.
    ChunkResult total;
    total.per_metric.assign(names.size(), Accumulator(n));
    for (const auto& r : results) {
        for (std::size_t q = 0; q < names.size(); ++q)
            total.per_metric[q].merge(r.per_metric[q]);
        total.scalars.merge(r.scalars);
    }

    SampleSet set;
    set.model = std::string(family_name(ensemble.spec().family));
    set.seed = seed;
    set.m = m;
    for (std::size_t q = 0; q < names.size(); ++q) {
        const Accumulator& a = total.per_metric[q];
        MonteCarloMetric mc{names[q], MetricVector(n), MetricVector(n), a.count};
        for (std::size_t i = 0; i < n; ++i) {
            if (a.count[i] == 0)
                continue;
            const auto e = estimate(a.sum[i], a.sumsq[i], a.count[i]);
            mc.mean[i] = e.mean;
            if (a.count[i] > 1)
                mc.se[i] = e.se;
        }
        set.metrics.push_back(std::move(mc));
    }
    set.links = estimate(total.scalars.sum[0], total.scalars.sumsq[0], m);
    set.total_weight = estimate(total.scalars.sum[1], total.scalars.sumsq[1], m);
    return set;
}

SampleSet sample(const FittedModel& fm, std::size_t m, std::uint64_t seed, const std::optional<NodeAttributes>& attrs,
                 const SampleOptions& options) {
    if (fm.status == FitStatus::Infeasible)
        throw InfeasibleError("cannot sample an infeasible model: " + fm.diagnosis);
    return sample(Ensemble(fm.spec, attrs), m, seed, options);
}

WeightedGraph draw_graph(const Ensemble& ensemble, std::uint64_t seed, std::uint64_t index) {
    const std::size_t n = ensemble.size();
    const Draw d(ensemble, seed, index);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (d(i, j) > 0)
                edges.push_back({i, j, ensemble.weighted() ? d(i, j) : 1});
    return WeightedGraph::with_nodes(n, edges);
}

} // namespace wtw
