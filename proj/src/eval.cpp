#include "memseize/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "memseize/util.hpp"

namespace memseize {

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auroc: length mismatch");
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < scores.size(); ++i)
        (labels[i] == 1 ? pos : neg).push_back(scores[i]);
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("auroc: both classes must be present");

    // Exact pair counting via sorted negatives.
    std::sort(neg.begin(), neg.end());
    double wins = 0.0;
    for (const double p : pos) {
        const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
        const auto hi = std::upper_bound(neg.begin(), neg.end(), p);
        wins += static_cast<double>(lo - neg.begin());  // strictly below
        wins += 0.5 * static_cast<double>(hi - lo);     // ties
    }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

MetricsReport metrics(const std::vector<double>& preictal_prob, const std::vector<int>& labels,
                      double interictal_hours, double threshold) {
    if (preictal_prob.size() != labels.size())
        throw std::invalid_argument("metrics: length mismatch");
    MetricsReport r;
    r.interictal_hours = interictal_hours;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = preictal_prob[i] >= threshold;
        if (labels[i] == 1)
            pred ? ++r.tp : ++r.fn;
        else
            pred ? ++r.fp : ++r.tn;
    }
    const long total = r.tp + r.fp + r.tn + r.fn;
    r.accuracy = total > 0 ? static_cast<double>(r.tp + r.tn) / static_cast<double>(total) : 0.0;
    r.sensitivity =
        r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
    if (r.fp > 0 && interictal_hours <= 0.0)
        throw std::invalid_argument("metrics: false positives with no interictal duration");
    r.fpr_per_hour =
        interictal_hours > 0.0 ? static_cast<double>(r.fp) / interictal_hours : 0.0;
    const bool both = (r.tp + r.fn) > 0 && (r.fp + r.tn) > 0;
    r.auroc = both ? auroc(preictal_prob, labels) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

double event_sensitivity(const std::vector<double>& alarm_times_s,
                         const std::vector<double>& onsets_s, const ClinicalWindows& cw) {
    if (onsets_s.empty()) return 0.0;
    const double sph = cw.sph_minutes * 60.0;
    const double sop = cw.sop_minutes * 60.0;
    int predicted = 0;
    for (const double onset : onsets_s) {
        bool hit = false;
        for (const double tau : alarm_times_s)
            hit = hit || (onset >= tau + sph && onset <= tau + sph + sop);
        predicted += hit ? 1 : 0;
    }
    return static_cast<double>(predicted) / static_cast<double>(onsets_s.size());
}

namespace {

MetricsReport evaluate_fold(const NetworkSpec& spec, const LayerWeights& w, const Dataset& ds,
                            const std::vector<int>& val_ids, double window_seconds,
                            const MappedNetwork* mapped) {
    std::vector<double> probs;
    std::vector<int> labels;
    int interictal = 0;
    for (const int id : val_ids) {
        const Tensor3 x =
            standardize(ds.window(static_cast<std::size_t>(id)), w.norm_mean, w.norm_std);
        probs.push_back(forward_probs(spec, w, x, mapped)(1));
        const int label =
            ds.index[static_cast<std::size_t>(id)].label == WindowClass::Preictal ? 1 : 0;
        labels.push_back(label);
        interictal += label == 0 ? 1 : 0;
    }
    const double hours = interictal * window_seconds / 3600.0;
    return metrics(probs, labels, hours);
}

}  // namespace

std::vector<SweepRow> evaluate_ideal(const NetworkSpec& spec,
                                     const std::vector<LayerWeights>& fold_weights,
                                     const Dataset& ds, const FoldPlan& plan,
                                     double window_seconds) {
    std::vector<SweepRow> rows;
    for (int f = 0; f < plan.k; ++f) {
        SweepRow row;
        row.sigma = 0.0;
        row.n_states = kContinuousStates;
        row.fold = f;
        row.m = evaluate_fold(spec, fold_weights[static_cast<std::size_t>(f)], ds,
                              plan.val[static_cast<std::size_t>(f)], window_seconds, nullptr);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SweepRow> sweep(const NetworkSpec& spec,
                            const std::vector<LayerWeights>& fold_weights, const Dataset& ds,
                            const FoldPlan& plan, const DeviceParameters& base_device,
                            const SweepOptions& opt, std::uint64_t base_seed) {
    if (fold_weights.size() != static_cast<std::size_t>(plan.k))
        throw std::invalid_argument("sweep: one weight set per fold required");

    struct Job {
        std::size_t row_idx;
        double sigma;
        int n_states, seed, fold;
    };
    std::vector<Job> jobs;
    std::size_t idx = 0;
    for (const double sigma : opt.sigmas)
        for (const int st : opt.states)
            for (int seed = 0; seed < opt.seeds; ++seed)
                for (int fold = 0; fold < plan.k; ++fold)
                    jobs.push_back({idx++, sigma, st, seed, fold});

    std::vector<SweepRow> rows(jobs.size());
    std::vector<char> ok(jobs.size(), 0);
    std::atomic<std::size_t> next{0};
    const Rng grid_rng(base_seed);

    auto worker = [&]() {
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const Job& job = jobs[j];
            SweepRow row;
            row.sigma = job.sigma;
            row.n_states = job.n_states;
            row.seed = job.seed;
            row.fold = job.fold;
            try {
                DeviceParameters dev = base_device;
                dev.sigma = job.sigma;
                dev.n_states = job.n_states;
                // One documented substream per grid cell and fold.
                const std::uint64_t cell_key =
                    (static_cast<std::uint64_t>(job.row_idx) << 8) ^
                    static_cast<std::uint64_t>(job.fold);
                const MappedNetwork mapped = map_network(
                    spec, fold_weights[static_cast<std::size_t>(job.fold)], dev, opt.tile,
                    opt.scheme, grid_rng.derive(cell_key).next_u64());
                row.m = evaluate_fold(spec, fold_weights[static_cast<std::size_t>(job.fold)],
                                      ds, plan.val[static_cast<std::size_t>(job.fold)],
                                      opt.window_seconds, &mapped);
                rows[job.row_idx] = row;
                ok[job.row_idx] = 1;
            } catch (const std::exception& e) {
                std::cerr << "sweep: cell sigma=" << job.sigma << " states=" << job.n_states
                          << " seed=" << job.seed << " fold=" << job.fold
                          << " failed: " << e.what() << '\n';
            }
        }
    };

    unsigned n_threads = opt.jobs > 0 ? static_cast<unsigned>(opt.jobs)
                                      : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<SweepRow> out;
    for (std::size_t j = 0; j < jobs.size(); ++j)
        if (ok[j]) out.push_back(rows[j]);
    return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "sigma,n_states,seed,fold,accuracy,sensitivity,auroc,fpr_per_hour\n";
    for (const auto& r : rows) {
        out << format_double(r.sigma) << ',' << r.n_states << ',' << r.seed << ',' << r.fold
            << ',' << format_double(r.m.accuracy) << ',' << format_double(r.m.sensitivity)
            << ',';
        if (std::isnan(r.m.auroc))
            out << "nan";
        else
            out << format_double(r.m.auroc);
        out << ',' << format_double(r.m.fpr_per_hour) << '\n';
    }
}

}  // namespace memseize
