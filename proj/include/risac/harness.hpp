// SPDX-License-Identifier: Apache-2.0
//
// risac: link-level simulator for repeater-assisted bi-static MIMO ISAC
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef RISAC_HARNESS_HPP
#define RISAC_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "comm_metrics.hpp"
#include "detector.hpp"
#include "precoding.hpp"
#include "propagation.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "types.hpp"

namespace risac
{

// ---------------------------------------------------------------------------
// Trial-parallel execution. Results land at their trial index, so the output
// does not depend on the number of workers or on scheduling.

inline int default_workers()
{
    if (const char *env = std::getenv("RISAC_WORKERS"))
    {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return 1;
}

template <typename Fn>
auto run_trials(int count, int workers, Fn &&fn) -> std::vector<decltype(fn(0))>
{
    using Result = decltype(fn(0));
    std::vector<Result> results(static_cast<std::size_t>(std::max(count, 0)));
    workers = std::clamp(workers, 1, std::max(count, 1));
    if (workers == 1)
    {
        for (int i = 0; i < count; ++i)
            results[static_cast<std::size_t>(i)] = fn(i);
        return results;
    }

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++)
            {
                try
                {
                    results[static_cast<std::size_t>(i)] = fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto &t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

// ---------------------------------------------------------------------------

struct TrialRecord
{
    std::uint64_t trial_id = 0;
    Hypothesis truth = Hypothesis::h0;
    double statistic = 0.0;
    Hypothesis decision = Hypothesis::h0;
    Complex rcs_draw{};
    Complex rcs_estimate{};
    std::vector<double> sinr;
    std::vector<double> se;
    std::uint64_t seed = 0;
};

/// Fixed part of a sensing study: geometry, the deterministic channels, the
/// precoders and the detector's model. Per trial only clutter, residual
/// inter-BS error, RCS, symbols and noise are redrawn.
struct SensingStudy
{
    ScenarioConfig config;
    Geometry geometry;
    LinkBudget budget;
    ChannelRealization base;
    PrecoderSet precoders;
    SensingModel model;
};

/// Draws geometry and base channels from the master seed, or takes the base
/// channels from a replayed dump.
inline SensingStudy make_sensing_study(const ScenarioConfig &config,
                                       const std::optional<ChannelRealization> &replay = std::nullopt)
{
    config.validate();
    SensingStudy s;
    s.config = config;
    RandomStream geo_rng(config.master_seed, StreamKind::geometry, 0);
    s.geometry = drop_entities(config, geo_rng);
    s.budget = link_budget(s.geometry, config);
    if (replay)
    {
        s.base = *replay;
    }
    else
    {
        RandomStream ch_rng(config.master_seed, StreamKind::base_channels, 0);
        s.base = gen_channels(s.geometry, config, ch_rng);
    }
    s.precoders = build_precoders(s.base, config);
    s.model = make_sensing_model(s.base, config, clutter_covariance(config, s.geometry));
    return s;
}

/// Same study with a different repeater gain and RCS prior; geometry and base
/// channels are kept, precoders and the detector model are rebuilt.
inline SensingStudy with_operating_point(const SensingStudy &study, std::optional<double> repeater_gain_db,
                                         double sigma_t_sq)
{
    SensingStudy s = study;
    s.config.repeater_gain_db = repeater_gain_db;
    s.config.rcs_variance = sigma_t_sq;
    s.precoders = build_precoders(s.base, s.config);
    s.model = make_sensing_model(s.base, s.config, clutter_covariance(s.config, s.geometry));
    return s;
}

/// One sensing slot. The draw order is fixed so that trial i sees the same
/// underlying normals at every operating point (common random numbers).
inline TrialRecord simulate_sensing_trial(const SensingStudy &study, StreamKind stream, std::uint64_t trial,
                                          bool target_present, bool with_estimates = false)
{
    const ScenarioConfig &cfg = study.config;
    const std::uint64_t seed = substream_seed(cfg.master_seed, stream, trial);
    RandomStream rng(seed);

    ChannelRealization ch = study.base;
    ch.clutter = draw_clutter(cfg, study.budget, rng);
    ch.interbs_error = draw_interbs_error(cfg, rng);
    const Complex alpha = draw_rcs(cfg.rcs_variance, rng);
    ch.rcs = target_present ? alpha : Complex{};

    const TransmitFrame frame = build_transmit_frame(study.precoders, cfg, rng);
    const NoiseDraws noise = draw_noise(cfg, rng);
    const SensingObservation obs = receive_bs_slot(frame, ch, noise, cfg);
    const DetectorWorkspace ws = assemble_statistics(obs, frame.x, study.model);

    TrialRecord rec;
    rec.trial_id = trial;
    rec.truth = target_present ? Hypothesis::h1 : Hypothesis::h0;
    rec.statistic = glrt_statistic(ws);
    rec.rcs_draw = ch.rcs;
    rec.seed = seed;
    if (with_estimates)
        rec.rcs_estimate = map_estimate(ws).rcs;
    return rec;
}

inline std::vector<double> null_statistics(const SensingStudy &study, StreamKind stream, int trials, int workers)
{
    return run_trials(trials, workers, [&](int i) {
        return simulate_sensing_trial(study, stream, static_cast<std::uint64_t>(i), false).statistic;
    });
}

/// Empirical H0 calibration: calibration_trials null slots, threshold at the
/// (1 - pfa_target) quantile.
inline ThresholdCalibration calibrate_threshold(const SensingStudy &study, int workers)
{
    return empirical_threshold(null_statistics(study, StreamKind::calibration, study.config.calibration_trials, workers),
                               study.config.pfa_target);
}

// ---------------------------------------------------------------------------
// Studies

enum class StudyKind
{
    pod_vs_rcs,
    se_cdf,
};

struct PodPoint
{
    double sigma_t_sq = 0.0;
    std::optional<double> repeater_gain_db;
    double pod = 0.0;
    double threshold = 0.0;
    double empirical_pfa = 0.0;
    int trials = 0;
    int calibration_trials = 0;
    std::string warning;
};

struct DetectorDumpRow
{
    std::uint64_t trial = 0;
    double statistic = 0.0;
    double threshold = 0.0;
    Hypothesis decision = Hypothesis::h0;
    Complex rcs_estimate{};
};

struct SeSeries
{
    PrecoderMode mode = PrecoderMode::target_centric;
    bool repeater = false;
    std::vector<double> se; // sorted ascending
};

struct StudyResult
{
    StudyKind kind = StudyKind::pod_vs_rcs;
    std::vector<PodPoint> pod;
    std::vector<SeSeries> se;
    int drops = 0;
    int degenerate_drops = 0; // comm-centric nulling impossible on that drop
    std::vector<DetectorDumpRow> detector_dump;
};

struct RunOptions
{
    int workers = 1;
    bool detector_dump = false;
    std::optional<ChannelRealization> replay;
};

/// PoD versus RCS variance for every configured repeater gain. Each grid point
/// gets its own H0 calibration, a fresh H0 run for the realized PFA, and an
/// H1 run with alpha ~ CN(0, sigma_T^2). Trial streams are shared across grid
/// points and gains.
inline StudyResult run_pod_vs_rcs(const ScenarioConfig &config, const RunOptions &options = {})
{
    if (config.rcs_grid.empty())
        throw ConfigError("rcs_grid is empty");
    if (config.pod_repeater_gains_db.empty())
        throw ConfigError("pod_repeater_gains_db is empty");
    const SensingStudy base = make_sensing_study(config, options.replay);

    StudyResult result;
    result.kind = StudyKind::pod_vs_rcs;
    std::uint64_t dump_index = 0;
    for (const auto &gain : config.pod_repeater_gains_db)
    {
        for (const double sigma_t_sq : config.rcs_grid)
        {
            const SensingStudy study = with_operating_point(base, gain, sigma_t_sq);
            const ThresholdCalibration cal = calibrate_threshold(study, options.workers);

            const auto h0 = null_statistics(study, StreamKind::null_evaluation, config.mc_trials, options.workers);
            const auto false_alarms = std::count_if(h0.begin(), h0.end(), [&](double t) {
                return decide(t, cal.threshold) == Hypothesis::h1;
            });

            const auto h1 = run_trials(config.mc_trials, options.workers, [&](int i) {
                return simulate_sensing_trial(study, StreamKind::detection, static_cast<std::uint64_t>(i), true,
                                              options.detector_dump);
            });
            int detections = 0;
            for (const auto &rec : h1)
            {
                const Hypothesis d = decide(rec.statistic, cal.threshold);
                detections += d == Hypothesis::h1;
                if (options.detector_dump)
                    result.detector_dump.push_back({dump_index++, rec.statistic, cal.threshold, d, rec.rcs_estimate});
            }

            PodPoint p;
            p.sigma_t_sq = sigma_t_sq;
            p.repeater_gain_db = gain;
            p.pod = static_cast<double>(detections) / config.mc_trials;
            p.threshold = cal.threshold;
            p.empirical_pfa = static_cast<double>(false_alarms) / config.mc_trials;
            p.trials = config.mc_trials;
            p.calibration_trials = cal.trials;
            p.warning = cal.warning;
            result.pod.push_back(std::move(p));
        }
    }
    return result;
}

/// Per-user downlink SE over independent drops for target-centric and
/// comm-centric sensing beams, with the repeater off and on (at
/// repeater_gain_db). All four variants see the same drops.
inline StudyResult run_se_cdf(const ScenarioConfig &config, const RunOptions &options = {})
{
    config.validate();
    if (config.n_users < 1)
        throw ConfigError("se_cdf study needs at least one user");
    const std::optional<double> on_gain = config.repeater_gain_db ? config.repeater_gain_db : 20.0;
    const PrecoderMode modes[] = {PrecoderMode::target_centric, PrecoderMode::comm_centric};
    const std::optional<double> gains[] = {std::nullopt, on_gain};

    struct DropOutcome
    {
        std::vector<double> se[2][2]; // [mode][repeater]
        bool degenerate = false;
    };

    const auto drops = run_trials(config.mc_trials, options.workers, [&](int d) {
        RandomStream rng(config.master_seed, StreamKind::se_drop, static_cast<std::uint64_t>(d));
        const Geometry geo = drop_entities(config, rng);
        const ChannelRealization ch = gen_channels(geo, config, rng);
        DropOutcome out;
        for (int m = 0; m < 2; ++m)
            for (int r = 0; r < 2; ++r)
            {
                ScenarioConfig cfg = config;
                cfg.precoder_mode = modes[m];
                cfg.repeater_gain_db = gains[r];
                try
                {
                    const PrecoderSet pre = build_precoders(ch, cfg);
                    for (const auto &um : all_user_metrics(pre, ch, cfg))
                        out.se[m][r].push_back(um.se);
                }
                catch (const NumericalError &)
                {
                    if (modes[m] != PrecoderMode::comm_centric)
                        throw;
                    out.degenerate = true;
                }
            }
        return out;
    });

    StudyResult result;
    result.kind = StudyKind::se_cdf;
    result.drops = config.mc_trials;
    for (int m = 0; m < 2; ++m)
        for (int r = 0; r < 2; ++r)
        {
            SeSeries s;
            s.mode = modes[m];
            s.repeater = r == 1;
            for (const auto &d : drops)
                s.se.insert(s.se.end(), d.se[m][r].begin(), d.se[m][r].end());
            std::sort(s.se.begin(), s.se.end());
            result.se.push_back(std::move(s));
        }
    for (const auto &d : drops)
        result.degenerate_drops += d.degenerate;
    return result;
}

// ---------------------------------------------------------------------------
// CSV output. Numbers use the shortest round-trip form so that identical
// results give identical bytes. A disabled repeater is written as -inf dB.

inline std::string format_gain(const std::optional<double> &gain_db)
{
    return gain_db ? format_number(*gain_db) : std::string("-inf");
}

inline void write_pod_csv(std::ostream &out, const StudyResult &r)
{
    out << "sigma_t_sq,repeater_gain_db,pod,threshold,empirical_pfa,trials\n";
    for (const auto &p : r.pod)
        out << format_number(p.sigma_t_sq) << ',' << format_gain(p.repeater_gain_db) << ',' << format_number(p.pod)
            << ',' << format_number(p.threshold) << ',' << format_number(p.empirical_pfa) << ',' << p.trials << '\n';
}

inline void write_se_cdf_csv(std::ostream &out, const StudyResult &r)
{
    out << "mode,repeater,se,cdf\n";
    for (const auto &s : r.se)
    {
        const double n = static_cast<double>(s.se.size());
        for (std::size_t i = 0; i < s.se.size(); ++i)
            out << to_string(s.mode) << ',' << (s.repeater ? "on" : "off") << ',' << format_number(s.se[i]) << ','
                << format_number(static_cast<double>(i + 1) / n) << '\n';
    }
}

inline void write_calibration_csv(std::ostream &out, const ScenarioConfig &config, const ThresholdCalibration &cal)
{
    out << "sigma_t_sq,repeater_gain_db,threshold,calibration_trials,calibration_pfa,pfa_target\n";
    out << format_number(config.rcs_variance) << ',' << format_gain(config.repeater_gain_db) << ','
        << format_number(cal.threshold) << ',' << cal.trials << ',' << format_number(cal.calibration_pfa) << ','
        << format_number(cal.pfa_target) << '\n';
}

inline void write_detector_dump(std::ostream &out, const std::vector<DetectorDumpRow> &rows)
{
    out << "trial,T,threshold,decision,re_alpha,im_alpha\n";
    for (const auto &row : rows)
        out << row.trial << ',' << format_number(row.statistic) << ',' << format_number(row.threshold) << ','
            << (row.decision == Hypothesis::h1 ? "H1" : "H0") << ',' << format_number(row.rcs_estimate.real()) << ','
            << format_number(row.rcs_estimate.imag()) << '\n';
}

} // namespace risac

#endif
