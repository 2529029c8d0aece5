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


#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "risac/risac.hpp"

namespace
{

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonFlags
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out_path;
    std::optional<int> workers;
};

void add_common(CLI::App *cmd, CommonFlags &f)
{
    cmd->add_option("--config", f.config_path, "scenario config file (key = value)");
    cmd->add_option("--seed", f.seed, "master seed (overrides master_seed)");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials (overrides mc_trials)");
    cmd->add_option("--out", f.out_path, "output CSV path (default: stdout)");
    cmd->add_option("--workers", f.workers, "worker threads (default: $RISAC_WORKERS or 1)");
}

risac::ScenarioConfig load(const CommonFlags &f)
{
    risac::ScenarioConfig cfg = f.config_path.empty() ? risac::ScenarioConfig{} : risac::load_config(f.config_path);
    if (f.seed)
        cfg.master_seed = *f.seed;
    if (f.trials)
        cfg.mc_trials = *f.trials;
    cfg.validate();
    return cfg;
}

int workers(const CommonFlags &f) { return f.workers ? *f.workers : risac::default_workers(); }

template <typename Writer>
void emit(const std::string &path, Writer &&write)
{
    if (path.empty())
    {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw risac::ConfigError("cannot open output file '" + path + "'");
    write(out);
}

std::optional<risac::ChannelRealization> replay(const std::string &path, const risac::ScenarioConfig &cfg)
{
    if (path.empty())
        return std::nullopt;
    std::ifstream in(path);
    if (!in)
        throw risac::ConfigError("cannot open channel dump '" + path + "'");
    return risac::read_channel_dump(in, cfg);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"risac: repeater-assisted bi-static MIMO ISAC simulator"};
    app.require_subcommand(1);

    CommonFlags pod_flags, se_flags, oracle_flags, cal_flags;
    std::string channel_dump, channel_replay, detector_dump;

    auto *pod = app.add_subcommand("pod", "probability of detection versus RCS variance");
    add_common(pod, pod_flags);
    pod->add_option("--channel-dump", channel_dump, "write the study's base channel realization as CSV");
    pod->add_option("--channel-replay", channel_replay, "use a dumped channel realization as the base channels");
    pod->add_option("--detector-dump", detector_dump, "write per-trial detector outputs of the H1 runs as CSV");

    auto *secdf = app.add_subcommand("secdf", "CDF of downlink per-user spectral efficiency");
    add_common(secdf, se_flags);

    auto *oracle = app.add_subcommand("oracle-check", "closed-form GLRT against the brute-force oracle");
    add_common(oracle, oracle_flags);

    auto *calibrate = app.add_subcommand("calibrate", "H0 threshold calibration only");
    add_common(calibrate, cal_flags);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        std::cerr << app.help();
        return kExitConfig;
    }

    try
    {
        if (*pod)
        {
            const auto cfg = load(pod_flags);
            risac::RunOptions opt;
            opt.workers = workers(pod_flags);
            opt.detector_dump = !detector_dump.empty();
            opt.replay = replay(channel_replay, cfg);
            if (!channel_dump.empty())
            {
                const auto study = risac::make_sensing_study(cfg, opt.replay);
                emit(channel_dump, [&](std::ostream &o) { risac::write_channel_dump(o, study.base); });
            }
            const auto result = risac::run_pod_vs_rcs(cfg, opt);
            for (const auto &p : result.pod)
                if (!p.warning.empty())
                    std::cerr << "warning: " << p.warning << '\n';
            emit(pod_flags.out_path, [&](std::ostream &o) { risac::write_pod_csv(o, result); });
            if (opt.detector_dump)
                emit(detector_dump, [&](std::ostream &o) { risac::write_detector_dump(o, result.detector_dump); });
        }
        else if (*secdf)
        {
            const auto cfg = load(se_flags);
            risac::RunOptions opt;
            opt.workers = workers(se_flags);
            const auto result = risac::run_se_cdf(cfg, opt);
            if (result.degenerate_drops > 0)
                std::cerr << "comm_centric nulling degenerate on " << result.degenerate_drops << " of "
                          << result.drops << " drops\n";
            emit(se_flags.out_path, [&](std::ostream &o) { risac::write_se_cdf_csv(o, result); });
        }
        else if (*oracle)
        {
            const auto cfg = load(oracle_flags);
            const int instances = oracle_flags.trials.value_or(100);
            const auto s = risac::run_oracle_check(instances, cfg.master_seed);
            std::cout << "instances " << s.instances << ", failures " << s.failures << ", worst relative error "
                      << s.worst_relative_error << '\n';
            return s.failures == 0 ? 0 : kExitNumerical;
        }
        else if (*calibrate)
        {
            const auto cfg = load(cal_flags);
            const auto study = risac::make_sensing_study(cfg);
            const auto cal = risac::calibrate_threshold(study, workers(cal_flags));
            if (!cal.warning.empty())
                std::cerr << "warning: " << cal.warning << '\n';
            emit(cal_flags.out_path, [&](std::ostream &o) { risac::write_calibration_csv(o, cfg, cal); });
        }
    }
    catch (const risac::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const risac::NumericalError &e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    catch (const std::domain_error &e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
