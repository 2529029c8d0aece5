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


#ifndef RISAC_SCENARIO_HPP
#define RISAC_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "random.hpp"
#include "types.hpp"

namespace risac
{

using Position = Eigen::Vector3d;

enum class PrecoderMode
{
    target_centric,
    comm_centric,
    repeater_null,
};

enum class SymbolAlphabet
{
    gaussian,
    qpsk,
};

inline std::string to_string(PrecoderMode m)
{
    switch (m)
    {
    case PrecoderMode::target_centric: return "target_centric";
    case PrecoderMode::comm_centric: return "comm_centric";
    case PrecoderMode::repeater_null: return "repeater_null";
    }
    return "?";
}

/// All physical and algorithmic parameters of one study.
///
/// Powers are in watts, channel gains linear. The only dB quantities are the
/// ones that are naturally specified that way at the config boundary (noise
/// density, noise figures, repeater gain); the accessors below convert them.
///
/// Path loss follows 3GPP TR 38.901 UMi-Street-Canyon NLOS:
///   PL = 22.4 + 35.3 log10(d_3D) + 21.3 log10(f_GHz) - 0.3 (h_UT - 1.5)
/// with d_3D clamped to at least 1 m.
struct ScenarioConfig
{
    int n_tx_antennas = 8;
    int n_rx_antennas = 8;
    int n_users = 10;
    int slot_length = 50;

    double tx_power_watt = 1.0;
    double sensing_power_fraction = 0.5;
    // Empty means equal split of (1 - sensing_power_fraction) across users.
    std::vector<double> user_power_fractions;

    // Repeater gain |nu|^2 in dB over the repeater noise floor; nullopt = no repeater.
    std::optional<double> repeater_gain_db = 20.0;
    double repeater_phase_rad = 0.0;

    double rcs_variance = 1.0e9;
    // detector assumes detector_rcs_scale * rcs_variance; 1 means matched
    double detector_rcs_scale = 1.0;
    double carrier_ghz = 1.9;
    double bandwidth_hz = 20.0e6;
    double noise_density_dbm_hz = -174.0;
    double noise_figure_db = 9.0;
    double ue_noise_figure_db = 9.0;
    // Defaults to the receive-BS noise power.
    std::optional<double> repeater_noise_power_watt;
    double residual_interbs_power = 1.0e-13;
    double clutter_suppression = 0.1;
    // Defaults to K * sigma_UE^2 / rho.
    std::optional<double> zf_regularizer;

    double pfa_target = 0.01;
    int mc_trials = 2000;
    int calibration_trials = 10000;
    std::uint64_t master_seed = 1;

    PrecoderMode precoder_mode = PrecoderMode::target_centric;
    bool conjugate_convention = true;
    // Precode on f_n + nu h_n b_t instead of f_n alone.
    bool precoder_repeater_aware = true;
    // Pre-cancel the direct repeater leakage nu b_r b_t^T x at the receive BS.
    bool cancel_repeater_leakage = true;
    // Let the SINR interference sum run over every user, including the served one.
    bool sinr_literal_sum = false;
    SymbolAlphabet symbol_alphabet = SymbolAlphabet::gaussian;

    Position tx_bs_position{0.0, 0.0, 25.0};
    Position rx_bs_position{400.0, 0.0, 25.0};
    Position hotspot_center{200.0, 100.0, 1.5};
    std::optional<Position> repeater_position;
    double repeater_height_m = 10.0;
    double user_height_m = 1.5;
    double service_radius_m = 200.0;
    double repeater_disc_radius_m = 100.0;
    // Array broadside azimuths; steering angles are measured from these.
    double tx_array_azimuth_deg = 0.0;
    double rx_array_azimuth_deg = 180.0;

    std::vector<double> rcs_grid{1.0e6, 1.0e7, 1.0e8, 1.0e9, 1.0e10, 1.0e11, 1.0e12, 1.0e13};
    std::vector<std::optional<double>> pod_repeater_gains_db{std::nullopt, 20.0};

    double noise_power_bs() const;
    double noise_power_ue() const;
    double noise_power_repeater() const;
    double zf_regularization() const;
    Complex repeater_gain() const;
    std::vector<double> user_fractions() const;

    // Throws ConfigError naming the first violated invariant.
    void validate() const;
};

inline double noise_power_watt(double density_dbm_hz, double bandwidth_hz, double noise_figure_db)
{
    if (!(bandwidth_hz > 0.0))
        throw ConfigError("bandwidth must be positive");
    return std::pow(10.0, (density_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db - 30.0) / 10.0);
}

// UMi-Street-Canyon NLOS path loss in dB.
inline double pathloss_db(double distance_m, double carrier_ghz, double ut_height_m)
{
    if (!(distance_m > 0.0))
        throw std::domain_error("path loss distance must be positive");
    if (!(carrier_ghz > 0.0))
        throw std::domain_error("carrier frequency must be positive");
    const double d = std::max(distance_m, 1.0);
    return 22.4 + 35.3 * std::log10(d) + 21.3 * std::log10(carrier_ghz) - 0.3 * (ut_height_m - 1.5);
}

inline double pathloss_linear(double distance_m, double carrier_ghz, double ut_height_m)
{
    return std::pow(10.0, -pathloss_db(distance_m, carrier_ghz, ut_height_m) / 10.0);
}

inline double ScenarioConfig::noise_power_bs() const
{
    return noise_power_watt(noise_density_dbm_hz, bandwidth_hz, noise_figure_db);
}

inline double ScenarioConfig::noise_power_ue() const
{
    return noise_power_watt(noise_density_dbm_hz, bandwidth_hz, ue_noise_figure_db);
}

inline double ScenarioConfig::noise_power_repeater() const
{
    return repeater_noise_power_watt.value_or(noise_power_bs());
}

inline double ScenarioConfig::zf_regularization() const
{
    if (zf_regularizer)
        return *zf_regularizer;
    return std::max(n_users, 1) * noise_power_ue() / tx_power_watt;
}

inline Complex ScenarioConfig::repeater_gain() const
{
    if (!repeater_gain_db)
        return {0.0, 0.0};
    return std::polar(std::sqrt(db_to_linear(*repeater_gain_db)), repeater_phase_rad);
}

inline std::vector<double> ScenarioConfig::user_fractions() const
{
    if (!user_power_fractions.empty())
        return user_power_fractions;
    if (n_users == 0)
        return {};
    return std::vector<double>(static_cast<std::size_t>(n_users), (1.0 - sensing_power_fraction) / n_users);
}

inline void ScenarioConfig::validate() const
{
    auto require = [](bool ok, const std::string &what) {
        if (!ok)
            throw ConfigError(what);
    };
    require(n_tx_antennas >= 1, "n_tx_antennas must be >= 1");
    require(n_rx_antennas >= 1, "n_rx_antennas must be >= 1");
    require(n_users >= 0, "n_users must be >= 0");
    require(slot_length >= 1, "slot_length must be >= 1");
    require(tx_power_watt > 0.0, "tx_power_watt must be positive");
    require(sensing_power_fraction >= 0.0, "sensing_power_fraction must be nonnegative");
    require(user_power_fractions.empty() || static_cast<int>(user_power_fractions.size()) == n_users,
            "user_power_fractions must list one value per user");
    const auto fractions = user_fractions();
    require(std::all_of(fractions.begin(), fractions.end(), [](double f) { return f >= 0.0; }),
            "power fractions must be nonnegative");
    const double total = std::accumulate(fractions.begin(), fractions.end(), sensing_power_fraction);
    require(total <= 1.0 + 1e-12, "power fractions sum exceeds 1 (power budget)");
    require(rcs_variance > 0.0, "rcs_variance must be positive");
    require(detector_rcs_scale > 0.0, "detector_rcs_scale must be positive");
    require(carrier_ghz > 0.0, "carrier_ghz must be positive");
    require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
    require(!repeater_noise_power_watt || *repeater_noise_power_watt > 0.0,
            "repeater_noise_power_watt must be positive");
    require(residual_interbs_power >= 0.0, "residual_interbs_power must be nonnegative");
    require(clutter_suppression >= 0.0, "clutter_suppression must be nonnegative");
    require(!zf_regularizer || *zf_regularizer > 0.0, "zf_regularizer must be positive");
    require(pfa_target > 0.0 && pfa_target < 1.0, "pfa_target must lie in (0, 1)");
    require(mc_trials >= 1, "mc_trials must be >= 1");
    require(calibration_trials >= 1, "calibration_trials must be >= 1");
    require(service_radius_m >= 0.0, "service_radius_m must be nonnegative");
    require(!(service_radius_m == 0.0 && n_users > 1), "service_radius_m is zero but more than one user is requested");
    require(repeater_disc_radius_m >= 0.0, "repeater_disc_radius_m must be nonnegative");
    require(std::all_of(rcs_grid.begin(), rcs_grid.end(), [](double s) { return s > 0.0; }),
            "rcs_grid values must be positive");
}

// ---------------------------------------------------------------------------
// Config file: one "key = value" per line, '#' starts a comment. Lists are
// comma separated; positions are "x,y,z" in meters; "off" disables an
// optional quantity (repeater gain) or selects the default ("auto").

namespace detail
{

inline std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

inline double parse_double(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    }
    catch (const std::exception &)
    {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long long parse_integer(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return i;
    }
    catch (const std::exception &)
    {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string &key, const std::string &v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

inline bool is_off(const std::string &v) { return v == "off" || v == "none" || v == "auto"; }

inline Position parse_position(const std::string &key, const std::string &v)
{
    const auto parts = split_list(v);
    if (parts.size() != 3)
        throw ConfigError("config key '" + key + "': expected x,y,z");
    return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

inline std::vector<double> parse_doubles(const std::string &key, const std::string &v)
{
    std::vector<double> out;
    for (const auto &p : split_list(v))
        out.push_back(parse_double(key, p));
    return out;
}

} // namespace detail

inline void apply_config_value(ScenarioConfig &c, const std::string &key, const std::string &value)
{
    using namespace detail;
    const std::string &v = value;
    auto as_int = [&] { return static_cast<int>(parse_integer(key, v)); };

    if (key == "n_tx_antennas") c.n_tx_antennas = as_int();
    else if (key == "n_rx_antennas") c.n_rx_antennas = as_int();
    else if (key == "n_users") c.n_users = as_int();
    else if (key == "slot_length") c.slot_length = as_int();
    else if (key == "tx_power_watt") c.tx_power_watt = parse_double(key, v);
    else if (key == "sensing_power_fraction") c.sensing_power_fraction = parse_double(key, v);
    else if (key == "user_power_fractions") c.user_power_fractions = is_off(v) ? std::vector<double>{} : parse_doubles(key, v);
    else if (key == "repeater_gain_db") c.repeater_gain_db = is_off(v) ? std::nullopt : std::optional<double>(parse_double(key, v));
    else if (key == "repeater_phase_rad") c.repeater_phase_rad = parse_double(key, v);
    else if (key == "rcs_variance") c.rcs_variance = parse_double(key, v);
    else if (key == "detector_rcs_scale") c.detector_rcs_scale = parse_double(key, v);
    else if (key == "carrier_ghz") c.carrier_ghz = parse_double(key, v);
    else if (key == "bandwidth_hz") c.bandwidth_hz = parse_double(key, v);
    else if (key == "noise_density_dbm_hz") c.noise_density_dbm_hz = parse_double(key, v);
    else if (key == "noise_figure_db") c.noise_figure_db = parse_double(key, v);
    else if (key == "ue_noise_figure_db") c.ue_noise_figure_db = parse_double(key, v);
    else if (key == "repeater_noise_power_watt") c.repeater_noise_power_watt = is_off(v) ? std::nullopt : std::optional<double>(parse_double(key, v));
    else if (key == "residual_interbs_power") c.residual_interbs_power = parse_double(key, v);
    else if (key == "clutter_suppression") c.clutter_suppression = parse_double(key, v);
    else if (key == "zf_regularizer") c.zf_regularizer = is_off(v) ? std::nullopt : std::optional<double>(parse_double(key, v));
    else if (key == "pfa_target") c.pfa_target = parse_double(key, v);
    else if (key == "mc_trials") c.mc_trials = as_int();
    else if (key == "calibration_trials") c.calibration_trials = as_int();
    else if (key == "master_seed") c.master_seed = static_cast<std::uint64_t>(parse_integer(key, v));
    else if (key == "precoder_mode")
    {
        if (v == "target_centric") c.precoder_mode = PrecoderMode::target_centric;
        else if (v == "comm_centric") c.precoder_mode = PrecoderMode::comm_centric;
        else if (v == "repeater_null") c.precoder_mode = PrecoderMode::repeater_null;
        else throw ConfigError("config key 'precoder_mode': unknown mode '" + v + "'");
    }
    else if (key == "conjugate_convention") c.conjugate_convention = parse_bool(key, v);
    else if (key == "precoder_repeater_aware") c.precoder_repeater_aware = parse_bool(key, v);
    else if (key == "cancel_repeater_leakage") c.cancel_repeater_leakage = parse_bool(key, v);
    else if (key == "sinr_literal_sum") c.sinr_literal_sum = parse_bool(key, v);
    else if (key == "symbol_alphabet")
    {
        if (v == "gaussian") c.symbol_alphabet = SymbolAlphabet::gaussian;
        else if (v == "qpsk") c.symbol_alphabet = SymbolAlphabet::qpsk;
        else throw ConfigError("config key 'symbol_alphabet': unknown alphabet '" + v + "'");
    }
    else if (key == "tx_bs_position") c.tx_bs_position = parse_position(key, v);
    else if (key == "rx_bs_position") c.rx_bs_position = parse_position(key, v);
    else if (key == "hotspot_center") c.hotspot_center = parse_position(key, v);
    else if (key == "repeater_position") c.repeater_position = is_off(v) ? std::nullopt : std::optional<Position>(parse_position(key, v));
    else if (key == "repeater_height_m") c.repeater_height_m = parse_double(key, v);
    else if (key == "user_height_m") c.user_height_m = parse_double(key, v);
    else if (key == "service_radius_m") c.service_radius_m = parse_double(key, v);
    else if (key == "repeater_disc_radius_m") c.repeater_disc_radius_m = parse_double(key, v);
    else if (key == "tx_array_azimuth_deg") c.tx_array_azimuth_deg = parse_double(key, v);
    else if (key == "rx_array_azimuth_deg") c.rx_array_azimuth_deg = parse_double(key, v);
    else if (key == "rcs_grid") c.rcs_grid = parse_doubles(key, v);
    else if (key == "pod_repeater_gains_db")
    {
        c.pod_repeater_gains_db.clear();
        for (const auto &p : split_list(v))
            c.pod_repeater_gains_db.push_back(is_off(p) ? std::nullopt : std::optional<double>(parse_double(key, p)));
    }
    else throw ConfigError("unknown config key '" + key + "'");
}

inline ScenarioConfig parse_config(std::istream &in, ScenarioConfig base = {})
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        apply_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    base.validate();
    return base;
}

inline ScenarioConfig parse_config_string(const std::string &text, ScenarioConfig base = {})
{
    std::istringstream in(text);
    return parse_config(in, std::move(base));
}

inline ScenarioConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

// ---------------------------------------------------------------------------

struct Geometry
{
    Position tx_bs;
    Position rx_bs;
    Position repeater;
    Position target; // hotspot center
    std::vector<Position> users;
};

namespace detail
{

inline Eigen::Vector2d uniform_in_disc(RandomStream &rng, double radius)
{
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
}

} // namespace detail

/// Places the repeater uniformly in a disc around the hotspot (unless pinned in
/// the config) and the users uniformly in the service disc around the transmit
/// BS. Anchors come from the config verbatim.
inline Geometry drop_entities(const ScenarioConfig &config, RandomStream &rng)
{
    if (config.service_radius_m <= 0.0 && config.n_users > 1)
        throw ConfigError("cannot drop more than one user in a zero-radius service disc");

    Geometry g;
    g.tx_bs = config.tx_bs_position;
    g.rx_bs = config.rx_bs_position;
    g.target = config.hotspot_center;
    if (config.repeater_position)
    {
        g.repeater = *config.repeater_position;
    }
    else
    {
        const auto off = detail::uniform_in_disc(rng, config.repeater_disc_radius_m);
        g.repeater = {config.hotspot_center.x() + off.x(), config.hotspot_center.y() + off.y(),
                      config.repeater_height_m};
    }
    g.users.reserve(static_cast<std::size_t>(config.n_users));
    for (int n = 0; n < config.n_users; ++n)
    {
        const auto off = detail::uniform_in_disc(rng, config.service_radius_m);
        g.users.push_back({config.tx_bs_position.x() + off.x(), config.tx_bs_position.y() + off.y(),
                           config.user_height_m});
    }

    std::vector<const Position *> all{&g.tx_bs, &g.rx_bs, &g.repeater, &g.target};
    for (const auto &u : g.users)
        all.push_back(&u);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if ((*all[i] - *all[j]).norm() <= 0.0)
                throw ConfigError("geometry has two coincident entities");
    return g;
}

} // namespace risac

#endif
