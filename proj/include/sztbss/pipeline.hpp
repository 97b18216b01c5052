#pragma once

// End-to-end separation of convolutive mixtures:
//   comb_forward per mixture -> JADE on the comb signals -> comb_inverse
// per separated channel with zero initial conditions. Plus the experiment
// harness that generates sources, mixes, separates, scores and reports.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sztbss/error.hpp"
#include "sztbss/io.hpp"
#include "sztbss/jade.hpp"
#include "sztbss/mixing.hpp"
#include "sztbss/rng.hpp"
#include "sztbss/signal.hpp"
#include "sztbss/source_gen.hpp"
#include "sztbss/szt.hpp"

namespace sztbss {

/// Residual transient tolerance used to size the scoring burn-in.
inline constexpr double kBurnInTolerance = 1e-6;

struct SeparationResult {
    MultiSignal recovered;
    SztParams params;
    std::size_t burn_in = 0;
    JadeModel jade;
};

inline SeparationResult szt_bss_separate(const MultiSignal& mixtures, const SztParams& p, const JadeOptions& opt = {}) {
    p.validate();
    const std::size_t k = mixtures.channel_count();
    const std::size_t n = mixtures.length();
    detail::require(k >= 2, "szt_bss_separate: need at least 2 mixture channels");
    detail::require(n > 2 * p.win, "szt_bss_separate: mixture length " + std::to_string(n) +
                                       " must exceed twice the window length " + std::to_string(p.win));

    const std::size_t m = n - p.win;
    DataMatrix comb(k, m);
    for (std::size_t i = 0; i < k; ++i) {
        const Signal c = comb_forward(mixtures[i], p);
        std::copy(c.begin(), c.end(), comb.row(i).begin());
    }

    SeparationResult out;
    out.params = p;
    out.jade = jade_separate(comb, opt);

    std::vector<Signal> rec;
    rec.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto row = out.jade.separated.row(i);
        rec.push_back(comb_inverse(Signal(std::vector<double>(row.begin(), row.end()), mixtures[0].sample_rate_hz()), p));
    }
    out.recovered = MultiSignal(std::move(rec));
    out.burn_in = burn_in_length(p, kBurnInTolerance, n);
    return out;
}

enum class SourceKind { qpsk, gpulse, wgn, audio, wav };

inline std::string to_string(SourceKind k) {
    switch (k) {
    case SourceKind::qpsk: return "qpsk";
    case SourceKind::gpulse: return "gpulse";
    case SourceKind::wgn: return "wgn";
    case SourceKind::audio: return "audio";
    case SourceKind::wav: return "wav";
    }
    return "?";
}

/// Parameters for one source channel. Fields not used by `kind` are ignored.
struct SourceSpec {
    SourceKind kind = SourceKind::qpsk;
    std::size_t sps = 8;
    double carrier = 0.1;
    int order = 1;
    std::size_t pulses = 10;
    double width = 20.0;
    double variance = 1.0;
    double centre = 0.02;
    double bandwidth = 0.01;
    std::size_t burst = 4410;
    std::filesystem::path wav;
    /// Additive noise folded into the source itself (the scored reference
    /// includes it), in dB relative to the clean source power.
    std::optional<double> source_snr_db;
    /// Rescale this source so that power(first source) / power(this) equals
    /// the given dB value. Experiment 4 uses it to bury QPSK under the WGN source.
    std::optional<double> power_vs_first_db;
};

struct ExperimentConfig {
    int id = 0;                 // 1..4 for presets, 0 for custom
    std::size_t n_samples = 20000;
    std::size_t win = 8;
    bool allow_any_win = false;
    std::size_t paths = 2;
    std::vector<SourceSpec> sources;
    /// AWGN applied to every mixture channel (the channel noise).
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
    std::optional<double> z;
    std::optional<std::filesystem::path> out_dir;
    JadeOptions jade;

    std::size_t channels() const { return sources.size(); }

    void validate() const {
        detail::require(sources.size() >= 2, "ExperimentConfig: need at least 2 sources");
        detail::require(paths >= 1, "ExperimentConfig: path count must be >= 1");
        detail::require(n_samples > 2 * win, "ExperimentConfig: n_samples must exceed 2 * win");
        SztParams p{win, z.value_or(0.5 * (z_lower_bound(win) + kZMax)), 1, allow_any_win};
        p.validate();
        for (const auto& s : sources)
            if (s.kind == SourceKind::wav)
                detail::require(!s.wav.empty(), "ExperimentConfig: WAV source without a path");
    }

    /// Defaults for the four experiment presets.
    static ExperimentConfig preset(int id) {
        ExperimentConfig c;
        c.id = id;
        switch (id) {
        case 1: {
            // Recorded sounds; defaults to synthetic audio-like sources until
            // WAV paths are supplied.
            c.n_samples = 200000;
            c.win = 8;
            SourceSpec a{.kind = SourceKind::audio};
            a.centre = 0.01;
            a.bandwidth = 0.004;
            SourceSpec b{.kind = SourceKind::audio};
            b.centre = 0.04;
            b.bandwidth = 0.01;
            b.burst = 2205;
            c.sources = {a, b};
            break;
        }
        case 2: {
            c.n_samples = 3000;
            c.win = 8;
            SourceSpec a{.kind = SourceKind::gpulse};
            a.order = 1;
            SourceSpec b{.kind = SourceKind::gpulse};
            b.order = 2;
            c.sources = {a, b};
            break;
        }
        case 3: {
            c.n_samples = 20000;
            c.win = 64;
            SourceSpec a{.kind = SourceKind::qpsk};
            a.carrier = 0.1;
            SourceSpec b{.kind = SourceKind::qpsk};
            b.carrier = 0.15;
            c.sources = {a, b};
            c.snr_db = 20.0;
            break;
        }
        case 4: {
            c.n_samples = 20000;
            c.win = 512;
            SourceSpec a{.kind = SourceKind::qpsk};
            a.carrier = 0.1;
            SourceSpec b{.kind = SourceKind::wgn};
            b.power_vs_first_db = -5.0;
            c.sources = {a, b};
            break;
        }
        default:
            throw Error("ExperimentConfig::preset: unknown experiment id " + std::to_string(id));
        }
        return c;
    }
};

// Sub-seed streams derived from the run seed.
namespace stream {
inline constexpr std::uint64_t source = 100;      // + channel index
inline constexpr std::uint64_t source_noise = 200; // + channel index
inline constexpr std::uint64_t mixer = 1;
inline constexpr std::uint64_t z = 2;
inline constexpr std::uint64_t channel_noise = 300; // + channel index
} // namespace stream

inline Signal generate_source(const SourceSpec& s, std::size_t n, Seed seed) {
    Signal out;
    switch (s.kind) {
    case SourceKind::qpsk: out = gen_qpsk(n, s.sps, s.carrier, seed); break;
    case SourceKind::gpulse: out = gen_gauss_pulse_train(n, s.order, s.pulses, s.width, seed); break;
    case SourceKind::wgn: out = gen_wgn(n, s.variance, seed); break;
    case SourceKind::audio: out = gen_audio_like(n, s.centre, s.bandwidth, s.burst, seed); break;
    case SourceKind::wav: {
        const Signal w = load_wav(s.wav);
        detail::require(w.size() >= n, "WAV file '" + s.wav.string() + "' has " + std::to_string(w.size()) +
                                           " samples, " + std::to_string(n) + " requested");
        out = Signal(std::vector<double>(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n)), w.sample_rate_hz());
        break;
    }
    }
    return out;
}

inline MultiSignal generate_sources(const ExperimentConfig& cfg) {
    std::vector<Signal> ch;
    for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
        const auto& spec = cfg.sources[i];
        Signal s = generate_source(spec, cfg.n_samples, derive_seed(Seed{cfg.seed}, stream::source + i));
        if (spec.source_snr_db)
            s = awgn(s, *spec.source_snr_db, derive_seed(Seed{cfg.seed}, stream::source_noise + i));
        if (spec.power_vs_first_db && i > 0) {
            const double p = power(s.samples());
            detail::require(p > 0.0, "generate_sources: cannot rescale a zero-power source");
            const double target = power(ch.front().samples()) / std::pow(10.0, *spec.power_vs_first_db / 10.0);
            const double g = std::sqrt(target / p);
            std::vector<double> v(s.begin(), s.end());
            for (auto& x : v) x *= g;
            s = Signal(std::move(v), s.sample_rate_hz());
        }
        ch.push_back(std::move(s));
    }
    return MultiSignal(std::move(ch));
}

/// Adds independent AWGN to every channel at the given SNR.
inline MultiSignal add_channel_noise(const MultiSignal& x, double snr_db, Seed seed) {
    std::vector<Signal> ch;
    for (std::size_t i = 0; i < x.channel_count(); ++i)
        ch.push_back(awgn(x[i], snr_db, derive_seed(seed, stream::channel_noise + i)));
    return MultiSignal(std::move(ch));
}

struct RunReport {
    ExperimentConfig config;
    double z = 0.0;
    bool z_drawn = true;
    std::size_t burn_in = 0;
    ConvolutiveMixer mixer{std::vector<Matrix>{Matrix::identity(1)}};
    Matrix unmixing;
    std::size_t jade_sweeps = 0;
    bool jade_converged = false;
    double jade_criterion = 0.0;
    double jade_relative_criterion = 0.0;
    CorrelationReport scores;
    MultiSignal sources;
    MultiSignal mixtures;
    MultiSignal recovered;
    std::vector<std::filesystem::path> files;
};

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    detail::require(j.is_array() && !j.empty(), "matrix JSON must be a non-empty array of rows");
    Matrix m(j.size(), j.front().size());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        detail::require(j[i].size() == m.cols(), "matrix JSON rows differ in length");
        for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

inline nlohmann::json mixer_to_json(const ConvolutiveMixer& m) {
    nlohmann::json taps = nlohmann::json::array();
    for (const auto& a : m.taps()) taps.push_back(matrix_to_json(a));
    return {{"K", m.channels()}, {"L", m.paths()}, {"taps", taps}};
}

inline ConvolutiveMixer mixer_from_json(const nlohmann::json& j) {
    std::vector<Matrix> taps;
    for (const auto& t : j.at("taps")) taps.push_back(matrix_from_json(t));
    ConvolutiveMixer m(std::move(taps));
    detail::require(j.at("K").get<std::size_t>() == m.channels() && j.at("L").get<std::size_t>() == m.paths(),
                    "mixer JSON: K/L disagree with the taps");
    return m;
}

inline nlohmann::json source_spec_to_json(const SourceSpec& s) {
    nlohmann::json j{{"kind", to_string(s.kind)}};
    switch (s.kind) {
    case SourceKind::qpsk: j["sps"] = s.sps; j["carrier"] = s.carrier; break;
    case SourceKind::gpulse: j["order"] = s.order; j["pulses"] = s.pulses; j["width"] = s.width; break;
    case SourceKind::wgn: j["variance"] = s.variance; break;
    case SourceKind::audio: j["centre"] = s.centre; j["bandwidth"] = s.bandwidth; j["burst"] = s.burst; break;
    case SourceKind::wav: j["path"] = s.wav.string(); break;
    }
    if (s.source_snr_db) j["source_snr_db"] = *s.source_snr_db;
    if (s.power_vs_first_db) j["power_vs_first_db"] = *s.power_vs_first_db;
    return j;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json src = nlohmann::json::array();
    for (const auto& s : c.sources) src.push_back(source_spec_to_json(s));
    nlohmann::json j{{"experiment_id", c.id},  {"n_samples", c.n_samples}, {"win", c.win},
                     {"allow_any_win", c.allow_any_win}, {"paths", c.paths}, {"channels", c.channels()},
                     {"seed", c.seed},        {"sources", src},
                     {"jade", {{"threshold", c.jade.threshold}, {"max_sweeps", c.jade.max_sweeps}}}};
    j["snr_db"] = c.snr_db ? nlohmann::json(*c.snr_db) : nlohmann::json(nullptr);
    j["z_override"] = c.z ? nlohmann::json(*c.z) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : r.files) files.push_back(f.filename().string());
    return {
        {"config", config_to_json(r.config)},
        {"rng", "xoshiro256** seeded by splitmix64; sub-streams via derive_seed"},
        {"szt", {{"win", r.config.win}, {"step", 1}, {"z", r.z}, {"z_drawn", r.z_drawn}}},
        {"scoring",
         {{"burn_in", r.burn_in},
          {"burn_in_tolerance", kBurnInTolerance},
          {"policy", "|C| over samples n >= burn_in, best permutation"}}},
        {"mixer", mixer_to_json(r.mixer)},
        {"unmixing", matrix_to_json(r.unmixing)},
        {"jade",
         {{"sweeps", r.jade_sweeps},
          {"converged", r.jade_converged},
          {"criterion", r.jade_criterion},
          {"relative_criterion", r.jade_relative_criterion}}},
        {"corr_matrix", matrix_to_json(r.scores.corr_matrix)},
        {"assignment", r.scores.assignment},
        {"matched_abs_corr", r.scores.matched_abs_corr},
        {"files", files},
    };
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << j.dump(2) << '\n';
    if (!f) throw Error("write failed for '" + path.string() + "'");
}

/// Generates sources, draws the mixer and z, mixes, separates and scores.
/// When cfg.out_dir is set, writes sources.csv, mixtures.csv, recovered.csv
/// and report.json there.
inline RunReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Seed seed{cfg.seed};

    RunReport rep;
    rep.config = cfg;
    rep.sources = generate_sources(cfg);
    rep.mixer = random_mixer(cfg.channels(), cfg.paths, derive_seed(seed, stream::mixer));
    rep.mixtures = mix(rep.mixer, rep.sources);
    if (cfg.snr_db) rep.mixtures = add_channel_noise(rep.mixtures, *cfg.snr_db, seed);

    rep.z_drawn = !cfg.z.has_value();
    rep.z = cfg.z ? *cfg.z : sample_z(cfg.win, derive_seed(seed, stream::z));
    const SztParams p{cfg.win, rep.z, 1, cfg.allow_any_win};

    SeparationResult sep = szt_bss_separate(rep.mixtures, p, cfg.jade);
    rep.burn_in = sep.burn_in;
    rep.unmixing = sep.jade.unmixing;
    rep.jade_sweeps = sep.jade.sweeps;
    rep.jade_converged = sep.jade.converged;
    rep.jade_criterion = sep.jade.criterion;
    rep.jade_relative_criterion = sep.jade.relative_criterion;
    rep.recovered = std::move(sep.recovered);
    rep.scores = match_and_score(rep.recovered, rep.sources, rep.burn_in);

    if (cfg.out_dir) {
        std::filesystem::create_directories(*cfg.out_dir);
        const auto& dir = *cfg.out_dir;
        rep.files = {dir / "sources.csv", dir / "mixtures.csv", dir / "recovered.csv", dir / "report.json"};
        write_csv(rep.sources, rep.files[0]);
        write_csv(rep.mixtures, rep.files[1]);
        write_csv(rep.recovered, rep.files[2]);
        write_json(report_to_json(rep), rep.files[3]);
    }
    return rep;
}

} // namespace sztbss
