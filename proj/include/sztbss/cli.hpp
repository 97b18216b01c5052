#pragma once

// szt-bss command line. Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sztbss/io.hpp"
#include "sztbss/mixing.hpp"
#include "sztbss/pipeline.hpp"
#include "sztbss/signal.hpp"
#include "sztbss/source_gen.hpp"
#include "sztbss/szt.hpp"

namespace sztbss::cli {

namespace detail {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class T>
T pick(const std::vector<T>& v, std::size_t i, T fallback) {
    if (v.empty()) return fallback;
    return i < v.size() ? v[i] : v.back();
}

inline std::string format_scores(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", v[i]);
        s += buf;
    }
    return s;
}

inline nlohmann::json scores_to_json(const CorrelationReport& r, std::size_t burn_in) {
    return {{"burn_in", burn_in},
            {"corr_matrix", matrix_to_json(r.corr_matrix)},
            {"assignment", r.assignment},
            {"matched_abs_corr", r.matched_abs_corr}};
}

} // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Blind separation of convolutive mixtures with the sliding Z transform", "szt-bss"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write seeded source waveforms (one channel per --kind)");
    std::vector<std::string> g_kind;
    std::size_t g_n = 0;
    std::uint64_t g_seed = 0;
    std::vector<std::size_t> g_sps, g_pulses;
    std::vector<double> g_carrier, g_width, g_variance;
    std::vector<int> g_order;
    std::string g_out;
    gen->add_option("--kind", g_kind, "qpsk | gpulse | wgn, one per channel")
        ->required()
        ->check(CLI::IsMember({"qpsk", "gpulse", "wgn"}));
    gen->add_option("--n", g_n, "Sample count")->required();
    gen->add_option("--seed", g_seed, "Seed")->required();
    gen->add_option("--sps", g_sps, "QPSK samples per symbol");
    gen->add_option("--carrier", g_carrier, "QPSK carrier, cycles/sample");
    gen->add_option("--order", g_order, "Gauss pulse order (1 or 2)");
    gen->add_option("--pulses", g_pulses, "Gauss pulse count");
    gen->add_option("--width", g_width, "Gauss pulse width, samples");
    gen->add_option("--variance", g_variance, "WGN variance");
    gen->add_option("--out", g_out, "Output CSV")->required();

    // mix
    auto* mx = app.add_subcommand("mix", "Convolutively mix sources with a random (0,1) mixer");
    std::string m_sources, m_out, m_mixer_out;
    std::size_t m_paths = 2;
    std::uint64_t m_seed = 0;
    std::optional<double> m_snr;
    mx->add_option("--sources", m_sources, "Sources CSV")->required();
    mx->add_option("--paths", m_paths, "Path count L")->required();
    mx->add_option("--seed", m_seed, "Seed")->required();
    mx->add_option("--out", m_out, "Mixtures CSV")->required();
    mx->add_option("--mixer-out", m_mixer_out, "Mixer JSON");
    mx->add_option("--snr-db", m_snr, "Channel AWGN SNR (dB)");

    // separate
    auto* sep = app.add_subcommand("separate", "Separate mixtures via the sliding Z transform + JADE");
    std::string s_mix, s_out;
    std::size_t s_win = 8;
    std::optional<double> s_z;
    std::uint64_t s_seed = 0;
    bool s_any_win = false;
    sep->add_option("--mixtures", s_mix, "Mixtures CSV")->required();
    sep->add_option("--win", s_win, "Window length (power of two)")->required();
    sep->add_option("--z", s_z, "Transform point in (0,1); drawn from the seed if omitted");
    sep->add_option("--seed", s_seed, "Seed")->required();
    sep->add_option("--out", s_out, "Output directory")->required();
    sep->add_flag("--any-win", s_any_win, "Allow window lengths that are not powers of two");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score recovered signals against sources");
    std::string e_rec, e_src, e_out;
    std::size_t e_burn = 0;
    ev->add_option("--recovered", e_rec, "Recovered CSV")->required();
    ev->add_option("--sources", e_src, "Sources CSV")->required();
    ev->add_option("--burn-in", e_burn, "Samples excluded from scoring")->required();
    ev->add_option("--out", e_out, "Report JSON")->required();

    // experiment
    auto* ex = app.add_subcommand("experiment", "Run one of the four experiment presets");
    int x_id = 0;
    std::uint64_t x_seed = 0;
    std::string x_out, x_wav1, x_wav2;
    std::optional<std::size_t> x_n, x_win, x_paths;
    std::optional<double> x_snr, x_z, x_wgn_snr;
    bool x_synthetic = false, x_any_win = false;
    ex->add_option("--id", x_id, "Experiment 1..4")->required()->check(CLI::Range(1, 4));
    ex->add_option("--seed", x_seed, "Seed")->required();
    ex->add_option("--out", x_out, "Output directory")->required();
    ex->add_option("--n", x_n, "Sample count");
    ex->add_option("--win", x_win, "Window length");
    ex->add_option("--paths", x_paths, "Path count L (default 2)");
    ex->add_option("--snr-db", x_snr, "Channel AWGN SNR (dB) on the mixtures");
    ex->add_option("--wgn-snr-db", x_wgn_snr, "Experiment 4: QPSK-to-WGN source power ratio (dB)");
    ex->add_option("--z", x_z, "Transform point in (0,1)");
    ex->add_option("--wav1", x_wav1, "Experiment 1: first source WAV");
    ex->add_option("--wav2", x_wav2, "Experiment 1: second source WAV");
    ex->add_flag("--synthetic-audio", x_synthetic, "Experiment 1: use synthetic audio-like sources");
    ex->add_flag("--any-win", x_any_win, "Allow window lengths that are not powers of two");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "szt-bss: " << e.what() << "\n" << "Run with --help for usage.\n";
        return 1;
    }

    try {
        if (gen->parsed()) {
            std::vector<Signal> ch;
            for (std::size_t i = 0; i < g_kind.size(); ++i) {
                const Seed seed = derive_seed(Seed{g_seed}, stream::source + i);
                if (g_kind[i] == "qpsk")
                    ch.push_back(gen_qpsk(g_n, detail::pick<std::size_t>(g_sps, i, 8),
                                          detail::pick(g_carrier, i, 0.1 + 0.05 * static_cast<double>(i)), seed));
                else if (g_kind[i] == "gpulse")
                    ch.push_back(gen_gauss_pulse_train(g_n, detail::pick(g_order, i, static_cast<int>(i % 2) + 1),
                                                       detail::pick<std::size_t>(g_pulses, i, 10),
                                                       detail::pick(g_width, i, 20.0), seed));
                else
                    ch.push_back(gen_wgn(g_n, detail::pick(g_variance, i, 1.0), seed));
            }
            write_csv(MultiSignal(std::move(ch)), g_out);
            out << "wrote " << g_out << "\n";
        } else if (mx->parsed()) {
            const MultiSignal src = read_csv(m_sources);
            const ConvolutiveMixer mixer =
                random_mixer(src.channel_count(), m_paths, derive_seed(Seed{m_seed}, stream::mixer));
            MultiSignal x = mix(mixer, src);
            if (m_snr) x = add_channel_noise(x, *m_snr, Seed{m_seed});
            write_csv(x, m_out);
            if (!m_mixer_out.empty()) write_json(mixer_to_json(mixer), m_mixer_out);
            out << "wrote " << m_out << "\n";
        } else if (sep->parsed()) {
            const MultiSignal x = read_csv(s_mix);
            const double z = s_z ? *s_z : sample_z(s_win, derive_seed(Seed{s_seed}, stream::z));
            const SztParams p{s_win, z, 1, s_any_win};
            const SeparationResult r = szt_bss_separate(x, p);
            const std::filesystem::path dir = s_out;
            std::filesystem::create_directories(dir);
            write_csv(r.recovered, dir / "recovered.csv");
            write_json({{"szt", {{"win", s_win}, {"step", 1}, {"z", z}, {"z_drawn", !s_z.has_value()}}},
                        {"seed", s_seed},
                        {"burn_in", r.burn_in},
                        {"unmixing", matrix_to_json(r.jade.unmixing)},
                        {"jade",
                         {{"sweeps", r.jade.sweeps},
                          {"converged", r.jade.converged},
                          {"criterion", r.jade.criterion},
                          {"relative_criterion", r.jade.relative_criterion}}}},
                       dir / "separation.json");
            out << "z=" << z << " burn_in=" << r.burn_in << " wrote " << (dir / "recovered.csv").string() << "\n";
        } else if (ev->parsed()) {
            const CorrelationReport r = match_and_score(read_csv(e_rec), read_csv(e_src), e_burn);
            write_json(detail::scores_to_json(r, e_burn), e_out);
            out << "matched_abs_corr " << detail::format_scores(r.matched_abs_corr) << "\n";
        } else if (ex->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::preset(x_id);
            if (x_id == 1) {
                std::vector<std::string> missing;
                if (x_wav1.empty()) missing.emplace_back("--wav1");
                if (x_wav2.empty()) missing.emplace_back("--wav2");
                if (!missing.empty() && !x_synthetic) {
                    std::string m = missing.front();
                    if (missing.size() > 1) m += " and " + missing.back();
                    throw detail::UsageError("experiment 1 needs source recordings: missing " + m +
                                             " (or pass --synthetic-audio)");
                }
                if (missing.empty()) {
                    const Signal a = load_wav(x_wav1);
                    const Signal b = load_wav(x_wav2);
                    cfg.sources[0] = SourceSpec{.kind = SourceKind::wav, .wav = x_wav1};
                    cfg.sources[1] = SourceSpec{.kind = SourceKind::wav, .wav = x_wav2};
                    if (!x_n) cfg.n_samples = std::min({cfg.n_samples, a.size(), b.size()});
                }
            } else if (!x_wav1.empty() || !x_wav2.empty() || x_synthetic) {
                throw detail::UsageError("--wav1/--wav2/--synthetic-audio only apply to experiment 1");
            }
            if (x_wgn_snr) {
                if (x_id != 4) throw detail::UsageError("--wgn-snr-db only applies to experiment 4");
                cfg.sources[1].power_vs_first_db = *x_wgn_snr;
            }
            if (x_n) cfg.n_samples = *x_n;
            if (x_win) cfg.win = *x_win;
            if (x_paths) cfg.paths = *x_paths;
            if (x_snr) cfg.snr_db = *x_snr;
            cfg.z = x_z;
            cfg.allow_any_win = x_any_win;
            cfg.seed = x_seed;
            cfg.out_dir = x_out;
            const RunReport rep = run_experiment(cfg);
            out << "experiment " << x_id << " seed " << x_seed << " z=" << rep.z << " burn_in=" << rep.burn_in
                << " matched_abs_corr " << detail::format_scores(rep.scores.matched_abs_corr) << "\n";
        }
    } catch (const detail::UsageError& e) {
        err << "szt-bss: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "szt-bss: error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace sztbss::cli
