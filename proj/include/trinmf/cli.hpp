#pragma once

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trinmf/archive.hpp"
#include "trinmf/image_io.hpp"
#include "trinmf/jpeg.hpp"
#include "trinmf/matrix.hpp"
#include "trinmf/metrics.hpp"
#include "trinmf/multilevel.hpp"
#include "trinmf/quantize.hpp"
#include "trinmf/rank_bounds.hpp"
#include "trinmf/ssn.hpp"
#include "trinmf/svd.hpp"
#include "trinmf/trifactor.hpp"

namespace trinmf::cli {

// Exit code contract: 0 success, 2 I/O failure, 3 solver failure,
// 4 parameter/regime violation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitParams = 4;

inline constexpr const char* kMemoryRule =
    "memory units = stored nonzero quantized values + one unit per stored index";

namespace detail {

struct SolverOptions {
    SsnConfig cfg;
    void attach(CLI::App* cmd) {
        cmd->add_option("--alpha", cfg.alpha, "l1 weight on the left factor");
        cmd->add_option("--nu", cfg.nu, "l1 weight on the right factor");
        cmd->add_option("--gamma", cfg.gamma, "orthogonality deviation weight");
        cmd->add_option("--c1", cfg.c1, "nonnegativity complementarity constant");
        cmd->add_option("--c2", cfg.c2, "l1 complementarity constant");
        cmd->add_option("--max-iter", cfg.max_iter, "iteration cap");
        cmd->add_option("--obj-tol", cfg.obj_tol, "relative objective tolerance");
        cmd->add_option("--seed", cfg.seed, "RNG seed for the factor initialization");
        cmd->add_flag("!--no-simplified-duals", cfg.nonneg_duals_simplified,
                      "run the full dual iteration instead of the nonneg simplification");
        cmd->add_flag("!--no-normalize-rows", cfg.normalize_P_rows,
                      "skip row normalization of the right factor");
        cmd->add_flag("!--allow-negative-left", cfg.enforce_A_nonneg,
                      "drop the nonnegativity constraint on the left factor");
    }
};

inline nlohmann::json level_json(const LevelResult& lr) {
    return nlohmann::json{{"s", lr.s},
                          {"p", lr.p},
                          {"p_tilde", lr.p_tilde},
                          {"memory_ratio", lr.memory_ratio},
                          {"rel_error", lr.rel_error},
                          {"failed", lr.failed}};
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

} // namespace detail

// --- factor: single-level tri-factorization -------------------------------

inline int cmd_factor(const std::string& input, std::size_t p, std::size_t p_tilde_override,
                      double k2, double quant_step, const SsnConfig& cfg,
                      const std::string& out_prefix) {
    const Matrix y = read_matrix_auto(input);
    require_nonneg(y, "factor input");
    SsnDiagnostics d1, d2;
    TriFactor tf = two_stage(y, p, cfg, &d1, &d2);
    const auto sorted = sigma_sort(tf.Sigma);
    std::size_t p_tilde = p_tilde_override > 0
                              ? std::min(p_tilde_override, sorted.size())
                              : select_p_tilde(sorted, k2);
    TruncatedTriFactor ttf = truncate_trifactor(tf, p_tilde);
    ttf.base.U = quantize_roundtrip(ttf.base.U, quant_step);
    ttf.base.V = quantize_roundtrip(ttf.base.V, quant_step);
    ttf.base.Sigma = quantize_roundtrip(ttf.base.Sigma, quant_step);
    for (auto& e : ttf.kept)
        e.sigma = static_cast<double>(quantize_value(e.sigma, quant_step)) * quant_step;

    const Matrix recon = reconstruct(ttf);
    const double rel_error = affine_rel_error(recon, y);
    const double mem =
        memory_ratio(trifactor_memory_account(ttf, quant_step, y.rows(), y.cols()));

    write_trifact_archive(out_prefix + ".trifact", ttf, quant_step);
    write_pgm(out_prefix + ".pgm", recon);
    detail::write_text(out_prefix + ".log",
                       "stage 1\n" + diagnostics_log(d1) + "stage 2\n" + diagnostics_log(d2));
    nlohmann::json report{
        {"p", p}, {"p_tilde", p_tilde}, {"rel_error", rel_error}, {"memory_ratio", mem}};
    detail::write_text(out_prefix + ".json", report.dump(2) + "\n");
    std::cout << report.dump() << "\n";
    return kExitOk;
}

// --- mla: multi-level decomposition ----------------------------------------

inline int cmd_mla(const std::string& input, const MlaConfig& cfg, double sigma,
                   std::uint64_t noise_seed, const std::string& out_prefix) {
    const Matrix y = read_matrix_auto(input);
    const std::vector<LevelResult> levels = mla_run(y, cfg);

    std::string csv = "# " + std::string(kMemoryRule) + "\n";
    csv += "level,p,p_tilde,memory_ratio_NMF,rel_error_clean,rel_error_noisy\n";
    for (const auto& lr : levels) {
        detail::write_text(out_prefix + "_s" + std::to_string(lr.s) + ".json",
                           detail::level_json(lr).dump(2) + "\n");
        double noisy_err = std::numeric_limits<double>::quiet_NaN();
        if (!lr.failed) {
            write_pgm(out_prefix + "_s" + std::to_string(lr.s) + ".pgm", lr.reconstruction);
            const Matrix noisy = prolong_level(
                noisy_reconstruct(lr.factors, {sigma, noise_seed + lr.s}), lr.s, cfg.r,
                y.rows(), y.cols());
            noisy_err = affine_rel_error(noisy, y);
        }
        std::ostringstream line;
        line.precision(10);
        line << lr.s << "," << lr.p << "," << lr.p_tilde << "," << lr.memory_ratio << ","
             << lr.rel_error << "," << noisy_err << "\n";
        csv += line.str();
    }
    detail::write_text(out_prefix + ".csv", csv);
    std::cout << csv;
    return kExitOk;
}

// --- compare: NMF vs SVD vs JPEG -------------------------------------------

inline int cmd_compare(const std::string& input, const MlaConfig& cfg, double sigma,
                       std::uint64_t noise_seed, const std::string& out_path) {
    const Matrix y = read_matrix_auto(input);
    const std::vector<LevelResult> levels = mla_run(y, cfg);

    std::string csv = "# " + std::string(kMemoryRule) + "\n";
    csv += "level,method,memory_ratio,rel_error_clean,rel_error_noisy\n";
    std::ostringstream body;
    body.precision(10);
    for (const auto& lr : levels) {
        if (lr.failed) continue;
        const Matrix noisy = prolong_level(
            noisy_reconstruct(lr.factors, {sigma, noise_seed + lr.s}), lr.s, cfg.r, y.rows(),
            y.cols());
        body << lr.s << ",NMF," << lr.memory_ratio << "," << lr.rel_error << ","
             << affine_rel_error(noisy, y) << "\n";

        const Matrix coarse = restrict_level(y, lr.s, cfg.r);
        const SvdFactors f = svd_full(coarse);
        const Matrix svd_clean = svd_level_baseline(y, lr.s, cfg.r, cfg.quant_step);
        const Matrix svd_noisy = svd_level_baseline(y, lr.s, cfg.r, cfg.quant_step,
                                                    {sigma, noise_seed + 1000 + lr.s});
        body << lr.s << ",SVD,"
             << memory_ratio(svd_memory_account(f, cfg.quant_step, y.rows(), y.cols())) << ","
             << affine_rel_error(svd_clean, y) << "," << affine_rel_error(svd_noisy, y)
             << "\n";
    }
    for (std::size_t s = 0; s <= 3; ++s) {
        const JpegLevelOutput clean = jpeg_level_baseline(y, s);
        const JpegLevelOutput noisy =
            jpeg_level_baseline(y, s, {sigma, noise_seed + 2000 + s});
        body << s << ",JPEG," << memory_ratio(clean.memory) << ","
             << affine_rel_error(clean.image, y) << "," << affine_rel_error(noisy.image, y)
             << "\n";
    }
    csv += body.str();
    detail::write_text(out_path, csv);
    std::cout << csv;
    return kExitOk;
}

// --- rank: selection formulas and bound table -------------------------------

inline int cmd_rank(const RankParams& params, std::size_t l_max, const std::string& out_path) {
    params.validate();
    if (params.C3 * epsilon_of_delta(params) >= 1.0)
        throw RegimeError("rank: C3 * epsilon must be < 1");
    const double popt = p_opt(params);
    const double logc3e = log_c3_epsilon(params);
    std::size_t phat = 0;
    bool phat_found = true;
    try {
        phat = p_hat(params.N, params.M, params.eta, logc3e, l_max);
    } catch (const std::runtime_error&) {
        phat_found = false;
    }
    std::string csv = "l,log_term,term_ratio,log_bound_sum,p_opt,p_hat\n";
    std::ostringstream body;
    body.precision(10);
    for (std::size_t l = 1; l <= l_max; ++l) {
        body << l << "," << log_term(l, params.N, params.M, logc3e) << ","
             << term_ratio(l, params.N, params.M, logc3e) << ","
             << log_bound_sum(l, params.N, params.M, logc3e) << "," << popt << ",";
        if (phat_found)
            body << phat;
        else
            body << "NA";
        body << "\n";
    }
    csv += body.str();
    detail::write_text(out_path, csv);
    std::cout << csv;
    return kExitOk;
}

// --- noise / metrics: standalone helpers ------------------------------------

inline int cmd_noise(const std::string& input, double sigma, std::uint64_t seed,
                     const std::string& out_path) {
    const Matrix y = read_matrix_auto(input);
    const Matrix noisy = mult_noise(y, {sigma, seed});
    if (out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".pgm")
        write_pgm(out_path, noisy);
    else
        write_csv(out_path, noisy);
    return kExitOk;
}

inline int cmd_metrics(const std::string& input, const std::string& reference) {
    const Matrix img = read_matrix_auto(input);
    const Matrix ref = read_matrix_auto(reference);
    nlohmann::json report{{"rel_error", affine_rel_error(img, ref)}};
    std::cout << report.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
    CLI::App app{"sparse nonnegative tri-factorization with multi-level analysis"};
    app.require_subcommand(1);

    // factor
    auto* factor = app.add_subcommand("factor", "tri-factorize one image or matrix");
    std::string f_input, f_prefix = "factor_out";
    std::size_t f_p = 5, f_p_tilde = 0;
    double f_k2 = 0.95, f_quant = 0.01;
    std::string f_preset;
    detail::SolverOptions f_sol;
    factor->add_option("--input", f_input, "input PGM or CSV")->required();
    factor->add_option("--p", f_p, "factorization rank");
    factor->add_option("--p-tilde", f_p_tilde, "kept rank-one terms (0 = select by --k2)");
    factor->add_option("--k2", f_k2, "sigma mass threshold for truncation");
    factor->add_option("--quant-step", f_quant, "quantization step");
    factor->add_option("--preset", f_preset, "parameter preset (dsm)");
    factor->add_option("--out-prefix", f_prefix, "output path prefix");
    f_sol.attach(factor);

    // mla
    auto* mla = app.add_subcommand("mla", "multi-level decomposition");
    std::string m_input, m_prefix = "mla_out";
    MlaConfig m_cfg;
    double m_sigma = 0.25;
    std::uint64_t m_noise_seed = 7;
    detail::SolverOptions m_sol;
    mla->add_option("--input", m_input, "input PGM or CSV")->required();
    mla->add_option("--r", m_cfg.r, "level scaling factor");
    mla->add_option("--offset", m_cfg.s_offset, "s_max offset");
    mla->add_option("--k1", m_cfg.K1, "rank schedule gain");
    mla->add_option("--k2", m_cfg.K2, "sigma mass threshold");
    mla->add_option("--quant-step", m_cfg.quant_step, "quantization step");
    mla->add_option("--sigma", m_sigma, "channel noise level for the noisy column");
    mla->add_option("--noise-seed", m_noise_seed, "channel noise seed");
    mla->add_option("--out-prefix", m_prefix, "output path prefix");
    m_sol.attach(mla);

    // compare
    auto* compare = app.add_subcommand("compare", "NMF vs SVD vs JPEG baselines");
    std::string c_input, c_out = "compare.csv";
    MlaConfig c_cfg;
    double c_sigma = 0.25;
    std::uint64_t c_noise_seed = 7;
    detail::SolverOptions c_sol;
    compare->add_option("--input", c_input, "input PGM or CSV")->required();
    compare->add_option("--r", c_cfg.r, "level scaling factor");
    compare->add_option("--offset", c_cfg.s_offset, "s_max offset");
    compare->add_option("--k1", c_cfg.K1, "rank schedule gain");
    compare->add_option("--k2", c_cfg.K2, "sigma mass threshold");
    compare->add_option("--quant-step", c_cfg.quant_step, "quantization step");
    compare->add_option("--sigma", c_sigma, "channel noise level");
    compare->add_option("--noise-seed", c_noise_seed, "channel noise seed");
    compare->add_option("--out", c_out, "output CSV path");
    c_sol.attach(compare);

    // rank
    auto* rank = app.add_subcommand("rank", "rank-selection formulas and bound table");
    RankParams r_params;
    r_params.N = 256;
    r_params.M = 256;
    std::size_t r_lmax = 32;
    std::string r_out = "rank.csv";
    rank->add_option("--n", r_params.N, "matrix rows");
    rank->add_option("--m", r_params.M, "matrix cols");
    rank->add_option("--delta", r_params.delta, "target objective value");
    rank->add_option("--kconst", r_params.K, "slack constant K > 1");
    rank->add_option("--c3", r_params.C3, "covering constant");
    rank->add_option("--eta", r_params.eta, "term-ratio threshold");
    rank->add_option("--lmax", r_lmax, "table length");
    rank->add_option("--out", r_out, "output CSV path");

    // noise
    auto* noise = app.add_subcommand("noise", "apply multiplicative channel noise");
    std::string n_input, n_out = "noisy.csv";
    double n_sigma = 0.25;
    std::uint64_t n_seed = 7;
    noise->add_option("--input", n_input, "input PGM or CSV")->required();
    noise->add_option("--sigma", n_sigma, "noise level");
    noise->add_option("--seed", n_seed, "noise seed");
    noise->add_option("--out", n_out, "output path (.pgm or .csv)");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "affine-invariant relative error");
    std::string e_input, e_reference;
    metrics->add_option("--input", e_input, "reconstruction")->required();
    metrics->add_option("--reference", e_reference, "reference image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParams;
    }

    try {
        if (factor->parsed()) {
            if (f_preset == "dsm") {
                f_sol.cfg.alpha = 0.2;
                f_sol.cfg.nu = 0.0;
                f_sol.cfg.gamma = 0.02;
                f_p = 5;
                if (f_p_tilde == 0) f_p_tilde = 3;
            } else if (!f_preset.empty()) {
                throw std::invalid_argument("unknown preset: " + f_preset);
            }
            return cmd_factor(f_input, f_p, f_p_tilde, f_k2, f_quant, f_sol.cfg, f_prefix);
        }
        if (mla->parsed()) {
            m_cfg.solver = m_sol.cfg;
            return cmd_mla(m_input, m_cfg, m_sigma, m_noise_seed, m_prefix);
        }
        if (compare->parsed()) {
            c_cfg.solver = c_sol.cfg;
            return cmd_compare(c_input, c_cfg, c_sigma, c_noise_seed, c_out);
        }
        if (rank->parsed()) return cmd_rank(r_params, r_lmax, r_out);
        if (noise->parsed()) return cmd_noise(n_input, n_sigma, n_seed, n_out);
        if (metrics->parsed()) return cmd_metrics(e_input, e_reference);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const SvdError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const RegimeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParams;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParams;
    }
    return kExitParams;
}

inline int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("trinmf");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace trinmf::cli
