// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cmlt/cli/config.hpp"
#include "cmlt/core/image_io.hpp"
#include "cmlt/flatland/run.hpp"
#include "cmlt/render/mlt.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

cmlt::bdpt::Scene load_scene(const std::string& spec) {
    if (spec.empty() || spec == "builtin:desk") return cmlt::bdpt::Scene::desk();
    return cmlt::bdpt::Scene::load_json(spec);
}

void write_outputs(const cmlt::Image& img, const std::string& out, const std::string& png,
                   double exposure, const json& config) {
    if (!out.empty()) {
        cmlt::write_pfm(img, out);
        cmlt::cli::write_config_sidecar(out, config);
        std::printf("wrote %s\n", out.c_str());
    }
    if (!png.empty()) {
        cmlt::write_png(img, png, exposure);
        std::printf("wrote %s\n", png.c_str());
    }
}

void print_stats(const char* name, const cmlt::cmh::MoveStats& s) {
    if (s.proposals == 0) return;
    std::printf("%s: %llu proposals, accept rate %.4f, inversion failures %llu\n", name,
                static_cast<unsigned long long>(s.proposals), s.accept_rate(),
                static_cast<unsigned long long>(s.inversion_failures));
}

int run_flatland(const std::string& variant_name, std::uint64_t samples, std::uint64_t seed,
                 std::uint64_t brightness_samples, double sigma, double large_step, int res,
                 bool make_reference, const std::string& out, const std::string& png,
                 const std::string& reference_path, const std::string& rmse_csv) {
    cmlt::flatland::FlatConfig config;
    config.image_res = res;
    const cmlt::flatland::FlatScene scene(config);

    json jc = {{"subcommand", "flatland"},
               {"samples", samples},
               {"seed", seed},
               {"brightness_samples", brightness_samples},
               {"sigma", sigma},
               {"large_step_prob", large_step},
               {"resolution", res}};

    cmlt::Image image;
    if (make_reference) {
        jc["variant"] = "reference";
        image = cmlt::flatland::reference_image(scene, samples, seed);
    } else {
        cmlt::flatland::Variant variant;
        if (!cmlt::flatland::variant_from_name(variant_name, &variant)) {
            std::fprintf(stderr, "unknown variant: %s\n", variant_name.c_str());
            return 2;
        }
        jc["variant"] = variant_name;
        cmlt::flatland::RunSettings settings;
        settings.n_samples = samples;
        settings.seed = seed;
        settings.n_brightness = brightness_samples;
        settings.kernel.sigma = sigma;
        settings.kernel.large_step_prob = large_step;
        const auto run = cmlt::flatland::run_variant(variant, scene, settings);
        image = run.image;
        print_stats("perturbations", run.perturbations);
        print_stats("swaps", run.swaps);
    }
    write_outputs(image, out, png, 0.25, jc);

    if (!reference_path.empty()) {
        const cmlt::Image ref = cmlt::read_pfm(reference_path);
        const double err = cmlt::rmse(image, ref);
        std::printf("rmse: %.8f\n", err);
        if (!rmse_csv.empty()) {
            cmlt::cli::CsvWriter csv(rmse_csv, {"samples", "rmse"});
            csv.row({static_cast<double>(samples), err});
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"charted Metropolis light transport testbed"};
    app.require_subcommand(1);

    // ---- flatland ----
    std::string fl_variant = "cmlt";
    std::uint64_t fl_samples = 4000000, fl_seed = 0, fl_bsamples = 1 << 20;
    double fl_sigma = 1.0 / 64.0, fl_large = 0.3;
    int fl_res = 512;
    bool fl_reference = false;
    std::string fl_out, fl_png, fl_ref, fl_csv;
    auto* fl = app.add_subcommand("flatland", "two-point transport testbed");
    fl->add_option("--variant", fl_variant,
                   "pssmlt-1 | pssmlt-2 | pssmlt-avg | pssmlt-mix | cmlt-ipsm | cmlt");
    fl->add_flag("--make-reference", fl_reference, "plain Monte Carlo reference instead");
    fl->add_option("--samples", fl_samples, "total target evaluations");
    fl->add_option("--seed", fl_seed, "RNG seed")->required();
    fl->add_option("--brightness-samples", fl_bsamples, "plain MC samples for b");
    fl->add_option("--sigma", fl_sigma, "perturbation scale");
    fl->add_option("--large-step-prob", fl_large, "independence redraw probability");
    fl->add_option("--res", fl_res, "image resolution");
    fl->add_option("--out", fl_out, "output PFM path");
    fl->add_option("--png", fl_png, "preview PNG path");
    fl->add_option("--reference", fl_ref, "reference PFM for RMSE");
    fl->add_option("--rmse-csv", fl_csv, "write RMSE CSV here");

    // ---- render ----
    std::string r_algo = "cmlt", r_scene = "builtin:desk";
    std::uint64_t r_mutations = 1 << 21, r_seed = 0, r_ninit = 1 << 18, r_spp = 64;
    int r_chains = 1 << 12, r_swap_period = 16, r_checkpoints = 0;
    double r_sigma = 1.0 / 64.0, r_large = 0.3, r_exposure = 1.0;
    std::string r_out, r_png, r_ref, r_csv, r_ckpt_dir;
    auto* rd = app.add_subcommand("render", "desk-scale renderer");
    rd->add_option("--algo", r_algo, "cmlt | mmlt | pssmlt | bdpt");
    rd->add_option("--scene", r_scene, "scene JSON path or builtin:desk");
    rd->add_option("--mutations", r_mutations, "total perturbation steps");
    rd->add_option("--chains", r_chains, "number of Markov chains");
    rd->add_option("--swap-period", r_swap_period, "steps between chart swaps");
    rd->add_option("--seed", r_seed, "RNG seed")->required();
    rd->add_option("--n-init", r_ninit, "seeding subpath pairs");
    rd->add_option("--spp", r_spp, "samples per pixel (bdpt only)");
    rd->add_option("--sigma", r_sigma, "perturbation scale");
    rd->add_option("--large-step-prob", r_large, "independence redraw probability");
    rd->add_option("--checkpoints", r_checkpoints, "convergence checkpoint count");
    rd->add_option("--checkpoint-dir", r_ckpt_dir, "save checkpoint images here");
    rd->add_option("--out", r_out, "output PFM path");
    rd->add_option("--png", r_png, "preview PNG path");
    rd->add_option("--exposure", r_exposure, "PNG exposure");
    rd->add_option("--reference", r_ref, "reference PFM for RMSE");
    rd->add_option("--csv", r_csv, "convergence CSV path");

    // ---- rmse ----
    std::string m_a, m_b, m_csv;
    auto* mm = app.add_subcommand("rmse", "RMSE between two PFM images");
    mm->add_option("image_a", m_a)->required();
    mm->add_option("image_b", m_b)->required();
    mm->add_option("--csv", m_csv, "also write a one-row CSV");

    // ---- report ----
    std::string rp_run, rp_ref, rp_out;
    auto* rp = app.add_subcommand("report", "convergence CSV from saved checkpoints");
    rp->add_option("--run", rp_run, "checkpoint directory with run.json")->required();
    rp->add_option("--reference", rp_ref, "reference PFM")->required();
    rp->add_option("--out", rp_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fl->parsed()) {
            return run_flatland(fl_variant, fl_samples, fl_seed, fl_bsamples, fl_sigma,
                                fl_large, fl_res, fl_reference, fl_out, fl_png, fl_ref, fl_csv);
        }

        if (rd->parsed()) {
            const cmlt::bdpt::Scene scene = load_scene(r_scene);
            json jc = {{"subcommand", "render"}, {"algo", r_algo},     {"scene", r_scene},
                       {"mutations", r_mutations}, {"chains", r_chains}, {"swap_period", r_swap_period},
                       {"seed", r_seed},         {"n_init", r_ninit},  {"spp", r_spp},
                       {"sigma", r_sigma},       {"large_step_prob", r_large},
                       {"checkpoints", r_checkpoints}};
            cmlt::Image image;
            cmlt::Image reference;
            const bool have_ref = !r_ref.empty();
            if (have_ref) reference = cmlt::read_pfm(r_ref);

            if (r_algo == "bdpt") {
                double b = 0.0;
                image = cmlt::render::render_bdpt(scene, r_spp, r_seed, &b);
                std::printf("bdpt brightness estimate: %.6f\n", b);
            } else {
                cmlt::render::RenderSettings settings;
                if (!cmlt::render::algorithm_from_name(r_algo, &settings.algo)) {
                    std::fprintf(stderr, "unknown algorithm: %s\n", r_algo.c_str());
                    return 2;
                }
                settings.mutations = r_mutations;
                settings.n_chains = r_chains;
                settings.swap_period = r_swap_period;
                settings.seed = r_seed;
                settings.n_init = r_ninit;
                settings.kernel.sigma = r_sigma;
                settings.kernel.large_step_prob = r_large;
                if (!r_ckpt_dir.empty() && r_checkpoints <= 0) r_checkpoints = 4;
                settings.checkpoints = r_checkpoints;
                settings.save_checkpoint_images = !r_ckpt_dir.empty();
                settings.reference = have_ref ? &reference : nullptr;

                auto result = cmlt::render::render(scene, settings);
                image = result.image;
                print_stats("perturbations", result.perturbations);
                print_stats("swaps", result.swaps);
                std::printf("brightness b: %.6f\n", result.brightness);

                if (!r_csv.empty()) {
                    cmlt::cli::CsvWriter csv(
                        r_csv, {"mutations", "rmse", "perturb_accept", "swap_accept",
                                "swap_inversion_failure_rate"});
                    for (const auto& row : result.convergence)
                        csv.row({static_cast<double>(row.mutations), row.rmse,
                                 row.perturb_accept, row.swap_accept, row.swap_failures});
                }
                if (!r_ckpt_dir.empty()) {
                    fs::create_directories(r_ckpt_dir);
                    json rows = json::array();
                    for (size_t i = 0; i < result.checkpoint_images.size(); ++i) {
                        char name[64];
                        std::snprintf(name, sizeof(name), "ckpt_%08llu.pfm",
                                      static_cast<unsigned long long>(
                                          result.convergence[i].mutations));
                        cmlt::write_pfm(result.checkpoint_images[i],
                                        (fs::path(r_ckpt_dir) / name).string());
                        rows.push_back({{"mutations", result.convergence[i].mutations},
                                        {"image", name}});
                    }
                    std::ofstream mf(fs::path(r_ckpt_dir) / "run.json");
                    mf << json{{"checkpoints", rows}}.dump(2) << "\n";
                }
            }

            write_outputs(image, r_out, r_png, r_exposure, jc);
            if (have_ref) std::printf("rmse: %.8f\n", cmlt::rmse(image, reference));
            return 0;
        }

        if (mm->parsed()) {
            const cmlt::Image a = cmlt::read_pfm(m_a);
            const cmlt::Image b = cmlt::read_pfm(m_b);
            const double err = cmlt::rmse(a, b);
            std::printf("rmse: %.8f\n", err);
            if (!m_csv.empty()) {
                cmlt::cli::CsvWriter csv(m_csv, {"rmse"});
                csv.row({err});
            }
            return 0;
        }

        if (rp->parsed()) {
            std::ifstream mf(fs::path(rp_run) / "run.json");
            if (!mf) throw std::runtime_error("missing run.json in " + rp_run);
            json manifest;
            mf >> manifest;
            const cmlt::Image ref = cmlt::read_pfm(rp_ref);
            cmlt::cli::CsvWriter csv(rp_out, {"mutations", "rmse"});
            for (const auto& ck : manifest.at("checkpoints")) {
                const std::string img_path =
                    (fs::path(rp_run) / ck.at("image").get<std::string>()).string();
                const cmlt::Image img = cmlt::read_pfm(img_path);
                csv.row({ck.at("mutations").get<double>(), cmlt::rmse(img, ref)});
            }
            std::printf("wrote %s\n", rp_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
