// Command-line surface for the dark-current fingerprinting pipeline:
// simulate -> residue -> fingerprint -> correlate -> fit / estimate-temp,
// plus the filter runtime benchmark.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include "dsnfp/benchmark.hpp"
#include "dsnfp/correlate.hpp"
#include "dsnfp/error.hpp"
#include "dsnfp/fingerprint.hpp"
#include "dsnfp/frame_io.hpp"
#include "dsnfp/parallel.hpp"
#include "dsnfp/simulate.hpp"
#include "dsnfp/thermal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
    if (!fs::exists(dir)) dsnfp::raise(dsnfp::errc::io_error, dir.string() + " does not exist");
    std::vector<fs::path> files;
    if (fs::is_regular_file(dir)) {
        files.push_back(dir);
        return files;
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == extension)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        dsnfp::raise(dsnfp::errc::empty_set, "no " + extension + " files under " + dir.string());
    return files;
}

std::vector<double> parse_temps(const std::string& spec) {
    std::vector<double> temps;
    if (spec.find(':') != std::string::npos) {
        double lo = 0, hi = 0, step = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)
            dsnfp::raise(dsnfp::errc::invalid_param, "bad temperature range '" + spec + "'");
        for (double t = lo; t <= hi + step * 1e-9; t += step) temps.push_back(t);
    } else {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) temps.push_back(std::strtod(item.c_str(), nullptr));
        }
    }
    if (temps.empty()) dsnfp::raise(dsnfp::errc::invalid_param, "no temperatures in '" + spec + "'");
    return temps;
}

std::string format_temp(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", t);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) dsnfp::raise(dsnfp::errc::io_error, "cannot create " + path.string());
    out << text;
}

dsnfp::ReferencePattern residue_to_pattern(const dsnfp::ResiduePlane& residue, double temp_c) {
    dsnfp::ReferencePattern p;
    p.width = residue.width;
    p.height = residue.height;
    p.frame_count = 1;
    p.temperature_c = temp_c;
    p.data.resize(residue.size());
    p.mask.assign(residue.size(), 0);
    for (std::size_t i = 0; i < residue.size(); ++i)
        p.data[i] = static_cast<float>(residue.data[i]);
    return p;
}

dsnfp::ResiduePlane pattern_to_residue(const dsnfp::ReferencePattern& p) {
    dsnfp::ResiduePlane r(p.width, p.height);
    for (std::size_t i = 0; i < p.data.size(); ++i) r.data[i] = p.data[i];
    return r;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string out_dir;
    std::string profile_path;
    std::string emit_profile;
    std::string temps = "10:50:5";
    int frames = 100;
    double exposure = dsnfp::kDefaultExposureS;
    double flat_illuminance = -1.0; // < 0: dark frames
    std::uint64_t frame_base = 0;
    std::string camera_id = "cam01";
    std::string lens_id;
    int threads = 1;
    dsnfp::ProfileParams params;
};

int run_simulate(const SimulateArgs& args) {
    dsnfp::SensorProfile profile = args.profile_path.empty()
                                       ? dsnfp::make_profile(args.params)
                                       : dsnfp::load_profile(args.profile_path);
    if (!args.emit_profile.empty()) {
        fs::create_directories(fs::path(args.emit_profile).parent_path());
        dsnfp::save_profile(profile, args.emit_profile);
    }

    const auto temps = parse_temps(args.temps);
    fs::create_directories(args.out_dir);
    for (double temp : temps) {
        const fs::path set_dir = fs::path(args.out_dir) / ("t" + format_temp(temp));
        fs::create_directories(set_dir);
        std::vector<std::string> errors(static_cast<std::size_t>(args.frames));
        dsnfp::parallel_for(static_cast<std::size_t>(args.frames), args.threads, [&](std::size_t i) {
            try {
                const std::uint64_t index = args.frame_base + i;
                dsnfp::Frame frame =
                    args.flat_illuminance >= 0.0
                        ? dsnfp::capture_flat(profile, temp, args.exposure, args.flat_illuminance,
                                              index)
                        : dsnfp::capture_dark(profile, temp, args.exposure, index);
                frame.meta.camera_id = args.camera_id;
                frame.meta.lens_id = args.lens_id;
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%05llu.pgm",
                              static_cast<unsigned long long>(index));
                dsnfp::save_frame(frame, set_dir / name);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        for (const std::string& err : errors) {
            if (!err.empty()) dsnfp::raise(dsnfp::errc::io_error, err);
        }
    }
    return 0;
}

// ----------------------------------------------------------------- residue

struct ResidueArgs {
    std::string in;
    std::string out_dir;
    std::string filter = "dct";
    double cutoff_pi = 150.0 / 1136.0;
    double sigma0_sq = 0.0; // 0 = default for bit depth
    int levels = 4;
    int threads = 1;
};

int run_residue(const ResidueArgs& args) {
    const auto files = list_files(args.in, ".pgm");
    if (args.filter != "dct" && args.filter != "wavelet")
        dsnfp::raise(dsnfp::errc::invalid_param, "filter must be dct or wavelet");
    fs::create_directories(args.out_dir);

    const dsnfp::DctFilterSpec spec{args.cutoff_pi * std::numbers::pi};
    std::vector<std::string> errors(files.size());
    dsnfp::parallel_for(files.size(), args.threads, [&](std::size_t i) {
        try {
            const dsnfp::Frame frame = dsnfp::load_frame(files[i]);
            const double sigma0 = args.sigma0_sq > 0.0 ? args.sigma0_sq
                                                       : dsnfp::default_sigma0_sq(frame.bit_depth);
            const dsnfp::ResiduePlane residue =
                args.filter == "dct" ? dsnfp::dct_residue(frame, spec)
                                     : dsnfp::wavelet_residue(frame, sigma0, args.levels);
            const double temp = frame.meta.temperature_c.value_or(0.0);
            const fs::path out = fs::path(args.out_dir) / (files[i].stem().string() + ".dsnf");
            dsnfp::save_pattern(residue_to_pattern(residue, temp), out);
            if (!frame.meta.empty())
                dsnfp::save_meta(frame.meta, fs::path(out.string() + ".meta"));
        } catch (const std::exception& e) {
            errors[i] = files[i].string() + ": " + e.what();
        }
    });
    for (const std::string& err : errors) {
        if (!err.empty()) dsnfp::raise(dsnfp::errc::io_error, err);
    }
    return 0;
}

// -------------------------------------------------------------- fingerprint

struct FingerprintArgs {
    std::string residues;
    std::string frames_dir;
    std::string out;
    double sat_threshold = dsnfp::kDefaultSaturationThreshold;
    double temp = std::numeric_limits<double>::quiet_NaN();
};

int run_fingerprint(const FingerprintArgs& args) {
    const auto files = list_files(args.residues, ".dsnf");
    std::vector<dsnfp::ResiduePlane> residues;
    residues.reserve(files.size());
    double temp_sum = 0.0;
    for (const auto& f : files) {
        const auto pattern = dsnfp::load_pattern(f);
        temp_sum += pattern.temperature_c;
        residues.push_back(pattern_to_residue(pattern));
    }

    dsnfp::SaturationMask mask(residues[0].width, residues[0].height, args.sat_threshold);
    if (!args.frames_dir.empty()) {
        const auto frame_files = list_files(args.frames_dir, ".pgm");
        std::vector<dsnfp::Frame> frames;
        frames.reserve(frame_files.size());
        for (const auto& f : frame_files) frames.push_back(dsnfp::load_frame(f));
        mask = dsnfp::saturation_mask(frames, args.sat_threshold);
    }

    const double temp =
        std::isnan(args.temp) ? temp_sum / static_cast<double>(files.size()) : args.temp;
    const auto reference = dsnfp::build_reference(residues, mask, temp);
    if (fs::path(args.out).has_parent_path())
        fs::create_directories(fs::path(args.out).parent_path());
    dsnfp::save_pattern(reference, args.out);
    return 0;
}

// ---------------------------------------------------------------- correlate

struct CorrelateArgs {
    std::string residues;
    std::string patterns;
    std::string out;
    int threads = 1;
};

int run_correlate(const CorrelateArgs& args) {
    const auto residue_files = list_files(args.residues, ".dsnf");
    const auto pattern_files = list_files(args.patterns, ".dsnf");

    std::vector<dsnfp::ReferencePattern> patterns;
    patterns.reserve(pattern_files.size());
    for (const auto& f : pattern_files) patterns.push_back(dsnfp::load_pattern(f));

    std::vector<std::vector<dsnfp::CorrelationRecord>> rows(residue_files.size());
    std::vector<std::string> errors(residue_files.size());
    dsnfp::parallel_for(residue_files.size(), args.threads, [&](std::size_t i) {
        try {
            const auto residue_pattern = dsnfp::load_pattern(residue_files[i]);
            const auto residue = pattern_to_residue(residue_pattern);
            dsnfp::FrameMeta meta;
            const fs::path meta_path(residue_files[i].string() + ".meta");
            if (fs::exists(meta_path)) meta = dsnfp::load_meta(meta_path);
            for (std::size_t j = 0; j < patterns.size(); ++j) {
                try {
                    const auto corr = dsnfp::masked_corr(residue, patterns[j]);
                    rows[i].push_back({meta.camera_id, meta.lens_id, patterns[j].temperature_c,
                                       corr.rho, corr.n_pixels});
                } catch (const dsnfp::Error& e) {
                    if (e.code() == dsnfp::errc::dimension_mismatch) {
                        dsnfp::raise(e.code(), residue_files[i].string() + " vs " +
                                                   pattern_files[j].string() + ": " + e.what());
                    }
                    throw;
                }
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const std::string& err : errors) {
        if (!err.empty()) throw dsnfp::Error(dsnfp::errc::io_error, err);
    }

    std::string csv = "camera_id,lens_id,pattern_temp_c,rho,n_pixels\n";
    char buf[256];
    for (const auto& row : rows) {
        for (const auto& r : row) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.10g,%.17g,%zu\n", r.camera_id.c_str(),
                          r.lens_id.c_str(), r.pattern_temperature_c, r.rho, r.n_pixels);
            csv += buf;
        }
    }
    write_text(args.out, csv);
    return 0;
}

// ------------------------------------------------------------- fit family

std::vector<dsnfp::FitPoint> load_series_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) dsnfp::raise(dsnfp::errc::io_error, "cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header))
        dsnfp::raise(dsnfp::errc::truncated_data, path.string() + ": empty CSV");

    std::vector<std::string> columns;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) columns.push_back(col);
    }
    auto index_of = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    };

    std::vector<std::vector<std::string>> table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        table.push_back(std::move(cells));
    }
    if (table.empty()) dsnfp::raise(dsnfp::errc::empty_set, path.string() + ": no data rows");

    const int temp_col = index_of("pattern_temp_c");
    const int rho_col = index_of("rho");
    if (temp_col >= 0 && rho_col >= 0) {
        // raw correlate output: aggregate per temperature
        std::vector<dsnfp::CorrelationRecord> records;
        records.reserve(table.size());
        for (const auto& cells : table) {
            if (static_cast<int>(cells.size()) <= std::max(temp_col, rho_col))
                dsnfp::raise(dsnfp::errc::truncated_data, path.string() + ": short CSV row");
            dsnfp::CorrelationRecord r;
            r.pattern_temperature_c = std::strtod(cells[temp_col].c_str(), nullptr);
            r.rho = std::strtod(cells[rho_col].c_str(), nullptr);
            records.push_back(r);
        }
        std::vector<dsnfp::FitPoint> points;
        for (const auto& g : dsnfp::correlation_series(records))
            points.push_back({g.temperature_c, g.mean_rho});
        return points;
    }

    const int t_col = index_of("temperature_c");
    const int y_col = index_of("mean_rho");
    if (t_col < 0 || y_col < 0)
        dsnfp::raise(dsnfp::errc::malformed_header,
                     path.string() + ": expected pattern_temp_c/rho or temperature_c/mean_rho");
    std::vector<dsnfp::FitPoint> points;
    for (const auto& cells : table) {
        if (static_cast<int>(cells.size()) <= std::max(t_col, y_col))
            dsnfp::raise(dsnfp::errc::truncated_data, path.string() + ": short CSV row");
        points.push_back({std::strtod(cells[t_col].c_str(), nullptr),
                          std::strtod(cells[y_col].c_str(), nullptr)});
    }
    return points;
}

int run_fit(const std::string& in, const std::string& out, double t_ref_k) {
    const auto points = load_series_csv(in);
    const auto fit = dsnfp::fit_exponential(points);
    json j{{"a", fit.a},
           {"b", fit.b},
           {"adj_r2", fit.adj_r2},
           {"sse", fit.sse},
           {"converged", fit.converged},
           {"iterations", fit.iterations},
           {"n_used", fit.n_used},
           {"n_dropped", fit.n_dropped},
           {"delta_e_ev", dsnfp::activation_energy(fit.b, t_ref_k)},
           {"t_ref_k", t_ref_k}};
    write_text(out, j.dump(2) + "\n");
    return 0;
}

int run_estimate(const std::string& in, const std::string& out, const dsnfp::IdentifyOptions& options) {
    const auto points = load_series_csv(in);
    const auto fit = dsnfp::identify_temperature(points, options);
    json j{{"a", fit.a},
           {"b", fit.b},
           {"adj_r2", fit.adj_r2},
           {"t_star_c", fit.t_star_c},
           {"forensic_range_c", json::array({fit.forensic_low_c, fit.forensic_high_c})},
           {"delta_e_ev", fit.delta_e_ev},
           {"t_ref_k", fit.t_ref_k},
           {"total_sse", fit.total_sse},
           {"converged", fit.converged}};
    write_text(out, j.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::string frames_dir;
    std::string out;
    dsnfp::BenchmarkOptions options;
    double cutoff_pi = 150.0 / 1136.0;
};

int run_benchmark_cmd(const BenchmarkArgs& args) {
    const auto files = list_files(args.frames_dir, ".pgm");
    std::vector<dsnfp::Frame> frames;
    frames.reserve(files.size());
    for (const auto& f : files) frames.push_back(dsnfp::load_frame(f));

    dsnfp::BenchmarkOptions options = args.options;
    options.dct.cutoff_radians = args.cutoff_pi * std::numbers::pi;
    const auto report = dsnfp::run_filter_benchmark(frames, options);
    const std::string csv = dsnfp::benchmark_csv(report);
    if (args.out.empty()) {
        std::cout << csv;
    } else {
        write_text(args.out, csv);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dark-current sensor fingerprinting pipeline"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate synthetic dark/flat frame sets");
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_option("--profile", sim.profile_path, "Load an existing sensor profile");
    simulate->add_option("--emit-profile", sim.emit_profile, "Save the profile used");
    simulate->add_option("--temps", sim.temps, "Temperature grid lo:hi:step or comma list");
    simulate->add_option("--frames", sim.frames, "Frames per temperature set");
    simulate->add_option("--exposure", sim.exposure, "Exposure seconds");
    simulate->add_option("--flat", sim.flat_illuminance,
                         "Emit flat fields at this illuminance (photons/pixel/s)");
    simulate->add_option("--frame-base", sim.frame_base, "First frame index (noise stream id)");
    simulate->add_option("--camera-id", sim.camera_id, "Camera id recorded in sidecars");
    simulate->add_option("--lens-id", sim.lens_id, "Lens id recorded in sidecars");
    simulate->add_option("--threads", sim.threads, "Worker threads");
    simulate->add_option("--width", sim.params.width, "Sensor width");
    simulate->add_option("--height", sim.params.height, "Sensor height");
    simulate->add_option("--bit-depth", sim.params.bit_depth, "Bits per sample");
    simulate->add_option("--n-max", sim.params.n_max, "Well capacity, electrons");
    simulate->add_option("--j0", sim.params.j0, "Dark generation constant, e-/(s K^2)");
    simulate->add_option("--dark-e30", sim.params.dark_e_at_30c,
                         "Median dark electrons at 30 C (used when --j0 absent)");
    simulate->add_option("--delta-e", sim.params.delta_e_ev, "Activation energy, eV");
    simulate->add_option("--sigma-ln", sim.params.dark_sigma_ln, "Dark rate lognormal sigma");
    simulate->add_option("--prnu-sigma", sim.params.prnu_sigma, "PRNU lognormal sigma");
    simulate->add_option("--hot-fraction", sim.params.hot_pixel_fraction, "Hot pixel fraction");
    simulate->add_option("--read-noise", sim.params.read_noise_e, "Read noise RMS electrons");
    simulate->add_option("--seed", sim.params.seed, "Profile seed");

    ResidueArgs res;
    auto* residue = app.add_subcommand("residue", "Extract noise residues from PGM frames");
    residue->add_option("--in", res.in, "PGM file or directory")->required();
    residue->add_option("--out", res.out_dir, "Output directory")->required();
    residue->add_option("--filter", res.filter, "dct or wavelet");
    residue->add_option("--cutoff", res.cutoff_pi, "DCT cutoff as a multiplier of pi");
    residue->add_option("--sigma0-sq", res.sigma0_sq, "Wavelet coring noise variance");
    residue->add_option("--levels", res.levels, "Wavelet decomposition levels");
    residue->add_option("--threads", res.threads, "Worker threads");

    FingerprintArgs fp;
    auto* fingerprint = app.add_subcommand("fingerprint", "Average residues into a pattern");
    fingerprint->add_option("--residues", fp.residues, "Residue .dsnf directory")->required();
    fingerprint->add_option("--frames", fp.frames_dir, "PGM frames for the saturation mask");
    fingerprint->add_option("--out", fp.out, "Output pattern file")->required();
    fingerprint->add_option("--sat-threshold", fp.sat_threshold, "Saturation threshold fraction");
    fingerprint->add_option("--temp", fp.temp, "Pattern temperature (default: residue mean)");

    CorrelateArgs corr;
    auto* correlate = app.add_subcommand("correlate", "Correlate residues against patterns");
    correlate->add_option("--residues", corr.residues, "Residue .dsnf directory")->required();
    correlate->add_option("--patterns", corr.patterns, "Pattern .dsnf file/directory")->required();
    correlate->add_option("--out", corr.out, "Output CSV")->required();
    correlate->add_option("--threads", corr.threads, "Worker threads");

    std::string fit_in, fit_out;
    double fit_t_ref = dsnfp::kDefaultTRefK;
    auto* fit = app.add_subcommand("fit", "Fit y = a*exp(b*t) to a correlation series");
    fit->add_option("--in", fit_in, "CSV input (correlate output or series)")->required();
    fit->add_option("--out", fit_out, "JSON output")->required();
    fit->add_option("--t-ref-k", fit_t_ref, "Reference temperature for activation energy");

    std::string est_in, est_out;
    dsnfp::IdentifyOptions est_options;
    auto* estimate = app.add_subcommand("estimate-temp", "Identify capture temperature");
    estimate->add_option("--in", est_in, "CSV input (correlate output or series)")->required();
    estimate->add_option("--out", est_out, "JSON output")->required();
    estimate->add_option("--grid-step", est_options.grid_step_c, "Breakpoint grid step, C");
    estimate->add_option("--t-ref-k", est_options.t_ref_k, "Reference temperature, K");
    estimate->add_option("--forensic-halfwidth", est_options.forensic_half_width_c,
                         "Forensic range half width, C");

    BenchmarkArgs bench;
    auto* benchmark = app.add_subcommand("benchmark", "Time the wavelet and DCT filters");
    benchmark->add_option("--frames", bench.frames_dir, "PGM frame directory")->required();
    benchmark->add_option("--out", bench.out, "Output CSV (default stdout)");
    benchmark->add_option("--reps", bench.options.repetitions, "Repetitions over the set");
    benchmark->add_option("--threads", bench.options.threads,
                          "Adds separately-reported parallel rows when > 1");
    benchmark->add_option("--cutoff", bench.cutoff_pi, "DCT cutoff as a multiplier of pi");
    benchmark->add_option("--sigma0-sq", bench.options.sigma0_sq, "Wavelet coring variance");
    benchmark->add_option("--levels", bench.options.levels, "Wavelet decomposition levels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (residue->parsed()) return run_residue(res);
        if (fingerprint->parsed()) return run_fingerprint(fp);
        if (correlate->parsed()) return run_correlate(corr);
        if (fit->parsed()) return run_fit(fit_in, fit_out, fit_t_ref);
        if (estimate->parsed()) return run_estimate(est_in, est_out, est_options);
        if (benchmark->parsed()) return run_benchmark_cmd(bench);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
