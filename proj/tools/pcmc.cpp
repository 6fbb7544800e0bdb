// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

// pcmc: encode, decode, rd-sweep, compare-prediction, synth.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcmc/codec/sequence.hpp"
#include "pcmc/harness/evaluation.hpp"
#include "pcmc/harness/io.hpp"
#include "pcmc/harness/synthetic.hpp"
#include "pcmc/harness/training.hpp"
#include "pcmc/ply.hpp"

namespace fs = std::filesystem;
using namespace pcmc;

namespace {

struct Options {
    // input
    std::vector<std::string> inputs;
    std::string synthetic;  // "shape:motion"
    std::size_t frames = 10;
    double size = 8.0;
    double color_noise = 0.0;
    double texture_detail = 40.0;
    int depth = 7;
    double stepsize = 0.0;
    std::uint64_t seed = 1;
    // motion
    std::size_t k_neighbors = 26;
    int scales = 4;
    int cheb_degree = 30;
    double lowpass_factor = 2.0;
    std::size_t clusters = 500;
    double threshold_percentile = 25.0;
    double mu = 1.0;
    std::string precision_model;
    // coding
    std::vector<double> delta_motion{0.5};
    std::vector<double> delta_color{64.0};
    double delta_color_intra = 0.0;
    std::size_t gop = 0;
    std::size_t color_neighbors = 3;
    // output
    std::string output;
    std::string csv;
    bool intra_only = false;
};

void add_input_options(CLI::App* app, Options& o) {
    app->add_option("inputs", o.inputs, "PLY files or directories of PLY frames (sorted by name)");
    app->add_option("--synthetic", o.synthetic, "generate the input instead: shape:motion, e.g. sphere:translation");
    app->add_option("--frames", o.frames, "synthetic frame count")->check(CLI::PositiveNumber);
    app->add_option("--size", o.size, "synthetic shape size in voxels");
    app->add_option("--color-noise", o.color_noise, "synthetic per-frame color noise (std dev)");
    app->add_option("--texture-detail", o.texture_detail, "synthetic fine texture amplitude");
    app->add_option("--depth", o.depth, "octree depth")->check(CLI::Range(1, 21));
    app->add_option("--stepsize", o.stepsize, "voxel edge length in input units (0: fit the bounding cube)");
    app->add_option("--seed", o.seed, "seed for synthetic data and precision training");
}

void add_motion_options(CLI::App* app, Options& o) {
    app->add_option("--k-neighbors", o.k_neighbors, "graph neighbors per vertex")->check(CLI::PositiveNumber);
    app->add_option("--scales", o.scales, "wavelet scales")->check(CLI::PositiveNumber);
    app->add_option("--cheb-degree", o.cheb_degree, "Chebyshev polynomial degree")->check(CLI::PositiveNumber);
    app->add_option("--lowpass-factor", o.lowpass_factor, "lambda_max / lambda_min of the filter bank");
    app->add_option("--clusters", o.clusters, "K-means clusters for sparse matching")->check(CLI::PositiveNumber);
    app->add_option("--threshold-percentile", o.threshold_percentile, "match acceptance percentile")
        ->check(CLI::Range(0.0, 100.0));
    app->add_option("--mu", o.mu, "motion smoothness weight")->check(CLI::PositiveNumber);
    app->add_option("--precision-model", o.precision_model,
                    "precision matrix file; loaded if present, otherwise trained on the first frame and saved");
    app->add_option("--color-neighbors", o.color_neighbors, "neighbors averaged for color prediction")
        ->check(CLI::PositiveNumber);
}

void add_coding_options(CLI::App* app, Options& o, bool ladders) {
    auto* dm = app->add_option("--delta-motion", o.delta_motion, "motion quantization step");
    auto* dc = app->add_option("--delta-color", o.delta_color, "color quantization step");
    if (!ladders) {
        dm->expected(1);
        dc->expected(1);
    }
    app->add_option("--delta-color-intra", o.delta_color_intra, "I-frame color step (0: same as --delta-color)");
    app->add_option("--gop", o.gop, "intra period (0: only the first frame is intra)");
}

codec::CodecConfig make_config(const Options& o) {
    codec::CodecConfig c;
    c.motion.k_neighbors = o.k_neighbors;
    c.motion.wavelet.num_scales = o.scales;
    c.motion.wavelet.chebyshev_degree = o.cheb_degree;
    c.motion.wavelet.lowpass_factor = o.lowpass_factor;
    c.motion.clusters = o.clusters;
    c.motion.threshold_percentile = o.threshold_percentile;
    c.motion.mu = o.mu;
    c.delta_motion = o.delta_motion.front();
    c.delta_color = o.delta_color.front();
    c.delta_color_intra = o.delta_color_intra;
    c.gop = o.gop;
    c.color_neighbors = o.color_neighbors;
    c.validate();
    return c;
}

harness::SyntheticSequence synthesize(const Options& o, const std::string& what) {
    const auto colon = what.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected shape:motion, got '" + what + "'");
    harness::SyntheticSpec spec;
    spec.shape = harness::parse_shape(what.substr(0, colon));
    spec.motion = harness::parse_motion(what.substr(colon + 1));
    spec.frames = o.frames;
    spec.depth = static_cast<unsigned>(o.depth);
    spec.size = o.size;
    spec.color_noise = o.color_noise;
    spec.texture_detail = o.texture_detail;
    spec.seed = o.seed;
    return harness::generate_synthetic(spec);
}

std::vector<VoxelFrame> load_input(const Options& o) {
    if (!o.synthetic.empty()) {
        if (!o.inputs.empty()) throw Error(ErrorCode::InvalidArgument, "give either input files or --synthetic");
        return synthesize(o, o.synthetic).frames;
    }
    if (o.inputs.empty()) throw Error(ErrorCode::InvalidArgument, "no input: give PLY files or --synthetic");
    return harness::load_frames(harness::expand_inputs(o.inputs), o.depth, o.stepsize);
}

motion::PrecisionModel precision_model(const Options& o, const std::vector<VoxelFrame>& frames,
                                       const codec::CodecConfig& config) {
    if (!o.precision_model.empty() && fs::exists(o.precision_model)) {
        auto m = motion::load_precision(o.precision_model);
        const auto want = sgw::FeatureDescriptor::length(config.motion.wavelet.bands());
        if (m.dim() != want) {
            throw Error(ErrorCode::DimensionMismatch, "precision model has dimension " + std::to_string(m.dim()) +
                                                          ", descriptors have " + std::to_string(want));
        }
        return m;
    }
    harness::TrainingConfig tc;
    tc.seed = o.seed;
    auto m = harness::train_precision_rigid(frames.front(), config.motion, tc);
    if (!o.precision_model.empty()) {
        motion::save_precision(m, o.precision_model);
        std::cerr << "trained precision model written to " << o.precision_model << '\n';
    }
    return m;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    return out;
}

// ---- subcommands ----

int run_encode(const Options& o) {
    const auto frames = load_input(o);
    const auto config = make_config(o);
    const auto model = precision_model(o, frames, config);
    const auto enc = codec::encode_sequence(frames, config, model);
    const auto bytes = enc.bytes();
    if (o.output.empty()) throw Error(ErrorCode::InvalidArgument, "missing -o container path");
    auto out = open_out(o.output);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!o.csv.empty()) {
        auto csv = open_out(o.csv);
        harness::write_frame_csv(csv, enc.frames);
    }
    const auto rd = harness::summarize(enc, config.delta_motion, config.delta_color);
    std::printf("%zu frames, %zu bytes, %.4f bpv (geometry %.4f, motion %.4f, color %.4f), PSNR %.2f dB\n",
                enc.frames.size(), bytes.size(), rd.total_bpv, rd.geometry_bpv, rd.motion_bpv, rd.color_bpv, rd.psnr);
    return 0;
}

int run_decode(const Options& o) {
    if (o.inputs.size() != 1) throw Error(ErrorCode::InvalidArgument, "decode takes exactly one container");
    std::ifstream in(o.inputs.front(), std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + o.inputs.front() + "'");
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto dec = codec::decode_sequence(bytes);
    const fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
    fs::create_directories(dir);
    for (std::size_t t = 0; t < dec.frames.size(); ++t) {
        ply::write_file((dir / harness::frame_name("frame", t, ".ply")).string(), ply::to_cloud(dec.frames[t]));
    }
    std::printf("%zu frames written to %s\n", dec.frames.size(), dir.string().c_str());
    return 0;
}

int run_rd_sweep(const Options& o) {
    const auto frames = load_input(o);
    const auto config = make_config(o);
    const auto model = precision_model(o, frames, config);
    const auto points = harness::rd_sweep(frames, model, config, o.delta_motion, o.delta_color, o.intra_only);
    if (o.csv.empty()) {
        harness::write_rd_csv(std::cout, points);
    } else {
        auto csv = open_out(o.csv);
        harness::write_rd_csv(csv, points);
    }
    return 0;
}

int run_compare_prediction(const Options& o) {
    const auto frames = load_input(o);
    if (frames.size() < 2) throw Error(ErrorCode::InvalidArgument, "prediction comparison needs two frames");
    const auto config = make_config(o);
    const auto model = precision_model(o, frames, config);
    std::ofstream csv;
    if (!o.csv.empty()) {
        csv = open_out(o.csv);
        csv << "pair,motion_compensated_snr,static_neighbor_snr,global_mean_snr\n";
    }
    harness::PredictionSnr sum;
    for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
        const auto p = harness::compare_predictors(frames[t], frames[t + 1], model, config);
        sum.motion_compensated += p.motion_compensated;
        sum.static_neighbors += p.static_neighbors;
        sum.global_mean += p.global_mean;
        if (csv.is_open()) {
            csv << t << ',' << p.motion_compensated << ',' << p.static_neighbors << ',' << p.global_mean << '\n';
        }
    }
    const double n = static_cast<double>(frames.size() - 1);
    std::printf("predictor              SNR (dB)\n");
    std::printf("motion-compensated     %8.2f\n", sum.motion_compensated / n);
    std::printf("static neighbors       %8.2f\n", sum.static_neighbors / n);
    std::printf("global mean            %8.2f\n", sum.global_mean / n);
    return 0;
}

int run_synth(const Options& o) {
    const std::string what = o.synthetic.empty() ? "sphere:translation" : o.synthetic;
    const auto seq = synthesize(o, what);
    const fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
    fs::create_directories(dir);
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        ply::write_file((dir / harness::frame_name("frame", t, ".ply")).string(), ply::to_cloud(seq.frames[t]));
        if (t < seq.ground_truth.size()) {
            harness::write_motion_csv(dir / harness::frame_name("motion", t, ".csv"), seq.frames[t], seq.ground_truth[t]);
        }
    }
    std::printf("%zu frames (%zu voxels in frame 0) written to %s\n", seq.frames.size(), seq.frames.front().size(),
                dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-based motion-compensated coding of dynamic voxelized point clouds"};
    app.require_subcommand(1);
    Options o;

    auto* encode = app.add_subcommand("encode", "encode a frame sequence into a container");
    add_input_options(encode, o);
    add_motion_options(encode, o);
    add_coding_options(encode, o, false);
    encode->add_option("-o,--output", o.output, "container path")->required();
    encode->add_option("--csv", o.csv, "per-frame statistics CSV");

    auto* decode = app.add_subcommand("decode", "decode a container into PLY frames");
    decode->add_option("container", o.inputs, "container file")->required()->expected(1);
    decode->add_option("-o,--output", o.output, "output directory");

    auto* sweep = app.add_subcommand("rd-sweep", "encode once per (motion step, color step) pair");
    add_input_options(sweep, o);
    add_motion_options(sweep, o);
    add_coding_options(sweep, o, true);
    sweep->add_flag("--intra", o.intra_only, "code every frame as an I-frame");
    sweep->add_option("--csv", o.csv, "rate-distortion CSV (default: stdout)");

    auto* compare = app.add_subcommand("compare-prediction", "SNR of the three color predictors");
    add_input_options(compare, o);
    add_motion_options(compare, o);
    add_coding_options(compare, o, false);
    compare->add_option("--csv", o.csv, "per-pair SNR CSV");

    auto* synth = app.add_subcommand("synth", "write a synthetic sequence with ground-truth motion");
    synth->add_option("--synthetic", o.synthetic, "shape:motion (default sphere:translation)");
    synth->add_option("--frames", o.frames, "frame count")->check(CLI::PositiveNumber);
    synth->add_option("--size", o.size, "shape size in voxels");
    synth->add_option("--color-noise", o.color_noise, "per-frame color noise (std dev)");
    synth->add_option("--texture-detail", o.texture_detail, "fine texture amplitude");
    synth->add_option("--depth", o.depth, "octree depth")->check(CLI::Range(3, 12));
    synth->add_option("--seed", o.seed, "generator seed");
    synth->add_option("-o,--output", o.output, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*encode) return run_encode(o);
        if (*decode) return run_decode(o);
        if (*sweep) return run_rd_sweep(o);
        if (*compare) return run_compare_prediction(o);
        if (*synth) return run_synth(o);
    } catch (const Error& e) {
        std::cerr << "pcmc: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "pcmc: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
