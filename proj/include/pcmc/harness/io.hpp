// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_HARNESS_IO_HPP
#define PCMC_HARNESS_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "pcmc/error.hpp"
#include "pcmc/motion.hpp"
#include "pcmc/ply.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::harness {

// Directories expand to their *.ply files in name order; files pass through.
inline std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs) {
    namespace fs = std::filesystem;
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".ply") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            if (files.empty()) throw Error(ErrorCode::EmptyInput, "no .ply files in '" + in + "'");
            out.insert(out.end(), files.begin(), files.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw Error(ErrorCode::Io, "no such file or directory '" + in + "'");
        }
    }
    if (out.empty()) throw Error(ErrorCode::EmptyInput, "no input frames");
    return out;
}

// One grid for the whole sequence. With a positive stepsize the origin snaps
// to the stepsize lattice below the smallest coordinate; otherwise the
// stepsize is chosen so the bounding cube of all frames fills the grid.
inline VoxelGrid fit_grid(const std::vector<RawPointCloud>& clouds, int depth, double stepsize) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& c : clouds) {
        for (const auto& p : c.points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    }
    if (!lo.allFinite() || !hi.allFinite()) throw Error(ErrorCode::EmptyInput, "input frames contain no points");
    if (!(stepsize >= 0.0) || !std::isfinite(stepsize)) {
        throw Error(ErrorCode::InvalidArgument, "stepsize must be positive, or 0 to fit the bounding cube");
    }
    VoxelGrid grid;
    grid.origin = lo;
    grid.stepsize = stepsize;
    grid.depth = depth;
    if (stepsize > 0.0) {
        for (int a = 0; a < 3; ++a) grid.origin[a] = std::floor(lo[a] / stepsize) * stepsize;
    } else {
        const double span = (hi - lo).maxCoeff();
        grid.stepsize = span > 0.0 ? span / static_cast<double>(std::uint64_t{1} << depth) * (1.0 + 1e-9) : 1.0;
    }
    grid.validate();
    return grid;
}

inline std::vector<VoxelFrame> load_frames(const std::vector<std::filesystem::path>& files, int depth,
                                           double stepsize) {
    std::vector<RawPointCloud> clouds;
    for (const auto& f : files) {
        try {
            clouds.push_back(ply::read_file(f.string()));
        } catch (const Error& e) {
            throw Error(e.code(), f.string() + ": " + e.what());
        }
    }
    const auto grid = fit_grid(clouds, depth, stepsize);
    std::vector<VoxelFrame> frames;
    for (std::size_t t = 0; t < clouds.size(); ++t) {
        try {
            frames.push_back(voxelize(clouds[t], grid));
        } catch (const Error& e) {
            throw Error(e.code(), files[t].string() + ": " + e.what());
        }
    }
    return frames;
}

inline std::string frame_name(const std::string& stem, std::size_t t, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%03zu", t);
    return stem + buf + ext;
}

// Ground-truth motion of one frame: x,y,z (voxel centers, grid units) and
// dx,dy,dz per vertex.
inline void write_motion_csv(const std::filesystem::path& path, const VoxelFrame& frame, const motion::MotionField& v) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << "x,y,z,dx,dy,dz\n";
    const auto rows = v.rows();
    for (Eigen::Index m = 0; m < rows.rows(); ++m) {
        const auto p = frame.positions().row(m);
        out << p.x() << ',' << p.y() << ',' << p.z() << ',' << rows(m, 0) << ',' << rows(m, 1) << ',' << rows(m, 2)
            << '\n';
    }
}

}  // namespace pcmc::harness

#endif  // PCMC_HARNESS_IO_HPP
