// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_HARNESS_SYNTHETIC_HPP
#define PCMC_HARNESS_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "pcmc/error.hpp"
#include "pcmc/morton.hpp"
#include "pcmc/motion.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::harness {

enum class Shape { SphereShell, Body, Blob };
enum class MotionKind { Static, Translation, Rigid, Articulated, Deformation };

inline Shape parse_shape(const std::string& s) {
    if (s == "sphere") return Shape::SphereShell;
    if (s == "body") return Shape::Body;
    if (s == "blob") return Shape::Blob;
    throw Error(ErrorCode::InvalidArgument, "unknown shape '" + s + "' (sphere, body, blob)");
}

inline MotionKind parse_motion(const std::string& s) {
    if (s == "static") return MotionKind::Static;
    if (s == "translation") return MotionKind::Translation;
    if (s == "rigid") return MotionKind::Rigid;
    if (s == "articulated") return MotionKind::Articulated;
    if (s == "deformation") return MotionKind::Deformation;
    throw Error(ErrorCode::InvalidArgument,
                "unknown motion '" + s + "' (static, translation, rigid, articulated, deformation)");
}

struct SyntheticSpec {
    Shape shape = Shape::SphereShell;
    MotionKind motion = MotionKind::Translation;
    std::size_t frames = 10;
    unsigned depth = 7;
    double size = 11.0;                         // characteristic radius in voxels
    Eigen::Vector3d velocity{1.5, -1.0, 0.75};  // voxels per frame
    double rotation_deg = 3.0;                  // per frame, rigid and articulated
    double deformation = 1.5;                   // amplitude in voxels
    double sample_spacing = 0.35;               // surface sampling step in voxels
    double texture_detail = 40.0;               // amplitude of the fine texture component
    double color_noise = 0.0;                   // per-frame sensor noise, std dev per raw sample
    std::uint64_t seed = 1;

    void validate() const {
        if (frames < 1) throw Error(ErrorCode::InvalidArgument, "need at least one frame");
        if (depth < 3 || depth > 12) throw Error(ErrorCode::InvalidArgument, "depth must lie in [3, 12]");
        if (!(size > 1.0)) throw Error(ErrorCode::InvalidArgument, "shape size must exceed one voxel");
        if (!(sample_spacing > 0.0 && sample_spacing <= 0.5)) {
            throw Error(ErrorCode::InvalidArgument, "sample spacing must lie in (0, 0.5]");
        }
    }
};

struct SyntheticSequence {
    std::vector<VoxelFrame> frames;
    // ground_truth[t] lives on frame t and points to frame t + 1.
    std::vector<motion::MotionField> ground_truth;
};

namespace detail {

struct SurfaceSample {
    Eigen::Vector3d p;  // canonical coordinates, centered on the origin
    int part = 0;
};

inline void sample_sphere(std::vector<SurfaceSample>& out, double radius, double spacing,
                          const std::vector<Eigen::Vector4d>& bumps) {
    const auto count = static_cast<std::size_t>(std::ceil(4.0 * std::numbers::pi * radius * radius * 1.6 / (spacing * spacing)));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
        const double r = std::sqrt(1.0 - z * z);
        const double th = golden * static_cast<double>(i);
        const Eigen::Vector3d u(r * std::cos(th), r * std::sin(th), z);
        double scale = 1.0;
        for (const auto& b : bumps) scale += b[3] * std::sin(b.head<3>().dot(u) * 3.0 + b[3] * 10.0);
        out.push_back({radius * scale * u, 0});
    }
}

inline void sample_box(std::vector<SurfaceSample>& out, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                       double spacing, int part) {
    for (int axis = 0; axis < 3; ++axis) {
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        const auto n1 = static_cast<int>(std::ceil((hi[a1] - lo[a1]) / spacing));
        const auto n2 = static_cast<int>(std::ceil((hi[a2] - lo[a2]) / spacing));
        for (double face : {lo[axis], hi[axis]}) {
            for (int i = 0; i <= n1; ++i) {
                for (int j = 0; j <= n2; ++j) {
                    Eigen::Vector3d p;
                    p[axis] = face;
                    p[a1] = lo[a1] + (hi[a1] - lo[a1]) * i / n1;
                    p[a2] = lo[a2] + (hi[a2] - lo[a2]) * j / n2;
                    out.push_back({p, part});
                }
            }
        }
    }
}

// Two boxes joined at a hinge: a torso and a limb that swings about z.
struct BodyLayout {
    Eigen::Vector3d torso_half;
    Eigen::Vector3d hinge;
    Eigen::Vector3d limb_lo, limb_hi;  // relative to the hinge
};

inline BodyLayout body_layout(double size) {
    BodyLayout b;
    b.torso_half = Eigen::Vector3d(0.55, 0.4, 0.3) * size;
    b.hinge = Eigen::Vector3d(b.torso_half.x(), 0.0, 0.0);
    b.limb_lo = Eigen::Vector3d(0.0, -0.22, -0.22) * size;
    b.limb_hi = Eigen::Vector3d(1.1, 0.22, 0.22) * size;
    return b;
}

// Random texture of canonical position, three channels in [0, 255]: two
// sinusoids per channel plus lattice value noise for fine detail.
struct Texture {
    static constexpr double kCell = 1.25;  // noise lattice spacing in voxels

    std::array<Eigen::Vector3d, 6> freq;
    std::array<double, 6> phase{};
    std::uint64_t salt = 0;
    double detail = 40.0;

    Texture(std::mt19937_64& rng, double detail_amplitude) : detail(detail_amplitude) {
        std::normal_distribution<double> nd(0.0, 1.0);
        std::uniform_real_distribution<double> ud(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < 6; ++i) {
            Eigen::Vector3d w(nd(rng), nd(rng), nd(rng));
            w *= (i < 3 ? 0.45 : 0.9) / w.norm();
            freq[i] = w;
            phase[i] = ud(rng);
        }
        salt = rng();
    }

    // Uniform in [-1, 1] at an integer lattice point.
    double lattice(std::int64_t x, std::int64_t y, std::int64_t z, std::size_t ch) const {
        std::uint64_t h = salt ^ (static_cast<std::uint64_t>(x) * 0x9e3779b97f4a7c15ULL) ^
                          (static_cast<std::uint64_t>(y) * 0xc2b2ae3d27d4eb4fULL) ^
                          (static_cast<std::uint64_t>(z) * 0x165667b19e3779f9ULL) ^ (ch * 0xd6e8feb86659fd93ULL);
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        h *= 0xc4ceb9fe1a85ec53ULL;
        h ^= h >> 33;
        return static_cast<double>(h >> 11) / 4503599627370496.0 - 1.0;
    }

    double value_noise(const Eigen::Vector3d& p, std::size_t ch) const {
        const Eigen::Vector3d q = p / kCell;
        const Eigen::Vector3d f = q.array().floor();
        const Eigen::Vector3d w = q - f;
        const auto x0 = static_cast<std::int64_t>(f.x()), y0 = static_cast<std::int64_t>(f.y()),
                   z0 = static_cast<std::int64_t>(f.z());
        double v = 0.0;
        for (int c = 0; c < 8; ++c) {
            const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
            const double weight = (dx ? w.x() : 1.0 - w.x()) * (dy ? w.y() : 1.0 - w.y()) * (dz ? w.z() : 1.0 - w.z());
            v += weight * lattice(x0 + dx, y0 + dy, z0 + dz, ch);
        }
        return v;
    }

    Eigen::Vector3d operator()(const Eigen::Vector3d& p) const {
        Eigen::Vector3d c;
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const double v = 128.0 + 70.0 * std::sin(freq[ch].dot(p) + phase[ch]) +
                             30.0 * std::sin(freq[ch + 3].dot(p) + phase[ch + 3]) + detail * value_noise(p, ch);
            c[static_cast<Eigen::Index>(ch)] = std::clamp(v, 0.0, 255.0);
        }
        return c;
    }
};

inline Eigen::Matrix3d rotation(const Eigen::Vector3d& axis, double radians) {
    return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

}  // namespace detail

// Position of a canonical sample at frame t, in grid units.
class SyntheticPose {
public:
    SyntheticPose(const SyntheticSpec& spec, std::uint64_t seed) : spec_(spec) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> nd(0.0, 1.0);
        axis_ = Eigen::Vector3d(nd(rng), nd(rng), nd(rng)).normalized();
        for (auto& k : wave_) k = Eigen::Vector3d(nd(rng), nd(rng), nd(rng)).normalized() * (1.2 / spec.size);
        layout_ = detail::body_layout(spec.size);
        const double half = std::ldexp(1.0, static_cast<int>(spec.depth) - 1);
        center_ = Eigen::Vector3d::Constant(half);
    }

    Eigen::Vector3d operator()(const detail::SurfaceSample& s, std::size_t t) const {
        const double tt = static_cast<double>(t);
        const double mid = 0.5 * static_cast<double>(spec_.frames - 1);
        const double rad = spec_.rotation_deg * std::numbers::pi / 180.0;
        const Eigen::Vector3d shift = center_ + (tt - mid) * spec_.velocity;
        Eigen::Vector3d p = s.p;
        switch (spec_.motion) {
            case MotionKind::Static:
                return center_ + p;
            case MotionKind::Translation:
                return shift + p;
            case MotionKind::Rigid:
                return shift + detail::rotation(axis_, rad * tt) * p;
            case MotionKind::Articulated: {
                if (s.part == 1) {
                    const double swing = 2.0 * rad * tt;
                    p = layout_.hinge + detail::rotation(Eigen::Vector3d::UnitZ(), swing) * (p - layout_.hinge);
                }
                return shift + detail::rotation(Eigen::Vector3d::UnitY(), 0.5 * rad * tt) * p;
            }
            case MotionKind::Deformation: {
                const double phase = 0.6 * tt;
                for (std::size_t a = 0; a < 3; ++a) {
                    p[static_cast<Eigen::Index>(a)] += spec_.deformation * std::sin(wave_[a].dot(s.p) + phase);
                }
                return shift + p;
            }
        }
        return shift + p;
    }

private:
    SyntheticSpec spec_;
    Eigen::Vector3d axis_;
    std::array<Eigen::Vector3d, 3> wave_;
    detail::BodyLayout layout_;
    Eigen::Vector3d center_;
};

// Deterministic given the spec (including seed). Ground-truth motion of a
// voxel is the mean displacement of the surface samples it contains.
inline SyntheticSequence generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<detail::SurfaceSample> samples;
    switch (spec.shape) {
        case Shape::SphereShell:
            detail::sample_sphere(samples, spec.size, spec.sample_spacing, {});
            break;
        case Shape::Blob: {
            std::normal_distribution<double> nd(0.0, 1.0);
            std::uniform_real_distribution<double> amp(0.05, 0.12);
            std::vector<Eigen::Vector4d> bumps(4);
            for (auto& b : bumps) {
                Eigen::Vector3d d(nd(rng), nd(rng), nd(rng));
                d.normalize();
                b << d, amp(rng);
            }
            detail::sample_sphere(samples, spec.size, spec.sample_spacing, bumps);
            break;
        }
        case Shape::Body: {
            const auto b = detail::body_layout(spec.size);
            detail::sample_box(samples, -b.torso_half, b.torso_half, spec.sample_spacing, 0);
            detail::sample_box(samples, b.hinge + b.limb_lo, b.hinge + b.limb_hi, spec.sample_spacing, 1);
            break;
        }
    }
    const detail::Texture texture(rng, spec.texture_detail);
    const SyntheticPose pose(spec, spec.seed);

    VoxelGrid grid;
    grid.origin = Vec3::Zero();
    grid.stepsize = 1.0;
    grid.depth = spec.depth;
    const double hi = static_cast<double>(grid.extent());

    std::vector<Eigen::Vector3d> sample_colors;
    sample_colors.reserve(samples.size());
    for (const auto& s : samples) sample_colors.push_back(texture(s.p));

    SyntheticSequence seq;
    std::vector<std::vector<std::size_t>> voxel_of(spec.frames);
    for (std::size_t t = 0; t < spec.frames; ++t) {
        std::mt19937_64 noise_rng(spec.seed * 0x2545f4914f6cdd1dULL + t + 1);
        std::normal_distribution<double> noise(0.0, spec.color_noise);
        RawPointCloud cloud;
        cloud.points.reserve(samples.size());
        cloud.colors.reserve(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const Eigen::Vector3d p = pose(samples[i], t);
            if ((p.array() < 0.0).any() || (p.array() >= hi).any()) {
                throw Error(ErrorCode::OutOfRange, "synthetic shape leaves the grid at frame " + std::to_string(t));
            }
            cloud.points.push_back(p);
            Eigen::Vector3d c = sample_colors[i];
            if (spec.color_noise > 0.0) {
                for (int ch = 0; ch < 3; ++ch) c[ch] = std::clamp(c[ch] + noise(noise_rng), 0.0, 255.0);
            }
            cloud.colors.push_back({static_cast<int>(std::lround(c[0])), static_cast<int>(std::lround(c[1])),
                                    static_cast<int>(std::lround(c[2]))});
        }
        seq.frames.push_back(voxelize(cloud, grid));
        const auto& codes = seq.frames.back().codes();
        auto& vox = voxel_of[t];
        vox.reserve(samples.size());
        for (const auto& p : cloud.points) {
            const VoxelIndex v{static_cast<std::uint32_t>(p.x()), static_cast<std::uint32_t>(p.y()),
                               static_cast<std::uint32_t>(p.z())};
            const auto it = std::lower_bound(codes.begin(), codes.end(), morton_encode(v));
            vox.push_back(static_cast<std::size_t>(it - codes.begin()));
        }
    }
    for (std::size_t t = 0; t + 1 < spec.frames; ++t) {
        const auto n = static_cast<Eigen::Index>(seq.frames[t].size());
        Eigen::MatrixX3d sum = Eigen::MatrixX3d::Zero(n, 3);
        Eigen::VectorXd count = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto v = static_cast<Eigen::Index>(voxel_of[t][i]);
            sum.row(v) += (pose(samples[i], t + 1) - pose(samples[i], t)).transpose();
            count[v] += 1.0;
        }
        for (Eigen::Index v = 0; v < n; ++v) sum.row(v) /= count[v];
        seq.ground_truth.push_back(motion::MotionField::from_rows(sum));
    }
    return seq;
}

}  // namespace pcmc::harness

#endif  // PCMC_HARNESS_SYNTHETIC_HPP
