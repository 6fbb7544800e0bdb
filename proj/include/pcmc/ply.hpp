// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_PLY_HPP
#define PCMC_PLY_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "pcmc/error.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::ply {

enum class Format { Ascii, BinaryLittleEndian };

namespace detail {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline ScalarType parse_type(const std::string& name) {
    if (name == "char" || name == "int8") return ScalarType::Int8;
    if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
    if (name == "short" || name == "int16") return ScalarType::Int16;
    if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
    if (name == "int" || name == "int32") return ScalarType::Int32;
    if (name == "uint" || name == "uint32") return ScalarType::UInt32;
    if (name == "float" || name == "float32") return ScalarType::Float32;
    if (name == "double" || name == "float64") return ScalarType::Float64;
    throw Error(ErrorCode::MalformedStream, "unknown PLY property type '" + name + "'");
}

inline std::size_t type_size(ScalarType t) {
    switch (t) {
        case ScalarType::Int8:
        case ScalarType::UInt8: return 1;
        case ScalarType::Int16:
        case ScalarType::UInt16: return 2;
        case ScalarType::Int32:
        case ScalarType::UInt32:
        case ScalarType::Float32: return 4;
        case ScalarType::Float64: return 8;
    }
    return 0;
}

template <class T>
T load_le(const char* p) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

inline double read_binary(ScalarType t, const char* p) {
    switch (t) {
        case ScalarType::Int8: return load_le<std::int8_t>(p);
        case ScalarType::UInt8: return load_le<std::uint8_t>(p);
        case ScalarType::Int16: return load_le<std::int16_t>(p);
        case ScalarType::UInt16: return load_le<std::uint16_t>(p);
        case ScalarType::Int32: return load_le<std::int32_t>(p);
        case ScalarType::UInt32: return load_le<std::uint32_t>(p);
        case ScalarType::Float32: return load_le<float>(p);
        case ScalarType::Float64: return load_le<double>(p);
    }
    return 0.0;
}

struct Property {
    std::string name;
    ScalarType type;
};

}  // namespace detail

// Reads the vertex element of an ASCII or binary little-endian PLY file.
// Required properties: x, y, z, red, green, blue. Other elements must come
// after the vertex element or carry no data we need.
inline RawPointCloud read(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
        throw Error(ErrorCode::MalformedStream, "missing 'ply' magic");
    }
    Format format = Format::Ascii;
    std::size_t vertex_count = 0;
    bool in_vertex = false, seen_vertex = false;
    std::vector<detail::Property> props;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string f;
            ls >> f;
            if (f == "ascii") format = Format::Ascii;
            else if (f == "binary_little_endian") format = Format::BinaryLittleEndian;
            else throw Error(ErrorCode::MalformedStream, "unsupported PLY format '" + f + "'");
        } else if (word == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            in_vertex = (name == "vertex");
            if (in_vertex) {
                vertex_count = count;
                seen_vertex = true;
            } else if (!seen_vertex) {
                throw Error(ErrorCode::MalformedStream, "vertex element must come first");
            }
        } else if (word == "property") {
            std::string type, name;
            ls >> type;
            if (type == "list") {
                if (in_vertex) throw Error(ErrorCode::MalformedStream, "list property on vertex");
                continue;
            }
            ls >> name;
            if (in_vertex) props.push_back({name, detail::parse_type(type)});
        } else if (word == "end_header") {
            break;
        }
    }
    if (!seen_vertex) throw Error(ErrorCode::MalformedStream, "no vertex element");

    auto find = [&](const char* name) {
        for (std::size_t i = 0; i < props.size(); ++i) {
            if (props[i].name == name) return i;
        }
        throw Error(ErrorCode::MalformedStream, std::string("missing vertex property '") + name + "'");
    };
    const std::size_t ix = find("x"), iy = find("y"), iz = find("z");
    const std::size_t ir = find("red"), ig = find("green"), ib = find("blue");

    RawPointCloud cloud;
    cloud.points.reserve(vertex_count);
    cloud.colors.reserve(vertex_count);
    std::vector<double> values(props.size());

    std::size_t stride = 0;
    for (const auto& p : props) stride += detail::type_size(p.type);
    std::vector<char> record(stride);

    for (std::size_t v = 0; v < vertex_count; ++v) {
        if (format == Format::Ascii) {
            if (!std::getline(in, line)) {
                throw StreamError(ErrorCode::Truncated, "PLY vertex data ended early", v);
            }
            std::istringstream ls(line);
            for (auto& value : values) {
                if (!(ls >> value)) {
                    throw StreamError(ErrorCode::MalformedStream, "bad PLY vertex record", v);
                }
            }
        } else {
            if (!in.read(record.data(), static_cast<std::streamsize>(stride))) {
                throw StreamError(ErrorCode::Truncated, "PLY vertex data ended early", v);
            }
            std::size_t off = 0;
            for (std::size_t i = 0; i < props.size(); ++i) {
                values[i] = detail::read_binary(props[i].type, record.data() + off);
                off += detail::type_size(props[i].type);
            }
        }
        cloud.points.emplace_back(values[ix], values[iy], values[iz]);
        cloud.colors.push_back({static_cast<int>(std::lround(values[ir])),
                                static_cast<int>(std::lround(values[ig])),
                                static_cast<int>(std::lround(values[ib]))});
    }
    cloud.validate();
    return cloud;
}

inline RawPointCloud read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return read(in);
}

// Writes float32 coordinates and uchar colors.
inline void write(std::ostream& out, const RawPointCloud& cloud,
                  Format format = Format::BinaryLittleEndian) {
    cloud.validate();
    out << "ply\n"
        << "format " << (format == Format::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        const auto& c = cloud.colors[i];
        if (format == Format::Ascii) {
            out << std::setprecision(9) << static_cast<float>(p.x()) << ' '
                << static_cast<float>(p.y()) << ' ' << static_cast<float>(p.z()) << ' ' << c[0]
                << ' ' << c[1] << ' ' << c[2] << '\n';
        } else {
            const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                                  static_cast<float>(p.z())};
            const std::uint8_t rgb[3] = {static_cast<std::uint8_t>(c[0]),
                                         static_cast<std::uint8_t>(c[1]),
                                         static_cast<std::uint8_t>(c[2])};
            out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
            out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
        }
    }
}

inline void write_file(const std::string& path, const RawPointCloud& cloud,
                       Format format = Format::BinaryLittleEndian) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    write(out, cloud, format);
}

// Voxel centers in source units with colors rounded to the nearest integer.
inline RawPointCloud to_cloud(const VoxelFrame& frame) {
    RawPointCloud cloud;
    const auto& grid = frame.grid();
    for (std::size_t n = 0; n < frame.size(); ++n) {
        const auto i = static_cast<Eigen::Index>(n);
        cloud.points.push_back(grid.origin + grid.stepsize * frame.positions().row(i).transpose());
        Rgb c{};
        for (int k = 0; k < 3; ++k) {
            c[k] = static_cast<int>(std::clamp(std::lround(frame.colors()(i, k)), 0L, 255L));
        }
        cloud.colors.push_back(c);
    }
    return cloud;
}

}  // namespace pcmc::ply

#endif  // PCMC_PLY_HPP
